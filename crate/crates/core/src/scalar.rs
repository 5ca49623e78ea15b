use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating-point scalar used by the numeric kernels.
///
/// Implemented for `f32` and `f64` through the blanket impl; the pipeline
/// itself runs at `f64` (see [`crate::Scalar`]).
pub trait Real: Float + FloatConst + FromPrimitive + std::fmt::Debug + 'static {
    #[inline]
    fn c(v: f64) -> Self {
        Self::from_f64(v).expect("constant representable in scalar type")
    }

    #[inline]
    fn to_radians_(self) -> Self {
        self * Self::PI() / Self::c(180.0)
    }

    #[inline]
    fn to_degrees_(self) -> Self {
        self * Self::c(180.0) / Self::PI()
    }
}

impl<T> Real for T where T: Float + FloatConst + FromPrimitive + std::fmt::Debug + 'static {}

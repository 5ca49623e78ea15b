//! Synthetic wind and photovoltaic power time series from meteorological
//! measurements, plus a day-ahead forecast benchmarking harness.
//!
//! The library is organized around three stages:
//!
//! 1. **Synthesis** — physical models ([`pv`], [`wind`]) turn weather
//!    measurements into normalized power targets; [`synth`] provides a
//!    seeded desk-scale weather/NWP generator.
//! 2. **Packaging** — [`bundle`] reads and writes the per-location CSV
//!    bundle (`meta.csv`, `data_input_<loc>.csv`, `data_target_<loc>.csv`).
//! 3. **Benchmarking** — [`gbrt`] (from-scratch boosted trees), [`baseline`]
//!    (physical forecasts driven by NWP features) and [`scenario`]
//!    (truncated-training experiments, nRMSE/skill reporting).
//!
//! Numeric kernels are generic over the scalar type via [`scalar::Real`];
//! the pipeline and file formats are fixed to [`Scalar`] (`f64`).

pub mod baseline;
pub mod bundle;
pub mod error;
pub mod gbrt;
pub mod geo;
pub mod irradiance;
pub mod metrics;
pub mod nwp;
pub mod power;
pub mod pv;
pub mod sampler;
pub mod scalar;
pub mod scenario;
pub mod solar;
pub mod synth;
pub mod time;
pub mod weather;
pub mod wind;

pub use error::Error;

/// Scalar type used by the concrete pipeline and on-disk formats.
pub type Scalar = f64;

/// Solar position at the pipeline scalar type.
pub type SolarPosition = solar::SolarPosition<Scalar>;
/// Irradiance component triple at the pipeline scalar type.
pub type IrradianceTriple = irradiance::IrradianceTriple<Scalar>;
/// Boosted-tree model at the pipeline scalar type.
pub type GbrtModel = gbrt::GbrtModel<Scalar>;
/// Boosted-tree hyperparameters at the pipeline scalar type.
pub type GbrtConfig = gbrt::GbrtConfig<Scalar>;

pub type Result<T> = std::result::Result<T, Error>;

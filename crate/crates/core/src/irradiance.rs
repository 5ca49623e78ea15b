use crate::error::Error;
use crate::scalar::Real;

/// Zenith angle beyond which the beam component is treated as zero, to
/// suppress the cosine-division singularity near the horizon.
pub const ZENITH_CUTOFF_DEG: f64 = 87.0;

/// Hard ceiling on estimated direct normal irradiance.
pub const DNI_MAX_W_M2: f64 = 1500.0;

/// Instantaneous irradiance components in W/m².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IrradianceTriple<F> {
    pub ghi: F,
    pub dhi: F,
    pub dni: F,
}

/// Convert a 10-minute energy sum in J/cm² to mean power in W/m².
pub fn energy_sum_to_power<F: Real>(energy: F) -> Result<F, Error> {
    if energy < F::zero() {
        return Err(Error::NegativeEnergy(
            energy.to_f64().unwrap_or(f64::NEG_INFINITY),
        ));
    }
    // J/cm^2 -> J/m^2 is a factor 1e4; divide by the 600 s interval.
    Ok(energy * F::c(1e4) / F::c(600.0))
}

/// Estimate direct normal irradiance from global and diffuse components.
///
/// Zero at or beyond the zenith cutoff; clipped to `[0, DNI_MAX_W_M2]`.
pub fn estimate_dni<F: Real>(ghi: F, dhi: F, zenith_deg: F) -> Result<F, Error> {
    if dhi > ghi {
        return Err(Error::DiffuseExceedsGlobal {
            dhi: dhi.to_f64().unwrap_or(f64::NAN),
            ghi: ghi.to_f64().unwrap_or(f64::NAN),
        });
    }
    if zenith_deg >= F::c(ZENITH_CUTOFF_DEG) {
        return Ok(F::zero());
    }
    let dni = (ghi - dhi) / zenith_deg.to_radians_().cos();
    Ok(dni.max(F::zero()).min(F::c(DNI_MAX_W_M2)))
}

/// Unroll an accumulated-mean NWP irradiance channel to the instantaneous
/// value at `horizon_now`, clipping small negative differences at zero.
///
/// The first horizon of a run uses `mean_prev = 0`, `horizon_prev = 0`.
pub fn deaccumulate_nwp_mean<F: Real>(
    mean_now: F,
    horizon_now: u32,
    mean_prev: F,
    horizon_prev: u32,
) -> Result<F, Error> {
    if horizon_now != horizon_prev + 1 {
        return Err(Error::NonConsecutiveHorizons {
            prev: horizon_prev,
            now: horizon_now,
        });
    }
    let inst = mean_now * F::c(horizon_now as f64) - mean_prev * F::c(horizon_prev as f64);
    Ok(inst.max(F::zero()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn energy_conversion_hand_values() {
        assert_eq!(energy_sum_to_power(0.0f64).unwrap(), 0.0);
        // 0.36 J/cm^2 over 600 s: 0.36 * 10000 / 600 = 6 W/m^2
        assert_relative_eq!(energy_sum_to_power(0.36f64).unwrap(), 6.0);
        assert_relative_eq!(energy_sum_to_power(36.0f64).unwrap(), 600.0);
        assert!(energy_sum_to_power(-1.0f64).is_err());
    }

    #[test]
    fn dni_hand_value_at_60_degrees() {
        // (500 - 100) / cos 60 = 800
        assert_relative_eq!(
            estimate_dni(500.0, 100.0, 60.0).unwrap(),
            800.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn overcast_gives_zero_beam() {
        for z in [0.0, 30.0, 60.0, 86.0] {
            assert_eq!(estimate_dni(300.0, 300.0, z).unwrap(), 0.0);
        }
    }

    #[test]
    fn beyond_cutoff_gives_zero() {
        assert_eq!(estimate_dni(50.0, 10.0, 95.0).unwrap(), 0.0);
        assert_eq!(estimate_dni(50.0, 10.0, 87.0).unwrap(), 0.0);
    }

    #[test]
    fn dni_clipped_at_ceiling() {
        // Near the cutoff the cosine division explodes; must clip.
        let dni = estimate_dni(1000.0, 0.0, 86.9).unwrap();
        assert_eq!(dni, DNI_MAX_W_M2);
    }

    #[test]
    fn dhi_above_ghi_rejected() {
        assert!(estimate_dni(100.0, 200.0, 30.0).is_err());
    }

    #[test]
    fn deaccumulation_hand_values() {
        // constant run mean stays constant
        for h in 1..10u32 {
            let prev = if h == 1 { 0.0 } else { 100.0 };
            assert_relative_eq!(
                deaccumulate_nwp_mean(100.0, h, prev, h - 1).unwrap(),
                100.0
            );
        }
        // 2*150 - 1*100 = 200
        assert_relative_eq!(deaccumulate_nwp_mean(150.0, 2, 100.0, 1).unwrap(), 200.0);
        // 2*40 - 100 = -20, clipped
        assert_eq!(deaccumulate_nwp_mean(40.0, 2, 100.0, 1).unwrap(), 0.0);
        assert!(deaccumulate_nwp_mean(40.0, 3, 100.0, 1).is_err());
    }

    proptest! {
        #[test]
        fn energy_conversion_is_linear(a in 0.0f64..100.0, b in 0.0f64..100.0, lambda in 0.0f64..10.0) {
            let f = |x: f64| energy_sum_to_power(x).unwrap();
            prop_assert!((f(a + b) - (f(a) + f(b))).abs() < 1e-9 * (1.0 + f(a + b)));
            prop_assert!((f(lambda * a) - lambda * f(a)).abs() < 1e-9 * (1.0 + f(lambda * a)));
        }

        #[test]
        fn dni_closure_round_trip(
            ghi in 1.0f64..1000.0,
            frac in 0.0f64..=1.0,
            zenith in 0.0f64..85.0,
        ) {
            let dhi = ghi * frac;
            let dni = estimate_dni(ghi, dhi, zenith).unwrap();
            prop_assume!(dni < DNI_MAX_W_M2);
            let recovered = dhi + dni * zenith.to_radians().cos();
            prop_assert!((recovered - ghi).abs() <= 1e-9 * ghi.max(1.0));
        }

        #[test]
        fn deaccumulation_reconstructs_run_total(
            means in proptest::collection::vec(0.0f64..500.0, 1..48)
        ) {
            // Build a run whose instantaneous values are the given series,
            // accumulate, then de-accumulate; totals must match when no
            // clipping fires (they cannot here: inputs are nonnegative).
            let horizon = means.len() as u32;
            let mut acc = 0.0;
            let mut run_means = Vec::new();
            for (i, v) in means.iter().enumerate() {
                acc += v;
                run_means.push(acc / (i as f64 + 1.0));
            }
            let mut total = 0.0;
            let mut prev = 0.0;
            for (i, m) in run_means.iter().enumerate() {
                total += deaccumulate_nwp_mean(*m, i as u32 + 1, prev, i as u32).unwrap();
                prev = *m;
            }
            let expected = horizon as f64 * run_means.last().unwrap();
            prop_assert!((total - expected).abs() < 1e-6 * (1.0 + expected));
        }
    }
}

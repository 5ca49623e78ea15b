use crate::error::Error;
use crate::time::Timestamp;

/// One normalized power reading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerEntry {
    pub time: Timestamp,
    pub pw: f64,
    pub is_test: bool,
}

/// Timestamped normalized power values in [0, 1] with test flags.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PowerSeries {
    pub entries: Vec<PowerEntry>,
}

impl PowerSeries {
    pub fn new(entries: Vec<PowerEntry>) -> Result<Self, Error> {
        let series = PowerSeries { entries };
        series.validate()?;
        Ok(series)
    }

    pub fn validate(&self) -> Result<(), Error> {
        for (i, e) in self.entries.iter().enumerate() {
            if !(0.0..=1.0).contains(&e.pw) || !e.pw.is_finite() {
                return Err(Error::BundleValidation(format!(
                    "pw {} at {} outside [0, 1]",
                    e.pw, e.time
                )));
            }
            if i > 0 && e.time <= self.entries[i - 1].time {
                return Err(Error::BundleValidation(format!(
                    "timestamps not strictly increasing at {}",
                    e.time
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Linearly interpolate an hourly series to 15-minute cadence.
///
/// Three points are inserted between each adjacent pair; endpoints are kept
/// and the test flag of an interpolant is copied from the earlier endpoint.
pub fn interpolate_15min(series: &PowerSeries) -> Result<PowerSeries, Error> {
    if series.len() < 2 {
        return Err(Error::TooFewEntries {
            need: 2,
            got: series.len(),
        });
    }
    let mut out = Vec::with_capacity(series.len() * 4 - 3);
    for pair in series.entries.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        out.push(a);
        for k in 1..4 {
            let frac = k as f64 / 4.0;
            out.push(PowerEntry {
                time: a.time.plus_minutes(15 * k as i64),
                pw: a.pw + frac * (b.pw - a.pw),
                is_test: a.is_test,
            });
        }
    }
    out.push(*series.entries.last().unwrap());
    PowerSeries::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn hourly(pws: &[f64]) -> PowerSeries {
        let t0 = Timestamp::from_ymd_hms(2019, 6, 1, 0, 0, 0).unwrap();
        PowerSeries::new(
            pws.iter()
                .enumerate()
                .map(|(i, &pw)| PowerEntry {
                    time: t0.plus_hours(i as i64),
                    pw,
                    is_test: false,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn linear_ramp_interpolates_quartiles() {
        let out = interpolate_15min(&hourly(&[0.0, 1.0])).unwrap();
        let pws: Vec<f64> = out.entries.iter().map(|e| e.pw).collect();
        assert_eq!(pws, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn constant_series_stays_constant() {
        let out = interpolate_15min(&hourly(&[0.4, 0.4])).unwrap();
        assert!(out.entries.iter().all(|e| e.pw == 0.4));
    }

    #[test]
    fn midpoint_lands_at_plus_30_min() {
        let out = interpolate_15min(&hourly(&[0.2, 0.6])).unwrap();
        let mid = &out.entries[2];
        assert_eq!(mid.time.minute(), 30);
        assert!((mid.pw - 0.4).abs() < 1e-15);
    }

    #[test]
    fn single_entry_rejected() {
        assert!(interpolate_15min(&hourly(&[0.5])).is_err());
    }

    #[test]
    fn series_invariants_enforced() {
        let t = Timestamp::from_ymd_hms(2019, 6, 1, 0, 0, 0).unwrap();
        let bad_pw = PowerSeries::new(vec![PowerEntry {
            time: t,
            pw: 1.5,
            is_test: false,
        }]);
        assert!(bad_pw.is_err());
        let dup = PowerSeries::new(vec![
            PowerEntry { time: t, pw: 0.1, is_test: false },
            PowerEntry { time: t, pw: 0.2, is_test: false },
        ]);
        assert!(dup.is_err());
    }

    proptest! {
        #[test]
        fn interpolation_preserves_range(pws in proptest::collection::vec(0.0f64..=1.0, 2..20)) {
            let series = hourly(&pws);
            let out = interpolate_15min(&series).unwrap();
            let lo = pws.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = pws.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            for e in &out.entries {
                prop_assert!(e.pw >= lo - 1e-12 && e.pw <= hi + 1e-12);
            }
            prop_assert_eq!(out.len(), pws.len() * 4 - 3);
        }
    }
}

use crate::error::Error;
use crate::time::Timestamp;

/// One on-site measurement record at 10-minute cadence.
///
/// Radiation fields carry the 10-minute energy sum in J/cm²; both are
/// present (radiation station) or both absent (wind-only station).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeatherSample {
    pub time: Timestamp,
    pub wind_speed_10m: f64,
    pub ghi_energy: Option<f64>,
    pub dhi_energy: Option<f64>,
}

impl WeatherSample {
    pub fn wind_only(time: Timestamp, wind_speed_10m: f64) -> Result<Self, Error> {
        Self::new(time, wind_speed_10m, None, None)
    }

    pub fn new(
        time: Timestamp,
        wind_speed_10m: f64,
        ghi_energy: Option<f64>,
        dhi_energy: Option<f64>,
    ) -> Result<Self, Error> {
        if wind_speed_10m < 0.0 || !wind_speed_10m.is_finite() {
            return Err(Error::InvalidMeta(format!(
                "wind speed {wind_speed_10m} at {time} must be >= 0"
            )));
        }
        match (ghi_energy, dhi_energy) {
            (Some(g), Some(d)) => {
                if g < 0.0 || d < 0.0 {
                    return Err(Error::NegativeEnergy(g.min(d)));
                }
                if d > g {
                    return Err(Error::DiffuseExceedsGlobal { dhi: d, ghi: g });
                }
            }
            (None, None) => {}
            _ => {
                return Err(Error::MissingField {
                    field: "radiation pair (ghi_energy/dhi_energy)",
                    time: time.to_string(),
                })
            }
        }
        Ok(WeatherSample {
            time,
            wind_speed_10m,
            ghi_energy,
            dhi_energy,
        })
    }

    pub fn has_radiation(&self) -> bool {
        self.ghi_energy.is_some()
    }
}

/// Down-sample a 10-minute series to hourly cadence by keeping the
/// on-the-hour records. No interpolation or aggregation takes place.
pub fn downsample_to_hourly(samples: &[WeatherSample]) -> Result<Vec<WeatherSample>, Error> {
    for (i, pair) in samples.windows(2).enumerate() {
        if pair[1].time <= pair[0].time {
            return Err(Error::UnsortedInput(i + 1));
        }
    }
    Ok(samples
        .iter()
        .filter(|s| s.time.minute() == 0 && s.time.second() == 0)
        .copied()
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(h: u32, m: u32) -> Timestamp {
        Timestamp::from_ymd_hms(2019, 6, 1, h, m, 0).unwrap()
    }

    fn sample(t: Timestamp) -> WeatherSample {
        WeatherSample::wind_only(t, 5.0).unwrap()
    }

    #[test]
    fn keeps_only_on_the_hour_records() {
        let samples: Vec<_> = (0..6).map(|i| sample(ts(0, i * 10))).collect();
        let hourly = downsample_to_hourly(&samples).unwrap();
        assert_eq!(hourly.len(), 1);
        assert_eq!(hourly[0].time, ts(0, 0));
    }

    #[test]
    fn full_day_yields_24_samples() {
        let mut samples = Vec::new();
        for h in 0..24 {
            for m in 0..6 {
                samples.push(sample(ts(h, m * 10)));
            }
        }
        assert_eq!(samples.len(), 144);
        assert_eq!(downsample_to_hourly(&samples).unwrap().len(), 24);
    }

    #[test]
    fn no_on_the_hour_records_yields_empty() {
        let samples = vec![sample(ts(0, 10)), sample(ts(0, 20)), sample(ts(0, 50))];
        assert!(downsample_to_hourly(&samples).unwrap().is_empty());
    }

    #[test]
    fn unsorted_input_rejected() {
        let samples = vec![sample(ts(1, 0)), sample(ts(0, 0))];
        assert!(matches!(
            downsample_to_hourly(&samples),
            Err(Error::UnsortedInput(1))
        ));
    }

    #[test]
    fn radiation_pair_validation() {
        let t = ts(12, 0);
        assert!(WeatherSample::new(t, 3.0, Some(10.0), Some(4.0)).is_ok());
        assert!(WeatherSample::new(t, 3.0, Some(4.0), Some(10.0)).is_err());
        assert!(WeatherSample::new(t, 3.0, Some(4.0), None).is_err());
        assert!(WeatherSample::new(t, -1.0, None, None).is_err());
    }
}

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::power::{PowerEntry, PowerSeries};
use crate::time::Timestamp;

/// Energy source of a dataset; decides the input feature schema.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnergySource {
    Pv,
    Wind,
}

/// Usable input features of the PV schema (plus `nwp_fcst_horiz_hours`).
pub const PV_FEATURES: &[&str] = &[
    "T_HAG_2_M",
    "RELHUM_HAG_2_M",
    "PS_SFC_0_M",
    "U_GVL_60_HL",
    "V_GVL_60_HL",
    "ASWDIFDS_SFC_0_M_INSTANT_m1",
    "ASWDIFDS_SFC_0_M_INSTANT",
    "ASWDIFDS_SFC_0_M_INSTANT_p1",
    "ASWDIRS_SFC_0_M_INSTANT_m1",
    "ASWDIRS_SFC_0_M_INSTANT",
    "ASWDIRS_SFC_0_M_INSTANT_p1",
    "solar_azimuth",
    "solar_zenith",
];

/// Usable input features of the wind schema (plus `nwp_fcst_horiz_hours`).
pub const WIND_FEATURES: &[&str] = &[
    "T_HAG_2_M",
    "RELHUM_HAG_2_M",
    "PS_SFC_0_M",
    "U_GVL_58_HL_m1",
    "U_GVL_58_HL",
    "U_GVL_58_HL_p1",
    "V_GVL_58_HL_m1",
    "V_GVL_58_HL",
    "V_GVL_58_HL_p1",
    "U_GVL_60_HL_m1",
    "U_GVL_60_HL",
    "U_GVL_60_HL_p1",
    "V_GVL_60_HL_m1",
    "V_GVL_60_HL",
    "V_GVL_60_HL_p1",
    "ASWDIFDS_SFC_0_M_INSTANT",
    "ASWDIRS_SFC_0_M_INSTANT",
];

impl EnergySource {
    pub fn key(&self) -> &'static str {
        match self {
            EnergySource::Pv => "pv",
            EnergySource::Wind => "wind",
        }
    }

    /// Feature columns of the input CSV, excluding `fcst_time` and
    /// `nwp_fcst_horiz_hours`.
    pub fn feature_names(&self) -> &'static [&'static str] {
        match self {
            EnergySource::Pv => PV_FEATURES,
            EnergySource::Wind => WIND_FEATURES,
        }
    }

    /// Base columns that get the `_m1`/`_p1` lag treatment.
    pub fn lagged_names(&self) -> &'static [&'static str] {
        match self {
            EnergySource::Pv => &["ASWDIFDS_SFC_0_M_INSTANT", "ASWDIRS_SFC_0_M_INSTANT"],
            EnergySource::Wind => &[
                "U_GVL_58_HL",
                "V_GVL_58_HL",
                "U_GVL_60_HL",
                "V_GVL_60_HL",
            ],
        }
    }
}

impl fmt::Display for EnergySource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for EnergySource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "pv" => Ok(EnergySource::Pv),
            "wind" => Ok(EnergySource::Wind),
            _ => Err(Error::InvalidConfig(format!("unknown energy source '{s}'"))),
        }
    }
}

/// One timestamped NWP feature vector at a grid node. `values` is aligned
/// with the schema's `feature_names`.
#[derive(Debug, Clone, PartialEq)]
pub struct NwpRecord {
    pub fcst_time: Timestamp,
    pub nwp_fcst_horiz_hours: u32,
    pub source: EnergySource,
    pub values: Vec<f64>,
}

impl NwpRecord {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.source
            .feature_names()
            .iter()
            .position(|&n| n == name)
            .map(|i| self.values[i])
    }

    pub fn validate(&self) -> Result<(), Error> {
        let names = self.source.feature_names();
        if self.values.len() != names.len() {
            return Err(Error::SchemaMismatch(format!(
                "{} record has {} values, schema wants {}",
                self.source,
                self.values.len(),
                names.len()
            )));
        }
        for (name, v) in names.iter().zip(&self.values) {
            if !v.is_finite() {
                return Err(Error::SchemaMismatch(format!(
                    "non-finite value in {name} at {}",
                    self.fcst_time
                )));
            }
            if name.starts_with("ASW") && *v < 0.0 {
                return Err(Error::SchemaMismatch(format!(
                    "negative irradiance {v} in {name} at {}",
                    self.fcst_time
                )));
            }
        }
        Ok(())
    }
}

/// One raw hourly step of an NWP model run before schema assembly; keyed
/// column values, sorted-by-horizon within a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RawNwpStep {
    pub horizon: u32,
    pub values: BTreeMap<String, f64>,
}

/// One daily 00:00 model run.
#[derive(Debug, Clone, PartialEq)]
pub struct NwpRun {
    pub run_start: Timestamp,
    pub steps: Vec<RawNwpStep>,
}

/// Add `_m1`/`_p1` lag columns for each named base feature; the value at
/// the previous/next hour of the run, zero-filled at run boundaries.
pub fn build_lag_features(steps: &mut [RawNwpStep], lagged: &[&str]) -> Result<(), Error> {
    for pair in steps.windows(2) {
        if pair[1].horizon != pair[0].horizon + 1 {
            return Err(Error::NonConsecutiveHorizons {
                prev: pair[0].horizon,
                now: pair[1].horizon,
            });
        }
    }
    for name in lagged {
        let base: Vec<f64> = steps
            .iter()
            .map(|s| {
                s.values.get(*name).copied().ok_or_else(|| {
                    Error::SchemaMismatch(format!("missing base column {name} for lagging"))
                })
            })
            .collect::<Result<_, _>>()?;
        let n = base.len();
        for (i, step) in steps.iter_mut().enumerate() {
            let m1 = if i > 0 { base[i - 1] } else { 0.0 };
            let p1 = if i + 1 < n { base[i + 1] } else { 0.0 };
            step.values.insert(format!("{name}_m1"), m1);
            step.values.insert(format!("{name}_p1"), p1);
        }
    }
    Ok(())
}

/// Assemble schema-ordered records from a raw run. Steps must already
/// carry all schema columns (lags built, irradiance de-accumulated, sun
/// angles computed for PV).
pub fn assemble_records(source: EnergySource, run: &NwpRun) -> Result<Vec<NwpRecord>, Error> {
    let names = source.feature_names();
    let mut out = Vec::with_capacity(run.steps.len());
    for step in &run.steps {
        let mut values = Vec::with_capacity(names.len());
        for name in names {
            match step.values.get(*name) {
                Some(v) => values.push(*v),
                None => {
                    return Err(Error::SchemaMismatch(format!(
                        "missing column {name} at horizon {}",
                        step.horizon
                    )))
                }
            }
        }
        let record = NwpRecord {
            fcst_time: run.run_start.plus_hours(step.horizon as i64),
            nwp_fcst_horiz_hours: step.horizon,
            source,
            values,
        };
        record.validate()?;
        out.push(record);
    }
    Ok(out)
}

/// Day-ahead delivery window: horizons 24..=47 of the 00:00 run.
pub const DAY_AHEAD_HORIZONS: std::ops::RangeInclusive<u32> = 24..=47;

/// Test period start: samples at or after this timestamp carry the flag.
pub fn test_period_start() -> Timestamp {
    Timestamp::from_ymd_hms(2019, 12, 1, 0, 0, 0).unwrap()
}

/// True iff the timestamp falls in the fixed test period.
pub fn assign_test_flag(t: &Timestamp) -> bool {
    *t >= test_period_start()
}

/// Input/target tables of one location after day-ahead synchronization;
/// rows are aligned one-to-one by timestamp.
#[derive(Debug, Clone, PartialEq)]
pub struct SynchronizedTable {
    pub inputs: Vec<NwpRecord>,
    pub targets: PowerSeries,
}

/// Join daily 00:00 model runs with the target series under the day-ahead
/// scenario: keep horizons 24..=47, inner-join on `fcst_time`, drop
/// unmatched rows on either side, flag the test period.
pub fn synchronize_day_ahead(
    source: EnergySource,
    runs: &[NwpRun],
    targets: &PowerSeries,
) -> Result<SynchronizedTable, Error> {
    let mut inputs = Vec::new();
    let mut joined = Vec::new();
    let target_index: BTreeMap<Timestamp, f64> = targets
        .entries
        .iter()
        .map(|e| (e.time, e.pw))
        .collect();
    for run in runs {
        if !run.run_start.is_midnight() {
            return Err(Error::RunStartNotMidnight(run.run_start.to_string()));
        }
        for record in assemble_records(source, run)? {
            if !DAY_AHEAD_HORIZONS.contains(&record.nwp_fcst_horiz_hours) {
                continue;
            }
            if let Some(&pw) = target_index.get(&record.fcst_time) {
                joined.push(PowerEntry {
                    time: record.fcst_time,
                    pw,
                    is_test: assign_test_flag(&record.fcst_time),
                });
                inputs.push(record);
            }
        }
    }
    Ok(SynchronizedTable {
        inputs,
        targets: PowerSeries::new(joined)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step(horizon: u32, v: f64) -> RawNwpStep {
        let mut values = BTreeMap::new();
        values.insert("X".to_string(), v);
        RawNwpStep { horizon, values }
    }

    #[test]
    fn schema_sizes_match_documented_counts() {
        // 14 usable PV features = horizon + 13; 18 wind = horizon + 17
        assert_eq!(PV_FEATURES.len(), 13);
        assert_eq!(WIND_FEATURES.len(), 17);
    }

    #[test]
    fn lag_shift_semantics() {
        let mut steps = vec![step(0, 1.0), step(1, 2.0), step(2, 3.0)];
        build_lag_features(&mut steps, &["X"]).unwrap();
        assert_eq!(steps[1].values["X_m1"], 1.0);
        assert_eq!(steps[1].values["X"], 2.0);
        assert_eq!(steps[1].values["X_p1"], 3.0);
    }

    #[test]
    fn lag_boundaries_zero_filled() {
        let mut steps = vec![step(0, 5.0), step(1, 6.0)];
        build_lag_features(&mut steps, &["X"]).unwrap();
        assert_eq!(steps[0].values["X_m1"], 0.0);
        assert_eq!(steps[1].values["X_p1"], 0.0);
    }

    #[test]
    fn lag_constant_series_constant_inside() {
        let mut steps: Vec<RawNwpStep> = (0..5).map(|h| step(h, 7.0)).collect();
        build_lag_features(&mut steps, &["X"]).unwrap();
        for s in &steps[1..4] {
            assert_eq!(s.values["X_m1"], 7.0);
            assert_eq!(s.values["X_p1"], 7.0);
        }
    }

    #[test]
    fn lag_rejects_non_consecutive_horizons() {
        let mut steps = vec![step(0, 1.0), step(2, 2.0)];
        assert!(matches!(
            build_lag_features(&mut steps, &["X"]),
            Err(Error::NonConsecutiveHorizons { prev: 0, now: 2 })
        ));
    }

    fn wind_step(horizon: u32) -> RawNwpStep {
        let mut values = BTreeMap::new();
        for name in WIND_FEATURES {
            values.insert(name.to_string(), 1.0);
        }
        RawNwpStep { horizon, values }
    }

    fn run_with_horizons(day: u32, horizons: std::ops::RangeInclusive<u32>) -> NwpRun {
        NwpRun {
            run_start: Timestamp::from_ymd_hms(2019, 6, day, 0, 0, 0).unwrap(),
            steps: horizons.map(wind_step).collect(),
        }
    }

    fn hourly_targets(start: Timestamp, hours: usize) -> PowerSeries {
        PowerSeries::new(
            (0..hours)
                .map(|h| PowerEntry {
                    time: start.plus_hours(h as i64),
                    pw: 0.5,
                    is_test: false,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn complete_run_yields_24_samples() {
        let run = run_with_horizons(1, 1..=48);
        let targets = hourly_targets(run.run_start, 72);
        let table = synchronize_day_ahead(EnergySource::Wind, &[run], &targets).unwrap();
        assert_eq!(table.inputs.len(), 24);
        assert_eq!(table.targets.len(), 24);
        let horizons: Vec<u32> = table.inputs.iter().map(|r| r.nwp_fcst_horiz_hours).collect();
        assert_eq!(horizons, (24..=47).collect::<Vec<u32>>());
    }

    #[test]
    fn missing_target_hour_drops_to_23() {
        let run = run_with_horizons(1, 1..=48);
        let mut targets = hourly_targets(run.run_start, 72);
        // remove the hour matching horizon 30
        let gone = run.run_start.plus_hours(30);
        targets.entries.retain(|e| e.time != gone);
        let table = synchronize_day_ahead(EnergySource::Wind, &[run], &targets).unwrap();
        assert_eq!(table.inputs.len(), 23);
    }

    #[test]
    fn horizons_outside_window_never_appear() {
        let run = run_with_horizons(1, 1..=48);
        let targets = hourly_targets(run.run_start, 72);
        let table = synchronize_day_ahead(EnergySource::Wind, &[run], &targets).unwrap();
        assert!(table
            .inputs
            .iter()
            .all(|r| (24..=47).contains(&r.nwp_fcst_horiz_hours)));
    }

    #[test]
    fn non_midnight_run_start_rejected() {
        let run = NwpRun {
            run_start: Timestamp::from_ymd_hms(2019, 6, 1, 12, 0, 0).unwrap(),
            steps: vec![wind_step(24)],
        };
        let targets = hourly_targets(run.run_start, 48);
        assert!(matches!(
            synchronize_day_ahead(EnergySource::Wind, &[run], &targets),
            Err(Error::RunStartNotMidnight(_))
        ));
    }

    #[test]
    fn test_flag_boundary() {
        assert!(!assign_test_flag(
            &Timestamp::from_ymd_hms(2019, 11, 30, 23, 0, 0).unwrap()
        ));
        assert!(assign_test_flag(
            &Timestamp::from_ymd_hms(2019, 12, 1, 0, 0, 0).unwrap()
        ));
        assert!(assign_test_flag(
            &Timestamp::from_ymd_hms(2020, 6, 1, 12, 0, 0).unwrap()
        ));
    }

    #[test]
    fn record_validation_flags_negative_irradiance() {
        let mut values = vec![0.0; PV_FEATURES.len()];
        values[PV_FEATURES.iter().position(|&n| n == "ASWDIRS_SFC_0_M_INSTANT").unwrap()] = -1.0;
        let record = NwpRecord {
            fcst_time: Timestamp::from_ymd_hms(2019, 6, 1, 12, 0, 0).unwrap(),
            nwp_fcst_horiz_hours: 36,
            source: EnergySource::Pv,
            values,
        };
        assert!(record.validate().is_err());
    }
}

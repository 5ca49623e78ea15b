use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::baseline::{physical_baseline_pv, physical_baseline_wind};
use crate::bundle::{DatasetBundle, LocationData, PlantMeta};
use crate::error::Error;
use crate::gbrt::{
    default_depth_grid, default_lr_grid, fit_gbrt, grid_search_cv, predict, DEFAULT_CV_FOLDS,
    DEFAULT_N_ESTIMATORS,
};
use crate::metrics::nrmse;
use crate::nwp::NwpRecord;
use crate::power::PowerEntry;
use crate::wind::{load_mclean_curve, reference_curve, Terrain, PLACEHOLDER_MCLEAN_CSV};

/// Allowed training-window lengths in days; 365 means the full training
/// period at native hourly resolution.
pub const TRAINING_DAYS_CHOICES: [u32; 6] = [7, 14, 30, 60, 90, 365];

/// Marker value of `TRAINING_DAYS_CHOICES` selecting the full window.
pub const FULL_TRAINING_DAYS: u32 = 365;

/// Meteorological season used to filter truncated training windows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Season {
    Djf,
    Mam,
    Jja,
    Son,
}

impl Season {
    pub const ALL: [Season; 4] = [Season::Djf, Season::Mam, Season::Jja, Season::Son];

    pub fn months(&self) -> [u32; 3] {
        match self {
            Season::Djf => [12, 1, 2],
            Season::Mam => [3, 4, 5],
            Season::Jja => [6, 7, 8],
            Season::Son => [9, 10, 11],
        }
    }

    pub fn contains_month(&self, month: u32) -> bool {
        self.months().contains(&month)
    }

    pub fn key(&self) -> &'static str {
        match self {
            Season::Djf => "DJF",
            Season::Mam => "MAM",
            Season::Jja => "JJA",
            Season::Son => "SON",
        }
    }
}

impl fmt::Display for Season {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Season {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_uppercase().as_str() {
            "DJF" => Ok(Season::Djf),
            "MAM" => Ok(Season::Mam),
            "JJA" => Ok(Season::Jja),
            "SON" => Ok(Season::Son),
            other => Err(Error::InvalidConfig(format!("unknown season {other}"))),
        }
    }
}

/// Forecast model selector for one evaluation run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// Gradient-boosted trees on the NWP feature table.
    Gbrt,
    /// Physical PV model chain on the NWP irradiance channels.
    PvPhysical,
    /// Physical wind model with the turbine's own reference power curve.
    Enercon,
    /// Physical wind model with a terrain-specific literature curve.
    Mclean(Terrain),
}

impl ModelKind {
    pub fn key(&self) -> String {
        match self {
            ModelKind::Gbrt => "gbrt".into(),
            ModelKind::PvPhysical => "pv_physical".into(),
            ModelKind::Enercon => "enercon".into(),
            ModelKind::Mclean(t) => {
                format!("mclean_{}", t.key().to_ascii_lowercase().replace('-', "_"))
            }
        }
    }

    pub fn is_physical(&self) -> bool {
        !matches!(self, ModelKind::Gbrt)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "gbrt" => Ok(ModelKind::Gbrt),
            "pv_physical" => Ok(ModelKind::PvPhysical),
            "enercon" => Ok(ModelKind::Enercon),
            "mclean_lowland" => Ok(ModelKind::Mclean(Terrain::Lowland)),
            "mclean_lowland_regulated" => Ok(ModelKind::Mclean(Terrain::LowlandRegulated)),
            "mclean_offshore" => Ok(ModelKind::Mclean(Terrain::Offshore)),
            "mclean_upland" => Ok(ModelKind::Mclean(Terrain::Upland)),
            other => Err(Error::UnknownModel(other.to_string())),
        }
    }
}

/// One evaluation scenario: training-window length (days) and an optional
/// season filter. Truncated windows (anything but the full 365 marker) are
/// interpolated to 15-minute resolution before training.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScenarioConfig {
    pub training_days: u32,
    pub season: Option<Season>,
}

impl ScenarioConfig {
    pub fn new(training_days: u32, season: Option<Season>) -> Result<Self, Error> {
        let config = ScenarioConfig {
            training_days,
            season,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !TRAINING_DAYS_CHOICES.contains(&self.training_days) {
            return Err(Error::InvalidConfig(format!(
                "training_days {} not in {TRAINING_DAYS_CHOICES:?}",
                self.training_days
            )));
        }
        Ok(())
    }

    pub fn is_truncated(&self) -> bool {
        self.training_days != FULL_TRAINING_DAYS
    }

    pub fn season_key(&self) -> String {
        self.season.map(|s| s.key().to_string()).unwrap_or_else(|| "all".into())
    }
}

/// Hyperparameter search settings for the GBRT path.
#[derive(Debug, Clone, PartialEq)]
pub struct GbrtSettings {
    pub lr_grid: Vec<f64>,
    pub depth_grid: Vec<usize>,
    pub folds: usize,
    pub n_estimators: usize,
}

impl Default for GbrtSettings {
    fn default() -> Self {
        GbrtSettings {
            lr_grid: default_lr_grid(),
            depth_grid: default_depth_grid(),
            folds: DEFAULT_CV_FOLDS,
            n_estimators: DEFAULT_N_ESTIMATORS,
        }
    }
}

impl GbrtSettings {
    pub fn validate(&self) -> Result<(), Error> {
        if self.lr_grid.is_empty() || self.depth_grid.is_empty() {
            return Err(Error::InvalidConfig("empty hyperparameter grid".into()));
        }
        if self.folds < 2 || self.n_estimators == 0 {
            return Err(Error::InvalidConfig(
                "need >= 2 folds and >= 1 estimator".into(),
            ));
        }
        Ok(())
    }
}

/// One evaluated (park, model, scenario) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub park: String,
    pub model: String,
    pub season: String,
    pub training_days: u32,
    pub nrmse: f64,
}

// Design-matrix row: forecast horizon followed by the schema feature values.
fn design_row(record: &NwpRecord) -> Vec<f64> {
    let mut row = Vec::with_capacity(record.values.len() + 1);
    row.push(record.nwp_fcst_horiz_hours as f64);
    row.extend_from_slice(&record.values);
    row
}

struct TrainingSet {
    x: Vec<Vec<f64>>,
    y: Vec<f64>,
}

// Linear interpolation of rows and targets from hourly to 15-minute
// spacing; pairs that are not exactly one hour apart are left as a gap.
fn interpolate_training_15min(
    times: &[crate::time::Timestamp],
    x: &[Vec<f64>],
    y: &[f64],
) -> TrainingSet {
    let mut xi = Vec::with_capacity(x.len() * 4);
    let mut yi = Vec::with_capacity(y.len() * 4);
    for i in 0..x.len() {
        xi.push(x[i].clone());
        yi.push(y[i]);
        if i + 1 < x.len() && times[i + 1].seconds_since(&times[i]) == 3600 {
            for k in 1..4 {
                let w = k as f64 / 4.0;
                let row: Vec<f64> = x[i]
                    .iter()
                    .zip(&x[i + 1])
                    .map(|(a, b)| a + w * (b - a))
                    .collect();
                xi.push(row);
                yi.push(y[i] + w * (y[i + 1] - y[i]));
            }
        }
    }
    TrainingSet { x: xi, y: yi }
}

// Select the GBRT training set for a scenario: all unflagged rows for the
// full window, otherwise the last `training_days` distinct dates (within
// the season, when one is set) before the test period, interpolated to
// 15-minute resolution.
fn select_training(
    data: &LocationData,
    scenario: &ScenarioConfig,
) -> Result<TrainingSet, Error> {
    let train: Vec<(usize, &PowerEntry)> = data
        .targets
        .entries
        .iter()
        .enumerate()
        .filter(|(_, e)| !e.is_test)
        .collect();
    if train.is_empty() {
        return Err(Error::EmptyTrainingWindow);
    }

    if !scenario.is_truncated() {
        let x = train.iter().map(|(i, _)| design_row(&data.inputs[*i])).collect();
        let y = train.iter().map(|(_, e)| e.pw).collect();
        return Ok(TrainingSet { x, y });
    }

    let in_season = |e: &PowerEntry| {
        scenario
            .season
            .map(|s| s.contains_month(e.time.month()))
            .unwrap_or(true)
    };
    let dates: BTreeSet<_> = train
        .iter()
        .filter(|(_, e)| in_season(e))
        .map(|(_, e)| e.time.date())
        .collect();
    let keep: BTreeSet<_> = dates
        .into_iter()
        .rev()
        .take(scenario.training_days as usize)
        .collect();
    if keep.is_empty() {
        return Err(Error::EmptyTrainingWindow);
    }

    let mut times = Vec::new();
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (i, e) in &train {
        if keep.contains(&e.time.date()) {
            times.push(e.time);
            x.push(design_row(&data.inputs[*i]));
            y.push(e.pw);
        }
    }
    Ok(interpolate_training_15min(&times, &x, &y))
}

fn find_location<'a>(
    bundle: &'a DatasetBundle,
    loc_id: &str,
) -> Result<(&'a PlantMeta, &'a LocationData), Error> {
    let meta = bundle
        .meta_rows
        .iter()
        .find(|m| m.loc_id() == loc_id)
        .ok_or_else(|| Error::InvalidLocation(format!("unknown loc_id {loc_id}")))?;
    let data = bundle
        .locations
        .iter()
        .find(|l| l.loc_id == loc_id)
        .ok_or_else(|| Error::InvalidLocation(format!("no data for loc_id {loc_id}")))?;
    Ok((meta, data))
}

/// Evaluate one model on one park under one scenario and return its test
/// nRMSE. Physical models ignore the training window; the GBRT path runs
/// the cross-validated grid search on the scenario's training set.
pub fn run_scenario(
    bundle: &DatasetBundle,
    loc_id: &str,
    model: ModelKind,
    scenario: &ScenarioConfig,
    gbrt: &GbrtSettings,
    mclean_csv: Option<&str>,
) -> Result<ScenarioResult, Error> {
    scenario.validate()?;
    gbrt.validate()?;
    let (meta, data) = find_location(bundle, loc_id)?;

    let test: Vec<(usize, &PowerEntry)> = data
        .targets
        .entries
        .iter()
        .enumerate()
        .filter(|(_, e)| e.is_test)
        .collect();
    if test.is_empty() {
        return Err(Error::EmptyInput("test period"));
    }
    let y_test: Vec<f64> = test.iter().map(|(_, e)| e.pw).collect();
    let test_inputs: Vec<NwpRecord> = test
        .iter()
        .map(|(i, _)| data.inputs[*i].clone())
        .collect();

    let yhat: Vec<f64> = match (model, meta) {
        (ModelKind::Gbrt, _) => {
            let training = select_training(data, scenario)?;
            let config = grid_search_cv(
                &training.x,
                &training.y,
                &gbrt.lr_grid,
                &gbrt.depth_grid,
                gbrt.folds,
            )?;
            let config = crate::gbrt::GbrtConfig {
                n_estimators: gbrt.n_estimators,
                ..config
            };
            let fitted = fit_gbrt(&training.x, &training.y, &config)?;
            let x_test: Vec<Vec<f64>> = test_inputs.iter().map(design_row).collect();
            predict(&fitted, &x_test)?
        }
        (ModelKind::PvPhysical, PlantMeta::Pv(pv)) => physical_baseline_pv(&test_inputs, pv)?
            .entries
            .iter()
            .map(|e| e.pw)
            .collect(),
        (ModelKind::Enercon, PlantMeta::Wind(wind)) => {
            let curve = reference_curve(wind.rated_power_kw);
            physical_baseline_wind(&test_inputs, wind, &curve)?
                .entries
                .iter()
                .map(|e| e.pw)
                .collect()
        }
        (ModelKind::Mclean(terrain), PlantMeta::Wind(wind)) => {
            let curve = load_mclean_curve(terrain, mclean_csv.unwrap_or(PLACEHOLDER_MCLEAN_CSV))?;
            physical_baseline_wind(&test_inputs, wind, &curve)?
                .entries
                .iter()
                .map(|e| e.pw)
                .collect()
        }
        (m, _) => {
            return Err(Error::UnknownModel(format!(
                "model {m} does not apply to a {} park",
                meta.source()
            )))
        }
    };

    Ok(ScenarioResult {
        park: loc_id.to_string(),
        model: model.key(),
        season: scenario.season_key(),
        training_days: scenario.training_days,
        nrmse: nrmse(&y_test, &yhat)?,
    })
}

/// Results in the machine-readable long format.
pub fn results_to_csv(results: &[ScenarioResult]) -> String {
    let mut out = String::from("park,model,season,training_days,nrmse\n");
    for r in results {
        out.push_str(&format!(
            "{},{},{},{},{:.16e}\n",
            r.park, r.model, r.season, r.training_days, r.nrmse
        ));
    }
    out
}

/// Rendered benchmark report: a plain-text summary plus the mean-nRMSE
/// matrix in CSV form.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub text: String,
    pub matrix_csv: String,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Aggregate results into the report: one mean-nRMSE row per training
/// window with the best model flagged, plus per-reference skill
/// distributions of the GBRT model over parks.
pub fn report_tables(results: &[ScenarioResult]) -> Result<Report, Error> {
    if results.is_empty() {
        return Err(Error::EmptyInput("results"));
    }
    let mut models: Vec<&str> = Vec::new();
    for r in results {
        if !models.iter().any(|m| *m == r.model) {
            models.push(&r.model);
        }
    }
    let mut day_rows: Vec<u32> = results.iter().map(|r| r.training_days).collect();
    day_rows.sort_unstable();
    day_rows.dedup();

    let mean_cell = |days: u32, model: &str| -> Option<f64> {
        let vals: Vec<f64> = results
            .iter()
            .filter(|r| r.training_days == days && r.model == model)
            .map(|r| r.nrmse)
            .collect();
        if vals.is_empty() {
            None
        } else {
            Some(vals.iter().sum::<f64>() / vals.len() as f64)
        }
    };

    let mut text = String::from("mean nRMSE by training window (best per row *)\n");
    let mut matrix_csv = String::from("training_days");
    for m in &models {
        matrix_csv.push(',');
        matrix_csv.push_str(m);
    }
    matrix_csv.push('\n');
    text.push_str(&format!("{:>13}", "training_days"));
    for m in &models {
        text.push_str(&format!(" {m:>24}"));
    }
    text.push('\n');

    for &days in &day_rows {
        let cells: Vec<Option<f64>> = models.iter().map(|m| mean_cell(days, m)).collect();
        let best = cells
            .iter()
            .flatten()
            .fold(f64::INFINITY, |a, &b| a.min(b));
        matrix_csv.push_str(&days.to_string());
        text.push_str(&format!("{days:>13}"));
        for cell in &cells {
            match cell {
                Some(v) => {
                    matrix_csv.push_str(&format!(",{v:.6}"));
                    let flag = if *v == best { "*" } else { " " };
                    text.push_str(&format!(" {:>23}{flag}", format!("{v:.4}")));
                }
                None => {
                    matrix_csv.push(',');
                    text.push_str(&format!(" {:>24}", "-"));
                }
            }
        }
        matrix_csv.push('\n');
        text.push('\n');
    }

    // skill of GBRT against each physical reference, distribution over parks
    let references: Vec<&str> = models.iter().filter(|m| **m != "gbrt").copied().collect();
    if models.iter().any(|m| *m == "gbrt") && !references.is_empty() {
        text.push_str("\nskill of gbrt vs reference (negative = improvement)\n");
        text.push_str(&format!(
            "{:>24} {:>13} {:>8} {:>8} {:>8} {:>8} {:>8}\n",
            "reference", "training_days", "min", "q25", "median", "q75", "max"
        ));
        for reference in references {
            for &days in &day_rows {
                let mut skills = Vec::new();
                for r in results.iter().filter(|r| {
                    r.model == "gbrt" && r.training_days == days
                }) {
                    if let Some(refr) = results.iter().find(|q| {
                        q.model == reference
                            && q.park == r.park
                            && q.season == r.season
                            && q.training_days == days
                    }) {
                        skills.push(crate::metrics::skill(r.nrmse, refr.nrmse));
                    }
                }
                if skills.is_empty() {
                    continue;
                }
                skills.sort_by(|a, b| a.total_cmp(b));
                text.push_str(&format!(
                    "{:>24} {:>13} {:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>8.4}\n",
                    reference,
                    days,
                    skills[0],
                    quantile(&skills, 0.25),
                    quantile(&skills, 0.5),
                    quantile(&skills, 0.75),
                    skills[skills.len() - 1],
                ));
            }
        }
    }

    Ok(Report { text, matrix_csv })
}

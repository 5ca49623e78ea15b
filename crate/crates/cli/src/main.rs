use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Deserialize;

use powersynth::bundle::{read_bundle, write_bundle, DatasetBundle};
use powersynth::geo::GeoLocation;
use powersynth::nwp::EnergySource;
use powersynth::sampler::{default_turbine_catalog, read_turbine_catalog, TurbineCatalogEntry};
use powersynth::scenario::{
    report_tables, results_to_csv, run_scenario, GbrtSettings, ModelKind, ScenarioConfig,
    ScenarioResult, Season,
};
use powersynth::synth::{generate_bundle, GenerateConfig};

#[derive(Parser)]
#[command(name = "powersynth", version, about = "Synthetic power datasets and day-ahead forecast benchmarks")]
struct Cli {
    /// Worker parallelism for independent jobs (default: available cores)
    #[arg(long, global = true, env = "POWERSYNTH_JOBS")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset bundle from a declarative config file
    Generate(GenerateArgs),
    /// Evaluate forecast models over a bundle and write results + report
    Evaluate(EvaluateArgs),
    /// Re-render the report tables from an existing results file
    Report(ReportArgs),
    /// Check bundle invariants on disk
    Validate(ValidateArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// TOML config with date range, noise level, and park locations
    #[arg(long)]
    config: PathBuf,
    /// Output directory; one subdirectory per energy source
    #[arg(long, env = "POWERSYNTH_OUT")]
    out: PathBuf,
    /// Override the config's global seed
    #[arg(long, env = "POWERSYNTH_SEED")]
    seed: Option<u64>,
    /// Turbine catalog CSV (built-in catalog when omitted)
    #[arg(long)]
    catalog: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Bundle directory produced by `generate`
    #[arg(long)]
    bundle: PathBuf,
    /// Comma-separated model names (gbrt, pv_physical, enercon, mclean_*)
    #[arg(long, value_delimiter = ',', required = true)]
    models: Vec<String>,
    /// Comma-separated training-window lengths in days
    #[arg(long, value_delimiter = ',', required = true)]
    training_days: Vec<u32>,
    /// Optional season filter for truncated windows (DJF/MAM/JJA/SON)
    #[arg(long)]
    season: Option<String>,
    /// Output directory for results.csv, report.txt, report_matrix.csv
    #[arg(long, env = "POWERSYNTH_OUT")]
    out: PathBuf,
    /// Learning-rate grid for the GBRT search
    #[arg(long, value_delimiter = ',')]
    lr_grid: Option<Vec<f64>>,
    /// Depth grid for the GBRT search
    #[arg(long, value_delimiter = ',')]
    depth_grid: Option<Vec<usize>>,
    /// Cross-validation folds
    #[arg(long)]
    folds: Option<usize>,
    /// Boosting stages of the final fit
    #[arg(long)]
    n_estimators: Option<usize>,
    /// Terrain power-curve CSV overriding the built-in placeholder
    #[arg(long)]
    mclean_file: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// results.csv written by `evaluate`
    #[arg(long)]
    results: PathBuf,
    /// Output directory for report.txt and report_matrix.csv
    #[arg(long, env = "POWERSYNTH_OUT")]
    out: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    /// Bundle directory, or a parent holding pv/ and wind/ bundles
    #[arg(long)]
    bundle: PathBuf,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParkConfig {
    loc_id: String,
    latitude: f64,
    longitude: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    seed: u64,
    start_date: NaiveDate,
    days: u32,
    noise_level: f64,
    #[serde(default = "default_smooth_hours")]
    smooth_hours: u32,
    #[serde(default)]
    pv_parks: Vec<ParkConfig>,
    #[serde(default)]
    wind_parks: Vec<ParkConfig>,
}

fn default_smooth_hours() -> u32 {
    3
}

fn parks_to_locations(parks: &[ParkConfig]) -> Result<Vec<(String, GeoLocation)>> {
    parks
        .iter()
        .map(|p| {
            let geo = GeoLocation::new(p.latitude, p.longitude)
                .with_context(|| format!("park {}", p.loc_id))?;
            Ok((p.loc_id.clone(), geo))
        })
        .collect()
}

fn load_generate_config(path: &Path, seed_override: Option<u64>) -> Result<GenerateConfig> {
    let raw = fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let file: FileConfig = toml::from_str(&raw)
        .with_context(|| format!("parsing config {}", path.display()))?;
    let config = GenerateConfig {
        seed: seed_override.unwrap_or(file.seed),
        start_date: file.start_date,
        days: file.days,
        noise_level: file.noise_level,
        smooth_hours: file.smooth_hours,
        pv_locations: parks_to_locations(&file.pv_parks)?,
        wind_locations: parks_to_locations(&file.wind_parks)?,
    };
    config.validate().context("invalid generation config")?;
    Ok(config)
}

fn cmd_generate(args: &GenerateArgs) -> Result<()> {
    let config = load_generate_config(&args.config, args.seed)?;
    let catalog: Vec<TurbineCatalogEntry> = match &args.catalog {
        Some(path) => read_turbine_catalog(path)
            .with_context(|| format!("reading catalog {}", path.display()))?,
        None => default_turbine_catalog(),
    };

    for source in [EnergySource::Pv, EnergySource::Wind] {
        let Some(bundle) = generate_bundle(&config, source, &catalog)? else {
            continue;
        };
        let dir = args.out.join(source.key());
        write_bundle(&bundle, &dir)?;
        for loc in &bundle.locations {
            println!(
                "{}: {} train / {} test samples -> {}",
                loc.loc_id,
                loc.num_train_samples(),
                loc.num_test_samples(),
                dir.display()
            );
        }
    }
    Ok(())
}

struct Job {
    park: String,
    model: ModelKind,
    scenario: ScenarioConfig,
}

fn cmd_evaluate(args: &EvaluateArgs) -> Result<()> {
    let bundle = read_bundle(&args.bundle)
        .with_context(|| format!("reading bundle {}", args.bundle.display()))?;
    let season = args
        .season
        .as_deref()
        .map(|s| s.parse::<Season>())
        .transpose()?;
    let models: Vec<ModelKind> = args
        .models
        .iter()
        .map(|m| m.parse::<ModelKind>().map_err(Into::into))
        .collect::<Result<_>>()?;

    let defaults = GbrtSettings::default();
    let settings = GbrtSettings {
        lr_grid: args.lr_grid.clone().unwrap_or(defaults.lr_grid),
        depth_grid: args.depth_grid.clone().unwrap_or(defaults.depth_grid),
        folds: args.folds.unwrap_or(defaults.folds),
        n_estimators: args.n_estimators.unwrap_or(defaults.n_estimators),
    };
    settings.validate()?;

    let mclean_csv = args
        .mclean_file
        .as_deref()
        .map(|p| fs::read_to_string(p).with_context(|| format!("reading {}", p.display())))
        .transpose()?;

    // validate every scenario before any work starts
    let mut jobs = Vec::new();
    for park in bundle.locations.iter().map(|l| l.loc_id.clone()) {
        for model in &models {
            for &days in &args.training_days {
                jobs.push(Job {
                    park: park.clone(),
                    model: *model,
                    scenario: ScenarioConfig::new(days, season)?,
                });
            }
        }
    }

    let outcomes: Vec<(String, Result<ScenarioResult, powersynth::Error>)> = jobs
        .par_iter()
        .map(|job| {
            let label = format!(
                "{} {} training_days={}",
                job.park,
                job.model,
                job.scenario.training_days
            );
            let outcome = run_scenario(
                &bundle,
                &job.park,
                job.model,
                &job.scenario,
                &settings,
                mclean_csv.as_deref(),
            );
            (label, outcome)
        })
        .collect();

    let mut results = Vec::new();
    let mut failures = Vec::new();
    for (label, outcome) in outcomes {
        match outcome {
            Ok(r) => results.push(r),
            Err(e) => failures.push(format!("{label}: {e}")),
        }
    }
    if !failures.is_empty() {
        for f in &failures {
            eprintln!("job failed: {f}");
        }
        bail!("{} of {} jobs failed", failures.len(), jobs.len());
    }

    write_outputs(&args.out, &results)?;
    println!(
        "{} jobs completed -> {}",
        results.len(),
        args.out.display()
    );
    Ok(())
}

fn write_outputs(out: &Path, results: &[ScenarioResult]) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    fs::write(out.join("results.csv"), results_to_csv(results))?;
    let report = report_tables(results)?;
    fs::write(out.join("report.txt"), &report.text)?;
    fs::write(out.join("report_matrix.csv"), &report.matrix_csv)?;
    Ok(())
}

fn parse_results_csv(raw: &str) -> Result<Vec<ScenarioResult>> {
    let mut lines = raw.lines();
    let header = lines.next().context("empty results file")?;
    if header != "park,model,season,training_days,nrmse" {
        bail!("unexpected results header: {header}");
    }
    let mut results = Vec::new();
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            bail!("line {}: expected 5 fields, got {}", i + 2, fields.len());
        }
        results.push(ScenarioResult {
            park: fields[0].to_string(),
            model: fields[1].to_string(),
            season: fields[2].to_string(),
            training_days: fields[3]
                .parse()
                .with_context(|| format!("line {}: training_days", i + 2))?,
            nrmse: fields[4]
                .parse()
                .with_context(|| format!("line {}: nrmse", i + 2))?,
        });
    }
    Ok(results)
}

fn cmd_report(args: &ReportArgs) -> Result<()> {
    let raw = fs::read_to_string(&args.results)
        .with_context(|| format!("reading {}", args.results.display()))?;
    let results = parse_results_csv(&raw)?;
    write_outputs(&args.out, &results)?;
    println!("report written to {}", args.out.display());
    Ok(())
}

fn validate_one(dir: &Path) -> Result<DatasetBundle> {
    let bundle = read_bundle(dir).with_context(|| format!("bundle {}", dir.display()))?;
    bundle.validate()?;
    Ok(bundle)
}

fn cmd_validate(args: &ValidateArgs) -> Result<()> {
    let mut checked = 0;
    if args.bundle.join("meta.csv").is_file() {
        let bundle = validate_one(&args.bundle)?;
        println!(
            "{}: {} {} locations ok",
            args.bundle.display(),
            bundle.locations.len(),
            bundle.source
        );
        checked += 1;
    } else {
        for entry in fs::read_dir(&args.bundle)
            .with_context(|| format!("reading {}", args.bundle.display()))?
        {
            let path = entry?.path();
            if path.join("meta.csv").is_file() {
                let bundle = validate_one(&path)?;
                println!(
                    "{}: {} {} locations ok",
                    path.display(),
                    bundle.locations.len(),
                    bundle.source
                );
                checked += 1;
            }
        }
    }
    if checked == 0 {
        bail!("no bundle found under {}", args.bundle.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    let outcome = match &cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Report(args) => cmd_report(args),
        Command::Validate(args) => cmd_validate(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

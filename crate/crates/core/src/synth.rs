use std::collections::BTreeMap;

use chrono::NaiveDate;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::function::erf::erf;

use crate::bundle::{DatasetBundle, LocationData, PlantMeta};
use crate::error::Error;
use crate::geo::GeoLocation;
use crate::irradiance::deaccumulate_nwp_mean;
use crate::nwp::{
    build_lag_features, synchronize_day_ahead, EnergySource, NwpRun, RawNwpStep,
};
use crate::pv::simulate_pv_series;
use crate::sampler::{plant_seed, sample_pv_meta, sample_wind_meta, TurbineCatalogEntry};
use crate::solar::solar_position;
use crate::time::Timestamp;
use crate::weather::{downsample_to_hourly, WeatherSample};
use crate::wind::{extrapolate_wind, reference_curve, simulate_wind_series, POWER_LAW_ALPHA};

// Internal column names of the accumulated-mean irradiance channels of a
// raw run, before de-accumulation into the _INSTANT schema columns.
const ACC_DIFFUSE: &str = "ASWDIFDS_SFC_0_M_ACCMEAN";
const ACC_DIRECT: &str = "ASWDIRS_SFC_0_M_ACCMEAN";

/// Horizon-dependent noise growth factor; non-decreasing in the horizon.
pub fn noise_growth(horizon: u32) -> f64 {
    0.5 + 0.5 * horizon as f64 / 48.0
}

fn standard_normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + erf(z / std::f64::consts::SQRT_2))
}

// Weibull quantile, shape k, scale lambda.
fn weibull_quantile(p: f64, k: f64, lambda: f64) -> f64 {
    lambda * (-(1.0 - p.min(1.0 - 1e-12)).ln()).powf(1.0 / k)
}

// Haurwitz-style clear-sky global horizontal irradiance.
fn clear_sky_ghi(cos_zenith: f64) -> f64 {
    if cos_zenith <= 0.0 {
        0.0
    } else {
        1098.0 * cos_zenith * (-0.057 / cos_zenith).exp()
    }
}

fn weather_seed(seed: u64, location: &GeoLocation, salt: &str) -> u64 {
    plant_seed(
        seed,
        &format!(
            "{salt}:{:x}:{:x}",
            location.latitude.to_bits(),
            location.longitude.to_bits()
        ),
    )
}

/// Generate a seeded 10-minute weather series: Weibull wind speeds with
/// AR(1) temporal correlation, and (for PV) clear-sky radiation modulated
/// by a persistent cloud factor. Deterministic per (seed, location).
pub fn generate_synthetic_weather(
    seed: u64,
    location: &GeoLocation,
    start: NaiveDate,
    days: u32,
    kind: EnergySource,
) -> Result<Vec<WeatherSample>, Error> {
    if days == 0 {
        return Err(Error::InvalidConfig("days must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(weather_seed(seed, location, "weather"));
    let n = days as usize * 144;
    let t0 = Timestamp::from_date(start);

    // AR(1) latents: wind correlates over a few hours, cloud cover over
    // most of a day.
    let phi_wind: f64 = 0.97;
    let phi_cloud: f64 = 0.995;
    let mut z_wind: f64 = gauss(&mut rng);
    let mut z_cloud: f64 = gauss(&mut rng);

    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let time = t0.plus_minutes(10 * i as i64);
        z_wind = phi_wind * z_wind + (1.0 - phi_wind * phi_wind).sqrt() * gauss(&mut rng);
        z_cloud = phi_cloud * z_cloud + (1.0 - phi_cloud * phi_cloud).sqrt() * gauss(&mut rng);
        let wind = weibull_quantile(standard_normal_cdf(z_wind), 2.0, 7.0);

        let (ghi_e, dhi_e) = match kind {
            EnergySource::Wind => (None, None),
            EnergySource::Pv => {
                let cloud = standard_normal_cdf(z_cloud);
                let sun = solar_position::<f64>(&time, location);
                let cos_z = sun.zenith_deg.to_radians().cos();
                let ghi = clear_sky_ghi(cos_z) * (1.0 - 0.75 * cloud.powf(1.5));
                let diffuse_fraction = (0.20 + 0.75 * cloud).min(1.0);
                let dhi = ghi * diffuse_fraction;
                // W/m^2 over 600 s -> J/cm^2
                (Some(ghi * 0.06), Some(dhi * 0.06))
            }
        };
        out.push(WeatherSample::new(time, wind, ghi_e, dhi_e)?);
    }
    Ok(out)
}

fn gauss<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller on two uniforms; one draw per call keeps the stream simple.
    let u1: f64 = rng.gen_range(1e-12..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

// Deterministic slowly rotating wind direction, radians.
fn wind_direction(t: &Timestamp, t0: &Timestamp) -> f64 {
    let t_days = t.seconds_since(t0) as f64 / 86_400.0;
    (std::f64::consts::PI * (t_days / 3.0).sin())
        + (0.5 * std::f64::consts::PI * (t_days / 7.3).sin())
}

// Hourly true feature channels at one timestamp, before smoothing/noise.
fn true_channels(
    sample: &WeatherSample,
    location: &GeoLocation,
    t0: &Timestamp,
) -> BTreeMap<String, f64> {
    let t = &sample.time;
    let t_days = t.seconds_since(t0) as f64 / 86_400.0;
    let diurnal = (2.0 * std::f64::consts::PI * (t.decimal_hour() - 14.0) / 24.0).cos();
    let seasonal = (2.0 * std::f64::consts::PI * (t_days / 365.25)).sin();

    let dir = wind_direction(t, t0);
    let u10 = sample.wind_speed_10m;
    let u100 = extrapolate_wind(u10, 100.0, 10.0, POWER_LAW_ALPHA).unwrap();

    let (dif, dirs) = match (sample.ghi_energy, sample.dhi_energy) {
        (Some(g), Some(d)) => {
            let ghi = g * 1e4 / 600.0;
            let dhi = d * 1e4 / 600.0;
            (dhi, (ghi - dhi).max(0.0))
        }
        _ => {
            // wind-only stations: clear-sky proxy for the irradiance inputs
            let sun = solar_position::<f64>(t, location);
            let ghi = clear_sky_ghi(sun.zenith_deg.to_radians().cos());
            (0.3 * ghi, 0.7 * ghi)
        }
    };

    let mut m = BTreeMap::new();
    m.insert("T_HAG_2_M".into(), 283.15 + 8.0 * seasonal + 4.0 * diurnal);
    m.insert("RELHUM_HAG_2_M".into(), 70.0 - 10.0 * diurnal);
    m.insert("PS_SFC_0_M".into(), 101_325.0 + 300.0 * seasonal);
    m.insert("U_GVL_60_HL".into(), u10 * dir.cos());
    m.insert("V_GVL_60_HL".into(), u10 * dir.sin());
    m.insert("U_GVL_58_HL".into(), u100 * dir.cos());
    m.insert("V_GVL_58_HL".into(), u100 * dir.sin());
    m.insert(ACC_DIFFUSE.into(), dif); // instantaneous here; accumulated later
    m.insert(ACC_DIRECT.into(), dirs);
    m
}

/// Generate daily 00:00 NWP runs from hourly weather: the true channels
/// smoothed over a centered window, multiplicative seeded noise growing
/// with the horizon, irradiance re-encoded as accumulated run means.
pub fn generate_synthetic_nwp(
    hourly: &[WeatherSample],
    location: &GeoLocation,
    seed: u64,
    noise_level: f64,
    smooth_hours: u32,
) -> Result<Vec<NwpRun>, Error> {
    if hourly.is_empty() {
        return Err(Error::EmptyInput("hourly weather"));
    }
    let t0 = hourly[0].time;
    let index: BTreeMap<Timestamp, usize> = hourly
        .iter()
        .enumerate()
        .map(|(i, s)| (s.time, i))
        .collect();
    let channels: Vec<BTreeMap<String, f64>> = hourly
        .iter()
        .map(|s| true_channels(s, location, &t0))
        .collect();
    let half_window = (smooth_hours.max(1) - 1) as usize / 2;
    let smoothed = |i: usize, name: &str| -> f64 {
        let lo = i.saturating_sub(half_window);
        let hi = (i + half_window).min(channels.len() - 1);
        let sum: f64 = channels[lo..=hi].iter().map(|m| m[name]).sum();
        sum / (hi - lo + 1) as f64
    };

    let last = hourly.last().unwrap().time;
    let mut runs = Vec::new();
    let mut day = 0i64;
    loop {
        let run_start = t0.plus_hours(24 * day);
        if !run_start.is_midnight() {
            return Err(Error::RunStartNotMidnight(run_start.to_string()));
        }
        let run_end = run_start.plus_hours(48);
        if run_end > last {
            break;
        }
        if day == 0 && index.get(&run_start).is_none() {
            return Err(Error::InsufficientCoverage {
                need: run_start.to_string(),
                have: last.to_string(),
            });
        }

        let mut rng = ChaCha8Rng::seed_from_u64(weather_seed(
            seed,
            location,
            &format!("nwp:{run_start}"),
        ));
        // one AR(1) error stream per noised channel family
        let noised_names = [
            "U_GVL_60_HL",
            "V_GVL_60_HL",
            "U_GVL_58_HL",
            "V_GVL_58_HL",
            ACC_DIFFUSE,
            ACC_DIRECT,
        ];
        let mut errors: BTreeMap<&str, f64> = noised_names.iter().map(|&n| (n, 0.0)).collect();

        let mut steps = Vec::with_capacity(48);
        let mut acc_dif = 0.0f64;
        let mut acc_dir = 0.0f64;
        for h in 1..=48u32 {
            let t = run_start.plus_hours(h as i64);
            let i = *index.get(&t).ok_or_else(|| Error::InsufficientCoverage {
                need: t.to_string(),
                have: last.to_string(),
            })?;
            let mut values: BTreeMap<String, f64> = channels[i]
                .keys()
                .map(|name| (name.clone(), smoothed(i, name)))
                .collect();
            for name in noised_names {
                let e = errors.get_mut(name).unwrap();
                *e = 0.9 * *e + (1.0 - 0.9f64 * 0.9).sqrt() * gauss(&mut rng);
                let factor = (1.0 + noise_level * noise_growth(h) * *e).max(0.0);
                let v = values.get_mut(name).unwrap();
                *v *= factor;
            }
            // irradiance channels must be nonnegative instantaneous values
            // before accumulation so de-accumulation never clips
            let dif = values[ACC_DIFFUSE].max(0.0);
            let dirs = values[ACC_DIRECT].max(0.0);
            acc_dif += dif;
            acc_dir += dirs;
            values.insert(ACC_DIFFUSE.into(), acc_dif / h as f64);
            values.insert(ACC_DIRECT.into(), acc_dir / h as f64);
            steps.push(RawNwpStep { horizon: h, values });
        }
        runs.push(NwpRun { run_start, steps });
        day += 1;
    }
    Ok(runs)
}

/// Turn a raw run into schema-ready steps: de-accumulate the irradiance
/// channels into `_INSTANT` columns, attach sun angles for PV, and build
/// the lag columns over the full run before any horizon filtering.
pub fn process_nwp_run(
    source: EnergySource,
    run: &mut NwpRun,
    location: &GeoLocation,
) -> Result<(), Error> {
    let mut prev_dif = 0.0;
    let mut prev_dir = 0.0;
    let mut prev_h = run.steps.first().map(|s| s.horizon.saturating_sub(1)).unwrap_or(0);
    for step in &mut run.steps {
        let mean_dif = *step.values.get(ACC_DIFFUSE).ok_or_else(|| {
            Error::SchemaMismatch(format!("missing {ACC_DIFFUSE} at horizon {}", step.horizon))
        })?;
        let mean_dir = step.values[ACC_DIRECT];
        let dif = deaccumulate_nwp_mean(mean_dif, step.horizon, prev_dif, prev_h)?;
        let dirs = deaccumulate_nwp_mean(mean_dir, step.horizon, prev_dir, prev_h)?;
        step.values
            .insert("ASWDIFDS_SFC_0_M_INSTANT".into(), dif);
        step.values.insert("ASWDIRS_SFC_0_M_INSTANT".into(), dirs);
        prev_dif = mean_dif;
        prev_dir = mean_dir;
        prev_h = step.horizon;

        if source == EnergySource::Pv {
            let t = run.run_start.plus_hours(step.horizon as i64);
            let sun = solar_position::<f64>(&t, location);
            step.values.insert("solar_azimuth".into(), sun.azimuth_deg);
            step.values.insert("solar_zenith".into(), sun.zenith_deg);
        }
    }
    build_lag_features(&mut run.steps, source.lagged_names())
}

/// Full generation parameters for one bundle run.
#[derive(Debug, Clone)]
pub struct GenerateConfig {
    pub seed: u64,
    pub start_date: NaiveDate,
    pub days: u32,
    pub noise_level: f64,
    pub smooth_hours: u32,
    pub pv_locations: Vec<(String, GeoLocation)>,
    pub wind_locations: Vec<(String, GeoLocation)>,
}

impl GenerateConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if self.days < 3 {
            return Err(Error::InvalidConfig(
                "days must be >= 3 (one full day-ahead run needs 48h of coverage)".into(),
            ));
        }
        if self.noise_level < 0.0 {
            return Err(Error::InvalidConfig("noise_level must be >= 0".into()));
        }
        if self.pv_locations.is_empty() && self.wind_locations.is_empty() {
            return Err(Error::InvalidConfig("no plant locations configured".into()));
        }
        Ok(())
    }
}

/// Generate one location end to end: sample metadata, synthesize weather,
/// simulate the target series, synthesize NWP runs, and synchronize the
/// day-ahead table.
pub fn generate_location(
    config: &GenerateConfig,
    source: EnergySource,
    loc_id: &str,
    location: GeoLocation,
    catalog: &[TurbineCatalogEntry],
) -> Result<(PlantMeta, LocationData), Error> {
    let weather =
        generate_synthetic_weather(config.seed, &location, config.start_date, config.days, source)?;
    let hourly = downsample_to_hourly(&weather)?;

    let (meta, targets) = match source {
        EnergySource::Pv => {
            let meta = sample_pv_meta(config.seed, loc_id, location)?;
            let targets = simulate_pv_series(&hourly, &meta)?;
            (PlantMeta::Pv(meta), targets)
        }
        EnergySource::Wind => {
            let meta = sample_wind_meta(config.seed, loc_id, location, catalog)?;
            let curve = reference_curve(meta.rated_power_kw);
            let targets = simulate_wind_series(&hourly, &meta, &curve)?;
            (PlantMeta::Wind(meta), targets)
        }
    };

    let mut runs = generate_synthetic_nwp(
        &hourly,
        &location,
        config.seed,
        config.noise_level,
        config.smooth_hours,
    )?;
    for run in &mut runs {
        process_nwp_run(source, run, &location)?;
    }
    let table = synchronize_day_ahead(source, &runs, &targets)?;
    Ok((
        meta,
        LocationData {
            loc_id: loc_id.to_string(),
            inputs: table.inputs,
            targets: table.targets,
        },
    ))
}

/// Generate the bundle for one energy source, or `None` when the config
/// has no locations for it.
pub fn generate_bundle(
    config: &GenerateConfig,
    source: EnergySource,
    catalog: &[TurbineCatalogEntry],
) -> Result<Option<DatasetBundle>, Error> {
    config.validate()?;
    let locations = match source {
        EnergySource::Pv => &config.pv_locations,
        EnergySource::Wind => &config.wind_locations,
    };
    if locations.is_empty() {
        return Ok(None);
    }
    let mut meta_rows = Vec::new();
    let mut location_data = Vec::new();
    for (loc_id, geo) in locations {
        let (meta, data) = generate_location(config, source, loc_id, *geo, catalog)?;
        meta_rows.push(meta);
        location_data.push(data);
    }
    let bundle = DatasetBundle {
        source,
        meta_rows,
        locations: location_data,
    };
    bundle.validate()?;
    Ok(Some(bundle))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::default_turbine_catalog;

    fn loc() -> GeoLocation {
        GeoLocation::new(51.3, 9.5).unwrap()
    }

    fn start() -> NaiveDate {
        NaiveDate::from_ymd_opt(2019, 10, 1).unwrap()
    }

    #[test]
    fn weather_is_deterministic_per_seed() {
        let a = generate_synthetic_weather(42, &loc(), start(), 2, EnergySource::Pv).unwrap();
        let b = generate_synthetic_weather(42, &loc(), start(), 2, EnergySource::Pv).unwrap();
        assert_eq!(a, b);
        let c = generate_synthetic_weather(43, &loc(), start(), 2, EnergySource::Pv).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn weather_radiation_zero_at_night() {
        let samples = generate_synthetic_weather(1, &loc(), start(), 2, EnergySource::Pv).unwrap();
        for s in &samples {
            let sun = solar_position::<f64>(&s.time, &loc());
            if sun.zenith_deg >= 90.0 {
                assert_eq!(s.ghi_energy, Some(0.0), "nonzero radiation at {}", s.time);
            }
        }
    }

    #[test]
    fn weather_dhi_never_exceeds_ghi() {
        let samples = generate_synthetic_weather(7, &loc(), start(), 3, EnergySource::Pv).unwrap();
        for s in &samples {
            assert!(s.dhi_energy.unwrap() <= s.ghi_energy.unwrap() + 1e-12);
        }
        // wind kind carries no radiation
        let wind = generate_synthetic_weather(7, &loc(), start(), 1, EnergySource::Wind).unwrap();
        assert!(wind.iter().all(|s| s.ghi_energy.is_none()));
    }

    #[test]
    fn noise_growth_non_decreasing_and_covers_window() {
        assert!(noise_growth(47) >= noise_growth(24));
        for h in 1..48 {
            assert!(noise_growth(h + 1) >= noise_growth(h));
        }
    }

    #[test]
    fn zero_noise_unsmoothed_nwp_reproduces_hourly_truth() {
        let weather = generate_synthetic_weather(3, &loc(), start(), 4, EnergySource::Pv).unwrap();
        let hourly = downsample_to_hourly(&weather).unwrap();
        let mut runs = generate_synthetic_nwp(&hourly, &loc(), 3, 0.0, 1).unwrap();
        assert!(!runs.is_empty());
        let t0 = hourly[0].time;
        for run in &mut runs {
            process_nwp_run(EnergySource::Pv, run, &loc()).unwrap();
            for step in &run.steps {
                let t = run.run_start.plus_hours(step.horizon as i64);
                let sample = hourly.iter().find(|s| s.time == t).unwrap();
                let truth = true_channels(sample, &loc(), &t0);
                assert!(
                    (step.values["ASWDIFDS_SFC_0_M_INSTANT"] - truth[ACC_DIFFUSE]).abs() < 1e-9,
                    "diffuse mismatch at {t}"
                );
                assert!(
                    (step.values["ASWDIRS_SFC_0_M_INSTANT"] - truth[ACC_DIRECT]).abs() < 1e-9
                );
                assert!((step.values["U_GVL_60_HL"] - truth["U_GVL_60_HL"]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn deaccumulated_features_nonnegative_with_noise() {
        let weather = generate_synthetic_weather(9, &loc(), start(), 4, EnergySource::Pv).unwrap();
        let hourly = downsample_to_hourly(&weather).unwrap();
        let mut runs = generate_synthetic_nwp(&hourly, &loc(), 9, 0.5, 3).unwrap();
        for run in &mut runs {
            process_nwp_run(EnergySource::Pv, run, &loc()).unwrap();
            for step in &run.steps {
                assert!(step.values["ASWDIFDS_SFC_0_M_INSTANT"] >= 0.0);
                assert!(step.values["ASWDIRS_SFC_0_M_INSTANT"] >= 0.0);
            }
        }
    }

    #[test]
    fn generated_bundle_validates_and_is_deterministic() {
        let config = GenerateConfig {
            seed: 11,
            start_date: start(),
            days: 5,
            noise_level: 0.1,
            smooth_hours: 3,
            pv_locations: vec![("pv_0000".into(), loc())],
            wind_locations: vec![("wp_0000".into(), GeoLocation::new(54.0, 8.5).unwrap())],
        };
        let catalog = default_turbine_catalog();
        let pv = generate_bundle(&config, EnergySource::Pv, &catalog)
            .unwrap()
            .unwrap();
        pv.validate().unwrap();
        // a run needs 48 h of coverage, so 5 days yield 3 complete runs
        assert_eq!(pv.locations[0].targets.len(), 3 * 24);
        let wind = generate_bundle(&config, EnergySource::Wind, &catalog)
            .unwrap()
            .unwrap();
        wind.validate().unwrap();

        let pv2 = generate_bundle(&config, EnergySource::Pv, &catalog)
            .unwrap()
            .unwrap();
        assert_eq!(pv, pv2);
    }

    #[test]
    fn insufficient_days_rejected() {
        let config = GenerateConfig {
            seed: 1,
            start_date: start(),
            days: 2,
            noise_level: 0.0,
            smooth_hours: 3,
            pv_locations: vec![("pv_0000".into(), loc())],
            wind_locations: vec![],
        };
        assert!(generate_bundle(&config, EnergySource::Pv, &[]).is_err());
    }
}

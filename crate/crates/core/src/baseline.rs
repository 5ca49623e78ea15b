use crate::error::Error;
use crate::irradiance::{estimate_dni, IrradianceTriple};
use crate::nwp::{EnergySource, NwpRecord};
use crate::power::{PowerEntry, PowerSeries};
use crate::pv::{poa_irradiance, pv_power, PvPlantMeta, DEFAULT_CELL_TEMP_C};
use crate::solar::SolarPosition;
use crate::wind::{extrapolate_wind, power_curve_lookup, PowerCurve, WindPlantMeta, POWER_LAW_ALPHA};

fn feature(record: &NwpRecord, name: &str) -> Result<f64, Error> {
    record.get(name).ok_or_else(|| Error::MissingField {
        field: "nwp feature",
        time: record.fcst_time.to_string(),
    })
}

/// Physical PV forecast from NWP inputs: reconstruct the irradiance triple
/// from the diffuse/direct channels and the forecast sun position, then run
/// the same plant chain used for target synthesis. Ignores training data.
pub fn physical_baseline_pv(
    records: &[NwpRecord],
    meta: &PvPlantMeta,
) -> Result<PowerSeries, Error> {
    let mut entries = Vec::with_capacity(records.len());
    for record in records {
        if record.source != EnergySource::Pv {
            return Err(Error::SchemaMismatch(format!(
                "pv baseline fed {} records",
                record.source
            )));
        }
        let dhi = feature(record, "ASWDIFDS_SFC_0_M_INSTANT")?;
        let direct_horizontal = feature(record, "ASWDIRS_SFC_0_M_INSTANT")?;
        let ghi = dhi + direct_horizontal;
        let sun = SolarPosition {
            azimuth_deg: feature(record, "solar_azimuth")?,
            zenith_deg: feature(record, "solar_zenith")?,
        };
        let dni = estimate_dni(ghi, dhi, sun.zenith_deg)?;
        let poa = poa_irradiance(
            &IrradianceTriple { ghi, dhi, dni },
            &sun,
            meta.tilt_deg,
            meta.azimuth_deg,
            meta.albedo,
        );
        let pw = pv_power(
            poa,
            DEFAULT_CELL_TEMP_C,
            meta.module_peak_w,
            meta.inverter_ac_limit_w,
            meta.temp_coeff_per_k,
        );
        entries.push(PowerEntry {
            time: record.fcst_time,
            pw,
            is_test: false,
        });
    }
    PowerSeries::new(entries)
}

/// Hub height the 58th-level wind components are referenced to, meters.
pub const NWP_WIND_REF_HEIGHT_M: f64 = 100.0;

/// Physical wind forecast from NWP inputs: wind speed from the level-58
/// components, power-law extrapolation to hub height, power-curve lookup
/// normalized by rated power. Ignores training data.
pub fn physical_baseline_wind(
    records: &[NwpRecord],
    meta: &WindPlantMeta,
    curve: &PowerCurve,
) -> Result<PowerSeries, Error> {
    let mut entries = Vec::with_capacity(records.len());
    for record in records {
        if record.source != EnergySource::Wind {
            return Err(Error::SchemaMismatch(format!(
                "wind baseline fed {} records",
                record.source
            )));
        }
        let u = feature(record, "U_GVL_58_HL")?;
        let v = feature(record, "V_GVL_58_HL")?;
        let speed = (u * u + v * v).sqrt();
        let at_hub = extrapolate_wind(
            speed,
            meta.hub_height_m,
            NWP_WIND_REF_HEIGHT_M,
            POWER_LAW_ALPHA,
        )?;
        let pw = power_curve_lookup(at_hub, curve);
        entries.push(PowerEntry {
            time: record.fcst_time,
            pw: pw.clamp(0.0, 1.0),
            is_test: false,
        });
    }
    PowerSeries::new(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::GeoLocation;
    use crate::nwp::{synchronize_day_ahead, EnergySource};
    use crate::pv::simulate_pv_series;
    use crate::sampler::{default_turbine_catalog, sample_pv_meta, sample_wind_meta};
    use crate::synth::{
        generate_synthetic_nwp, generate_synthetic_weather, process_nwp_run,
    };
    use crate::weather::downsample_to_hourly;
    use crate::wind::{reference_curve, simulate_wind_series};
    use chrono::NaiveDate;

    fn loc() -> GeoLocation {
        GeoLocation::new(52.4, 10.1).unwrap()
    }

    fn start() -> NaiveDate {
        NaiveDate::from_ymd_opt(2019, 6, 1).unwrap()
    }

    // With zero noise and no smoothing the NWP features carry exactly the
    // measurement-derived values, so each baseline must reproduce its
    // target series.
    #[test]
    fn pv_baseline_exact_on_noise_free_nwp() {
        let weather = generate_synthetic_weather(5, &loc(), start(), 4, EnergySource::Pv).unwrap();
        let hourly = downsample_to_hourly(&weather).unwrap();
        let meta = sample_pv_meta(5, "pv_0000", loc()).unwrap();
        let targets = simulate_pv_series(&hourly, &meta).unwrap();
        let mut runs = generate_synthetic_nwp(&hourly, &loc(), 5, 0.0, 1).unwrap();
        for run in &mut runs {
            process_nwp_run(EnergySource::Pv, run, &loc()).unwrap();
        }
        let table = synchronize_day_ahead(EnergySource::Pv, &runs, &targets).unwrap();
        let forecast = physical_baseline_pv(&table.inputs, &meta).unwrap();
        assert!(!forecast.entries.is_empty());
        for (f, t) in forecast.entries.iter().zip(&table.targets.entries) {
            assert_eq!(f.time, t.time);
            assert!(
                (f.pw - t.pw).abs() < 1e-9,
                "pv mismatch at {}: {} vs {}",
                f.time,
                f.pw,
                t.pw
            );
        }
    }

    #[test]
    fn wind_baseline_exact_on_noise_free_nwp() {
        let weather = generate_synthetic_weather(6, &loc(), start(), 4, EnergySource::Wind).unwrap();
        let hourly = downsample_to_hourly(&weather).unwrap();
        let meta = sample_wind_meta(6, "wp_0000", loc(), &default_turbine_catalog()).unwrap();
        let curve = reference_curve(meta.rated_power_kw);
        let targets = simulate_wind_series(&hourly, &meta, &curve).unwrap();
        let mut runs = generate_synthetic_nwp(&hourly, &loc(), 6, 0.0, 1).unwrap();
        for run in &mut runs {
            process_nwp_run(EnergySource::Wind, run, &loc()).unwrap();
        }
        let table = synchronize_day_ahead(EnergySource::Wind, &runs, &targets).unwrap();
        let forecast = physical_baseline_wind(&table.inputs, &meta, &curve).unwrap();
        assert!(!forecast.entries.is_empty());
        for (f, t) in forecast.entries.iter().zip(&table.targets.entries) {
            assert!(
                (f.pw - t.pw).abs() < 1e-9,
                "wind mismatch at {}: {} vs {}",
                f.time,
                f.pw,
                t.pw
            );
        }
    }

    #[test]
    fn wrong_source_rejected() {
        let weather = generate_synthetic_weather(6, &loc(), start(), 3, EnergySource::Wind).unwrap();
        let hourly = downsample_to_hourly(&weather).unwrap();
        let mut runs = generate_synthetic_nwp(&hourly, &loc(), 6, 0.0, 1).unwrap();
        for run in &mut runs {
            process_nwp_run(EnergySource::Wind, run, &loc()).unwrap();
        }
        let meta = sample_wind_meta(6, "wp_0000", loc(), &default_turbine_catalog()).unwrap();
        let curve = reference_curve(meta.rated_power_kw);
        let targets = simulate_wind_series(&hourly, &meta, &curve).unwrap();
        let table = synchronize_day_ahead(EnergySource::Wind, &runs, &targets).unwrap();
        let pv_meta = sample_pv_meta(6, "pv_0000", loc()).unwrap();
        assert!(physical_baseline_pv(&table.inputs, &pv_meta).is_err());
    }
}

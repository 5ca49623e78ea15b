use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::geo::GeoLocation;
use crate::irradiance::{energy_sum_to_power, estimate_dni, IrradianceTriple};
use crate::power::{PowerEntry, PowerSeries};
use crate::scalar::Real;
use crate::solar::{solar_position, SolarPosition};
use crate::weather::WeatherSample;

/// Constant inverter efficiency of the simplified AC stage.
pub const INVERTER_EFFICIENCY: f64 = 0.96;

/// Ambient default cell temperature in °C.
pub const DEFAULT_CELL_TEMP_C: f64 = 20.0;

/// Static parametrization of one virtual PV plant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PvPlantMeta {
    pub loc_id: String,
    pub location: GeoLocation,
    /// Module tilt from horizontal, degrees in [0, 90].
    pub tilt_deg: f64,
    /// Plant azimuth, degrees in [90, 270] with south = 180.
    pub azimuth_deg: f64,
    pub module_peak_w: f64,
    pub inverter_ac_limit_w: f64,
    pub temp_coeff_per_k: f64,
    pub albedo: f64,
    pub modules_per_string: u32,
    pub strings_per_inverter: u32,
}

impl PvPlantMeta {
    /// Single CS5P-220M-class module behind a 250 W microinverter.
    pub fn with_defaults(
        loc_id: impl Into<String>,
        location: GeoLocation,
        tilt_deg: f64,
        azimuth_deg: f64,
    ) -> Result<Self, Error> {
        let meta = PvPlantMeta {
            loc_id: loc_id.into(),
            location,
            tilt_deg,
            azimuth_deg,
            module_peak_w: 220.0,
            inverter_ac_limit_w: 250.0,
            temp_coeff_per_k: -0.0045,
            albedo: 0.25,
            modules_per_string: 1,
            strings_per_inverter: 1,
        };
        meta.validate()?;
        Ok(meta)
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !(0.0..=90.0).contains(&self.tilt_deg) {
            return Err(Error::InvalidMeta(format!(
                "tilt {} out of [0, 90]",
                self.tilt_deg
            )));
        }
        if !(90.0..=270.0).contains(&self.azimuth_deg) {
            return Err(Error::InvalidMeta(format!(
                "azimuth {} out of [90, 270]",
                self.azimuth_deg
            )));
        }
        if self.module_peak_w <= 0.0 || self.inverter_ac_limit_w <= 0.0 {
            return Err(Error::InvalidMeta(
                "module/inverter power must be positive".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.albedo) {
            return Err(Error::InvalidMeta(format!(
                "albedo {} out of [0, 1]",
                self.albedo
            )));
        }
        Ok(())
    }
}

/// Angle of incidence of the beam on a tilted plane, degrees in [0, 180].
pub fn angle_of_incidence<F: Real>(
    sun: &SolarPosition<F>,
    tilt_deg: F,
    surface_azimuth_deg: F,
) -> F {
    let zen = sun.zenith_deg.to_radians_();
    let tilt = tilt_deg.to_radians_();
    let dazi = (sun.azimuth_deg - surface_azimuth_deg).to_radians_();
    let cos_aoi = zen.cos() * tilt.cos() + zen.sin() * tilt.sin() * dazi.cos();
    cos_aoi.max(-F::one()).min(F::one()).acos().to_degrees_()
}

/// Plane-of-array irradiance with an isotropic sky model:
/// beam projection + isotropic diffuse + ground-reflected term.
pub fn poa_irradiance<F: Real>(
    irr: &IrradianceTriple<F>,
    sun: &SolarPosition<F>,
    tilt_deg: F,
    surface_azimuth_deg: F,
    albedo: F,
) -> F {
    let half = F::c(0.5);
    let cos_tilt = tilt_deg.to_radians_().cos();
    let cos_aoi = angle_of_incidence(sun, tilt_deg, surface_azimuth_deg)
        .to_radians_()
        .cos();
    let beam = irr.dni * cos_aoi.max(F::zero());
    let sky = irr.dhi * (F::one() + cos_tilt) * half;
    let ground = irr.ghi * albedo * (F::one() - cos_tilt) * half;
    (beam + sky + ground).max(F::zero())
}

/// Normalized AC power of the simplified module + microinverter chain.
///
/// DC power scales linearly with POA at 1000 W/m² reference and derates
/// with cell temperature; the AC stage applies a constant efficiency and
/// clips at the inverter limit. The result is normalized by module peak
/// power and clamped to [0, 1].
pub fn pv_power<F: Real>(
    poa: F,
    cell_temp_c: F,
    module_peak_w: F,
    inverter_ac_limit_w: F,
    temp_coeff_per_k: F,
) -> F {
    let p_dc = module_peak_w
        * (poa / F::c(1000.0))
        * (F::one() + temp_coeff_per_k * (cell_temp_c - F::c(25.0)));
    let p_ac = (p_dc * F::c(INVERTER_EFFICIENCY)).min(inverter_ac_limit_w);
    (p_ac / module_peak_w).max(F::zero()).min(F::one())
}

/// Simulate the normalized PV power series for hourly weather samples.
///
/// Cell temperature is held at the 20 °C ambient default and wind speed at
/// 0 m/s; every sample must carry the radiation pair.
pub fn simulate_pv_series(
    weather: &[WeatherSample],
    meta: &PvPlantMeta,
) -> Result<PowerSeries, Error> {
    let mut entries = Vec::with_capacity(weather.len());
    for sample in weather {
        let (ghi_e, dhi_e) = match (sample.ghi_energy, sample.dhi_energy) {
            (Some(g), Some(d)) => (g, d),
            _ => {
                return Err(Error::MissingField {
                    field: "radiation",
                    time: sample.time.to_string(),
                })
            }
        };
        let ghi = energy_sum_to_power(ghi_e)?;
        let dhi = energy_sum_to_power(dhi_e)?;
        let sun = solar_position::<f64>(&sample.time, &meta.location);
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
            time: sample.time,
            pw,
            is_test: false,
        });
    }
    PowerSeries::new(entries)
}

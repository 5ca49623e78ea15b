use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::geo::GeoLocation;
use crate::power::{PowerEntry, PowerSeries};
use crate::scalar::Real;
use crate::weather::WeatherSample;

/// Stratification coefficient of the wind profile power law; 1/7 assumes
/// neutral stratification.
pub const POWER_LAW_ALPHA: f64 = 1.0 / 7.0;

/// Measurement height of the 10 m wind-speed channel.
pub const MEASUREMENT_HEIGHT_M: f64 = 10.0;

/// Static parametrization of one virtual wind turbine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindPlantMeta {
    pub loc_id: String,
    pub location: GeoLocation,
    pub hub_height_m: f64,
    pub rotor_diameter_m: f64,
    pub rated_power_kw: f64,
    pub turbine_type: String,
}

impl WindPlantMeta {
    pub fn validate(&self) -> Result<(), Error> {
        if self.hub_height_m <= 0.0 || self.rotor_diameter_m <= 0.0 || self.rated_power_kw <= 0.0 {
            return Err(Error::InvalidMeta(format!(
                "wind plant {} has non-positive dimensions",
                self.loc_id
            )));
        }
        Ok(())
    }
}

/// Manufacturer power curve: (wind speed m/s, power kW) knots at 1 m/s
/// resolution covering 0..=25 m/s, strictly increasing speeds.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerCurve {
    points: Vec<(f64, f64)>,
}

impl PowerCurve {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, Error> {
        if points.is_empty() {
            return Err(Error::InvalidPowerCurve("no points".into()));
        }
        for pair in points.windows(2) {
            if pair[1].0 <= pair[0].0 {
                return Err(Error::InvalidPowerCurve(format!(
                    "speeds not strictly increasing at {} m/s",
                    pair[1].0
                )));
            }
        }
        if points.iter().any(|&(_, p)| p < 0.0) {
            return Err(Error::InvalidPowerCurve("negative power knot".into()));
        }
        if points.first().unwrap().0 > 0.0 || points.last().unwrap().0 < 25.0 {
            return Err(Error::InvalidPowerCurve(
                "domain must cover [0, 25] m/s".into(),
            ));
        }
        Ok(PowerCurve { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Rated power: the maximum of the curve.
    pub fn rated_power_kw(&self) -> f64 {
        self.points.iter().map(|&(_, p)| p).fold(0.0, f64::max)
    }

    /// Power in kW at wind speed `u` by piecewise-linear interpolation.
    /// Above the last knot the last value is held (no cut-out).
    pub fn power_kw(&self, u: f64) -> f64 {
        let last = *self.points.last().unwrap();
        if u >= last.0 {
            return last.1;
        }
        let first = self.points[0];
        if u <= first.0 {
            return first.1;
        }
        let idx = self.points.partition_point(|&(s, _)| s <= u);
        let (s0, p0) = self.points[idx - 1];
        let (s1, p1) = self.points[idx];
        p0 + (u - s0) / (s1 - s0) * (p1 - p0)
    }
}

/// Vertical wind-speed extrapolation by the wind profile power law.
pub fn extrapolate_wind<F: Real>(u_ref: F, z: F, z_ref: F, alpha: F) -> Result<F, Error> {
    if z <= F::zero() || z_ref <= F::zero() {
        return Err(Error::InvalidMeta(
            "extrapolation heights must be positive".into(),
        ));
    }
    Ok(u_ref * (z / z_ref).powf(alpha))
}

/// Normalized power in [0, 1] at wind speed `u`.
pub fn power_curve_lookup(u: f64, curve: &PowerCurve) -> f64 {
    curve.power_kw(u) / curve.rated_power_kw()
}

/// Simulate the normalized wind-power series for hourly weather samples:
/// extrapolate 10 m speeds to hub height, look up the power curve. Air
/// density, turbulence, and stability are ignored.
pub fn simulate_wind_series(
    weather: &[WeatherSample],
    meta: &WindPlantMeta,
    curve: &PowerCurve,
) -> Result<PowerSeries, Error> {
    meta.validate()?;
    let mut entries = Vec::with_capacity(weather.len());
    for sample in weather {
        let u = extrapolate_wind(
            sample.wind_speed_10m,
            meta.hub_height_m,
            MEASUREMENT_HEIGHT_M,
            POWER_LAW_ALPHA,
        )?;
        entries.push(PowerEntry {
            time: sample.time,
            pw: power_curve_lookup(u, curve),
            is_test: false,
        });
    }
    PowerSeries::new(entries)
}

/// Terrain classes of the empirical McLean curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Terrain {
    Lowland,
    LowlandRegulated,
    Offshore,
    Upland,
}

impl Terrain {
    pub const ALL: [Terrain; 4] = [
        Terrain::Lowland,
        Terrain::LowlandRegulated,
        Terrain::Offshore,
        Terrain::Upland,
    ];

    pub fn key(&self) -> &'static str {
        match self {
            Terrain::Lowland => "Lowland",
            Terrain::LowlandRegulated => "Lowland-Regulated",
            Terrain::Offshore => "Offshore",
            Terrain::Upland => "Upland",
        }
    }
}

impl fmt::Display for Terrain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Terrain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "lowland" => Ok(Terrain::Lowland),
            "lowland-regulated" => Ok(Terrain::LowlandRegulated),
            "offshore" => Ok(Terrain::Offshore),
            "upland" => Ok(Terrain::Upland),
            _ => Err(Error::UnknownTerrain(s.to_string())),
        }
    }
}

/// Read a single power curve from CSV with header `speed_ms,power_kw`.
pub fn read_power_curve(path: &Path) -> Result<PowerCurve, Error> {
    let content =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    parse_power_curve(&content)
}

pub fn parse_power_curve(content: &str) -> Result<PowerCurve, Error> {
    let mut reader = csv::Reader::from_reader(content.as_bytes());
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["speed_ms", "power_kw"] {
        return Err(Error::InvalidPowerCurve(format!(
            "expected header speed_ms,power_kw, got {headers:?}"
        )));
    }
    let mut points = Vec::new();
    for record in reader.records() {
        let record = record?;
        let speed: f64 = record[0]
            .parse()
            .map_err(|_| Error::InvalidPowerCurve(format!("bad speed '{}'", &record[0])))?;
        let power: f64 = record[1]
            .parse()
            .map_err(|_| Error::InvalidPowerCurve(format!("bad power '{}'", &record[1])))?;
        points.push((speed, power));
    }
    PowerCurve::new(points)
}

/// Write a power curve in the `speed_ms,power_kw` format.
pub fn write_power_curve(curve: &PowerCurve, path: &Path) -> Result<(), Error> {
    let mut out = String::from("speed_ms,power_kw\n");
    for &(s, p) in curve.points() {
        out.push_str(&format!("{s},{p}\n"));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Placeholder McLean-style terrain curves shipped for tests and desk runs.
/// They are NOT the published McLean (2008) coefficients; supply the real
/// tables through `load_mclean_curve` with your own data file.
pub const PLACEHOLDER_MCLEAN_CSV: &str = include_str!("../data/mclean_placeholder.csv");

/// Load the terrain-specific empirical curve from a multi-terrain CSV with
/// header `terrain,speed_ms,power_kw`.
pub fn load_mclean_curve(terrain: Terrain, source: &str) -> Result<PowerCurve, Error> {
    let mut reader = csv::Reader::from_reader(source.as_bytes());
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["terrain", "speed_ms", "power_kw"] {
        return Err(Error::InvalidPowerCurve(format!(
            "expected header terrain,speed_ms,power_kw, got {headers:?}"
        )));
    }
    let mut points = Vec::new();
    for record in reader.records() {
        let record = record?;
        let key: Terrain = record[0].parse()?;
        if key != terrain {
            continue;
        }
        let speed: f64 = record[1]
            .parse()
            .map_err(|_| Error::InvalidPowerCurve(format!("bad speed '{}'", &record[1])))?;
        let power: f64 = record[2]
            .parse()
            .map_err(|_| Error::InvalidPowerCurve(format!("bad power '{}'", &record[2])))?;
        points.push((speed, power));
    }
    if points.is_empty() {
        return Err(Error::UnknownTerrain(format!(
            "{} (no rows in curve file)",
            terrain.key()
        )));
    }
    PowerCurve::new(points)
}

/// Load a McLean terrain curve from a file path.
pub fn load_mclean_curve_from_file(terrain: Terrain, path: &Path) -> Result<PowerCurve, Error> {
    let content =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    load_mclean_curve(terrain, &content)
}

/// Generic 2 MW-class reference curve used when no manufacturer table is
/// supplied. 1 m/s knots, cut-in near 3 m/s, rated from 13 m/s.
pub fn reference_curve(rated_kw: f64) -> PowerCurve {
    let shape = [
        (0.0, 0.000),
        (1.0, 0.000),
        (2.0, 0.000),
        (3.0, 0.005),
        (4.0, 0.025),
        (5.0, 0.060),
        (6.0, 0.110),
        (7.0, 0.180),
        (8.0, 0.285),
        (9.0, 0.425),
        (10.0, 0.595),
        (11.0, 0.770),
        (12.0, 0.910),
        (13.0, 0.985),
        (14.0, 1.000),
        (15.0, 1.000),
        (16.0, 1.000),
        (17.0, 1.000),
        (18.0, 1.000),
        (19.0, 1.000),
        (20.0, 1.000),
        (21.0, 1.000),
        (22.0, 1.000),
        (23.0, 1.000),
        (24.0, 1.000),
        (25.0, 1.000),
    ];
    PowerCurve::new(shape.iter().map(|&(s, f)| (s, f * rated_kw)).collect()).unwrap()
}

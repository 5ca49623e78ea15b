use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::scalar::Real;

/// Mean Earth radius in kilometers, used for great-circle distances.
pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// Geographic position in degrees, altitude in meters above sea level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoLocation {
    pub latitude: f64,
    pub longitude: f64,
    #[serde(default)]
    pub altitude_m: f64,
}

impl GeoLocation {
    pub fn new(latitude: f64, longitude: f64) -> Result<Self, Error> {
        Self::with_altitude(latitude, longitude, 0.0)
    }

    pub fn with_altitude(latitude: f64, longitude: f64, altitude_m: f64) -> Result<Self, Error> {
        if !(-90.0..=90.0).contains(&latitude) || !latitude.is_finite() {
            return Err(Error::InvalidLocation(format!(
                "latitude {latitude} out of [-90, 90]"
            )));
        }
        if !(-180.0..=180.0).contains(&longitude) || !longitude.is_finite() {
            return Err(Error::InvalidLocation(format!(
                "longitude {longitude} out of [-180, 180]"
            )));
        }
        Ok(GeoLocation {
            latitude,
            longitude,
            altitude_m,
        })
    }
}

/// Great-circle distance between two (lat, lon) pairs in degrees, in km.
pub fn haversine_km<F: Real>(lat1: F, lon1: F, lat2: F, lon2: F) -> F {
    let half = F::c(0.5);
    let dlat = (lat2 - lat1).to_radians_() * half;
    let dlon = (lon2 - lon1).to_radians_() * half;
    let a = dlat.sin().powi(2)
        + lat1.to_radians_().cos() * lat2.to_radians_().cos() * dlon.sin().powi(2);
    let c = F::c(2.0) * a.sqrt().min(F::one()).asin();
    F::c(EARTH_RADIUS_KM) * c
}

/// Index of the grid node closest to `target`; ties go to the lowest index.
pub fn nearest_grid_node(target: &GeoLocation, nodes: &[GeoLocation]) -> Result<usize, Error> {
    if nodes.is_empty() {
        return Err(Error::NoGridNodes);
    }
    let mut best = 0usize;
    let mut best_dist = f64::INFINITY;
    for (i, node) in nodes.iter().enumerate() {
        let d = haversine_km(
            target.latitude,
            target.longitude,
            node.latitude,
            node.longitude,
        );
        if d < best_dist {
            best_dist = d;
            best = i;
        }
    }
    Ok(best)
}

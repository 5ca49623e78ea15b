use crate::geo::GeoLocation;
use crate::scalar::Real;
use crate::time::Timestamp;

/// Apparent solar position.
///
/// Azimuth convention: north = 0°, east = 90°, south = 180°, west = 270°,
/// matching the plant-azimuth convention used in the metadata.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolarPosition<F> {
    pub azimuth_deg: F,
    pub zenith_deg: F,
}

impl<F: Real> SolarPosition<F> {
    /// Elevation above the horizon; by definition `90 - zenith`.
    pub fn elevation_deg(&self) -> F {
        F::c(90.0) - self.zenith_deg
    }
}

// PSA ephemeris (Blanco-Muriel et al. 2001). Accuracy is a few hundredths
// of a degree near its fit epoch and stays well inside the 0.5 degree
// budget over 1950-2050. No refraction correction.
/// Apparent solar azimuth/zenith for a UTC time and location.
pub fn solar_position<F: Real>(time: &Timestamp, loc: &GeoLocation) -> SolarPosition<F> {
    let two_pi = F::PI() + F::PI();

    // Elapsed Julian days since J2000.0, from the Gregorian calendar date.
    let (y, m, d) = (time.year() as i64, time.month() as i64, time.day() as i64);
    let aux1 = (m - 14) / 12;
    let aux2 = (1461 * (y + 4800 + aux1)) / 4 + (367 * (m - 2 - 12 * aux1)) / 12
        - (3 * ((y + 4900 + aux1) / 100)) / 4
        + d
        - 32075;
    let decimal_hour = F::c(time.decimal_hour());
    let elapsed =
        F::c(aux2 as f64 - 0.5 - 2451545.0) + decimal_hour / F::c(24.0);

    // Ecliptic coordinates.
    let omega = F::c(2.1429) - F::c(0.0010394594) * elapsed;
    let mean_longitude = F::c(4.8950630) + F::c(0.017202791698) * elapsed;
    let mean_anomaly = F::c(6.2400600) + F::c(0.0172019699) * elapsed;
    let ecliptic_longitude = mean_longitude
        + F::c(0.03341607) * mean_anomaly.sin()
        + F::c(0.00034894) * (mean_anomaly + mean_anomaly).sin()
        - F::c(0.0001134)
        - F::c(0.0000203) * omega.sin();
    let obliquity = F::c(0.4090928) - F::c(6.2140e-9) * elapsed + F::c(0.0000396) * omega.cos();

    // Celestial coordinates.
    let sin_ecl = ecliptic_longitude.sin();
    let mut right_ascension = (obliquity.cos() * sin_ecl).atan2(ecliptic_longitude.cos());
    if right_ascension < F::zero() {
        right_ascension = right_ascension + two_pi;
    }
    let declination = (obliquity.sin() * sin_ecl).asin();

    // Local horizontal coordinates.
    let gmst = F::c(6.6974243242) + F::c(0.0657098283) * elapsed + decimal_hour;
    let lmst = (gmst * F::c(15.0) + F::c(loc.longitude)).to_radians_();
    let hour_angle = lmst - right_ascension;
    let lat = F::c(loc.latitude).to_radians_();
    let (sin_lat, cos_lat) = (lat.sin(), lat.cos());
    let cos_hour = hour_angle.cos();

    let mut zenith =
        (cos_lat * cos_hour * declination.cos() + declination.sin() * sin_lat).acos();
    let mut azimuth = (-hour_angle.sin()).atan2(declination.tan() * cos_lat - sin_lat * cos_hour);
    if azimuth < F::zero() {
        azimuth = azimuth + two_pi;
    }
    // Parallax correction (Earth radius over one AU).
    zenith = zenith + F::c(6371.01 / 149_597_890.0) * zenith.sin();

    SolarPosition {
        azimuth_deg: azimuth.to_degrees_(),
        zenith_deg: zenith.to_degrees_(),
    }
}

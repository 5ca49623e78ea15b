use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Datelike, NaiveDate, NaiveDateTime, TimeZone, Timelike, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Wire format used everywhere: `yyyy-mm-dd HH:MM:SS`, always UTC.
pub const TIMESTAMP_FORMAT: &str = "%Y-%m-%d %H:%M:%S";

/// UTC timestamp with second precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(DateTime<Utc>);

impl Timestamp {
    pub fn from_ymd_hms(y: i32, mo: u32, d: u32, h: u32, mi: u32, s: u32) -> Option<Self> {
        Utc.with_ymd_and_hms(y, mo, d, h, mi, s).single().map(Timestamp)
    }

    pub fn from_date(date: NaiveDate) -> Self {
        Timestamp(Utc.from_utc_datetime(&date.and_hms_opt(0, 0, 0).unwrap()))
    }

    pub fn minute(&self) -> u32 {
        self.0.minute()
    }

    pub fn second(&self) -> u32 {
        self.0.second()
    }

    pub fn hour(&self) -> u32 {
        self.0.hour()
    }

    pub fn date(&self) -> NaiveDate {
        self.0.date_naive()
    }

    pub fn month(&self) -> u32 {
        self.0.month()
    }

    pub fn day(&self) -> u32 {
        self.0.day()
    }

    pub fn year(&self) -> i32 {
        self.0.year()
    }

    /// Fractional UTC hour of day, used by the solar ephemeris.
    pub fn decimal_hour(&self) -> f64 {
        self.0.hour() as f64 + self.0.minute() as f64 / 60.0 + self.0.second() as f64 / 3600.0
    }

    pub fn plus_hours(&self, hours: i64) -> Self {
        Timestamp(self.0 + chrono::Duration::hours(hours))
    }

    pub fn plus_minutes(&self, minutes: i64) -> Self {
        Timestamp(self.0 + chrono::Duration::minutes(minutes))
    }

    pub fn plus_seconds(&self, seconds: i64) -> Self {
        Timestamp(self.0 + chrono::Duration::seconds(seconds))
    }

    /// Whole seconds from `earlier` to `self`.
    pub fn seconds_since(&self, earlier: &Timestamp) -> i64 {
        (self.0 - earlier.0).num_seconds()
    }

    pub fn is_midnight(&self) -> bool {
        self.0.hour() == 0 && self.0.minute() == 0 && self.0.second() == 0
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.format(TIMESTAMP_FORMAT))
    }
}

impl FromStr for Timestamp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let naive = NaiveDateTime::parse_from_str(s, TIMESTAMP_FORMAT)
            .map_err(|_| Error::InvalidTimestamp(s.to_string()))?;
        Ok(Timestamp(Utc.from_utc_datetime(&naive)))
    }
}

impl Serialize for Timestamp {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Timestamp {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

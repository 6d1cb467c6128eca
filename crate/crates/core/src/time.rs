//! UTC instants with millisecond resolution.

use std::fmt;

use chrono::{DateTime, Datelike, NaiveDate, TimeZone, Utc};

use crate::error::{Error, Result};

pub const MS_PER_DAY: i64 = 86_400_000;
/// Julian Date of the Unix epoch (1970-01-01T00:00:00Z).
pub const JD_UNIX_EPOCH: f64 = 2_440_587.5;
/// 2000-01-01T12:00:00Z in Unix milliseconds (JD 2451545.0).
pub const J2000_UNIX_MS: i64 = 946_728_000_000;

/// Milliseconds since 1970-01-01T00:00:00Z, UT1 taken equal to UTC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EpochTime(i64);

impl EpochTime {
    pub const fn from_unix_ms(ms: i64) -> Self {
        EpochTime(ms)
    }

    pub fn unix_ms(self) -> i64 {
        self.0
    }

    pub fn from_utc(year: i32, month: u32, day: u32, hour: u32, min: u32, sec: u32) -> Result<Self> {
        let date = NaiveDate::from_ymd_opt(year, month, day)
            .and_then(|d| d.and_hms_opt(hour, min, sec))
            .ok_or_else(|| {
                Error::Domain(format!("invalid calendar time {year}-{month}-{day} {hour}:{min}:{sec}"))
            })?;
        Ok(EpochTime(Utc.from_utc_datetime(&date).timestamp_millis()))
    }

    /// Parses an RFC 3339 / ISO 8601 timestamp such as `2024-01-01T00:00:00Z`.
    pub fn parse_iso8601(text: &str) -> Result<Self> {
        let text = text.trim();
        if let Ok(dt) = DateTime::parse_from_rfc3339(text) {
            return Ok(EpochTime(dt.with_timezone(&Utc).timestamp_millis()));
        }
        // Bare timestamps without an offset are read as UTC.
        chrono::NaiveDateTime::parse_from_str(text, "%Y-%m-%dT%H:%M:%S%.f")
            .map(|n| EpochTime(Utc.from_utc_datetime(&n).timestamp_millis()))
            .map_err(|e| Error::InputData(format!("cannot parse time `{text}`: {e}")))
    }

    /// Day-of-year epoch as used by two-line element sets: 1-based, fractional.
    pub fn from_year_and_day(year: i32, day_of_year: f64) -> Result<Self> {
        if !(1.0..367.0).contains(&day_of_year) {
            return Err(Error::Domain(format!("day of year {day_of_year} out of range")));
        }
        let start = EpochTime::from_utc(year, 1, 1, 0, 0, 0)?;
        let offset_ms = ((day_of_year - 1.0) * MS_PER_DAY as f64).round() as i64;
        Ok(EpochTime(start.0 + offset_ms))
    }

    /// Inverse of [`EpochTime::from_year_and_day`].
    pub fn year_and_day(self) -> (i32, f64) {
        let year = self.to_datetime().year();
        let start = EpochTime::from_utc(year, 1, 1, 0, 0, 0).expect("January 1st is valid");
        (year, 1.0 + (self.0 - start.0) as f64 / MS_PER_DAY as f64)
    }

    pub fn year(self) -> i32 {
        self.to_datetime().year()
    }

    pub fn julian_date(self) -> f64 {
        JD_UNIX_EPOCH + self.0 as f64 / MS_PER_DAY as f64
    }

    /// Days since J2000.0, computed from the integer millisecond offset.
    pub fn days_since_j2000(self) -> f64 {
        (self.0 - J2000_UNIX_MS) as f64 / MS_PER_DAY as f64
    }

    pub fn seconds_since(self, earlier: EpochTime) -> f64 {
        (self.0 - earlier.0) as f64 / 1000.0
    }

    pub fn plus_seconds(self, seconds: f64) -> Self {
        EpochTime(self.0 + (seconds * 1000.0).round() as i64)
    }

    pub fn plus_minutes(self, minutes: i64) -> Self {
        EpochTime(self.0 + minutes * 60_000)
    }

    /// Hours since midnight UTC, in [0, 24).
    pub fn utc_hour(self) -> f64 {
        self.0.rem_euclid(MS_PER_DAY) as f64 / 3_600_000.0
    }

    fn to_datetime(self) -> DateTime<Utc> {
        Utc.timestamp_millis_opt(self.0)
            .single()
            .expect("millisecond timestamps are unambiguous in UTC")
    }

    pub fn to_iso8601(self) -> String {
        self.to_datetime().format("%Y-%m-%dT%H:%M:%S%.3fZ").to_string()
    }
}

impl fmt::Display for EpochTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_iso8601())
    }
}

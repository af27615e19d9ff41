use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

pub const WEEKDAYS: [&str; 7] = ["Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"];

pub fn weekday_index(label: &str) -> Option<usize> {
    WEEKDAYS.iter().position(|d| *d == label)
}

/// Fixed UTC offset in which time-of-day and day-of-week are derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TimeZoneSpec {
    offset_seconds: i32,
}

impl TimeZoneSpec {
    pub const UTC: TimeZoneSpec = TimeZoneSpec { offset_seconds: 0 };

    pub fn from_offset_seconds(offset_seconds: i32) -> Self {
        TimeZoneSpec { offset_seconds }
    }

    pub fn offset_seconds(&self) -> i32 {
        self.offset_seconds
    }

    fn local_seconds(&self, utc: i64) -> i64 {
        utc + i64::from(self.offset_seconds)
    }

    /// Minutes since local midnight, in `[0, 1440)`.
    pub fn minutes_of_day(&self, utc: i64) -> f64 {
        self.local_seconds(utc).rem_euclid(86_400) as f64 / 60.0
    }

    /// Monday = 0 .. Sunday = 6.
    pub fn weekday(&self, utc: i64) -> usize {
        // 1970-01-01 was a Thursday.
        (self.local_seconds(utc).div_euclid(86_400) + 3).rem_euclid(7) as usize
    }
}

impl fmt::Display for TimeZoneSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.offset_seconds == 0 {
            return f.write_str("UTC");
        }
        let sign = if self.offset_seconds < 0 { '-' } else { '+' };
        let abs = self.offset_seconds.unsigned_abs();
        write!(f, "{sign}{:02}:{:02}", abs / 3600, (abs % 3600) / 60)
    }
}

impl FromStr for TimeZoneSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("utc") || t.eq_ignore_ascii_case("z") || t.is_empty() {
            return Ok(TimeZoneSpec::UTC);
        }
        let bad = || Error::Config(format!("timezone `{s}` is not UTC or a ±HH:MM offset"));
        let (sign, rest) = match t.as_bytes()[0] {
            b'+' => (1, &t[1..]),
            b'-' => (-1, &t[1..]),
            _ => return Err(bad()),
        };
        let (h, m) = rest.split_once(':').unwrap_or((rest, "0"));
        let h: i32 = h.parse().map_err(|_| bad())?;
        let m: i32 = m.parse().map_err(|_| bad())?;
        if !(0..=14).contains(&h) || !(0..60).contains(&m) {
            return Err(bad());
        }
        Ok(TimeZoneSpec::from_offset_seconds(sign * (h * 3600 + m * 60)))
    }
}

impl Serialize for TimeZoneSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TimeZoneSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

use chrono::{DateTime, NaiveDate, NaiveDateTime};

use crate::model::TimeZoneSpec;

/// Parses a local timestamp written with a strftime pattern into UTC epoch
/// seconds. Patterns without a time part resolve to local midnight.
pub fn parse_timestamp(s: &str, format: &str, tz: TimeZoneSpec) -> Option<i64> {
    let s = s.trim();
    if format.contains("%z") || format.contains("%:z") {
        return DateTime::parse_from_str(s, format).ok().map(|d| d.timestamp());
    }
    let naive = NaiveDateTime::parse_from_str(s, format)
        .ok()
        .or_else(|| NaiveDate::parse_from_str(s, format).ok().and_then(|d| d.and_hms_opt(0, 0, 0)))?;
    Some(naive.and_utc().timestamp() - i64::from(tz.offset_seconds()))
}

pub fn format_timestamp(t: i64, format: &str, tz: TimeZoneSpec) -> String {
    let local = t + i64::from(tz.offset_seconds());
    match DateTime::from_timestamp(local, 0) {
        Some(d) => d.naive_utc().format(format).to_string(),
        None => t.to_string(),
    }
}

//! Local-time derivation shared by the temporal search and the one-hot
//! timestamp encodings.
//!
//! When no timezone is attached to a tuple, the UTC offset is derived
//! from longitude as `round(lon / 15)` hours; tuples without geo use UTC.

use chrono::{DateTime, Datelike, NaiveDate, TimeZone, Timelike, Utc};

/// UTC offset in seconds derived from longitude (15 degrees per hour).
pub fn utc_offset_secs(lon: Option<f64>) -> i64 {
    match lon {
        Some(lon) => (lon / 15.0).round() as i64 * 3600,
        None => 0,
    }
}

fn local_datetime(epoch_secs: i64, offset_secs: i64) -> DateTime<Utc> {
    Utc.timestamp_opt(epoch_secs + offset_secs, 0)
        .single()
        .expect("valid epoch timestamp")
}

/// Local weekday index, 0 = Monday .. 6 = Sunday.
pub fn local_weekday(epoch_secs: i64, offset_secs: i64) -> usize {
    local_datetime(epoch_secs, offset_secs)
        .weekday()
        .num_days_from_monday() as usize
}

/// Local hour of day, 0..=23.
pub fn local_hour(epoch_secs: i64, offset_secs: i64) -> usize {
    local_datetime(epoch_secs, offset_secs).hour() as usize
}

/// Local calendar date, used to count active days.
pub fn local_date(epoch_secs: i64, offset_secs: i64) -> NaiveDate {
    local_datetime(epoch_secs, offset_secs).date_naive()
}

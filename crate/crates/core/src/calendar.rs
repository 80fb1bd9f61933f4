//! Small date helpers. Every date in the crate is a proleptic Gregorian
//! `NaiveDate` printed as `YYYY-MM-DD`; there is no time of day.

use chrono::{Datelike, Duration, NaiveDate};

pub use chrono::NaiveDate as Date;

const FORMAT: &str = "%Y-%m-%d";

pub fn parse_date(s: &str) -> Option<NaiveDate> {
    // chrono accepts unpadded fields; the file formats do not.
    if s.len() != 10 {
        return None;
    }
    NaiveDate::parse_from_str(s, FORMAT).ok()
}

pub fn format_date(d: NaiveDate) -> String {
    d.format(FORMAT).to_string()
}

/// Signed number of days from `from` to `to`.
pub fn days_between(from: NaiveDate, to: NaiveDate) -> i64 {
    (to - from).num_days()
}

pub fn add_days(d: NaiveDate, days: i64) -> NaiveDate {
    d + Duration::days(days)
}

/// The Monday on or before `d` (ISO weeks).
pub fn monday_of(d: NaiveDate) -> NaiveDate {
    add_days(d, -i64::from(d.weekday().num_days_from_monday()))
}

/// Number of ISO week boundaries crossed going from `from` to `to`.
pub fn week_difference(from: NaiveDate, to: NaiveDate) -> i64 {
    days_between(monday_of(from), monday_of(to)) / 7
}

pub mod serde_date {
    use chrono::NaiveDate;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &NaiveDate, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format_date(*d))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<NaiveDate, D::Error> {
        let s = String::deserialize(d)?;
        super::parse_date(&s).ok_or_else(|| de::Error::custom(format!("invalid date `{s}`")))
    }
}

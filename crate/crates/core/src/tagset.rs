//! The temporal tag universe.
//!
//! Five temporal types (timeline, day of week, day of month, month of year
//! and the empty `NA` type) give 54 tag values. Each value has a stable id in
//! `0..54`:
//!
//! | ids      | tags                          |
//! |----------|-------------------------------|
//! | 0        | `NA`                          |
//! | 1..=3    | `TL=past`, `TL=present`, `TL=future` |
//! | 4..=10   | `DOW=Mon` .. `DOW=Sun`        |
//! | 11..=41  | `DOM=1` .. `DOM=31`           |
//! | 42..=53  | `MOY=Jan` .. `MOY=Dec`        |
//!
//! `NA` sits at id 0 so that the lowest-id tie-break used by every decoder
//! falls back to "no temporal information".

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate, Weekday};

use crate::error::{Error, Result};

pub const NUM_TAGS: usize = 54;

const TL_BASE: u8 = 1;
const DOW_BASE: u8 = 4;
const DOM_BASE: u8 = 11;
const MOY_BASE: u8 = 42;

const TIMELINE_NAMES: [&str; 3] = ["past", "present", "future"];
const WEEKDAY_NAMES: [&str; 7] = ["Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"];
const MONTH_NAMES: [&str; 12] = [
    "Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TemporalType {
    Na,
    Timeline,
    DayOfWeek,
    DayOfMonth,
    MonthOfYear,
}

impl TemporalType {
    /// The four types that carry calendar information, in id order.
    pub const CALENDAR: [TemporalType; 4] = [
        TemporalType::Timeline,
        TemporalType::DayOfWeek,
        TemporalType::DayOfMonth,
        TemporalType::MonthOfYear,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TemporalType::Na => "NA",
            TemporalType::Timeline => "TL",
            TemporalType::DayOfWeek => "DOW",
            TemporalType::DayOfMonth => "DOM",
            TemporalType::MonthOfYear => "MOY",
        }
    }
}

impl fmt::Display for TemporalType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Timeline {
    Past,
    Present,
    Future,
}

impl Timeline {
    pub fn between(target: NaiveDate, reference: NaiveDate) -> Timeline {
        match target.cmp(&reference) {
            Ordering::Less => Timeline::Past,
            Ordering::Equal => Timeline::Present,
            Ordering::Greater => Timeline::Future,
        }
    }
}

/// One temporal tag value, identified by its stable id.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tag(u8);

impl Tag {
    pub const NA: Tag = Tag(0);

    pub fn from_id(id: usize) -> Option<Tag> {
        (id < NUM_TAGS).then(|| Tag(id as u8))
    }

    pub fn id(self) -> usize {
        usize::from(self.0)
    }

    pub fn timeline(t: Timeline) -> Tag {
        Tag(TL_BASE
            + match t {
                Timeline::Past => 0,
                Timeline::Present => 1,
                Timeline::Future => 2,
            })
    }

    pub fn weekday(w: Weekday) -> Tag {
        Tag(DOW_BASE + w.num_days_from_monday() as u8)
    }

    /// `day` in `1..=31`.
    pub fn day_of_month(day: u32) -> Option<Tag> {
        (1..=31).contains(&day).then(|| Tag(DOM_BASE + day as u8 - 1))
    }

    /// `month` in `1..=12`.
    pub fn month(month: u32) -> Option<Tag> {
        (1..=12).contains(&month).then(|| Tag(MOY_BASE + month as u8 - 1))
    }

    pub fn all() -> impl Iterator<Item = Tag> {
        (0..NUM_TAGS as u8).map(Tag)
    }

    pub fn is_na(self) -> bool {
        self == Tag::NA
    }

    pub fn ttype(self) -> TemporalType {
        match self.0 {
            0 => TemporalType::Na,
            TL_BASE..DOW_BASE => TemporalType::Timeline,
            DOW_BASE..DOM_BASE => TemporalType::DayOfWeek,
            DOM_BASE..MOY_BASE => TemporalType::DayOfMonth,
            _ => TemporalType::MonthOfYear,
        }
    }

    fn value_str(self) -> String {
        let i = usize::from(self.0);
        match self.ttype() {
            TemporalType::Na => String::new(),
            TemporalType::Timeline => TIMELINE_NAMES[i - TL_BASE as usize].to_string(),
            TemporalType::DayOfWeek => WEEKDAY_NAMES[i - DOW_BASE as usize].to_string(),
            TemporalType::DayOfMonth => (i - DOM_BASE as usize + 1).to_string(),
            TemporalType::MonthOfYear => MONTH_NAMES[i - MOY_BASE as usize].to_string(),
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_na() {
            f.write_str("NA")
        } else {
            write!(f, "{}={}", self.ttype(), self.value_str())
        }
    }
}

impl fmt::Debug for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseTagError(pub String);

impl fmt::Display for ParseTagError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown tag `{}`", self.0)
    }
}

impl std::error::Error for ParseTagError {}

impl FromStr for Tag {
    type Err = ParseTagError;

    fn from_str(s: &str) -> std::result::Result<Tag, ParseTagError> {
        let err = || ParseTagError(s.to_string());
        if s == "NA" {
            return Ok(Tag::NA);
        }
        let (ty, value) = s.split_once('=').ok_or_else(err)?;
        let position = |names: &[&str]| names.iter().position(|n| *n == value);
        let id = match ty {
            "TL" => position(&TIMELINE_NAMES).map(|i| TL_BASE as usize + i),
            "DOW" => position(&WEEKDAY_NAMES).map(|i| DOW_BASE as usize + i),
            "MOY" => position(&MONTH_NAMES).map(|i| MOY_BASE as usize + i),
            "DOM" => {
                // Reject "09" and "+9" so every tag has exactly one spelling.
                let day: u32 = value.parse().map_err(|_| err())?;
                (day.to_string() == value && (1..=31).contains(&day))
                    .then(|| DOM_BASE as usize + day as usize - 1)
            }
            _ => None,
        };
        id.and_then(Tag::from_id).ok_or_else(err)
    }
}

/// The sentence-level tags of a bag: at most one tag per calendar type and
/// never `NA`. Stored sorted by id.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SentenceLabel {
    tags: Vec<Tag>,
}

impl SentenceLabel {
    pub fn empty() -> SentenceLabel {
        SentenceLabel::default()
    }

    pub fn new(tags: impl IntoIterator<Item = Tag>) -> Result<SentenceLabel> {
        let mut tags: Vec<Tag> = tags.into_iter().collect();
        tags.sort();
        tags.dedup();
        if tags.iter().any(|t| t.is_na()) {
            return Err(Error::NaTag);
        }
        for pair in tags.windows(2) {
            if pair[0].ttype() == pair[1].ttype() {
                return Err(Error::Config(format!(
                    "sentence label has two {} tags ({} and {})",
                    pair[0].ttype(),
                    pair[0],
                    pair[1]
                )));
            }
        }
        Ok(SentenceLabel { tags })
    }

    pub fn tags(&self) -> &[Tag] {
        &self.tags
    }

    pub fn contains(&self, tag: Tag) -> bool {
        self.tags.binary_search(&tag).is_ok()
    }

    pub fn of_type(&self, ttype: TemporalType) -> Option<Tag> {
        self.tags.iter().copied().find(|t| t.ttype() == ttype)
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = Tag> + '_ {
        self.tags.iter().copied()
    }
}

/// Tags describing `target` as seen from `reference`: timeline direction,
/// weekday, day of month and month.
pub fn derive_tags(target: NaiveDate, reference: NaiveDate) -> SentenceLabel {
    SentenceLabel {
        tags: vec![
            Tag::timeline(Timeline::between(target, reference)),
            Tag::weekday(target.weekday()),
            Tag::day_of_month(target.day()).expect("chrono day in 1..=31"),
            Tag::month(target.month()).expect("chrono month in 1..=12"),
        ],
    }
}

pub fn tag_consistent(tag: Tag, candidate: NaiveDate, reference: NaiveDate) -> Result<bool> {
    if tag.is_na() {
        return Err(Error::NaTag);
    }
    Ok(derive_tags(candidate, reference).contains(tag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calendar::parse_date;
    use proptest::prelude::*;

    fn d(s: &str) -> NaiveDate {
        parse_date(s).unwrap()
    }

    fn tags(strs: &[&str]) -> Vec<Tag> {
        strs.iter().map(|s| s.parse().unwrap()).collect()
    }

    #[test]
    fn universe_has_54_tags_and_five_types() {
        assert_eq!(Tag::all().count(), 54);
        let mut types: Vec<_> = Tag::all().map(Tag::ttype).collect();
        types.dedup();
        assert_eq!(types.len(), 5);
        assert_eq!(Tag::all().filter(|t| t.ttype() == TemporalType::DayOfMonth).count(), 31);
        assert_eq!(Tag::all().filter(|t| t.ttype() == TemporalType::MonthOfYear).count(), 12);
        assert_eq!(Tag::all().filter(|t| t.ttype() == TemporalType::DayOfWeek).count(), 7);
        assert_eq!(Tag::all().filter(|t| t.ttype() == TemporalType::Timeline).count(), 3);
    }

    #[test]
    fn canonical_strings_round_trip() {
        for tag in Tag::all() {
            let s = tag.to_string();
            assert_eq!(s.parse::<Tag>().unwrap(), tag, "{s}");
        }
        assert_eq!(Tag::NA.to_string(), "NA");
        assert_eq!(Tag::weekday(Weekday::Mon).to_string(), "DOW=Mon");
        assert_eq!(Tag::timeline(Timeline::Future).to_string(), "TL=future");
        for bad in ["DOM=0", "DOM=09", "DOM=32", "DOW=mon", "TL", "X=1", ""] {
            assert!(bad.parse::<Tag>().is_err(), "{bad}");
        }
    }

    #[test]
    fn derive_tags_worked_example() {
        let label = derive_tags(d("2016-05-09"), d("2016-05-06"));
        assert_eq!(label.tags(), tags(&["TL=future", "DOW=Mon", "DOM=9", "MOY=May"]));
    }

    #[test]
    fn derive_tags_past_across_year() {
        let label = derive_tags(d("2015-12-25"), d("2016-01-02"));
        assert_eq!(label.tags(), tags(&["TL=past", "DOW=Fri", "DOM=25", "MOY=Dec"]));
    }

    #[test]
    fn tag_consistency() {
        let mon: Tag = "DOW=Mon".parse().unwrap();
        assert!(tag_consistent(mon, d("2016-05-09"), d("2016-05-06")).unwrap());
        let dom31: Tag = "DOM=31".parse().unwrap();
        assert!(!tag_consistent(dom31, d("2016-02-29"), d("2016-02-01")).unwrap());
        assert!(matches!(tag_consistent(Tag::NA, d("2016-02-29"), d("2016-02-29")), Err(Error::NaTag)));
    }

    #[test]
    fn sentence_label_rejects_two_tags_of_one_type() {
        assert!(SentenceLabel::new(tags(&["DOW=Mon", "DOW=Tue"])).is_err());
        assert!(SentenceLabel::new([Tag::NA]).is_err());
        let l = SentenceLabel::new(tags(&["MOY=May", "DOW=Mon"])).unwrap();
        assert_eq!(l.tags(), tags(&["DOW=Mon", "MOY=May"]));
    }

    proptest! {
        #[test]
        fn derive_tags_is_total(days in -200_000i64..200_000, offset in -40i64..40) {
            let reference = d("2000-01-01") + chrono::Duration::days(days);
            let target = reference + chrono::Duration::days(offset);
            let label = derive_tags(target, reference);
            prop_assert_eq!(label.len(), 4);
            prop_assert!(SentenceLabel::new(label.iter()).is_ok());
            for t in label.iter() {
                prop_assert!(tag_consistent(t, target, reference).unwrap());
            }
            prop_assert!(derive_tags(reference, reference).contains(Tag::timeline(Timeline::Present)));
        }
    }
}

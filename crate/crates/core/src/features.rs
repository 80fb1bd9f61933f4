//! Sparse indicator features for the word tagger and the date normalizer.
//!
//! Feature ids are plain strings and form part of the model file format:
//!
//! * word features: `W=<lower>`, `SHAPE=<shape>`, `PRE1..3=`, `SUF1..3=` and
//!   `BIAS`, each conjoined with a tag as `<base>|<TAG>`;
//! * normalizer features: `MATCH|`, `SPUR|`, `MISS|` (temporal tag group),
//!   `W=w|<TAG>` (lexical), `W=w|POS=p|<TAG>` (lexical_pos), `DD=l`
//!   (day_diff), `WD=k` (week_diff), plus the group-independent `NULLCAND`,
//!   `NULLCAND|<TAG>` and `EXTERNAL`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;

use crate::calendar::{days_between, week_difference};
use crate::corpus::{Token, Tweet};
use crate::error::{Error, Result};
use crate::tagset::{derive_tags, Tag, TemporalType};

/// Feature id to weight. Zero entries are never stored.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseVector {
    entries: BTreeMap<String, f64>,
}

impl SparseVector {
    pub fn new() -> SparseVector {
        SparseVector::default()
    }

    pub fn set(&mut self, id: impl Into<String>, value: f64) {
        let id = id.into();
        debug_assert!(!id.contains(['\t', '\n']), "feature id `{id}`");
        if value == 0.0 {
            self.entries.remove(&id);
        } else {
            self.entries.insert(id, value);
        }
    }

    pub fn add(&mut self, id: &str, value: f64) {
        let v = self.get(id) + value;
        self.set(id, v);
    }

    /// Adds `scale * other`.
    pub fn add_scaled(&mut self, other: &SparseVector, scale: f64) {
        for (k, v) in other.iter() {
            self.add(k, scale * v);
        }
    }

    pub fn get(&self, id: &str) -> f64 {
        self.entries.get(id).copied().unwrap_or(0.0)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.entries.contains_key(id)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (small, large) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        small.iter().map(|(k, v)| v * large.get(k)).sum()
    }
}

impl FromIterator<(String, f64)> for SparseVector {
    fn from_iter<I: IntoIterator<Item = (String, f64)>>(iter: I) -> Self {
        let mut v = SparseVector::new();
        for (k, x) in iter {
            v.add(&k, x);
        }
        v
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FeatureGroup {
    TemporalTag,
    Lexical,
    LexicalPos,
    DayDiff,
    WeekDiff,
}

impl FeatureGroup {
    pub const ALL: [FeatureGroup; 5] = [
        FeatureGroup::TemporalTag,
        FeatureGroup::Lexical,
        FeatureGroup::LexicalPos,
        FeatureGroup::DayDiff,
        FeatureGroup::WeekDiff,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureGroup::TemporalTag => "temporal_tag",
            FeatureGroup::Lexical => "lexical",
            FeatureGroup::LexicalPos => "lexical_pos",
            FeatureGroup::DayDiff => "day_diff",
            FeatureGroup::WeekDiff => "week_diff",
        }
    }

    /// The group that produced a normalizer feature id, if any.
    pub fn of_feature(id: &str) -> Option<FeatureGroup> {
        if id.starts_with("MATCH|") || id.starts_with("SPUR|") || id.starts_with("MISS|") {
            Some(FeatureGroup::TemporalTag)
        } else if id.starts_with("W=") {
            if id.contains("|POS=") {
                Some(FeatureGroup::LexicalPos)
            } else {
                Some(FeatureGroup::Lexical)
            }
        } else if id == "DD" || id.starts_with("DD=") {
            Some(FeatureGroup::DayDiff)
        } else if id == "WD" || id.starts_with("WD=") {
            Some(FeatureGroup::WeekDiff)
        } else {
            None
        }
    }
}

impl fmt::Display for FeatureGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<FeatureGroup> {
        FeatureGroup::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown feature group `{s}`")))
    }
}

/// Enabled normalizer feature groups.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeatureGroups {
    pub enabled: BTreeSet<FeatureGroup>,
    /// Emit one real-valued `DD`/`WD` feature instead of one indicator per
    /// difference value.
    pub numeric_diffs: bool,
}

impl Default for FeatureGroups {
    fn default() -> Self {
        FeatureGroups::all()
    }
}

impl FeatureGroups {
    pub fn all() -> FeatureGroups {
        FeatureGroups {
            enabled: FeatureGroup::ALL.into_iter().collect(),
            numeric_diffs: false,
        }
    }

    pub fn without(mut self, group: FeatureGroup) -> FeatureGroups {
        self.enabled.remove(&group);
        self
    }

    pub fn has(&self, group: FeatureGroup) -> bool {
        self.enabled.contains(&group)
    }

    /// Parses a comma-separated list such as `temporal_tag,lexical`.
    pub fn parse_list(s: &str) -> Result<FeatureGroups> {
        let enabled = s
            .split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(str::parse)
            .collect::<Result<BTreeSet<_>>>()?;
        Ok(FeatureGroups {
            enabled,
            numeric_diffs: false,
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.enabled.iter().map(|g| g.name()).collect()
    }
}

/// Character shape: upper `X`, lower `x`, digit `9`, anything else kept as
/// is, with runs of the same class collapsed.
pub fn word_shape(word: &str) -> String {
    let mut out = String::new();
    let mut last = None;
    for c in word.chars() {
        let class = if c.is_uppercase() {
            'X'
        } else if c.is_alphabetic() {
            'x'
        } else if c.is_numeric() {
            '9'
        } else {
            c
        };
        if last != Some(class) {
            out.push(class);
            last = Some(class);
        }
    }
    out
}

/// Tag-independent halves of the word features of one token.
pub fn word_feature_bases(token: &Token) -> Vec<String> {
    let lower = token.text.to_lowercase();
    let chars: Vec<char> = lower.chars().collect();
    let mut out = vec![format!("W={lower}"), format!("SHAPE={}", word_shape(&token.text))];
    for k in 1..=3.min(chars.len()) {
        out.push(format!("PRE{k}={}", chars[..k].iter().collect::<String>()));
        out.push(format!("SUF{k}={}", chars[chars.len() - k..].iter().collect::<String>()));
    }
    out.push("BIAS".to_string());
    out
}

pub fn conjoin(base: &str, tag: Tag) -> String {
    format!("{base}|{tag}")
}

/// Indicator features of `token` carrying `tag`.
pub fn word_features(token: &Token, tag: Tag) -> SparseVector {
    word_feature_bases(token)
        .into_iter()
        .map(|b| (conjoin(&b, tag), 1.0))
        .collect()
}

const STOPWORDS: &[&str] = &[
    "a", "about", "all", "am", "an", "and", "are", "as", "at", "be", "been", "but", "by", "can",
    "do", "for", "from", "had", "has", "have", "he", "her", "his", "i", "if", "in", "is", "it",
    "its", "me", "my", "no", "not", "of", "on", "or", "our", "she", "so", "that", "the", "their",
    "them", "they", "this", "to", "up", "was", "we", "were", "what", "with", "you", "your",
];

pub fn is_stopword(lower: &str) -> bool {
    STOPWORDS.binary_search(&lower).is_ok()
}

pub fn is_url(lower: &str) -> bool {
    lower.starts_with("http") || lower.starts_with("www")
}

pub fn is_punctuation(word: &str) -> bool {
    !word.chars().any(char::is_alphanumeric)
}

/// Lowercased content words and their POS labels, in token order.
pub fn content_words(tweet: &Tweet) -> Vec<(String, &str)> {
    tweet
        .tokens
        .iter()
        .filter_map(|t| {
            let lower = t.text.to_lowercase();
            (!is_stopword(&lower) && !is_url(&lower) && !is_punctuation(&lower)).then_some((lower, t.pos.as_str()))
        })
        .collect()
}

/// Normalizer features for one (tweet, candidate) pair. `extracted` holds
/// one recognizer tag per token. Day and week differences outside the
/// window are clamped to its edges, which is how out-of-window external
/// candidates featurize.
pub fn norm_features(
    tweet: &Tweet,
    extracted: &[Tag],
    candidate: Option<NaiveDate>,
    groups: &FeatureGroups,
) -> SparseVector {
    let extracted: BTreeSet<Tag> = extracted.iter().copied().filter(|t| !t.is_na()).collect();
    let mut out = SparseVector::new();
    let Some(candidate) = candidate else {
        out.set("NULLCAND", 1.0);
        for x in &extracted {
            out.set(format!("NULLCAND|{x}"), 1.0);
        }
        return out;
    };
    let cand_tags = derive_tags(candidate, tweet.created_at);

    if groups.has(FeatureGroup::TemporalTag) {
        for x in &extracted {
            if cand_tags.of_type(x.ttype()).is_some() {
                if cand_tags.contains(*x) {
                    out.set(format!("MATCH|{x}"), 1.0);
                    out.set(format!("MATCH|{}", x.ttype()), 1.0);
                } else {
                    out.set(format!("SPUR|{}", x.ttype()), 1.0);
                }
            }
        }
        for c in cand_tags.iter() {
            if !extracted.iter().any(|x| x.ttype() == c.ttype()) {
                out.set(format!("MISS|{}", c.ttype()), 1.0);
            }
        }
    }

    let lexical = groups.has(FeatureGroup::Lexical);
    let lexical_pos = groups.has(FeatureGroup::LexicalPos);
    if lexical || lexical_pos {
        for (word, pos) in content_words(tweet) {
            for c in cand_tags.iter() {
                if lexical {
                    out.set(format!("W={word}|{c}"), 1.0);
                }
                if lexical_pos && !pos.is_empty() {
                    out.set(format!("W={word}|POS={pos}|{c}"), 1.0);
                }
            }
        }
    }

    let day = days_between(tweet.created_at, candidate).clamp(-10, 10);
    let week = week_difference(tweet.created_at, candidate).clamp(-2, 2);
    if groups.has(FeatureGroup::DayDiff) {
        if groups.numeric_diffs {
            out.set("DD", day as f64 / 10.0);
        } else {
            out.set(format!("DD={day}"), 1.0);
        }
    }
    if groups.has(FeatureGroup::WeekDiff) {
        if groups.numeric_diffs {
            out.set("WD", week as f64 / 2.0);
        } else {
            out.set(format!("WD={week}"), 1.0);
        }
    }
    out
}

/// Features of a candidate proposed by an external resolver.
pub fn external_features(
    tweet: &Tweet,
    extracted: &[Tag],
    candidate: NaiveDate,
    groups: &FeatureGroups,
) -> SparseVector {
    let mut v = norm_features(tweet, extracted, Some(candidate), groups);
    v.set("EXTERNAL", 1.0);
    v
}

/// Which calendar types a set of extracted tags covers.
pub fn covered_types(extracted: &[Tag]) -> BTreeSet<TemporalType> {
    extracted.iter().filter(|t| !t.is_na()).map(|t| t.ttype()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calendar::parse_date;
    use proptest::prelude::*;

    fn d(s: &str) -> NaiveDate {
        parse_date(s).unwrap()
    }

    fn tag(s: &str) -> Tag {
        s.parse().unwrap()
    }

    #[test]
    fn stopwords_are_sorted() {
        assert!(STOPWORDS.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn word_templates_by_hand() {
        let v = word_features(&Token::new("2mrw"), Tag::NA);
        for id in ["W=2mrw|NA", "SHAPE=9x|NA", "PRE1=2|NA", "PRE3=2mr|NA", "SUF1=w|NA", "SUF3=mrw|NA", "BIAS|NA"] {
            assert_eq!(v.get(id), 1.0, "{id}");
        }
        assert_eq!(v.len(), 9);
        assert_eq!(word_shape("#Friday!!"), "#Xx!");
        assert_eq!(word_shape("9th-December"), "9x-Xx");
        // Short words only get the affixes they have.
        assert_eq!(word_features(&Token::new("I"), Tag::NA).len(), 5);
    }

    #[test]
    fn word_features_are_tag_conjoined() {
        let t = Token::new("Monday");
        let a = word_features(&t, tag("DOW=Mon"));
        let b = word_features(&t, tag("TL=future"));
        assert_eq!(a, word_features(&t, tag("DOW=Mon")));
        assert!(a.keys().all(|k| !b.contains(k)));
    }

    fn fig1() -> Tweet {
        let mut t = Tweet::from_text("fig1", d("2016-05-06"), "Watch Mercury transit Monday http://x.co !");
        t.tokens[3].pos = "NNP".into();
        t
    }

    #[test]
    fn normalizer_features_worked_example() {
        let t = fig1();
        let extracted = [Tag::NA, Tag::NA, tag("TL=future"), tag("DOW=Mon"), Tag::NA, Tag::NA];
        let v = norm_features(&t, &extracted, Some(d("2016-05-09")), &FeatureGroups::all());
        for id in ["MATCH|TL=future", "MATCH|DOW=Mon", "MATCH|TL", "MATCH|DOW", "MISS|DOM", "MISS|MOY", "DD=3", "WD=1"] {
            assert!(v.contains(id), "{id} missing from {v:?}");
        }
        assert!(v.contains("W=monday|DOW=Mon"));
        assert!(v.contains("W=monday|POS=NNP|MOY=May"));
        assert!(!v.keys().any(|k| k.contains("http") || k.starts_with("W=!")));
        assert!(!v.keys().any(|k| k.starts_with("SPUR") || k.starts_with("NULLCAND")));

        let v = norm_features(&t, &extracted, Some(d("2016-05-02")), &FeatureGroups::all());
        assert!(v.contains("SPUR|TL") && v.contains("MATCH|DOW=Mon") && v.contains("DD=-4") && v.contains("WD=0"));
    }

    #[test]
    fn zero_offset_no_tags() {
        let t = fig1();
        let v = norm_features(&t, &[Tag::NA; 6], Some(t.created_at), &FeatureGroups::all());
        for id in ["DD=0", "WD=0", "MISS|TL", "MISS|DOW", "MISS|DOM", "MISS|MOY", "W=watch|TL=present"] {
            assert!(v.contains(id), "{id}");
        }
    }

    #[test]
    fn null_candidate() {
        let t = fig1();
        let extracted = [Tag::NA, tag("DOW=Fri"), Tag::NA, Tag::NA, Tag::NA, Tag::NA];
        let v = norm_features(&t, &extracted, None, &FeatureGroups::all());
        let keys: Vec<&str> = v.keys().collect();
        assert_eq!(keys, ["NULLCAND", "NULLCAND|DOW=Fri"]);
    }

    #[test]
    fn clamped_external_features() {
        let t = fig1();
        let v = external_features(&t, &[Tag::NA; 6], d("2016-06-20"), &FeatureGroups::all());
        assert!(v.contains("DD=10") && v.contains("WD=2") && v.contains("EXTERNAL"));
        let groups = FeatureGroups { numeric_diffs: true, ..FeatureGroups::all() };
        let v = norm_features(&t, &[Tag::NA; 6], Some(d("2016-05-01")), &groups);
        assert_eq!(v.get("DD"), -0.5);
        assert_eq!(v.get("WD"), -0.5);
    }

    #[test]
    fn group_list_parsing() {
        let g = FeatureGroups::parse_list("lexical, day_diff").unwrap();
        assert_eq!(g.names(), ["lexical", "day_diff"]);
        assert!(FeatureGroups::parse_list("lexical,bogus").is_err());
    }

    proptest! {
        #[test]
        fn disabling_a_group_removes_only_that_group(
            offset in prop::option::of(-15i64..15),
            tag_ids in prop::collection::vec(0usize..54, 6),
            drop in 0usize..5,
        ) {
            let t = fig1();
            let extracted: Vec<Tag> = tag_ids.into_iter().map(|i| Tag::from_id(i).unwrap()).collect();
            let cand = offset.map(|o| t.created_at + chrono::Duration::days(o));
            let full = norm_features(&t, &extracted, cand, &FeatureGroups::all());
            let group = FeatureGroup::ALL[drop];
            let ablated = norm_features(&t, &extracted, cand, &FeatureGroups::all().without(group));
            let expect: Vec<(&str, f64)> = full.iter().filter(|(k, _)| FeatureGroup::of_feature(k) != Some(group)).collect();
            prop_assert_eq!(ablated.iter().collect::<Vec<_>>(), expect);
            let nulls = full.keys().filter(|k| k.starts_with("NULLCAND")).count();
            if cand.is_some() { prop_assert_eq!(nulls, 0); } else { prop_assert_eq!(nulls, full.len()); }
        }
    }
}

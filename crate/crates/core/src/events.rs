//! Event database extraction: (entity, date) pairs strongly associated by a
//! G² log-likelihood-ratio test over co-occurrence counts.
//!
//! The observation unit is a (tweet, resolved date) pair: a tweet with two
//! external dates contributes two observations. An entity is present in an
//! observation when the tweet mentions it at least once.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use chrono::NaiveDate;

use crate::calendar::{format_date, parse_date};
use crate::corpus::{write_lines, FieldError, Tweet};
use crate::error::Result;

/// 2x2 counts for one (entity, date) pair.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ContingencyTable {
    /// entity and date
    pub n_ed: u64,
    /// entity, other date
    pub n_e_not_d: u64,
    /// other entity, date
    pub n_not_e_d: u64,
    /// neither
    pub n_not_e_not_d: u64,
}

impl ContingencyTable {
    pub fn new(n_ed: u64, n_e_not_d: u64, n_not_e_d: u64, n_not_e_not_d: u64) -> Self {
        ContingencyTable {
            n_ed,
            n_e_not_d,
            n_not_e_d,
            n_not_e_not_d,
        }
    }

    pub fn total(&self) -> u64 {
        self.n_ed + self.n_e_not_d + self.n_not_e_d + self.n_not_e_not_d
    }

    /// Count expected in the (entity, date) cell under independence.
    pub fn expected_ed(&self) -> f64 {
        let row = (self.n_ed + self.n_e_not_d) as f64;
        let col = (self.n_ed + self.n_not_e_d) as f64;
        row * col / self.total() as f64
    }
}

/// `2 * sum O ln(O / E)` over the four cells; empty cells contribute 0.
pub fn g_squared(t: &ContingencyTable) -> f64 {
    let n = t.total() as f64;
    if n == 0.0 {
        return 0.0;
    }
    let r1 = (t.n_ed + t.n_e_not_d) as f64;
    let r2 = (t.n_not_e_d + t.n_not_e_not_d) as f64;
    let c1 = (t.n_ed + t.n_not_e_d) as f64;
    let c2 = (t.n_e_not_d + t.n_not_e_not_d) as f64;
    let cells = [
        (t.n_ed, r1 * c1),
        (t.n_e_not_d, r1 * c2),
        (t.n_not_e_d, r2 * c1),
        (t.n_not_e_not_d, r2 * c2),
    ];
    let mut sum = 0.0;
    for (o, row_col) in cells {
        if o > 0 {
            let o = o as f64;
            // O / E = O * N / (row * col)
            sum += o * (o * n / row_col).ln();
        }
    }
    // Rounding can leave tiny negatives on independent tables.
    (2.0 * sum).max(0.0)
}

fn ne_type(label: &str) -> Option<(&str, bool)> {
    match label {
        "" | "O" => None,
        l => match l.split_once('-') {
            Some(("B", ty)) => Some((ty, true)),
            Some(("I", ty)) => Some((ty, false)),
            _ => Some((l, false)),
        },
    }
}

/// Entity mentions of a tweet: maximal runs of consecutive tokens sharing a
/// non-empty NE label, joined by single spaces and lowercased. `B-`/`I-`
/// prefixed labels are understood; `O` counts as empty.
pub fn tweet_entities(tweet: &Tweet) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut current: Option<(&str, Vec<&str>)> = None;
    for token in &tweet.tokens {
        let ty = ne_type(&token.ne);
        match (ty, current.as_mut()) {
            (Some((ty, false)), Some((cur_ty, words))) if *cur_ty == ty => {
                words.push(&token.text);
            }
            (Some((ty, _)), _) => {
                if let Some((_, words)) = current.take() {
                    out.insert(words.join(" ").to_lowercase());
                }
                current = Some((ty, vec![&token.text]));
            }
            (None, _) => {
                if let Some((_, words)) = current.take() {
                    out.insert(words.join(" ").to_lowercase());
                }
            }
        }
    }
    if let Some((_, words)) = current {
        out.insert(words.join(" ").to_lowercase());
    }
    out
}

/// Raw marginal counts; merging two of these is associative and commutative.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CooccurrenceCounts {
    pub observations: u64,
    pub entity: HashMap<String, u64>,
    pub date: HashMap<NaiveDate, u64>,
    pub joint: HashMap<(String, NaiveDate), u64>,
}

impl CooccurrenceCounts {
    pub fn add_tweet(&mut self, tweet: &Tweet) {
        let dates: BTreeSet<NaiveDate> = tweet.external_dates.iter().copied().collect();
        if dates.is_empty() {
            return;
        }
        let entities = tweet_entities(tweet);
        self.observations += dates.len() as u64;
        for d in &dates {
            *self.date.entry(*d).or_default() += 1;
        }
        for e in &entities {
            *self.entity.entry(e.clone()).or_default() += dates.len() as u64;
            for d in &dates {
                *self.joint.entry((e.clone(), *d)).or_default() += 1;
            }
        }
    }

    pub fn merge(&mut self, other: CooccurrenceCounts) {
        self.observations += other.observations;
        for (k, v) in other.entity {
            *self.entity.entry(k).or_default() += v;
        }
        for (k, v) in other.date {
            *self.date.entry(k).or_default() += v;
        }
        for (k, v) in other.joint {
            *self.joint.entry(k).or_default() += v;
        }
    }

    pub fn table(&self, entity: &str, date: NaiveDate) -> ContingencyTable {
        let n_ed = self
            .joint
            .get(&(entity.to_string(), date))
            .copied()
            .unwrap_or(0);
        let n_e = self.entity.get(entity).copied().unwrap_or(0);
        let n_d = self.date.get(&date).copied().unwrap_or(0);
        ContingencyTable::new(n_ed, n_e - n_ed, n_d - n_ed, self.observations + n_ed - n_e - n_d)
    }
}

/// Contingency tables for every (entity, date) pair observed together at
/// least once.
pub fn count_cooccurrences(corpus: &[Tweet]) -> BTreeMap<(String, NaiveDate), ContingencyTable> {
    let mut counts = CooccurrenceCounts::default();
    for tweet in corpus {
        counts.add_tweet(tweet);
    }
    counts
        .joint
        .keys()
        .map(|(e, d)| ((e.clone(), *d), counts.table(e, *d)))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct EventRecord {
    pub entity: String,
    pub date: NaiveDate,
    pub score: f64,
}

/// The `k` highest-scoring positively associated pairs with at least
/// `min_count` joint observations. Sorted by score descending, then entity,
/// then date.
pub fn extract_events(corpus: &[Tweet], k: usize, min_count: u64) -> Vec<EventRecord> {
    let mut scored: Vec<EventRecord> = count_cooccurrences(corpus)
        .into_iter()
        .filter(|(_, t)| t.n_ed >= min_count && t.n_ed as f64 > t.expected_ed())
        .map(|((entity, date), t)| EventRecord {
            entity,
            date,
            score: g_squared(&t),
        })
        .collect();
    scored.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.entity.cmp(&b.entity))
            .then_with(|| a.date.cmp(&b.date))
    });
    scored.truncate(k);
    scored
}

pub fn write_events(path: impl AsRef<Path>, events: &[EventRecord]) -> Result<()> {
    write_lines(
        path.as_ref(),
        events.iter().map(|e| {
            let mut line = String::new();
            write!(line, "{}\t{}\t{:?}", e.entity, format_date(e.date), e.score).unwrap();
            line
        }),
    )
}

pub fn parse_events(path: &Path, content: &str) -> Result<Vec<EventRecord>> {
    let mut out = Vec::new();
    for (i, line) in content.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let err = |field: &str, msg: &str| FieldError::new(field, msg).at(path, i + 1);
        let mut parts = line.split('\t');
        let (Some(entity), Some(date), Some(score), None) =
            (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err(err("<record>", "expected entity<TAB>date<TAB>score"));
        };
        let date = parse_date(date).ok_or_else(|| err("date", "invalid date"))?;
        let score: f64 = score.parse().map_err(|_| err("score", "invalid number"))?;
        if !(score >= 0.0) {
            return Err(err("score", "score must be non-negative"));
        }
        out.push(EventRecord {
            entity: entity.to_string(),
            date,
            score,
        });
    }
    Ok(out)
}

pub fn load_events(path: impl AsRef<Path>) -> Result<Vec<EventRecord>> {
    let path = path.as_ref();
    parse_events(path, &fs::read_to_string(path)?)
}

//! Precision/recall/F1 at the tag and date level, threshold sweeps, and
//! JSON reports.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use serde::Serialize;

use crate::calendar::format_date;
use crate::corpus::{write_lines, Tweet};
use crate::error::{Error, Result};
use crate::multit::TagSequence;
use crate::normalizer::{Resolution, ScoredTweet};
use crate::tagset::{SentenceLabel, Tag};

/// Labels for manual error annotation; nothing is categorized automatically.
pub const ERROR_CATEGORIES: [&str; 7] = [
    "spelling_variation",
    "ambiguity",
    "missing_rule",
    "tokenization",
    "hashtag",
    "out_of_range",
    "over_prediction",
];

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct PRF {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

impl PRF {
    /// 0/0 counts as 0 for precision, recall and F1.
    pub fn from_counts(tp: u64, fp: u64, fn_: u64) -> PRF {
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        PRF {
            precision,
            recall,
            f1,
            tp,
            fp,
            fn_,
        }
    }
}

/// Token-level scoring; `NA` positions count for nothing.
pub fn tag_prf(gold: &[TagSequence], pred: &[TagSequence]) -> Result<PRF> {
    if gold.len() != pred.len() {
        return Err(Error::LengthMismatch {
            expected: gold.len(),
            got: pred.len(),
        });
    }
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for (g, p) in gold.iter().zip(pred) {
        if g.len() != p.len() {
            return Err(Error::LengthMismatch {
                expected: g.len(),
                got: p.len(),
            });
        }
        for (gt, pt) in g.iter().zip(p) {
            if !pt.is_na() {
                if pt == gt {
                    tp += 1;
                } else {
                    fp += 1;
                }
            }
            if !gt.is_na() && pt != gt {
                fn_ += 1;
            }
        }
    }
    Ok(PRF::from_counts(tp, fp, fn_))
}

/// Sentence-level scoring of the tags a tagging mentions against bag
/// labels: `|m ∩ t|` hits, `|m \ t|` spurious, `|t \ m|` missed.
pub fn sentence_tag_prf(labels: &[SentenceLabel], pred: &[TagSequence]) -> Result<PRF> {
    if labels.len() != pred.len() {
        return Err(Error::LengthMismatch {
            expected: labels.len(),
            got: pred.len(),
        });
    }
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for (t, z) in labels.iter().zip(pred) {
        let m: BTreeSet<Tag> = z.iter().copied().filter(|x| !x.is_na()).collect();
        for x in &m {
            if t.contains(*x) {
                tp += 1;
            } else {
                fp += 1;
            }
        }
        fn_ += t.iter().filter(|x| !m.contains(x)).count() as u64;
    }
    Ok(PRF::from_counts(tp, fp, fn_))
}

/// Gold date sets of the annotated tweets (`gold_dates` present).
pub fn gold_dates(corpus: &[Tweet]) -> Vec<(String, Vec<NaiveDate>)> {
    corpus
        .iter()
        .filter_map(|t| t.gold_dates.as_ref().map(|g| (t.id.clone(), g.clone())))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DateScores {
    #[serde(flatten)]
    pub prf: PRF,
    /// Fraction of gold tweets whose predicted date set equals the gold set.
    pub accuracy: f64,
    pub tweets: usize,
}

fn pred_index<'a>(gold: &[(String, Vec<NaiveDate>)], pred: &'a [(String, Resolution)]) -> Result<HashMap<&'a str, &'a Resolution>> {
    let known: BTreeSet<&str> = gold.iter().map(|(id, _)| id.as_str()).collect();
    let mut index = HashMap::new();
    for (id, r) in pred {
        if !known.contains(id.as_str()) {
            return Err(Error::UnknownId(id.clone()));
        }
        index.insert(id.as_str(), r);
    }
    Ok(index)
}

/// Per-date counts over the gold tweets. A gold tweet with no prediction
/// counts as predicting nothing.
pub fn date_prf(gold: &[(String, Vec<NaiveDate>)], pred: &[(String, Resolution)]) -> Result<DateScores> {
    let index = pred_index(gold, pred)?;
    let empty = Resolution::default();
    let (mut tp, mut fp, mut fn_, mut exact) = (0, 0, 0, 0);
    for (id, g) in gold {
        let g: BTreeSet<NaiveDate> = g.iter().copied().collect();
        let p: BTreeSet<NaiveDate> = index.get(id.as_str()).copied().unwrap_or(&empty).date_set().into_iter().collect();
        tp += p.intersection(&g).count() as u64;
        fp += p.difference(&g).count() as u64;
        fn_ += g.difference(&p).count() as u64;
        exact += usize::from(p == g);
    }
    Ok(DateScores {
        prf: PRF::from_counts(tp, fp, fn_),
        accuracy: ratio(exact as u64, gold.len() as u64),
        tweets: gold.len(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub threshold: f64,
    #[serde(flatten)]
    pub scores: DateScores,
}

/// Thresholds 0, 0.05, ..., 1.
pub fn default_thresholds() -> Vec<f64> {
    (0..=20).map(|k| k as f64 / 20.0).collect()
}

/// Date scores of already-scored tweets at every threshold.
pub fn sweep(
    gold: &[(String, Vec<NaiveDate>)],
    scored: &[(String, ScoredTweet)],
    thresholds: &[f64],
) -> Result<Vec<SweepRow>> {
    if thresholds.is_empty() || thresholds.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::Config("thresholds must be non-empty and sorted".into()));
    }
    thresholds
        .iter()
        .map(|&threshold| {
            let pred: Vec<(String, Resolution)> = scored.iter().map(|(id, s)| (id.clone(), s.decode(threshold))).collect();
            Ok(SweepRow {
                threshold,
                scores: date_prf(gold, &pred)?,
            })
        })
        .collect()
}

/// Threshold with the best F1; ties go to the lowest threshold.
pub fn best_threshold(rows: &[SweepRow]) -> Option<f64> {
    rows.iter()
        .fold(None, |best: Option<&SweepRow>, r| match best {
            Some(b) if b.scores.prf.f1 >= r.scores.prf.f1 => Some(b),
            _ => Some(r),
        })
        .map(|r| r.threshold)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DatedConfidence {
    pub date: String,
    pub confidence: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorEntry {
    pub id: String,
    pub gold: Vec<String>,
    pub predicted: Vec<DatedConfidence>,
    /// Features firing for the highest-scoring candidate, when known.
    pub top_features: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DateReport {
    pub mode: &'static str,
    pub overall: DateScores,
    pub threshold: Option<f64>,
    pub sweep: Vec<SweepRow>,
    pub error_categories: Vec<&'static str>,
    pub errors: Vec<ErrorEntry>,
}

/// Scores predictions and lists every tweet whose predicted set differs
/// from gold. `top_features` maps tweet ids to fired features.
pub fn date_report(
    gold: &[(String, Vec<NaiveDate>)],
    pred: &[(String, Resolution)],
    top_features: &HashMap<String, Vec<String>>,
) -> Result<DateReport> {
    let overall = date_prf(gold, pred)?;
    let index = pred_index(gold, pred)?;
    let empty = Resolution::default();
    let mut errors = Vec::new();
    for (id, g) in gold {
        let r = index.get(id.as_str()).copied().unwrap_or(&empty);
        let mut gs: Vec<NaiveDate> = g.clone();
        gs.sort();
        gs.dedup();
        if r.date_set() != gs {
            errors.push(ErrorEntry {
                id: id.clone(),
                gold: gs.iter().map(|d| format_date(*d)).collect(),
                predicted: r
                    .dates
                    .iter()
                    .map(|(d, c)| DatedConfidence {
                        date: format_date(*d),
                        confidence: *c,
                    })
                    .collect(),
                top_features: top_features.get(id).cloned().unwrap_or_default(),
            });
        }
    }
    Ok(DateReport {
        mode: "dates",
        overall,
        threshold: None,
        sweep: Vec::new(),
        error_categories: ERROR_CATEGORIES.to_vec(),
        errors,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TagReport {
    pub mode: &'static str,
    pub overall: PRF,
    pub tweets: usize,
}

/// Aligns predicted taggings to gold ones by tweet id.
pub fn tag_report(gold: &[(String, TagSequence)], pred: &[(String, TagSequence)]) -> Result<TagReport> {
    let index: HashMap<&str, &TagSequence> = pred.iter().map(|(id, z)| (id.as_str(), z)).collect();
    let known: BTreeSet<&str> = gold.iter().map(|(id, _)| id.as_str()).collect();
    if let Some((id, _)) = pred.iter().find(|(id, _)| !known.contains(id.as_str())) {
        return Err(Error::UnknownId(id.clone()));
    }
    let mut g = Vec::with_capacity(gold.len());
    let mut p = Vec::with_capacity(gold.len());
    for (id, z) in gold {
        g.push(z.clone());
        p.push(index.get(id.as_str()).map(|z| (*z).clone()).unwrap_or_else(|| vec![Tag::NA; z.len()]));
    }
    Ok(TagReport {
        mode: "tags",
        overall: tag_prf(&g, &p)?,
        tweets: gold.len(),
    })
}

pub fn write_report<T: Serialize>(path: impl AsRef<Path>, report: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(report)?;
    write_lines(path.as_ref(), std::iter::once(text))
}

/// One line per tweet: the id, then one canonical tag per token.
pub fn tag_line(id: &str, z: &[Tag]) -> String {
    let mut line = id.to_string();
    for t in z {
        line.push(' ');
        line.push_str(&t.to_string());
    }
    line
}

pub fn write_tag_file(path: impl AsRef<Path>, rows: &[(String, TagSequence)]) -> Result<()> {
    write_lines(path.as_ref(), rows.iter().map(|(id, z)| tag_line(id, z)))
}

pub fn parse_tag_file(path: &Path, content: &str) -> Result<Vec<(String, TagSequence)>> {
    let mut out = Vec::new();
    for (i, line) in content.lines().enumerate() {
        let mut parts = line.split_whitespace();
        let Some(id) = parts.next() else { continue };
        let z = parts
            .map(|s| {
                s.parse::<Tag>().map_err(|e| Error::Parse {
                    path: path.to_path_buf(),
                    line: i + 1,
                    field: "tags".into(),
                    message: e.to_string(),
                })
            })
            .collect::<Result<TagSequence>>()?;
        out.push((id.to_string(), z));
    }
    crate::corpus::check_unique_ids(out.iter().map(|(id, _)| id.as_str()))?;
    Ok(out)
}

pub fn load_tag_file(path: impl AsRef<Path>) -> Result<Vec<(String, TagSequence)>> {
    let path = path.as_ref();
    parse_tag_file(path, &fs::read_to_string(path)?)
}

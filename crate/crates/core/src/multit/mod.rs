//! Multiple-instance word tagger.
//!
//! Each word gets one of the 54 temporal tags; a tweet's word scores are
//! independent log-linear factors `θ·f(z_j, w_j)`. Sentence-level labels tie
//! to the words through deterministic-OR constraints: every label tag must be
//! carried by at least one word and no word may carry a tag outside the
//! label. Learning compares the best constrained ("clamped") assignment with
//! the best unconstrained ("free") one.

mod exact;
mod infer;
mod train;

use std::collections::HashMap;
use std::path::Path;

use serde_json::Value;

pub use exact::{exact_log_likelihood, exact_loglik_gradient, ExactOutcome, MAX_EXACT_TAGS, MAX_EXACT_TOKENS};
pub(crate) use infer::cover_assignment;
pub use infer::{clamped_assignment, free_assignment, infer_clamped, infer_free};
pub use train::{train, train_with, TrainConfig, TrainStats};

use crate::corpus::Tweet;
use crate::error::{Error, Result};
use crate::features::{conjoin, word_feature_bases, SparseVector};
use crate::model_file::{load_model, save_model};
use crate::tagset::{Tag, NUM_TAGS};

/// One tag per token.
pub type TagSequence = Vec<Tag>;

/// Per-token scores of all 54 tags, indexed by tag id.
pub type TagScores = Vec<[f64; NUM_TAGS]>;

/// Word-tagger weights. Features are stored factored as a tag-independent
/// base (`W=monday`, `SHAPE=Xx`, ...) times a 54-wide weight row, which is
/// the same thing as the flat `base|TAG` feature ids used in model files.
#[derive(Clone, Debug, Default)]
pub struct RecognizerModel {
    index: HashMap<String, usize>,
    bases: Vec<String>,
    rows: Vec<[f64; NUM_TAGS]>,
    pub metadata: Value,
}

impl PartialEq for RecognizerModel {
    fn eq(&self, other: &Self) -> bool {
        self.to_sparse() == other.to_sparse() && self.metadata == other.metadata
    }
}

impl RecognizerModel {
    pub fn zero() -> RecognizerModel {
        RecognizerModel {
            metadata: Value::Object(Default::default()),
            ..Default::default()
        }
    }

    fn row_of(&mut self, base: &str) -> usize {
        if let Some(&r) = self.index.get(base) {
            return r;
        }
        let r = self.rows.len();
        self.index.insert(base.to_string(), r);
        self.bases.push(base.to_string());
        self.rows.push([0.0; NUM_TAGS]);
        r
    }

    /// Row ids of every token's features, registering unseen bases.
    pub(crate) fn intern(&mut self, tweet: &Tweet) -> Vec<Vec<usize>> {
        tweet
            .tokens
            .iter()
            .map(|t| word_feature_bases(t).iter().map(|b| self.row_of(b)).collect())
            .collect()
    }

    /// Row ids of every token's known features.
    pub(crate) fn lookup(&self, tweet: &Tweet) -> Vec<Vec<usize>> {
        tweet
            .tokens
            .iter()
            .map(|t| {
                word_feature_bases(t)
                    .iter()
                    .filter_map(|b| self.index.get(b).copied())
                    .collect()
            })
            .collect()
    }

    pub(crate) fn scores_of_rows(&self, rows: &[Vec<usize>]) -> TagScores {
        rows.iter()
            .map(|token_rows| {
                let mut s = [0.0; NUM_TAGS];
                for &r in token_rows {
                    for (acc, w) in s.iter_mut().zip(&self.rows[r]) {
                        *acc += w;
                    }
                }
                s
            })
            .collect()
    }

    pub(crate) fn rows_mut(&mut self) -> &mut Vec<[f64; NUM_TAGS]> {
        &mut self.rows
    }

    /// `θ·f(t, w_j)` for every token `j` and tag `t`.
    pub fn token_scores(&self, tweet: &Tweet) -> TagScores {
        self.scores_of_rows(&self.lookup(tweet))
    }

    fn split_id(id: &str) -> Option<(&str, Tag)> {
        let (base, tag) = id.rsplit_once('|')?;
        Some((base, tag.parse().ok()?))
    }

    /// Weight of a flat feature id such as `W=tomorrow|TL=future`.
    pub fn weight(&self, id: &str) -> f64 {
        Self::split_id(id)
            .and_then(|(base, tag)| self.index.get(base).map(|&r| self.rows[r][tag.id()]))
            .unwrap_or(0.0)
    }

    pub fn set_weight(&mut self, id: &str, w: f64) -> Result<()> {
        let (base, tag) = Self::split_id(id)
            .ok_or_else(|| Error::ModelFormat(format!("`{id}` is not a tag-conjoined feature id")))?;
        let r = self.row_of(base);
        self.rows[r][tag.id()] = w;
        Ok(())
    }

    pub fn to_sparse(&self) -> SparseVector {
        let mut v = SparseVector::new();
        for (base, row) in self.bases.iter().zip(&self.rows) {
            for (tag, w) in Tag::all().zip(row) {
                if *w != 0.0 {
                    v.set(conjoin(base, tag), *w);
                }
            }
        }
        v
    }

    pub fn from_sparse(weights: &SparseVector) -> Result<RecognizerModel> {
        let mut m = RecognizerModel::zero();
        for (id, w) in weights.iter() {
            m.set_weight(id, w)?;
        }
        Ok(m)
    }

    /// Total word score `Σ_j θ·f(z_j, w_j)`.
    pub fn score(&self, tweet: &Tweet, z: &[Tag]) -> Result<f64> {
        if z.len() != tweet.len() {
            return Err(Error::LengthMismatch {
                expected: tweet.len(),
                got: z.len(),
            });
        }
        Ok(sequence_score(&self.token_scores(tweet), z))
    }

    pub fn component(&self) -> &str {
        self.metadata
            .get("component")
            .and_then(Value::as_str)
            .unwrap_or("multit")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let weights = self.to_sparse();
        save_model(
            path,
            self.component(),
            &self.metadata,
            weights.iter().map(|(k, v)| (k.to_string(), v)),
        )
    }

    pub fn load(path: impl AsRef<Path>) -> Result<RecognizerModel> {
        let parsed = load_model(path, &["multit", "midat"])?;
        let mut m = RecognizerModel::zero();
        for (id, w) in &parsed.weights {
            m.set_weight(id, *w)?;
        }
        m.metadata = parsed.metadata;
        if let Value::Object(map) = &mut m.metadata {
            map.entry("component").or_insert_with(|| Value::String(parsed.component.clone()));
        }
        Ok(m)
    }
}

pub fn sequence_score(scores: &[[f64; NUM_TAGS]], z: &[Tag]) -> f64 {
    scores.iter().zip(z).map(|(s, t)| s[t.id()]).sum()
}

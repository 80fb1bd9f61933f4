//! End-to-end run over one annotated corpus: split by week, extract events
//! and label bags on the training weeks, train the recognizer and the
//! normalizer, pick the threshold on the dev weeks, resolve the test weeks.

use serde::Serialize;

use crate::corpus::{default_epoch, split_corpus, SplitAssignment, Tweet};
use crate::distant_labels::{label_positives, sample_negatives, Bag};
use crate::error::{Error, Result};
use crate::evaluate::{best_threshold, default_thresholds, gold_dates, sweep, SweepRow};
use crate::events::{extract_events, EventRecord};
use crate::features::FeatureGroups;
use crate::midat::{default_grid, grid_search, GridPoint};
use crate::multit::{infer_free, train, RecognizerModel, TagSequence, TrainConfig};
use crate::normalizer::{train_normalizer, NormalizerConfig, NormalizerModel, Resolution, ScoredTweet};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum RecognizerKind {
    MultiT,
    /// Grid of `(alpha_p, alpha_r)` pairs; a single pair means no search.
    MiDaT(Vec<(f64, f64)>),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PipelineConfig {
    pub top_k: usize,
    pub min_count: u64,
    pub window_days: u32,
    /// Negatives sampled per positive bag.
    pub neg_ratio: f64,
    pub seed: u64,
    pub recognizer: RecognizerKind,
    pub train: TrainConfig,
    pub normalizer: NormalizerConfig,
    #[serde(skip)]
    pub groups: FeatureGroups,
    #[serde(skip)]
    pub splits: SplitAssignment,
    /// Score the tweets' external dates as extra candidates.
    pub use_external: bool,
    /// Replace the normalizer threshold with the best one on dev.
    pub tune_threshold: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            top_k: 10000,
            min_count: 3,
            window_days: 7,
            neg_ratio: 1.0,
            seed: 0,
            recognizer: RecognizerKind::MiDaT(default_grid()),
            train: TrainConfig::default(),
            normalizer: NormalizerConfig::default(),
            groups: FeatureGroups::all(),
            splits: SplitAssignment::default(),
            use_external: false,
            tune_threshold: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PipelineRun {
    pub events: Vec<EventRecord>,
    pub train_bags: usize,
    pub dev_bags: usize,
    pub recognizer: RecognizerModel,
    pub grid: Vec<GridPoint>,
    pub normalizer: NormalizerModel,
    pub dev_sweep: Vec<SweepRow>,
    pub test: Vec<Tweet>,
    pub test_tags: Vec<(String, TagSequence)>,
    pub test_scored: Vec<(String, ScoredTweet)>,
    pub test_resolutions: Vec<(String, Resolution)>,
}

/// Positive bags plus `neg_ratio` negatives per positive.
pub fn label_bags(corpus: &[Tweet], events: &[EventRecord], window_days: u32, neg_ratio: f64, seed: u64) -> Vec<Bag> {
    let mut bags = label_positives(corpus, events, window_days);
    let count = (neg_ratio * bags.len() as f64).round() as usize;
    bags.extend(sample_negatives(corpus, events, count, seed));
    bags
}

pub fn train_recognizer(kind: &RecognizerKind, train_bags: &[Bag], dev_bags: &[Bag], cfg: &TrainConfig) -> Result<(RecognizerModel, Vec<GridPoint>)> {
    match kind {
        RecognizerKind::MultiT => Ok((train(train_bags, cfg)?.0, Vec::new())),
        RecognizerKind::MiDaT(grid) => {
            let dev = if dev_bags.is_empty() { train_bags } else { dev_bags };
            let (_, model, points) = grid_search(train_bags, dev, grid, cfg)?;
            Ok((model, points))
        }
    }
}

pub fn tag_corpus(model: &RecognizerModel, corpus: &[Tweet]) -> Vec<(String, TagSequence)> {
    corpus.iter().map(|t| (t.id.clone(), infer_free(model, t))).collect()
}

/// Normalizer scores for every tweet, using `tags` from the recognizer.
pub fn score_corpus(
    normalizer: &NormalizerModel,
    corpus: &[Tweet],
    tags: &[(String, TagSequence)],
    use_external: bool,
) -> Result<Vec<(String, ScoredTweet)>> {
    if corpus.len() != tags.len() {
        return Err(Error::LengthMismatch { expected: corpus.len(), got: tags.len() });
    }
    corpus
        .iter()
        .zip(tags)
        .map(|(t, (id, z))| {
            if *id != t.id {
                return Err(Error::UnknownId(id.clone()));
            }
            let external: &[_] = if use_external { &t.external_dates } else { &[] };
            Ok((id.clone(), normalizer.score(t, z, external)))
        })
        .collect()
}

fn without_externals(bags: &[Bag]) -> Vec<Bag> {
    bags.iter()
        .cloned()
        .map(|mut b| {
            b.tweet.external_dates.clear();
            b
        })
        .collect()
}

pub fn run(corpus: &[Tweet], cfg: &PipelineConfig) -> Result<PipelineRun> {
    cfg.splits.validate()?;
    let epoch = default_epoch(corpus).ok_or_else(|| Error::Config("empty corpus".into()))?;
    let splits = split_corpus(corpus, &cfg.splits, epoch);
    let events = extract_events(&splits.train, cfg.top_k, cfg.min_count);
    let train_bags = label_bags(&splits.train, &events, cfg.window_days, cfg.neg_ratio, cfg.seed);
    let dev_bags = label_bags(&splits.dev, &events, cfg.window_days, cfg.neg_ratio, cfg.seed);
    let (recognizer, grid) = train_recognizer(&cfg.recognizer, &train_bags, &dev_bags, &cfg.train)?;

    let norm_bags = if cfg.use_external { train_bags.clone() } else { without_externals(&train_bags) };
    let mut normalizer = train_normalizer(&norm_bags, &recognizer, &cfg.groups, &cfg.normalizer)?;

    let mut dev_sweep = Vec::new();
    if cfg.tune_threshold && !splits.dev.is_empty() && splits.dev.iter().all(|t| t.gold_dates.is_some()) {
        let dev_tags = tag_corpus(&recognizer, &splits.dev);
        let scored = score_corpus(&normalizer, &splits.dev, &dev_tags, cfg.use_external)?;
        dev_sweep = sweep(&gold_dates(&splits.dev), &scored, &default_thresholds())?;
        if let Some(t) = best_threshold(&dev_sweep) {
            normalizer.threshold = t;
        }
    }

    let test_tags = tag_corpus(&recognizer, &splits.test);
    let test_scored = score_corpus(&normalizer, &splits.test, &test_tags, cfg.use_external)?;
    let test_resolutions = test_scored.iter().map(|(id, s)| (id.clone(), s.decode(normalizer.threshold))).collect();
    Ok(PipelineRun {
        events,
        train_bags: train_bags.len(),
        dev_bags: dev_bags.len(),
        recognizer,
        grid,
        normalizer,
        dev_sweep,
        test: splits.test,
        test_tags,
        test_scored,
        test_resolutions,
    })
}

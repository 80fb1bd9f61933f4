//! Missing-data variant of the word tagger. The hard deterministic-OR
//! constraints are replaced by soft potentials between the set `m` of tags
//! the words mention and the database-derived label `t′`: `α_r` for every
//! tag on which the two agree, `α_p` for every tag on which they disagree.
//! Inference is hill climbing from the free assignment.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::corpus::Tweet;
use crate::distant_labels::Bag;
use crate::error::{Error, Result};
use crate::evaluate::{sentence_tag_prf, PRF};
use crate::multit::{cover_assignment, free_assignment, infer_free, sequence_score, train_with, RecognizerModel, TagSequence, TrainConfig, TrainStats};
use crate::tagset::{SentenceLabel, Tag, NUM_TAGS};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MiDaTConfig {
    /// Penalty for disagreement, at most 0.
    pub alpha_p: f64,
    /// Reward for agreement, at least 0.
    pub alpha_r: f64,
    /// Local-search move cap; `None` means four moves per token.
    pub max_moves: Option<usize>,
}

impl Default for MiDaTConfig {
    fn default() -> Self {
        MiDaTConfig {
            alpha_p: -25.0,
            alpha_r: 500.0,
            max_moves: None,
        }
    }
}

impl MiDaTConfig {
    pub fn new(alpha_p: f64, alpha_r: f64) -> MiDaTConfig {
        MiDaTConfig {
            alpha_p,
            alpha_r,
            max_moves: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_p <= 0.0 && self.alpha_r >= 0.0 && self.alpha_p.is_finite() && self.alpha_r.is_finite()) {
            return Err(Error::Config(format!(
                "need alpha_p <= 0 <= alpha_r, got alpha_p={} alpha_r={}",
                self.alpha_p, self.alpha_r
            )));
        }
        if self.max_moves == Some(0) {
            return Err(Error::Config("max_moves must be positive".into()));
        }
        Ok(())
    }

    fn move_cap(&self, n: usize) -> usize {
        self.max_moves.unwrap_or(4 * n)
    }
}

fn label_mask(tprime: &SentenceLabel) -> [bool; NUM_TAGS] {
    let mut mask = [false; NUM_TAGS];
    for t in tprime.iter() {
        mask[t.id()] = true;
    }
    mask
}

/// `Σ ψ(tag ∈ m, tag ∈ t′)` over the 53 non-NA tags.
fn psi_total(cfg: &MiDaTConfig, count: &[usize; NUM_TAGS], mask: &[bool; NUM_TAGS]) -> f64 {
    (1..NUM_TAGS)
        .map(|i| if (count[i] > 0) == mask[i] { cfg.alpha_r } else { cfg.alpha_p })
        .sum()
}

fn counts(z: &[Tag]) -> [usize; NUM_TAGS] {
    let mut c = [0usize; NUM_TAGS];
    for t in z {
        c[t.id()] += 1;
    }
    c
}

/// Joint score from precomputed word scores.
pub fn joint_score_of(scores: &[[f64; NUM_TAGS]], cfg: &MiDaTConfig, z: &[Tag], tprime: &SentenceLabel) -> f64 {
    sequence_score(scores, z) + psi_total(cfg, &counts(z), &label_mask(tprime))
}

/// Word score plus the agreement potentials between `m` (read off `z`) and
/// `tprime`.
pub fn joint_score(model: &RecognizerModel, cfg: &MiDaTConfig, tweet: &Tweet, z: &[Tag], tprime: &SentenceLabel) -> Result<f64> {
    if z.len() != tweet.len() {
        return Err(Error::LengthMismatch {
            expected: tweet.len(),
            got: z.len(),
        });
    }
    Ok(joint_score_of(&model.token_scores(tweet), cfg, z, tprime))
}

/// Local search within `universe` (which must contain `NA`), starting from
/// the free assignment. Each step takes the single-token change with the
/// largest strictly positive gain; ties go to the lower token index, then
/// the lower tag id. At a local optimum of those moves, the tokens are
/// re-solved as a clamped cover of `m` and of sets one edit away from it.
pub fn constrained_assignment(
    scores: &[[f64; NUM_TAGS]],
    cfg: &MiDaTConfig,
    tprime: &SentenceLabel,
    universe: &[Tag],
) -> TagSequence {
    assert!(universe.contains(&Tag::NA), "tag universe must contain NA");
    let mut z = free_assignment(scores, universe);
    let mask = label_mask(tprime);
    let mut count = counts(&z);
    let swing = cfg.alpha_r - cfg.alpha_p;
    // ψ change when a tag enters (+) or leaves (-) the mentioned set.
    let enter = |t: Tag| if mask[t.id()] { swing } else { -swing };
    for _ in 0..cfg.move_cap(z.len()) {
        let mut best: Option<(f64, usize, Tag)> = None;
        for (j, s) in scores.iter().enumerate() {
            let cur = z[j];
            let leave = if !cur.is_na() && count[cur.id()] == 1 { -enter(cur) } else { 0.0 };
            for &t in universe {
                if t == cur {
                    continue;
                }
                let join = if !t.is_na() && count[t.id()] == 0 { enter(t) } else { 0.0 };
                let gain = s[t.id()] - s[cur.id()] + leave + join;
                if gain > best.map_or(0.0, |b| b.0) {
                    best = Some((gain, j, t));
                }
            }
        }
        if let Some((_, j, t)) = best {
            count[z[j].id()] -= 1;
            count[t.id()] += 1;
            z[j] = t;
            continue;
        }
        let Some(better) = toggle_mention(scores, cfg, tprime, universe, &z) else { break };
        z = better;
        count = counts(&z);
    }
    z
}

/// Best strictly improving clamped cover of `m` itself, of `m` with one tag
/// dropped or added, or of `m` with one tag swapped for a missing label tag.
fn toggle_mention(
    scores: &[[f64; NUM_TAGS]],
    cfg: &MiDaTConfig,
    tprime: &SentenceLabel,
    universe: &[Tag],
    z: &[Tag],
) -> Option<TagSequence> {
    let mut m: Vec<Tag> = z.iter().copied().filter(|t| !t.is_na()).collect();
    m.sort();
    m.dedup();
    let current = joint_score_of(scores, cfg, z, tprime);
    let missing: Vec<Tag> = tprime.iter().filter(|t| universe.contains(t) && !m.contains(t)).collect();
    // (drop, add) pairs, starting with a re-solve of `m` itself.
    let mut toggles: Vec<(Option<Tag>, Option<Tag>)> = vec![(None, None)];
    toggles.extend(m.iter().map(|&x| (Some(x), None)));
    for &y in &missing {
        toggles.extend(m.iter().map(|&x| (Some(x), Some(y))));
    }
    // A tag outside the label only pays if the tokens could gain more than
    // the potentials lose by switching to it.
    let swing = cfg.alpha_r - cfg.alpha_p;
    let worth_adding = |y: Tag| {
        tprime.contains(y)
            || scores.iter().zip(z).map(|(s, cur)| (s[y.id()] - s[cur.id()]).max(0.0)).sum::<f64>() > swing
    };
    toggles.extend(universe.iter().filter(|y| !y.is_na() && !m.contains(y) && worth_adding(**y)).map(|&y| (None, Some(y))));
    let mut best: Option<(f64, TagSequence)> = None;
    for (drop, add) in toggles {
        let mut m2: Vec<Tag> = m.iter().copied().filter(|t| Some(*t) != drop).chain(add).collect();
        m2.sort();
        let Some(z2) = cover_assignment(scores, &m2) else { continue };
        let gain = joint_score_of(scores, cfg, &z2, tprime) - current;
        if gain > best.as_ref().map_or(1e-12, |b| b.0) {
            best = Some((gain, z2));
        }
    }
    best.map(|b| b.1)
}

pub fn infer_constrained(model: &RecognizerModel, cfg: &MiDaTConfig, tweet: &Tweet, tprime: &SentenceLabel) -> TagSequence {
    let universe: Vec<Tag> = Tag::all().collect();
    constrained_assignment(&model.token_scores(tweet), cfg, tprime, &universe)
}

/// Latent training with soft-constrained inference as the positive side.
/// The potentials only steer inference; they carry no weights.
pub fn train_midat(bags: &[Bag], cfg: &MiDaTConfig, tcfg: &TrainConfig) -> Result<(RecognizerModel, TrainStats)> {
    cfg.validate()?;
    let universe: Vec<Tag> = Tag::all().collect();
    let meta = json!({
        "component": "midat",
        "alpha_p": cfg.alpha_p,
        "alpha_r": cfg.alpha_r,
        "max_moves": cfg.max_moves,
    });
    train_with(bags, tcfg, meta, |scores, bag| Ok(constrained_assignment(scores, cfg, &bag.label, &universe)))
}

/// The shipped grid: the large penalty/reward pair plus a small-scale
/// block for models whose weights stay near unit size.
pub fn default_grid() -> Vec<(f64, f64)> {
    let mut grid = vec![(-25.0, 500.0)];
    for p in [-0.05, -0.2, -1.0, -5.0] {
        for r in [0.05, 0.2, 1.0, 5.0] {
            grid.push((p, r));
        }
    }
    grid
}

/// Grid file: one `alpha_p alpha_r` pair per line (comma or whitespace
/// separated); `#` starts a comment.
pub fn parse_grid(content: &str) -> Result<Vec<(f64, f64)>> {
    let mut grid = Vec::new();
    for (i, raw) in content.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|p| !p.is_empty()).collect();
        let bad = || Error::Config(format!("grid line {}: expected `alpha_p alpha_r`, got `{raw}`", i + 1));
        if parts.len() != 2 {
            return Err(bad());
        }
        let p: f64 = parts[0].parse().map_err(|_| bad())?;
        let r: f64 = parts[1].parse().map_err(|_| bad())?;
        MiDaTConfig::new(p, r).validate()?;
        grid.push((p, r));
    }
    if grid.is_empty() {
        return Err(Error::Config("empty grid".into()));
    }
    Ok(grid)
}

pub fn load_grid(path: impl AsRef<Path>) -> Result<Vec<(f64, f64)>> {
    parse_grid(&std::fs::read_to_string(path)?)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridPoint {
    pub alpha_p: f64,
    pub alpha_r: f64,
    pub dev: PRF,
}

/// Sentence-level tag scores of free inference against bag labels.
pub fn dev_score(model: &RecognizerModel, bags: &[Bag]) -> Result<PRF> {
    let labels: Vec<SentenceLabel> = bags.iter().map(|b| b.label.clone()).collect();
    let preds: Vec<TagSequence> = bags.iter().map(|b| infer_free(model, &b.tweet)).collect();
    sentence_tag_prf(&labels, &preds)
}

/// Trains one model per grid point (in parallel) and keeps the one with the
/// best dev F1; ties go to the earlier grid point.
pub fn grid_search(
    train: &[Bag],
    dev: &[Bag],
    grid: &[(f64, f64)],
    tcfg: &TrainConfig,
) -> Result<(MiDaTConfig, RecognizerModel, Vec<GridPoint>)> {
    if grid.is_empty() {
        return Err(Error::Config("empty grid".into()));
    }
    for &(p, r) in grid {
        MiDaTConfig::new(p, r).validate()?;
    }
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(grid.len());
    let mut results: Vec<Option<Result<(RecognizerModel, PRF)>>> = (0..grid.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let chunks: Vec<Vec<usize>> = (0..workers).map(|w| (w..grid.len()).step_by(workers).collect()).collect();
        let handles: Vec<_> = chunks
            .into_iter()
            .map(|idx| {
                scope.spawn(move || {
                    idx.into_iter()
                        .map(|i| {
                            let cfg = MiDaTConfig::new(grid[i].0, grid[i].1);
                            let out = train_midat(train, &cfg, tcfg).and_then(|(m, _)| {
                                let prf = dev_score(&m, dev)?;
                                Ok((m, prf))
                            });
                            (i, out)
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, out) in h.join().expect("grid worker panicked") {
                results[i] = Some(out);
            }
        }
    });
    let mut points = Vec::with_capacity(grid.len());
    let mut best: Option<(usize, RecognizerModel)> = None;
    for (i, r) in results.into_iter().enumerate() {
        let (model, prf) = r.expect("every grid point ran")?;
        points.push(GridPoint {
            alpha_p: grid[i].0,
            alpha_r: grid[i].1,
            dev: prf,
        });
        if best.as_ref().is_none_or(|(b, _)| prf.f1 > points[*b].dev.f1) {
            best = Some((i, model));
        }
    }
    let (i, mut model) = best.expect("non-empty grid");
    if let Some(map) = model.metadata.as_object_mut() {
        map.insert("grid".into(), serde_json::to_value(&points)?);
    }
    Ok((MiDaTConfig::new(grid[i].0, grid[i].1), model, points))
}

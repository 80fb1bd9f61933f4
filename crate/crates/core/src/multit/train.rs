use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::infer::{clamped_assignment, free_assignment};
use super::{RecognizerModel, TagScores, TagSequence};
use crate::distant_labels::Bag;
use crate::error::{Error, Result};
use crate::tagset::{Tag, NUM_TAGS};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub shuffle: bool,
    pub averaging: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 10,
            learning_rate: 0.1,
            seed: 0,
            shuffle: true,
            averaging: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TrainStats {
    /// Bags visited over all epochs, infeasible ones excluded.
    pub steps: usize,
    /// Steps where the positive and free assignments differed.
    pub updates: usize,
    /// Bags skipped because their label cannot be covered.
    pub skipped: usize,
}

/// Viterbi-style latent training: for each bag, move the weights toward the
/// features of `positive(scores, bag)` and away from those of the free
/// argmax. With averaging, returns the mean of the weights after every step.
pub fn train_with<F>(bags: &[Bag], cfg: &TrainConfig, metadata: Value, positive: F) -> Result<(RecognizerModel, TrainStats)>
where
    F: Fn(&TagScores, &Bag) -> Result<TagSequence>,
{
    cfg.validate()?;
    if bags.is_empty() {
        return Err(Error::Config("no training bags".into()));
    }
    let universe: Vec<Tag> = Tag::all().collect();
    let mut model = RecognizerModel::zero();
    let rows: Vec<Vec<Vec<usize>>> = bags.iter().map(|b| model.intern(&b.tweet)).collect();
    let n_rows = model.rows.len();
    let mut sums = vec![[0.0; NUM_TAGS]; n_rows];
    let mut stats = TrainStats::default();
    let mut skipped = vec![false; bags.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..bags.len()).collect();
    let lr = cfg.learning_rate;

    for _ in 0..cfg.epochs {
        if cfg.shuffle {
            order.shuffle(&mut rng);
        }
        for &i in &order {
            if skipped[i] {
                continue;
            }
            let scores = model.scores_of_rows(&rows[i]);
            let z_pos = match positive(&scores, &bags[i]) {
                Ok(z) => z,
                Err(Error::InfeasibleBag { .. }) => {
                    skipped[i] = true;
                    stats.skipped += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let z_free = free_assignment(&scores, &universe);
            // Weight after step c is w_c; the running average uses
            // sum_c w_c = T*w_T - sum_c (c-1)*delta_c.
            let age = stats.steps as f64;
            stats.steps += 1;
            let mut changed = false;
            let weights = model.rows_mut();
            for ((token_rows, plus), minus) in rows[i].iter().zip(&z_pos).zip(&z_free) {
                if plus == minus {
                    continue;
                }
                changed = true;
                for &r in token_rows {
                    weights[r][plus.id()] += lr;
                    weights[r][minus.id()] -= lr;
                    if cfg.averaging {
                        sums[r][plus.id()] += age * lr;
                        sums[r][minus.id()] -= age * lr;
                    }
                }
            }
            stats.updates += usize::from(changed);
        }
    }

    if cfg.averaging && stats.steps > 0 {
        let t = stats.steps as f64;
        for (w, s) in model.rows_mut().iter_mut().zip(&sums) {
            for (wi, si) in w.iter_mut().zip(s) {
                *wi -= si / t;
            }
        }
    }
    let mut meta = metadata;
    if let Value::Object(map) = &mut meta {
        map.insert("train".into(), serde_json::to_value(cfg)?);
        map.insert("stats".into(), serde_json::to_value(&stats)?);
        map.insert("bags".into(), json!(bags.len()));
    }
    model.metadata = meta;
    Ok((model, stats))
}

/// MultiT training: the positive assignment is greedy clamped inference.
pub fn train(bags: &[Bag], cfg: &TrainConfig) -> Result<(RecognizerModel, TrainStats)> {
    train_with(bags, cfg, json!({"component": "multit"}), |scores, bag| {
        clamped_assignment(scores, &bag.label)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calendar::parse_date;
    use crate::corpus::Tweet;
    use crate::features::{word_feature_bases, conjoin};
    use crate::multit::infer_free;

    fn tweet(id: &str, text: &str) -> Tweet {
        Tweet::from_text(id, parse_date("2016-05-06").unwrap(), text)
    }

    #[test]
    fn fixed_point_leaves_zero_model() {
        // Negative bags under a zero model: clamped and free are both all-NA.
        let bags = vec![Bag::negative(tweet("a", "x y z")), Bag::negative(tweet("b", "y"))];
        let (m, stats) = train(&bags, &TrainConfig::default()).unwrap();
        assert!(m.to_sparse().is_empty());
        assert_eq!(stats.updates, 0);
        assert_eq!(stats.steps, 20);
    }

    #[test]
    fn single_step_by_hand() {
        // Friday 2016-05-06 as target and reference gives TL=present too, so
        // use a one-tag label directly.
        let t = tweet("a", "fri");
        let mut bag = Bag::negative(t.clone());
        bag.label = crate::tagset::SentenceLabel::new(["DOW=Fri".parse().unwrap()]).unwrap();
        let cfg = TrainConfig { epochs: 1, learning_rate: 0.5, averaging: false, ..Default::default() };
        let (m, stats) = train(&[bag], &cfg).unwrap();
        assert_eq!(stats.updates, 1);
        // Zero weights: free picks id 0, which is NA.
        let fri: Tag = "DOW=Fri".parse().unwrap();
        let mut want = crate::features::SparseVector::new();
        for b in word_feature_bases(&t.tokens[0]) {
            want.set(conjoin(&b, fri), 0.5);
            want.set(conjoin(&b, Tag::NA), -0.5);
        }
        assert_eq!(m.to_sparse(), want);
    }

    #[test]
    fn averaging_matches_explicit_mean() {
        let fri: Tag = "DOW=Fri".parse().unwrap();
        let mon: Tag = "DOW=Mon".parse().unwrap();
        let mk = |id: &str, text: &str, t: Tag| {
            let mut b = Bag::negative(tweet(id, text));
            b.label = crate::tagset::SentenceLabel::new([t]).unwrap();
            b
        };
        let bags = vec![mk("a", "fri", fri), mk("b", "mon x", mon), mk("c", "fri y", fri)];
        let base = TrainConfig { epochs: 3, shuffle: false, averaging: false, ..Default::default() };
        // Explicit mean of the weights after each step.
        let mut acc = crate::features::SparseVector::new();
        let mut steps = 0;
        for epochs in 1..=3 {
            for k in 1..=bags.len() {
                let mut prefix = bags.clone();
                prefix.truncate(k);
                let full_epochs: Vec<Bag> = bags.iter().cycle().take(bags.len() * (epochs - 1)).cloned().chain(prefix).collect();
                let cfg = TrainConfig { epochs: 1, ..base.clone() };
                let (m, _) = train(&full_epochs, &cfg).unwrap();
                acc.add_scaled(&m.to_sparse(), 1.0);
                steps += 1;
            }
        }
        let (avg, _) = train(&bags, &TrainConfig { averaging: true, ..base }).unwrap();
        let got = avg.to_sparse();
        for (k, v) in acc.iter() {
            assert!((got.get(k) - v / steps as f64).abs() < 1e-12, "{k}");
        }
        for (k, v) in got.iter() {
            assert!((acc.get(k) / steps as f64 - v).abs() < 1e-12, "{k}");
        }
    }

    #[test]
    fn separable_markers_are_learned() {
        // Every label tag has a dedicated marker word.
        let markers = [("mon", "DOW=Mon"), ("tue", "DOW=Tue"), ("nxt", "TL=future"), ("lst", "TL=past"), ("may", "MOY=May"), ("jun", "MOY=Jun")];
        let mut bags = Vec::new();
        for i in 0..60 {
            let a = markers[i % 2];
            let b = markers[2 + (i / 2) % 2];
            let c = markers[4 + (i / 4) % 2];
            let text = format!("w{} {} {} w{} {}", i % 7, a.0, b.0, i % 5, c.0);
            let mut bag = Bag::negative(tweet(&format!("p{i}"), &text));
            bag.label = crate::tagset::SentenceLabel::new([a.1, b.1, c.1].map(|s| s.parse().unwrap())).unwrap();
            bags.push(bag);
            bags.push(Bag::negative(tweet(&format!("n{i}"), &format!("w{} w{} w{}", i % 7, (i + 3) % 5, i % 3))));
        }
        let (m, _) = train(&bags, &TrainConfig::default()).unwrap();
        let (mut hit, mut total) = (0, 0);
        for bag in &bags {
            let z = infer_free(&m, &bag.tweet);
            for (tok, t) in bag.tweet.tokens.iter().zip(&z) {
                if let Some((_, want)) = markers.iter().find(|(w, _)| *w == tok.text) {
                    total += 1;
                    hit += usize::from(t.to_string() == *want);
                } else {
                    assert!(t.is_na(), "{} tagged {t}", tok.text);
                }
            }
        }
        assert!(hit as f64 >= 0.99 * total as f64, "{hit}/{total}");
    }

    #[test]
    fn training_is_deterministic() {
        let bags: Vec<Bag> = (0..20).map(|i| Bag::positive(tweet(&format!("t{i}"), "see you monday x"), parse_date("2016-05-09").unwrap())).collect();
        let cfg = TrainConfig { seed: 5, ..Default::default() };
        let (a, _) = train(&bags, &cfg).unwrap();
        let (b, _) = train(&bags, &cfg).unwrap();
        assert_eq!(a.to_sparse(), b.to_sparse());
        assert!(train(&[], &cfg).is_err());
        assert!(train(&bags, &TrainConfig { epochs: 0, ..cfg }).is_err());
    }

    #[test]
    fn infeasible_bags_are_skipped() {
        let bags = vec![Bag::positive(tweet("a", "monday"), parse_date("2016-05-09").unwrap())];
        let (_, stats) = train(&bags, &TrainConfig::default()).unwrap();
        assert_eq!(stats.skipped, 1);
        assert_eq!(stats.steps, 0);
    }
}

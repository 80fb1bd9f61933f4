//! Exact conditional log-likelihood `log P(t | w)` and its gradient for tiny
//! instances, by enumerating every tag sequence over a restricted universe.
//!
//! `P(t | w) = Σ_{z ⊨ t} exp(s(z)) / Σ_z exp(s(z))` where `z ⊨ t` means the
//! set of non-NA tags in `z` is exactly the label. The gradient is the
//! clamped minus the free expectation of `F(z) = Σ_j f(z_j, w_j)`. Training
//! never uses this; it is the reference the Viterbi updates approximate.

use super::{sequence_score, RecognizerModel};
use crate::distant_labels::Bag;
use crate::error::{Error, Result};
use crate::features::{conjoin, word_feature_bases, SparseVector};
use crate::tagset::{Tag, NUM_TAGS};

pub const MAX_EXACT_TOKENS: usize = 6;
pub const MAX_EXACT_TAGS: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub enum ExactOutcome {
    Gradient { log_likelihood: f64, gradient: SparseVector },
    /// No sequence over the universe realizes the label: `log P = -inf`.
    Infeasible,
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

fn check_size(n: usize, universe: &[Tag]) -> Result<()> {
    if n > MAX_EXACT_TOKENS || universe.len() > MAX_EXACT_TAGS || universe.is_empty() {
        return Err(Error::TooLarge(format!(
            "{n} tokens over {} tags (limit {MAX_EXACT_TOKENS} tokens, 1..={MAX_EXACT_TAGS} tags)",
            universe.len()
        )));
    }
    Ok(())
}

/// Calls `visit` with every sequence in `universe^n`.
fn enumerate(n: usize, universe: &[Tag], mut visit: impl FnMut(&[Tag])) {
    let mut idx = vec![0usize; n];
    let mut z: Vec<Tag> = vec![universe[0]; n];
    loop {
        visit(&z);
        let mut k = 0;
        loop {
            if k == n {
                return;
            }
            idx[k] += 1;
            if idx[k] < universe.len() {
                z[k] = universe[idx[k]];
                break;
            }
            idx[k] = 0;
            z[k] = universe[0];
            k += 1;
        }
    }
}

fn realizes(z: &[Tag], bag: &Bag) -> bool {
    z.iter().all(|t| t.is_na() || bag.label.contains(*t)) && bag.label.iter().all(|t| z.contains(&t))
}

fn universe_sorted(universe: &[Tag]) -> Vec<Tag> {
    let mut u = universe.to_vec();
    u.sort();
    u.dedup();
    u
}

/// `log P(label | words)` over sequences drawn from `universe`.
pub fn exact_log_likelihood(model: &RecognizerModel, bag: &Bag, universe: &[Tag]) -> Result<f64> {
    let universe = universe_sorted(universe);
    check_size(bag.tweet.len(), &universe)?;
    let scores = model.token_scores(&bag.tweet);
    let mut clamped = Vec::new();
    let mut free = Vec::new();
    enumerate(scores.len(), &universe, |z| {
        let s = sequence_score(&scores, z);
        free.push(s);
        if realizes(z, bag) {
            clamped.push(s);
        }
    });
    Ok(log_sum_exp(&clamped) - log_sum_exp(&free))
}

/// Exact gradient of [`exact_log_likelihood`] with respect to every weight
/// `base|TAG` for the bag's tokens and the universe's tags.
pub fn exact_loglik_gradient(model: &RecognizerModel, bag: &Bag, universe: &[Tag]) -> Result<ExactOutcome> {
    let universe = universe_sorted(universe);
    let n = bag.tweet.len();
    check_size(n, &universe)?;
    let scores = model.token_scores(&bag.tweet);

    let mut seqs: Vec<(Vec<Tag>, f64, bool)> = Vec::new();
    enumerate(n, &universe, |z| {
        seqs.push((z.to_vec(), sequence_score(&scores, z), realizes(z, bag)));
    });
    let all: Vec<f64> = seqs.iter().map(|s| s.1).collect();
    let clamped: Vec<f64> = seqs.iter().filter(|s| s.2).map(|s| s.1).collect();
    if clamped.is_empty() {
        return Ok(ExactOutcome::Infeasible);
    }
    let log_z = log_sum_exp(&all);
    let log_zc = log_sum_exp(&clamped);

    // Per-token tag marginals under both distributions.
    let mut free_marg = vec![[0.0; NUM_TAGS]; n];
    let mut clamp_marg = vec![[0.0; NUM_TAGS]; n];
    for (z, s, ok) in &seqs {
        let pf = (s - log_z).exp();
        let pc = if *ok { (s - log_zc).exp() } else { 0.0 };
        for (j, t) in z.iter().enumerate() {
            free_marg[j][t.id()] += pf;
            clamp_marg[j][t.id()] += pc;
        }
    }
    let mut gradient = SparseVector::new();
    for (j, token) in bag.tweet.tokens.iter().enumerate() {
        let bases = word_feature_bases(token);
        for &t in &universe {
            let delta = clamp_marg[j][t.id()] - free_marg[j][t.id()];
            for b in &bases {
                gradient.add(&conjoin(b, t), delta);
            }
        }
    }
    Ok(ExactOutcome::Gradient {
        log_likelihood: log_zc - log_z,
        gradient,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calendar::parse_date;
    use crate::corpus::Tweet;
    use crate::tagset::SentenceLabel;

    fn bag(text: &str, label: &[&str]) -> Bag {
        let mut b = Bag::negative(Tweet::from_text("t", parse_date("2016-05-06").unwrap(), text));
        b.label = SentenceLabel::new(label.iter().map(|s| s.parse().unwrap())).unwrap();
        b
    }

    fn tags(s: &[&str]) -> Vec<Tag> {
        s.iter().map(|x| x.parse().unwrap()).collect()
    }

    #[test]
    fn symmetric_tags_get_equal_gradients() {
        let b = bag("x y", &["DOW=Mon"]);
        let m = RecognizerModel::zero();
        let universe = tags(&["NA", "DOW=Tue", "DOW=Wed"]);
        let ExactOutcome::Gradient { gradient, .. } = exact_loglik_gradient(&m, &b, &tags(&["NA", "DOW=Mon", "DOW=Tue", "DOW=Wed"])).unwrap() else {
            panic!()
        };
        // Tue and Wed are both outside the label and interchangeable.
        assert!((gradient.get("BIAS|DOW=Tue") - gradient.get("BIAS|DOW=Wed")).abs() < 1e-15);
        assert!(gradient.get("BIAS|DOW=Mon") > 0.0);
        assert!(gradient.get("BIAS|DOW=Tue") < 0.0);
        // Mon missing from the universe: the label cannot be realized.
        assert_eq!(exact_loglik_gradient(&m, &b, &universe).unwrap(), ExactOutcome::Infeasible);
        assert_eq!(exact_log_likelihood(&m, &b, &universe).unwrap(), f64::NEG_INFINITY);
    }

    /// Independent log-likelihood: materialized `F(z)` dotted with `θ`.
    fn brute_loglik(theta: &SparseVector, bag: &Bag, universe: &[Tag]) -> f64 {
        let n = bag.tweet.len();
        let mut clamped = Vec::new();
        let mut free = Vec::new();
        let mut idx = vec![0usize; n];
        'outer: loop {
            let z: Vec<Tag> = idx.iter().map(|&i| universe[i]).collect();
            let mut fz = SparseVector::new();
            for (tok, t) in bag.tweet.tokens.iter().zip(&z) {
                fz.add_scaled(&crate::features::word_features(tok, *t), 1.0);
            }
            let s = fz.dot(theta);
            free.push(s);
            let set: std::collections::BTreeSet<Tag> = z.iter().copied().filter(|t| !t.is_na()).collect();
            if set == bag.label.iter().collect() {
                clamped.push(s);
            }
            for k in 0..n {
                idx[k] += 1;
                if idx[k] < universe.len() {
                    continue 'outer;
                }
                idx[k] = 0;
            }
            break;
        }
        log_sum_exp(&clamped) - log_sum_exp(&free)
    }

    #[test]
    fn gradient_matches_finite_differences() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let words = ["see", "you", "monday", "next", "may", "9th"];
        let pool = tags(&["NA", "TL=future", "DOW=Mon", "DOW=Tue", "DOM=9", "MOY=May"]);
        let mut checked = 0;
        for _ in 0..30 {
            let n = rng.random_range(2..=4);
            let text: Vec<&str> = (0..n).map(|_| words[rng.random_range(0..words.len())]).collect();
            let label: Vec<&str> = ["TL=future", "DOW=Mon", "MOY=May"][..rng.random_range(0..=2)].to_vec();
            let b = bag(&text.join(" "), &label);
            let mut theta = SparseVector::new();
            for tok in &b.tweet.tokens {
                for base in word_feature_bases(tok) {
                    for &t in &pool {
                        if rng.random_bool(0.5) {
                            theta.set(conjoin(&base, t), rng.random_range(-1.0..1.0));
                        }
                    }
                }
            }
            let m = RecognizerModel::from_sparse(&theta).unwrap();
            let ExactOutcome::Gradient { log_likelihood, gradient } = exact_loglik_gradient(&m, &b, &pool).unwrap() else {
                panic!("feasible by construction")
            };
            let ll = brute_loglik(&theta, &b, &pool);
            assert!((ll - log_likelihood).abs() <= 1e-9 * ll.abs().max(1.0));
            assert!((exact_log_likelihood(&m, &b, &pool).unwrap() - ll).abs() <= 1e-9 * ll.abs().max(1.0));
            let mut ids: Vec<String> = gradient.keys().map(str::to_string).collect();
            ids.extend(theta.keys().map(str::to_string));
            ids.sort();
            ids.dedup();
            let h = 1e-5;
            for id in rand::seq::IndexedRandom::choose_multiple(&ids[..], &mut rng, 12).cloned().collect::<Vec<_>>() {
                let mut up = theta.clone();
                up.add(&id, h);
                let mut down = theta.clone();
                down.add(&id, -h);
                let fd = (brute_loglik(&up, &b, &pool) - brute_loglik(&down, &b, &pool)) / (2.0 * h);
                let g = gradient.get(&id);
                assert!((fd - g).abs() <= 1e-4 * fd.abs().max(g.abs()) + 1e-9, "{id}: fd {fd} vs {g}");
                checked += 1;
            }
        }
        assert!(checked > 100);
    }

    #[test]
    fn too_many_label_tags_is_infeasible() {
        let b = bag("x", &["DOW=Mon", "MOY=May"]);
        let out = exact_loglik_gradient(&RecognizerModel::zero(), &b, &tags(&["NA", "DOW=Mon", "MOY=May"])).unwrap();
        assert_eq!(out, ExactOutcome::Infeasible);
    }

    #[test]
    fn refuses_large_instances() {
        let b = bag("a b c d e f g", &[]);
        assert!(matches!(exact_loglik_gradient(&RecognizerModel::zero(), &b, &[Tag::NA]), Err(Error::TooLarge(_))));
        let b = bag("a", &[]);
        let nine: Vec<Tag> = (0..9).filter_map(Tag::from_id).collect();
        assert!(exact_log_likelihood(&RecognizerModel::zero(), &b, &nine).is_err());
    }
}

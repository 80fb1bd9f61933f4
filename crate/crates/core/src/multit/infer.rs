use super::{RecognizerModel, TagSequence};
use crate::corpus::Tweet;
use crate::error::{Error, Result};
use crate::tagset::{SentenceLabel, Tag, NUM_TAGS};

/// Highest-scoring tag of `domain` (sorted by id); ties go to the lower id.
pub(crate) fn argmax(scores: &[f64; NUM_TAGS], domain: &[Tag]) -> Tag {
    let mut best = domain[0];
    for &t in &domain[1..] {
        if scores[t.id()] > scores[best.id()] {
            best = t;
        }
    }
    best
}

/// Per-token argmax over `universe`. Word factors are independent, so this
/// is the exact unconstrained maximizer.
pub fn free_assignment(scores: &[[f64; NUM_TAGS]], universe: &[Tag]) -> TagSequence {
    assert!(!universe.is_empty(), "empty tag universe");
    scores.iter().map(|s| argmax(s, universe)).collect()
}

pub fn infer_free(model: &RecognizerModel, tweet: &Tweet) -> TagSequence {
    let universe: Vec<Tag> = Tag::all().collect();
    free_assignment(&model.token_scores(tweet), &universe)
}

/// Best assignment (approximately) under the deterministic-OR constraints:
/// every label tag on at least one token, every other token `NA`.
///
/// Greedy weighted set cover: start each token at its best tag among
/// `label ∪ {NA}`, then repeatedly cover the uncovered tag whose cheapest
/// token reassignment loses the least score, skipping tokens that are the
/// only carrier of an already covered tag. Ties go to the lower tag id, then
/// the lower token index. The cover is then polished by local search.
pub fn clamped_assignment(scores: &[[f64; NUM_TAGS]], label: &SentenceLabel) -> Result<TagSequence> {
    cover_assignment(scores, label.tags()).ok_or(Error::InfeasibleBag {
        tags: label.len(),
        tokens: scores.len(),
    })
}

/// [`clamped_assignment`] for any sorted, duplicate-free set of non-NA
/// tags; `None` when there are more tags than tokens.
pub(crate) fn cover_assignment(scores: &[[f64; NUM_TAGS]], tags: &[Tag]) -> Option<TagSequence> {
    if tags.len() > scores.len() {
        return None;
    }
    let domain: Vec<Tag> = std::iter::once(Tag::NA).chain(tags.iter().copied()).collect();
    let mut z: TagSequence = scores.iter().map(|s| argmax(s, &domain)).collect();
    let mut count = [0usize; NUM_TAGS];
    for t in &z {
        count[t.id()] += 1;
    }
    loop {
        let mut best: Option<(f64, Tag, usize)> = None;
        for &u in tags.iter().filter(|u| count[u.id()] == 0) {
            for (j, s) in scores.iter().enumerate() {
                let cur = z[j];
                if !cur.is_na() && count[cur.id()] == 1 {
                    continue;
                }
                let loss = s[cur.id()] - s[u.id()];
                if best.is_none_or(|(b, _, _)| loss < b) {
                    best = Some((loss, u, j));
                }
            }
        }
        let Some((_, u, j)) = best else { break };
        count[z[j].id()] -= 1;
        z[j] = u;
        count[u.id()] += 1;
    }
    debug_assert!(tags.iter().all(|u| count[u.id()] > 0));
    improve(scores, &domain, &mut z, &mut count);
    Some(z)
}

/// Hill-climbs from a feasible cover: applies the best strictly improving
/// single-token move, swap, or tag handover until none is left. Every move
/// keeps all label tags covered.
fn improve(scores: &[[f64; NUM_TAGS]], domain: &[Tag], z: &mut [Tag], count: &mut [usize; NUM_TAGS]) {
    let n = z.len();
    loop {
        let mut best_gain = 1e-12;
        let mut best_move: Option<(usize, Tag, Option<usize>)> = None;
        for j in 0..n {
            let cur = z[j];
            if cur.is_na() || count[cur.id()] > 1 {
                for &t in domain {
                    let gain = scores[j][t.id()] - scores[j][cur.id()];
                    if gain > best_gain {
                        best_gain = gain;
                        best_move = Some((j, t, None));
                    }
                }
            }
            // Hand j's tag over to another token i, which must itself be
            // free to leave its own tag; j then takes any domain tag.
            if !cur.is_na() && count[cur.id()] == 1 {
                for i in (0..n).filter(|&i| i != j) {
                    let other = z[i];
                    if !(other.is_na() || count[other.id()] > 1) {
                        continue;
                    }
                    let handover = scores[i][cur.id()] - scores[i][other.id()];
                    for &t in domain {
                        let gain = handover + scores[j][t.id()] - scores[j][cur.id()];
                        if gain > best_gain {
                            best_gain = gain;
                            best_move = Some((j, t, Some(i)));
                        }
                    }
                }
            }
            for i in j + 1..n {
                let other = z[i];
                let gain = scores[j][other.id()] + scores[i][cur.id()] - scores[j][cur.id()] - scores[i][other.id()];
                if gain > best_gain {
                    best_gain = gain;
                    best_move = Some((j, other, Some(i)));
                }
            }
        }
        let Some((j, t, partner)) = best_move else { return };
        let old = z[j];
        if let Some(i) = partner {
            count[z[i].id()] -= 1;
            count[old.id()] += 1;
            z[i] = old;
        }
        count[old.id()] -= 1;
        count[t.id()] += 1;
        z[j] = t;
    }
}

pub fn infer_clamped(model: &RecognizerModel, tweet: &Tweet, label: &SentenceLabel) -> Result<TagSequence> {
    clamped_assignment(&model.token_scores(tweet), label)
}

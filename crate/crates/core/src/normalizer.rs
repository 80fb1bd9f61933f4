//! Date normalizer: every candidate date in a ±10-day window around the
//! creation date, plus a null candidate, is scored by an independent
//! logistic classifier over the features of [`norm_features`].

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::calendar::{add_days, days_between, format_date, parse_date};
use crate::corpus::{parse_lines, write_lines, FieldError};
use crate::distant_labels::Bag;
use crate::error::{Error, Result};
use crate::features::{external_features, norm_features, FeatureGroup, FeatureGroups, SparseVector};
use crate::model_file::{load_model, save_model};
use crate::multit::{infer_free, RecognizerModel};
use crate::tagset::Tag;

/// Candidate offsets run from `-WINDOW` to `+WINDOW` days.
pub const WINDOW: i64 = 10;
pub const NUM_CANDIDATES: usize = 2 * WINDOW as usize + 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Candidate {
    /// `None` for the null candidate.
    pub date: Option<NaiveDate>,
    pub offset: Option<i64>,
}

impl Candidate {
    pub const NULL: Candidate = Candidate { date: None, offset: None };

    pub fn is_null(&self) -> bool {
        self.date.is_none()
    }
}

/// The 21 window candidates in offset order, then null.
pub fn gen_candidates(published: NaiveDate) -> Vec<Candidate> {
    (-WINDOW..=WINDOW)
        .map(|l| Candidate {
            date: Some(add_days(published, l)),
            offset: Some(l),
        })
        .chain(std::iter::once(Candidate::NULL))
        .collect()
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Resolved dates with confidences, highest first. Empty means null.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Resolution {
    pub dates: Vec<(NaiveDate, f64)>,
}

impl Resolution {
    pub fn is_null(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn date_set(&self) -> Vec<NaiveDate> {
        let mut d: Vec<NaiveDate> = self.dates.iter().map(|x| x.0).collect();
        d.sort();
        d
    }
}

/// Probabilities of every candidate for one tweet, before thresholding.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoredTweet {
    /// Window candidates in offset order.
    pub window: Vec<(NaiveDate, f64)>,
    pub null: f64,
    /// External candidates in the order given.
    pub external: Vec<(NaiveDate, f64)>,
}

impl ScoredTweet {
    /// Candidates scoring above both `threshold` and the null candidate;
    /// a date proposed twice keeps its best confidence.
    pub fn decode(&self, threshold: f64) -> Resolution {
        let floor = threshold.max(self.null);
        let mut best: BTreeMap<NaiveDate, f64> = BTreeMap::new();
        for &(d, p) in self.window.iter().chain(&self.external) {
            if p > floor {
                let e = best.entry(d).or_insert(p);
                *e = e.max(p);
            }
        }
        let mut dates: Vec<(NaiveDate, f64)> = best.into_iter().collect();
        dates.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        Resolution { dates }
    }

    /// The highest-probability non-null candidate, if any.
    pub fn top(&self) -> Option<(NaiveDate, f64)> {
        self.window
            .iter()
            .chain(&self.external)
            .copied()
            .fold(None, |acc: Option<(NaiveDate, f64)>, c| match acc {
                Some(a) if a.1 >= c.1 => Some(a),
                _ => Some(c),
            })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NormalizerConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub l2: f64,
    pub seed: u64,
    pub threshold: f64,
}

impl Default for NormalizerConfig {
    fn default() -> Self {
        NormalizerConfig {
            epochs: 10,
            learning_rate: 0.1,
            l2: 1e-4,
            seed: 0,
            threshold: 0.5,
        }
    }
}

impl NormalizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        if !(self.l2 >= 0.0 && self.l2 * self.learning_rate < 1.0) {
            return Err(Error::Config("l2 must be in [0, 1/learning_rate)".into()));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::Config("threshold must be in [0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormalizerModel {
    pub weights: SparseVector,
    pub groups: FeatureGroups,
    pub threshold: f64,
    pub metadata: Value,
}

impl NormalizerModel {
    pub fn zero(groups: FeatureGroups) -> NormalizerModel {
        NormalizerModel {
            weights: SparseVector::new(),
            groups,
            threshold: 0.5,
            metadata: json!({}),
        }
    }

    pub fn features(&self, tweet: &crate::corpus::Tweet, extracted: &[Tag], cand: &Candidate) -> SparseVector {
        norm_features(tweet, extracted, cand.date, &self.groups)
    }

    /// `σ(θ·g)` for one candidate.
    pub fn classify(&self, tweet: &crate::corpus::Tweet, extracted: &[Tag], cand: &Candidate) -> f64 {
        sigmoid(self.features(tweet, extracted, cand).dot(&self.weights))
    }

    pub fn classify_external(&self, tweet: &crate::corpus::Tweet, extracted: &[Tag], date: NaiveDate) -> f64 {
        sigmoid(external_features(tweet, extracted, date, &self.groups).dot(&self.weights))
    }

    pub fn score(&self, tweet: &crate::corpus::Tweet, extracted: &[Tag], external: &[NaiveDate]) -> ScoredTweet {
        let mut window = Vec::with_capacity(NUM_CANDIDATES - 1);
        let mut null = 0.0;
        for c in gen_candidates(tweet.created_at) {
            let p = self.classify(tweet, extracted, &c);
            match c.date {
                Some(d) => window.push((d, p)),
                None => null = p,
            }
        }
        let external = external
            .iter()
            .map(|&d| (d, self.classify_external(tweet, extracted, d)))
            .collect();
        ScoredTweet { window, null, external }
    }

    pub fn resolve(&self, tweet: &crate::corpus::Tweet, extracted: &[Tag], external: &[NaiveDate]) -> Resolution {
        self.score(tweet, extracted, external).decode(self.threshold)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut meta = self.metadata.clone();
        if !meta.is_object() {
            meta = json!({});
        }
        let map = meta.as_object_mut().expect("object");
        map.insert("component".into(), json!("normalizer"));
        map.insert("groups".into(), json!(self.groups.names()));
        map.insert("numeric_diffs".into(), json!(self.groups.numeric_diffs));
        map.insert("threshold".into(), json!(self.threshold));
        save_model(path, "normalizer", &meta, self.weights.iter().map(|(k, v)| (k.to_string(), v)))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<NormalizerModel> {
        let parsed = load_model(path, &["normalizer"])?;
        let meta = parsed.metadata;
        let groups = match meta.get("groups").and_then(Value::as_array) {
            Some(names) => {
                let enabled = names
                    .iter()
                    .map(|n| {
                        n.as_str()
                            .ok_or_else(|| Error::ModelFormat("group names must be strings".into()))?
                            .parse::<FeatureGroup>()
                    })
                    .collect::<Result<_>>()?;
                FeatureGroups {
                    enabled,
                    numeric_diffs: meta.get("numeric_diffs").and_then(Value::as_bool).unwrap_or(false),
                }
            }
            None => FeatureGroups::all(),
        };
        let threshold = meta.get("threshold").and_then(Value::as_f64).unwrap_or(0.5);
        Ok(NormalizerModel {
            weights: parsed.weights.into_iter().collect(),
            groups,
            threshold,
            metadata: meta,
        })
    }
}

/// Sparse binary examples with interned feature ids.
struct Examples {
    ids: HashMap<String, u32>,
    names: Vec<String>,
    offsets: Vec<usize>,
    feats: Vec<(u32, f32)>,
    labels: Vec<bool>,
}

impl Examples {
    fn new() -> Examples {
        Examples {
            ids: HashMap::new(),
            names: Vec::new(),
            offsets: vec![0],
            feats: Vec::new(),
            labels: Vec::new(),
        }
    }

    fn push(&mut self, g: &SparseVector, label: bool) {
        for (name, v) in g.iter() {
            let id = match self.ids.get(name) {
                Some(&id) => id,
                None => {
                    let id = self.names.len() as u32;
                    self.ids.insert(name.to_string(), id);
                    self.names.push(name.to_string());
                    id
                }
            };
            self.feats.push((id, v as f32));
        }
        self.offsets.push(self.feats.len());
        self.labels.push(label);
    }

    fn len(&self) -> usize {
        self.labels.len()
    }

    fn row(&self, i: usize) -> &[(u32, f32)] {
        &self.feats[self.offsets[i]..self.offsets[i + 1]]
    }
}

/// One binary example per (bag, candidate): the 22 window/null candidates,
/// plus every external date the tweet carries.
fn build_examples(bags: &[Bag], recognizer: &RecognizerModel, groups: &FeatureGroups) -> Examples {
    let mut ex = Examples::new();
    for bag in bags {
        let tweet = &bag.tweet;
        let extracted = infer_free(recognizer, tweet);
        for c in gen_candidates(tweet.created_at) {
            let label = c.date == bag.target;
            ex.push(&norm_features(tweet, &extracted, c.date, groups), label);
        }
        for &d in &tweet.external_dates {
            let label = bag.target == Some(d);
            ex.push(&external_features(tweet, &extracted, d, groups), label);
        }
    }
    ex
}

/// Fits the normalizer by SGD on the L2-regularized logistic loss.
pub fn train_normalizer(
    bags: &[Bag],
    recognizer: &RecognizerModel,
    groups: &FeatureGroups,
    cfg: &NormalizerConfig,
) -> Result<NormalizerModel> {
    cfg.validate()?;
    if bags.is_empty() {
        return Err(Error::Config("no training bags".into()));
    }
    let mut model = NormalizerModel::zero(groups.clone());
    model.threshold = cfg.threshold;
    model.metadata = json!({"component": "normalizer", "train": cfg, "bags": bags.len()});
    if cfg.epochs == 0 {
        return Ok(model);
    }
    let ex = build_examples(bags, recognizer, groups);
    // Weights are kept as `scale * v` so the L2 shrink is O(1) per step.
    let mut v = vec![0.0f64; ex.names.len()];
    let mut scale = 1.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..ex.len()).collect();
    let shrink = 1.0 - cfg.learning_rate * cfg.l2;
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let row = ex.row(i);
            let margin: f64 = scale * row.iter().map(|&(f, x)| v[f as usize] * x as f64).sum::<f64>();
            let y = if ex.labels[i] { 1.0 } else { 0.0 };
            let step = cfg.learning_rate * (sigmoid(margin) - y);
            scale *= shrink;
            for &(f, x) in row {
                v[f as usize] -= step * x as f64 / scale;
            }
            if scale < 1e-9 {
                for w in v.iter_mut() {
                    *w *= scale;
                }
                scale = 1.0;
            }
        }
    }
    model.weights = ex
        .names
        .iter()
        .zip(&v)
        .map(|(n, w)| (n.clone(), w * scale))
        .filter(|(_, w)| *w != 0.0)
        .collect();
    Ok(model)
}

#[derive(Serialize, Deserialize)]
struct DateRecord {
    date: String,
    confidence: f64,
}

#[derive(Serialize, Deserialize)]
struct ResolutionRecord {
    id: String,
    dates: Vec<DateRecord>,
}

pub fn resolution_to_line(id: &str, r: &Resolution) -> String {
    let rec = ResolutionRecord {
        id: id.to_string(),
        dates: r
            .dates
            .iter()
            .map(|(d, c)| DateRecord {
                date: format_date(*d),
                confidence: *c,
            })
            .collect(),
    };
    serde_json::to_string(&rec).expect("resolution serializes")
}

pub fn write_resolutions(path: impl AsRef<Path>, rows: &[(String, Resolution)]) -> Result<()> {
    write_lines(path.as_ref(), rows.iter().map(|(id, r)| resolution_to_line(id, r)))
}

pub fn parse_resolutions(path: &Path, content: &str) -> Result<Vec<(String, Resolution)>> {
    let rows = parse_lines(path, content, |v| {
        let rec: ResolutionRecord =
            serde_json::from_value(serde_json::Value::Object(v.clone())).map_err(|e| FieldError::new("dates", e.to_string()))?;
        let mut dates = Vec::with_capacity(rec.dates.len());
        for d in rec.dates {
            let date = parse_date(&d.date).ok_or_else(|| FieldError::new("dates", format!("bad date `{}`", d.date)))?;
            if !(0.0..=1.0).contains(&d.confidence) {
                return Err(FieldError::new("dates", "confidence outside [0, 1]"));
            }
            dates.push((date, d.confidence));
        }
        Ok((rec.id, Resolution { dates }))
    })?;
    Ok(rows)
}

pub fn load_resolutions(path: impl AsRef<Path>) -> Result<Vec<(String, Resolution)>> {
    let path = path.as_ref();
    parse_resolutions(path, &std::fs::read_to_string(path)?)
}

/// Whether `date` lies in the candidate window of `published`.
pub fn in_window(published: NaiveDate, date: NaiveDate) -> bool {
    days_between(published, date).abs() <= WINDOW
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Tweet;

    fn d(s: &str) -> NaiveDate {
        parse_date(s).unwrap()
    }

    fn fig1() -> Tweet {
        Tweet::from_text("fig1", d("2016-05-06"), "Going to the Sun concert Monday")
    }

    fn tags(z: &[&str]) -> Vec<Tag> {
        z.iter().map(|s| s.parse().unwrap()).collect()
    }

    #[test]
    fn candidates_cover_the_window() {
        let c = gen_candidates(d("2016-05-06"));
        assert_eq!(c.len(), 22);
        assert_eq!(c[0].date, Some(d("2016-04-26")));
        assert_eq!(c[10].date, Some(d("2016-05-06")));
        assert_eq!(c[20].date, Some(d("2016-05-16")));
        assert!(c[21].is_null());
    }

    #[test]
    fn zero_model_is_one_half_and_null() {
        let m = NormalizerModel::zero(FeatureGroups::all());
        let t = fig1();
        let z = vec![Tag::NA; t.len()];
        for c in gen_candidates(t.created_at) {
            assert_eq!(m.classify(&t, &z, &c), 0.5);
        }
        assert!(m.resolve(&t, &z, &[]).is_null());
    }

    #[test]
    fn closed_form_logistic() {
        let mut m = NormalizerModel::zero(FeatureGroups::all());
        m.weights.set("DD=0", 5.0);
        let t = fig1();
        let z = vec![Tag::NA; t.len()];
        let c = gen_candidates(t.created_at)[10];
        assert!((m.classify(&t, &z, &c) - 1.0 / (1.0 + (-5.0f64).exp())).abs() < 1e-15);
        assert!((m.classify(&t, &z, &c) - 0.9933).abs() < 1e-4);
        m.weights.add("DD=0", 1.0);
        assert!(m.classify(&t, &z, &c) > 0.9933);
    }

    #[test]
    fn matching_weekday_resolves_next_monday() {
        let mut m = NormalizerModel::zero(FeatureGroups::all());
        m.weights.set("MATCH|DOW", 3.0);
        m.weights.set("NULLCAND", -2.0);
        let t = fig1();
        let z = tags(&["NA", "NA", "NA", "NA", "NA", "DOW=Mon"]);
        let r = m.resolve(&t, &z, &[]);
        // Mondays in the window: 04-25 is outside; 05-02, 05-09 and 05-16
        // tie on the weekday match alone.
        let mondays: Vec<NaiveDate> = r.dates.iter().map(|x| x.0).collect();
        assert_eq!(mondays, vec![d("2016-05-02"), d("2016-05-09"), d("2016-05-16")]);
        assert!((r.dates[0].1 - r.dates[2].1).abs() < 1e-15);
        m.weights.set("DD=3", 0.5);
        let r = m.resolve(&t, &z, &[]);
        assert_eq!(r.dates[0].0, d("2016-05-09"));
        assert!(r.dates[0].1 > r.dates[1].1);
    }

    #[test]
    fn external_candidate_outside_window() {
        let mut m = NormalizerModel::zero(FeatureGroups::all());
        m.weights.set("EXTERNAL", 4.0);
        m.weights.set("NULLCAND", -4.0);
        let t = fig1();
        let z = vec![Tag::NA; t.len()];
        let far = d("2016-06-05");
        let r = m.resolve(&t, &z, &[far]);
        assert_eq!(r.date_set(), vec![far]);
        // Duplicated in-window externals collapse to one date.
        let near = d("2016-05-07");
        m.weights.set("DD=1", 1.0);
        let r = m.resolve(&t, &z, &[near]);
        assert_eq!(r.dates.len(), 1);
        assert!((r.dates[0].1 - sigmoid(5.0)).abs() < 1e-12);
    }

    #[test]
    fn raising_the_threshold_shrinks_the_output() {
        let s = ScoredTweet {
            window: vec![(d("2016-05-01"), 0.9), (d("2016-05-02"), 0.7), (d("2016-05-03"), 0.55)],
            null: 0.6,
            external: vec![(d("2016-07-01"), 0.95)],
        };
        let mut prev: Option<Vec<NaiveDate>> = None;
        for k in 0..=20 {
            let got = s.decode(k as f64 / 20.0).date_set();
            assert!(!got.contains(&d("2016-05-03")), "below null");
            if let Some(p) = &prev {
                assert!(got.iter().all(|x| p.contains(x)));
            }
            prev = Some(got);
        }
        assert_eq!(s.decode(0.0).dates[0].0, d("2016-07-01"));
    }

    #[test]
    fn log_odds_are_linear_in_weights() {
        use rand::{Rng, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let t = fig1();
        let z = tags(&["NA", "NA", "NA", "NA", "NA", "DOW=Mon"]);
        let c = gen_candidates(t.created_at)[13];
        let mut m = NormalizerModel::zero(FeatureGroups::all());
        let g = m.features(&t, &z, &c);
        let ids: Vec<String> = g.keys().map(str::to_string).collect();
        for id in &ids {
            m.weights.set(id.clone(), rng.random_range(-1.0..1.0));
        }
        let logit = |p: f64| (p / (1.0 - p)).ln();
        for _ in 0..20 {
            let id = &ids[rng.random_range(0..ids.len())];
            let h = 1e-4;
            let mut up = m.clone();
            up.weights.add(id, h);
            let mut down = m.clone();
            down.weights.add(id, -h);
            let fd = (logit(up.classify(&t, &z, &c)) - logit(down.classify(&t, &z, &c))) / (2.0 * h);
            let want = g.get(id);
            assert!((fd - want).abs() <= 1e-6 * want.abs().max(1.0), "{id}: {fd} vs {want}");
        }
    }

    fn bag_for(t: &Tweet, target: Option<NaiveDate>) -> Bag {
        match target {
            Some(d) => Bag::positive(t.clone(), d),
            None => Bag::negative(t.clone()),
        }
    }

    #[test]
    fn negatives_push_null_up() {
        let bags: Vec<Bag> = (0..100)
            .map(|i| bag_for(&Tweet::from_text(format!("n{i}"), d("2016-05-06"), &format!("just w{} w{}", i % 9, i % 4)), None))
            .collect();
        let m = train_normalizer(&bags, &RecognizerModel::zero(), &FeatureGroups::all(), &NormalizerConfig::default()).unwrap();
        let t = &bags[0].tweet;
        let z = vec![Tag::NA; t.len()];
        let cands = gen_candidates(t.created_at);
        let p_null = m.classify(t, &z, &cands[21]);
        assert!(cands[..21].iter().all(|c| m.classify(t, &z, c) < p_null));
        assert!(m.resolve(t, &z, &[]).is_null());
    }

    #[test]
    fn zero_epochs_zero_model() {
        let bags = vec![bag_for(&fig1(), Some(d("2016-05-09")))];
        let cfg = NormalizerConfig { epochs: 0, ..Default::default() };
        let m = train_normalizer(&bags, &RecognizerModel::zero(), &FeatureGroups::all(), &cfg).unwrap();
        assert!(m.weights.is_empty());
        assert!(train_normalizer(&[], &RecognizerModel::zero(), &FeatureGroups::all(), &cfg).is_err());
    }

    #[test]
    fn matching_weekday_outranks_same_offset_mismatch() {
        // A recognizer that tags weekday names perfectly.
        let mut rec = RecognizerModel::zero();
        let days = ["monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday"];
        let dow: Vec<Tag> = tags(&["DOW=Mon", "DOW=Tue", "DOW=Wed", "DOW=Thu", "DOW=Fri", "DOW=Sat", "DOW=Sun"]);
        for (w, t) in days.iter().zip(&dow) {
            rec.set_weight(&format!("W={w}|{t}"), 10.0).unwrap();
        }
        let base = d("2016-05-02");
        let mut bags = Vec::new();
        for i in 0..200i64 {
            let created = add_days(base, i % 7);
            let ahead = 1 + (i * 5) % 6;
            let target = add_days(created, ahead);
            let name = days[target.format("%u").to_string().parse::<usize>().unwrap() - 1];
            bags.push(Bag::positive(Tweet::from_text(format!("p{i}"), created, &format!("see you {name}")), target));
        }
        let m = train_normalizer(&bags, &rec, &FeatureGroups::all(), &NormalizerConfig::default()).unwrap();
        // Same offset (+3) from two creation dates: one where the tweet's
        // weekday matches, one where it does not.
        let good = Tweet::from_text("g", d("2016-05-06"), "see you monday");
        let bad = Tweet::from_text("b", d("2016-05-07"), "see you monday");
        let zg = infer_free(&rec, &good);
        let zb = infer_free(&rec, &bad);
        let off3 = |t: &Tweet| gen_candidates(t.created_at)[13];
        assert!(m.classify(&good, &zg, &off3(&good)) > m.classify(&bad, &zb, &off3(&bad)));
        assert!(m.features(&good, &zg, &off3(&good)).contains("MATCH|DOW=Mon"));
        assert!(m.features(&good, &zg, &off3(&good)).contains("DD=3"));
        assert_eq!(m.resolve(&good, &zg, &[]).dates[0].0, d("2016-05-09"));
    }

    #[test]
    fn save_load_round_trip() {
        let mut m = NormalizerModel::zero(FeatureGroups::all().without(FeatureGroup::Lexical));
        m.weights.set("DD=3", 0.125);
        m.weights.set("MATCH|DOW=Mon", -2.5e-3);
        m.threshold = 0.35;
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("n.model");
        m.save(&p).unwrap();
        let back = NormalizerModel::load(&p).unwrap();
        assert_eq!(back.weights, m.weights);
        assert_eq!(back.groups, m.groups);
        assert_eq!(back.threshold, 0.35);
        let p2 = dir.path().join("n2.model");
        back.save(&p2).unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), std::fs::read(&p2).unwrap());
        assert!(RecognizerModel::load(&p).is_err());
    }

    #[test]
    fn resolution_lines_round_trip() {
        let r = Resolution {
            dates: vec![(d("2016-05-09"), 0.97), (d("2016-05-10"), 0.6)],
        };
        let rows = vec![("a".to_string(), r), ("b".to_string(), Resolution::default())];
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.jsonl");
        write_resolutions(&p, &rows).unwrap();
        assert_eq!(load_resolutions(&p).unwrap(), rows);
        assert_eq!(resolution_to_line("b", &Resolution::default()), r#"{"id":"b","dates":[]}"#);
    }
}

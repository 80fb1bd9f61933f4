//! Seeded synthetic corpus with exact token-level and date-level ground
//! truth.
//!
//! Each event is a made-up entity plus a date. Positive tweets mention the
//! entity, are posted near the event date and (unless dropped) spell out
//! the tags of the event date: a relative word or a next/last cue for the
//! timeline, the weekday, and the month and day, or only some of these.
//! Negative tweets are filler. When enough of the expression is spelled
//! canonically, the date a simple rule-based resolver would assign goes
//! into `external_dates`.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use chrono::{Datelike, NaiveDate};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};
use serde::{Deserialize, Serialize};

use crate::calendar::{add_days, days_between, parse_date};
use crate::corpus::{with_suffix, write_corpus, Token, Tweet};
use crate::error::{Error, Result};
use crate::evaluate::write_tag_file;
use crate::events::{write_events, EventRecord};
use crate::features::is_stopword;
use crate::multit::TagSequence;
use crate::normalizer::WINDOW;
use crate::tagset::{Tag, Timeline};

const FILLER_SIZE: usize = 500;
const STOPWORD_RATE: f64 = 0.35;
/// Minimum gap between two events of one entity: twice the widest offset
/// between a tweet and its event.
const ENTITY_SPACING: i64 = 50;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub n_tweets: usize,
    pub n_events: usize,
    pub seed: u64,
    /// Fraction of positive tweets that carry no time expression at all.
    pub mention_dropout: f64,
    /// Probability that a time word is replaced by a spelling variant.
    pub lexicon_noise: f64,
    pub date_range: (NaiveDate, NaiveDate),
    /// Fraction of all tweets that are filler-only negatives.
    pub negative_fraction: f64,
    /// Fraction of non-dropped positives posted 11 to 25 days from their
    /// event, so the gold date lies outside the candidate window.
    pub out_of_window_rate: f64,
    /// Number of distinct entity names shared among the events.
    pub n_entities: usize,
    /// Fraction of expressed positives that spell out only part of the
    /// date, e.g. "next monday" or "may 9th". Off by default.
    pub partial_rate: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_tweets: 20000,
            n_events: 200,
            seed: 0,
            mention_dropout: 0.0,
            lexicon_noise: 0.3,
            date_range: (parse_date("2016-01-04").unwrap(), parse_date("2016-12-25").unwrap()),
            negative_fraction: 0.3,
            out_of_window_rate: 0.0,
            n_entities: 50,
            partial_rate: 0.0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, x: f64| {
            if (0.0..=1.0).contains(&x) {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be in [0, 1], got {x}")))
            }
        };
        unit("mention_dropout", self.mention_dropout)?;
        unit("lexicon_noise", self.lexicon_noise)?;
        unit("negative_fraction", self.negative_fraction)?;
        unit("out_of_window_rate", self.out_of_window_rate)?;
        unit("partial_rate", self.partial_rate)?;
        if self.date_range.0 > self.date_range.1 {
            return Err(Error::Config("date_range start is after its end".into()));
        }
        if self.n_events == 0 && self.n_tweets > 0 && self.negative_fraction < 1.0 {
            return Err(Error::Config("positive tweets need at least one event".into()));
        }
        if self.n_entities == 0 && self.n_events > 0 {
            return Err(Error::Config("events need at least one entity".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthCorpus {
    pub corpus: Vec<Tweet>,
    pub events: Vec<EventRecord>,
    /// One gold tag per token, aligned with `corpus`.
    pub gold_tags: Vec<(String, TagSequence)>,
}

impl SynthCorpus {
    /// Writes `<prefix>.corpus.jsonl`, `<prefix>.events.tsv` and
    /// `<prefix>.tags.txt`; returns the three paths.
    pub fn write(&self, prefix: impl AsRef<Path>) -> Result<[PathBuf; 3]> {
        let prefix = prefix.as_ref();
        let paths = [
            with_suffix(prefix, ".corpus.jsonl"),
            with_suffix(prefix, ".events.tsv"),
            with_suffix(prefix, ".tags.txt"),
        ];
        write_corpus(&paths[0], &self.corpus)?;
        write_events(&paths[1], &self.events)?;
        write_tag_file(&paths[2], &self.gold_tags)?;
        Ok(paths)
    }
}

/// A relative word family: canonical form, spelling variants, day offset
/// and timeline tag.
pub struct RelativeWord {
    pub canonical: &'static str,
    pub variants: &'static [&'static str],
    pub offset: i64,
}

pub const RELATIVE_WORDS: [RelativeWord; 4] = [
    RelativeWord { canonical: "tomorrow", variants: &["2morrow", "2mrw", "tmrw", "2mrow", "tmr"], offset: 1 },
    RelativeWord { canonical: "yesterday", variants: &["yday", "yesterdy", "ystrdy", "yest"], offset: -1 },
    RelativeWord { canonical: "today", variants: &["2day", "tday", "todai"], offset: 0 },
    RelativeWord { canonical: "tonight", variants: &["2nite", "tonite", "2night"], offset: 0 },
];

const WEEKDAYS: [(&str, &[&str]); 7] = [
    ("monday", &["mon", "mondy", "munday"]),
    ("tuesday", &["tue", "tues", "tuesdy"]),
    ("wednesday", &["wed", "weds", "wensday"]),
    ("thursday", &["thu", "thurs", "thursdy"]),
    ("friday", &["fri", "fridy", "fryday"]),
    ("saturday", &["sat", "satuday", "saturdy"]),
    ("sunday", &["sun", "sundy", "sundai"]),
];

const MONTHS: [(&str, &[&str]); 12] = [
    ("january", &["jan", "janury"]),
    ("february", &["feb", "febuary"]),
    ("march", &["mar", "mrch"]),
    ("april", &["apr", "aprl"]),
    ("may", &["mayy"]),
    ("june", &["jun", "jne"]),
    ("july", &["jul", "jly"]),
    ("august", &["aug", "agust"]),
    ("september", &["sep", "sept"]),
    ("october", &["oct", "octobr"]),
    ("november", &["nov", "novembr"]),
    ("december", &["dec", "decembr"]),
];

const FUTURE_CUES: [(&str, &[&str]); 2] = [("next", &["nxt", "nex"]), ("upcoming", &["upcomin", "upcomming"])];
const PAST_CUES: [(&str, &[&str]); 1] = [("last", &["lst", "lastt"])];

fn ordinal(day: u32) -> String {
    let suffix = match (day % 10, day % 100) {
        (_, 11..=13) => "th",
        (1, _) => "st",
        (2, _) => "nd",
        (3, _) => "rd",
        _ => "th",
    };
    format!("{day}{suffix}")
}

/// Every surface form the generator can emit for a time expression.
pub fn temporal_lexicon() -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for r in &RELATIVE_WORDS {
        out.insert(r.canonical.to_string());
        out.extend(r.variants.iter().map(|v| v.to_string()));
    }
    for (c, vs) in WEEKDAYS.iter().chain(&MONTHS).chain(&FUTURE_CUES).chain(&PAST_CUES) {
        out.insert(c.to_string());
        out.insert(format!("#{c}"));
        out.extend(vs.iter().map(|v| v.to_string()));
    }
    for d in 1..=31 {
        out.insert(ordinal(d));
        out.insert(d.to_string());
        out.insert(format!("{d:02}"));
    }
    out
}

const FILLER_SYLLABLES: [&str; 24] = [
    "ba", "de", "li", "mo", "nu", "pe", "ro", "si", "ta", "ga", "fo", "hu", "ne", "pa", "le", "ri", "co", "wi", "ha",
    "bo", "me", "ti", "lo", "da",
];
const ENTITY_SYLLABLES: [&str; 18] = [
    "zor", "vex", "kal", "qui", "dra", "xen", "mor", "tav", "rix", "lun", "bex", "zan", "ort", "vel", "quo", "jax",
    "kir", "zel",
];
const FILLER_POS: [&str; 5] = ["NN", "VB", "JJ", "NN", "RB"];
const STOPWORD_LIST: [&str; 20] = [
    "the", "a", "to", "and", "is", "in", "it", "you", "of", "for", "on", "my", "this", "that", "with", "at", "be",
    "so", "we", "all",
];

/// Fixed filler vocabulary, identical for every seed.
pub fn filler_vocabulary() -> Vec<String> {
    let taken = temporal_lexicon();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_f111);
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(FILLER_SIZE);
    while out.len() < FILLER_SIZE {
        let k = rng.random_range(2..=3);
        let w: String = (0..k).map(|_| *FILLER_SYLLABLES.choose(&mut rng).unwrap()).collect();
        if !taken.contains(&w) && !is_stopword(&w) && seen.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

fn entity_names(n: usize, rng: &mut ChaCha8Rng, filler: &[String]) -> Vec<Vec<String>> {
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let words: Vec<String> = (0..rng.random_range(1..=2))
            .map(|_| {
                let w: String = (0..rng.random_range(2..=3)).map(|_| *ENTITY_SYLLABLES.choose(rng).unwrap()).collect();
                let mut c = w.chars();
                c.next().unwrap().to_uppercase().chain(c).collect()
            })
            .collect();
        let key = words.join(" ").to_lowercase();
        // Mention matching falls back to substrings, so no name may occur
        // inside another name or a filler word.
        let clash = seen.iter().any(|s| s.contains(&key) || key.contains(s.as_str()))
            || words.iter().any(|w| filler.iter().any(|f| f.contains(&w.to_lowercase())));
        if !clash {
            seen.insert(key);
            out.push(words);
        }
    }
    out
}

/// One planted surface token and its gold tag.
struct Planted {
    text: String,
    pos: &'static str,
    tag: Tag,
    canonical: bool,
}

struct Generator<'a> {
    cfg: &'a SynthConfig,
    rng: ChaCha8Rng,
    filler: Vec<String>,
    zipf: Zipf<f64>,
}

/// A planted time expression: the timeline word, the weekday and the
/// month/day tokens (any of which a partial expression leaves out), split
/// into groups that stay contiguous in the tweet.
struct Expression {
    relative: bool,
    timeline: Option<Planted>,
    weekday: Option<Planted>,
    date: Vec<Planted>,
    joined: bool,
}

impl Expression {
    fn groups(self) -> Vec<Vec<Planted>> {
        let Expression { relative, timeline, weekday, mut date, joined } = self;
        let groups = if relative {
            date.splice(0..0, weekday);
            vec![timeline.into_iter().collect(), date]
        } else {
            let mut head: Vec<Planted> = timeline.into_iter().chain(weekday).collect();
            if joined {
                head.extend(date);
                vec![head]
            } else {
                vec![head, date]
            }
        };
        groups.into_iter().filter(|g| !g.is_empty()).collect()
    }
}

impl Generator<'_> {
    fn pick_form(&mut self, canonical: &str, variants: &[&str], capitalizable: bool) -> (String, bool) {
        if !variants.is_empty() && self.rng.random_bool(self.cfg.lexicon_noise) {
            let v = *variants.choose(&mut self.rng).unwrap();
            return (v.to_string(), false);
        }
        if capitalizable && self.rng.random_bool(0.5) {
            let mut c = canonical.chars();
            return (c.next().unwrap().to_uppercase().chain(c).collect(), true);
        }
        (canonical.to_string(), true)
    }

    fn weekday(&mut self, date: NaiveDate) -> Planted {
        let (c, vs) = WEEKDAYS[date.weekday().num_days_from_monday() as usize];
        let mut vs: Vec<String> = vs.iter().map(|v| v.to_string()).collect();
        vs.push(format!("#{c}"));
        let refs: Vec<&str> = vs.iter().map(String::as_str).collect();
        let (text, canonical) = self.pick_form(c, &refs, true);
        Planted { text, pos: "NNP", tag: Tag::weekday(date.weekday()), canonical }
    }

    fn month(&mut self, date: NaiveDate) -> Planted {
        let (c, vs) = MONTHS[date.month0() as usize];
        let (text, canonical) = self.pick_form(c, vs, true);
        Planted { text, pos: "NNP", tag: Tag::month(date.month()).unwrap(), canonical }
    }

    fn day(&mut self, date: NaiveDate) -> Planted {
        let d = date.day();
        let variants = [d.to_string(), format!("{d:02}")];
        let refs: Vec<&str> = variants.iter().map(String::as_str).collect();
        let (text, canonical) = self.pick_form(&ordinal(d), &refs, false);
        Planted { text, pos: "CD", tag: Tag::day_of_month(d).unwrap(), canonical }
    }

    fn cue(&mut self, future: bool) -> Planted {
        let (c, vs) = if future { *FUTURE_CUES.choose(&mut self.rng).unwrap() } else { PAST_CUES[0] };
        let (text, canonical) = self.pick_form(c, vs, false);
        let tl = if future { Timeline::Future } else { Timeline::Past };
        Planted { text, pos: "JJ", tag: Tag::timeline(tl), canonical }
    }

    /// Tokens realizing the tags of `event` as seen on `created`: all of
    /// them, or for a partial expression either the timeline and weekday
    /// (just the word, if relative) or the month and day.
    fn expression(&mut self, event: NaiveDate, created: NaiveDate) -> Expression {
        let offset = days_between(created, event);
        let relative = offset == 0 || (offset.abs() == 1 && self.rng.random_bool(0.5));
        let partial = self.rng.random_bool(self.cfg.partial_rate);
        let short = partial && self.rng.random_bool(0.5);
        let date_only = partial && !short;
        let timeline = if date_only {
            None
        } else if relative {
            let family: Vec<&RelativeWord> = RELATIVE_WORDS.iter().filter(|r| r.offset == offset).collect();
            let r = *family.choose(&mut self.rng).unwrap();
            let (text, canonical) = self.pick_form(r.canonical, r.variants, false);
            let tag = Tag::timeline(Timeline::between(event, created));
            Some(Planted { text, pos: "NN", tag, canonical })
        } else {
            Some(self.cue(offset > 0))
        };
        let weekday = if date_only || (short && relative) { None } else { Some(self.weekday(event)) };
        let date = if short {
            Vec::new()
        } else if self.rng.random_bool(0.5) {
            vec![self.month(event), self.day(event)]
        } else {
            vec![self.day(event), self.month(event)]
        };
        let joined = self.rng.random_bool(0.5);
        Expression { relative, timeline, weekday, date, joined }
    }

    fn filler_token(&mut self) -> Token {
        if self.rng.random_bool(STOPWORD_RATE) {
            return Token::new(*STOPWORD_LIST.choose(&mut self.rng).unwrap()).with_pos("DT").with_ne("O");
        }
        let k = self.zipf.sample(&mut self.rng) as usize - 1;
        Token::new(self.filler[k].clone()).with_pos(FILLER_POS[k % FILLER_POS.len()]).with_ne("O")
    }

    /// Filler with `entity` and each group of `planted` dropped in at
    /// random positions; groups stay contiguous and never split the entity.
    fn assemble(&mut self, entity: Option<&[String]>, planted: Vec<Vec<Planted>>) -> (Vec<Token>, TagSequence) {
        let n_filler = self.rng.random_range(4..=10);
        let mut tokens: Vec<Token> = (0..n_filler).map(|_| self.filler_token()).collect();
        let mut tags = vec![Tag::NA; tokens.len()];
        if let Some(words) = entity {
            let at = self.rng.random_range(0..=tokens.len());
            for (k, w) in words.iter().enumerate() {
                tokens.insert(at + k, Token::new(w.clone()).with_pos("NNP").with_ne("ENTITY"));
                tags.insert(at + k, Tag::NA);
            }
        }
        for group in planted {
            // Slot i sits before token i; inside a run of entity or planted
            // tokens is off limits.
            let slots: Vec<usize> = (0..=tokens.len())
                .filter(|&i| {
                    i == 0 || i == tokens.len() || {
                        let inside = |k: usize| tokens[k].ne == "ENTITY" || !tags[k].is_na();
                        !(inside(i - 1) && inside(i))
                    }
                })
                .collect();
            let at = *slots.choose(&mut self.rng).unwrap();
            for (k, p) in group.into_iter().enumerate() {
                tokens.insert(at + k, Token::new(p.text).with_pos(p.pos).with_ne("O"));
                tags.insert(at + k, p.tag);
            }
        }
        (tokens, tags)
    }
}

/// The date a rule-based resolver would produce: month and day when both
/// are spelled canonically, else a relative word, else the timeline word
/// and weekday, else nothing.
fn rule_resolve(e: &Expression, event: NaiveDate, created: NaiveDate) -> Option<NaiveDate> {
    if !e.date.is_empty() && e.date.iter().all(|p| p.canonical) {
        // Same month and day in the year closest to the creation date.
        return (created.year() - 1..=created.year() + 1)
            .filter_map(|y| NaiveDate::from_ymd_opt(y, event.month(), event.day()))
            .min_by_key(|d| days_between(created, *d).abs());
    }
    let canonical = |p: &Option<Planted>| p.as_ref().is_some_and(|p| p.canonical);
    if e.relative {
        return canonical(&e.timeline).then_some(event);
    }
    if !(canonical(&e.timeline) && canonical(&e.weekday)) {
        return None;
    }
    let w = event.weekday();
    if event > created {
        (1..=7).map(|k| add_days(created, k)).find(|d| d.weekday() == w)
    } else {
        (1..=7).map(|k| add_days(created, -k)).find(|d| d.weekday() == w)
    }
}

pub fn generate(cfg: &SynthConfig) -> Result<SynthCorpus> {
    cfg.validate()?;
    let filler = filler_vocabulary();
    let mut g = Generator {
        cfg,
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        zipf: Zipf::new(FILLER_SIZE as f64, 1.0).expect("valid zipf parameters"),
        filler,
    };
    let names = entity_names(cfg.n_entities, &mut g.rng, &g.filler);
    let (start, end) = cfg.date_range;
    let span = days_between(start, end);
    // Entities host several events; events of one entity sit far enough
    // apart that no tweet falls near two of them.
    let mut event_entity = Vec::with_capacity(cfg.n_events);
    let mut events: Vec<EventRecord> = Vec::with_capacity(cfg.n_events);
    for _ in 0..cfg.n_events {
        let date = add_days(start, g.rng.random_range(0..=span));
        let free: Vec<usize> = (0..cfg.n_entities)
            .filter(|&k| {
                events.iter().zip(&event_entity).all(|(ev, &owner)| owner != k || days_between(ev.date, date).abs() >= ENTITY_SPACING)
            })
            .collect();
        let k = match free.choose(&mut g.rng) {
            Some(&k) => k,
            None => g.rng.random_range(0..cfg.n_entities),
        };
        event_entity.push(k);
        events.push(EventRecord { entity: names[k].join(" ").to_lowercase(), date, score: 0.0 });
    }

    let width = cfg.n_tweets.max(1).to_string().len();
    let mut corpus = Vec::with_capacity(cfg.n_tweets);
    let mut gold_tags = Vec::with_capacity(cfg.n_tweets);
    for i in 0..cfg.n_tweets {
        let id = format!("s{i:0width$}");
        if g.rng.random_bool(cfg.negative_fraction) {
            let created = add_days(start, g.rng.random_range(0..=span));
            let (tokens, tags) = g.assemble(None, Vec::new());
            let mut t = Tweet::new(id.clone(), created, tokens);
            t.gold_dates = Some(Vec::new());
            corpus.push(t);
            gold_tags.push((id, tags));
            continue;
        }
        let e = g.rng.random_range(0..cfg.n_events);
        let event = events[e].date;
        let dropped = g.rng.random_bool(cfg.mention_dropout);
        let far = !dropped && g.rng.random_bool(cfg.out_of_window_rate);
        let offset = if far {
            let k = g.rng.random_range(WINDOW + 1..=25);
            if g.rng.random_bool(0.5) { k } else { -k }
        } else {
            g.rng.random_range(-7..=7)
        };
        let created = add_days(event, -offset);
        let (planted, external) = if dropped {
            (Vec::new(), None)
        } else {
            let e = g.expression(event, created);
            let external = rule_resolve(&e, event, created);
            (e.groups(), external)
        };
        let (tokens, tags) = g.assemble(Some(&names[event_entity[e]]), planted);
        let mut t = Tweet::new(id.clone(), created, tokens);
        t.external_dates = external.into_iter().collect();
        t.gold_dates = Some(vec![event]);
        corpus.push(t);
        gold_tags.push((id, tags));
    }
    Ok(SynthCorpus { corpus, events, gold_tags })
}

/// Replaces every tweet's external dates with a noisy resolver's output.
/// Only tweets whose gold tags contain a time expression get a date; it is
/// the gold date with probability `accuracy` and otherwise a wrong date up
/// to 25 days away, so it may fall outside the candidate window.
pub fn inject_externals(corpus: &mut [Tweet], gold_tags: &[(String, TagSequence)], accuracy: f64, seed: u64) -> Result<()> {
    if !(0.0..=1.0).contains(&accuracy) {
        return Err(Error::Config(format!("accuracy must be in [0, 1], got {accuracy}")));
    }
    if corpus.len() != gold_tags.len() {
        return Err(Error::LengthMismatch { expected: corpus.len(), got: gold_tags.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (tweet, (id, tags)) in corpus.iter_mut().zip(gold_tags) {
        if *id != tweet.id {
            return Err(Error::UnknownId(id.clone()));
        }
        tweet.external_dates.clear();
        let gold = tweet.gold_dates.as_ref().and_then(|g| g.first().copied());
        let Some(gold) = gold.filter(|_| tags.iter().any(|t| !t.is_na())) else { continue };
        let date = if rng.random_bool(accuracy) {
            gold
        } else {
            let k = rng.random_range(1..=25);
            add_days(gold, if rng.random_bool(0.5) { k } else { -k })
        };
        tweet.external_dates.push(date);
    }
    Ok(())
}

pub fn load_config(path: impl AsRef<Path>) -> Result<SynthConfig> {
    let path = path.as_ref();
    let content = std::fs::read_to_string(path)?;
    let cfg: SynthConfig = serde_json::from_str(&content).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        field: "config".into(),
        message: e.to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

//! Heuristic training bags from the event database.
//!
//! A tweet that mentions an event's entity and was posted within
//! `window_days` of the event date becomes a positive bag labeled with the
//! tags of the event date relative to the tweet's creation date. Tweets that
//! mention no event entity and carry no external date are sampled as
//! pseudo-negatives with an empty label.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;

use crate::calendar::{days_between, format_date, parse_date};
use crate::corpus::{check_unique_ids, get_str, parse_lines, tweet_from_object, write_lines, FieldError, Tweet, TweetRecord};
use crate::error::Result;
use crate::events::{tweet_entities, EventRecord};
use crate::tagset::{derive_tags, SentenceLabel, Tag};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Polarity {
    Positive,
    Negative,
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarity::Positive => "positive",
            Polarity::Negative => "negative",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Bag {
    pub tweet: Tweet,
    pub label: SentenceLabel,
    pub target: Option<NaiveDate>,
    pub polarity: Polarity,
}

impl Bag {
    pub fn positive(tweet: Tweet, target: NaiveDate) -> Bag {
        let label = derive_tags(target, tweet.created_at);
        Bag {
            tweet,
            label,
            target: Some(target),
            polarity: Polarity::Positive,
        }
    }

    pub fn negative(tweet: Tweet) -> Bag {
        Bag {
            tweet,
            label: SentenceLabel::empty(),
            target: None,
            polarity: Polarity::Negative,
        }
    }

    fn check(&self) -> std::result::Result<(), FieldError> {
        match (self.polarity, self.target) {
            (Polarity::Positive, Some(t)) => {
                if self.label != derive_tags(t, self.tweet.created_at) {
                    return Err(FieldError::new("label", "positive label must be the tags of target"));
                }
            }
            (Polarity::Positive, None) => return Err(FieldError::new("target", "positive bag needs a target")),
            (Polarity::Negative, Some(_)) => return Err(FieldError::new("target", "negative bag must have a null target")),
            (Polarity::Negative, None) => {
                if !self.label.is_empty() {
                    return Err(FieldError::new("label", "negative bag must have an empty label"));
                }
            }
        }
        Ok(())
    }
}

/// Lowercased mention forms of one tweet, computed once per tweet.
struct MentionIndex {
    entities: BTreeSet<String>,
    text: String,
}

impl MentionIndex {
    fn new(tweet: &Tweet) -> MentionIndex {
        MentionIndex {
            entities: tweet_entities(tweet),
            text: tweet.text().to_lowercase(),
        }
    }

    /// NE-run match first, then a plain substring match over the text.
    fn mentions(&self, entity: &str) -> bool {
        self.entities.contains(entity) || self.text.contains(entity)
    }
}

pub fn mentions_entity(tweet: &Tweet, entity: &str) -> bool {
    MentionIndex::new(tweet).mentions(&entity.to_lowercase())
}

/// One positive bag per (event, tweet) match, in (event, tweet) order.
pub fn label_positives(corpus: &[Tweet], events: &[EventRecord], window_days: u32) -> Vec<Bag> {
    let index: Vec<MentionIndex> = corpus.iter().map(MentionIndex::new).collect();
    let window = i64::from(window_days);
    let mut bags = Vec::new();
    for event in events {
        let entity = event.entity.to_lowercase();
        for (tweet, mention) in corpus.iter().zip(&index) {
            if days_between(tweet.created_at, event.date).abs() <= window && mention.mentions(&entity) {
                bags.push(Bag::positive(tweet.clone(), event.date));
            }
        }
    }
    bags
}

/// Uniform seeded sample of tweets with no event entity and no external
/// date. Returns the whole pool when `count` exceeds it. Output follows
/// corpus order.
pub fn sample_negatives(corpus: &[Tweet], events: &[EventRecord], count: usize, seed: u64) -> Vec<Bag> {
    let entities: BTreeSet<String> = events.iter().map(|e| e.entity.to_lowercase()).collect();
    let pool: Vec<&Tweet> = corpus
        .iter()
        .filter(|t| t.external_dates.is_empty())
        .filter(|t| {
            let m = MentionIndex::new(t);
            !entities.iter().any(|e| m.mentions(e))
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = index::sample(&mut rng, pool.len(), count.min(pool.len())).into_vec();
    picked.sort_unstable();
    picked.into_iter().map(|i| Bag::negative(pool[i].clone())).collect()
}

#[derive(Serialize)]
struct BagRecord<'a> {
    #[serde(flatten)]
    tweet: TweetRecord<'a>,
    label: Vec<String>,
    target: Option<String>,
    polarity: String,
}

pub fn bag_to_line(bag: &Bag) -> String {
    let record = BagRecord {
        tweet: TweetRecord::new(&bag.tweet),
        label: bag.label.iter().map(|t| t.to_string()).collect(),
        target: bag.target.map(format_date),
        polarity: bag.polarity.to_string(),
    };
    serde_json::to_string(&record).expect("bag records always serialize")
}

pub fn write_bags(path: impl AsRef<Path>, bags: &[Bag]) -> Result<()> {
    write_lines(path.as_ref(), bags.iter().map(bag_to_line))
}

fn bag_from_object(obj: &serde_json::Map<String, Value>) -> std::result::Result<Bag, FieldError> {
    let tweet = tweet_from_object(obj)?;
    let label = match obj.get("label") {
        Some(Value::Array(items)) => {
            let tags = items
                .iter()
                .map(|v| {
                    v.as_str()
                        .and_then(|s| s.parse::<Tag>().ok())
                        .ok_or_else(|| FieldError::new("label", format!("invalid tag {v}")))
                })
                .collect::<std::result::Result<Vec<_>, _>>()?;
            SentenceLabel::new(tags).map_err(|e| FieldError::new("label", e.to_string()))?
        }
        Some(_) => return Err(FieldError::new("label", "expected an array")),
        None => return Err(FieldError::new("label", "missing")),
    };
    let target = match obj.get("target") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => {
            Some(parse_date(s).ok_or_else(|| FieldError::new("target", format!("invalid date `{s}`")))?)
        }
        Some(_) => return Err(FieldError::new("target", "expected a date string or null")),
    };
    let polarity = match get_str(obj, "polarity")? {
        "positive" => Polarity::Positive,
        "negative" => Polarity::Negative,
        other => return Err(FieldError::new("polarity", format!("unknown polarity `{other}`"))),
    };
    let bag = Bag {
        tweet,
        label,
        target,
        polarity,
    };
    bag.check()?;
    Ok(bag)
}

pub fn parse_bags(path: &Path, content: &str) -> Result<Vec<Bag>> {
    parse_lines(path, content, bag_from_object)
}

pub fn load_bags(path: impl AsRef<Path>) -> Result<Vec<Bag>> {
    let path = path.as_ref();
    parse_bags(path, &fs::read_to_string(path)?)
}

/// Tweets of `bags`, deduplicated by id, in first-seen order.
pub fn bag_tweets(bags: &[Bag]) -> Vec<Tweet> {
    let mut seen = BTreeSet::new();
    let tweets: Vec<Tweet> = bags
        .iter()
        .filter(|b| seen.insert(b.tweet.id.clone()))
        .map(|b| b.tweet.clone())
        .collect();
    debug_assert!(check_unique_ids(tweets.iter().map(|t| t.id.as_str())).is_ok());
    tweets
}

//! Annotated short texts and their JSON-lines file format.
//!
//! One record per line:
//!
//! ```text
//! {"id":"t1","created_at":"2016-05-06","tokens":[{"text":"Mercury","pos":"NNP","ne":"ENTITY"}],
//!  "external_dates":["2016-05-09"],"gold_dates":["2016-05-09"]}
//! ```
//!
//! `pos`, `ne`, `external_dates` and `gold_dates` are optional. A gold list
//! holding the single string `"null"` marks a tweet annotated as mentioning
//! no date. Unknown fields are ignored on load and dropped on write.

use std::collections::{BTreeSet, HashSet};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::calendar::{days_between, format_date, monday_of, parse_date};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub pos: String,
    pub ne: String,
}

impl Token {
    pub fn new(text: impl Into<String>) -> Token {
        Token {
            text: text.into(),
            pos: String::new(),
            ne: String::new(),
        }
    }

    pub fn with_pos(mut self, pos: impl Into<String>) -> Token {
        self.pos = pos.into();
        self
    }

    pub fn with_ne(mut self, ne: impl Into<String>) -> Token {
        self.ne = ne.into();
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tweet {
    pub id: String,
    pub created_at: NaiveDate,
    pub tokens: Vec<Token>,
    /// Dates proposed by an external resolver; possibly empty.
    pub external_dates: Vec<NaiveDate>,
    /// `None`: not annotated. `Some(vec![])`: annotated as mentioning no date.
    pub gold_dates: Option<Vec<NaiveDate>>,
}

impl Tweet {
    pub fn new(id: impl Into<String>, created_at: NaiveDate, tokens: Vec<Token>) -> Tweet {
        Tweet {
            id: id.into(),
            created_at,
            tokens,
            external_dates: Vec::new(),
            gold_dates: None,
        }
    }

    /// Convenience constructor from whitespace-separated text.
    pub fn from_text(id: impl Into<String>, created_at: NaiveDate, text: &str) -> Tweet {
        Tweet::new(id, created_at, text.split_whitespace().map(Token::new).collect())
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn text(&self) -> String {
        self.tokens.iter().map(|t| t.text.as_str()).collect::<Vec<_>>().join(" ")
    }
}

#[derive(Serialize)]
pub(crate) struct TokenRecord<'a> {
    text: &'a str,
    #[serde(skip_serializing_if = "str::is_empty")]
    pos: &'a str,
    #[serde(skip_serializing_if = "str::is_empty")]
    ne: &'a str,
}

/// Serialization view of a tweet with the canonical field order.
#[derive(Serialize)]
pub(crate) struct TweetRecord<'a> {
    id: &'a str,
    created_at: String,
    tokens: Vec<TokenRecord<'a>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    external_dates: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gold_dates: Option<Vec<String>>,
}

impl<'a> TweetRecord<'a> {
    pub(crate) fn new(tweet: &'a Tweet) -> TweetRecord<'a> {
        TweetRecord {
            id: &tweet.id,
            created_at: format_date(tweet.created_at),
            tokens: tweet
                .tokens
                .iter()
                .map(|t| TokenRecord {
                    text: &t.text,
                    pos: &t.pos,
                    ne: &t.ne,
                })
                .collect(),
            external_dates: tweet.external_dates.iter().map(|d| format_date(*d)).collect(),
            gold_dates: tweet.gold_dates.as_ref().map(|g| {
                if g.is_empty() {
                    vec!["null".to_string()]
                } else {
                    g.iter().map(|d| format_date(*d)).collect()
                }
            }),
        }
    }
}

/// A field-level problem found while decoding one record.
#[derive(Debug)]
pub(crate) struct FieldError {
    pub field: String,
    pub message: String,
}

impl FieldError {
    pub(crate) fn new(field: impl Into<String>, message: impl Into<String>) -> FieldError {
        FieldError {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn at(self, path: &Path, line: usize) -> Error {
        Error::Parse {
            path: path.to_path_buf(),
            line,
            field: self.field,
            message: self.message,
        }
    }
}

type FieldResult<T> = std::result::Result<T, FieldError>;

pub(crate) fn get_str<'a>(obj: &'a Map<String, Value>, field: &str) -> FieldResult<&'a str> {
    match obj.get(field) {
        None => Err(FieldError::new(field, "missing")),
        Some(Value::String(s)) => Ok(s),
        Some(_) => Err(FieldError::new(field, "expected a string")),
    }
}

pub(crate) fn get_date(obj: &Map<String, Value>, field: &str) -> FieldResult<NaiveDate> {
    let s = get_str(obj, field)?;
    parse_date(s).ok_or_else(|| FieldError::new(field, format!("invalid date `{s}`")))
}

fn get_str_array<'a>(obj: &'a Map<String, Value>, field: &str) -> FieldResult<Option<Vec<&'a str>>> {
    match obj.get(field) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::Array(items)) => items
            .iter()
            .map(|v| {
                v.as_str()
                    .ok_or_else(|| FieldError::new(field, "expected an array of strings"))
            })
            .collect::<FieldResult<Vec<_>>>()
            .map(Some),
        Some(_) => Err(FieldError::new(field, "expected an array")),
    }
}

fn parse_dates(field: &str, items: &[&str]) -> FieldResult<Vec<NaiveDate>> {
    items
        .iter()
        .map(|s| parse_date(s).ok_or_else(|| FieldError::new(field, format!("invalid date `{s}`"))))
        .collect()
}

fn token_from_value(i: usize, v: &Value) -> FieldResult<Token> {
    let field = format!("tokens[{i}]");
    let obj = v
        .as_object()
        .ok_or_else(|| FieldError::new(&field, "expected an object"))?;
    let text = get_str(obj, "text").map_err(|e| FieldError::new(format!("{field}.{}", e.field), e.message))?;
    if text.is_empty() || text.chars().any(char::is_whitespace) {
        return Err(FieldError::new(
            format!("{field}.text"),
            format!("token text `{text}` is empty or contains whitespace"),
        ));
    }
    let opt = |name: &str| -> FieldResult<String> {
        match obj.get(name) {
            None | Some(Value::Null) => Ok(String::new()),
            Some(Value::String(s)) => Ok(s.clone()),
            Some(_) => Err(FieldError::new(format!("{field}.{name}"), "expected a string")),
        }
    };
    Ok(Token {
        text: text.to_string(),
        pos: opt("pos")?,
        ne: opt("ne")?,
    })
}

pub(crate) fn tweet_from_object(obj: &Map<String, Value>) -> FieldResult<Tweet> {
    let id = get_str(obj, "id")?.to_string();
    let created_at = get_date(obj, "created_at")?;
    let tokens = match obj.get("tokens") {
        None => return Err(FieldError::new("tokens", "missing")),
        Some(Value::Array(items)) => items
            .iter()
            .enumerate()
            .map(|(i, v)| token_from_value(i, v))
            .collect::<FieldResult<Vec<_>>>()?,
        Some(_) => return Err(FieldError::new("tokens", "expected an array")),
    };
    if tokens.is_empty() {
        return Err(FieldError::new("tokens", "a tweet needs at least one token"));
    }
    let external_dates = match get_str_array(obj, "external_dates")? {
        None => Vec::new(),
        Some(items) => parse_dates("external_dates", &items)?,
    };
    let gold_dates = match get_str_array(obj, "gold_dates")? {
        None => None,
        Some(items) if items == ["null"] || items.is_empty() => Some(Vec::new()),
        Some(items) => Some(parse_dates("gold_dates", &items)?),
    };
    Ok(Tweet {
        id,
        created_at,
        tokens,
        external_dates,
        gold_dates,
    })
}

/// Parses JSON-lines text, calling `decode` on each non-blank line's object.
pub(crate) fn parse_lines<T>(
    path: &Path,
    content: &str,
    mut decode: impl FnMut(&Map<String, Value>) -> FieldResult<T>,
) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (i, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let lineno = i + 1;
        let value: Value = serde_json::from_str(line)
            .map_err(|e| FieldError::new("<record>", format!("invalid JSON: {e}")).at(path, lineno))?;
        let obj = value
            .as_object()
            .ok_or_else(|| FieldError::new("<record>", "expected a JSON object").at(path, lineno))?;
        out.push(decode(obj).map_err(|e| e.at(path, lineno))?);
    }
    Ok(out)
}

pub(crate) fn check_unique_ids<'a>(ids: impl IntoIterator<Item = &'a str>) -> Result<()> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(Error::DuplicateId(id.to_string()));
        }
    }
    Ok(())
}

pub fn parse_corpus(path: &Path, content: &str) -> Result<Vec<Tweet>> {
    let tweets = parse_lines(path, content, tweet_from_object)?;
    check_unique_ids(tweets.iter().map(|t| t.id.as_str()))?;
    Ok(tweets)
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<Tweet>> {
    let path = path.as_ref();
    let content = fs::read_to_string(path)?;
    parse_corpus(path, &content)
}

pub fn tweet_to_line(tweet: &Tweet) -> String {
    serde_json::to_string(&TweetRecord::new(tweet)).expect("tweet records always serialize")
}

pub(crate) fn write_lines<I, S>(path: &Path, lines: I) -> Result<()>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut w = BufWriter::new(fs::File::create(path)?);
    for line in lines {
        w.write_all(line.as_ref().as_bytes())?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_corpus(path: impl AsRef<Path>, tweets: &[Tweet]) -> Result<()> {
    write_lines(path.as_ref(), tweets.iter().map(tweet_to_line))
}

/// Which mod-5 week residues go to which partition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitAssignment {
    pub train: BTreeSet<u8>,
    pub dev: BTreeSet<u8>,
    pub test: BTreeSet<u8>,
}

impl Default for SplitAssignment {
    /// Weeks 1-3 train, week 4 test, week 5 dev.
    fn default() -> Self {
        SplitAssignment {
            train: [0, 1, 2].into(),
            dev: [4].into(),
            test: [3].into(),
        }
    }
}

impl SplitAssignment {
    pub fn validate(&self) -> Result<()> {
        let all = [&self.train, &self.dev, &self.test];
        if all.iter().flat_map(|s| s.iter()).any(|r| *r > 4) {
            return Err(Error::Config("week residues must be in 0..=4".into()));
        }
        let total: usize = all.iter().map(|s| s.len()).sum();
        let union: BTreeSet<u8> = all.iter().flat_map(|s| s.iter().copied()).collect();
        if union.len() != total {
            return Err(Error::Config("split residue sets overlap".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Splits<T> {
    pub train: Vec<T>,
    pub dev: Vec<T>,
    pub test: Vec<T>,
}

/// `floor((d - epoch) / 7) mod 5`, always in `0..5`.
pub fn week_residue(d: NaiveDate, epoch: NaiveDate) -> u8 {
    days_between(epoch, d).div_euclid(7).rem_euclid(5) as u8
}

/// The Monday on or before the earliest creation date.
pub fn default_epoch(tweets: &[Tweet]) -> Option<NaiveDate> {
    tweets.iter().map(|t| t.created_at).min().map(monday_of)
}

/// Partitions anything dated by week residue; items whose residue is in no
/// set are dropped. Order within each partition follows the input.
pub fn split_by<T: Clone>(
    items: &[T],
    date_of: impl Fn(&T) -> NaiveDate,
    sa: &SplitAssignment,
    epoch: NaiveDate,
) -> Splits<T> {
    let mut out = Splits {
        train: Vec::new(),
        dev: Vec::new(),
        test: Vec::new(),
    };
    for item in items {
        let r = week_residue(date_of(item), epoch);
        if sa.train.contains(&r) {
            out.train.push(item.clone());
        } else if sa.dev.contains(&r) {
            out.dev.push(item.clone());
        } else if sa.test.contains(&r) {
            out.test.push(item.clone());
        }
    }
    out
}

pub fn split_corpus(corpus: &[Tweet], sa: &SplitAssignment, epoch: NaiveDate) -> Splits<Tweet> {
    split_by(corpus, |t| t.created_at, sa, epoch)
}

/// Path helper used by writers that emit sidecar files.
pub fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

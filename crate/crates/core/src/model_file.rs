//! Text model format shared by every trained component:
//!
//! ```text
//! temport-model v1 <component>
//! {"json":"metadata"}
//! feature-id<TAB>weight
//! ...
//! ```
//!
//! Weight lines are sorted by feature id; zero weights are omitted. Weights
//! are printed in Rust's shortest round-trip notation, so load/save is exact.

use std::fs;
use std::path::Path;

use serde_json::Value;

use crate::corpus::write_lines;
use crate::error::{Error, Result};

const MAGIC: &str = "temport-model v1";

pub fn format_model(component: &str, metadata: &Value, weights: impl IntoIterator<Item = (String, f64)>) -> Result<String> {
    let mut entries: Vec<(String, f64)> = weights.into_iter().filter(|(_, w)| *w != 0.0).collect();
    for (id, w) in &entries {
        if !w.is_finite() {
            return Err(Error::ModelFormat(format!("non-finite weight for `{id}`")));
        }
        if id.contains(['\t', '\n', '\r']) || id.is_empty() {
            return Err(Error::ModelFormat(format!("unprintable feature id {id:?}")));
        }
    }
    entries.sort_by(|a, b| a.0.cmp(&b.0));
    if entries.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::ModelFormat("duplicate feature id".into()));
    }
    let mut out = format!("{MAGIC} {component}\n{}\n", serde_json::to_string(metadata)?);
    for (id, w) in entries {
        out.push_str(&id);
        out.push('\t');
        out.push_str(&format!("{w:?}"));
        out.push('\n');
    }
    Ok(out)
}

pub fn save_model(
    path: impl AsRef<Path>,
    component: &str,
    metadata: &Value,
    weights: impl IntoIterator<Item = (String, f64)>,
) -> Result<()> {
    let text = format_model(component, metadata, weights)?;
    write_lines(path.as_ref(), std::iter::once(text.trim_end_matches('\n')))
}

pub struct ParsedModel {
    pub component: String,
    pub metadata: Value,
    pub weights: Vec<(String, f64)>,
}

pub fn parse_model(content: &str) -> Result<ParsedModel> {
    let mut lines = content.lines();
    let header = lines.next().ok_or_else(|| Error::ModelFormat("empty file".into()))?;
    let component = header
        .strip_prefix(MAGIC)
        .and_then(|rest| rest.strip_prefix(' '))
        .ok_or_else(|| Error::ModelFormat(format!("bad header `{header}`")))?
        .to_string();
    let metadata: Value = serde_json::from_str(
        lines
            .next()
            .ok_or_else(|| Error::ModelFormat("missing metadata line".into()))?,
    )?;
    let mut weights = Vec::new();
    for (i, line) in lines.enumerate() {
        let (id, w) = line
            .split_once('\t')
            .ok_or_else(|| Error::ModelFormat(format!("line {}: expected id<TAB>weight", i + 3)))?;
        let w: f64 = w
            .parse()
            .map_err(|_| Error::ModelFormat(format!("line {}: bad weight `{w}`", i + 3)))?;
        if !w.is_finite() {
            return Err(Error::ModelFormat(format!("line {}: non-finite weight", i + 3)));
        }
        weights.push((id.to_string(), w));
    }
    Ok(ParsedModel {
        component,
        metadata,
        weights,
    })
}

pub fn load_model(path: impl AsRef<Path>, expected: &[&str]) -> Result<ParsedModel> {
    let parsed = parse_model(&fs::read_to_string(path)?)?;
    if !expected.contains(&parsed.component.as_str()) {
        return Err(Error::ModelFormat(format!(
            "expected a {} model, found `{}`",
            expected.join("/"),
            parsed.component
        )));
    }
    Ok(parsed)
}

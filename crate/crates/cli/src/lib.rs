//! `temport` subcommands. Each run writes its outputs plus a
//! `<out>.manifest.json` describing how to reproduce them.

use std::collections::HashMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use temport_core::calendar::{format_date, parse_date};
use temport_core::corpus::{default_epoch, load_corpus, split_corpus, with_suffix, write_corpus, SplitAssignment};
use temport_core::distant_labels::{load_bags, write_bags};
use temport_core::evaluate::{date_report, default_thresholds, gold_dates, load_tag_file, best_threshold, sweep, tag_report, write_report, write_tag_file};
use temport_core::events::{extract_events, load_events, write_events};
use temport_core::features::FeatureGroups;
use temport_core::midat::{default_grid, load_grid, train_midat, MiDaTConfig};
use temport_core::multit::{train, TrainConfig};
use temport_core::normalizer::{load_resolutions, train_normalizer, write_resolutions, NormalizerConfig};
use temport_core::pipeline::{label_bags, score_corpus, tag_corpus, train_recognizer, RecognizerKind};
use temport_core::synth::load_config;
use temport_core::{Error, NormalizerModel, RecognizerModel};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "temport", version, about = "Distantly supervised date tagging and resolution for tweets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Partition a corpus into train/dev/test by week residue.
    Split(SplitArgs),
    /// Rank (entity, date) pairs by G² and keep the top K.
    ExtractEvents(ExtractArgs),
    /// Build positive and negative training bags.
    Label(LabelArgs),
    TrainRecognizer(TrainRecognizerArgs),
    TrainNormalizer(TrainNormalizerArgs),
    /// Tag every token of a corpus.
    Tag(TagArgs),
    /// Resolve each tweet to zero or more dates.
    Resolve(ResolveArgs),
    Eval(EvalArgs),
    /// Generate a synthetic corpus.
    Synth(SynthArgs),
    /// Date scores of a trained pipeline over a range of thresholds.
    Sweep(SweepArgs),
}

#[derive(Debug, Args, Serialize)]
struct SplitArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Week numbering anchor; defaults to the Monday on or before the
    /// earliest tweet.
    #[arg(long, value_parser = date_arg)]
    epoch: Option<NaiveDate>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0u8, 1, 2])]
    train_weeks: Vec<u8>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![4u8])]
    dev_weeks: Vec<u8>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![3u8])]
    test_weeks: Vec<u8>,
    /// Writes `<P>.train.jsonl`, `<P>.dev.jsonl`, `<P>.test.jsonl`.
    #[arg(long)]
    out_prefix: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct ExtractArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value_t = 10000)]
    top: usize,
    #[arg(long, default_value_t = 3)]
    min_count: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct LabelArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    events: PathBuf,
    #[arg(long, default_value_t = 7)]
    window: u32,
    #[arg(long, default_value_t = 1.0)]
    neg_ratio: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ModelKind {
    Multit,
    Midat,
}

#[derive(Debug, Args, Serialize)]
struct TrainRecognizerArgs {
    #[arg(long)]
    bags: PathBuf,
    #[arg(long, value_enum)]
    model: ModelKind,
    #[arg(long, allow_hyphen_values = true, requires = "alpha_r", conflicts_with = "grid")]
    alpha_p: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires = "alpha_p")]
    alpha_r: Option<f64>,
    /// Grid file of `alpha_p alpha_r` lines, or `default`.
    #[arg(long)]
    grid: Option<String>,
    /// Bags scored during grid search; the training bags when omitted.
    #[arg(long)]
    dev_bags: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    epochs: usize,
    #[arg(long, default_value_t = 0.1)]
    lr: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct TrainNormalizerArgs {
    #[arg(long)]
    bags: PathBuf,
    #[arg(long)]
    recognizer: PathBuf,
    /// Comma-separated feature groups to keep.
    #[arg(long, default_value = "temporal_tag,lexical,lexical_pos,day_diff,week_diff")]
    groups: String,
    #[arg(long, default_value_t = 10)]
    epochs: usize,
    #[arg(long, default_value_t = 0.1)]
    lr: f64,
    #[arg(long, default_value_t = 1e-4)]
    l2: f64,
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Keep the bags' external dates as extra training candidates.
    #[arg(long)]
    external: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct TagArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    recognizer: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct ResolveArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    recognizer: PathBuf,
    #[arg(long)]
    normalizer: PathBuf,
    /// Overrides the threshold stored in the normalizer.
    #[arg(long)]
    threshold: Option<f64>,
    /// Score the tweets' external dates as extra candidates.
    #[arg(long)]
    external: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum EvalMode {
    Tags,
    Dates,
}

#[derive(Debug, Args, Serialize)]
struct EvalArgs {
    /// Tag file (tags mode) or annotated corpus (dates mode).
    #[arg(long)]
    gold: PathBuf,
    /// Tag file (tags mode) or resolution file (dates mode).
    #[arg(long)]
    pred: PathBuf,
    #[arg(long, value_enum)]
    mode: EvalMode,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct SynthArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out_prefix: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct SweepArgs {
    /// Annotated corpus.
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    recognizer: PathBuf,
    #[arg(long)]
    normalizer: PathBuf,
    /// Comma-separated ascending thresholds; 0, 0.05, ..., 1 by default.
    #[arg(long, value_delimiter = ',')]
    thresholds: Option<Vec<f64>>,
    #[arg(long)]
    external: bool,
    #[arg(long)]
    out: PathBuf,
}

fn date_arg(s: &str) -> Result<NaiveDate, String> {
    parse_date(s).ok_or_else(|| format!("expected YYYY-MM-DD, got `{s}`"))
}

#[derive(Serialize)]
struct RunManifest<'a, C: Serialize> {
    command: &'a str,
    argv: Vec<String>,
    config: &'a C,
    inputs: Vec<String>,
    outputs: Vec<String>,
    seed: Option<u64>,
    wall_time_secs: f64,
    versions: Value,
    #[serde(skip_serializing_if = "Value::is_null")]
    details: Value,
}

struct Outcome {
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    seed: Option<u64>,
    details: Value,
    /// Where the manifest goes; `<first output>.manifest.json` if unset.
    manifest: Option<PathBuf>,
}

impl Outcome {
    fn new(inputs: &[&Path], outputs: &[&Path]) -> Outcome {
        Outcome {
            inputs: inputs.iter().map(|p| p.to_path_buf()).collect(),
            outputs: outputs.iter().map(|p| p.to_path_buf()).collect(),
            seed: None,
            details: Value::Null,
            manifest: None,
        }
    }

    fn seed(mut self, seed: u64) -> Outcome {
        self.seed = Some(seed);
        self
    }

    fn details(mut self, details: Value) -> Outcome {
        self.details = details;
        self
    }
}

fn paths(v: &[PathBuf]) -> Vec<String> {
    v.iter().map(|p| p.display().to_string()).collect()
}

fn write_manifest<C: Serialize>(name: &str, argv: &[String], config: &C, outcome: &Outcome, started: Instant) -> temport_core::Result<()> {
    let manifest = RunManifest {
        command: name,
        argv: argv.to_vec(),
        config,
        inputs: paths(&outcome.inputs),
        outputs: paths(&outcome.outputs),
        seed: outcome.seed,
        wall_time_secs: started.elapsed().as_secs_f64(),
        versions: json!({ "temport": env!("CARGO_PKG_VERSION"), "model_format": "temport-model v1" }),
        details: outcome.details.clone(),
    };
    let path = match &outcome.manifest {
        Some(p) => p.clone(),
        None => with_suffix(&outcome.outputs[0], ".manifest.json"),
    };
    std::fs::write(path, serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(())
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let argv: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let started = Instant::now();
    match dispatch(&cli.command, &argv, started) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("temport: {e}");
            EXIT_DATA
        }
    }
}

fn dispatch(cmd: &Command, argv: &[String], started: Instant) -> temport_core::Result<()> {
    macro_rules! go {
        ($name:expr, $args:expr, $f:expr) => {{
            let outcome = $f($args)?;
            write_manifest($name, argv, $args, &outcome, started)
        }};
    }
    match cmd {
        Command::Split(a) => go!("split", a, split),
        Command::ExtractEvents(a) => go!("extract-events", a, extract),
        Command::Label(a) => go!("label", a, label),
        Command::TrainRecognizer(a) => go!("train-recognizer", a, train_rec),
        Command::TrainNormalizer(a) => go!("train-normalizer", a, train_norm),
        Command::Tag(a) => go!("tag", a, tag),
        Command::Resolve(a) => go!("resolve", a, resolve),
        Command::Eval(a) => go!("eval", a, eval),
        Command::Synth(a) => go!("synth", a, synth),
        Command::Sweep(a) => go!("sweep", a, sweep_cmd),
    }
}

fn split(a: &SplitArgs) -> temport_core::Result<Outcome> {
    let sa = SplitAssignment {
        train: a.train_weeks.iter().copied().collect(),
        dev: a.dev_weeks.iter().copied().collect(),
        test: a.test_weeks.iter().copied().collect(),
    };
    sa.validate()?;
    let corpus = load_corpus(&a.corpus)?;
    let epoch = match a.epoch {
        Some(e) => e,
        None => default_epoch(&corpus).ok_or_else(|| Error::Config("empty corpus".into()))?,
    };
    let parts = split_corpus(&corpus, &sa, epoch);
    let outs = [
        with_suffix(&a.out_prefix, ".train.jsonl"),
        with_suffix(&a.out_prefix, ".dev.jsonl"),
        with_suffix(&a.out_prefix, ".test.jsonl"),
    ];
    write_corpus(&outs[0], &parts.train)?;
    write_corpus(&outs[1], &parts.dev)?;
    write_corpus(&outs[2], &parts.test)?;
    let mut o = Outcome::new(&[&a.corpus], &[&outs[0], &outs[1], &outs[2]]).details(json!({
        "epoch": format_date(epoch),
        "sizes": { "train": parts.train.len(), "dev": parts.dev.len(), "test": parts.test.len() },
    }));
    o.manifest = Some(with_suffix(&a.out_prefix, ".manifest.json"));
    Ok(o)
}

fn extract(a: &ExtractArgs) -> temport_core::Result<Outcome> {
    let corpus = load_corpus(&a.corpus)?;
    let events = extract_events(&corpus, a.top, a.min_count);
    write_events(&a.out, &events)?;
    Ok(Outcome::new(&[&a.corpus], &[&a.out]).details(json!({ "events": events.len() })))
}

fn label(a: &LabelArgs) -> temport_core::Result<Outcome> {
    if !(a.neg_ratio >= 0.0 && a.neg_ratio.is_finite()) {
        return Err(Error::Config("neg-ratio must be a non-negative number".into()));
    }
    let corpus = load_corpus(&a.corpus)?;
    let events = load_events(&a.events)?;
    let bags = label_bags(&corpus, &events, a.window, a.neg_ratio, a.seed);
    write_bags(&a.out, &bags)?;
    let positives = bags.iter().filter(|b| b.target.is_some()).count();
    Ok(Outcome::new(&[&a.corpus, &a.events], &[&a.out])
        .seed(a.seed)
        .details(json!({ "positives": positives, "negatives": bags.len() - positives })))
}

fn train_rec(a: &TrainRecognizerArgs) -> temport_core::Result<Outcome> {
    let tcfg = TrainConfig {
        epochs: a.epochs,
        learning_rate: a.lr,
        seed: a.seed,
        ..TrainConfig::default()
    };
    let bags = load_bags(&a.bags)?;
    let mut inputs = vec![a.bags.clone()];
    let (model, details) = match a.model {
        ModelKind::Multit => {
            if a.alpha_p.is_some() || a.grid.is_some() {
                return Err(Error::Config("--alpha-p/--alpha-r/--grid apply to midat only".into()));
            }
            let (m, stats) = train(&bags, &tcfg)?;
            (m, json!({ "stats": stats }))
        }
        ModelKind::Midat => match (a.alpha_p.zip(a.alpha_r), &a.grid) {
            (Some((p, r)), None) => {
                let (m, stats) = train_midat(&bags, &MiDaTConfig::new(p, r), &tcfg)?;
                (m, json!({ "stats": stats, "alpha_p": p, "alpha_r": r }))
            }
            (None, grid) => {
                let grid = match grid.as_deref() {
                    None | Some("default") => default_grid(),
                    Some(f) => {
                        inputs.push(PathBuf::from(f));
                        load_grid(f)?
                    }
                };
                let dev = match &a.dev_bags {
                    Some(p) => {
                        inputs.push(p.clone());
                        load_bags(p)?
                    }
                    None => Vec::new(),
                };
                let (m, points) = train_recognizer(&RecognizerKind::MiDaT(grid.clone()), &bags, &dev, &tcfg)?;
                (m, json!({ "grid": grid, "grid_scores": points }))
            }
            (Some(_), Some(_)) => unreachable!("clap rejects --alpha-p with --grid"),
        },
    };
    model.save(&a.out)?;
    let refs: Vec<&Path> = inputs.iter().map(PathBuf::as_path).collect();
    Ok(Outcome::new(&refs, &[&a.out]).seed(a.seed).details(details))
}

fn train_norm(a: &TrainNormalizerArgs) -> temport_core::Result<Outcome> {
    let groups = FeatureGroups::parse_list(&a.groups)?;
    let cfg = NormalizerConfig {
        epochs: a.epochs,
        learning_rate: a.lr,
        l2: a.l2,
        seed: a.seed,
        threshold: a.threshold,
    };
    let recognizer = RecognizerModel::load(&a.recognizer)?;
    let mut bags = load_bags(&a.bags)?;
    if !a.external {
        for b in &mut bags {
            b.tweet.external_dates.clear();
        }
    }
    let model = train_normalizer(&bags, &recognizer, &groups, &cfg)?;
    model.save(&a.out)?;
    Ok(Outcome::new(&[&a.bags, &a.recognizer], &[&a.out])
        .seed(a.seed)
        .details(json!({ "groups": groups.names(), "features": model.weights.len() })))
}

fn tag(a: &TagArgs) -> temport_core::Result<Outcome> {
    let corpus = load_corpus(&a.corpus)?;
    let model = RecognizerModel::load(&a.recognizer)?;
    write_tag_file(&a.out, &tag_corpus(&model, &corpus))?;
    Ok(Outcome::new(&[&a.corpus, &a.recognizer], &[&a.out]))
}

fn resolve(a: &ResolveArgs) -> temport_core::Result<Outcome> {
    let corpus = load_corpus(&a.corpus)?;
    let recognizer = RecognizerModel::load(&a.recognizer)?;
    let normalizer = NormalizerModel::load(&a.normalizer)?;
    let threshold = a.threshold.unwrap_or(normalizer.threshold);
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::Config("threshold must be in [0, 1]".into()));
    }
    let tags = tag_corpus(&recognizer, &corpus);
    let scored = score_corpus(&normalizer, &corpus, &tags, a.external)?;
    let rows: Vec<_> = scored.iter().map(|(id, s)| (id.clone(), s.decode(threshold))).collect();
    write_resolutions(&a.out, &rows)?;
    let resolved = rows.iter().filter(|(_, r)| !r.is_null()).count();
    Ok(Outcome::new(&[&a.corpus, &a.recognizer, &a.normalizer], &[&a.out])
        .details(json!({ "threshold": threshold, "tweets": rows.len(), "resolved": resolved })))
}

fn eval(a: &EvalArgs) -> temport_core::Result<Outcome> {
    match a.mode {
        EvalMode::Tags => {
            let gold = load_tag_file(&a.gold)?;
            let pred = load_tag_file(&a.pred)?;
            write_report(&a.out, &tag_report(&gold, &pred)?)?;
        }
        EvalMode::Dates => {
            let corpus = load_corpus(&a.gold)?;
            let pred = load_resolutions(&a.pred)?;
            write_report(&a.out, &date_report(&gold_dates(&corpus), &pred, &HashMap::new())?)?;
        }
    }
    Ok(Outcome::new(&[&a.gold, &a.pred], &[&a.out]))
}

fn synth(a: &SynthArgs) -> temport_core::Result<Outcome> {
    let cfg = load_config(&a.config)?;
    let out = temport_core::synth::generate(&cfg)?;
    let [c, e, t] = out.write(&a.out_prefix)?;
    let mut o = Outcome::new(&[&a.config], &[&c, &e, &t])
        .seed(cfg.seed)
        .details(json!({ "synth_config": cfg, "tweets": out.corpus.len(), "events": out.events.len() }));
    o.manifest = Some(with_suffix(&a.out_prefix, ".manifest.json"));
    Ok(o)
}

fn sweep_cmd(a: &SweepArgs) -> temport_core::Result<Outcome> {
    let corpus = load_corpus(&a.corpus)?;
    let recognizer = RecognizerModel::load(&a.recognizer)?;
    let normalizer = NormalizerModel::load(&a.normalizer)?;
    let thresholds = a.thresholds.clone().unwrap_or_else(default_thresholds);
    let tags = tag_corpus(&recognizer, &corpus);
    let scored = score_corpus(&normalizer, &corpus, &tags, a.external)?;
    let rows = sweep(&gold_dates(&corpus), &scored, &thresholds)?;
    let report = json!({ "mode": "sweep", "best_threshold": best_threshold(&rows), "rows": rows });
    write_report(&a.out, &report)?;
    Ok(Outcome::new(&[&a.corpus, &a.recognizer, &a.normalizer], &[&a.out]))
}

//! The `prove` command line: argument parsing, subcommands and exit codes.
//!
//! Exit codes: 0 success, 1 failure writing output, 2 reference or backend
//! unavailable (including offline refusals and bad URLs), 3 backend protocol
//! violation, 4 invalid input or usage.

use std::ffi::OsString;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::{BackendError, Scorer};
use crate::config::{CliConfig, ConfigError, ConfigLayer};
use crate::evaluation::{
    evaluate_processed, load_wtr, process_records, training_set, EvalConfig, Task, WtrError,
};
use crate::kg::{AggregatorKind, ObjectDatatype, Reference, Stance, Triple, TripleComponent};
use crate::pipeline::{verify, PipelineConfig, PipelineError, VerifyReport};
use crate::retrieval::{extract, Extraction, FetchError, Fetcher, RuleSegmenter};
use crate::verbalisation::LabelPolicy;
use crate::verification::{
    train_aggregation_model, AggregationModel, CrossValReport, FeatureVector, ForestParams,
    VerificationError, FEATURE_LEN,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Unavailable(String),
    #[error("{0}")]
    Protocol(String),
    #[error("{0}")]
    Invalid(String),
    #[error("writing output: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Output(_) => 1,
            CliError::Unavailable(_) => 2,
            CliError::Protocol(_) => 3,
            CliError::Invalid(_) => 4,
        }
    }

    fn invalid(e: impl std::fmt::Display) -> Self {
        CliError::Invalid(e.to_string())
    }

    fn output(e: impl std::fmt::Display) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<BackendError> for CliError {
    fn from(e: BackendError) -> Self {
        match e {
            BackendError::Protocol(_) => CliError::Protocol(e.to_string()),
            BackendError::Config(_) => CliError::Invalid(e.to_string()),
            _ => CliError::Unavailable(e.to_string()),
        }
    }
}

impl From<FetchError> for CliError {
    fn from(e: FetchError) -> Self {
        CliError::Unavailable(e.to_string())
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        if let Some(b) = e.backend_error() {
            return b.clone().into();
        }
        match e {
            PipelineError::Fetch(f) => f.into(),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::invalid(e)
    }
}

impl From<WtrError> for CliError {
    fn from(e: WtrError) -> Self {
        CliError::invalid(e)
    }
}

impl From<VerificationError> for CliError {
    fn from(e: VerificationError) -> Self {
        match e {
            VerificationError::Backend(b) => b.into(),
            other => CliError::invalid(other),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "prove", version, about = "Check whether a web reference supports a knowledge-graph triple")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Key-value config file; flags and environment override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Scoring backend URL, or `baseline` for the built-in heuristics.
    #[arg(long, global = true)]
    pub backend_url: Option<String>,
    #[arg(long, global = true)]
    pub timeout_ms: Option<u64>,
    #[arg(long, global = true)]
    pub max_in_flight: Option<usize>,
    /// Refuse every network access.
    #[arg(long, global = true)]
    pub offline: bool,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Sliding-window sizes, e.g. `1,2`.
    #[arg(long, global = true)]
    pub windows: Option<String>,
    #[arg(long, global = true)]
    pub evidence_k: Option<usize>,
    /// Label override file (component id TAB alias).
    #[arg(long, global = true)]
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Verify one triple against one reference.
    Verify(VerifyArgs),
    /// Evaluate the pipeline on an annotated dataset.
    Evaluate(EvaluateArgs),
    /// Train the classifier aggregator.
    Train(TrainArgs),
    /// Show the segments and passages extracted from a reference.
    Extract(ExtractArgs),
}

#[derive(Debug, Args, Clone, Default)]
#[group(required = true, multiple = false)]
pub struct SourceArgs {
    /// Reference URL (http, https or file).
    #[arg(long)]
    pub url: Option<String>,
    /// Local HTML page.
    #[arg(long)]
    pub html: Option<PathBuf>,
    /// Local plain-text document; skips HTML cleaning.
    #[arg(long)]
    pub text: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Triple as JSON.
    #[arg(long, conflicts_with_all = ["subject", "predicate", "object"])]
    pub triple: Option<PathBuf>,
    #[arg(long, requires_all = ["predicate", "object"])]
    pub subject: Option<String>,
    #[arg(long)]
    pub predicate: Option<String>,
    #[arg(long)]
    pub object: Option<String>,
    /// Object datatype for inline triples.
    #[arg(long, default_value = "entity")]
    pub datatype: String,
    #[command(flatten)]
    pub source: SourceArgs,
    /// Use this sentence instead of generating one.
    #[arg(long)]
    pub claim: Option<String>,
    /// weighted_sum, malon, classifier or all.
    #[arg(long)]
    pub aggregator: Option<String>,
    /// Trained classifier model file.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TaskArg {
    Ternary,
    Binary,
    Both,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Directory receiving report.json, tables.txt and verdicts.csv.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "both")]
    pub task: TaskArg,
    /// Score the classifier with this model instead of cross-validating.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub folds: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Annotated dataset; features come from running the pipeline.
    #[arg(long, required_unless_present = "features", conflicts_with = "features")]
    pub dataset: Option<PathBuf>,
    /// JSON lines of `{"features": [25 numbers], "label": "SUPP"}`.
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// Model file to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the cross-validation report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub trees: Option<usize>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub max_features: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Print JSON instead of a listing.
    #[arg(long)]
    pub json: bool,
}

fn flags_layer(g: &GlobalArgs) -> Result<ConfigLayer, ConfigError> {
    let mut l = ConfigLayer::default();
    let mut set = |k: &str, v: Option<String>| v.map_or(Ok(()), |v| l.set(k, &v));
    set("backend_url", g.backend_url.clone())?;
    set("timeout_ms", g.timeout_ms.map(|v| v.to_string()))?;
    set("max_in_flight", g.max_in_flight.map(|v| v.to_string()))?;
    set("seed", g.seed.map(|v| v.to_string()))?;
    set("jobs", g.jobs.map(|v| v.to_string()))?;
    set("windows", g.windows.clone())?;
    set("evidence_k", g.evidence_k.map(|v| v.to_string()))?;
    set(
        "label_overrides",
        g.labels.as_ref().map(|p| p.display().to_string()),
    )?;
    set("offline", g.offline.then(|| "true".to_owned()))?;
    Ok(l)
}

fn command_layer(c: &Command) -> Result<ConfigLayer, ConfigError> {
    let mut l = ConfigLayer::default();
    let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
    let mut set = |k: &str, v: Option<String>| v.map_or(Ok(()), |v| l.set(k, &v));
    match c {
        Command::Verify(a) => {
            set("aggregator", a.aggregator.clone())?;
            set("model", path(&a.model))?;
        }
        Command::Evaluate(a) => {
            set("model", path(&a.model))?;
            set("folds", a.folds.map(|v| v.to_string()))?;
        }
        Command::Train(a) => {
            set("folds", a.folds.map(|v| v.to_string()))?;
            set("trees", a.trees.map(|v| v.to_string()))?;
            set("max_depth", a.max_depth.map(|v| v.to_string()))?;
            set("max_features", a.max_features.map(|v| v.to_string()))?;
        }
        Command::Extract(_) => {}
    }
    Ok(l)
}

/// Resolves the configuration for a parsed command line.
pub fn resolve_config(
    cli: &Cli,
    env: &dyn Fn(&str) -> Option<String>,
) -> Result<CliConfig, CliError> {
    let file = match &cli.global.config {
        Some(p) => ConfigLayer::load(p)?,
        None => ConfigLayer::default(),
    };
    let flags = flags_layer(&cli.global)?.overlay(command_layer(&cli.command)?);
    let env = ConfigLayer::from_env(env)?;
    Ok(file.overlay(flags).overlay(env).resolve()?)
}

fn fetcher(cfg: &CliConfig) -> Fetcher {
    Fetcher::new(Duration::from_millis(cfg.timeout_ms), cfg.offline)
}

fn pipeline_config(cfg: &CliConfig) -> Result<PipelineConfig, CliError> {
    let labels = match &cfg.label_overrides {
        Some(p) => LabelPolicy::load(p).map_err(CliError::invalid)?,
        None => LabelPolicy::default(),
    };
    Ok(PipelineConfig {
        windows: cfg.windows.clone(),
        evidence_k: cfg.evidence_k,
        labels,
    })
}

fn read_input(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

fn file_url(path: &Path) -> String {
    let abs = std::fs::canonicalize(path).unwrap_or_else(|_| path.to_path_buf());
    url::Url::from_file_path(&abs)
        .map(|u| u.to_string())
        .unwrap_or_else(|_| format!("file://{}", abs.display()))
}

fn reference_from(source: &SourceArgs) -> Result<Reference, CliError> {
    if let Some(url) = &source.url {
        return Ok(Reference::url("cli", url.clone()));
    }
    if let Some(p) = &source.html {
        let url = file_url(p);
        return Ok(Reference::url("cli", url.clone()).with_fetched(url, read_input(p)?));
    }
    if let Some(p) = &source.text {
        return Ok(Reference::document("cli", read_input(p)?));
    }
    Err(CliError::Invalid("one of --url, --html or --text is required".into()))
}

fn triple_from(a: &VerifyArgs) -> Result<Triple, CliError> {
    if let Some(p) = &a.triple {
        let text = read_input(p)?;
        let de = &mut serde_json::Deserializer::from_str(&text);
        return serde_path_to_error::deserialize(de)
            .map_err(|e| CliError::Invalid(format!("{}: field `{}`: {}", p.display(), e.path(), e.inner())));
    }
    let (Some(s), Some(p), Some(o)) = (&a.subject, &a.predicate, &a.object) else {
        return Err(CliError::Invalid(
            "give --triple or all of --subject, --predicate and --object".into(),
        ));
    };
    let dt = ObjectDatatype::from_wikidata(&a.datatype)
        .or_else(|| serde_json::from_value(serde_json::Value::String(a.datatype.clone())).ok())
        .ok_or_else(|| CliError::Invalid(format!("unknown datatype `{}`", a.datatype)))?;
    Ok(Triple::new(
        "cli",
        TripleComponent::new("s", s.clone()),
        TripleComponent::new("p", p.clone()),
        TripleComponent::new("o", o.clone()),
        dt,
    ))
}

fn load_model(cfg: &CliConfig, needed: bool) -> Result<Option<AggregationModel>, CliError> {
    match &cfg.model {
        Some(p) => Ok(Some(AggregationModel::load(p).map_err(|e| {
            CliError::Invalid(format!("{}: {e}", p.display()))
        })?)),
        None if needed => Err(CliError::Invalid(
            "the classifier aggregator needs --model (or choose --aggregator weighted_sum|malon)"
                .into(),
        )),
        None => Ok(None),
    }
}

fn backend(cfg: &CliConfig) -> Result<Box<dyn Scorer>, CliError> {
    Ok(cfg.backend().build()?)
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serialisable");
    s.push('\n');
    s
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))
}

/// One-paragraph human summary of a verification report.
pub fn summarise(r: &VerifyReport) -> String {
    let mut s = format!(
        "claim: {}\npassages: {} from {} segments{}\n",
        r.claim,
        r.passages,
        r.segments,
        if r.all_likely_irrelevant && r.passages > 0 {
            " (all likely irrelevant)"
        } else {
            ""
        }
    );
    for v in &r.verdicts {
        s.push_str(&format!(
            "{:<12} {:<4} support {:.3}\n",
            v.aggregator.as_str(),
            v.final_class.as_str(),
            v.support_probability
        ));
    }
    if let Some(v) = r.verdicts.first() {
        for (i, e) in v.evidence.iter().enumerate() {
            s.push_str(&format!(
                "  [{}] rho {:+.3} {:<4} {}\n",
                i + 1,
                e.relevance(),
                e.stance.argmax().as_str(),
                e.text()
            ));
        }
    }
    s
}

pub fn cmd_verify(
    a: &VerifyArgs,
    cfg: &CliConfig,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<VerifyReport, CliError> {
    let triple = triple_from(a)?;
    let reference = reference_from(&a.source)?;
    let kinds = cfg.aggregator.kinds();
    let model = load_model(cfg, kinds.contains(&AggregatorKind::Classifier))?;
    let backend = backend(cfg)?;
    let report = verify(
        &triple,
        &reference,
        a.claim.as_deref(),
        &pipeline_config(cfg)?,
        backend.as_ref(),
        &fetcher(cfg),
        &RuleSegmenter,
        &kinds,
        model.as_ref().map(|m| m as _),
    )?;
    let json = to_json(&report);
    match &a.output {
        Some(p) => write_file(p, &json)?,
        None => out.write_all(json.as_bytes()).map_err(CliError::output)?,
    }
    err.write_all(summarise(&report).as_bytes()).map_err(CliError::output)?;
    Ok(report)
}

pub fn cmd_evaluate(
    a: &EvaluateArgs,
    cfg: &CliConfig,
    out: &mut dyn Write,
) -> Result<crate::evaluation::EvaluationBundle, CliError> {
    let ds = load_wtr(&a.dataset).map_err(|e| CliError::Invalid(format!("{}: {e}", a.dataset.display())))?;
    let model = load_model(cfg, false)?;
    let backend = backend(cfg)?;
    let tasks = match a.task {
        TaskArg::Ternary => vec![Task::Ternary],
        TaskArg::Binary => vec![Task::Binary],
        TaskArg::Both => vec![Task::Ternary, Task::Binary],
    };
    let ecfg = EvalConfig {
        pipeline: pipeline_config(cfg)?,
        folds: cfg.folds,
        seed: cfg.seed,
        forest: ForestParams {
            n_jobs: cfg.jobs,
            ..cfg.forest.clone()
        },
        jobs: cfg.jobs,
        tasks,
        model,
    };
    let processed = process_records(&ds.records, &ecfg.pipeline, backend.as_ref(), ecfg.jobs);
    let bundle = evaluate_processed(&ds.records, &processed, &ecfg, backend.name());

    std::fs::create_dir_all(&a.out)
        .map_err(|e| CliError::Output(format!("{}: {e}", a.out.display())))?;
    let tables = bundle.to_tables();
    write_file(&a.out.join("report.json"), &to_json(&bundle))?;
    write_file(&a.out.join("tables.txt"), &tables)?;
    write_file(&a.out.join("verdicts.csv"), &bundle.to_csv().map_err(CliError::output)?)?;
    out.write_all(tables.as_bytes()).map_err(CliError::output)?;
    Ok(bundle)
}

/// A line of a feature training file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureRow {
    pub features: Vec<f64>,
    pub label: Stance,
}

pub fn read_feature_rows<R: BufRead>(r: R) -> Result<Vec<(FeatureVector, Stance)>, CliError> {
    let mut rows = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(CliError::invalid)?;
        if line.trim().is_empty() {
            continue;
        }
        let de = &mut serde_json::Deserializer::from_str(&line);
        let row: FeatureRow = serde_path_to_error::deserialize(de).map_err(|e| {
            CliError::Invalid(format!("line {}: field `{}`: {}", i + 1, e.path(), e.inner()))
        })?;
        let values: [f64; FEATURE_LEN] = row.features.as_slice().try_into().map_err(|_| {
            CliError::Invalid(format!(
                "line {}: expected {FEATURE_LEN} features, got {}",
                i + 1,
                row.features.len()
            ))
        })?;
        rows.push((FeatureVector(values), row.label));
    }
    Ok(rows)
}

pub fn cmd_train(
    a: &TrainArgs,
    cfg: &CliConfig,
    out: &mut dyn Write,
) -> Result<(AggregationModel, CrossValReport), CliError> {
    let data = if let Some(p) = &a.features {
        let f = std::fs::File::open(p).map_err(|e| CliError::Invalid(format!("{}: {e}", p.display())))?;
        read_feature_rows(std::io::BufReader::new(f))?
    } else if let Some(p) = &a.dataset {
        let ds = load_wtr(p).map_err(|e| CliError::Invalid(format!("{}: {e}", p.display())))?;
        let backend = backend(cfg)?;
        let processed =
            process_records(&ds.records, &pipeline_config(cfg)?, backend.as_ref(), cfg.jobs);
        training_set(&ds.records, &processed)
    } else {
        return Err(CliError::Invalid("give --dataset or --features".into()));
    };
    let params = ForestParams {
        n_jobs: cfg.jobs,
        ..cfg.forest.clone()
    };
    let (model, report) = train_aggregation_model(&data, cfg.folds, cfg.seed, &params)?;
    model.save(&a.out).map_err(CliError::output)?;
    let json = to_json(&report);
    if let Some(p) = &a.report {
        write_file(p, &json)?;
    }
    out.write_all(json.as_bytes()).map_err(CliError::output)?;
    Ok((model, report))
}

pub fn cmd_extract(a: &ExtractArgs, cfg: &CliConfig, out: &mut dyn Write) -> Result<Extraction, CliError> {
    let reference = reference_from(&a.source)?;
    let ex = extract(&reference, &fetcher(cfg), &RuleSegmenter, &cfg.windows)?;
    let text = if a.json {
        to_json(&ex)
    } else {
        let mut s = String::new();
        if let Some(u) = &ex.final_url {
            s.push_str(&format!("final url: {u}\n"));
        }
        s.push_str(&format!("segments ({}):\n", ex.segments.len()));
        for (i, seg) in ex.segments.iter().enumerate() {
            s.push_str(&format!("  {i:>3}  {seg}\n"));
        }
        s.push_str(&format!("passages ({}):\n", ex.passages.len()));
        for p in &ex.passages {
            s.push_str(&format!(
                "  n={} [{}..{}]  {}\n",
                p.window_size(),
                p.start_index(),
                p.end_index(),
                p.text()
            ));
        }
        s
    };
    out.write_all(text.as_bytes()).map_err(CliError::output)?;
    Ok(ex)
}


/// Parses `args` and runs the chosen command, returning the exit code.
pub fn run_cli<I, T>(
    args: I,
    env: &dyn Fn(&str) -> Option<String>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 4 } else { 0 };
            let _ = if code == 0 {
                write!(out, "{e}")
            } else {
                write!(err, "{e}")
            };
            return code;
        }
    };
    let result = resolve_config(&cli, env).and_then(|cfg| match &cli.command {
        Command::Verify(a) => cmd_verify(a, &cfg, out, err).map(drop),
        Command::Evaluate(a) => cmd_evaluate(a, &cfg, out).map(drop),
        Command::Train(a) => cmd_train(a, &cfg, out).map(drop),
        Command::Extract(a) => cmd_extract(a, &cfg, out).map(drop),
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

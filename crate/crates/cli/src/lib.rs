//! `qaconv` command line: dataset conversion, scoring, upper bounds,
//! statistics, annotation tables and context-marked exports.
//!
//! Exit status is 0 on success, 1 when input data is unreadable or invalid,
//! 2 on usage errors. Reports go to standard output or `--report` files,
//! logs to standard error.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use qaconv::convert::{self, ConvertOptions, Regroup, DEFAULT_MAX_TURNS};
use qaconv::eval::{self, EvalOptions, PredictionSet, Protocol};
use qaconv::formats::{self, FormatTag};
use qaconv::model::{validate_corpus, Severity};
use qaconv::oracle::{upper_bound_report, ReferencePolicy};
use qaconv::stats;
use qaconv::UnifiedCorpus;
use serde_json::Value;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success,
    Failure,
    Usage,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::Success => 0,
            ExitStatus::Failure => 1,
            ExitStatus::Usage => 2,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "qaconv", version, about = "Convert, score and profile SQuAD 2.0, QuAC and CoQA corpora")]
struct Cli {
    /// Log more (repeat for debug output).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Rewrite a corpus in another dataset format.
    Convert(ConvertArgs),
    /// Score predictions against a gold corpus.
    Evaluate(EvaluateArgs),
    /// Best F1 reachable by answering with context spans.
    UpperBound(UpperBoundArgs),
    /// Question counts, answer rates and sentence coverage.
    Stats(StatsArgs),
    /// Label percentages from a taxonomy annotation file.
    AnnotateAggregate(AnnotateArgs),
    /// Export turns with previous answers marked on the context tokens.
    MarkContext(MarkArgs),
}

#[derive(Args, Debug)]
struct ConvertArgs {
    #[arg(long, value_parser = parse_format)]
    from: FormatTag,
    #[arg(long, value_parser = parse_format)]
    to: FormatTag,
    /// Replace free-text answers by their best-matching context span.
    #[arg(long)]
    project_extractive: bool,
    /// Give every turn its own dialog.
    #[arg(long, conflicts_with = "synthesize")]
    flatten: bool,
    /// Shuffle single-question documents into pseudo-dialogs.
    #[arg(long, requires = "seed")]
    synthesize: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_MAX_TURNS as u64, value_parser = clap::value_parser!(u64).range(1..))]
    max_turns: u64,
    input: PathBuf,
    output: PathBuf,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    /// Scoring protocol: squad2, quac or coqa.
    #[arg(long, value_parser = parse_protocol)]
    protocol: Protocol,
    /// Gold corpus in any supported format.
    #[arg(long)]
    gold: PathBuf,
    /// Gold file format; detected from the content when omitted.
    #[arg(long, value_parser = parse_format)]
    gold_format: Option<FormatTag>,
    /// Predictions: JSON map, CoQA list or QuAC JSONL.
    #[arg(long)]
    pred: PathBuf,
    /// Write the full JSON report, per-question scores included.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Score every QuAC question, including low-agreement ones.
    #[arg(long)]
    no_agreement_filter: bool,
}

#[derive(Args, Debug)]
struct UpperBoundArgs {
    #[arg(long, value_parser = parse_format)]
    format: Option<FormatTag>,
    /// Only score against each question's primary reference.
    #[arg(long)]
    primary_only: bool,
    #[arg(long)]
    report: Option<PathBuf>,
    input: PathBuf,
}

#[derive(Args, Debug)]
struct StatsArgs {
    #[arg(long, value_parser = parse_format)]
    format: Option<FormatTag>,
    #[arg(long)]
    report: Option<PathBuf>,
    input: PathBuf,
}

#[derive(Args, Debug)]
struct AnnotateArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, value_parser = parse_format)]
    format: Option<FormatTag>,
    /// Line-delimited `{question_id, taxonomy, label}` records.
    #[arg(long)]
    labels: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MarkArgs {
    /// Number of previous answers to mark.
    #[arg(long)]
    k: usize,
    #[arg(long, value_parser = parse_format)]
    format: Option<FormatTag>,
    input: PathBuf,
    output: PathBuf,
}

fn parse_format(s: &str) -> Result<FormatTag, String> {
    s.parse::<FormatTag>().map_err(|e| e.to_string())
}

fn parse_protocol(s: &str) -> Result<Protocol, String> {
    s.parse()
}

/// Parse `argv` (program name first) and run the chosen subcommand.
pub fn run<I, T>(argv: I) -> ExitStatus
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitStatus::Usage
            } else {
                ExitStatus::Success
            };
        }
    };
    init_logging(cli.verbose);
    let mut out = std::io::stdout().lock();
    match dispatch(cli.command, &mut out) {
        Ok(()) => ExitStatus::Success,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitStatus::Failure
        }
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .target(env_logger::Target::Stderr)
        .try_init();
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Convert(a) => convert_cmd(a, out),
        Command::Evaluate(a) => evaluate_cmd(a, out),
        Command::UpperBound(a) => upper_bound_cmd(a, out),
        Command::Stats(a) => stats_cmd(a, out),
        Command::AnnotateAggregate(a) => annotate_cmd(a, out),
        Command::MarkContext(a) => mark_cmd(a, out),
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display()))
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write(path, &bytes)
}

/// Parse and validate; structural errors abort with the full diagnostic list.
fn load_corpus(path: &Path, format: Option<FormatTag>) -> Result<(UnifiedCorpus, FormatTag)> {
    let bytes = read(path)?;
    let format = match format {
        Some(f) => f,
        None => formats::detect(&bytes).with_context(|| format!("cannot detect the format of {}", path.display()))?,
    };
    let corpus = formats::parse(format, &bytes).with_context(|| format!("cannot parse {} as {format}", path.display()))?;
    let diagnostics = validate_corpus(&corpus);
    let errors: Vec<_> = diagnostics.iter().filter(|d| d.severity == Severity::Error).collect();
    for d in &diagnostics {
        log::warn!("{d}");
    }
    if !errors.is_empty() {
        bail!("{} has {} validation errors", path.display(), errors.len());
    }
    log::info!(
        "{}: {} documents, {} questions ({format})",
        path.display(),
        corpus.documents.len(),
        corpus.question_count()
    );
    Ok((corpus, format))
}

fn convert_cmd(a: ConvertArgs, out: &mut dyn Write) -> Result<()> {
    let (corpus, _) = load_corpus(&a.input, Some(a.from))?;
    let regroup = match (a.flatten, a.synthesize, a.seed) {
        (true, _, _) => Regroup::Flatten,
        (_, true, Some(seed)) => Regroup::Synthesize {
            seed,
            max_turns: a.max_turns as usize,
        },
        (_, false, Some(_)) => bail!("--seed only applies with --synthesize"),
        _ => Regroup::Keep,
    };
    let options = ConvertOptions {
        project_extractive: a.project_extractive,
        regroup,
    };
    let result = convert::convert(&corpus, a.from, a.to, options)?;
    for d in &result.issues {
        log::warn!("{d}");
    }
    let bytes = formats::serialize(a.to, &result.corpus)?;
    write(&a.output, &bytes)?;
    writeln!(out, "converted {} questions {} -> {}", result.corpus.question_count(), a.from, a.to)?;
    for e in &result.ledger {
        writeln!(out, "{:<32} {:>8}", e.rule, e.count)?;
    }
    Ok(())
}

fn evaluate_cmd(a: EvaluateArgs, out: &mut dyn Write) -> Result<()> {
    let (gold, _) = load_corpus(&a.gold, a.gold_format)?;
    let predictions = PredictionSet::from_slice(&read(&a.pred)?)
        .with_context(|| format!("cannot load predictions from {}", a.pred.display()))?;
    let options = EvalOptions {
        quac_min_f1: if a.no_agreement_filter {
            None
        } else {
            EvalOptions::default().quac_min_f1
        },
    };
    let report = eval::evaluate(&predictions, &gold, a.protocol, options)?;
    for d in &report.diagnostics {
        log::warn!("{d}");
    }
    out.write_all(report.to_table().as_bytes())?;
    if let Some(path) = &a.report {
        write_json(path, &report.to_json())?;
    }
    Ok(())
}

fn upper_bound_cmd(a: UpperBoundArgs, out: &mut dyn Write) -> Result<()> {
    let (corpus, _) = load_corpus(&a.input, a.format)?;
    let primary = upper_bound_report(&corpus, ReferencePolicy::PrimaryOnly);
    let main = if a.primary_only {
        primary.clone()
    } else {
        upper_bound_report(&corpus, ReferencePolicy::AllReferences)
    };
    writeln!(out, "{:<28} {:>8}", "questions", main.per_question.len())?;
    writeln!(out, "{:<28} {:>8}", "yes/no/unknown", main.yes_no_unknown_count)?;
    if !a.primary_only {
        writeln!(out, "{:<28} {:>8.1}", "overall", main.overall_rounded())?;
    }
    writeln!(out, "{:<28} {:>8.1}", "overall (primary reference)", primary.overall_rounded())?;
    if let Some(path) = &a.report {
        let value = serde_json::json!({
            "policy": if a.primary_only { "primary" } else { "all" },
            "overall": main.overall,
            "overall_primary": primary.overall,
            "yes_no_unknown_count": main.yes_no_unknown_count,
            "per_question": main.per_question,
        });
        write_json(path, &value)?;
    }
    Ok(())
}

fn stats_cmd(a: StatsArgs, out: &mut dyn Write) -> Result<()> {
    let (corpus, _) = load_corpus(&a.input, a.format)?;
    let profile = stats::dataset_profile(&corpus);
    out.write_all(profile.to_table().as_bytes())?;
    if let Some(path) = &a.report {
        write_json(path, &profile.to_json())?;
    }
    Ok(())
}

fn annotate_cmd(a: AnnotateArgs, out: &mut dyn Write) -> Result<()> {
    let (corpus, _) = load_corpus(&a.corpus, a.format)?;
    let records = stats::load_annotations(&read(&a.labels)?).with_context(|| format!("in {}", a.labels.display()))?;
    let table = stats::aggregate_annotations(&records, &corpus)?;
    for d in &table.diagnostics {
        log::warn!("{d}");
    }
    out.write_all(table.to_table().as_bytes())?;
    if let Some(path) = &a.report {
        write_json(path, &table.to_json())?;
    }
    Ok(())
}

fn mark_cmd(a: MarkArgs, out: &mut dyn Write) -> Result<()> {
    let (corpus, _) = load_corpus(&a.input, a.format)?;
    let instances = convert::mark_context(&corpus, a.k)?;
    let mut bytes = Vec::new();
    convert::write_marked_jsonl(&instances, &mut bytes)?;
    write(&a.output, &bytes)?;
    writeln!(out, "wrote {} instances (k = {})", instances.len(), a.k)?;
    Ok(())
}

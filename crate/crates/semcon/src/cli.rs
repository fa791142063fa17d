//! Command-line pipeline: `synth` → `ingest` → `compute` → `analyze`,
//! staged through files so any stage can be re-run without repeating the
//! ones before it.
//!
//! Every command is a pure function of its input files and flags — no
//! environment variables, no hidden state, and the only randomness lives in
//! `synth` behind `--seed` — so rerunning a command produces byte-identical
//! outputs.
//!
//! Exit statuses: 0 success, 2 usage error, 3 input-format or data error,
//! 4 I/O error, 1 internal error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::analytics::{
    analyze, write_bucket_csv, write_histogram_csv, AnalyticsError, AnalyzeOptions,
};
use crate::contribution::{contribution_all, write_summary, MetricTable, MetricTableError};
use crate::corpus::{Corpus, CorpusError};
use crate::graph::build_graph;
use crate::synth::{generate, SynthConfig, SynthError, SynthOutput};
use crate::textmodel::{build_vectors, TextModelError};

/// Failures surfaced to the shell, bucketed by exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Io(_) => 4,
            CliError::Internal(_) => 1,
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(err: CorpusError) -> Self {
        match err {
            CorpusError::Io { .. } => CliError::Io(err.to_string()),
            _ => CliError::Data(err.to_string()),
        }
    }
}

impl From<MetricTableError> for CliError {
    fn from(err: MetricTableError) -> Self {
        match err {
            MetricTableError::Io { .. } => CliError::Io(err.to_string()),
            _ => CliError::Data(err.to_string()),
        }
    }
}

impl From<TextModelError> for CliError {
    fn from(err: TextModelError) -> Self {
        CliError::Data(err.to_string())
    }
}

impl From<AnalyticsError> for CliError {
    fn from(err: AnalyticsError) -> Self {
        match err {
            AnalyticsError::InvalidBucketCount(_) => CliError::Usage(err.to_string()),
            _ => CliError::Data(err.to_string()),
        }
    }
}

impl From<SynthError> for CliError {
    fn from(err: SynthError) -> Self {
        match err {
            SynthError::InvalidConfig(_) => CliError::Usage(err.to_string()),
            SynthError::Io { .. } => CliError::Io(err.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "semcon",
    version,
    about = "Semantic contribution analysis for citation corpora",
    propagate_version = true
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic corpus with planted statistical structure
    Synth(SynthArgs),
    /// Validate raw papers/edges files into a corpus bundle
    Ingest(IngestArgs),
    /// Compute citation, reader, and contribution metrics per paper
    Compute(ComputeArgs),
    /// Correlate, bucket, and histogram a metric table
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Directory for papers.jsonl, edges.csv, manifest.json
    #[arg(long)]
    out: PathBuf,
    /// Seed for the generator's random stream
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Core papers (receive citations, get measured)
    #[arg(long, default_value_t = 1000)]
    n_core: usize,
    /// Periphery papers (alternately citing-only and cited-only)
    #[arg(long, default_value_t = 2000)]
    n_neighbors: usize,
    /// Power-law shape of citation in-degrees (must exceed 1)
    #[arg(long, default_value_t = 2.5)]
    citation_alpha: f64,
    /// Target reader-citation Pearson correlation, in [0, 1)
    #[arg(long, default_value_t = 0.35)]
    reader_rho: f64,
    /// Distinct words available to the text generator
    #[arg(long, default_value_t = 2500)]
    vocab_size: usize,
    /// Latent topics shaping vocabulary and citation affinity
    #[arg(long, default_value_t = 25)]
    topic_count: usize,
    /// Abstract length in tokens
    #[arg(long, default_value_t = 60)]
    tokens_per_abstract: usize,
}

#[derive(Debug, Args)]
struct IngestArgs {
    /// JSON-lines paper metadata file
    #[arg(long)]
    papers: PathBuf,
    /// CSV citation edge file (citing_doi,cited_doi)
    #[arg(long)]
    edges: PathBuf,
    /// Directory for corpus.json and ingest_report.txt
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ComputeArgs {
    /// Corpus bundle produced by `ingest`
    #[arg(long)]
    corpus: PathBuf,
    /// Directory for metrics.csv
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// Metric table produced by `compute`
    #[arg(long)]
    table: PathBuf,
    /// Directory for report.json and the per-figure CSVs
    #[arg(long)]
    out: PathBuf,
    /// Equal-size buckets per bucket study (at least 2)
    #[arg(long, default_value_t = 20)]
    buckets: usize,
    /// Drop rows with zero readers before any statistic
    #[arg(long, default_value_t = false)]
    exclude_zero_readers: bool,
    /// Correlate ln(1 + count) instead of raw counts
    #[arg(long, default_value_t = false)]
    log_transform: bool,
}

/// Dispatch a parsed invocation. `out` receives the human-readable progress
/// lines that land on stdout in the binary.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Synth(args) => cmd_synth(&args, out),
        Command::Ingest(args) => cmd_ingest(&args, out),
        Command::Compute(args) => cmd_compute(&args, out),
        Command::Analyze(args) => cmd_analyze(&args, out),
    }
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn stdout_err(err: std::io::Error) -> CliError {
    CliError::Io(format!("cannot write to output stream: {err}"))
}

fn cmd_synth(args: &SynthArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let config = SynthConfig {
        seed: args.seed,
        n_core: args.n_core,
        n_neighbors: args.n_neighbors,
        citation_alpha: args.citation_alpha,
        reader_rho: args.reader_rho,
        vocab_size: args.vocab_size,
        topic_count: args.topic_count,
        tokens_per_abstract: args.tokens_per_abstract,
    };
    let output: SynthOutput = generate(&config)?;
    output.write_to_dir(&args.out)?;
    let manifest = &output.manifest;
    writeln!(
        out,
        "generated {} papers, {} edges into {}",
        manifest.papers.len(),
        manifest.edge_count,
        args.out.display()
    )
    .map_err(stdout_err)?;
    writeln!(
        out,
        "planted: k_max {}, blend weight {:.6}, {} papers with defined contribution",
        manifest.k_max, manifest.blend_weight, manifest.expected_defined_contribution
    )
    .map_err(stdout_err)?;
    if let Some(slope) = manifest.survival_slope {
        writeln!(out, "in-degree survival slope {slope:.4}").map_err(stdout_err)?;
    }
    Ok(())
}

fn render_ingest_report(corpus: &Corpus) -> String {
    let report = corpus.ingest_report();
    let p = &report.papers;
    let e = &report.edges;
    format!(
        "papers: {} accepted, {} duplicate, {} malformed ({} lines)\n\
         edges: {} accepted, {} duplicate, {} malformed of which {} self-citations ({} records)\n",
        p.accepted,
        p.duplicate,
        p.malformed,
        p.total(),
        e.accepted,
        e.duplicate,
        e.malformed,
        e.self_citation,
        e.total(),
    )
}

fn cmd_ingest(args: &IngestArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let corpus = Corpus::from_files(&args.papers, &args.edges)?;
    ensure_dir(&args.out)?;
    corpus.save(&args.out.join("corpus.json"))?;
    let report = render_ingest_report(&corpus);
    write_file(&args.out.join("ingest_report.txt"), report.as_bytes())?;
    out.write_all(report.as_bytes()).map_err(stdout_err)?;
    Ok(())
}

fn cmd_compute(args: &ComputeArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let corpus = Corpus::load(&args.corpus)?;
    let graph = build_graph(corpus.edges());
    let (stats, vectors) = build_vectors::<f64>(&corpus)?;
    let (table, summary) = contribution_all(&graph, &vectors, &corpus);
    ensure_dir(&args.out)?;
    table.write_csv(&args.out.join("metrics.csv"))?;
    writeln!(
        out,
        "{} papers, {} text-bearing, vocabulary of {} terms",
        corpus.papers().len(),
        corpus.text_bearing_count(),
        stats.term_count()
    )
    .map_err(stdout_err)?;
    write_summary(&summary, out).map_err(stdout_err)?;
    Ok(())
}

fn cmd_analyze(args: &AnalyzeArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if args.buckets < 2 {
        return Err(CliError::Usage(format!(
            "--buckets must be at least 2, got {}",
            args.buckets
        )));
    }
    let table = MetricTable::<f64>::read_csv(&args.table)?;
    let options = AnalyzeOptions {
        bucket_count: args.buckets,
        exclude_zero_readers: args.exclude_zero_readers,
        log_transform: args.log_transform,
    };
    let report = analyze(&table, &options)?;
    ensure_dir(&args.out)?;

    let mut body = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::Internal(format!("cannot serialize report: {e}")))?;
    body.push('\n');
    write_file(&args.out.join("report.json"), body.as_bytes())?;
    let mut files_written = 1usize;

    for entry in &report.histograms {
        let mut csv = Vec::new();
        write_histogram_csv(&entry.histogram, &mut csv)
            .map_err(|e| CliError::Internal(format!("cannot render histogram: {e}")))?;
        let name = format!("hist_{}.csv", entry.metric.name());
        write_file(&args.out.join(name), &csv)?;
        files_written += 1;
    }
    for study in &report.bucket_studies {
        let mut csv = Vec::new();
        write_bucket_csv(study, &mut csv)
            .map_err(|e| CliError::Internal(format!("cannot render bucket study: {e}")))?;
        let name = format!("fig_{}_vs_{}.csv", study.x.name(), study.y.name());
        write_file(&args.out.join(name), &csv)?;
        files_written += 1;
    }

    writeln!(
        out,
        "analyzed {} rows ({} with contribution); wrote {} files to {}",
        report.counts.rows_used,
        report.counts.defined_contribution,
        files_written,
        args.out.display()
    )
    .map_err(stdout_err)?;
    for corr in &report.correlations {
        writeln!(
            out,
            "r({} vs {}) = {:.4} over {} rows",
            corr.metric_x, corr.metric_y, corr.r, corr.n
        )
        .map_err(stdout_err)?;
    }
    for skip in &report.skipped {
        writeln!(out, "skipped {}: {}", skip.statistic, skip.reason).map_err(stdout_err)?;
    }
    Ok(())
}

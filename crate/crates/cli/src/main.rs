//! `fincpt`: the pipeline driver.
//!
//! ```text
//! ingest -> format -> synth -> pack -> train
//!                     stats    plan     eval -> report
//!                                       compare
//! ```

mod backend;
mod commands;
mod config;
mod error;
mod meta;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::backend::BackendSpec;
use crate::config::PipelineConfig;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "fincpt", version, about = "Financial-domain continual pre-training toolkit")]
struct Cli {
    /// TOML pipeline configuration, or JSON when the file ends in `.json`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Caps internal parallelism (default 1).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Leaves the timestamp out of output headers, for byte-identical reruns.
    #[arg(long, global = true)]
    no_timestamp: bool,
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load the files listed in a document manifest into raw-document JSONL.
    Ingest {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Clean and render raw documents into corpus records.
    Format {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write the per-document report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Rephrase corpus records into Q&A or multiple-choice records.
    Synth {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "qa")]
        kind: fincpt_core::synthgen::ItemKind,
        #[arg(long)]
        backend: BackendSpec,
        /// Also write the raw rephrase results as JSONL.
        #[arg(long)]
        results: Option<PathBuf>,
    },
    /// Tokenize and pack corpus records into fixed-length sequences.
    Pack {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the plan's max sequence length.
        #[arg(long)]
        max_len: Option<usize>,
    },
    /// Print record and token counts for a corpus.
    Stats {
        #[arg(long)]
        input: PathBuf,
        /// Print JSON instead of key=value lines.
        #[arg(long)]
        json: bool,
    },
    /// Train the reference model on packed data and record the loss curve.
    Train {
        #[arg(long)]
        input: PathBuf,
        /// Loss-curve CSV.
        #[arg(long)]
        curve: PathBuf,
        /// Trained model JSON, usable as a `reference:` backend.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Plan manifest overriding the configured plan.
        #[arg(long)]
        plan: Option<PathBuf>,
    },
    /// Write or check a training-plan manifest.
    Plan {
        #[arg(long, conflicts_with = "check")]
        out: Option<PathBuf>,
        /// Validate an existing manifest instead.
        #[arg(long)]
        check: Option<PathBuf>,
    },
    /// Run benchmark tasks against a backend.
    Eval {
        /// `name=path.jsonl`, repeatable.
        #[arg(long = "task", required = true, value_parser = parse_task_arg)]
        tasks: Vec<(String, PathBuf)>,
        #[arg(long)]
        backend: BackendSpec,
        /// Model label in the report (defaults to the backend spec).
        #[arg(long)]
        label: Option<String>,
        #[arg(long)]
        out: PathBuf,
        /// Per-item audit JSONL.
        #[arg(long)]
        audit: Option<PathBuf>,
        /// Overrides the configured retry budget of HTTP backends.
        #[arg(long)]
        max_retries: Option<u32>,
    },
    /// Generate from two backends on the same prompts and write a markdown report.
    Compare {
        /// Prompt file, one prompt per line.
        #[arg(long)]
        prompts: PathBuf,
        #[arg(long)]
        backend_a: BackendSpec,
        #[arg(long)]
        backend_b: BackendSpec,
        #[arg(long)]
        label_a: Option<String>,
        #[arg(long)]
        label_b: Option<String>,
        #[arg(long)]
        out: PathBuf,
        /// Also write the cases as JSONL.
        #[arg(long)]
        cases: Option<PathBuf>,
        #[arg(long)]
        max_retries: Option<u32>,
    },
    /// Combine two eval reports into a table with a diff row.
    Report {
        #[arg(long)]
        tuned: PathBuf,
        #[arg(long)]
        original: PathBuf,
        /// Markdown table output (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
        /// JSON document with both reports and the diff.
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

fn parse_task_arg(s: &str) -> Result<(String, PathBuf), String> {
    let (name, path) = s.split_once('=').ok_or_else(|| format!("expected name=path, got `{s}`"))?;
    if name.is_empty() || path.is_empty() {
        return Err(format!("expected name=path, got `{s}`"));
    }
    Ok((name.to_string(), PathBuf::from(path)))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut config = PipelineConfig::load(cli.config.as_deref())?;
    config.apply_overrides(cli.seed, cli.workers);
    let ctx = commands::Context { config, timestamp: !cli.no_timestamp };
    match cli.command {
        Command::Ingest { manifest, out } => commands::ingest(&ctx, &manifest, &out),
        Command::Format { input, out, report } => commands::format(&ctx, &input, &out, report.as_deref()),
        Command::Synth { input, out, kind, backend, results } => {
            commands::synth(&ctx, &input, &out, kind, &backend, results.as_deref())
        }
        Command::Pack { input, out, max_len } => commands::pack(&ctx, &input, &out, max_len),
        Command::Stats { input, json } => commands::stats(&ctx, &input, json),
        Command::Train { input, curve, model, plan } => {
            commands::train(&ctx, &input, &curve, model.as_deref(), plan.as_deref())
        }
        Command::Plan { out, check } => commands::plan(&ctx, out.as_deref(), check.as_deref()),
        Command::Eval { tasks, backend, label, out, audit, max_retries } => {
            commands::eval(&ctx, &tasks, &backend, label, &out, audit.as_deref(), max_retries)
        }
        Command::Compare { prompts, backend_a, backend_b, label_a, label_b, out, cases, max_retries } => {
            let sides = [(backend_a, label_a), (backend_b, label_b)];
            commands::compare(&ctx, &prompts, &sides, &out, cases.as_deref(), max_retries)
        }
        Command::Report { tuned, original, out, json } => {
            commands::report(&ctx, &tuned, &original, out.as_deref(), json.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

//! `orderdual`: classify, dualize, verify, simulate and render models.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or parse error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use orderdual::engine::{self, SimulateConfig, VerifyConfig};
use orderdual::models::DualVariant;
use orderdual::{Error, Result};

#[derive(Parser)]
#[command(name = "orderdual", version, about = "Pathwise dualities of monotone and additive Markov processes on finite posets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ModelArg {
    /// Builtin `name[:N]` or path to a JSON model file.
    #[arg(long)]
    model: String,
}

#[derive(Subcommand)]
enum Command {
    /// Per-map monotone/additive classification with witnesses.
    Classify {
        #[command(flatten)]
        model: ModelArg,
        /// JSON report instead of a text table.
        #[arg(long)]
        json: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit the dual model with a map-level duality report.
    Dualize {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long, value_parser = parse_variant)]
        variant: Option<DualVariant>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Map, generator, semigroup and pathwise duality checks.
    Verify {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Rational arithmetic for the generator check.
        #[arg(long)]
        exact: bool,
        #[arg(long, value_parser = parse_variant)]
        variant: Option<DualVariant>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sampled event logs for the pathwise check.
        #[arg(long, default_value_t = 100)]
        logs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo estimate of both sides of the duality.
    Simulate {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 1000)]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, value_parser = parse_variant)]
        variant: Option<DualVariant>,
        /// Initial state, by label or index.
        #[arg(long)]
        x: Option<String>,
        /// Initial dual state, by label or index.
        #[arg(long)]
        y: Option<String>,
        /// Replicas written to the trace.
        #[arg(long, default_value_t = 10)]
        trace_replicas: u64,
        /// Trace CSV path; the summary JSON goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Summary JSON path instead of stdout.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// SVG of a sampled diagram, or of a diagram JSON file.
    Render {
        /// Builtin `name[:N]` or JSON model file.
        #[arg(long, required_unless_present = "diagram", conflicts_with = "diagram")]
        model: Option<String>,
        /// Diagram JSON file.
        #[arg(long)]
        diagram: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Builtin models and their parameters.
    ModelsList,
}

fn parse_variant(s: &str) -> std::result::Result<DualVariant, String> {
    DualVariant::parse(s).map_err(|e| e.to_string())
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => Ok(std::fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty<T: serde::Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

/// `Ok(true)` when every check passed.
fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Classify { model, json, out } => {
            let r = engine::classify(&engine::load_model(&model.model)?)?;
            emit(out.as_ref(), &if json { pretty(&r)? } else { r.table() })?;
            Ok(true)
        }
        Command::Dualize { model, variant, out } => {
            let r = engine::dualize(&engine::load_model(&model.model)?, variant)?;
            emit(out.as_ref(), &pretty(&r)?)?;
            Ok(r.ok)
        }
        Command::Verify { model, t, tol, exact, variant, seed, logs, out } => {
            let cfg = VerifyConfig { t, tol, exact, variant, seed, logs };
            let r = engine::verify(&engine::load_model(&model.model)?, &cfg)?;
            emit(out.as_ref(), &pretty(&r)?)?;
            Ok(r.ok)
        }
        Command::Simulate { model, t, n, seed, jobs, variant, x, y, trace_replicas, out, summary } => {
            let cfg = SimulateConfig { t, n, seed, jobs, variant, x0: x, y0: y, trace_replicas };
            let (r, trace) = engine::simulate(&engine::load_model(&model.model)?, &cfg)?;
            if let Some(p) = &out {
                std::fs::write(p, trace)?;
            }
            emit(summary.as_ref(), &pretty(&r)?)?;
            Ok(true)
        }
        Command::Render { model, diagram, t, seed, out } => {
            let svg = match (model, diagram) {
                (_, Some(path)) => engine::render_diagram_json(&std::fs::read_to_string(path)?)?,
                (Some(m), None) => engine::render_model(&engine::load_model(&m)?, t, seed)?,
                (None, None) => return Err(Error::Parse("either --model or --diagram is required".into())),
            };
            emit(out.as_ref(), &svg)?;
            Ok(true)
        }
        Command::ModelsList => {
            print!("{}", engine::models_list());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

//! `sheafsep`: load a model file and run site, sheaf, law, evaluation and
//! satisfaction checks on it.

mod commands;
mod model;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use sheafsep::seplogic::Mode;
use thiserror::Error;

use crate::commands::Options;
use crate::report::{ErrorBody, ErrorReport, Report};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("schema violation at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("{what} is {size}, above the bound {bound}")]
    Bound { what: &'static str, size: usize, bound: usize },
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error("formula: {0}")]
    Formula(String),
}

impl CliError {
    fn body(&self) -> ErrorBody {
        let kind = match self {
            CliError::Usage(_) => "usage",
            CliError::Io { .. } => "io",
            CliError::Schema { .. } => "schema",
            CliError::Bound { .. } => "bound-exceeded",
            CliError::Invalid(_) => "invalid-model",
            CliError::Formula(_) => "formula",
        };
        let path = match self {
            CliError::Schema { path, .. } => Some(path.clone()),
            _ => None,
        };
        ErrorBody { kind, message: self.to_string(), path }
    }
}

#[derive(Debug, Parser)]
#[command(name = "sheafsep", version, about = "Model checker for separation logic over finite sheaf models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Model file (JSON).
    #[arg(long, global = true)]
    model: Option<PathBuf>,
    /// Formula text, or the name of a formula declared in the model.
    #[arg(long, global = true)]
    formula: Option<String>,
    /// Stage such as `{x,y}`; defaults to all locations.
    #[arg(long, global = true)]
    stage: Option<String>,
    /// Heap literal such as `{x:0, y:null}`.
    #[arg(long, global = true)]
    heap: Option<String>,
    /// Name of a probability space declared in the model.
    #[arg(long, global = true)]
    space: Option<String>,
    /// How separating conjunction is computed.
    #[arg(long, global = true, default_value = "unfolded", value_parser = ["pipeline", "unfolded"])]
    mode: String,
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    /// Random cases per sampled law.
    #[arg(long, global = true, default_value_t = 200)]
    samples: usize,
    /// Print the report as JSON.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Clone, Copy, Debug, Subcommand)]
enum Command {
    /// Validate the coverage axioms.
    CheckSite,
    /// Check that the resource is a sheaf for the coverage.
    CheckSheaf,
    /// Run the algebraic law suites on a memory model.
    Laws,
    /// Print the denotation of a formula at a stage.
    Eval,
    /// Decide whether a heap satisfies a formula.
    Sat,
    /// Decide a probabilistic formula at a named space.
    Psl,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::CheckSite => "check-site",
            Command::CheckSheaf => "check-sheaf",
            Command::Laws => "laws",
            Command::Eval => "eval",
            Command::Sat => "sat",
            Command::Psl => "psl",
        }
    }
}

fn run(cli: &Cli) -> Result<Report, CliError> {
    let start = Instant::now();
    let path = cli.model.as_ref().ok_or_else(|| CliError::Usage("--model is required".into()))?;
    let model = model::load_model(path)?;
    let opts = Options {
        formula: cli.formula.clone(),
        stage: cli.stage.clone(),
        heap: cli.heap.clone(),
        space: cli.space.clone(),
        mode: cli.mode.parse::<Mode>().map_err(CliError::Usage)?,
        seed: cli.seed,
        samples: cli.samples,
    };
    let mut report = Report::new(cli.command.name(), &model.description);
    let echo = [("formula", &cli.formula), ("stage", &cli.stage), ("heap", &cli.heap), ("space", &cli.space)];
    for (key, value) in echo {
        if let Some(v) = value {
            report.arg(key, v);
        }
    }
    match cli.command {
        Command::Eval | Command::Sat => report.arg("mode", &cli.mode),
        Command::Laws => {
            report.arg("seed", cli.seed);
            report.arg("samples", cli.samples);
        }
        _ => {}
    }
    match cli.command {
        Command::CheckSite => commands::check_site(&model, &mut report)?,
        Command::CheckSheaf => commands::check_sheaf_cmd(&model, &mut report)?,
        Command::Laws => commands::laws_cmd(&model, &opts, &mut report)?,
        Command::Eval => commands::eval_cmd(&model, &opts, &mut report)?,
        Command::Sat => commands::sat_cmd(&model, &opts, &mut report)?,
        Command::Psl => commands::psl_cmd(&model, &opts, &mut report)?,
    }
    report.elapsed_ms = start.elapsed().as_millis();
    Ok(report)
}

fn emit_error(err: ErrorBody, json: bool) -> ExitCode {
    if json {
        let text = serde_json::to_string_pretty(&ErrorReport { error: err }).expect("serializable");
        println!("{text}");
    } else {
        eprintln!("error ({}): {}", err.kind, err.message);
    }
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let json = std::env::args().any(|a| a == "--json");
            let message = e.render().to_string();
            return emit_error(ErrorBody { kind: "usage", message: message.trim().to_string(), path: None }, json);
        }
    };
    match run(&cli) {
        Ok(report) => {
            let out = if cli.json {
                serde_json::to_string_pretty(&report).expect("serializable") + "\n"
            } else {
                report.render_text()
            };
            let _ = std::io::stdout().write_all(out.as_bytes());
            if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => emit_error(e.body(), cli.json),
    }
}

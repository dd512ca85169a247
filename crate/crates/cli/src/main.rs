use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;

/// Tools for ARC solver scripts: validation, tracing, refactor checks,
/// the annotation pipeline and corpus export.
#[derive(Parser)]
#[command(name = "arcdsl", version)]
struct Cli {
    /// Report style.
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Check every solver against its task, then under permuted colour codes.
    Validate {
        #[arg(long)]
        tasks: PathBuf,
        #[arg(long)]
        solvers: PathBuf,
        #[arg(long, default_value_t = 0)]
        permutations: u64,
    },
    /// Print every intermediate value of a solver on one pair.
    Trace {
        #[arg(long)]
        task: PathBuf,
        #[arg(long)]
        solver: PathBuf,
        /// `train:N` or `test:N`.
        #[arg(long, default_value = "train:0")]
        pair: String,
    },
    /// Check a chunked rewrite against the original solver.
    RefactorCheck {
        #[arg(long)]
        original: PathBuf,
        #[arg(long)]
        chunked: PathBuf,
        #[arg(long)]
        task: PathBuf,
    },
    /// Run the annotation pipeline described by a config file.
    Pipeline {
        #[arg(long)]
        config: PathBuf,
        /// Replay stored responses from this directory instead of calling the endpoint.
        #[arg(long)]
        offline: Option<PathBuf>,
        /// Restrict the run to these task ids.
        #[arg(long = "task")]
        tasks: Vec<String>,
    },
    /// Write accepted bundles as retrieval records.
    Export {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write the tactic frequency table next to the output.
        #[arg(long)]
        tactics_report: bool,
    },
}

/// 0 success, 1 check failure, 2 usage or I/O error.
pub enum Outcome {
    Pass,
    Fail,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let f = cli.format;
    let result = match cli.command {
        Command::Validate {
            tasks,
            solvers,
            permutations,
        } => commands::validate(&tasks, &solvers, permutations, f),
        Command::Trace { task, solver, pair } => commands::trace(&task, &solver, &pair, f),
        Command::RefactorCheck { original, chunked, task } => commands::refactor_check(&original, &chunked, &task, f),
        Command::Pipeline { config, offline, tasks } => commands::pipeline(&config, offline.as_deref(), &tasks, f),
        Command::Export {
            dataset,
            out,
            tactics_report,
        } => commands::export(&dataset, &out, tactics_report, f),
    };
    match result {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

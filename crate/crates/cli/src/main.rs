mod commands;
mod failure;
mod report;

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{ArgGroup, Parser, Subcommand};
use hpcause::{EngineConfig, Variant};

use crate::failure::Failure;

/// Decide actual causality, responsibility and blame in structural causal models.
#[derive(Debug, Parser)]
#[command(name = "hpcause", version)]
struct Cli {
    /// Print a machine-readable JSON report (deterministic; no timing).
    #[arg(long, global = true)]
    json: bool,
    /// Cause definition to apply; overrides a query file's `variant:` line.
    #[arg(long, global = true, value_parser = parse_variant)]
    variant: Option<Variant>,
    /// Maximum number of solver calls per query.
    #[arg(long, global = true, default_value_t = hpcause::engine::DEFAULT_BUDGET)]
    budget: u64,
    /// Worker threads for the witness search (default: one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse()
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check whether the query's candidate is a cause of its effect.
    CheckCause {
        query: PathBuf,
        /// Model file (default: the query's `model:` line).
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Degree of responsibility of the query's candidate for its effect.
    Responsibility {
        query: PathBuf,
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Degree of blame of a setting relative to an epistemic-state file.
    Blame {
        state: PathBuf,
        /// Setting, e.g. `S3=1` or `A<-1, B<-0`.
        #[arg(long)]
        setting: String,
        /// Effect event formula, e.g. `DIE=1`.
        #[arg(long)]
        effect: String,
    },
    /// List every cause of an effect with at most `--max-size` conjuncts.
    Enumerate {
        model: PathBuf,
        #[arg(long)]
        context: String,
        #[arg(long)]
        effect: String,
        #[arg(long, default_value_t = 1)]
        max_size: usize,
    },
    /// Turn a two-block QBF into a labelled causality instance.
    #[command(group(ArgGroup::new("shape").required(true).args(["sigma2", "pi2"])))]
    GenInstance {
        /// `exists X forall Y phi` to a singleton AC1+AC2 instance.
        #[arg(long)]
        sigma2: bool,
        /// `forall Y exists X phi` to an AC1+AC3 instance.
        #[arg(long)]
        pi2: bool,
        cqbf: PathBuf,
        out_dir: PathBuf,
    },
    /// Cross-check the engine against exhaustive oracles on seeded random inputs.
    Selftest {
        /// Number of random inputs per suite.
        #[arg(long, default_value_t = 100)]
        scale: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

pub struct Options {
    pub variant: Option<Variant>,
    pub config: EngineConfig,
}

fn run(cli: &Cli) -> Result<report::Report, Failure> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Other(e.to_string()))?;
    }
    let opts = Options {
        variant: cli.variant,
        config: EngineConfig {
            budget: cli.budget,
            parallel: cli.threads != Some(1),
        },
    };
    match &cli.command {
        Command::CheckCause { query, model } => commands::check_cause(query, model.as_deref(), &opts),
        Command::Responsibility { query, model } => commands::responsibility(query, model.as_deref(), &opts),
        Command::Blame { state, setting, effect } => commands::blame(state, setting, effect, &opts),
        Command::Enumerate {
            model,
            context,
            effect,
            max_size,
        } => commands::enumerate(model, context, effect, *max_size, &opts),
        Command::GenInstance {
            sigma2,
            pi2: _,
            cqbf,
            out_dir,
        } => commands::gen_instance(*sigma2, cqbf, out_dir),
        Command::Selftest { scale, seed } => commands::selftest(*scale, *seed, &opts),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    match run(&cli) {
        Ok(report) => {
            // A closed pipe (e.g. `| head`) is not an error worth reporting.
            let mut out = std::io::stdout().lock();
            let _ = if cli.json {
                writeln!(out, "{}", serde_json::to_string_pretty(&report.json).expect("serializable"))
            } else {
                write!(out, "{}", report.human)
                    .and_then(|_| writeln!(out, "time: {:.3}s", start.elapsed().as_secs_f64()))
            };
            if report.success {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(f) => {
            if cli.json {
                let err = serde_json::json!({ "error": { "kind": f.kind(), "message": f.to_string() } });
                println!("{}", serde_json::to_string_pretty(&err).expect("serializable"));
            } else {
                eprintln!("error: {f}");
            }
            ExitCode::from(f.exit_code())
        }
    }
}

use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use miso_mobo::experiment::{self, Baseline, ExperimentConfig, Overrides};
use miso_mobo::sources::protocol::{self, Handshake};
use miso_mobo::sources::{make_synthetic_suite, SourceBinding};
use miso_mobo::space::SearchSpace;

#[derive(Parser)]
#[command(version, about = "Multi-source multi-objective Bayesian optimization")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run every repetition in a config and write traces plus aggregate.csv.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        repetitions: Option<usize>,
        /// `none` or `random-search`.
        #[arg(long)]
        baseline: Option<Baseline>,
    },
    /// Check a config (and the evaluator handshake) without running it.
    Validate { config: PathBuf },
    /// Serve a synthetic suite over the evaluator protocol on stdin/stdout.
    ServeSynthetic {
        #[arg(long, default_value = "zdt1-miso")]
        suite: String,
        /// Preset name or a dimension count for the unit cube.
        #[arg(long, default_value = "2")]
        space: String,
        #[arg(long, default_value_t = 0.0)]
        bias: f64,
        #[arg(long, default_value_t = 0.0)]
        noise_sd: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match dispatch(Cli::parse().command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cmd: Cmd) -> miso_mobo::Result<ExitCode> {
    match cmd {
        Cmd::Run {
            config,
            out,
            seed,
            repetitions,
            baseline,
        } => {
            let mut cfg = ExperimentConfig::from_file(&config)?;
            cfg.apply(&Overrides {
                out_dir: out,
                seed,
                repetitions,
                baseline,
            });
            let report = experiment::cmd_run(&cfg)?;
            for (method, hv) in &report.final_hypervolumes {
                println!("{method}\t{hv:.6}");
            }
            println!("aggregate: {}", report.aggregate.display());
            if report.all_completed {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("error: a run ended early because the evaluator failed");
                Ok(ExitCode::FAILURE)
            }
        }
        Cmd::Validate { config } => {
            let report = experiment::cmd_validate(&ExperimentConfig::from_file(&config)?);
            for c in &report.checks {
                println!("ok: {c}");
            }
            for p in &report.problems {
                println!("problem: {p}");
            }
            Ok(if report.ok() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Cmd::ServeSynthetic {
            suite,
            space,
            bias,
            noise_sd,
            seed,
        } => {
            let space = match space.parse::<usize>() {
                Ok(d) => SearchSpace::unit(d)?,
                Err(_) => SearchSpace::preset(&space)?,
            };
            let sources = make_synthetic_suite(&suite, space.dim(), bias, noise_sd, seed)?;
            let handshake = Handshake::new(
                &["f1", "f2"],
                sources
                    .iter()
                    .map(|s| serde_json::json!({"id": s.id, "cost": s.cost}))
                    .collect(),
            );
            let stdin = io::stdin();
            let served = protocol::serve(stdin.lock(), io::stdout().lock(), &handshake, |req| {
                let spec = sources
                    .iter()
                    .find(|s| s.id == req.source)
                    .ok_or_else(|| format!("unknown source {}", req.source))?;
                let SourceBinding::Synthetic(src) = &spec.binding else {
                    unreachable!("suites are synthetic")
                };
                let native = protocol::decode_values(&space, &req.values).map_err(|e| e.to_string())?;
                let u = space.encode(&native).map_err(|e| e.to_string())?;
                src.evaluate(&u, req.cv_seed).map_err(|e| e.to_string())
            })?;
            log::debug!("served {served} requests");
            Ok(ExitCode::SUCCESS)
        }
    }
}

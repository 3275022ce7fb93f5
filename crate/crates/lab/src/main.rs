use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use prlmc_lab::{run_experiment, Experiment, ExperimentConfig, RunOptions, Status, THREADS_ENV};

/// Run a PRLMC verification experiment.
///
/// Exit codes: 0 all verdicts pass, 1 a verdict failed, 2 inconclusive,
/// 3 configuration or validation error.
#[derive(Debug, Parser)]
#[command(name = "prlmc-lab", version)]
struct Cli {
    #[arg(value_enum)]
    experiment: Experiment,
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's master_seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output root; files go to `<out>/<experiment>/`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, env = THREADS_ENV)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match ExperimentConfig::load(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let config = match cli.seed {
        Some(s) => config.with_seed(s),
        None => config,
    };
    let out = cli.out.or_else(|| config.output.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let options = RunOptions {
        out: Some(out.clone()),
        threads: cli.threads,
    };
    match run_experiment(cli.experiment, &config, &options) {
        Ok(report) => {
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            for v in &report.verdicts {
                let tag = match v.status {
                    Status::Pass => "PASS",
                    Status::Fail => "FAIL",
                    Status::Inconclusive => "INCONCLUSIVE",
                };
                let bound = v.bound.map(|b| format!(" vs {b:.6}")).unwrap_or_default();
                println!("{tag:<12} {} [{:.6} ± {:.6}{bound}]", v.criterion, v.estimate, v.se);
            }
            println!("{}: {:?}, outputs in {}", cli.experiment, report.status, out.join(cli.experiment.name()).display());
            ExitCode::from(report.status.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

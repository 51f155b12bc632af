use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qsmc::runner::{self, Command, Options, RunConfig};

#[derive(Parser)]
#[command(name = "qsmc", version, about = "Quasi-stationary Monte Carlo for killed diffusions")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the integrability, lower-bound and spectral-gap conditions
    Check(Common),
    /// Tabulate the killing rate on a grid
    Kappa(Common),
    /// Run a killed ensemble and estimate the conditioned laws
    Simulate(Common),
    /// Eigenvalues of the discretized killed generator
    Spectrum(Common),
    /// Long-run moments of the Langevin (Q-process) diffusion
    Langevin(Common),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Built-in configuration (figure1, gaussian-bm, cauchy-bm, langevin-stationary)
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Cap on worker threads
    #[arg(long)]
    workers: Option<usize>,
}

fn load(c: &Common) -> qsmc::Result<RunConfig> {
    match (&c.config, &c.preset) {
        (Some(path), _) => {
            let src = std::fs::read_to_string(path)
                .map_err(|e| qsmc::Error::Config(format!("{}: {e}", path.display())))?;
            RunConfig::from_json(&src).map_err(|e| qsmc::Error::Config(format!("{}: {e}", path.display())))
        }
        (None, Some(name)) => RunConfig::preset(name),
        (None, None) => Err(qsmc::Error::Config("need --config or --preset".into())),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, common) = match &cli.command {
        Cmd::Check(c) => (Command::Check, c),
        Cmd::Kappa(c) => (Command::Kappa, c),
        Cmd::Simulate(c) => (Command::Simulate, c),
        Cmd::Spectrum(c) => (Command::Spectrum, c),
        Cmd::Langevin(c) => (Command::Langevin, c),
    };
    let opts = Options {
        out: common.out.clone(),
        seed: common.seed,
        workers: common.workers,
    };
    match load(common).and_then(|cfg| runner::run(cmd, &cfg, &opts)) {
        Ok(outcome) => {
            for line in &outcome.lines {
                println!("{line}");
            }
            ExitCode::from(outcome.exit)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(runner::exit_code(&e))
        }
    }
}

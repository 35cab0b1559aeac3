//! `blowup`: runs one experiment from a TOML configuration and writes its
//! CSV/JSON outputs, the config echo and a code hash under `--out`.
//!
//! Exit status: 0 success, 2 usage, 3 numerical or precondition failure,
//! 4 internal abort.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{Experiment, RunConfig};
use crate::error::{CliError, Result};
use crate::output::{OutputDir, CODE_HASH};

#[derive(Parser, Debug)]
#[command(name = "blowup", version, about = "Profiles, spectrum, modulation ODE and renormalised flow for type II blow-up")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output root; each command writes into `<out>/<command>/`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Worker threads for independent runs (ladder points, Brouwer cells).
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Correction ladder, profile fixtures and error-scaling slopes.
    Profiles,
    /// Negative eigenpair, Φ_M, dual direction and coercivity suite.
    Spectrum,
    /// One trajectory of the modulation system and its rate fit.
    Ode,
    /// Bisection on the unstable direction, then the rate fit.
    Shoot,
    /// One run of the decomposed flow with its diagnostics.
    Evolve,
    /// Exit map over (V2_tilde(0), tau_tilde(0)).
    Brouwer,
    /// Markdown report and plot CSVs from the other commands' outputs.
    Report,
}

impl Command {
    fn experiment(self) -> Experiment {
        match self {
            Self::Profiles => Experiment::Profiles,
            Self::Spectrum => Experiment::Spectrum,
            Self::Ode => Experiment::Ode,
            Self::Shoot => Experiment::Shoot,
            Self::Evolve => Experiment::Evolve,
            Self::Brouwer => Experiment::Brouwer,
            Self::Report => Experiment::Report,
        }
    }
}

fn run(cli: &Cli) -> Result<Vec<String>> {
    let loaded = RunConfig::load(cli.config.as_deref())?;
    let cfg = &loaded.config;
    let exp = cli.command.experiment();
    if let Some(e) = cfg.experiment {
        if e != exp {
            return Err(CliError::Usage(format!("config is for `{}` but `{}` was requested", e.name(), exp.name())));
        }
    }
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("--jobs: {e}")))?;
    }
    let root = cli.out.clone().or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let out = OutputDir::create(&root, exp, &loaded)?;
    eprintln!("blowup {}: code {}, writing to {}", exp.name(), &CODE_HASH[..12], out.path.display());
    match exp {
        Experiment::Profiles => commands::profiles::run(cfg, &out),
        Experiment::Spectrum => commands::spectrum::run(cfg, &out),
        Experiment::Ode => commands::ode::run_ode(cfg, &out),
        Experiment::Shoot => commands::ode::run_shoot(cfg, &out),
        Experiment::Evolve => commands::flow::run_evolve(cfg, &out),
        Experiment::Brouwer => commands::flow::run_brouwer(cfg, &out),
        Experiment::Report => commands::report::run(&root, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match std::panic::catch_unwind(|| run(&cli)) {
        Ok(Ok(lines)) => {
            for l in lines {
                println!("{l}");
            }
            ExitCode::SUCCESS
        }
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
        Err(_) => {
            eprintln!("error: internal abort");
            ExitCode::from(4)
        }
    }
}

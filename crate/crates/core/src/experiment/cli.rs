//! Command-line front end: `run`, `validate`, `predict`, `init`.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use super::config::{config_template, load_config, ExperimentKind, Validated};
use super::output::{write_outputs, write_predictions};
use super::runner::{predict, run_experiment};
use crate::error::Error;

#[derive(Debug, Parser)]
#[command(name = "clmls", version, about = "Constrained least-mean logarithmic square experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the simulations and write CSV curves, summary and plot script.
    Run(Common),
    /// Check a configuration and report the defaults it relies on.
    Validate(Common),
    /// Write theory-only curves and closed-form steady states.
    Predict(Common),
    /// Write a commented configuration template.
    Init {
        /// Destination of the template.
        #[arg(long, default_value = "experiment.toml")]
        config: PathBuf,
        /// Experiment whose defaults fill the template.
        #[arg(long, default_value = "exp1")]
        experiment: ExperimentKind,
        /// Overwrite an existing file.
        #[arg(long)]
        force: bool,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    /// Configuration file (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Override the base RNG seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the number of Monte-Carlo trials.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Override the output directory.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Worker threads for the trial pool (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config { .. } => 1,
        Error::Io(_) => 3,
        _ => 2,
    }
}

fn load(common: &Common) -> Result<Validated, Error> {
    let mut v = load_config(&common.config)?;
    if let Some(seed) = common.seed {
        v.config.seed = seed;
    }
    if let Some(trials) = common.trials {
        if trials == 0 {
            return Err(Error::Config { line: None, message: "--trials must be at least 1".into() });
        }
        v.config.trials = trials;
    }
    if let Some(dir) = &common.out_dir {
        v.config.output_dir = dir.clone();
    }
    Ok(v)
}

fn configure_threads(threads: Option<usize>) -> Result<(), Error> {
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidArgument(format!("cannot configure thread pool: {e}")))?;
    }
    Ok(())
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<(), Error> {
    match cli.command {
        Command::Validate(common) => {
            let v = load(&common)?;
            writeln!(out, "config ok: experiment {}", v.config.experiment)?;
            for d in &v.defaults_applied {
                writeln!(out, "  {d}")?;
            }
        }
        Command::Run(common) => {
            configure_threads(common.threads)?;
            let v = load(&common)?;
            let output = run_experiment(&v.config)?;
            for c in &output.curves {
                if c.result.diverged_trials > 0 {
                    eprintln!(
                        "warning: {} diverged in {} of {} trials",
                        c.label, c.result.diverged_trials, c.result.trials
                    );
                }
            }
            for path in write_outputs(&output, &v.config.output_dir)? {
                writeln!(out, "wrote {}", path.display())?;
            }
        }
        Command::Predict(common) => {
            configure_threads(common.threads)?;
            let v = load(&common)?;
            let predictions = predict(&v.config)?;
            for p in &predictions {
                if let Err(Error::InvalidRegime { discriminant }) = &p.closed_form {
                    eprintln!(
                        "warning: {} is outside the closed-form regime (discriminant {discriminant:e}); recursion curve still written",
                        p.label
                    );
                }
            }
            for path in write_predictions(&predictions, &v.config.output_dir)? {
                writeln!(out, "wrote {}", path.display())?;
            }
        }
        Command::Init { config, experiment, force } => {
            if config.exists() && !force {
                return Err(Error::Io(std::io::Error::new(
                    std::io::ErrorKind::AlreadyExists,
                    format!("{} already exists (use --force to overwrite)", config.display()),
                )));
            }
            std::fs::write(&config, config_template(experiment))?;
            writeln!(out, "wrote {}", config.display())?;
        }
    }
    Ok(())
}

/// Parses `std::env::args`, runs the command and maps errors to exit codes.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli, &mut std::io::stdout()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

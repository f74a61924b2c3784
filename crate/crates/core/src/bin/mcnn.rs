use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mcnn::cli::{cmd_eval, cmd_predict, cmd_synth, cmd_train, CliError, Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "mcnn", version, about = "Multiple-CNN training with additive hard-sample selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// JSON run config; defaults are used when omitted
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic PGM dataset with manifests
    Synth(RunArgs),
    /// Train an ensemble and write it to the output directory
    Train {
        #[command(flatten)]
        run: RunArgs,
        /// Confidence threshold for hard-sample selection
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Evaluate an ensemble on a labelled manifest
    Eval {
        #[arg(long)]
        ensemble: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        image_dir: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Predict classes for every image of a manifest
    Predict {
        #[arg(long)]
        ensemble: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        image_dir: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn resolve(run: &RunArgs, threshold: Option<f64>) -> Result<RunConfig, CliError> {
    let overrides = Overrides {
        seed: run.seed,
        out: run.out.clone(),
        threshold,
    };
    RunConfig::resolve(run.config.as_deref(), &overrides)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut stdout = std::io::stdout().lock();
    match cli.command {
        Command::Synth(run) => {
            cmd_synth(&resolve(&run, None)?, &mut stdout)?;
        }
        Command::Train { run, threshold } => {
            cmd_train(&resolve(&run, threshold)?, &mut stdout)?;
        }
        Command::Eval { ensemble, manifest, image_dir, out } => {
            cmd_eval(&ensemble, &manifest, image_dir.as_deref(), &out)?;
        }
        Command::Predict { ensemble, manifest, image_dir, out } => {
            cmd_predict(&ensemble, &manifest, image_dir.as_deref(), &out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

//! `qbayes` - train, calibrate and evaluate grid-posterior estimators for
//! quantum sensors from a declarative TOML config.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data/input error,
//! 4 numerical non-convergence.

use clap::{Args, Parser, Subcommand};
use qbayes_cli::commands;
use qbayes_cli::config::RunConfig;
use qbayes_cli::error::CliResult;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "qbayes", version, about = "Bayesian parameter estimation with a neural-network classifier")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Pipeline configuration (TOML).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory; defaults to `output.dir` from the config.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Override the config's seed for this command.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Replace existing output files.
    #[arg(long)]
    overwrite: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a training set from the configured model and allocation.
    GenData {
        #[command(flatten)]
        common: Common,
    },
    /// Train the classifier on a generated data set.
    Train {
        #[command(flatten)]
        common: Common,
        /// Training-set file; defaults to `<out>/<prefix>.train.txt`.
        #[arg(long, value_name = "PATH")]
        dataset: Option<PathBuf>,
    },
    /// Extract the training prior from a checkpoint.
    Prior {
        #[command(flatten)]
        common: Common,
        /// Checkpoint file; defaults to `<out>/<prefix>.qbnet`.
        #[arg(long, value_name = "PATH")]
        checkpoint: Option<PathBuf>,
        /// Training-set file (needed for the empirical likelihood source).
        #[arg(long, value_name = "PATH")]
        dataset: Option<PathBuf>,
        /// exact | empirical; defaults to `evaluation.likelihood_source`.
        #[arg(long, value_name = "SOURCE")]
        likelihood_source: Option<String>,
    },
    /// Estimate a phase from a measurement sequence.
    Estimate {
        #[command(flatten)]
        common: Common,
        /// Checkpoint file (network backend); defaults to `<out>/<prefix>.qbnet`.
        #[arg(long, value_name = "PATH")]
        checkpoint: Option<PathBuf>,
        /// Calibrated likelihood table (calibration backend).
        #[arg(long, value_name = "PATH", conflicts_with = "checkpoint")]
        calibration: Option<PathBuf>,
        /// Prior file; extracted from the checkpoint when omitted.
        #[arg(long, value_name = "PATH")]
        prior: Option<PathBuf>,
        /// File of measurement outcomes, one value per line.
        #[arg(long, value_name = "PATH")]
        sequence: Option<PathBuf>,
        /// Synthesize the sequence at this true phase (needs --m).
        #[arg(long, value_name = "THETA")]
        theta_true: Option<f64>,
        /// Length of the synthesized sequence.
        #[arg(long, value_name = "COUNT")]
        m: Option<usize>,
        /// Also write the full posterior curve to this file.
        #[arg(long, value_name = "PATH")]
        posterior_out: Option<PathBuf>,
    },
    /// Run Monte Carlo trials for the configured backend and emit CSV.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "PATH")]
        checkpoint: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        dataset: Option<PathBuf>,
    },
    /// Run network, calibration and oracle backends on shared sequences.
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "PATH")]
        checkpoint: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        dataset: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    match &cli.command {
        Command::GenData { common } => {
            let cfg = RunConfig::load(&common.config)?;
            commands::gen_data(&cfg, common.out.as_deref(), common.seed, common.overwrite)
        }
        Command::Train { common, dataset } => {
            let cfg = RunConfig::load(&common.config)?;
            commands::cmd_train(&cfg, dataset, common.out.as_deref(), common.seed, common.overwrite)
        }
        Command::Prior { common, checkpoint, dataset, likelihood_source } => {
            let cfg = RunConfig::load(&common.config)?;
            commands::cmd_prior(
                &cfg,
                checkpoint,
                dataset,
                likelihood_source.as_deref(),
                common.out.as_deref(),
                common.overwrite,
            )
        }
        Command::Estimate {
            common,
            checkpoint,
            calibration,
            prior,
            sequence,
            theta_true,
            m,
            posterior_out,
        } => {
            let cfg = RunConfig::load(&common.config)?;
            let args = commands::EstimateArgs {
                checkpoint: checkpoint.clone(),
                calibration: calibration.clone(),
                prior: prior.clone(),
                sequence: sequence.clone(),
                theta_true: *theta_true,
                m: *m,
                posterior_out: posterior_out.clone(),
            };
            commands::cmd_estimate(&cfg, &args, common.out.as_deref(), common.seed, common.overwrite)
        }
        Command::Evaluate { common, checkpoint, dataset } => {
            let cfg = RunConfig::load(&common.config)?;
            commands::cmd_evaluate(
                &cfg,
                checkpoint,
                dataset,
                common.out.as_deref(),
                common.seed,
                common.overwrite,
            )
        }
        Command::Compare { common, checkpoint, dataset } => {
            let cfg = RunConfig::load(&common.config)?;
            commands::cmd_compare(
                &cfg,
                checkpoint,
                dataset,
                common.out.as_deref(),
                common.seed,
                common.overwrite,
            )
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("qbayes: {e}");
        std::process::exit(e.exit_code());
    }
}

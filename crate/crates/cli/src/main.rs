//! `datamap` command-line tool.
//!
//! Exit codes: 0 success, 1 gradient check failed, 2 configuration error,
//! 3 I/O or input-format error, 4 numerical divergence.

mod artifacts;
mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use datamap::{ActivationKind, EnergyVariant, Scheme};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Diverged(String),
    CheckFailed(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::CheckFailed(_) => 1,
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Diverged(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
            CliError::Diverged(m) => write!(f, "numerical divergence: {m}"),
            CliError::CheckFailed(m) => write!(f, "check failed: {m}"),
        }
    }
}

impl From<datamap::Error> for CliError {
    fn from(e: datamap::Error) -> Self {
        use datamap::Error::*;
        match e {
            Io(_) | Format { .. } => CliError::Io(e.to_string()),
            NonFinite(_) | Diverged { .. } => CliError::Diverged(e.to_string()),
            Shape { .. } | InvalidParameter(_) | EmptyDataset => CliError::Config(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "datamap", version, about = "Train and inspect data-mapping RBMs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one layer on IDX images.
    TrainRbm {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        training: Training,
        #[command(flatten)]
        images: Images,
        /// Visible and hidden sizes, e.g. 784,49.
        #[arg(long)]
        shape: Option<String>,
        #[arg(long)]
        act_h: Option<ActivationKind>,
        #[arg(long)]
        act_v: Option<ActivationKind>,
    },
    /// Train a stack greedily, layer by layer.
    TrainStack {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        training: Training,
        #[command(flatten)]
        images: Images,
        /// Layer sizes from the input up, e.g. 784,784,196,49.
        #[arg(long)]
        stack: Option<String>,
        /// `relu-softsign` (relu first visible, identity other visible, softsign
        /// hidden) or `uniform` (--act-h / --act-v everywhere).
        #[arg(long)]
        layout: Option<String>,
        #[arg(long)]
        act_h: Option<ActivationKind>,
        #[arg(long)]
        act_v: Option<ActivationKind>,
    },
    /// Reconstruction error against hidden node count on the synthetic
    /// collinear sequences.
    CollinearityScan {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        scan: Scan,
    },
    /// Reconstruction error against feature dimension on the synthetic
    /// sequences.
    FeatureScan {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        scan: Scan,
    },
    /// Compare analytic gradients with numerical differentiation for every
    /// activation pair.
    Gradcheck {
        #[command(flatten)]
        common: Common,
        /// Instances per cell.
        #[arg(long)]
        seeds: Option<u64>,
    },
    /// Reconstruct images through a saved layer (.dmfd) or stack (.dmfs).
    Reconstruct {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        images: Images,
        #[arg(long)]
        model: Option<PathBuf>,
    },
}

#[derive(Args)]
pub struct Common {
    /// `key = value` file; flags override it.
    #[arg(long)]
    pub(crate) config: Option<PathBuf>,
    /// Output directory (default: $DATAMAP_OUT or `out`).
    #[arg(long)]
    pub(crate) out: Option<PathBuf>,
    #[arg(long)]
    pub(crate) seed: Option<u64>,
}

#[derive(Args)]
pub struct Training {
    #[arg(long)]
    pub(crate) scheme: Option<Scheme>,
    /// Default 0.01 for gd, 0.005 for fd.
    #[arg(long)]
    pub(crate) rate: Option<f64>,
    #[arg(long)]
    pub(crate) epochs: Option<usize>,
    #[arg(long)]
    pub(crate) energy: Option<EnergyVariant>,
    /// Visit samples in file order every epoch.
    #[arg(long)]
    pub(crate) no_shuffle: bool,
}

#[derive(Args)]
pub struct Images {
    /// IDX image file, optionally gzipped.
    #[arg(long)]
    pub(crate) data: Option<PathBuf>,
    /// Images before this index train, the rest are held out (default 9000).
    #[arg(long)]
    pub(crate) train_count: Option<usize>,
    /// Use only the first N training images.
    #[arg(long)]
    pub(crate) limit: Option<usize>,
    /// Average non-overlapping F×F pixel blocks.
    #[arg(long)]
    pub(crate) downsample: Option<usize>,
    /// Number of image triplets to write (default 10).
    #[arg(long)]
    pub(crate) triplets: Option<usize>,
}

#[derive(Args)]
pub struct Scan {
    #[arg(long)]
    pub(crate) scheme: Option<Scheme>,
    /// Weight step (default 0.002).
    #[arg(long)]
    pub(crate) rate: Option<f64>,
    /// Bias step is rate · bias-scale · d (default 1).
    #[arg(long)]
    pub(crate) bias_scale: Option<f64>,
    #[arg(long)]
    pub(crate) epochs: Option<usize>,
    /// Train on the raw sequences instead of per-row standardized ones.
    #[arg(long)]
    pub(crate) no_standardize: bool,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::TrainRbm {
            common,
            training,
            images,
            shape,
            act_h,
            act_v,
        } => commands::train_rbm(&common, &training, &images, shape, act_h, act_v),
        Command::TrainStack {
            common,
            training,
            images,
            stack,
            layout,
            act_h,
            act_v,
        } => commands::train_stack(&common, &training, &images, stack, layout, act_h, act_v),
        Command::CollinearityScan { common, scan } => commands::scan(&common, &scan, commands::ScanKind::Collinearity),
        Command::FeatureScan { common, scan } => commands::scan(&common, &scan, commands::ScanKind::Feature),
        Command::Gradcheck { common, seeds } => commands::gradcheck(&common, seeds),
        Command::Reconstruct { common, images, model } => commands::reconstruct(&common, &images, model),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("datamap: {e}");
            ExitCode::from(e.code())
        }
    }
}

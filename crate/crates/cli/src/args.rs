use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "relax", version, about = "Fixed points of controlled Lindblad dynamics")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    pub format: Format,
    /// Seed for every random draw.
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Where the model comes from: a JSON file, the two-spin scenario (when
/// `--gamma` or `--j` is given) or the one-spin scenario.
#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Model JSON file.
    #[arg(long, conflicts_with_all = ["gamma1", "gamma2", "gamma", "j"])]
    pub model: Option<PathBuf>,
    /// One-spin longitudinal rate 1/T1.
    #[arg(long)]
    pub gamma1: Option<f64>,
    /// One-spin transverse rate 1/T2.
    #[arg(long)]
    pub gamma2: Option<f64>,
    /// Two-spin damping rate.
    #[arg(long, conflicts_with_all = ["gamma1", "gamma2"])]
    pub gamma: Option<f64>,
    /// Two-spin ZZ coupling.
    #[arg(long, conflicts_with_all = ["gamma1", "gamma2"])]
    pub j: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ControlArgs {
    /// Control JSON file, or one of `spin`, `local`, `full`.
    #[arg(long)]
    pub control: Option<String>,
    /// Rotation rate about x (one-qubit models).
    #[arg(long, allow_negative_numbers = true)]
    pub ux: Option<f64>,
    /// Rotation rate about y (one-qubit models).
    #[arg(long, allow_negative_numbers = true)]
    pub uy: Option<f64>,
    /// Rotation rate about z (one-qubit models).
    #[arg(long, allow_negative_numbers = true)]
    pub uz: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fixed point of the (controlled) generator.
    FixedPoint {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        control: ControlArgs,
    },
    /// Coherence vector along a trajectory.
    Trajectory {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        control: ControlArgs,
        /// Final time.
        #[arg(long, default_value_t = 5.0)]
        t: f64,
        /// Number of output intervals.
        #[arg(long, default_value_t = 100)]
        steps: usize,
        /// Initial coherence vector, comma separated (default: maximally mixed).
        #[arg(long, allow_hyphen_values = true)]
        r0: Option<String>,
        /// Integrate with RK4 at this step instead of the exact flow.
        #[arg(long)]
        dt: Option<f64>,
    },
    /// Minimum-norm control amplitudes stabilizing a target state.
    Synthesize {
        #[command(flatten)]
        model: ModelArgs,
        /// Control generators: JSON file, or one of `spin`, `local`, `full`.
        #[arg(long)]
        control: Option<String>,
        /// Target coherence vector, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        target: String,
    },
    /// Fixed points for random control amplitudes.
    ManifoldSample {
        #[command(flatten)]
        model: ModelArgs,
        /// Control generators: JSON file, or one of `spin`, `local`, `full`.
        #[arg(long)]
        control: Option<String>,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Amplitudes are uniform on [-scale, scale].
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        /// Also report the Jacobian rank at each sample.
        #[arg(long)]
        rank: bool,
    },
    /// Random one-spin stabilized states and their ellipsoid residuals.
    Ellipsoid {
        #[arg(long, default_value_t = 1.0)]
        gamma1: f64,
        #[arg(long, default_value_t = 1.0)]
        gamma2: f64,
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[arg(long, default_value_t = 5.0)]
        scale: f64,
    },
    /// Two-spin entanglement of the driven fixed point versus coupling.
    SweepEntanglement {
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long, default_value_t = 0.01)]
        j_min: f64,
        #[arg(long, default_value_t = 1e4)]
        j_max: f64,
        #[arg(long, default_value_t = 25)]
        points: usize,
    },
    /// Stroboscopic steady state under a pulse train.
    Pulsed {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        control: ControlArgs,
        /// Pulse interval.
        #[arg(long)]
        dt: f64,
    },
    /// Check a model file and report its spectrum and fixed point.
    Validate {
        #[arg(long)]
        model: PathBuf,
    },
}

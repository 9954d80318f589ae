use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "weakamp", version, about = "Weak-measurement amplification under preselection noise")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Pointer shifts or meter reading for one PPS.
    Shift(ShiftArgs),
    /// Curve data for one of the six figures.
    Fig(FigArgs),
    /// Closed-form maxima over PPS (numerical for amplitude damping).
    Max(MaxArgs),
    /// Numerical maximization of one quantity over PPS.
    Optimize(OptimizeArgs),
    /// Oracle and optimizer batteries plus formula adjudication.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeterArg {
    Gaussian,
    Qubit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChannelArg {
    None,
    Depolarizing,
    PhaseDamping,
    AmplitudeDamping,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum QuantityArg {
    Dp,
    Dq,
    Reading,
}

#[derive(Debug, Clone, Args)]
pub struct ConfigArg {
    /// key=value file; flags given on the command line take precedence.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PrepArgs {
    /// Noise applied to the preselection.
    #[arg(long, value_enum, default_value_t = ChannelArg::None)]
    pub channel: ChannelArg,
    /// Noise strength, for --channel other than none.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Bloch modulus of the preselection, for --channel none.
    #[arg(long)]
    pub r: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct CouplingArgs {
    /// Absolute coupling (qubit meter).
    #[arg(long)]
    pub g: Option<f64>,
    /// Coupling in units of the momentum spread Dp = 1/(2 delta) (Gaussian meter).
    #[arg(long = "g-over-dp")]
    pub g_over_dp: Option<f64>,
    /// Position spread of the Gaussian pointer.
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true, allow_negative_numbers = true)]
pub struct ShiftArgs {
    #[arg(long, value_enum)]
    pub meter: MeterArg,
    #[command(flatten)]
    pub prep: PrepArgs,
    #[command(flatten)]
    pub coupling: CouplingArgs,
    #[arg(long)]
    pub theta1: f64,
    #[arg(long)]
    pub theta2: f64,
    #[arg(long, default_value_t = 0.0)]
    pub phi0: f64,
    #[command(flatten)]
    pub config: ConfigArg,
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true, allow_negative_numbers = true)]
pub struct FigArgs {
    /// Figure number.
    #[arg(value_parser = clap::value_parser!(u8).range(1..=6))]
    pub n: u8,
    /// Sweep points (default 101, or 21 for figures 5 and 6).
    #[arg(long)]
    pub steps: Option<usize>,
    /// First sweep value (default 0).
    #[arg(long)]
    pub start: Option<f64>,
    /// Last sweep value (default 1).
    #[arg(long)]
    pub stop: Option<f64>,
    /// Noise for figures 3 and 4: depolarizing or phase-damping.
    #[arg(long, value_enum)]
    pub channel: Option<ChannelArg>,
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    /// Output file; standard output when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArg,
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true, allow_negative_numbers = true)]
pub struct MaxArgs {
    #[arg(long, value_enum)]
    pub meter: MeterArg,
    #[command(flatten)]
    pub prep: PrepArgs,
    #[command(flatten)]
    pub coupling: CouplingArgs,
    #[command(flatten)]
    pub config: ConfigArg,
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true, allow_negative_numbers = true)]
pub struct OptimizeArgs {
    #[arg(long, value_enum)]
    pub meter: MeterArg,
    #[arg(long, value_enum)]
    pub quantity: QuantityArg,
    #[command(flatten)]
    pub prep: PrepArgs,
    #[command(flatten)]
    pub coupling: CouplingArgs,
    /// Coarse grid points per angle.
    #[arg(long = "grid-n", default_value_t = weakamp::optimizer::DEFAULT_GRID_N)]
    pub grid_n: usize,
    /// Stop when a refinement cycle gains less than this.
    #[arg(long, default_value_t = weakamp::optimizer::DEFAULT_TOL)]
    pub tol: f64,
    #[command(flatten)]
    pub config: ConfigArg,
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = weakamp::verify::DEFAULT_SEED)]
    pub seed: u64,
    /// Random inputs per meter in the oracle battery.
    #[arg(long, default_value_t = weakamp::verify::DEFAULT_SAMPLES)]
    pub samples: usize,
    /// Where to write the adjudication table.
    #[arg(long, default_value = "adjudication.csv")]
    pub csv: PathBuf,
    /// Scale one formula by 1 + REL, as FORMULA=REL (self-test of the batteries).
    #[arg(long, hide = true, value_name = "FORMULA=REL")]
    pub perturb: Option<String>,
    #[command(flatten)]
    pub config: ConfigArg,
}

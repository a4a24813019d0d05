use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug, Clone)]
#[command(
    name = "segfisher",
    version,
    about = "Fisher information of exponential families on a segment of means"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Evaluate J(θ) on a grid by every available route.
    InfoGrid(InfoGridArgs),
    /// Print the admissible θ interval and the segment spectrum.
    Domain(DomainArgs),
    /// Run a seeded Monte Carlo efficiency experiment.
    Efficiency(EfficiencyArgs),
    /// Run the built-in verification suite.
    Verify(VerifyArgs),
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyArg {
    Gaussian,
    Wishart,
    Ncwishart,
}

impl FamilyArg {
    pub fn as_str(self) -> &'static str {
        match self {
            FamilyArg::Gaussian => "gaussian",
            FamilyArg::Wishart => "wishart",
            FamilyArg::Ncwishart => "ncwishart",
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Circulant matrix with first row e_2 + e_d.
    Circulant,
    /// Tridiagonal matrix with ones on the off-diagonals.
    Tridiagonal,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Family and segment selection shared by the subcommands.
#[derive(Args, Debug, Clone, Default)]
pub struct SegmentArgs {
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    /// Wishart shape parameter.
    #[arg(long)]
    pub p: Option<f64>,
    /// Noncentrality matrix (JSON matrix file).
    #[arg(long = "a", value_name = "FILE")]
    pub noncentrality: Option<PathBuf>,
    /// Covariance/scale segment direction C.
    #[arg(long = "C", value_name = "FILE")]
    pub c_file: Option<PathBuf>,
    /// Covariance/scale segment offset D.
    #[arg(long = "D", value_name = "FILE")]
    pub d_file: Option<PathBuf>,
    /// Mean segment direction A.
    #[arg(long = "A", value_name = "FILE")]
    pub a_file: Option<PathBuf>,
    /// Mean segment offset B.
    #[arg(long = "B", value_name = "FILE")]
    pub b_file: Option<PathBuf>,
    /// Gaussian location (JSON array).
    #[arg(long = "u", value_name = "FILE")]
    pub u_file: Option<PathBuf>,
    /// Built-in direction matrix with identity offset.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Dimension for --preset.
    #[arg(long = "d")]
    pub dim: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct InfoGridArgs {
    #[command(flatten)]
    pub segment: SegmentArgs,
    /// Grid "start:stop:count".
    #[arg(long, allow_hyphen_values = true)]
    pub theta_grid: String,
    /// Anchor θ₀ selecting the domain component.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub theta0: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct DomainArgs {
    #[command(flatten)]
    pub segment: SegmentArgs,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub theta0: f64,
    /// Plain text when omitted.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct EfficiencyArgs {
    /// Experiment JSON; replaces all other experiment flags.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub segment: SegmentArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// "inverseA" or a JSON matrix file.
    #[arg(long = "estimator-C", value_name = "FILE|inverseA")]
    pub estimator_c: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct VerifyArgs {
    /// Comma-separated subset of gaussian, wishart, ncwishart.
    #[arg(long, value_delimiter = ',')]
    pub families: Vec<String>,
    #[arg(long, hide = true)]
    pub inject_fault: bool,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

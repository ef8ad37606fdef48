use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "lincfa", version, about = "Correlated feature aggregation for linear regression")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a partition on a CSV and write the reduced features.
    Reduce(ReduceArgs),
    /// Apply a saved partition to new data.
    Transform(TransformArgs),
    /// Generate a synthetic dataset.
    Synth(SynthArgs),
    /// Run the simulation experiments and check them.
    Validate(ValidateArgs),
    /// Score full, LinCFA and PCA models on a train/test split.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Empirical,
    Theoretical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ThresholdArg {
    Asymptotic,
    FiniteEqual,
    ConfEmpirical,
    ConfTheoretical,
}

#[derive(Debug, Clone, Args)]
pub struct ReducerArgs {
    #[arg(long, value_enum, default_value = "empirical")]
    pub mode: Mode,
    #[arg(long = "threshold", value_enum, default_value = "asymptotic")]
    pub threshold: ThresholdArg,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    /// Noise variance (theoretical mode).
    #[arg(long)]
    pub sigma2: Option<f64>,
    /// True weights in feature order, separated by commas or whitespace
    /// (theoretical mode).
    #[arg(long)]
    pub weights_file: Option<PathBuf>,
    /// Use the columns as given instead of standardizing them.
    #[arg(long)]
    pub no_standardize: bool,
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub target: String,
    #[command(flatten)]
    pub reducer: ReducerArgs,
    /// Reduced features, followed by the target column.
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long)]
    pub partition: PathBuf,
    /// Pair-by-pair decision log; defaults to `<partition stem>.decisions.csv`.
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub partition: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Column to pass through untouched instead of treating as a feature.
    #[arg(long)]
    pub target: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScenarioArg {
    #[value(name = "2d", alias = "bivariate")]
    TwoD,
    #[value(name = "3d", alias = "trivariate")]
    ThreeD,
    #[value(name = "ddim")]
    Ddim,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    pub scenario: ScenarioArg,
    #[arg(long)]
    pub n: usize,
    /// Noise standard deviation [default: 1 for 2d, 0.5 for 3d, 10 for ddim].
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Comma-separated true weights.
    #[arg(long, value_delimiter = ',')]
    pub w: Vec<f64>,
    #[arg(long, default_value_t = 0.7)]
    pub mix: f64,
    /// Feature count for ddim.
    #[arg(long = "dim", alias = "D", default_value_t = 100)]
    pub dim: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "y")]
    pub target_name: String,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ValidateScenario {
    #[value(name = "2d")]
    TwoD,
    #[value(name = "3d")]
    ThreeD,
    Ddim,
    ClosedForm,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ArmSet {
    /// Weights (0.2, 0.8) at sigma 0.5, 1, 10.
    Wide,
    /// Weights (0.47, 0.52) at sigma 0.5, 1, 10.
    Close,
    Both,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, value_enum)]
    pub scenario: ValidateScenario,
    #[arg(long, value_enum, default_value = "both")]
    pub arms: ArmSet,
    /// Repetitions [default: 500, 1000 for closed-form, 50 for ddim].
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.7)]
    pub mix: f64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub target: String,
    #[command(flatten)]
    pub reducer: ReducerArgs,
    #[arg(long, default_value_t = 1.0 / 3.0)]
    pub test_fraction: f64,
    /// Share of variance the PCA baseline keeps.
    #[arg(long, default_value_t = 0.95)]
    pub variance_fraction: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: PathBuf,
}

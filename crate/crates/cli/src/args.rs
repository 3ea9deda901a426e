use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "varjack",
    version,
    about = "Jackknife and B_k variance decompositions: exact, simulated and asymptotic",
    args_override_self = true,
    propagate_version = true
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Base seed; every estimator derives its streams from it.
    #[arg(long, global = true, env = "VARJACK_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Monte Carlo samples per estimate.
    #[arg(long, global = true, default_value_t = 10_000)]
    pub samples: usize,
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// TOML or JSON file of `flag = value` pairs; overrides command-line
    /// flags. A JSON manifest written by a previous run is accepted too.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact B_k, D^l B_k, J'_k, K'_k and Var S by enumeration.
    #[command(args_override_self = true)]
    Decompose(DecomposeArgs),
    /// Identity suite over a randomized batch of instances.
    #[command(args_override_self = true)]
    Verify(VerifyArgs),
    /// Monte Carlo estimates of B_k and Var S.
    #[command(args_override_self = true)]
    Estimate(EstimateArgs),
    /// Longest common subsequence experiments.
    #[command(subcommand)]
    Lcs(LcsCommand),
    /// J_k, K_k of G(normalised Rademacher sum) against their Gaussian limits.
    #[command(args_override_self = true)]
    Gaussian(GaussianArgs),
    /// A function with prescribed K_k, and the round trip through the engine.
    #[command(args_override_self = true)]
    Hoeffding(HoeffdingArgs),
    /// The hypercontractivity gap integral R(n).
    #[command(args_override_self = true)]
    Hyper(HyperArgs),
}

/// A product space and a function on it: either a JSON instance (inline or
/// a file) or one of the named families on i.i.d. coordinates.
#[derive(Debug, Clone, Args)]
pub struct InstanceArgs {
    /// JSON instance, inline (starting with `{`) or a path.
    #[arg(long)]
    pub instance: Option<String>,
    #[arg(long, value_enum, default_value_t = Family::Additive)]
    pub family: Family,
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    /// Law of every coordinate.
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.5")]
    pub probs: Vec<f64>,
    /// Real value of each atom; defaults to the atom index.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub values: Option<Vec<f64>>,
    /// Prefix length (`prefix`), chunk width (`tribes`), split (`lcs`) or
    /// coordinate (`dictator`).
    #[arg(long)]
    pub param: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Additive,
    Parity,
    Prefix,
    Dictator,
    Tribes,
    Lcs,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// Identity tolerance, relative to `max(1, Var, max|J'|, max|K'|)`;
    /// chosen per instance when absent.
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 50)]
    pub instances: usize,
    #[arg(long, default_value_t = 8)]
    pub max_n: usize,
    /// As for `decompose`.
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// Indices k to estimate; all of 1..=n when absent.
    #[arg(long, value_delimiter = ',')]
    pub k: Option<Vec<usize>>,
}

/// Two random words of length `n`: uniform over `alphabet` letters, or
/// binary with `P(1) = p`.
#[derive(Debug, Clone, Args)]
pub struct WordArgs {
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub alphabet: u32,
    #[arg(long)]
    pub p: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum LcsCommand {
    /// Var LC_n against the Efron–Stein and halved upper bounds.
    #[command(args_override_self = true)]
    Upper(WordArgs),
    /// B_2n(2n) and the variance lower bound 2n·B_2n (binary words).
    #[command(args_override_self = true)]
    Blast(WordArgs),
    /// B_1(2n) by single-letter resampling.
    #[command(args_override_self = true)]
    B1(WordArgs),
    /// Block-replacement statistic over a grid of word lengths.
    #[command(args_override_self = true)]
    Figure1(Figure1Args),
    /// Lower bound when x may use a letter that y never does.
    #[command(args_override_self = true)]
    Omitted(OmittedArgs),
    /// The explicit constant in the lower bound on limsup Var LC_n / n.
    #[command(args_override_self = true)]
    Varsup(VarsupArgs),
}

#[derive(Debug, Args)]
pub struct Figure1Args {
    /// Largest word length of the grid.
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    /// Grid step (and first length).
    #[arg(long, default_value_t = 10)]
    pub step: usize,
    #[arg(long, default_value_t = 1000)]
    pub replicas: usize,
    #[arg(long, default_value = "10")]
    pub w1: String,
    #[arg(long, default_value = "11")]
    pub w2: String,
    /// Paired letters (x_i, y_i) instead of blocks of x.
    #[arg(long)]
    pub paired: bool,
}

#[derive(Debug, Args)]
pub struct OmittedArgs {
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    /// Letters shared by both words; x also uses one extra letter.
    #[arg(long, default_value_t = 2)]
    pub alphabet: u32,
    /// Probability of the extra letter in x.
    #[arg(long, default_value_t = 0.1)]
    pub p: f64,
    #[arg(long, value_enum, default_value_t = BoundForm::Quadratic)]
    pub form: BoundForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundForm {
    Linear,
    Quadratic,
}

#[derive(Debug, Args)]
pub struct VarsupArgs {
    #[arg(long, default_value_t = 0.096)]
    pub p0: f64,
    /// Upper bound on the Chvátal–Sankoff constant at p = 1/2.
    #[arg(long, default_value_t = 0.8263)]
    pub gamma_half: f64,
}

#[derive(Debug, Args)]
pub struct GaussianArgs {
    /// Coefficients of G, constant term first.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        default_value = "0,0,1"
    )]
    pub coeffs: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "10,20,40,80")]
    pub ns: Vec<usize>,
    #[arg(long, default_value_t = 4)]
    pub kmax: usize,
}

#[derive(Debug, Args)]
pub struct HoeffdingArgs {
    /// Targets a_1, a_2, … for K_1, K_2, ….
    #[arg(long, value_delimiter = ',', default_value = "3,1,4,1,5")]
    pub targets: Vec<f64>,
    #[arg(long, default_value_t = 8)]
    pub n: usize,
}

#[derive(Debug, Args)]
pub struct HyperArgs {
    #[arg(long, default_value_t = 20)]
    pub max_n: usize,
}

//! Command-line grammar.

use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "lamplighter",
    version,
    about = "Spectral gaps, log-Sobolev constants and bound checks for lamplighter chains"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Spectral gap of the base, lamp or lamplighter chain.
    Gap(ChainArgs),
    /// Variational estimate of the log-Sobolev constant.
    Cls(ChainArgs),
    /// Evaluate every applicable bound and check their ordering.
    Verify(ChainArgs),
    /// Spectral profile of the base graph and the gap comparison at r = 1/2.
    Profile(ChainArgs),
    /// Exact Hypothesis (H) parameter of the base graph.
    #[command(name = "epsilon-h")]
    EpsilonH(ChainArgs),
    /// Test-function certificate for the lamplighter over the hypercube {0,1}^N.
    #[command(name = "hypercube-cert")]
    HypercubeCert(CertArgs),
    /// Table of gaps, bounds and certificates over a family of graphs.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Base,
    Lamps,
    Wreath,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Cycle,
    Complete,
    #[value(name = "hypercube-cert")]
    HypercubeCert,
}

#[derive(Debug, Clone, Args)]
#[command(group(
    ArgGroup::new("graph_source")
        .required(true)
        .args(["torus", "complete", "tree", "hypercube", "two_point", "graph"])
))]
pub struct GraphArgs {
    /// Discrete torus Z_N^D with side N (dimension from --dim).
    #[arg(long, value_name = "N")]
    pub torus: Option<usize>,
    /// Torus dimension.
    #[arg(long, value_name = "D", default_value_t = 1, requires = "torus")]
    pub dim: usize,
    /// Complete graph K_N with self-loops.
    #[arg(long, value_name = "N")]
    pub complete: Option<usize>,
    /// Complete B-ary tree with the max-degree lazy walk (depth from --depth).
    #[arg(long, value_name = "B", requires = "depth")]
    pub tree: Option<usize>,
    #[arg(long, value_name = "D", requires = "tree")]
    pub depth: Option<usize>,
    /// Hypercube {0,1}^N.
    #[arg(long, value_name = "N")]
    pub hypercube: Option<usize>,
    /// Two-point lazy walk.
    #[arg(long)]
    pub two_point: bool,
    /// Graph document in JSON.
    #[arg(long, value_name = "FILE")]
    pub graph: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct LampArgs {
    /// Lamp measure: uniform, bernoulli:P or gibbs:BETA.
    #[arg(
        long,
        value_name = "SPEC",
        default_value = "uniform",
        conflicts_with = "lamp_file"
    )]
    pub lamps: String,
    /// Flip rates: constant:C, bernoulli:P or heatbath. Defaults to the
    /// natural rates of the measure (constant 1/2, Bernoulli, heat bath).
    #[arg(long, value_name = "SPEC", conflicts_with = "lamp_file")]
    pub rates: Option<String>,
    /// Lamp-system document in JSON.
    #[arg(long, value_name = "FILE")]
    pub lamp_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Optimizer restarts.
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Relative tolerance of the optimizers and residual tolerance of the
    /// iterative eigensolver.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Largest lamplighter state space that may be enumerated.
    #[arg(long)]
    pub max_states: Option<usize>,
    /// Chains up to this many states use the dense eigensolver.
    #[arg(long)]
    pub dense_threshold: Option<usize>,
    /// Largest state space handed to the log-Sobolev optimizer.
    #[arg(long)]
    pub max_optimizer_states: Option<usize>,
    /// Largest base graph for exact Hypothesis (H) enumeration.
    #[arg(long)]
    pub max_h_vertices: Option<usize>,
    /// Largest base graph for spectral-profile enumeration.
    #[arg(long)]
    pub max_profile_vertices: Option<usize>,
    /// Absolute slack on bound orderings.
    #[arg(long, default_value_t = 1e-9)]
    pub slack: f64,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Write the report here instead of standard output.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Args)]
pub struct ChainArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub lamps: LampArgs,
    /// Chain to analyse. Defaults to base for gap, wreath for cls.
    #[arg(long, value_enum)]
    pub target: Option<Target>,
    /// Profile radius.
    #[arg(long, default_value_t = 0.5)]
    pub r: f64,
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CertArgs {
    /// Hypercube dimension, even.
    #[arg(long, value_name = "N")]
    pub n: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    /// Sizes as A:B:STEP, A:B or a comma-separated list.
    #[arg(long, value_name = "RANGE")]
    pub n: String,
    /// Comma-separated columns to emit besides n and error.
    #[arg(long, value_name = "COLUMNS")]
    pub emit: Option<String>,
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

use clap::{Args, Parser, Subcommand, ValueEnum};
use finitary::representation::parse_seed;
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(name = "finitary", version = env!("FINITARY_GIT_DESCRIBE"), about = "Crossing, cluster and threshold experiments for finitary random fields on Z^2")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Global {
    /// JSON or TOML experiment config; flags given here override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_parser = ["bernoulli", "majority", "ising"])]
    pub model: Option<String>,
    /// Master seed, decimal or 0x-prefixed hex.
    #[arg(long, global = true, value_parser = parse_seed)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub replicas: Option<u64>,
    /// Ising inverse temperature.
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    /// CFTP depth cap.
    #[arg(long = "tmax", global = true)]
    pub t_max: Option<u32>,
    /// Majority model threshold.
    #[arg(long, global = true)]
    pub threshold: Option<u32>,
    /// Directory for `<command>.csv` and `<command>.json`; stdout otherwise.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    #[default]
    Json,
}

/// The field parameter, as `h` or as `p = logistic(h)`.
#[derive(Args, Debug, Clone, Default)]
pub struct Param {
    #[arg(long, allow_hyphen_values = true, conflicts_with = "p")]
    pub h: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EventArg {
    /// Horizontal `+` crossing, ordinary adjacency.
    H,
    /// Vertical `+` crossing, ordinary adjacency.
    V,
    /// Horizontal `+` crossing, star adjacency.
    HStar,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ScaleArg {
    H,
    P,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Plus,
    MinusStar,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Crossing probability of `[0, n] × [0, m]` along an `h` grid.
    Crossing {
        #[arg(long)]
        n: Option<u32>,
        /// Box height; defaults to `n`.
        #[arg(long)]
        m: Option<u32>,
        #[arg(long, value_enum, default_value_t = EventArg::H)]
        event: EventArg,
        /// Comma-separated `h` values; overrides the config grid.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        h_grid: Option<Vec<f64>>,
        #[command(flatten)]
        param: Param,
    },
    /// Bisection for the critical parameter of one crossing event.
    Critical {
        #[arg(long)]
        n: Option<u32>,
        #[arg(long, value_enum, default_value_t = EventArg::H)]
        event: EventArg,
        #[arg(long, default_value_t = 0.5)]
        target: f64,
        #[arg(long, default_value_t = 0.01)]
        tol: f64,
        /// `lo,hi` in `h`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        bracket: Option<Vec<f64>>,
        #[arg(long, value_enum)]
        scale: Option<ScaleArg>,
    },
    /// Ordinary and star critical points and their sum.
    Matching {
        #[arg(long)]
        n: Option<u32>,
        #[arg(long, default_value_t = 0.01)]
        tol: f64,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        bracket: Option<Vec<f64>>,
        #[arg(long, value_enum)]
        scale: Option<ScaleArg>,
    },
    /// One-box finite-size criterion `P(V(3N, N)) < eps`.
    Fsc {
        #[arg(long = "big-n")]
        big_n: u32,
        #[arg(long)]
        eps: f64,
        #[command(flatten)]
        param: Param,
        #[arg(long, default_value_t = 50)]
        window: u32,
        #[arg(long, default_value_t = 20_000)]
        tail_replicas: u64,
    },
    /// Origin cluster size tail with an exponential fit.
    Tail {
        #[command(flatten)]
        param: Param,
        #[arg(long, default_value_t = 100)]
        window: u32,
        /// `lo,hi` size range of the fit.
        #[arg(long, value_delimiter = ',', default_values_t = [10u64, 100])]
        fit: Vec<u64>,
        #[arg(long, value_enum, default_value_t = KindArg::Plus)]
        kind: KindArg,
    },
    /// Coalescence-time tail of single-vertex CFTP (Ising only).
    Tau {
        #[command(flatten)]
        param: Param,
        #[arg(long, value_delimiter = ',')]
        fit: Option<Vec<u64>>,
    },
    /// Crossing probabilities across aspect ratios and sizes.
    Rsw {
        #[command(flatten)]
        param: Param,
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, 2.0, 3.0])]
        rhos: Vec<f64>,
        /// Box sizes; overrides the config list.
        #[arg(long, value_delimiter = ',')]
        ns: Option<Vec<u32>>,
    },
    /// Pivotal-index probabilities for `H(3n, n)`.
    Influence {
        #[arg(long)]
        n: Option<u32>,
        #[command(flatten)]
        param: Param,
        /// Sublattice spacing of the sampled indices (majority and Ising).
        #[arg(long, default_value_t = 4)]
        step: u32,
        /// Time depth of sampled space-time indices (Ising).
        #[arg(long, default_value_t = 8)]
        depth: u32,
    },
    /// Single-site conditional check of sampled Ising windows.
    Dlr {
        #[command(flatten)]
        param: Param,
        /// Window half-size.
        #[arg(long, default_value_t = 2)]
        window: u32,
    },
    /// Boundary influence and event-pair covariance decay.
    Mixing {
        #[command(subcommand)]
        mode: MixingMode,
    },
    /// Exact enumeration report for a small increasing event.
    Threshold {
        /// Builtin event name.
        #[arg(long, conflicts_with = "event_file")]
        event: Option<String>,
        /// Event table as JSON.
        #[arg(long)]
        event_file: Option<PathBuf>,
        #[command(flatten)]
        param: Param,
        /// Upper end of an interval report starting at the parameter.
        #[arg(long, allow_hyphen_values = true)]
        h2: Option<f64>,
    },
    /// Duality audit of sampled fields.
    Audit {
        #[arg(long)]
        n: Option<u32>,
        #[command(flatten)]
        param: Param,
    },
}

#[derive(Subcommand, Debug)]
pub enum MixingMode {
    /// `Δ(n)` at the origin between `+` and `−` boundary conditions (Ising only).
    Boundary {
        #[command(flatten)]
        param: Param,
        #[arg(long, value_delimiter = ',', default_values_t = [2u32, 4, 8])]
        ns: Vec<u32>,
    },
    /// Covariance of horizontal crossings of two boxes.
    Pair {
        #[command(flatten)]
        param: Param,
        #[arg(long, default_value_t = 16)]
        size: u32,
        #[arg(long, value_delimiter = ',', default_values_t = [0u32, 4, 16])]
        distances: Vec<u32>,
    },
}

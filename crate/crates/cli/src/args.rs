use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use constancy::models::FamilyId;
use constancy::monitoring::Standardizer;
use constancy::nulldist::{Functional, Resolution, DEFAULT_GRID, DEFAULT_REPS, DEFAULT_SEED};
use constancy::stats::{DEFAULT_EPSILON, DEFAULT_WINDOWS};

#[derive(Debug, Parser)]
#[command(
    name = "constancy",
    version,
    about = "Score-process monitoring for parameter constancy"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Seed for null tables, power studies and illustrations.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Matrix standardizing the score sums: expected, observed or robust.
    #[arg(long, global = true, default_value = "expected")]
    pub standardizer: Standardizer,
    /// Number of equal windows for the chi-squared tests.
    #[arg(long, global = true, default_value_t = DEFAULT_WINDOWS)]
    pub windows: usize,
    /// Trimming of the sd-weighted sup test.
    #[arg(long, global = true, default_value_t = DEFAULT_EPSILON)]
    pub epsilon: f64,
    /// Replications of a simulated null table.
    #[arg(long, global = true, default_value_t = DEFAULT_REPS)]
    pub reps: usize,
    /// Grid size of a simulated null table.
    #[arg(long, global = true, default_value_t = DEFAULT_GRID)]
    pub grid: usize,
    /// Directory for cached null tables.
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    /// Ignore `--cache-dir`.
    #[arg(long, global = true)]
    pub no_cache: bool,
    /// Also write the outputs as files into this directory.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// CSV file with a header row, or `builtin:tbs-sentences` / `builtin:tbs-ended`.
    pub data: String,
    #[arg(long)]
    pub family: FamilyId,
    /// Response column (default: the last column).
    #[arg(long)]
    pub response: Option<String>,
    /// First coordinate of a binormal pair (default: the column before the response).
    #[arg(long)]
    pub second: Option<String>,
    /// Regression covariate columns.
    #[arg(long, value_delimiter = ',')]
    pub covariates: Vec<String>,
    /// Do not prepend an intercept to the covariates.
    #[arg(long)]
    pub no_intercept: bool,
}

#[derive(Debug, Clone, Args)]
pub struct WeightArgs {
    /// constant, trend, jump:A, optimal, or file:PATH (CSV, one column per component).
    #[arg(long)]
    pub weight: Option<String>,
    /// Departure shapes for `--weight optimal`: jump:A[:B], trend[:C] or none, one per component or one for all.
    #[arg(long)]
    pub departure: Option<String>,
    /// Departure magnitudes for `--weight optimal`, one per component or one for all.
    #[arg(long, default_value = "1")]
    pub delta: String,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Maximum-likelihood fit.
    Fit(DataArgs),
    /// Monitoring path as CSV.
    Monitor {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        weight: WeightArgs,
        /// Plug-in path of a functional instead of the score path: mean or correlation.
        #[arg(long)]
        plugin: Option<String>,
    },
    /// Constancy tests.
    Test {
        #[command(flatten)]
        data: DataArgs,
        /// Comma list of a2, u, usum, t, c2, q, vmax.
        #[arg(long, value_delimiter = ',', required = true)]
        tests: Vec<String>,
        #[command(flatten)]
        weight: WeightArgs,
        /// Append triangle/parabola shape diagnostics.
        #[arg(long)]
        diagnose: bool,
    },
    /// Simulate (or load from the cache) a null table and summarise it.
    Nulltable {
        /// e.g. max-abs-bridge, max-sq-norm, sum-max-abs, cvm, max-abs-sd-weighted(0.05), max-abs-weighted(trend).
        #[arg(long)]
        functional: Functional,
        #[arg(long, default_value_t = 1)]
        p: usize,
        #[arg(long, default_value = "continuous")]
        resolution: Resolution,
    },
    /// Monte Carlo power under local alternatives.
    Power {
        #[arg(long)]
        family: FamilyId,
        /// Covariates per row of a regression family, intercept included.
        #[arg(long, default_value_t = 2)]
        covariates: usize,
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        theta0: Vec<f64>,
        #[arg(long, default_value_t = 200)]
        n: usize,
        /// Magnitudes; repeat for a grid. Each is one value or one per component.
        #[arg(long, allow_hyphen_values = true, required = true)]
        delta: Vec<String>,
        /// jump:A[:B], trend[:C] or none, one per component or one for all.
        #[arg(long)]
        shape: String,
        /// Comma list of a2, q, maxm, maxv, c2.
        #[arg(long, value_delimiter = ',', required = true)]
        tests: Vec<String>,
        /// Weight of q and maxv: constant, trend, jump:A or optimal.
        #[arg(long, default_value = "trend")]
        weight: String,
        /// 1-based component; all components when unset.
        #[arg(long)]
        component: Option<usize>,
        #[arg(long, default_value_t = 0.05)]
        level: f64,
        #[arg(long, default_value_t = 2000)]
        replications: usize,
    },
    /// Triangle and parabola fits to every path component.
    Diagnose(DataArgs),
    /// Regenerate one of the two synthetic experiments.
    Illustrate {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        which: u8,
        /// Gamma shape before the change in experiment 1.
        #[arg(long, default_value_t = crate::illustrate::DEFAULT_GAMMA_SHAPE)]
        gamma_shape: f64,
    },
}

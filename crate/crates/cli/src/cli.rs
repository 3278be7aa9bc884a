use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use metfraisse_core::Rat;

fn rat(s: &str) -> Result<Rat, String> {
    s.parse::<Rat>().map_err(|e| e.to_string())
}

fn positive_rat(s: &str) -> Result<Rat, String> {
    let r = rat(s)?;
    if r.is_positive() {
        Ok(r)
    } else {
        Err(format!("{} is not positive", r))
    }
}

/// Exact metric Fraisse theory: approximate isometries, intrinsic distances,
/// limit builds and their checks.
#[derive(Debug, Parser)]
#[command(name = "metfraisse", version)]
pub struct Cli {
    /// Print errors as `{"error": ...}` on stdout.
    #[arg(long, global = true)]
    pub json: bool,
    /// Write the result JSON here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Approximate isometry calculus.
    #[command(subcommand)]
    Apx(ApxCommand),
    /// Intrinsic distance between two tuples.
    Dk(DkArgs),
    /// Build a finite approximation of a limit.
    Build(BuildArgs),
    /// Check a build.
    Check(CheckArgs),
    /// Back-and-forth between two builds.
    Bf(BfArgs),
}

#[derive(Debug, Subcommand)]
pub enum ApxCommand {
    Validate {
        file: PathBuf,
    },
    /// `φψ` for `ψ: X ⇝ Y` and `φ: Y ⇝ Z`.
    Compose {
        psi: PathBuf,
        phi: PathBuf,
    },
    Inverse {
        psi: PathBuf,
    },
    /// Trivial extension along embeddings into larger spaces.
    Extend {
        psi: PathBuf,
        /// Metric space `X′ ⊇ X`.
        #[arg(long)]
        source: PathBuf,
        /// Metric space `Y′ ⊇ Y`.
        #[arg(long)]
        target: PathBuf,
        /// Images of the points of `X` in `X′`, comma separated.
        #[arg(long, value_delimiter = ',')]
        rows: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        cols: Vec<usize>,
    },
    /// Uniform margin by which `φ` strictly refines `ψ`.
    Refines {
        phi: PathBuf,
        psi: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DkClass {
    Metric,
    Banach,
}

#[derive(Debug, Args)]
pub struct DkArgs {
    pub class: DkClass,
    pub a: PathBuf,
    pub b: PathBuf,
    /// Diameter cap of the metric class.
    #[arg(long, value_parser = positive_rat, default_value = "1")]
    pub cap: Rat,
    #[arg(long, value_parser = positive_rat, default_value = "1/4")]
    pub grid: Rat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BuildClass {
    UrysohnSphere,
    Gurarij,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    pub class: BuildClass,
    #[arg(long, value_parser = positive_rat, default_value = "1/4")]
    pub grid: Rat,
    #[arg(long, default_value_t = 3)]
    pub max_n: usize,
    #[arg(long, default_value_t = 6)]
    pub max_m: usize,
    /// Largest `n·m` scheduled for tuples of two or more points.
    #[arg(long)]
    pub max_cells: Option<usize>,
    /// Tolerance floor of scheduled tasks.
    #[arg(long, value_parser = positive_rat, default_value = "1/8")]
    pub eps: Rat,
    /// Diameter cap (sphere, default 1) or largest constraint value and line
    /// norm (gurarij, default 2).
    #[arg(long, value_parser = positive_rat)]
    pub cap: Option<Rat>,
    /// 0 runs the canonical schedule; other values shuffle each level.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Generating tuples enumerated per size.
    #[arg(long)]
    pub tuple_budget: Option<usize>,
    /// Largest dimension of enumerated Banach tuples.
    #[arg(long, default_value_t = 2)]
    pub max_dim: usize,
    #[arg(long)]
    pub max_points: Option<usize>,
    #[arg(long)]
    pub max_tasks: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckKind {
    /// Re-verify the certificate.
    Certificate,
    /// One-point extensions over subsets of the certified prefix.
    Extension,
    /// Extend a partial isometry of the dense points by back-and-forth.
    Homogeneity,
    /// Extend an embedding `E → G` along `E ⊆ F`.
    Gurarij,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    pub what: CheckKind,
    pub build: PathBuf,
    #[arg(long, value_parser = positive_rat)]
    pub eps: Option<Rat>,
    /// Subset size for extension checks.
    #[arg(long, default_value_t = 3)]
    pub size: usize,
    /// Value grid for extension checks; defaults to the build grid.
    #[arg(long, value_parser = positive_rat)]
    pub grid: Option<Rat>,
    /// Number of dense points whose subsets are checked; defaults to the
    /// certified prefix.
    #[arg(long)]
    pub prefix: Option<usize>,
    /// Partial isometry on dense indices, as `x:y` pairs.
    #[arg(long, value_delimiter = ',')]
    pub map: Vec<String>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Gurarij fixture: `{"e", "f", "iota", "psi"}`.
    #[arg(long)]
    pub fixture: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BfArgs {
    /// A build or a metric space.
    pub m: PathBuf,
    pub n: PathBuf,
    /// Initial constraint: `{"pairs", "slack"}` or `{"cols", "apx"}`.
    #[arg(long, conflicts_with = "empty")]
    pub psi0: Option<PathBuf>,
    /// Start from the empty approximate isometry.
    #[arg(long)]
    pub empty: bool,
    #[arg(long, default_value_t = 8)]
    pub steps: usize,
    /// Floor for the half-distortion claimed by `θ`.
    #[arg(long, value_parser = rat, default_value = "0")]
    pub reserve: Rat,
    /// Report r-bijectivity on this many leading dense points.
    #[arg(long, default_value_t = 4)]
    pub prefix: usize,
}

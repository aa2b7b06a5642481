use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use riesz_spectrum::cover::DEFAULT_SCAN_LIMIT;
use riesz_spectrum::group::DEFAULT_MAX_GROUP_SIZE;

#[derive(Debug, Parser)]
#[command(
    name = "riesz-spectrum",
    version,
    about = "Sparse Riesz-product approximation and large-spectrum covers on finite abelian groups",
    after_help = "Exit codes: 0 success, 1 a bound or verification check failed, 2 input error."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List Spec_delta(f) with its Fourier coefficients.
    Spectrum {
        #[command(flatten)]
        input: Input,
        /// Threshold; any non-negative value is accepted.
        #[arg(long)]
        delta: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Approximate f by a non-negative combination of Riesz products.
    Approximate {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        eta: f64,
        #[arg(long, value_enum, default_value_t = Method::Mirror)]
        method: Method,
        /// Largest expansion written out term by term.
        #[arg(long, default_value_t = 10_000)]
        max_terms: u64,
        #[command(flatten)]
        range: Range,
        #[command(flatten)]
        output: Output,
    },
    /// Cover Spec_delta(f) by a maximal disassociated subset.
    Chang {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        delta: f64,
        /// Build the cover from the frequencies of a sparse approximation
        /// (groups Z_2^n only).
        #[arg(long)]
        f2: bool,
        #[command(flatten)]
        range: Range,
        #[command(flatten)]
        output: Output,
    },
    /// Find a large subset of Spec_delta(f) covered by a low-degree Riesz term.
    Bloom {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        delta: f64,
        /// Expansion terms scored before the search falls back to a greedy path.
        #[arg(long, default_value_t = DEFAULT_SCAN_LIMIT)]
        scan_limit: usize,
        #[command(flatten)]
        range: Range,
        #[command(flatten)]
        output: Output,
    },
    /// Write every element of Spec_delta(f) as a short signed tuple.
    WeakChang {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        delta: f64,
        #[command(flatten)]
        range: Range,
        #[command(flatten)]
        output: Output,
    },
    /// Solve the entropy program with slack delta over all characters.
    Dual {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        delta: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Re-check a report written by another command.
    Verify {
        /// Report file to check.
        #[arg(long)]
        certificate: PathBuf,
        #[command(flatten)]
        input: Input,
        /// Expected command kind; defaults to the one recorded in the report.
        #[arg(long)]
        kind: Option<String>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Mirror descent followed by truncation.
    Mirror,
    /// Entropy program solved through its dual, then truncation.
    Dual,
}

#[derive(Clone, Debug, Args)]
pub struct Input {
    /// Group such as `Z4`, `Z2^3` or `Z8xZ3`.
    #[arg(long)]
    pub group: String,
    /// Density file, `uniform`, `indicator:<members or ratio>` or `random:<seed>`.
    #[arg(long, default_value = "uniform")]
    pub density: String,
    /// Rescale a density file to mean 1.
    #[arg(long)]
    pub normalize: bool,
    /// Seed for generated densities.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_GROUP_SIZE)]
    pub max_group_size: usize,
}

#[derive(Clone, Debug, Args)]
pub struct Output {
    /// Also write the report to this path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, Args)]
pub struct Range {
    /// Accept accuracies anywhere in (0, 1) instead of (0, 1/e^3).
    #[arg(long)]
    pub wide_range: bool,
}

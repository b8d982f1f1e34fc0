use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Transfer-operator analysis of matrix wavelet filters.
///
/// Exit codes: 0 success, 1 a check or precondition failed, 2 malformed
/// input or command line, 3 file system error.
#[derive(Debug, Parser)]
#[command(name = "transop", version)]
pub struct Cli {
    /// Directory receiving the reports.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// QMF residual, E(l) spectrum and invertibility sample.
    Validate {
        file: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Midpoint grid for the determinant sample.
        #[arg(long, default_value_t = 64)]
        grid: usize,
    },
    /// Fixed space of the transfer operator on polynomials of degree ≤ K.
    Harmonic {
        file: PathBuf,
        /// Degree bound K; defaults to the invariance bound.
        #[arg(long)]
        degree: Option<usize>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Star products, cascades, cylinder measures and martingales.
    Analyze {
        #[command(subcommand)]
        sub: Analyze,
    },
}

#[derive(Debug, Subcommand)]
pub enum Analyze {
    /// Star-product table `‖b_i ∗ b_j‖` over the fixed-space basis.
    Star(StarArgs),
    /// Infinite product, scaling function and correlation grids.
    Cascade(CascadeArgs),
    /// Cylinder measure of one word and its atom decomposition.
    Solenoid(SolenoidArgs),
    /// Martingale ratios along sampled paths.
    Martingale(MartingaleArgs),
}

#[derive(Debug, Args)]
pub struct StarArgs {
    pub file: PathBuf,
    /// Harmonic unit: a name from the file, or `identity`.
    #[arg(long, default_value = "identity")]
    pub h: String,
    #[arg(long)]
    pub degree: Option<usize>,
    /// Depth of the pointwise transfer iteration.
    #[arg(long, default_value_t = 14)]
    pub depth: usize,
    #[arg(long, default_value_t = 256)]
    pub grid: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct CascadeArgs {
    pub file: PathBuf,
    /// Grid step `N^-scale`.
    #[arg(long, default_value_t = 6)]
    pub scale: u32,
    /// Frequency window `[-range, range]`.
    #[arg(long, default_value_t = 4)]
    pub range: u64,
    /// Lattice bound for the correlation sums.
    #[arg(long, default_value_t = 200)]
    pub lattice: usize,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, default_value_t = 128)]
    pub kmax: usize,
}

#[derive(Debug, Args)]
pub struct SolenoidArgs {
    pub file: PathBuf,
    #[arg(long, default_value = "identity")]
    pub h: String,
    /// Base point: a decimal in [0, 1) or an exact fraction `a/N^e`.
    #[arg(long, default_value = "0")]
    pub x: String,
    /// Digits, comma separated (`0,1,1`) or one character each (`011`).
    #[arg(long, default_value = "")]
    pub word: String,
    #[arg(long, default_value_t = 1000)]
    pub truncation: u64,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Sampling {
    /// I.i.d. uniform digits.
    Uniform,
    /// Digits drawn from the trace measure of the cylinders.
    Measure,
}

impl Sampling {
    pub fn as_str(self) -> &'static str {
        match self {
            Sampling::Uniform => "uniform",
            Sampling::Measure => "measure",
        }
    }
}

#[derive(Debug, Args)]
pub struct MartingaleArgs {
    pub file: PathBuf,
    /// Denominator unit.
    #[arg(long, default_value = "identity")]
    pub h: String,
    /// Numerator harmonic.
    #[arg(long, default_value = "identity")]
    pub h0: String,
    #[arg(long, default_value = "0")]
    pub x: String,
    #[arg(long, default_value_t = 30)]
    pub depth: usize,
    #[arg(long, default_value_t = 200)]
    pub paths: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Sampling::Uniform)]
    pub sampling: Sampling,
}

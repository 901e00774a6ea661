use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub const DEFAULT_G: f64 = 0.5;
pub const DEFAULT_C1: f64 = 1.0;
pub const DEFAULT_C2: f64 = 0.0;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const SPECTRUM_RANGE: IndexRange = IndexRange { lo: 0, hi: 20 };
pub const ASYMPTOTICS_RANGE: IndexRange = IndexRange { lo: 8, hi: 512 };
pub const DEFAULT_SMAX: u32 = 20;
pub const DEFAULT_XGRID: &str = "0.1:100:200";
pub const DEFAULT_NMAX: usize = 100_000;
pub const DEFAULT_CAP: usize = 20;
pub const DEFAULT_POINTS: usize = 256;
pub const TOL_MIN: f64 = 1e-12;
pub const TOL_MAX: f64 = 1e-2;
pub const THREADS_ENV: &str = "JS_THREADS";

const AFTER_HELP: &str = "\
Defaults: --g 0.5 --c1 1 --c2 0 --tol 1e-10 --format csv
  spectrum     --n 0:20
  asymptotics  --n 8:512
  verify       --smax 20 --xgrid 0.1:100:200 --nmax 100000
  oracle       --cap 20 --points 256
Set JS_THREADS to cap worker threads (0 = all cores).";

/// Spectra and eigenvalue asymptotics of perturbed oscillator Jacobi matrices
#[derive(Debug, Parser)]
#[command(name = "jspec", version, after_help = AFTER_HELP)]
pub struct Cli {
    /// Print the default settings as JSON and exit
    #[arg(long)]
    pub defaults: bool,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Converged eigenvalues for an index range
    Spectrum(CommonArgs),
    /// Residuals against the asymptotic formula, with decay-rate fits
    Asymptotics(AsymptoticsArgs),
    /// Grid checks of the coefficient bounds and the similarity identity
    Verify(VerifyArgs),
    /// Cross-check closed forms against independent oracles
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Coupling g
    #[arg(long, default_value_t = DEFAULT_G, allow_hyphen_values = true)]
    pub g: f64,
    /// Diagonal shift on even indices
    #[arg(long, default_value_t = DEFAULT_C1, allow_hyphen_values = true)]
    pub c1: f64,
    /// Diagonal shift on odd indices
    #[arg(long, default_value_t = DEFAULT_C2, allow_hyphen_values = true)]
    pub c2: f64,
    /// Inclusive index range lo:hi (spectrum 0:20, asymptotics 8:512)
    #[arg(long, value_parser = parse_range)]
    pub n: Option<IndexRange>,
    /// Absolute eigenvalue tolerance, in [1e-12, 1e-2]
    #[arg(long, default_value_t = DEFAULT_TOL, value_parser = parse_tol)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write the table here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct AsymptoticsArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Replace r1, r2 and s_n by c * n^(-alpha), given as c:alpha
    #[arg(long, hide = true, value_parser = parse_power_law)]
    pub inject_power_law: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Largest Bessel order
    #[arg(long, default_value_t = DEFAULT_SMAX)]
    pub smax: u32,
    /// Log-spaced Bessel argument grid lo:hi:count
    #[arg(long, default_value = DEFAULT_XGRID, value_parser = parse_grid)]
    pub xgrid: LogGrid,
    /// Largest Laguerre degree
    #[arg(long, default_value_t = DEFAULT_NMAX)]
    pub nmax: usize,
    /// Negate the Bessel bound, to confirm that violations are reported
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Largest index compared (at most 30)
    #[arg(long, default_value_t = DEFAULT_CAP)]
    pub cap: usize,
    /// Trapezoid points on the contour
    #[arg(long, default_value_t = DEFAULT_POINTS)]
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IndexRange {
    pub lo: usize,
    pub hi: usize,
}

impl std::fmt::Display for IndexRange {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.lo, self.hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogGrid {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl LogGrid {
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.lo];
        }
        let span = (self.hi / self.lo).ln();
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.hi
                } else {
                    self.lo * (span * i as f64 / (self.count - 1) as f64).exp()
                }
            })
            .collect()
    }
}

fn parse_range(s: &str) -> Result<IndexRange, String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("expected lo:hi, got `{s}`"))?;
    let lo: usize = lo.trim().parse().map_err(|e| format!("bad lower index: {e}"))?;
    let hi: usize = hi.trim().parse().map_err(|e| format!("bad upper index: {e}"))?;
    if hi < lo {
        return Err(format!("empty range {lo}:{hi} (need hi >= lo)"));
    }
    Ok(IndexRange { lo, hi })
}

fn parse_tol(s: &str) -> Result<f64, String> {
    let tol: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if !(TOL_MIN..=TOL_MAX).contains(&tol) {
        return Err(format!("tolerance must lie in [{TOL_MIN:e}, {TOL_MAX:e}]"));
    }
    Ok(tol)
}

fn parse_grid(s: &str) -> Result<LogGrid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected lo:hi:count, got `{s}`"));
    }
    let lo: f64 = parts[0].parse().map_err(|e| format!("bad lo: {e}"))?;
    let hi: f64 = parts[1].parse().map_err(|e| format!("bad hi: {e}"))?;
    let count: usize = parts[2].parse().map_err(|e| format!("bad count: {e}"))?;
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) || count == 0 {
        return Err("grid needs 0 < lo <= hi and count >= 1".into());
    }
    Ok(LogGrid { lo, hi, count })
}

fn parse_power_law(s: &str) -> Result<(f64, f64), String> {
    let (c, a) = s.split_once(':').ok_or("expected c:alpha")?;
    let c: f64 = c.parse().map_err(|e| format!("{e}"))?;
    let a: f64 = a.parse().map_err(|e| format!("{e}"))?;
    if c.is_nan() || c <= 0.0 || !a.is_finite() {
        return Err("need c > 0 and finite alpha".into());
    }
    Ok((c, a))
}

/// Default settings, as printed by `--defaults`.
pub fn defaults_json() -> serde_json::Value {
    serde_json::json!({
        "g": DEFAULT_G,
        "c1": DEFAULT_C1,
        "c2": DEFAULT_C2,
        "tol": DEFAULT_TOL,
        "format": Format::Csv,
        "spectrum": { "n": SPECTRUM_RANGE.to_string() },
        "asymptotics": { "n": ASYMPTOTICS_RANGE.to_string() },
        "verify": { "smax": DEFAULT_SMAX, "xgrid": DEFAULT_XGRID, "nmax": DEFAULT_NMAX },
        "oracle": { "cap": DEFAULT_CAP, "points": DEFAULT_POINTS },
        "threads_env": THREADS_ENV,
    })
}

//! Comparison of computed eigenvalues with the asymptotic formula
//!
//! ```text
//!     λ_n = n - g^2 + (c1 + c2)/2 + (c1 - c2)/2 * R~[n][n] + O(s_n)
//! ```
//!
//! where `s_n^2 = sum_(k != n) R~[k][n]^2 / (n - k)^2` is the remainder sum, and the
//! decay-rate fits used to quantify how fast the residuals vanish.

use serde::{Deserialize, Serialize};

use crate::eigensolve::{converged_spectrum, SpectralRequest};
use crate::error::{Error, Result};
use crate::model::{r_tilde, ModelParams};
use crate::par;
use crate::specfun::LaguerreFunctions;

/// Default tail tolerance for [`remainder_s`] (bound on the error of `s_n`).
pub const DEFAULT_EPS_TAIL: f64 = 1e-8;
/// Minimum number of usable samples for [`fit_decay`].
pub const MIN_FIT_POINTS: usize = 8;

/// `n - g^2 + (c1 + c2)/2`.
pub fn first_order(n: usize, p: &ModelParams) -> f64 {
    n as f64 - p.g * p.g + p.mean_shift()
}

/// `(c1 - c2)/2 * R~[n][n]`, the diagonal term of the parity perturbation in the
/// `A0` eigenbasis.
pub fn diagonal_correction(n: usize, p: &ModelParams) -> f64 {
    p.parity_weight() * r_tilde(n, n, p.g)
}

/// Remainder sum `s_n` with a certified bound on the discarded tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Remainder {
    pub s_n: f64,
    /// The exact `s_n` lies in `[s_n, s_n + tail_bound]` (up to round-off).
    pub tail_bound: f64,
    /// Largest `|k - n|` included in the partial sum.
    pub cutoff: usize,
}

/// `s_n = sqrt(sum_(k != n) R~[k][n]^2 / (n-k)^2)` for coupling `g`.
///
/// Terms are added in shells `|k - n| = j`, using `|R~[n-j][n]| = w_(n-j)^(j)(4g^2)`
/// and `|R~[n+j][n]| = w_n^(j)(4g^2)`. Because column `n` of `R~` has unit norm, the
/// unseen mass after shell `K` is `1 - (seen mass)`, and the tail of the weighted sum
/// is at most that mass divided by `(K+1)^2`. Shells are added until the tail bound
/// drops below `eps_tail^2`.
pub fn remainder_s(n: usize, g: f64, eps_tail: f64) -> Remainder {
    if g == 0.0 {
        return Remainder {
            s_n: 0.0,
            tail_bound: 0.0,
            cutoff: 0,
        };
    }
    let x = 4.0 * g * g;
    let target = eps_tail * eps_tail;
    let w_nn = LaguerreFunctions::new(0, x).nth(n).unwrap_or(0.0);
    let mut mass = w_nn * w_nn;
    let mut sum = 0.0f64;
    let mut j = 0usize;
    loop {
        j += 1;
        let mut seq = LaguerreFunctions::new(j as u32, x);
        let (below, above) = if j <= n {
            let b = seq.nth(n - j).unwrap_or(0.0);
            let a = seq.nth(j - 1).unwrap_or(0.0);
            (b, a)
        } else {
            (0.0, seq.nth(n).unwrap_or(0.0))
        };
        let shell = below * below + above * above;
        mass += shell;
        sum += shell / (j * j) as f64;

        let jf = (j + 1) as f64;
        let slack = f64::EPSILON * (n + 2 * j + 1) as f64;
        let tail = ((1.0 - mass).max(0.0) + slack) / (jf * jf);
        if tail <= target || 1.0 / (jf * jf) <= target {
            return Remainder {
                s_n: sum.sqrt(),
                tail_bound: tail.min(1.0 / (jf * jf)).sqrt(),
                cutoff: j,
            };
        }
    }
}

/// One index of a residual table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticRow {
    pub n: usize,
    pub lambda: f64,
    pub first_order: f64,
    pub diag_corr: f64,
    /// `lambda - first_order`
    pub r1: f64,
    /// `r1 - diag_corr`
    pub r2: f64,
    pub s_n: f64,
    pub s_n_tail_bound: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualTable {
    pub params: ModelParams,
    pub tol: f64,
    pub truncation_n: usize,
    pub rows: Vec<AsymptoticRow>,
    /// At `g = 0` the asymptotic statement does not apply; rows are still filled.
    pub zero_coupling: bool,
}

impl ResidualTable {
    pub fn all_converged(&self) -> bool {
        self.rows.iter().all(|r| r.converged)
    }

    /// `(n, |field|)` pairs for rows whose value is above `floor`.
    pub fn abs_series(&self, field: impl Fn(&AsymptoticRow) -> f64, floor: f64) -> Vec<(usize, f64)> {
        self.rows
            .iter()
            .map(|r| (r.n, field(r).abs()))
            .filter(|&(_, v)| v > floor)
            .collect()
    }
}

/// Residual rows for `n_lo..=n_hi`, from truncation-converged eigenvalues.
pub fn residual_table(
    p: &ModelParams,
    n_lo: usize,
    n_hi: usize,
    tol: f64,
) -> Result<ResidualTable> {
    let req = SpectralRequest::new(n_lo, n_hi, tol)?;
    let spectrum = converged_spectrum(p, &req)?;
    let rows = par::map_range(0..req.len(), |i| {
        let n = n_lo + i;
        let lambda = spectrum.values[i];
        let first = first_order(n, p);
        let corr = diagonal_correction(n, p);
        let rem = remainder_s(n, p.g, DEFAULT_EPS_TAIL);
        AsymptoticRow {
            n,
            lambda,
            first_order: first,
            diag_corr: corr,
            r1: lambda - first,
            r2: lambda - first - corr,
            s_n: rem.s_n,
            s_n_tail_bound: rem.tail_bound,
            converged: spectrum.converged[i],
        }
    });
    Ok(ResidualTable {
        params: *p,
        tol,
        truncation_n: spectrum.truncation_n,
        rows,
        zero_coupling: p.g == 0.0,
    })
}

/// Least-squares fit of `value ≈ c * n^(-alpha)` in log-log coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub c: f64,
    pub alpha: f64,
    pub residual_rms: f64,
    pub n_range: (usize, usize),
    pub used: usize,
    /// Samples dropped for being non-positive, non-finite or at `n = 0`.
    pub dropped: usize,
}

pub fn fit_decay(pairs: &[(usize, f64)]) -> Result<DecayFit> {
    let pts: Vec<(f64, f64, usize)> = pairs
        .iter()
        .filter(|&&(n, v)| n > 0 && v > 0.0 && v.is_finite())
        .map(|&(n, v)| ((n as f64).ln(), v.ln(), n))
        .collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::TooFewPoints {
            needed: MIN_FIT_POINTS,
            got: pts.len(),
        });
    }
    let m = pts.len() as f64;
    let mean_t = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mean_t).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mean_t) * (p.1 - mean_y)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("decay fit needs at least two distinct n".into()));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_t;
    let rss: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let n_min = pts.iter().map(|p| p.2).min().unwrap_or(0);
    let n_max = pts.iter().map(|p| p.2).max().unwrap_or(0);
    Ok(DecayFit {
        c: intercept.exp(),
        alpha: -slope,
        residual_rms: (rss / m).sqrt(),
        n_range: (n_min, n_max),
        used: pts.len(),
        dropped: pairs.len() - pts.len(),
    })
}

/// Maximum of a sequence over the dyadic block `[2^exp, 2^(exp+1))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockMax {
    pub exp: u32,
    pub max: f64,
    pub count: usize,
}

/// Block maxima of `|value|` over dyadic blocks, in increasing block order. Blocks
/// without samples are omitted; `n = 0` is ignored.
pub fn dyadic_block_maxima(pairs: &[(usize, f64)]) -> Vec<BlockMax> {
    let mut blocks: Vec<BlockMax> = Vec::new();
    for &(n, v) in pairs {
        if n == 0 {
            continue;
        }
        let exp = usize::BITS - 1 - n.leading_zeros();
        match blocks.iter_mut().find(|b| b.exp == exp) {
            Some(b) => {
                b.max = b.max.max(v.abs());
                b.count += 1;
            }
            None => blocks.push(BlockMax {
                exp,
                max: v.abs(),
                count: 1,
            }),
        }
    }
    blocks.sort_by_key(|b| b.exp);
    blocks
}

/// True when block maxima are non-increasing for every block with `exp >= from_exp`.
pub fn blocks_non_increasing(blocks: &[BlockMax], from_exp: u32) -> bool {
    let tail: Vec<&BlockMax> = blocks.iter().filter(|b| b.exp >= from_exp).collect();
    tail.windows(2).all(|w| w[1].max <= w[0].max)
}

/// Smallest index `n0` such that `values` (indexed from `n_lo`) is strictly
/// increasing from `n0` on.
pub fn simplicity_onset(n_lo: usize, values: &[f64]) -> usize {
    let mut onset = n_lo;
    for (i, w) in values.windows(2).enumerate() {
        if w[1] <= w[0] {
            onset = n_lo + i + 1;
        }
    }
    onset
}

/// Median of `|r2| / |r1|` over rows with `n` in `[lo, hi]` and `r1 != 0`.
pub fn median_r2_over_r1(rows: &[AsymptoticRow], lo: usize, hi: usize) -> Option<f64> {
    let mut ratios: Vec<f64> = rows
        .iter()
        .filter(|r| r.n >= lo && r.n <= hi && r.r1 != 0.0)
        .map(|r| (r.r2 / r.r1).abs())
        .collect();
    if ratios.is_empty() {
        return None;
    }
    ratios.sort_by(|a, b| a.total_cmp(b));
    let m = ratios.len();
    Some(if m % 2 == 1 {
        ratios[m / 2]
    } else {
        0.5 * (ratios[m / 2 - 1] + ratios[m / 2])
    })
}

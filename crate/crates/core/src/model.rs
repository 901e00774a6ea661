//! The operator family `A(g, c1, c2)` and the closed-form objects built from it.
//!
//! * `A`: Jacobi matrix with diagonal `k + c1` (even k) / `k + c2` (odd k) and
//!   off-diagonal `g sqrt(k+1)`.
//! * `A0`: the shifted oscillator, `A` with `c1 = c2 = 0`; eigenvalues `n - g^2`.
//! * `R`: the parity matrix `diag((-1)^k)`, so `A = A0 + (c1+c2)/2 I + (c1-c2)/2 R`.
//! * `U`: eigenvectors of `A0`: `U[n][m] = w_n^(m-n)(g^2)` (column `m` is the
//!   eigenvector for `m - g^2`).
//! * `R~`: `U^T R U`, with the closed form `R~[k][m] = (-1)^k w_k^(m-k)(4 g^2)`.
//!
//! `U` and `R~` each come with independent oracles: a contour-integral
//! representation of `U`, the defining series `sum_n (-1)^n U[n][k] U[n][m]` for
//! `R~`, and the finite double-residue sum for `R~`.
//!
//! For negative `g` the closed forms pick up `sign(g)^(m-n)`; at `g = 0` everything
//! short-circuits to Kronecker deltas.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, Tridiagonal};
use crate::par;
use crate::specfun::{ln_factorial, ln_gamma_pos, omega, LaguerreFunctions};

/// Parameters `(g, c1, c2)` of the operator family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub g: f64,
    pub c1: f64,
    pub c2: f64,
}

impl ModelParams {
    pub fn new(g: f64, c1: f64, c2: f64) -> Result<Self> {
        if !(g.is_finite() && c1.is_finite() && c2.is_finite()) {
            return Err(Error::Domain(format!(
                "model parameters must be finite: g={g}, c1={c1}, c2={c2}"
            )));
        }
        Ok(Self { g, c1, c2 })
    }

    /// Coefficient of the identity in the splitting, `(c1 + c2) / 2`.
    pub fn mean_shift(&self) -> f64 {
        0.5 * (self.c1 + self.c2)
    }

    /// Coefficient of the parity matrix in the splitting, `(c1 - c2) / 2`.
    pub fn parity_weight(&self) -> f64 {
        0.5 * (self.c1 - self.c2)
    }
}

/// `N x N` section of `A(g, c1, c2)`.
pub fn build_a(p: &ModelParams, n: usize) -> Result<Tridiagonal> {
    if n < 2 {
        return Err(Error::Dimension { got: n, min: 2 });
    }
    let diag = (0..n)
        .map(|k| k as f64 + if k % 2 == 0 { p.c1 } else { p.c2 })
        .collect();
    let off = (0..n - 1).map(|k| p.g * ((k + 1) as f64).sqrt()).collect();
    Tridiagonal::new(diag, off)
}

/// `N x N` section of the shifted oscillator `A0(g)`.
pub fn build_a0(g: f64, n: usize) -> Result<Tridiagonal> {
    build_a(&ModelParams { g, c1: 0.0, c2: 0.0 }, n)
}

/// Diagonal of the parity matrix: `(-1)^k`, `k < N`.
pub fn parity_diag(n: usize) -> Vec<f64> {
    (0..n).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 }).collect()
}

#[inline]
fn alternating(p: usize) -> f64 {
    if p.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `sign(g)^p` for the odd-in-g factors of the closed forms.
#[inline]
fn g_sign_pow(g: f64, p: usize) -> f64 {
    if g < 0.0 {
        alternating(p)
    } else {
        1.0
    }
}

/// `U[n][m] = w_n^(m-n)(g^2)`: component `n` of the `A0` eigenvector with eigenvalue
/// `m - g^2`.
pub fn u_element(n: usize, m: usize, g: f64) -> f64 {
    if g == 0.0 {
        return if n == m { 1.0 } else { 0.0 };
    }
    g_sign_pow(g, n.abs_diff(m)) * omega(n, m as i64 - n as i64, g * g)
}

/// Largest degree accepted by the contour and finite-sum oracles for `U`.
pub const CONTOUR_MAX_INDEX: usize = 30;
/// Default trapezoid point count for [`u_element_contour`].
pub const CONTOUR_DEFAULT_POINTS: usize = 256;

/// `U[n][m]` from its contour-integral representation
///
/// ```text
///   U[n][m] = e^(-g^2/2) sqrt(m!/n!) g^(n-m) (1/2πi) ∮ x^(m-1) (1/x - 1)^n e^(g^2/x) dx
/// ```
///
/// evaluated by the `points`-point trapezoid rule on a circle `|x| = r` around the
/// origin. The integrand is analytic off the origin, so any radius gives the same
/// value; `r` is placed at the saddle of `r^m (1 + 1/r)^n e^(g^2/r)` so that the
/// rule does not recover a tiny coefficient from O(1) samples.
pub fn u_element_contour(n: usize, m: usize, g: f64, points: usize) -> Result<f64> {
    if points < 64 {
        return Err(Error::Domain(format!(
            "contour rule needs at least 64 points, got {points}"
        )));
    }
    if n > CONTOUR_MAX_INDEX || m > CONTOUR_MAX_INDEX {
        return Err(Error::Domain(format!(
            "contour oracle is limited to indices <= {CONTOUR_MAX_INDEX}, got ({n}, {m})"
        )));
    }
    if g == 0.0 {
        return Ok(if n == m { 1.0 } else { 0.0 });
    }
    let g2 = g * g;
    let radius = contour_radius(n, m, g2);
    let mut acc = Complex64::new(0.0, 0.0);
    let step = std::f64::consts::TAU / points as f64;
    for j in 0..points {
        let x = Complex64::from_polar(radius, step * j as f64);
        let w = x.inv() - 1.0;
        // integrand * dx / (2πi dθ) = x^m (1/x - 1)^n e^(g^2/x)
        acc += x.powu(m as u32) * w.powu(n as u32) * (x.inv() * g2).exp();
    }
    acc /= points as f64;
    let ln_pref = -0.5 * g2 + 0.5 * (ln_factorial(m) - ln_factorial(n))
        + (n as f64 - m as f64) * g.abs().ln();
    let pref = g_sign_pow(g, n.abs_diff(m)) * ln_pref.exp();
    let value = acc * pref;
    if value.im.abs() > 1e-8 {
        return Err(Error::ImaginaryResidue(value.im));
    }
    Ok(value.re)
}

fn contour_radius(n: usize, m: usize, g2: f64) -> f64 {
    if m == 0 {
        return 1.0 + n as f64 + g2;
    }
    // stationary point of m ln r + n ln(1 + 1/r) + g^2/r
    let mf = m as f64;
    let b = mf - n as f64 - g2;
    (-b + (b * b + 4.0 * mf * g2).sqrt()) / (2.0 * mf)
}

/// `R~[k][m] = (-1)^k w_k^(m-k)(4 g^2)`, the parity matrix in the `A0` eigenbasis.
pub fn r_tilde(k: usize, m: usize, g: f64) -> f64 {
    if g == 0.0 {
        return if k == m { alternating(k) } else { 0.0 };
    }
    alternating(k) * g_sign_pow(g, k.abs_diff(m)) * omega(k, m as i64 - k as i64, 4.0 * g * g)
}

/// Truncated defining series `sum_(n <= cutoff) (-1)^n U[n][k] U[n][m]`.
pub fn r_tilde_oracle_sum(k: usize, m: usize, g: f64, cutoff: usize) -> f64 {
    (0..=cutoff)
        .map(|n| alternating(n) * u_element(n, k, g) * u_element(n, m, g))
        .sum()
}

/// Smallest cutoff `K >= max(k, m)` with
/// `sum_(n > K) U[n][k]^2 + U[n][m]^2 < tail`, certified through the unit column
/// norms of `U`. Returns `None` if `max_cutoff` is reached first.
pub fn r_tilde_sum_cutoff(
    k: usize,
    m: usize,
    g: f64,
    tail: f64,
    max_cutoff: usize,
) -> Option<usize> {
    let mut mass_k = 0.0;
    let mut mass_m = 0.0;
    for n in 0..=max_cutoff {
        mass_k += u_element(n, k, g).powi(2);
        mass_m += u_element(n, m, g).powi(2);
        if n >= k.max(m) && (1.0 - mass_k) + (1.0 - mass_m) < tail {
            return Some(n);
        }
    }
    None
}

/// Largest index accepted by [`r_tilde_oracle_finite_sum`].
pub const FINITE_SUM_MAX_INDEX: usize = 40;

/// `R~[k][m]` from the finite double-residue sum
///
/// ```text
///   (-1)^k e^(-2g^2) sqrt(m!/k!) (2g)^(m-k) sum_(i=0..k) C(k,i) (-1)^i (4g^2)^i / (i+m-k)!
/// ```
///
/// with terms whose factorial argument is negative dropped.
pub fn r_tilde_oracle_finite_sum(k: usize, m: usize, g: f64) -> Result<f64> {
    if k > FINITE_SUM_MAX_INDEX || m > FINITE_SUM_MAX_INDEX {
        return Err(Error::Domain(format!(
            "finite-sum oracle is limited to indices <= {FINITE_SUM_MAX_INDEX}, got ({k}, {m})"
        )));
    }
    if g == 0.0 {
        return Ok(if k == m { alternating(k) } else { 0.0 });
    }
    let g2 = g * g;
    let x = 4.0 * g2;
    let i0 = k.saturating_sub(m);
    let shift = m as i64 - k as i64;
    let ln_pref = -2.0 * g2
        + 0.5 * (ln_factorial(m) - ln_factorial(k))
        + shift as f64 * (2.0 * g.abs()).ln();
    let ln_first = crate::specfun::ln_binomial(k, i0) + i0 as f64 * x.ln()
        - ln_gamma_pos((i0 as i64 + shift) as f64 + 1.0);
    let mut term = alternating(i0) * (ln_first + ln_pref).exp();
    // Neumaier-compensated sum of the alternating terms
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for i in i0..=k {
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
        let fi = i as f64;
        term *= -((k - i) as f64) / (fi + 1.0) * x / ((i as i64 + shift) as f64 + 1.0);
    }
    Ok(alternating(k) * g_sign_pow(g, k.abs_diff(m)) * (sum + comp))
}

/// Squared norm of column `m` of `U`, summed with a cutoff chosen from an a-priori
/// bound on the discarded entries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnNorm {
    pub sum_sq: f64,
    /// Largest row index included.
    pub cutoff: usize,
    /// Upper bound on the squared entries beyond `cutoff`.
    pub tail_bound: f64,
}

/// `sum_k U[k][m]^2`, truncated once the remaining entries are certified below
/// `tail`.
///
/// Rows `k = m + s` hold `+-w_m^(s)(g^2)`, and `|L_m^(s)(x)| <= C(m+s, m) e^(x/2)`
/// gives `|w_m^(s)(x)| <= b_s = x^(s/2) sqrt((m+s)!/m!) / s!`. The ratio
/// `b_(s+1)/b_s = sqrt(x (m+s+1)) / (s+1)` is decreasing in `s`, so once it is below
/// one the tail is dominated by a geometric series.
pub fn u_column_norm_sq(m: usize, g: f64, tail: f64, max_offset: usize) -> Result<ColumnNorm> {
    if tail.is_nan() || tail <= 0.0 {
        return Err(Error::Domain(format!("tail = {tail} must be positive")));
    }
    if g == 0.0 {
        return Ok(ColumnNorm {
            sum_sq: 1.0,
            cutoff: m,
            tail_bound: 0.0,
        });
    }
    let x = g * g;
    let mut sum: f64 = (0..=m).map(|k| u_element(k, m, g).powi(2)).sum();
    let mf = m as f64;
    let mut s = 0usize;
    loop {
        // certify the entries with offset > s
        let next = (s + 1) as f64;
        let ln_b = 0.5 * next * x.ln() + 0.5 * (ln_gamma_pos(mf + next + 1.0) - ln_gamma_pos(mf + 1.0))
            - ln_gamma_pos(next + 1.0);
        let ratio_sq = x * (mf + next + 1.0) / ((next + 1.0) * (next + 1.0));
        if ratio_sq < 1.0 {
            let bound = (2.0 * ln_b).exp() / (1.0 - ratio_sq);
            if bound < tail {
                return Ok(ColumnNorm {
                    sum_sq: sum,
                    cutoff: m + s,
                    tail_bound: bound,
                });
            }
        }
        if s >= max_offset {
            return Err(Error::InvalidRequest(format!(
                "column {m} tail not certified below {tail:e} within offset {max_offset}"
            )));
        }
        s += 1;
        sum += omega(m, s as i64, x).powi(2);
    }
}

/// Fills a dense section whose `(i, i+s)` and `(i+s, i)` entries come from
/// `w_i^(s)(x)`; `upper(i, s, w)` / `lower(i, s, w)` apply the sign conventions.
fn dense_from_laguerre_diagonals(
    n: usize,
    x: f64,
    upper: impl Fn(usize, usize, f64) -> f64 + Sync + Send,
    lower: impl Fn(usize, usize, f64) -> f64 + Sync + Send,
) -> DenseMatrix {
    let diagonals: Vec<Vec<f64>> = par::map_range(0..n, |s| {
        LaguerreFunctions::new(s as u32, x).take(n - s).collect()
    });
    let mut m = DenseMatrix::zeros(n, n);
    for (s, seq) in diagonals.iter().enumerate() {
        for (i, &w) in seq.iter().enumerate() {
            m.set(i, i + s, upper(i, s, w));
            if s > 0 {
                m.set(i + s, i, lower(i, s, w));
            }
        }
    }
    m
}

/// `N x N` section of `U`.
pub fn build_dense_u(n: usize, g: f64) -> DenseMatrix {
    if g == 0.0 {
        return DenseMatrix::identity(n);
    }
    // U[i][i+s] = sign^s w_i^(s);  U[i+s][i] = (-1)^s sign^s w_i^(s)
    dense_from_laguerre_diagonals(
        n,
        g * g,
        |_, s, w| g_sign_pow(g, s) * w,
        |_, s, w| alternating(s) * g_sign_pow(g, s) * w,
    )
}

/// `N x N` section of `R~`.
pub fn build_dense_rtilde(n: usize, g: f64) -> DenseMatrix {
    if g == 0.0 {
        return DenseMatrix::from_diagonal(&parity_diag(n));
    }
    // R~ is symmetric: both triangles carry (-1)^i sign^s w_i^(s)(4 g^2)
    let entry = move |i: usize, s: usize, w: f64| alternating(i) * g_sign_pow(g, s) * w;
    dense_from_laguerre_diagonals(n, 4.0 * g * g, entry, entry)
}

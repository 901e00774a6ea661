//! One step of the similarity transformation that removes the off-diagonal part of
//! `R~` at first order, and numerical checks of the three coefficient bounds it
//! relies on.
//!
//! With `D = diag(0, 1, 2, ...)`, `T = D + R~`, `D1 = D + diag(R~)`, `R1 = R~ - diag(R~)`
//! and `K[i][j] = R1[i][j] / (i - j)`, one has `[D, K] = R1` and
//!
//! ```text
//!     (I + K) T - D1 (I + K) = R1 - [D, K] + K R~ - diag(R~) K.
//! ```
//!
//! Column `n` of `K` has norm `s_n`, the remainder sum of the asymptotic formula.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::model::build_dense_rtilde;
use crate::par;
use crate::specfun::{bessel_j_unchecked, LaguerreFunctions};

/// Smallest section accepted by [`build_bundle`].
pub const MIN_BUNDLE_DIM: usize = 4;
/// Largest section accepted by [`build_bundle`].
pub const MAX_BUNDLE_DIM: usize = 2048;
/// Smallest section accepted by [`verify_similarity`].
pub const MIN_VERIFY_DIM: usize = 64;

/// The matrices of one similarity step at truncation `n`.
///
/// `D` and `D1` are diagonal and kept as vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalizationBundle {
    pub n: usize,
    pub g: f64,
    pub d: Vec<f64>,
    pub rt: DenseMatrix,
    pub d1: Vec<f64>,
    pub r1: DenseMatrix,
    pub k: DenseMatrix,
    pub b: DenseMatrix,
}

/// Builds the bundle for coupling `g` on an `n x n` section.
///
/// `K` is formed by dividing the off-diagonal of `R~` by `i - j`, and `R1` is then
/// taken as `K[i][j] * (i - j)`, so that `[D, K] = R1` holds entrywise in floating
/// point. `R1` agrees with the off-diagonal of `R~` to one rounding.
pub fn build_bundle(g: f64, n: usize) -> Result<DiagonalizationBundle> {
    if n < MIN_BUNDLE_DIM {
        return Err(Error::Dimension {
            got: n,
            min: MIN_BUNDLE_DIM,
        });
    }
    if n > MAX_BUNDLE_DIM {
        return Err(Error::IndexOutOfRange {
            index: n,
            limit: MAX_BUNDLE_DIM,
        });
    }
    if !g.is_finite() {
        return Err(Error::Domain(format!("g = {g} is not finite")));
    }
    let rt = build_dense_rtilde(n, g);
    let d: Vec<f64> = (0..n).map(|i| i as f64).collect();
    let rt_diag = rt.diagonal();
    let d1: Vec<f64> = d.iter().zip(&rt_diag).map(|(a, b)| a + b).collect();
    let k = DenseMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            rt.get(i, j) / (i as f64 - j as f64)
        }
    });
    let r1 = DenseMatrix::from_fn(n, n, |i, j| k.get(i, j) * (i as f64 - j as f64));
    let b = k.matmul(&rt).sub(&k.scale_rows(&rt_diag));
    Ok(DiagonalizationBundle {
        n,
        g,
        d,
        rt,
        d1,
        r1,
        k,
        b,
    })
}

impl DiagonalizationBundle {
    /// `R~` restricted to its diagonal.
    pub fn rt_diagonal(&self) -> Vec<f64> {
        self.rt.diagonal()
    }

    /// Largest `|K[i][j] (i - j) - R1[i][j]|`.
    pub fn commutator_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in 0..self.n {
                let lhs = self.k.get(i, j) * (i as f64 - j as f64);
                worst = worst.max((lhs - self.r1.get(i, j)).abs());
            }
        }
        worst
    }

    /// Largest `|K[i][j] + K[j][i]|`.
    pub fn antisymmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in 0..self.n {
                worst = worst.max((self.k.get(i, j) + self.k.get(j, i)).abs());
            }
        }
        worst
    }

    /// Largest `|R1[i][j] - R~[i][j]|` off the diagonal, and `|R1[i][i]|`.
    pub fn r1_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in 0..self.n {
                let want = if i == j { 0.0 } else { self.rt.get(i, j) };
                worst = worst.max((self.r1.get(i, j) - want).abs());
            }
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityReport {
    pub n: usize,
    /// Size of the leading block over which the defect is measured.
    pub block: usize,
    pub max_abs_defect: f64,
}

/// Checks the similarity identity on the leading `n/2` block, away from the
/// truncation edge.
pub fn verify_similarity(bundle: &DiagonalizationBundle) -> Result<SimilarityReport> {
    let n = bundle.n;
    if n < MIN_VERIFY_DIM {
        return Err(Error::Dimension {
            got: n,
            min: MIN_VERIFY_DIM,
        });
    }
    let block = n / 2;
    let mut t = bundle.rt.clone();
    for (i, di) in bundle.d.iter().enumerate() {
        t.set(i, i, t.get(i, i) + di);
    }
    let mut i_plus_k = bundle.k.clone();
    for i in 0..n {
        i_plus_k.set(i, i, i_plus_k.get(i, i) + 1.0);
    }
    let lhs = i_plus_k.matmul(&t).sub(&i_plus_k.scale_rows(&bundle.d1));
    let dk = bundle.k.scale_rows(&bundle.d).sub(&bundle.k.scale_cols(&bundle.d));
    let rhs = bundle.r1.sub(&dk).add(&bundle.b);
    Ok(SimilarityReport {
        n,
        block,
        max_abs_defect: lhs.max_abs_diff_block(&rhs, block),
    })
}

/// Norm of column `col` of `K`, which equals the remainder sum `s_col` truncated
/// to the section.
pub fn s_n_as_k_column(bundle: &DiagonalizationBundle, col: usize) -> Result<f64> {
    let limit = bundle.n / 2;
    if col >= limit {
        return Err(Error::IndexOutOfRange { index: col, limit });
    }
    Ok(bundle.k.column_norm(col))
}

/// The three coefficient bounds checked on grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LemmaId {
    /// `|J_s(x)| <= 2 sqrt(2/(pi x)) (1 + s/x)^s`
    BesselBound,
    /// `sup_n (n+1)^(1/4) |w_n^(s)(x)| < inf` on `n >= s^16`
    LaguerreBound,
    /// `|R~[n][n+p]| -> 0` as `n -> inf` for each fixed offset `p`
    OffsetDecay,
}

impl LemmaId {
    pub fn name(self) -> &'static str {
        match self {
            LemmaId::BesselBound => "bessel_bound",
            LemmaId::LaguerreBound => "laguerre_bound",
            LemmaId::OffsetDecay => "offset_decay",
        }
    }
}

/// A grid point where a bound check failed. `index` is the degree `n` where that
/// applies and 0 otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundViolation {
    pub order: i64,
    pub x: f64,
    pub index: usize,
    pub ratio: f64,
}

/// Supremum statistics of `q(n) = (n+1)^(1/4) |w_n^(s)(x)|` over admissible `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaguerreSup {
    pub s: u32,
    pub x: f64,
    pub n_start: usize,
    pub n_max: usize,
    pub sup: f64,
    pub argmax: usize,
    /// Maximum over `n >= n_max / 10`.
    pub last_decade_max: f64,
    /// Maximum over admissible `n < n_max / 10`; `None` when that range is empty.
    pub earlier_max: Option<f64>,
}

/// Dyadic block maxima of `|R~[n][n+p]|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffsetDecay {
    pub p: i64,
    pub first_exp: u32,
    pub block_maxima: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheckReport {
    pub lemma: LemmaId,
    /// False when the statement is vacuous for the given inputs (offset decay at
    /// `g = 0`).
    pub applicable: bool,
    pub grid_size: usize,
    /// Worst observed ratio; a value above 1 means a violation.
    pub max_ratio: f64,
    pub violations: Vec<BoundViolation>,
    pub laguerre: Vec<LaguerreSup>,
    pub offsets: Vec<OffsetDecay>,
}

impl BoundCheckReport {
    fn empty(lemma: LemmaId) -> Self {
        Self {
            lemma,
            applicable: true,
            grid_size: 0,
            max_ratio: 0.0,
            violations: Vec::new(),
            laguerre: Vec::new(),
            offsets: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// `2 sqrt(2/(pi x)) (1 + s/x)^s`, evaluated in the log domain.
pub fn bessel_bound(s: u32, x: f64) -> f64 {
    let sf = s as f64;
    let ln_b = std::f64::consts::LN_2 + 0.5 * (2.0 / (std::f64::consts::PI * x)).ln()
        + sf * (sf / x).ln_1p();
    ln_b.exp()
}

/// Checks `|J_s(x)| <= bessel_bound(s, x)` for `s = 0..=s_max` and every `x` in
/// the grid.
pub fn check_bessel_bound(s_max: u32, x_grid: &[f64]) -> Result<BoundCheckReport> {
    check_bessel_bound_with(s_max, x_grid, bessel_bound)
}

/// As [`check_bessel_bound`] with a caller-supplied bound.
pub fn check_bessel_bound_with<B>(s_max: u32, x_grid: &[f64], bound: B) -> Result<BoundCheckReport>
where
    B: Fn(u32, f64) -> f64 + Sync,
{
    if let Some(&x) = x_grid.iter().find(|x| !x.is_finite() || **x <= 0.0) {
        return Err(Error::Domain(format!("grid point x = {x} must be positive")));
    }
    let per_s = par::map_range(0..(s_max as usize + 1), |s| {
        let s = s as u32;
        x_grid
            .iter()
            .map(|&x| {
                let j = bessel_j_unchecked(s, x).abs();
                let b = bound(s, x);
                let ratio = if b > 0.0 { j / b } else { f64::INFINITY };
                (s, x, j <= b, ratio)
            })
            .collect::<Vec<_>>()
    });
    let mut report = BoundCheckReport::empty(LemmaId::BesselBound);
    for (s, x, ok, ratio) in per_s.into_iter().flatten() {
        report.grid_size += 1;
        report.max_ratio = report.max_ratio.max(ratio);
        if !ok {
            report.violations.push(BoundViolation {
                order: s as i64,
                x,
                index: 0,
                ratio,
            });
        }
    }
    Ok(report)
}

fn admissible_start(s: u32) -> Option<usize> {
    (s as u64).checked_pow(16).and_then(|v| usize::try_from(v).ok())
}

/// Samples `q(n) = (n+1)^(1/4) |w_n^(s)(x)|` for admissible `n` in
/// `[s^16, n_max]` and reports a violation when the maximum over the last decade
/// `[n_max/10, n_max]` exceeds the maximum before it.
pub fn check_laguerre_bound(x: f64, s_list: &[u32], n_max: usize) -> Result<BoundCheckReport> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain(format!("x = {x} must be positive")));
    }
    for &s in s_list {
        match admissible_start(s) {
            Some(n0) if n0 <= n_max => {}
            _ => return Err(Error::EmptyAdmissibleRange { s, n_max }),
        }
    }
    let stats = par::map_slice(s_list, |&s| laguerre_sup(x, s, n_max));
    let mut report = BoundCheckReport::empty(LemmaId::LaguerreBound);
    for st in stats {
        report.grid_size += st.n_max + 1 - st.n_start;
        let ratio = match st.earlier_max {
            Some(e) if e > 0.0 => st.last_decade_max / e,
            _ => 1.0,
        };
        report.max_ratio = report.max_ratio.max(ratio);
        if ratio > 1.0 {
            report.violations.push(BoundViolation {
                order: st.s as i64,
                x,
                index: st.argmax,
                ratio,
            });
        }
        report.laguerre.push(st);
    }
    Ok(report)
}

fn laguerre_sup(x: f64, s: u32, n_max: usize) -> LaguerreSup {
    let n_start = admissible_start(s).unwrap_or(n_max);
    let decade = n_max / 10;
    let mut sup = 0.0f64;
    let mut argmax = n_start;
    let mut last = 0.0f64;
    let mut earlier: Option<f64> = None;
    let mut seq = LaguerreFunctions::new(s, x);
    let mut w = seq.nth(n_start).unwrap_or(0.0);
    for n in n_start..=n_max {
        if n > n_start {
            w = seq.next().unwrap_or(0.0);
        }
        let q = ((n + 1) as f64).powf(0.25) * w.abs();
        if q > sup {
            sup = q;
            argmax = n;
        }
        if n >= decade {
            last = last.max(q);
        } else {
            earlier = Some(earlier.map_or(q, |e: f64| e.max(q)));
        }
    }
    LaguerreSup {
        s,
        x,
        n_start,
        n_max,
        sup,
        argmax,
        last_decade_max: last,
        earlier_max: earlier,
    }
}

/// For each offset `|p| <= p_max`, takes maxima of `|R~[n][n+p]|` over the
/// dyadic blocks `[2^j, 2^(j+1))`, `j = first_exp .. first_exp + n_blocks`, and
/// reports a violation whenever a block maximum fails to drop below the previous
/// one.
pub fn check_offset_decay(
    g: f64,
    p_max: usize,
    first_exp: u32,
    n_blocks: usize,
) -> Result<BoundCheckReport> {
    if !g.is_finite() {
        return Err(Error::Domain(format!("g = {g} is not finite")));
    }
    if n_blocks < 2 {
        return Err(Error::Domain("offset decay needs at least two blocks".into()));
    }
    if first_exp as usize + n_blocks > 40 {
        return Err(Error::Domain("block range exceeds 2^40".into()));
    }
    let mut report = BoundCheckReport::empty(LemmaId::OffsetDecay);
    if g == 0.0 {
        report.applicable = false;
        return Ok(report);
    }
    let x = 4.0 * g * g;
    let lo = 1usize << first_exp;
    let hi = 1usize << (first_exp as usize + n_blocks);
    let offsets: Vec<i64> = (-(p_max as i64)..=p_max as i64).collect();
    let rows = par::map_slice(&offsets, |&p| {
        // |R~[n][n+p]| = w_n^(p) for p > 0 and w_(n+p)^(|p|) for p < 0
        let s = p.unsigned_abs() as u32;
        let shift = if p < 0 { p.unsigned_abs() as usize } else { 0 };
        let mut maxima = vec![0.0f64; n_blocks];
        let mut seq = LaguerreFunctions::new(s, x);
        for deg in 0..hi {
            let w = seq.next().unwrap_or(0.0).abs();
            let n = deg + shift;
            if n < lo || n >= hi {
                continue;
            }
            let block = (usize::BITS - 1 - n.leading_zeros()) as usize - first_exp as usize;
            maxima[block] = maxima[block].max(w);
        }
        OffsetDecay {
            p,
            first_exp,
            block_maxima: maxima,
        }
    });
    for row in rows {
        report.grid_size += hi - lo;
        for (j, w) in row.block_maxima.windows(2).enumerate() {
            let ratio = if w[0] > 0.0 { w[1] / w[0] } else { f64::INFINITY };
            report.max_ratio = report.max_ratio.max(ratio);
            if ratio >= 1.0 {
                report.violations.push(BoundViolation {
                    order: row.p,
                    x,
                    index: 1usize << (first_exp as usize + j + 1),
                    ratio,
                });
            }
        }
        report.offsets.push(row);
    }
    Ok(report)
}

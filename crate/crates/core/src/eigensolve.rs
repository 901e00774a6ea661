//! Index-addressed eigenvalues of symmetric tridiagonal matrices by Sturm-sequence
//! bisection, and truncation-converged eigenvalues of the infinite operator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Tridiagonal;
use crate::model::{build_a, ModelParams};
use crate::par;

/// Smallest eigenvalue tolerance accepted in a [`SpectralRequest`].
pub const MIN_TOL: f64 = 1e-12;
/// Largest index span of a single request.
pub const MAX_SPAN: usize = 100_000;
/// Truncation size at which [`converged_spectrum`] gives up.
pub const MAX_TRUNCATION: usize = 1 << 21;

/// Number of eigenvalues of `t` strictly below `x`.
pub fn sturm_count(t: &Tridiagonal, x: f64) -> usize {
    sturm_count_with(t, x, pivot_floor(t))
}

fn pivot_floor(t: &Tridiagonal) -> f64 {
    let scale = t
        .diag()
        .iter()
        .map(|d| d.abs())
        .chain(t.off().iter().map(|e| e.abs()))
        .fold(1.0f64, f64::max);
    f64::EPSILON * scale
}

// LDL^T pivots of T - xI; the number of negative pivots is the count below x.
// A pivot that is (numerically) zero is replaced by +pivmin, i.e. x is nudged
// down infinitesimally, so an eigenvalue sitting exactly at x is not counted.
fn sturm_count_with(t: &Tridiagonal, x: f64, pivmin: f64) -> usize {
    let diag = t.diag();
    let off = t.off();
    let mut count = 0;
    let mut d = diag[0] - x;
    if d.abs() < pivmin {
        d = pivmin;
    }
    if d < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        let e = off[i - 1];
        d = (diag[i] - x) - e * e / d;
        if d.abs() < pivmin {
            d = pivmin;
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `n`-th smallest eigenvalue (0-based) of `t`, bisected until the bracket is
/// narrower than `tol` (or cannot be split further in double precision).
pub fn eigenvalue_by_index(t: &Tridiagonal, n: usize, tol: f64) -> Result<f64> {
    if n >= t.dim() {
        return Err(Error::IndexOutOfRange {
            index: n,
            limit: t.dim(),
        });
    }
    let (glo, ghi) = t.gershgorin();
    Ok(bisect(t, n, tol, glo, ghi, pivot_floor(t)))
}

fn bisect(t: &Tridiagonal, n: usize, tol: f64, lo: f64, hi: f64, pivmin: f64) -> f64 {
    // invariant: count(lo) <= n < count(hi)
    let span = hi - lo;
    let mut lo = lo - 1e-12 * span.max(1.0);
    let mut hi = hi + 1e-12 * span.max(1.0);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count_with(t, mid, pivmin) > n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Eigenvalues `n_lo..=n_hi` of `t`; indices are solved independently (in parallel
/// when enabled).
pub fn eigenvalues_by_index(
    t: &Tridiagonal,
    n_lo: usize,
    n_hi: usize,
    tol: f64,
) -> Result<Vec<f64>> {
    if n_hi >= t.dim() {
        return Err(Error::IndexOutOfRange {
            index: n_hi,
            limit: t.dim(),
        });
    }
    let (glo, ghi) = t.gershgorin();
    let pivmin = pivot_floor(t);
    Ok(par::map_range(n_lo..n_hi + 1, |n| {
        bisect(t, n, tol, glo, ghi, pivmin)
    }))
}

/// Inclusive index range and absolute tolerance for [`converged_spectrum`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralRequest {
    pub n_lo: usize,
    pub n_hi: usize,
    pub tol: f64,
}

impl SpectralRequest {
    pub fn new(n_lo: usize, n_hi: usize, tol: f64) -> Result<Self> {
        if n_hi < n_lo {
            return Err(Error::InvalidRequest(format!(
                "empty index range {n_lo}:{n_hi}"
            )));
        }
        if n_hi - n_lo > MAX_SPAN {
            return Err(Error::InvalidRequest(format!(
                "index span {} exceeds {MAX_SPAN}",
                n_hi - n_lo
            )));
        }
        if !tol.is_finite() || tol < MIN_TOL {
            return Err(Error::InvalidRequest(format!(
                "tolerance {tol:e} is below the double-precision floor {MIN_TOL:e}"
            )));
        }
        Ok(Self { n_lo, n_hi, tol })
    }

    pub fn len(&self) -> usize {
        self.n_hi - self.n_lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Eigenvalues `λ_n` of the infinite operator for a contiguous index range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSlice {
    pub n_lo: usize,
    /// `λ_n` for `n = n_lo, n_lo + 1, ...`, from the `truncation_n` section.
    pub values: Vec<f64>,
    pub truncation_n: usize,
    pub converged: Vec<bool>,
    /// `|λ_n(N) - λ_n(N/2)|` with `N = truncation_n`.
    pub est_error: Vec<f64>,
}

impl SpectrumSlice {
    pub fn indices(&self) -> std::ops::Range<usize> {
        self.n_lo..self.n_lo + self.values.len()
    }

    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&c| c)
    }

    pub fn get(&self, n: usize) -> Option<f64> {
        n.checked_sub(self.n_lo)
            .and_then(|i| self.values.get(i).copied())
    }
}

/// Initial truncation size for a request reaching index `n_hi`.
pub fn initial_truncation(n_hi: usize) -> usize {
    (2 * n_hi + 64).max(256)
}

/// Eigenvalues of `A(g, c1, c2)` on the requested index range, doubling the
/// truncation until consecutive sections agree to `req.tol` for every index.
///
/// Indices that still disagree at [`MAX_TRUNCATION`] are returned with
/// `converged = false`.
pub fn converged_spectrum(p: &ModelParams, req: &SpectralRequest) -> Result<SpectrumSlice> {
    if p.g == 0.0 {
        if let Some(slice) = diagonal_spectrum(p, req)? {
            return Ok(slice);
        }
    }
    let bisect_tol = req.tol / 16.0;
    let mut size = initial_truncation(req.n_hi);
    let mut previous = eigenvalues_by_index(&build_a(p, size)?, req.n_lo, req.n_hi, bisect_tol)?;
    loop {
        let next_size = 2 * size;
        let current =
            eigenvalues_by_index(&build_a(p, next_size)?, req.n_lo, req.n_hi, bisect_tol)?;
        let est_error: Vec<f64> = current
            .iter()
            .zip(&previous)
            .map(|(a, b)| (a - b).abs())
            .collect();
        let converged: Vec<bool> = est_error.iter().map(|&e| e < req.tol).collect();
        if converged.iter().all(|&c| c) || next_size >= MAX_TRUNCATION {
            return Ok(SpectrumSlice {
                n_lo: req.n_lo,
                values: current,
                truncation_n: next_size,
                converged,
                est_error,
            });
        }
        previous = current;
        size = next_size;
    }
}

/// At `g = 0` the operator is diagonal and its spectrum is the sorted diagonal.
/// Entries past `n_hi + |c1 - c2| + 2` cannot move below index `n_hi`.
fn diagonal_spectrum(p: &ModelParams, req: &SpectralRequest) -> Result<Option<SpectrumSlice>> {
    let spread = (p.c1 - p.c2).abs().ceil();
    let needed = req.n_hi as f64 + spread + 2.0;
    if needed > MAX_TRUNCATION as f64 {
        return Ok(None);
    }
    let size = needed as usize;
    let mut diag = build_a(p, size.max(2))?.diag().to_vec();
    diag.sort_by(|a, b| a.total_cmp(b));
    let values = diag[req.n_lo..=req.n_hi].to_vec();
    Ok(Some(SpectrumSlice {
        n_lo: req.n_lo,
        truncation_n: size.max(2),
        converged: vec![true; values.len()],
        est_error: vec![0.0; values.len()],
        values,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_a0;
    use proptest::prelude::*;

    fn tri(diag: &[f64], off: &[f64]) -> Tridiagonal {
        Tridiagonal::new(diag.to_vec(), off.to_vec()).unwrap()
    }

    #[test]
    fn counts_on_diagonal_matrix() {
        let t = tri(&[0.0, 1.0, 2.0], &[0.0, 0.0]);
        assert_eq!(sturm_count(&t, 1.5), 2);
        assert_eq!(sturm_count(&t, 1.0), 1);
        let (lo, hi) = t.gershgorin();
        assert_eq!(sturm_count(&t, lo - 1.0), 0);
        assert_eq!(sturm_count(&t, hi + 1.0), 3);
    }

    #[test]
    fn counts_on_two_by_two() {
        let g = 0.8f64;
        let t = tri(&[0.0, 1.0], &[g]);
        let disc = (1.0 + 4.0 * g * g).sqrt();
        let (r0, r1) = ((1.0 - disc) / 2.0, (1.0 + disc) / 2.0);
        assert_eq!(sturm_count(&t, 0.5 * (r0 + r1)), 1);
        assert_eq!(sturm_count(&t, r0 - 1e-9), 0);
        assert_eq!(sturm_count(&t, r1 + 1e-9), 2);
        let tol = 1e-13;
        assert!((eigenvalue_by_index(&t, 0, tol).unwrap() - r0).abs() < tol);
        assert!((eigenvalue_by_index(&t, 1, tol).unwrap() - r1).abs() < tol);
    }

    #[test]
    fn diagonal_matrix_gives_sorted_entries() {
        let t = tri(&[3.0, -1.0, 7.0, 2.0], &[0.0; 3]);
        let want = [-1.0, 2.0, 3.0, 7.0];
        for (n, w) in want.iter().enumerate() {
            assert!((eigenvalue_by_index(&t, n, 1e-12).unwrap() - w).abs() < 1e-12);
        }
        assert!(eigenvalue_by_index(&t, 4, 1e-12).is_err());
    }

    #[test]
    fn shifted_oscillator_low_eigenvalues() {
        let g = 0.9;
        let t = build_a0(g, 300).unwrap();
        let tol = 1e-10;
        for n in 0..20 {
            let v = eigenvalue_by_index(&t, n, tol).unwrap();
            assert!((v - (n as f64 - g * g)).abs() < 10.0 * tol, "n={n}: {v}");
        }
    }

    #[test]
    fn request_validation() {
        assert!(SpectralRequest::new(5, 3, 1e-8).is_err());
        assert!(SpectralRequest::new(0, 3, 1e-13).is_err());
        assert!(SpectralRequest::new(0, MAX_SPAN + 1, 1e-8).is_err());
        assert!(SpectralRequest::new(0, 3, f64::NAN).is_err());
        assert_eq!(SpectralRequest::new(2, 4, 1e-8).unwrap().len(), 3);
    }

    #[test]
    fn uncoupled_spectrum_is_sorted_diagonal() {
        // diag = k + 2 (even k), k (odd k): {2, 1, 4, 3, 6, 5, ...} sorted
        let p = ModelParams::new(0.0, 2.0, 0.0).unwrap();
        let s = converged_spectrum(&p, &SpectralRequest::new(0, 3, 1e-10).unwrap()).unwrap();
        assert_eq!(s.values, vec![1.0, 2.0, 3.0, 4.0]);
        assert!(s.all_converged());

        // even k -> k - 5, odd k -> k + 3
        let p = ModelParams::new(0.0, -5.0, 3.0).unwrap();
        let s = converged_spectrum(&p, &SpectralRequest::new(0, 11, 1e-10).unwrap()).unwrap();
        let want = [-5.0, -3.0, -1.0, 1.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0];
        assert_eq!(s.values, want.to_vec());
    }

    #[test]
    fn equal_shift_spectrum_is_exact() {
        let p = ModelParams::new(0.6, 0.3, 0.3).unwrap();
        let s = converged_spectrum(&p, &SpectralRequest::new(10, 10, 1e-8).unwrap()).unwrap();
        assert!((s.values[0] - 9.94).abs() < 1e-7);
        assert_eq!(s.get(10), Some(s.values[0]));
        assert_eq!(s.get(9), None);
    }

    #[test]
    fn lowest_eigenvalue_is_inside_gershgorin() {
        let p = ModelParams::new(0.5, 1.0, 0.0).unwrap();
        let s = converged_spectrum(&p, &SpectralRequest::new(0, 0, 1e-10).unwrap()).unwrap();
        let (lo, _) = build_a(&p, s.truncation_n).unwrap().gershgorin();
        assert!(s.values[0] >= lo && s.values[0] < p.c1);
    }

    #[test]
    fn truncation_error_shrinks_with_doubling() {
        let p = ModelParams::new(1.0, 0.5, -0.5).unwrap();
        let n = 40;
        let sizes = [44usize, 48, 56, 72];
        let vals: Vec<f64> = sizes
            .iter()
            .map(|&m| eigenvalue_by_index(&build_a(&p, m).unwrap(), n, 0.0).unwrap())
            .collect();
        let reference = eigenvalue_by_index(&build_a(&p, 400).unwrap(), n, 0.0).unwrap();
        let errs: Vec<f64> = vals.iter().map(|v| (v - reference).abs()).collect();
        for w in errs.windows(2) {
            if w[0] > 1e-12 {
                assert!(w[1] < w[0], "{errs:?}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn sturm_count_is_monotone(
            diag in prop::collection::vec(-5.0f64..5.0, 2..40),
            seed in prop::collection::vec(-2.0f64..2.0, 40),
            xs in prop::collection::vec(-15.0f64..15.0, 2..20),
        ) {
            let off = seed[..diag.len() - 1].to_vec();
            let t = tri(&diag, &off);
            let mut xs = xs;
            xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let counts: Vec<usize> = xs.iter().map(|&x| sturm_count(&t, x)).collect();
            prop_assert!(counts.windows(2).all(|w| w[0] <= w[1]));
            // bracket count equals the number of bisected eigenvalues inside it
            let (a, b) = (xs[0], xs[xs.len() - 1]);
            let inside = (0..t.dim())
                .map(|n| eigenvalue_by_index(&t, n, 1e-13).unwrap())
                .filter(|&v| v >= a + 1e-9 && v < b - 1e-9)
                .count();
            let between = sturm_count(&t, b) - sturm_count(&t, a);
            prop_assert!(between >= inside && between <= inside + 2);
        }

        #[test]
        fn sections_interlace(
            g in 0.05f64..1.5, c1 in -1.0f64..1.0, c2 in -1.0f64..1.0, n in 3usize..200,
        ) {
            let p = ModelParams::new(g, c1, c2).unwrap();
            let small = build_a(&p, n).unwrap();
            let large = build_a(&p, n + 1).unwrap();
            let ev_s = eigenvalues_by_index(&small, 0, n - 1, 1e-12).unwrap();
            let ev_l = eigenvalues_by_index(&large, 0, n, 1e-12).unwrap();
            for i in 0..n {
                prop_assert!(ev_l[i] <= ev_s[i] + 1e-10);
                prop_assert!(ev_s[i] <= ev_l[i + 1] + 1e-10);
            }
        }
    }
}

use super::gamma::ln_gamma_pos;
use crate::error::{Error, Result};

/// Bessel function of the first kind `J_s(x)` for integer `s >= 0` and `x >= 0`.
///
/// Uses the ascending series while `(x/2)^2 <= s + 1` (all terms then decrease
/// monotonically, so the alternating sum does not cancel) and Miller's backward
/// recurrence normalized by `J_0 + 2 sum J_2k = 1` everywhere else.
pub fn bessel_j(s: u32, x: f64) -> Result<f64> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Domain(format!("bessel_j needs finite x >= 0, got {x}")));
    }
    Ok(bessel_j_unchecked(s, x))
}

pub(crate) fn bessel_j_unchecked(s: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if s == 0 { 1.0 } else { 0.0 };
    }
    let half = 0.5 * x;
    if half * half <= s as f64 + 1.0 {
        ascending_series(s, x)
    } else {
        miller(s, x)
    }
}

fn ascending_series(s: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let sf = s as f64;
    let mut term = (sf * half.ln() - ln_gamma_pos(sf + 1.0)).exp();
    let q = half * half;
    let mut sum = term;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= -q / (k * (k + sf));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() || term == 0.0 {
            break;
        }
    }
    sum
}

const BIG: f64 = 1e250;

fn miller(s: u32, x: f64) -> f64 {
    // Start far enough above the turning point k = x that J_start is negligible.
    let top = (s as f64).max(x) + 12.0 * x.cbrt() + 40.0;
    let mut start = top.ceil() as u64;
    if start % 2 == 1 {
        start += 1;
    }
    let mut above = 0.0f64; // J_(k+1)
    let mut cur = 1e-300f64; // J_k, arbitrary scale
    let mut norm = 0.0f64;
    let mut picked = if start == s as u64 { cur } else { 0.0 };
    let mut k = start;
    while k > 0 {
        if k.is_multiple_of(2) {
            norm += 2.0 * cur;
        }
        let below = 2.0 * k as f64 / x * cur - above;
        above = cur;
        cur = below;
        k -= 1;
        if k == s as u64 {
            picked = cur;
        }
        if cur.abs() > BIG {
            cur /= BIG;
            above /= BIG;
            norm /= BIG;
            picked /= BIG;
        }
    }
    // k == 0: cur holds the scaled J_0.
    norm += cur;
    picked / norm
}

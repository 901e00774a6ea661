use serde::{Deserialize, Serialize};

use super::gamma::ln_gamma_pos;
use crate::eigensolve::eigenvalue_by_index;
use crate::error::{Error, Result};
use crate::matrix::Tridiagonal;

/// Gauss rule for `∫_0^∞ x^alpha e^(-x) f(x) dx`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub order: usize,
    pub alpha: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    /// `Σ w_i f(x_i)`; `f` excludes the weight `x^alpha e^(-x)`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Generalized Gauss–Laguerre rule of the given order.
///
/// Nodes are the eigenvalues of the Golub–Welsch Jacobi matrix
/// (`diag = 2k + alpha + 1`, `off = sqrt(k (k + alpha))`), found by Sturm bisection.
/// Weights come from the derivative formula
/// `w_i = Γ(n+alpha+1) / (n! x_i L_n'(x_i)^2)`, rewritten in terms of the
/// orthonormal polynomials so that no factorial is formed.
pub fn gauss_laguerre(order: usize, alpha: f64) -> Result<QuadratureRule> {
    if order == 0 {
        return Err(Error::Domain("quadrature order must be >= 1".into()));
    }
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(Error::Domain(format!("alpha must be >= 0, got {alpha}")));
    }
    let diag: Vec<f64> = (0..order).map(|k| 2.0 * k as f64 + alpha + 1.0).collect();
    let off: Vec<f64> = (1..order)
        .map(|k| (k as f64 * (k as f64 + alpha)).sqrt())
        .collect();
    let jacobi = Tridiagonal::new(diag, off)?;

    let nodes = crate::par::map_range(0..order, |i| {
        eigenvalue_by_index(&jacobi, i, 0.0).expect("index within matrix size")
    });

    let n = order as f64;
    let p0 = (-0.5 * ln_gamma_pos(alpha + 1.0)).exp();
    let weights = nodes
        .iter()
        .map(|&x| {
            // orthonormal p_(n-1)(x), p_n(x)
            let mut prev = 0.0;
            let mut cur = p0;
            for k in 0..order {
                let kf = k as f64;
                let next = ((2.0 * kf + alpha + 1.0 - x) * cur
                    - (kf * (kf + alpha)).sqrt() * prev)
                    / ((kf + 1.0) * (kf + alpha + 1.0)).sqrt();
                prev = cur;
                cur = next;
            }
            let d = n.sqrt() * cur - (n + alpha).sqrt() * prev;
            x / (n * d * d)
        })
        .collect();

    Ok(QuadratureRule {
        order,
        alpha,
        nodes,
        weights,
    })
}

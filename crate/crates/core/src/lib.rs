//! Spectra of perturbed harmonic-oscillator Jacobi matrices.
//!
//! The operator family is the infinite symmetric tridiagonal matrix
//!
//! ```text
//!     diag_k = k + c1   (k even)        off_k = g * sqrt(k + 1)
//!     diag_k = k + c2   (k odd)
//! ```
//!
//! which splits as `A = A0 + (c1 + c2)/2 * I + (c1 - c2)/2 * R`, where `A0` is the
//! exactly solvable shifted oscillator (eigenvalues `n - g^2`) and `R` is the parity
//! matrix. In the eigenbasis of `A0` the parity matrix becomes `R~`, whose entries are
//! normalized Laguerre functions evaluated at `4 g^2`.
//!
//! Modules:
//!
//! - [`specfun`]: Laguerre polynomials and functions, integer-order Bessel `J`,
//!   log-gamma and generalized Gauss–Laguerre rules.
//! - [`model`]: the matrices `A`, `A0`, `R`, `U`, `R~` with independent oracles.
//! - [`eigensolve`]: Sturm-sequence bisection and truncation-converged spectra.
//! - [`asymptotics`]: first-order asymptotes, diagonal corrections, remainder sums
//!   and decay fits.
//! - [`diagonalize`]: the successive-diagonalization matrices `D1`, `K`, `B`, and
//!   numerical checks of the Bessel and Laguerre inequalities.
//!
//! Data-parallel loops run on rayon when the `parallel` feature (default) is
//! enabled, and sequentially otherwise. Results are bitwise identical either way.

pub mod asymptotics;
pub mod diagonalize;
pub mod eigensolve;
mod error;
pub mod matrix;
pub mod model;
pub mod par;
pub mod specfun;

pub use error::{Error, Result};
pub use matrix::{DenseMatrix, Tridiagonal};
pub use model::ModelParams;

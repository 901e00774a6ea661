//! Special functions evaluated from scratch: Laguerre polynomials and normalized
//! Laguerre functions, integer-order Bessel `J`, log-gamma, and generalized
//! Gauss–Laguerre quadrature. All functions are pure and thread-safe.

mod bessel;
mod gamma;
mod laguerre;
mod quadrature;

pub use bessel::bessel_j;
pub use gamma::{ln_binomial, ln_factorial, log_gamma};
pub use laguerre::{
    laguerre_function, laguerre_function_sequence, laguerre_polynomial, LaguerreFunctions,
    LaguerreOrder,
};
pub use quadrature::{gauss_laguerre, QuadratureRule};

pub(crate) use bessel::bessel_j_unchecked;
pub(crate) use gamma::ln_gamma_pos;
pub(crate) use laguerre::omega;

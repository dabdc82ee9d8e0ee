//! q-deformed Gaussian families and their orthogonal polynomials.
//!
//! Four probability densities on a compact interval are covered:
//!
//! | label | density                          | orthogonal family                 |
//! |-------|----------------------------------|-----------------------------------|
//! | `fh`  | continuous q-Hermite weight      | `h_n(x|q)`                        |
//! | `fN`  | q-Normal                         | rescaled q-Hermite `H_n(x|q)`     |
//! | `fQ`  | Al-Salam–Chihara weight          | `Q_n(x|a,b,q)`                    |
//! | `fCN` | conditional q-Normal             | `P_n(x|y,rho,q)`                  |
//!
//! At `q = 0` they reduce to the Wigner semicircle and Kesten–McKay laws, at `q = 1`
//! (`fN`, `fCN` only) to the Gaussian and the conditional Gaussian.
//!
//! Moments are given in closed form through the coefficients `c_{m,n}(q)` of the
//! expansion of `x^n` in q-Hermite polynomials, moment generating functions as series
//! in modified Bessel functions. [`quadrature`] is an independent numerical oracle
//! used to cross-check all of them.

pub mod cli;
pub mod densities;
mod ddouble;
pub mod error;
pub mod moments;
pub mod orthopoly;
pub mod qseries;
pub mod quadrature;

pub use densities::{density, support, DistributionSpec, Family, FamilyKind, Support, TruncationPolicy};
pub use error::{Error, Result};
pub use qseries::QParameter;

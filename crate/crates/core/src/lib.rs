//! Sparse spectral toolkit for step-hyperbolic cross approximation of
//! multivariate periodic functions.
//!
//! The crate is organized around the dyadic block calculus on the frequency
//! lattice:
//!
//! * [`index`] — dyadic blocks, step-hyperbolic crosses, smoothness profiles;
//! * [`trigpoly`] — sparse and tensor-factored trigonometric polynomials,
//!   quadrature grids, Weyl derivatives, coefficient file I/O;
//! * [`kernels`] — de la Vallee Poussin and block multipliers, Bernoulli
//!   kernels, extremal generators, seeded random polynomials;
//! * [`norms`] — L_p, block-Besov and sup-type mixed-smoothness norms;
//! * [`approx`] — cross truncation errors, near-best block errors, error
//!   sweeps over cross levels;
//! * [`analysis`] — theoretical decay rates, least-squares rate fitting, and
//!   the inequality probes (Nikolskii, Bernstein, block summation);
//! * [`checks`] — seeded verification suites shared by the CLI and the
//!   acceptance tests.
//!
//! All norms are taken with respect to the normalized measure on the torus
//! `[0, 2pi)^d`, and Fourier coefficients follow the normalized convention
//! `c(k) = (2pi)^-d Integral f(x) e^{-i(k,x)} dx`, so `|e^{i(k,.)}|_p = 1`
//! and convolution is coefficientwise multiplication.

#![warn(missing_docs)]

pub mod analysis;
pub mod approx;
pub mod checks;
mod error;
pub mod index;
pub mod kernels;
pub mod norms;
pub mod quad;
pub mod trigpoly;

pub use error::{Error, Result};
pub use index::{Block, CrossSpec, CrossVariant, SmoothnessProfile};
pub use quad::QuadratureGrid;
pub use trigpoly::{PolyExpr, SparseTrigPoly, TensorBlockPoly};

//! Lindstedt series for quasi-periodic solutions of perturbed dynamical systems.
//!
//! The crate is organised bottom-up:
//!
//! * [`series`] holds truncated Fourier-Taylor series and the analytic
//!   composition used by every recursion.
//! * [`diophantine`] covers rotation vectors, continued fractions, Bryuno sums
//!   and the sharp scale assignment of small divisors.
//! * [`models`] contains the four model families and their order-by-order
//!   solvers together with residual and compatibility diagnostics.
//! * [`trees`] is an independent diagrammatic evaluation of the same
//!   coefficients, plus cluster and self-energy bookkeeping.
//! * [`analysis`] estimates radii of convergence, Borel signatures, excluded
//!   parameter measures and integrates the dissipative model directly.

pub mod analysis;
pub mod diophantine;
pub mod models;
pub mod parallel;
pub mod series;
pub mod trees;

mod error;
mod numeric;

pub use error::Error;
pub use num_complex::Complex64 as C64;

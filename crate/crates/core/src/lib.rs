//! Numerical laboratory for interfaces in the scaled cubic wave equation
//!
//! ```text
//! u_tt - Δu + (2/ε²)(u² - 1)u = 0      on ℝ^{1+2}
//! ```
//!
//! The crate builds timelike extremal surfaces from a pair of unit-speed
//! loops, constructs Minkowskian normal coordinates around them, evolves the
//! wave equation from well-prepared interface data, and measures how closely
//! the solution follows the translated kink profile `Q_ε(y₂ - s_*)`.
//!
//! Module map:
//!
//! * [`geometry`]: loops, extremal surfaces, normal-coordinate charts.
//! * [`profile`]: `tanh` kink, cutoff, truncated profile and its constants.
//! * [`wave`]: leapfrog solver, prepared data, energy, snapshots.
//! * [`diagnostics`]: pullback to normal coordinates, fiber and slice functionals,
//!   `H¹_ε` norms, far-field deviations.
//! * [`decomposition`]: optimal translation `s_*`, comparison field `U_ε`.
//! * [`odelab`]: the one-dimensional Riccati-type ODE machinery.
//! * [`harness`]: configuration, ε-sweeps, rate fits, reports.
//!
//! Inner loops are data-parallel through [`Execution`]; with the `parallel`
//! feature disabled every path runs sequentially and produces identical bits.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod decomposition;
pub mod diagnostics;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod harness;
pub mod odelab;
pub mod profile;
pub mod quad;
pub mod wave;

pub use error::{Error, Result};
pub use exec::Execution;

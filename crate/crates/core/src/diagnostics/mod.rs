//! Pullback of the solution to normal coordinates and the quantities measured on it.
//!
//! The slice functionals are
//!
//! ```text
//! Θ₁(y₀) = ∫_{S¹} [ ∫_I (1 + y₂²)((ε/2)(∂₂v)² + c(v² - 1)²) dy₂ - c₀ ] dy₁
//! Θ₂(y₀) = ∫_{S¹} ∫_I y₂² (v - sign y₂)² dy₂ dy₁
//! Θ₃(y₀) = ∫_{S¹} ∫_I (ε/2)((∂₀v)² + (∂₁v)²) + y₂²((ε/2)(∂₂v)² + (1/2ε)(1 - v²)²) dy₂ dy₁
//! ```
//!
//! with `c = 1/(2ε)` by default (see [`Theta1Variant`]).

mod farfield;
mod functionals;
mod norms;
mod pullback;
mod source;

pub use farfield::{farfield_deviation, FarField, FarFieldOptions};
pub use functionals::{theta1, theta1_with_derivative, theta2, theta_slice, SliceDiagnostics, Theta1Variant};
pub use norms::{h1eps_norm, tube_norms, H1Parts, TubeNorms};
pub use pullback::{pullback, FiberSpec, PullbackSlice};
pub use source::{FieldSource, Jet, Level};

use std::path::Path;

use crate::error::{Error, Result};

/// Writes one row per slice: `y0,Theta1,Theta2,Theta3,Theta2_abs,sup_d0v,sup_d1v`.
pub fn write_slices_csv(path: &Path, slices: &[SliceDiagnostics]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(Error::csv(path))?;
    w.write_record(["y0", "Theta1", "Theta2", "Theta3", "Theta2_abs", "sup_d0v", "sup_d1v"])
        .map_err(Error::csv(path))?;
    for s in slices {
        w.write_record(
            [s.y0, s.theta1, s.theta2, s.theta3, s.theta2_abs, s.sup_d0, s.sup_d1].map(|x| format!("{x:e}")),
        )
        .map_err(Error::csv(path))?;
    }
    w.flush().map_err(Error::io(path))
}

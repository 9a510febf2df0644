//! Extremal surfaces `ψ(y₀, y₁) = (y₀, ½(a(y₀+y₁) + b(y₀-y₁)))` and their normal coordinates.
//!
//! Conventions: `η = diag(-1, 1, 1)`, points of `ℝ^{1+2}` are `(t, x₁, x₂)`,
//! `ν` is spacelike with `η(ν, ν) = 1` and points into the enclosed region,
//! so `y₂ > 0` inside.

mod chart;
mod loops;
mod region;

pub use chart::{eta, wrap_angle, ChartOptions, ChartPoint, Frame, Point3, SurfaceChart};
pub use loops::{
    validate_loop, FourierLoop, LoopPair, LoopSample, ValidationReport, CLOSED_FORM_SPEED_TOL, RESAMPLED_SPEED_TOL,
};
pub use region::{inside_from_crossings, SlicePolygon};

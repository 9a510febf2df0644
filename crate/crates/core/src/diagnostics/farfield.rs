use serde::{Deserialize, Serialize};

use super::norms::H1Parts;
use super::source::FieldSource;
use crate::error::Result;
use crate::exec::Execution;
use crate::geometry::{inside_from_crossings, SlicePolygon, SurfaceChart};
use crate::wave::Lattice;

const POLYGON_VERTICES: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FarFieldOptions {
    /// `T₀`: the region is `(-T₀, T₀) × ℝ²` minus the tube.
    pub t0: f64,
    /// Fiber half-width of the removed tube `𝒩'` (the `ρ` of `I = (-ρ, ρ)`).
    pub width: f64,
    /// Number of midpoint time levels.
    pub levels: usize,
}

/// Integrals over `ℳ = ((-T₀, T₀) × ℝ²) ∖ 𝒩'`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FarField {
    /// `∫_{ℳ∩𝒪} (u - 1)²`.
    pub inside_l2: f64,
    /// `∫_{ℳ∖𝒪} (u + 1)²`.
    pub outside_l2: f64,
    /// `∫_ℳ (ε/2)|Du|² + (1/2ε)(u² - 1)²`.
    pub energy: f64,
    /// `w = u ∓ 1` (the comparison field is `±1` on `ℳ`).
    pub deviation: H1Parts,
    pub volume: f64,
}

impl FarField {
    pub fn l2_total(&self) -> f64 {
        self.inside_l2 + self.outside_l2
    }
}

/// Cartesian sums over the lattice nodes of `ℳ` at `levels` midpoint times.
///
/// A node belongs to `𝒩'` when its chart coordinates satisfy `|y₂| < width`
/// and `y₀ ∈ (-T₁, T¹)`; only nodes within the tube reach of `Γ_t` are
/// inverted. Spatial gradients are fourth-order centred differences, `∂_t u`
/// comes from the source. The two outermost node rings are skipped.
pub fn farfield_deviation(
    source: &dyn FieldSource,
    chart: &SurfaceChart,
    lattice: &Lattice,
    opts: &FarFieldOptions,
    exec: Execution,
) -> Result<FarField> {
    let eps = source.epsilon();
    let (nx, ny, h) = (lattice.nx, lattice.ny, lattice.h);
    let dt = 2.0 * opts.t0 / opts.levels as f64;
    let xs: Vec<f64> = (0..nx).map(|i| lattice.x(i)).collect();
    let reach0 = chart.tube_reach(opts.width) + 2.0 * h;
    let inv12h = 1.0 / (12.0 * h);
    let cell = h * h * dt;
    let mut acc = [0.0; 6];
    for m in 0..opts.levels {
        let t = -opts.t0 + (m as f64 + 0.5) * dt;
        let level = source.level(t, lattice, exec)?;
        let poly = SlicePolygon::new(&chart.loops, t, POLYGON_VERTICES);
        let reach = reach0 + poly.max_edge();
        let (u, ut) = (&level.u, &level.ut);
        let rows = exec.map(ny, |j| {
            let mut r = [0.0; 6];
            if j < 2 || j + 2 >= ny {
                return r;
            }
            let x2 = lattice.y(j);
            let cps = chart.locate_row(t, x2, &xs, &poly, reach);
            let crossings = poly.row_crossings(x2);
            for i in 2..nx - 2 {
                let cp = &cps[i];
                if cp.y0.is_finite() && chart.covers(cp.y0) && cp.y2.abs() < opts.width {
                    continue;
                }
                let k = j * nx + i;
                let inside = inside_from_crossings(&crossings, xs[i]);
                let target = if inside { 1.0 } else { -1.0 };
                let w = u[k] - target;
                let ux = (u[k - 2] - 8.0 * u[k - 1] + 8.0 * u[k + 1] - u[k + 2]) * inv12h;
                let uy = (u[k - 2 * nx] - 8.0 * u[k - nx] + 8.0 * u[k + nx] - u[k + 2 * nx]) * inv12h;
                let grad = ut[k] * ut[k] + ux * ux + uy * uy;
                if inside {
                    r[0] += w * w;
                } else {
                    r[1] += w * w;
                }
                r[2] += 0.5 * eps * grad + 0.5 / eps * (u[k] * u[k] - 1.0).powi(2);
                r[3] += w * w;
                r[4] += grad;
                r[5] += 1.0;
            }
            r
        });
        for r in rows {
            for c in 0..6 {
                acc[c] += r[c] * cell;
            }
        }
    }
    Ok(FarField {
        inside_l2: acc[0],
        outside_l2: acc[1],
        energy: acc[2],
        deviation: H1Parts {
            l2_sq: acc[3],
            grad_sq: acc[4],
        },
        volume: acc[5],
    })
}

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::pullback::PullbackSlice;
use crate::decomposition::ShiftGrid;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geometry::SurfaceChart;
use crate::profile::ProfileParams;
use crate::quad::simpson_weights;

/// `‖w‖²_{L²}` and `‖Dw‖²_{L²}` over some region.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct H1Parts {
    pub l2_sq: f64,
    pub grad_sq: f64,
}

impl H1Parts {
    /// `(ε⁻¹‖w‖² + ε‖Dw‖²)^{1/2}`.
    pub fn norm(&self, epsilon: f64) -> f64 {
        h1eps_norm(self.l2_sq, self.grad_sq, epsilon)
    }

    pub fn add(&self, other: &H1Parts) -> H1Parts {
        H1Parts {
            l2_sq: self.l2_sq + other.l2_sq,
            grad_sq: self.grad_sq + other.grad_sq,
        }
    }
}

pub fn h1eps_norm(l2_sq: f64, grad_sq: f64, epsilon: f64) -> f64 {
    (l2_sq / epsilon + epsilon * grad_sq).sqrt()
}

/// Tube integrals over `𝒩' ∩ {|t| < T₀}`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TubeNorms {
    /// `w = v - V` with `V = Q_ε(y₂ - s_*)`.
    pub deviation: H1Parts,
    /// `‖DU_ε‖²` over the tube (the comparison field's full gradient).
    pub comparison_grad_sq: f64,
    /// Spacetime volume covered, as a check on the masking.
    pub volume: f64,
}

/// Integrates over the tube in chart coordinates with weight `|det DΨ|`.
///
/// The slices are midpoints of a uniform `y₀` grid with spacing `dy0`; a node
/// contributes only when `|Ψ⁰| < t0`. Gradients are Euclidean spacetime
/// gradients `Dw = (DΨ)^{-T} ∇_y w`.
#[allow(clippy::too_many_arguments)]
pub fn tube_norms(
    chart: &SurfaceChart,
    slices: &[PullbackSlice],
    shifts: &ShiftGrid,
    params: &ProfileParams,
    t0: f64,
    dy0: f64,
    exec: Execution,
) -> Result<TubeNorms> {
    if shifts.len() != slices.len() {
        return Err(Error::Config(format!(
            "{} shift rows for {} slices",
            shifts.len(),
            slices.len()
        )));
    }
    let parts = exec.map(slices.len(), |i| -> Result<[f64; 4]> {
        let slice = &slices[i];
        let spec = slice.spec;
        let s = shifts.values(i);
        let s0 = shifts.d0(i)?;
        let s1 = shifts.d1(i);
        let wz = simpson_weights(spec.n2, spec.dz());
        let wy1 = TAU / spec.n1 as f64;
        let mut acc = [0.0; 4];
        for j in 0..spec.n1 {
            let frame = chart.frame(slice.y0, spec.y1(j))?;
            for k in 0..spec.n2 {
                let y2 = spec.y2(k);
                let t = frame.psi[0] + y2 * frame.nu[0];
                if t.abs() >= t0 {
                    continue;
                }
                let jac = frame.jacobian(y2);
                let det = jac.determinant().abs();
                let Some(inv) = jac.try_inverse() else {
                    return Err(Error::SingularChart {
                        min_det: det,
                        floor: chart.det_floor,
                    });
                };
                let (q, dq, _) = params.big_q_derivs(y2 - s[j]);
                let gv = [-dq * s0[j], -dq * s1[j], dq];
                let m = slice.index(j, k);
                let gw = [slice.d0[m] - gv[0], slice.d1[m] - gv[1], slice.d2[m] - gv[2]];
                // (DΨ)^{-T} g: component c is Σ_r inv[(r, c)] g[r]
                let raise = |g: [f64; 3]| -> f64 {
                    (0..3)
                        .map(|c| {
                            let x = inv[(0, c)] * g[0] + inv[(1, c)] * g[1] + inv[(2, c)] * g[2];
                            x * x
                        })
                        .sum()
                };
                let w = slice.v[m] - q;
                let weight = wz[k] * wy1 * dy0 * det;
                acc[0] += weight * w * w;
                acc[1] += weight * raise(gw);
                acc[2] += weight * raise(gv);
                acc[3] += weight;
            }
        }
        Ok(acc)
    });
    let mut total = [0.0; 4];
    for p in parts {
        let p = p?;
        for c in 0..4 {
            total[c] += p[c];
        }
    }
    Ok(TubeNorms {
        deviation: H1Parts {
            l2_sq: total[0],
            grad_sq: total[1],
        },
        comparison_grad_sq: total[2],
        volume: total[3],
    })
}

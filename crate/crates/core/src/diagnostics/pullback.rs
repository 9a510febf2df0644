use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::source::FieldSource;
use crate::error::Result;
use crate::exec::Execution;
use crate::geometry::{ChartPoint, SurfaceChart};
use crate::profile::Fiber;

/// Sampling of one slice `{y₀} × S¹ × I`: `n1` equispaced `y₁`, `n2` fiber points on `[-ρ, ρ]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberSpec {
    pub n1: usize,
    pub n2: usize,
    pub rho: f64,
}

impl FiberSpec {
    pub const DEFAULT_N1: usize = 256;

    /// `n1 = 256` and fiber spacing at most `ε/16`.
    pub fn for_epsilon(epsilon: f64, rho: f64) -> Self {
        Self {
            n1: Self::DEFAULT_N1,
            n2: Fiber::points_for(epsilon, rho),
            rho,
        }
    }

    #[inline]
    pub fn dz(&self) -> f64 {
        2.0 * self.rho / (self.n2 - 1) as f64
    }

    #[inline]
    pub fn y1(&self, j: usize) -> f64 {
        TAU * j as f64 / self.n1 as f64
    }

    /// Same node placement as [`Fiber::z`].
    #[inline]
    pub fn y2(&self, k: usize) -> f64 {
        (k as isize - (self.n2 / 2) as isize) as f64 * self.dz()
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// `v = u ∘ Ψ` and its chart derivatives on one slice, stored fiber by fiber
/// (index `j·n2 + k`).
#[derive(Clone, Debug)]
pub struct PullbackSlice {
    pub y0: f64,
    pub spec: FiberSpec,
    pub v: Vec<f64>,
    pub d0: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
}

impl PullbackSlice {
    #[inline]
    pub fn index(&self, j: usize, k: usize) -> usize {
        j * self.spec.n2 + k
    }

    pub fn fiber_values(&self, j: usize) -> &[f64] {
        &self.v[j * self.spec.n2..(j + 1) * self.spec.n2]
    }

    pub fn fiber(&self, j: usize) -> Fiber {
        Fiber {
            rho: self.spec.rho,
            dz: self.spec.dz(),
            values: self.fiber_values(j).to_vec(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.v.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Pulls `source` back through the chart on the slice `y₀`.
///
/// Derivatives follow the chain rule `∂_{yᵢ}v = Du(Ψ(y)) · ∂_{yᵢ}Ψ` with the
/// Euclidean pairing of the spacetime gradient and the columns of `DΨ`.
pub fn pullback(
    source: &dyn FieldSource,
    chart: &SurfaceChart,
    y0: f64,
    spec: FiberSpec,
    exec: Execution,
) -> Result<PullbackSlice> {
    let n2 = spec.n2;
    let rows = exec.map(spec.n1, |j| -> Result<[Vec<f64>; 4]> {
        let y1 = spec.y1(j);
        let frame = chart.frame(y0, y1)?;
        let mut out = [vec![0.0; n2], vec![0.0; n2], vec![0.0; n2], vec![0.0; n2]];
        for k in 0..n2 {
            let y2 = spec.y2(k);
            let p = frame.map(y2);
            let jac = frame.jacobian(y2);
            let hint = ChartPoint {
                y0,
                y1,
                y2,
                inside_tube: true,
            };
            let jet = source.jet(p[0], [p[1], p[2]], Some(&hint))?;
            out[0][k] = jet.u;
            for c in 0..3 {
                let col = jac.column(c);
                out[c + 1][k] = jet.du[0] * col[0] + jet.du[1] * col[1] + jet.du[2] * col[2];
            }
        }
        Ok(out)
    });
    let mut slice = PullbackSlice {
        y0,
        spec,
        v: Vec::with_capacity(spec.len()),
        d0: Vec::with_capacity(spec.len()),
        d1: Vec::with_capacity(spec.len()),
        d2: Vec::with_capacity(spec.len()),
    };
    for row in rows {
        let [v, d0, d1, d2] = row?;
        slice.v.extend(v);
        slice.d0.extend(d0);
        slice.d1.extend(d1);
        slice.d2.extend(d2);
    }
    Ok(slice)
}

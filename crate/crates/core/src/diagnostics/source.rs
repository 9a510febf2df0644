use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geometry::ChartPoint;
use crate::quad::{cubic_weights, lagrange4};
use crate::wave::{Lattice, SnapshotStore};

/// Value and spacetime gradient `(∂_t u, ∂₁u, ∂₂u)` at one point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet {
    pub u: f64,
    pub du: [f64; 3],
}

/// One time level sampled on a lattice.
#[derive(Clone, Debug)]
pub struct Level {
    pub t: f64,
    pub lattice: Lattice,
    pub u: Vec<f64>,
    pub ut: Vec<f64>,
}

/// Anything that can be evaluated as a spacetime field `u(t, x)`.
pub trait FieldSource: Sync {
    fn epsilon(&self) -> f64;

    /// Value and gradient at `(t, x)`. `hint` carries the chart coordinates of
    /// the point when the caller knows them.
    fn jet(&self, t: f64, x: [f64; 2], hint: Option<&ChartPoint>) -> Result<Jet>;

    /// `u` and `∂_t u` at time `t` on every node of `lattice`.
    fn level(&self, t: f64, lattice: &Lattice, exec: Execution) -> Result<Level>;
}

/// Cell index and fractional offset of `x` on a uniform axis, with room for
/// the cubic stencil and the five-point differences at its nodes.
#[inline]
fn locate_axis(x: f64, x_min: f64, h: f64, n: usize) -> Option<(usize, f64)> {
    let fx = (x - x_min) / h;
    let i = fx.floor();
    if !(i >= 3.0 && i + 4.0 <= (n - 1) as f64) {
        return None;
    }
    Some((i as usize, fx - i))
}

impl FieldSource for SnapshotStore {
    fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Tensor cubic interpolation in space and cubic Lagrange interpolation in
    /// time; the spatial gradient is interpolated from fourth-order centred
    /// differences at the stencil nodes.
    fn jet(&self, t: f64, x: [f64; 2], _hint: Option<&ChartPoint>) -> Result<Jet> {
        let st = self.stencil(t)?;
        let snaps = self.snapshots();
        let times = [snaps[st[0]].t, snaps[st[1]].t, snaps[st[2]].t, snaps[st[3]].t];
        let (wt, dwt) = lagrange4(times, t);
        let lat = self.lattice;
        let (nx, ny) = (lat.nx, lat.ny);
        let out = || Error::OutOfBox { x0: x[0], x1: x[1] };
        let (i, fx) = locate_axis(x[0], lat.x_min(), lat.h, nx).ok_or_else(out)?;
        let (j, fy) = locate_axis(x[1], lat.y_min(), lat.h, ny).ok_or_else(out)?;
        let (wx, _) = cubic_weights(fx);
        let (wy, _) = cubic_weights(fy);
        let inv12h = 1.0 / (12.0 * lat.h);

        let mut jet = Jet::default();
        for (k, &s) in st.iter().enumerate() {
            let u = &snaps[s].u;
            let (mut v, mut gx, mut gy) = (0.0, 0.0, 0.0);
            for b in 0..4 {
                let r = j + b - 1;
                let (mut sv, mut sx, mut sy) = (0.0, 0.0, 0.0);
                for a in 0..4 {
                    let c = i + a - 1;
                    let at = |rr: usize, cc: usize| u[rr * nx + cc];
                    sv += wx[a] * at(r, c);
                    sx += wx[a] * (at(r, c - 2) - 8.0 * at(r, c - 1) + 8.0 * at(r, c + 1) - at(r, c + 2));
                    sy += wx[a] * (at(r - 2, c) - 8.0 * at(r - 1, c) + 8.0 * at(r + 1, c) - at(r + 2, c));
                }
                v += wy[b] * sv;
                gx += wy[b] * sx;
                gy += wy[b] * sy;
            }
            jet.u += wt[k] * v;
            jet.du[0] += dwt[k] * v;
            jet.du[1] += wt[k] * gx * inv12h;
            jet.du[2] += wt[k] * gy * inv12h;
        }
        Ok(jet)
    }

    fn level(&self, t: f64, lattice: &Lattice, exec: Execution) -> Result<Level> {
        if *lattice != self.lattice {
            return Err(Error::InvalidGrid("level lattice differs from the stored run".into()));
        }
        let st = self.stencil(t)?;
        let snaps = self.snapshots();
        let times = [snaps[st[0]].t, snaps[st[1]].t, snaps[st[2]].t, snaps[st[3]].t];
        let (wt, dwt) = lagrange4(times, t);
        let mut u = vec![0.0; lattice.len()];
        let mut ut = vec![0.0; lattice.len()];
        let nx = lattice.nx;
        exec.for_each_row(&mut u, nx, |j, row| {
            for (i, out) in row.iter_mut().enumerate() {
                let k = j * nx + i;
                *out = (0..4).map(|m| wt[m] * snaps[st[m]].u[k]).sum();
            }
        });
        exec.for_each_row(&mut ut, nx, |j, row| {
            for (i, out) in row.iter_mut().enumerate() {
                let k = j * nx + i;
                *out = (0..4).map(|m| dwt[m] * snaps[st[m]].u[k]).sum();
            }
        });
        Ok(Level {
            t,
            lattice: *lattice,
            u,
            ut,
        })
    }
}

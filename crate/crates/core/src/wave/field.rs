use serde::{Deserialize, Serialize};

use super::grid::Lattice;
use crate::error::{Error, Result};
use crate::exec::Execution;

/// Blow-up guard on `|u|`.
pub const U_GUARD: f64 = 1.5;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// The outer ring keeps its initial values (`-1` for interface data).
    #[default]
    Frozen,
    /// Periodic in `x₂`, frozen ends in `x₁`; used for pseudo-1D strips.
    PeriodicY,
}

/// Two time levels of `u` on a lattice, advanced by leapfrog.
#[derive(Clone, Debug)]
pub struct SpacetimeField {
    pub lattice: Lattice,
    pub epsilon: f64,
    pub dt: f64,
    /// `+1` forward in time, `-1` backward.
    pub direction: f64,
    pub t_start: f64,
    pub steps: usize,
    pub boundary: Boundary,
    pub exec: Execution,
    pub u_prev: Vec<f64>,
    pub u_curr: Vec<f64>,
}

impl SpacetimeField {
    /// Second-order Taylor start from `u(t₀)` and `∂_t u(t₀)` (physical time).
    ///
    /// The level one step behind is `u₀ - Δt·σu_t + ½Δt²·F(u₀)` with `σ` the
    /// direction and `F(u) = Δ_h u - (2/ε²)(u² - 1)u`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_initial_data(
        lattice: Lattice,
        epsilon: f64,
        dt: f64,
        direction: f64,
        t_start: f64,
        u0: Vec<f64>,
        ut: &[f64],
        boundary: Boundary,
        exec: Execution,
    ) -> Self {
        assert_eq!(u0.len(), lattice.len());
        assert_eq!(ut.len(), lattice.len());
        let mut field = Self {
            lattice,
            epsilon,
            dt,
            direction,
            t_start,
            steps: 0,
            boundary,
            exec,
            u_prev: vec![0.0; lattice.len()],
            u_curr: u0,
        };
        let forcing = field.forcing();
        let nx = lattice.nx;
        let curr = &field.u_curr;
        field.exec.for_each_row(&mut field.u_prev, nx, |j, row| {
            for (i, p) in row.iter_mut().enumerate() {
                let k = j * nx + i;
                *p = if field_is_boundary(&lattice, boundary, i, j) {
                    curr[k]
                } else {
                    curr[k] - dt * direction * ut[k] + 0.5 * dt * dt * forcing[k]
                };
            }
        });
        field
    }

    /// Current time.
    pub fn t(&self) -> f64 {
        self.t_start + self.direction * self.steps as f64 * self.dt
    }

    /// `F(u_curr) = Δ_h u - (2/ε²)(u² - 1)u`, zero on frozen nodes.
    pub fn forcing(&self) -> Vec<f64> {
        let lat = self.lattice;
        let (nx, ny) = (lat.nx, lat.ny);
        let inv_h2 = 1.0 / (lat.h * lat.h);
        let k = 2.0 / (self.epsilon * self.epsilon);
        let curr = &self.u_curr;
        let boundary = self.boundary;
        let mut out = vec![0.0; lat.len()];
        self.exec.for_each_row(&mut out, nx, |j, row| {
            let Some((n_row, s_row)) = neighbour_rows(curr, nx, ny, j, boundary) else {
                return;
            };
            let c_row = &curr[j * nx..(j + 1) * nx];
            for i in 1..nx - 1 {
                let u = c_row[i];
                let lap = ((c_row[i + 1] + c_row[i - 1]) + (n_row[i] + s_row[i]) - 4.0 * u) * inv_h2;
                row[i] = lap - k * (u * u - 1.0) * u;
            }
        });
        out
    }

    /// One leapfrog step; fails with `BlowUp` if `|u|` leaves the guard.
    pub fn step(&mut self) -> Result<()> {
        let lat = self.lattice;
        let (nx, ny) = (lat.nx, lat.ny);
        let inv_h2 = 1.0 / (lat.h * lat.h);
        let k = 2.0 / (self.epsilon * self.epsilon);
        let dt2 = self.dt * self.dt;
        let boundary = self.boundary;
        let curr = &self.u_curr;
        // u_next overwrites u_prev in place: each node reads only its own old value
        let maxima = self.exec.map_rows(&mut self.u_prev, nx, |j, row| {
            let c_row = &curr[j * nx..(j + 1) * nx];
            let Some((n_row, s_row)) = neighbour_rows(curr, nx, ny, j, boundary) else {
                row.copy_from_slice(c_row);
                return max_abs(row);
            };
            row[0] = c_row[0];
            row[nx - 1] = c_row[nx - 1];
            let mut m = row[0].abs().max(row[nx - 1].abs());
            for i in 1..nx - 1 {
                let u = c_row[i];
                let lap = ((c_row[i + 1] + c_row[i - 1]) + (n_row[i] + s_row[i]) - 4.0 * u) * inv_h2;
                let next = 2.0 * u - row[i] + dt2 * (lap - k * (u * u - 1.0) * u);
                row[i] = next;
                m = m.max(next.abs());
            }
            m
        });
        std::mem::swap(&mut self.u_prev, &mut self.u_curr);
        self.steps += 1;
        let max_abs = maxima.into_iter().fold(0.0, f64::max);
        if !(max_abs <= U_GUARD) {
            return Err(Error::BlowUp { t: self.t(), max_abs });
        }
        Ok(())
    }

    /// Discrete energy at the half level between `u_prev` and `u_curr`:
    /// `Σ h² [ ½((u_c - u_p)/Δt)² + ¼(|∇_h u_c|² + |∇_h u_p|²) + ½(W(u_c) + W(u_p)) ]`
    /// with `W(u) = (u² - 1)²/(2ε²)` and one-sided differences over grid cells.
    pub fn total_energy(&self) -> f64 {
        let lat = self.lattice;
        let (nx, ny) = (lat.nx, lat.ny);
        let h = lat.h;
        let inv_dt = 1.0 / self.dt;
        let w = 1.0 / (2.0 * self.epsilon * self.epsilon);
        let periodic = self.boundary == Boundary::PeriodicY;
        let (uc, up) = (&self.u_curr, &self.u_prev);
        let grad2 = |u: &[f64], i: usize, j: usize| -> f64 {
            let k = j * nx + i;
            let mut g = 0.0;
            if i + 1 < nx {
                g += (u[k + 1] - u[k]).powi(2);
            }
            if j + 1 < ny {
                g += (u[k + nx] - u[k]).powi(2);
            } else if periodic {
                g += (u[i] - u[k]).powi(2);
            }
            g / (h * h)
        };
        let rows = self.exec.map(ny, |j| {
            let mut e = 0.0;
            for i in 0..nx {
                let k = j * nx + i;
                let v = (uc[k] - up[k]) * inv_dt;
                let pot = w * ((uc[k] * uc[k] - 1.0).powi(2) + (up[k] * up[k] - 1.0).powi(2));
                e += 0.5 * v * v + 0.25 * (grad2(uc, i, j) + grad2(up, i, j)) + 0.5 * pot;
            }
            e
        });
        rows.into_iter().sum::<f64>() * h * h
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.u_curr)
    }
}

fn field_is_boundary(lat: &Lattice, boundary: Boundary, i: usize, j: usize) -> bool {
    let edge_x = i == 0 || i + 1 == lat.nx;
    match boundary {
        Boundary::Frozen => edge_x || j == 0 || j + 1 == lat.ny,
        Boundary::PeriodicY => edge_x,
    }
}

/// Rows `j+1` and `j-1`, or `None` when row `j` is frozen.
#[inline]
fn neighbour_rows(u: &[f64], nx: usize, ny: usize, j: usize, boundary: Boundary) -> Option<(&[f64], &[f64])> {
    let (n, s) = match boundary {
        Boundary::Frozen => {
            if j == 0 || j + 1 == ny {
                return None;
            }
            (j + 1, j - 1)
        }
        Boundary::PeriodicY => ((j + 1) % ny, (j + ny - 1) % ny),
    };
    Some((&u[n * nx..(n + 1) * nx], &u[s * nx..(s + 1) * nx]))
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CFL_SAFETY: f64 = 0.5;

/// Square box `[-L, L]²` with spacing `h`, time step `Δt` and time window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub half_width: f64,
    pub h: f64,
    pub dt: f64,
    pub t_start: f64,
    pub t_end: f64,
}

impl GridSpec {
    /// Grid obeying the stability and propagation rules for interfaces inside radius `r_max`.
    ///
    /// `h = h_ratio·ε`, `L` is the smallest multiple of `h` with
    /// `L ≥ r_max + |t_end - t_start| + 0.5`, and `Δt` is the largest step
    /// below `min(0.5h/√2, 0.2ε)` that divides the window evenly.
    pub fn for_run(epsilon: f64, r_max: f64, t_start: f64, t_end: f64, h_ratio: f64) -> Self {
        let h = epsilon * h_ratio;
        let duration = (t_end - t_start).abs();
        let m = ((r_max + duration + 0.5) / h - 1e-9).ceil();
        let dt_max = Self::max_dt(h, epsilon);
        let steps = (duration / dt_max - 1e-9).ceil().max(1.0);
        Self {
            half_width: m * h,
            h,
            dt: duration / steps,
            t_start,
            t_end,
        }
    }

    pub fn max_dt(h: f64, epsilon: f64) -> f64 {
        (CFL_SAFETY * h / std::f64::consts::SQRT_2).min(0.2 * epsilon)
    }

    pub fn direction(&self) -> f64 {
        if self.t_end >= self.t_start {
            1.0
        } else {
            -1.0
        }
    }

    pub fn n_steps(&self) -> usize {
        ((self.t_end - self.t_start).abs() / self.dt).round() as usize
    }

    pub fn lattice(&self) -> Lattice {
        let m = (self.half_width / self.h).round() as usize;
        Lattice::new(2 * m + 1, 2 * m + 1, self.h)
    }

    pub fn validate(&self, epsilon: f64, r_max: f64) -> Result<()> {
        let tol = 1e-12;
        if self.h > epsilon / 8.0 * (1.0 + tol) {
            return Err(Error::InvalidGrid(format!("h = {} exceeds epsilon/8", self.h)));
        }
        if self.dt > Self::max_dt(self.h, epsilon) * (1.0 + tol) {
            return Err(Error::InvalidGrid(format!("dt = {} violates the CFL bound", self.dt)));
        }
        let need = r_max + (self.t_end - self.t_start).abs() + 0.5;
        if self.half_width < need * (1.0 - tol) {
            return Err(Error::InvalidGrid(format!(
                "half width {} below propagation margin {need}",
                self.half_width
            )));
        }
        Ok(())
    }
}

/// Node layout of a rectangular grid centred at the origin, row-major in `x₁`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
}

impl Lattice {
    pub fn new(nx: usize, ny: usize, h: f64) -> Self {
        Self { nx, ny, h }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn x_min(&self) -> f64 {
        -0.5 * (self.nx - 1) as f64 * self.h
    }

    #[inline]
    pub fn y_min(&self) -> f64 {
        -0.5 * (self.ny - 1) as f64 * self.h
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        (i as f64 - 0.5 * (self.nx - 1) as f64) * self.h
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        (j as f64 - 0.5 * (self.ny - 1) as f64) * self.h
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn half_width(&self) -> f64 {
        -self.x_min()
    }
}

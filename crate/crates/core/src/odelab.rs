//! One-dimensional machinery behind the fiber estimates.
//!
//! A fiber `v` defines `h_ε = v' - (1 - v²)/ε`. With `s₀` a zero of `v` and
//! `w_ε = v - τ_{s₀}q_ε`, the rescaled `w(z) = w_ε(εz + s₀)`, `h(z) = ε h_ε(εz + s₀)`
//! solve
//!
//! ```text
//! w' = -(2q + w)w + h,   w(0) = 0      on ℝ (truncated to (-Z, Z)).
//! ```
//!
//! [`apply_s`] solves the linearised problem `w₁' + (2q + w₀)w₁ = h` in closed
//! form, [`fixed_point`] iterates it, and [`coercivity_check`] evaluates the
//! energy inequalities on a fiber.

use serde::{Deserialize, Serialize};

use crate::diagnostics::{theta1, theta2};
use crate::error::{Error, Result};
use crate::profile::{q_eps, Fiber, C0};
use crate::quad::{derivative, lagrange4, simpson};

/// Symmetric grid `z_i = (i - half)·dz` on `[-Z, Z]`; `half` is even so both
/// halves split into Simpson panels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OdeGrid {
    pub half: usize,
    pub dz: f64,
}

impl Default for OdeGrid {
    fn default() -> Self {
        Self::new(40.0, 1e-3)
    }
}

impl OdeGrid {
    /// Grid on `[-Z', Z']` with `Z' ≥ z_max` and spacing `dz`.
    pub fn new(z_max: f64, dz: f64) -> Self {
        let mut half = (z_max / dz - 1e-9).ceil() as usize;
        half += half % 2;
        Self { half: half.max(2), dz }
    }

    pub fn len(&self) -> usize {
        2 * self.half + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn z_max(&self) -> f64 {
        self.half as f64 * self.dz
    }

    #[inline]
    pub fn z(&self, i: usize) -> f64 {
        (i as f64 - self.half as f64) * self.dz
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.len()).map(|i| f(self.z(i))).collect()
    }

    pub fn l2(&self, w: &[f64]) -> f64 {
        let sq: Vec<f64> = w.iter().map(|x| x * x).collect();
        simpson(&sq, self.dz).max(0.0).sqrt()
    }

    /// `(‖w‖² + ‖w'‖²)^{1/2}` with fourth-order differences.
    pub fn h1(&self, w: &[f64]) -> f64 {
        let dw = derivative(w, self.dz);
        let sq: Vec<f64> = w.iter().zip(&dw).map(|(a, b)| a * a + b * b).collect();
        simpson(&sq, self.dz).max(0.0).sqrt()
    }
}

/// `‖w‖²_{L∞}` against `½‖w‖²_{H¹}`, the sharp one-dimensional embedding.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SobolevCheck {
    pub sup_sq: f64,
    pub half_h1_sq: f64,
    pub holds: bool,
}

pub fn sobolev_check(grid: &OdeGrid, w: &[f64]) -> SobolevCheck {
    let sup = w.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let half_h1_sq = 0.5 * grid.h1(w).powi(2);
    SobolevCheck {
        sup_sq: sup * sup,
        half_h1_sq,
        holds: sup * sup <= half_h1_sq * (1.0 + 1e-9),
    }
}

/// State of one experiment on the `z` line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OdeProfile {
    pub grid: OdeGrid,
    pub w0: Vec<f64>,
    pub h: Vec<f64>,
    pub w: Vec<f64>,
}

impl OdeProfile {
    pub fn new(grid: OdeGrid, h: Vec<f64>) -> Self {
        assert_eq!(h.len(), grid.len());
        Self {
            grid,
            w0: vec![0.0; grid.len()],
            w: vec![0.0; grid.len()],
            h,
        }
    }

    pub fn h_l2(&self) -> f64 {
        self.grid.l2(&self.h)
    }

    pub fn w_h1(&self) -> f64 {
        self.grid.h1(&self.w)
    }

    /// `max |w' + (2q + w)w - h|` with fourth-order differences.
    pub fn residual(&self) -> f64 {
        nonlinear_residual(&self.grid, &self.w, &self.h)
    }
}

/// `h_ε = v' - (1 - v²)/ε` on the fiber grid.
pub fn compute_h(fiber: &Fiber, epsilon: f64) -> Fiber {
    let dv = fiber.derivative();
    let values = fiber
        .values
        .iter()
        .zip(&dv)
        .map(|(&v, &d)| d - (1.0 - v * v) / epsilon)
        .collect();
    Fiber {
        values,
        ..fiber.clone()
    }
}

/// The zero of `v` in `[-ρ/2, ρ/2]` closest to the origin.
///
/// Sign changes are refined with the cubic through the four nearest samples.
pub fn find_zero(fiber: &Fiber) -> Result<f64> {
    let n = fiber.len();
    let half = 0.5 * fiber.rho;
    let v = &fiber.values;
    let mut best: Option<f64> = None;
    for i in 0..n - 1 {
        let (a, b) = (fiber.z(i), fiber.z(i + 1));
        if b < -half || a > half {
            continue;
        }
        let root = if v[i] == 0.0 {
            a
        } else if v[i] * v[i + 1] < 0.0 {
            refine_root(fiber, i)
        } else {
            continue;
        };
        if root.abs() <= half && best.is_none_or(|r| root.abs() < r.abs()) {
            best = Some(root);
        }
    }
    best.ok_or(Error::NoZeroCrossing)
}

fn refine_root(fiber: &Fiber, i: usize) -> f64 {
    let n = fiber.len();
    let k = i.saturating_sub(1).min(n - 4);
    let t = [fiber.z(k), fiber.z(k + 1), fiber.z(k + 2), fiber.z(k + 3)];
    let vals = [
        fiber.values[k],
        fiber.values[k + 1],
        fiber.values[k + 2],
        fiber.values[k + 3],
    ];
    let (mut a, mut b) = (fiber.z(i), fiber.z(i + 1));
    let f = |x: f64| {
        let (w, _) = lagrange4(t, x);
        (0..4).map(|m| w[m] * vals[m]).sum::<f64>()
    };
    let fa = f(a);
    for _ in 0..60 {
        let m = 0.5 * (a + b);
        if f(m) * fa > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Rescaled pair on the `z` line.
#[derive(Clone, Debug, PartialEq)]
pub struct Rescaled {
    pub s0: f64,
    pub w: Vec<f64>,
    pub h: Vec<f64>,
}

/// `w(z) = w_ε(εz + s₀)`, `h(z) = ε h_ε(εz + s₀)` by cubic interpolation,
/// zero outside the fiber interval.
pub fn rescale_at(w_eps: &Fiber, h_eps: &Fiber, epsilon: f64, s0: f64, grid: &OdeGrid) -> Rescaled {
    let sample = |fib: &Fiber, scale: f64| -> Vec<f64> {
        let n = fib.len();
        let lo = fib.z(0);
        (0..grid.len())
            .map(|i| {
                let x = epsilon * grid.z(i) + s0;
                let f = (x - lo) / fib.dz;
                if f < 0.0 || f > (n - 1) as f64 {
                    return 0.0;
                }
                let k = (f.floor() as usize).saturating_sub(1).min(n - 4);
                let t = [fib.z(k), fib.z(k + 1), fib.z(k + 2), fib.z(k + 3)];
                let (w, _) = lagrange4(t, x);
                scale * (0..4).map(|m| w[m] * fib.values[k + m]).sum::<f64>()
            })
            .collect()
    };
    Rescaled {
        s0,
        w: sample(w_eps, 1.0),
        h: sample(h_eps, epsilon),
    }
}

/// Locates `s₀`, forms `w_ε = v - τ_{s₀}q_ε` and `h_ε`, and rescales both.
pub fn rescale(fiber: &Fiber, epsilon: f64, grid: &OdeGrid) -> Result<Rescaled> {
    let s0 = find_zero(fiber)?;
    let mut w_eps = fiber.clone();
    for i in 0..w_eps.len() {
        w_eps.values[i] -= q_eps(fiber.z(i) - s0, epsilon);
    }
    let h_eps = compute_h(fiber, epsilon);
    Ok(rescale_at(&w_eps, &h_eps, epsilon, s0, grid))
}

/// `H¹_ε(I)` norm `(ε⁻¹‖w‖² + ε‖w'‖²)^{1/2}` of a fiber.
pub fn fiber_h1eps(fiber: &Fiber, epsilon: f64) -> f64 {
    let dw = fiber.derivative();
    let sq: Vec<f64> = fiber
        .values
        .iter()
        .zip(&dw)
        .map(|(a, b)| a * a / epsilon + epsilon * b * b)
        .collect();
    simpson(&sq, fiber.dz).max(0.0).sqrt()
}

#[inline]
fn ln_cosh(s: f64) -> f64 {
    let a = s.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// Running integral from the centre outwards: Simpson on panel pairs, the
/// half-panel formula `(5f₀ + 8f₁ - f₂)/12` at odd offsets.
///
/// `f(a, b)` must return the integrand at node `a` weighted relative to node `b`;
/// `carry(a, b)` the factor applied to the accumulated value when moving from
/// `a` to `b`. For a plain integral both are `f(a)` and `1`.
fn cumulative_from_centre(
    grid: &OdeGrid,
    f: impl Fn(usize, usize) -> f64,
    carry: impl Fn(usize, usize) -> f64,
) -> Vec<f64> {
    let n = grid.len();
    let c = grid.half;
    let mut out = vec![0.0; n];
    for dir in [1isize, -1] {
        let node = |k: usize| (c as isize + dir * k as isize) as usize;
        let d = dir as f64 * grid.dz;
        let mut acc = 0.0;
        let mut k = 0;
        while k < grid.half {
            let (a, m, b) = (node(k), node(k + 1), node(k + 2));
            out[m] = carry(a, m) * acc + d / 12.0 * (5.0 * f(a, m) + 8.0 * f(m, m) - f(b, m));
            acc = carry(a, b) * acc + d / 3.0 * (f(a, b) + 4.0 * f(m, b) + f(b, b));
            out[b] = acc;
            k += 2;
        }
    }
    out
}

/// `Φ(s) = ∫₀^s (2q + w₀) = 2 ln cosh s + ∫₀^s w₀`.
pub fn phi(grid: &OdeGrid, w0: &[f64]) -> Vec<f64> {
    let tail = cumulative_from_centre(grid, |a, _| w0[a], |_, _| 1.0);
    (0..grid.len()).map(|i| 2.0 * ln_cosh(grid.z(i)) + tail[i]).collect()
}

/// `𝒮(w₀)(s) = e^{-Φ(s)} ∫₀^s e^{Φ(t)} h(t) dt`.
///
/// Accumulated as `I(b) = e^{Φ(a) - Φ(b)} I(a) + ∫_a^b e^{Φ(t) - Φ(b)} h`, so no
/// exponential ever exceeds the size of one panel. Requires `‖w₀‖_{H¹} ≤ √2`.
pub fn apply_s(grid: &OdeGrid, w0: &[f64], h: &[f64]) -> Result<Vec<f64>> {
    let norm = grid.h1(w0);
    if norm > std::f64::consts::SQRT_2 {
        return Err(Error::HypothesisViolated { norm });
    }
    Ok(apply_s_unchecked(grid, w0, h))
}

fn apply_s_unchecked(grid: &OdeGrid, w0: &[f64], h: &[f64]) -> Vec<f64> {
    let p = phi(grid, w0);
    cumulative_from_centre(grid, |a, b| (p[a] - p[b]).exp() * h[a], |a, b| (p[a] - p[b]).exp())
}

/// `max |w₁' + (2q + w₀)w₁ - h|`.
pub fn linear_residual(grid: &OdeGrid, w0: &[f64], w1: &[f64], h: &[f64]) -> f64 {
    let dw = derivative(w1, grid.dz);
    (0..grid.len())
        .map(|i| (dw[i] + (2.0 * grid.z(i).tanh() + w0[i]) * w1[i] - h[i]).abs())
        .fold(0.0, f64::max)
}

/// `max |w' + (2q + w)w - h|`.
pub fn nonlinear_residual(grid: &OdeGrid, w: &[f64], h: &[f64]) -> f64 {
    linear_residual(grid, w, w, h)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPointOptions {
    /// Stop when `‖w_{k+1} - w_k‖_{H¹} ≤ tol·‖w_{k+1}‖_{H¹}`.
    pub tol: f64,
    pub max_iter: usize,
    /// Admissible `‖h‖_{L²}`; larger data is run but logged.
    pub alpha0: f64,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 100,
            alpha0: 0.05,
        }
    }
}

/// Outcome of a Picard iteration, also the JSON record of the `fixedpoint` case.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPointReport {
    pub h_norm: f64,
    pub w_h1: f64,
    pub iterations: usize,
    pub factors: Vec<f64>,
    pub residual: f64,
    pub sobolev: SobolevCheck,
}

/// Picard iteration `w ← 𝒮(w)` from `w = 0`.
///
/// Contraction factors are ratios of successive `H¹` increments; a factor
/// `≥ 1` aborts with `NoContraction`.
pub fn fixed_point(profile: &mut OdeProfile, opts: &FixedPointOptions) -> Result<FixedPointReport> {
    let grid = profile.grid;
    let h_norm = profile.h_l2();
    if h_norm > opts.alpha0 {
        log::warn!("‖h‖ = {h_norm:.3e} exceeds alpha0 = {}", opts.alpha0);
    }
    let mut w = vec![0.0; grid.len()];
    let mut factors = Vec::new();
    let mut last: Option<f64> = None;
    let mut iterations = 0;
    loop {
        // the ball condition is left to the contraction test
        let next = apply_s_unchecked(&grid, &w, &profile.h);
        if next.iter().any(|x| !x.is_finite()) {
            return Err(Error::NoContraction {
                factor: f64::INFINITY,
                iteration: iterations + 1,
            });
        }
        iterations += 1;
        let diff: Vec<f64> = next.iter().zip(&w).map(|(a, b)| a - b).collect();
        let step = grid.h1(&diff);
        let size = grid.h1(&next);
        profile.w0 = std::mem::replace(&mut w, next);
        if let Some(prev) = last.filter(|&p| p > 0.0) {
            let factor = step / prev;
            factors.push(factor);
            if factor >= 1.0 {
                return Err(Error::NoContraction {
                    factor,
                    iteration: iterations,
                });
            }
        }
        last = Some(step);
        if step <= opts.tol * size || iterations >= opts.max_iter {
            break;
        }
    }
    if iterations >= opts.max_iter {
        log::warn!("Picard iteration stopped at max_iter = {}", opts.max_iter);
    }
    profile.w = w;
    Ok(FixedPointReport {
        h_norm,
        w_h1: profile.w_h1(),
        iterations,
        factors,
        residual: profile.residual(),
        sobolev: sobolev_check(&grid, &profile.w),
    })
}

/// Constants of the coercivity inequality.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoercivityOptions {
    /// Admissible `θ₂(v)`.
    pub c2: f64,
    pub big_c: f64,
    pub small_c: f64,
}

impl Default for CoercivityOptions {
    fn default() -> Self {
        Self {
            c2: 0.05,
            big_c: 20.0,
            small_c: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoercivityReport {
    pub epsilon: f64,
    /// `∫_I (√ε v' - (1 - v²)/√ε)²`.
    pub lhs: f64,
    pub theta1: f64,
    pub theta2: f64,
    /// `C θ₁ + C e^{-c/ε}`.
    pub rhs: f64,
    /// `lhs / θ₁`; infinite when `θ₁ ≤ 0`.
    pub ratio: f64,
    pub holds: bool,
    /// `∫_I (ε/2)v'² + (1/2ε)(v² - 1)² - c₀`.
    pub energy_gap: f64,
    /// `energy_gap ≥ -C e^{-c/ε}` up to quadrature tolerance.
    pub energy_bound_holds: bool,
}

/// Evaluates both energy inequalities on a fiber; requires `θ₂(v) ≤ c₂`.
pub fn coercivity_check(fiber: &Fiber, epsilon: f64, opts: &CoercivityOptions) -> Result<CoercivityReport> {
    let t2 = theta2(fiber);
    if t2 > opts.c2 {
        return Err(Error::HypothesisFailed {
            min: t2,
            bound: opts.c2,
        });
    }
    let dv = fiber.derivative();
    let root = epsilon.sqrt();
    let lhs_dens: Vec<f64> = fiber
        .values
        .iter()
        .zip(&dv)
        .map(|(&v, &d)| (root * d - (1.0 - v * v) / root).powi(2))
        .collect();
    let energy: Vec<f64> = fiber
        .values
        .iter()
        .zip(&dv)
        .map(|(&v, &d)| 0.5 * epsilon * d * d + 0.5 / epsilon * (v * v - 1.0).powi(2))
        .collect();
    let lhs = simpson(&lhs_dens, fiber.dz);
    let t1 = theta1(fiber, epsilon);
    let energy_gap = simpson(&energy, fiber.dz) - C0;
    // the lower bound is -C e^{-c/ε}: truncating the kink to I loses O(e^{-4ρ/ε})
    let tail = opts.big_c * (-opts.small_c / epsilon).exp();
    let rhs = opts.big_c * t1 + tail;
    let tol = 1e-6;
    Ok(CoercivityReport {
        epsilon,
        lhs,
        theta1: t1,
        theta2: t2,
        rhs,
        ratio: if t1 > 0.0 { lhs / t1 } else { f64::INFINITY },
        holds: lhs <= rhs,
        energy_gap,
        energy_bound_holds: energy_gap >= -(tail + tol),
    })
}

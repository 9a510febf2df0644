//! Modulation `s_*` of each fiber and the comparison field `U_ε`.
//!
//! For a fiber `v` on `I` the shift `s_*` minimises
//! `η(σ) = ‖v - τ_σ Q_ε‖²_{L²(I)}`, so that `∫_I (v - τ_{s_*}Q_ε) τ_{s_*}Q_ε' = 0`.
//! The comparison field is `V_ε(y) = Q_ε(y₂ - s_*(y₀, y₁))` in the tube,
//! `+1` on the rest of the enclosed region and `-1` elsewhere.

use std::f64::consts::TAU;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{FieldSource, Jet, Level, PullbackSlice};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geometry::{inside_from_crossings, ChartPoint, SlicePolygon, SurfaceChart};
use crate::profile::{Fiber, ProfileParams};
use crate::quad::{periodic_trapezoid, simpson_weights};
use crate::wave::Lattice;

const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Thresholds of the projection.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionOptions {
    /// Scan minimum must satisfy `min ‖v - τ_σQ_ε‖ ≤ c₃ √ε`.
    pub c3: f64,
    /// Convexity is certified at `s_* ± 2εδ`.
    pub delta: f64,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        Self { c3: 0.1, delta: 0.05 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionResult {
    pub s_star: f64,
    /// `∫_I (v - τ_{s_*}Q_ε)·τ_{s_*}Q_ε'`.
    pub residual_orthogonality: f64,
    /// `‖v - τ_{s_*}Q_ε‖_{L²(I)}`.
    pub min_value: f64,
    /// Smallest sampled `η''` near `s_*`.
    pub convexity_margin: f64,
    pub unique: bool,
}

/// `(η, η', η'')` at `σ` with Simpson weights `w`.
fn eta_parts(fiber: &Fiber, w: &[f64], sigma: f64, params: &ProfileParams) -> (f64, f64, f64) {
    let (mut e0, mut e1, mut e2) = (0.0, 0.0, 0.0);
    for (i, &v) in fiber.values.iter().enumerate() {
        let (q, dq, d2q) = params.big_q_derivs(fiber.z(i) - sigma);
        let r = v - q;
        e0 += w[i] * r * r;
        e1 += w[i] * r * dq;
        e2 += w[i] * (dq * dq - r * d2q);
    }
    (e0, 2.0 * e1, 2.0 * e2)
}

fn eta(fiber: &Fiber, w: &[f64], sigma: f64, params: &ProfileParams) -> f64 {
    fiber
        .values
        .iter()
        .enumerate()
        .map(|(i, &v)| w[i] * (v - params.big_q(fiber.z(i) - sigma)).powi(2))
        .sum()
}

/// `∫_I (v - τ_s Q_ε)·τ_s Q_ε'` by Simpson's rule.
pub fn orthogonality_residual(fiber: &Fiber, s: f64, params: &ProfileParams) -> f64 {
    let w = simpson_weights(fiber.len(), fiber.dz);
    0.5 * eta_parts(fiber, &w, s, params).1
}

/// `‖v - τ_σ Q_ε‖_{L²(I)}`.
pub fn projection_distance(fiber: &Fiber, sigma: f64, params: &ProfileParams) -> f64 {
    let w = simpson_weights(fiber.len(), fiber.dz);
    eta(fiber, &w, sigma, params).max(0.0).sqrt()
}

/// The `L²(I)`-closest translate `τ_{s_*}Q_ε` to `fiber`.
///
/// Scan of `‖v - τ_σQ_ε‖` on `[-ρ/2, ρ/2]` with spacing at most `ε/8`, golden
/// section on the bracketing cells down to `10⁻⁴ε`, then Newton on `η'`.
pub fn optimal_shift(fiber: &Fiber, params: &ProfileParams, opts: &ProjectionOptions) -> Result<DecompositionResult> {
    let eps = params.epsilon;
    let half = 0.5 * params.rho;
    let w = simpson_weights(fiber.len(), fiber.dz);
    let n = (2.0 * half / (eps / 8.0)).ceil() as usize;
    let step = 2.0 * half / n as f64;
    let sigma = |i: usize| -half + i as f64 * step;
    let phi: Vec<f64> = (0..=n)
        .map(|i| eta(fiber, &w, sigma(i), params).max(0.0).sqrt())
        .collect();
    let m = (0..=n).fold(0, |best, i| if phi[i] < phi[best] { i } else { best });
    let bound = opts.c3 * eps.sqrt();
    if phi[m] > bound {
        return Err(Error::HypothesisFailed { min: phi[m], bound });
    }
    let tol = 0.05 * bound;
    let competing = (0..=n).any(|i| {
        let local = (i == 0 || phi[i] <= phi[i - 1]) && (i == n || phi[i] <= phi[i + 1]);
        local && i.abs_diff(m) > 1 && phi[i] - phi[m] <= tol
    });

    let (mut a, mut b) = (sigma(m.saturating_sub(1)), sigma((m + 1).min(n)));
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let (mut fc, mut fd) = (eta(fiber, &w, c, params), eta(fiber, &w, d, params));
    while b - a > 1e-4 * eps {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = eta(fiber, &w, c, params);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = eta(fiber, &w, d, params);
        }
    }
    let mut s = 0.5 * (a + b);
    let (lo, hi) = (a - 1e-3 * eps, b + 1e-3 * eps);
    for _ in 0..3 {
        let (_, d1, d2) = eta_parts(fiber, &w, s, params);
        if !(d2 > 0.0) {
            break;
        }
        let next = s - d1 / d2;
        if !(lo..=hi).contains(&next) {
            break;
        }
        let moved = (next - s).abs();
        s = next;
        if moved < 1e-15 * eps {
            break;
        }
    }

    let (e0, e1, e2) = eta_parts(fiber, &w, s, params);
    let probe = 2.0 * eps * opts.delta;
    let margin = [s - probe, s + probe]
        .into_iter()
        .map(|x| eta_parts(fiber, &w, x, params).2)
        .fold(e2, f64::min);
    let certified = margin > 0.0;
    if competing && !certified {
        return Err(Error::NotUnique { margin });
    }
    Ok(DecompositionResult {
        s_star: s,
        residual_orthogonality: 0.5 * e1,
        min_value: e0.max(0.0).sqrt(),
        convexity_margin: margin,
        unique: certified && !competing,
    })
}

/// [`optimal_shift`] on every fiber of a slice.
pub fn decompose_slice(
    slice: &PullbackSlice,
    params: &ProfileParams,
    opts: &ProjectionOptions,
    exec: Execution,
) -> Result<Vec<DecompositionResult>> {
    exec.map(slice.spec.n1, |j| optimal_shift(&slice.fiber(j), params, opts))
        .into_iter()
        .collect()
}

/// `s_*` on a uniform `y₀` grid times `n1` equispaced `y₁`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftGrid {
    pub y0: Vec<f64>,
    pub n1: usize,
    pub rows: Vec<Vec<f64>>,
}

impl ShiftGrid {
    pub fn new(y0: Vec<f64>, n1: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        if y0.len() != rows.len() || rows.iter().any(|r| r.len() != n1) {
            return Err(Error::Config("shift grid rows do not match its axes".into()));
        }
        Ok(Self { y0, n1, rows })
    }

    /// Samples `f(y₀, y₁)` on the grid.
    pub fn from_fn(y0: Vec<f64>, n1: usize, f: impl Fn(f64, f64) -> f64) -> Self {
        let rows = y0
            .iter()
            .map(|&a| (0..n1).map(|j| f(a, TAU * j as f64 / n1 as f64)).collect())
            .collect();
        Self { y0, n1, rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn values(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    /// `∂_{y₀}s_*` on slice `i`: centred differences, second-order one-sided at the ends.
    pub fn d0(&self, i: usize) -> Result<Vec<f64>> {
        let n = self.len();
        if n < 3 {
            return Err(Error::InsufficientSlices(n));
        }
        let h = self.y0[1] - self.y0[0];
        let r = &self.rows;
        Ok((0..self.n1)
            .map(|j| {
                if i == 0 {
                    (-3.0 * r[0][j] + 4.0 * r[1][j] - r[2][j]) / (2.0 * h)
                } else if i == n - 1 {
                    (3.0 * r[n - 1][j] - 4.0 * r[n - 2][j] + r[n - 3][j]) / (2.0 * h)
                } else {
                    (r[i + 1][j] - r[i - 1][j]) / (2.0 * h)
                }
            })
            .collect())
    }

    /// `∂_{y₁}s_*` on slice `i`: periodic fourth-order centred differences.
    pub fn d1(&self, i: usize) -> Vec<f64> {
        let n = self.n1;
        let h = TAU / n as f64;
        let s = &self.rows[i];
        (0..n)
            .map(|j| {
                let at = |o: isize| s[(j as isize + o).rem_euclid(n as isize) as usize];
                (at(-2) - 8.0 * at(-1) + 8.0 * at(1) - at(2)) / (12.0 * h)
            })
            .collect()
    }

    /// Bilinear `(s, ∂₀s, ∂₁s)`; periodic in `y₁`, linear extrapolation in `y₀`.
    pub fn bilinear(&self, y0: f64, y1: f64) -> [f64; 3] {
        let n0 = self.len();
        if n0 == 1 {
            let g = ShiftGrid {
                y0: vec![self.y0[0], self.y0[0] + 1.0],
                n1: self.n1,
                rows: vec![self.rows[0].clone(), self.rows[0].clone()],
            };
            return g.bilinear(y0, y1);
        }
        let h0 = self.y0[1] - self.y0[0];
        let f0 = (y0 - self.y0[0]) / h0;
        let i = (f0.floor().max(0.0) as usize).min(n0 - 2);
        let a = f0 - i as f64;
        let h1 = TAU / self.n1 as f64;
        let f1 = y1.rem_euclid(TAU) / h1;
        let j = (f1.floor() as usize).min(self.n1 - 1);
        let b = f1 - j as f64;
        let jn = (j + 1) % self.n1;
        let r = &self.rows;
        let (s00, s01, s10, s11) = (r[i][j], r[i][jn], r[i + 1][j], r[i + 1][jn]);
        let s = (1.0 - a) * ((1.0 - b) * s00 + b * s01) + a * ((1.0 - b) * s10 + b * s11);
        let ds0 = ((1.0 - b) * (s10 - s00) + b * (s11 - s01)) / h0;
        let ds1 = ((1.0 - a) * (s01 - s00) + a * (s11 - s10)) / h1;
        [s, ds0, ds1]
    }

    /// Writes `y0,y1,s_star,residual`.
    pub fn write_csv(&self, path: &Path, residuals: &[Vec<f64>]) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(Error::csv(path))?;
        w.write_record(["y0", "y1", "s_star", "residual"])
            .map_err(Error::csv(path))?;
        for (i, row) in self.rows.iter().enumerate() {
            for (j, s) in row.iter().enumerate() {
                let res = residuals.get(i).and_then(|r| r.get(j)).copied().unwrap_or(f64::NAN);
                let y1 = TAU * j as f64 / self.n1 as f64;
                w.write_record([self.y0[i], y1, *s, res].map(|x| format!("{x:e}")))
                    .map_err(Error::csv(path))?;
            }
        }
        w.flush().map_err(Error::io(path))
    }
}

/// `∫_{S¹} s_*² + (∂_{y₀}s_*)² + (∂_{y₁}s_*)² dy₁` on slice `i`.
pub fn shift_h1_norm(grid: &ShiftGrid, i: usize) -> Result<f64> {
    let d0 = grid.d0(i)?;
    let d1 = grid.d1(i);
    let dens: Vec<f64> = (0..grid.n1)
        .map(|j| grid.rows[i][j].powi(2) + d0[j] * d0[j] + d1[j] * d1[j])
        .collect();
    Ok(periodic_trapezoid(&dens, TAU))
}

/// `(s, ∂₀s, ∂₁s)` as a function of `(y₀, y₁)`.
pub type ShiftFn = Arc<dyn Fn(f64, f64) -> [f64; 3] + Send + Sync>;

/// Modulation used by the comparison field.
#[derive(Clone)]
pub enum Shift {
    Zero,
    Grid(ShiftGrid),
    Analytic(ShiftFn),
}

impl Shift {
    pub fn eval(&self, y0: f64, y1: f64) -> [f64; 3] {
        match self {
            Shift::Zero => [0.0; 3],
            Shift::Grid(g) => g.bilinear(y0, y1),
            Shift::Analytic(f) => f(y0, y1),
        }
    }
}

impl std::fmt::Debug for Shift {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Shift::Zero => write!(f, "Shift::Zero"),
            Shift::Grid(g) => write!(f, "Shift::Grid({}x{})", g.len(), g.n1),
            Shift::Analytic(_) => write!(f, "Shift::Analytic"),
        }
    }
}

/// The comparison field `U_ε` of a modulation.
#[derive(Clone, Debug)]
pub struct ComparisonField<'a> {
    pub chart: &'a SurfaceChart,
    pub params: ProfileParams,
    pub shift: Shift,
}

/// Assembles `U_ε`; a grid modulation must lie inside the chart's time range.
pub fn build_comparison<'a>(
    chart: &'a SurfaceChart,
    shift: Shift,
    params: ProfileParams,
) -> Result<ComparisonField<'a>> {
    if let Shift::Grid(g) = &shift {
        if let Some(&y0) = g.y0.iter().find(|&&y0| !chart.covers(y0)) {
            return Err(Error::ChartUnavailable {
                t: y0,
                lo: -chart.t_minus,
                hi: chart.t_plus,
            });
        }
    }
    Ok(ComparisonField { chart, params, shift })
}

impl ComparisonField<'_> {
    /// `V_ε` and `∇_y V_ε` at chart coordinates `y`.
    pub fn in_chart(&self, y0: f64, y1: f64, y2: f64) -> (f64, [f64; 3]) {
        let [s, s0, s1] = self.shift.eval(y0, y1);
        let (q, dq, _) = self.params.big_q_derivs(y2 - s);
        (q, [-dq * s0, -dq * s1, dq])
    }

    fn jet_at(&self, cp: &ChartPoint) -> Result<Jet> {
        let (v, g) = self.in_chart(cp.y0, cp.y1, cp.y2);
        let jac = self.chart.frame(cp.y0, cp.y1)?.jacobian(cp.y2);
        let inv = jac.try_inverse().ok_or(Error::SingularChart {
            min_det: 0.0,
            floor: self.chart.det_floor,
        })?;
        let mut du = [0.0; 3];
        for (c, out) in du.iter_mut().enumerate() {
            *out = inv[(0, c)] * g[0] + inv[(1, c)] * g[1] + inv[(2, c)] * g[2];
        }
        Ok(Jet { u: v, du })
    }

    /// `U_ε(t, x)`.
    pub fn value(&self, t: f64, x: [f64; 2]) -> f64 {
        let cp = self.chart.locate(t, x, None);
        if cp.inside_tube {
            self.in_chart(cp.y0, cp.y1, cp.y2).0
        } else if SlicePolygon::new(&self.chart.loops, t, 1024).contains(x[0], x[1]) {
            1.0
        } else {
            -1.0
        }
    }
}

impl FieldSource for ComparisonField<'_> {
    fn epsilon(&self) -> f64 {
        self.params.epsilon
    }

    fn jet(&self, t: f64, x: [f64; 2], hint: Option<&ChartPoint>) -> Result<Jet> {
        let cp = self.chart.locate(t, x, hint);
        if cp.inside_tube {
            return self.jet_at(&cp);
        }
        let inside = SlicePolygon::new(&self.chart.loops, t, 1024).contains(x[0], x[1]);
        Ok(Jet {
            u: if inside { 1.0 } else { -1.0 },
            du: [0.0; 3],
        })
    }

    fn level(&self, t: f64, lattice: &Lattice, exec: Execution) -> Result<Level> {
        let chart = self.chart;
        let poly = SlicePolygon::new(&chart.loops, t, 1024);
        let reach = chart.tube_reach(2.0 * chart.rho) + poly.max_edge() + 2.0 * lattice.h;
        let nx = lattice.nx;
        let xs: Vec<f64> = (0..nx).map(|i| lattice.x(i)).collect();
        let rows = exec.map(lattice.ny, |j| -> Result<(Vec<f64>, Vec<f64>)> {
            let x2 = lattice.y(j);
            let cps = chart.locate_row(t, x2, &xs, &poly, reach);
            let crossings = poly.row_crossings(x2);
            let mut u = vec![0.0; nx];
            let mut ut = vec![0.0; nx];
            for i in 0..nx {
                if cps[i].inside_tube {
                    let jet = self.jet_at(&cps[i])?;
                    u[i] = jet.u;
                    ut[i] = jet.du[0];
                } else {
                    u[i] = if inside_from_crossings(&crossings, xs[i]) {
                        1.0
                    } else {
                        -1.0
                    };
                }
            }
            Ok((u, ut))
        });
        let mut level = Level {
            t,
            lattice: *lattice,
            u: Vec::with_capacity(lattice.len()),
            ut: Vec::with_capacity(lattice.len()),
        };
        for r in rows {
            let (u, ut) = r?;
            level.u.extend(u);
            level.ut.extend(ut);
        }
        Ok(level)
    }
}

//! Minkowskian normal coordinates `Ψ(y₀, y₁, y₂) = ψ(y₀, y₁) + y₂ ν(y₀, y₁)`.

use std::f64::consts::{PI, TAU};
use std::io::Write as _;
use std::path::Path;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::loops::LoopPair;
use super::region::SlicePolygon;
use crate::error::{Error, Result};

pub type Point3 = Vector3<f64>;

/// `η(a, b)` with `η = diag(-1, 1, 1)`.
#[inline]
pub fn eta(a: &Point3, b: &Point3) -> f64 {
    -a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
fn eta_raise(v: Point3) -> Point3 {
    Point3::new(-v[0], v[1], v[2])
}

/// Wraps an angle into `(-π, π]`.
#[inline]
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Surface point, tangents, unit normal and normal derivatives at one `(y₀, y₁)`.
#[derive(Clone, Copy, Debug)]
pub struct Frame {
    pub psi: Point3,
    pub d0: Point3,
    pub d1: Point3,
    pub nu: Point3,
    pub dnu0: Point3,
    pub dnu1: Point3,
}

impl Frame {
    #[inline]
    pub fn map(&self, y2: f64) -> Point3 {
        self.psi + self.nu * y2
    }

    #[inline]
    pub fn jacobian(&self, y2: f64) -> Matrix3<f64> {
        Matrix3::from_columns(&[self.d0 + self.dnu0 * y2, self.d1 + self.dnu1 * y2, self.nu])
    }
}

/// Chart coordinates of a spacetime point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub y0: f64,
    pub y1: f64,
    pub y2: f64,
    pub inside_tube: bool,
}

impl ChartPoint {
    pub const OUTSIDE: ChartPoint = ChartPoint {
        y0: f64::NAN,
        y1: f64::NAN,
        y2: f64::NAN,
        inside_tube: false,
    };
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartOptions {
    /// `T₁`: the chart covers `y₀ > -T₁`.
    pub t_minus: f64,
    /// `T¹`: the chart covers `y₀ < T¹`.
    pub t_plus: f64,
    /// Tube half-width; `None` picks `0.25 ×` the smallest curvature radius and shrinks as needed.
    pub rho: Option<f64>,
    pub det_floor: f64,
}

impl Default for ChartOptions {
    fn default() -> Self {
        Self {
            t_minus: 0.45,
            t_plus: 0.45,
            rho: None,
            det_floor: 1e-6,
        }
    }
}

const TABLE_N1: usize = 128;
const TABLE_N2: usize = 17;
const NEWTON_MAX_ITER: usize = 50;
const NEWTON_TOL: f64 = 1e-10;

/// Immutable chart of the tube `(-T₁, T¹) × S¹ × (-2ρ, 2ρ)` around an extremal surface.
#[derive(Clone, Debug)]
pub struct SurfaceChart {
    pub loops: LoopPair,
    pub t_minus: f64,
    pub t_plus: f64,
    pub rho: f64,
    pub det_floor: f64,
    min_det: f64,
    sigma: f64,
    seeds: SeedIndex,
}

impl SurfaceChart {
    pub fn new(loops: LoopPair, opts: &ChartOptions) -> Result<Self> {
        if opts.t_minus <= 0.0 && opts.t_plus <= 0.0 {
            return Err(Error::Config("empty chart time range".into()));
        }
        let mut chart = Self {
            loops,
            t_minus: opts.t_minus,
            t_plus: opts.t_plus,
            rho: opts.rho.unwrap_or(0.0),
            det_floor: opts.det_floor,
            min_det: 0.0,
            sigma: 1.0,
            seeds: SeedIndex::default(),
        };
        match opts.rho {
            Some(rho) => {
                chart.rho = rho;
                chart.min_det = chart.scan_min_det();
                if chart.min_det < chart.det_floor {
                    return Err(Error::SingularChart {
                        min_det: chart.min_det,
                        floor: chart.det_floor,
                    });
                }
            }
            None => {
                chart.rho = 0.25 * chart.min_curvature_radius();
                let mut tries = 0;
                loop {
                    chart.min_det = chart.scan_min_det();
                    if chart.min_det >= chart.det_floor {
                        break;
                    }
                    tries += 1;
                    if tries > 60 || !chart.rho.is_finite() {
                        return Err(Error::SingularChart {
                            min_det: chart.min_det,
                            floor: chart.det_floor,
                        });
                    }
                    chart.rho *= 0.9;
                }
                log::info!("chart tube half-width rho = {:.5}", chart.rho);
            }
        }
        chart.sigma = chart.orientation()?;
        chart.seeds = SeedIndex::build(&chart)?;
        Ok(chart)
    }

    pub fn min_det(&self) -> f64 {
        self.min_det
    }

    /// Whether `y₀` lies in the chart's time range.
    #[inline]
    pub fn covers(&self, y0: f64) -> bool {
        y0 > -self.t_minus && y0 < self.t_plus
    }

    /// Tangents, normal and normal derivatives with the raw orientation `σ`.
    fn frame_with(&self, y0: f64, y1: f64, sigma: f64) -> Result<Frame> {
        let ea = self.loops.a.eval(y0 + y1);
        let eb = self.loops.b.eval(y0 - y1);
        let half = |u: [f64; 2], v: [f64; 2], s: f64| [0.5 * (u[0] + s * v[0]), 0.5 * (u[1] + s * v[1])];
        let pos = half(ea.value, eb.value, 1.0);
        let t0 = half(ea.d1, eb.d1, 1.0);
        let t1 = half(ea.d1, eb.d1, -1.0);
        let s00 = half(ea.d2, eb.d2, 1.0);
        let s01 = half(ea.d2, eb.d2, -1.0);

        let psi = Point3::new(y0, pos[0], pos[1]);
        let x = Point3::new(1.0, t0[0], t0[1]);
        let y = Point3::new(0.0, t1[0], t1[1]);
        // ∂₀X = ∂₁Y = s00, ∂₁X = ∂₀Y = s01
        let x0 = Point3::new(0.0, s00[0], s00[1]);
        let x1 = Point3::new(0.0, s01[0], s01[1]);
        let (y0v, y1v) = (x1, x0);

        let n = eta_raise(x.cross(&y));
        let nn = eta(&n, &n);
        if !(nn > 1e-14) {
            return Err(Error::DegenerateTangents { y0, y1 });
        }
        let norm = nn.sqrt();
        let dn0 = eta_raise(x0.cross(&y) + x.cross(&y0v));
        let dn1 = eta_raise(x1.cross(&y) + x.cross(&y1v));
        let nu = n * (sigma / norm);
        let dnu = |dn: Point3| (dn / norm - n * (eta(&n, &dn) / (norm * nn))) * sigma;
        Ok(Frame {
            psi,
            d0: x,
            d1: y,
            nu,
            dnu0: dnu(dn0),
            dnu1: dnu(dn1),
        })
    }

    /// Surface data at `(y₀, y₁)` with the inward normal.
    pub fn frame(&self, y0: f64, y1: f64) -> Result<Frame> {
        self.frame_with(y0, y1, self.sigma)
    }

    /// `ψ(y₀, y₁) = (y₀, ½(a(y₀+y₁) + b(y₀-y₁)))`.
    pub fn surface_point(&self, y0: f64, y1: f64) -> Point3 {
        let ea = self.loops.a.eval(y0 + y1);
        let eb = self.loops.b.eval(y0 - y1);
        Point3::new(y0, 0.5 * (ea.value[0] + eb.value[0]), 0.5 * (ea.value[1] + eb.value[1]))
    }

    /// Minkowski unit normal `ν`, oriented towards the enclosed region.
    pub fn minkowski_normal(&self, y0: f64, y1: f64) -> Result<Point3> {
        Ok(self.frame(y0, y1)?.nu)
    }

    fn check_tube(&self, y2: f64) -> Result<()> {
        if y2.abs() < 2.0 * self.rho {
            Ok(())
        } else {
            Err(Error::OutOfTube {
                y2: y2.abs(),
                limit: 2.0 * self.rho,
            })
        }
    }

    pub fn chart_map(&self, y0: f64, y1: f64, y2: f64) -> Result<Point3> {
        self.check_tube(y2)?;
        Ok(self.frame(y0, y1)?.map(y2))
    }

    /// `DΨ` (columns `∂Ψ/∂yᵢ`) and its determinant.
    pub fn chart_jacobian(&self, y0: f64, y1: f64, y2: f64) -> Result<(Matrix3<f64>, f64)> {
        self.check_tube(y2)?;
        let j = self.frame(y0, y1)?.jacobian(y2);
        let det = j.determinant();
        if det.abs() < self.det_floor {
            return Err(Error::SingularChart {
                min_det: det.abs(),
                floor: self.det_floor,
            });
        }
        Ok((j, det))
    }

    /// `DΨ` by fourth-order centred differences of `Ψ` with step `h`.
    pub fn chart_jacobian_fd(&self, y0: f64, y1: f64, y2: f64, h: f64) -> Result<Matrix3<f64>> {
        let map = |a: f64, b: f64, c: f64| -> Result<Point3> { Ok(self.frame(a, b)?.map(c)) };
        let mut cols = [Point3::zeros(); 3];
        for (i, col) in cols.iter_mut().enumerate() {
            let at = |k: f64| -> Result<Point3> {
                let mut y = [y0, y1, y2];
                y[i] += k * h;
                map(y[0], y[1], y[2])
            };
            *col = (at(-2.0)? - at(-1.0)? * 8.0 + at(1.0)? * 8.0 - at(2.0)?) / (12.0 * h);
        }
        Ok(Matrix3::from_columns(&cols))
    }

    fn scan_min_det(&self) -> f64 {
        let n0 = 33;
        let n1 = 128;
        let n2 = 17;
        let mut min_det = f64::INFINITY;
        let mut sign = 0.0;
        for i in 0..n0 {
            let y0 = -self.t_minus + (self.t_minus + self.t_plus) * i as f64 / (n0 - 1) as f64;
            for j in 0..n1 {
                let y1 = TAU * j as f64 / n1 as f64;
                let frame = match self.frame_with(y0, y1, 1.0) {
                    Ok(f) => f,
                    Err(_) => return 0.0,
                };
                for k in 0..n2 {
                    let y2 = -2.0 * self.rho + 4.0 * self.rho * k as f64 / (n2 - 1) as f64;
                    let det = frame.jacobian(y2).determinant();
                    // a sign change means det DΨ vanishes between samples
                    if sign == 0.0 {
                        sign = det.signum();
                    } else if det.signum() != sign {
                        return 0.0;
                    }
                    min_det = min_det.min(det.abs());
                }
            }
        }
        min_det
    }

    /// Largest `|x|` over the tube image, sampled on the chart domain.
    pub fn max_spatial_radius(&self) -> f64 {
        let n0 = 33;
        let n1 = 256;
        let mut r: f64 = 0.0;
        for i in 0..n0 {
            let y0 = -self.t_minus + (self.t_minus + self.t_plus) * i as f64 / (n0 - 1) as f64;
            for j in 0..n1 {
                let y1 = TAU * j as f64 / n1 as f64;
                if let Ok(f) = self.frame(y0, y1) {
                    for y2 in [-2.0 * self.rho, 0.0, 2.0 * self.rho] {
                        let p = f.map(y2);
                        r = r.max(p[1].hypot(p[2]));
                    }
                }
            }
        }
        r
    }

    /// Bound on the spatial distance from `Γ_t` of any tube point `Ψ(y)` with
    /// `|y₂| < width` and `Ψ⁰(y) = t`.
    ///
    /// Moving along the fiber shifts time by `y₂ν⁰` and space by `y₂ν⃗`; the
    /// surface itself moves at most at unit speed, so the bound is
    /// `width·(max|ν⃗| + max|ν⁰|)`, sampled over the chart domain with a 5% pad.
    pub fn tube_reach(&self, width: f64) -> f64 {
        let n0 = 33;
        let n1 = 256;
        let (mut sp, mut tm): (f64, f64) = (0.0, 0.0);
        for i in 0..n0 {
            let y0 = -self.t_minus + (self.t_minus + self.t_plus) * i as f64 / (n0 - 1) as f64;
            for j in 0..n1 {
                let y1 = TAU * j as f64 / n1 as f64;
                if let Ok(f) = self.frame(y0, y1) {
                    sp = sp.max(f.nu[1].hypot(f.nu[2]));
                    tm = tm.max(f.nu[0].abs());
                }
            }
        }
        1.05 * width * (sp + tm)
    }

    /// Time range `[min Ψ⁰, max Ψ⁰]` over `(-T₁, T¹) × S¹ × (-width, width)`.
    pub fn time_span(&self, width: f64) -> (f64, f64) {
        let (n0, n1) = (33, 256);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..n0 {
            let y0 = -self.t_minus + (self.t_minus + self.t_plus) * i as f64 / (n0 - 1) as f64;
            for j in 0..n1 {
                let y1 = TAU * j as f64 / n1 as f64;
                if let Ok(f) = self.frame(y0, y1) {
                    for y2 in [-width, width] {
                        let t = f.map(y2)[0];
                        lo = lo.min(t);
                        hi = hi.max(t);
                    }
                }
            }
        }
        (lo, hi)
    }

    /// Smallest curvature radius of the slices `Γ_t` over the chart's time range.
    pub fn min_curvature_radius(&self) -> f64 {
        let n0 = 33;
        let n1 = 256;
        let mut kmax: f64 = 0.0;
        for i in 0..n0 {
            let y0 = -self.t_minus + (self.t_minus + self.t_plus) * i as f64 / (n0 - 1) as f64;
            for j in 0..n1 {
                let y1 = TAU * j as f64 / n1 as f64;
                let ea = self.loops.a.eval(y0 + y1);
                let eb = self.loops.b.eval(y0 - y1);
                let v = [0.5 * (ea.d1[0] - eb.d1[0]), 0.5 * (ea.d1[1] - eb.d1[1])];
                let acc = [0.5 * (ea.d2[0] + eb.d2[0]), 0.5 * (ea.d2[1] + eb.d2[1])];
                let speed = v[0].hypot(v[1]);
                let k = (v[0] * acc[1] - v[1] * acc[0]).abs() / speed.powi(3);
                kmax = kmax.max(k);
            }
        }
        1.0 / kmax
    }

    /// `+1` if the raw normal `η⁻¹(∂₀ψ × ∂₁ψ)` already points into the enclosed region.
    fn orientation(&self) -> Result<f64> {
        let y0 = if self.covers(0.0) {
            0.0
        } else {
            0.5 * (self.t_plus - self.t_minus)
        };
        let delta = 1e-3 * self.rho.max(1e-3);
        let mut votes = 0i32;
        for j in 0..8 {
            let y1 = TAU * j as f64 / 8.0;
            let f = self.frame_with(y0, y1, 1.0)?;
            let p = f.map(delta);
            let poly = SlicePolygon::new(&self.loops, p[0], 1024);
            votes += if poly.contains(p[1], p[2]) { 1 } else { -1 };
        }
        if votes.unsigned_abs() != 8 {
            return Err(Error::DegenerateTangents { y0, y1: 0.0 });
        }
        Ok(votes.signum() as f64)
    }

    /// Newton iteration for `Ψ(y) = p` from `start`; returns the point and final residual.
    fn newton(&self, p: &Point3, start: [f64; 3]) -> (Option<[f64; 3]>, f64, usize) {
        let mut y = start;
        let mut residual = f64::INFINITY;
        for it in 0..NEWTON_MAX_ITER {
            let frame = match self.frame(y[0], y[1]) {
                Ok(f) => f,
                Err(_) => return (None, residual, it),
            };
            let r = frame.map(y[2]) - p;
            residual = r.amax();
            if residual < 1e-13 {
                return (Some(y), residual, it);
            }
            let step = match frame.jacobian(y[2]).lu().solve(&r) {
                Some(s) => s,
                None => return (None, residual, it),
            };
            y = [y[0] - step[0], wrap_angle(y[1] - step[1]), y[2] - step[2]];
            if step.amax() < 1e-15 {
                break;
            }
            if step.amax() > 1.0 {
                return (None, residual, it);
            }
        }
        let frame = match self.frame(y[0], y[1]) {
            Ok(f) => f,
            Err(_) => return (None, residual, NEWTON_MAX_ITER),
        };
        residual = (frame.map(y[2]) - p).amax();
        if residual < NEWTON_TOL {
            (Some(y), residual, NEWTON_MAX_ITER)
        } else {
            (None, residual, NEWTON_MAX_ITER)
        }
    }

    fn classify(&self, y: [f64; 3]) -> ChartPoint {
        ChartPoint {
            y0: y[0],
            y1: y[1],
            y2: y[2],
            inside_tube: y[2].abs() < 2.0 * self.rho && self.covers(y[0]),
        }
    }

    /// Chart coordinates of `(t, x)`; points with no nearby table entry are outside the tube.
    pub fn invert_chart(&self, t: f64, x: [f64; 2]) -> Result<ChartPoint> {
        let p = Point3::new(t, x[0], x[1]);
        let Some(seed) = self.seeds.nearest(&p) else {
            return Ok(ChartPoint::OUTSIDE);
        };
        match self.newton(&p, seed) {
            (Some(y), _, _) => Ok(self.classify(y)),
            (None, residual, iterations) => Err(Error::NewtonDiverged { residual, iterations }),
        }
    }

    /// Like [`invert_chart`](Self::invert_chart) but starts Newton from a nearby known point.
    ///
    /// Falls back to table seeding when the warm start fails or lands far outside the tube.
    pub fn invert_chart_near(&self, t: f64, x: [f64; 2], guess: &ChartPoint) -> Result<ChartPoint> {
        if guess.y0.is_finite() && guess.y2.abs() < 3.0 * self.rho {
            let p = Point3::new(t, x[0], x[1]);
            if let (Some(y), _, _) = self.newton(&p, [guess.y0, guess.y1, guess.y2]) {
                if y[2].abs() < 3.0 * self.rho {
                    return Ok(self.classify(y));
                }
            }
        }
        self.invert_chart(t, x)
    }

    /// Inversion that treats Newton failures as outside (logged at debug level).
    pub fn locate(&self, t: f64, x: [f64; 2], guess: Option<&ChartPoint>) -> ChartPoint {
        let r = match guess {
            Some(g) => self.invert_chart_near(t, x, g),
            None => self.invert_chart(t, x),
        };
        r.unwrap_or_else(|e| {
            log::debug!("chart inversion at ({t}, {x:?}): {e}");
            ChartPoint::OUTSIDE
        })
    }

    /// Chart points of the row `(t, xs[i], x2)`.
    ///
    /// Only nodes within `reach` of the polygon `poly` of `Γ_t` are inverted
    /// (warm-started along the row); the rest are [`ChartPoint::OUTSIDE`].
    pub fn locate_row(&self, t: f64, x2: f64, xs: &[f64], poly: &SlicePolygon, reach: f64) -> Vec<ChartPoint> {
        let intervals = poly.near_intervals(x2, reach);
        let mut out = vec![ChartPoint::OUTSIDE; xs.len()];
        let mut guess: Option<ChartPoint> = None;
        let mut iv = 0;
        for (i, &x1) in xs.iter().enumerate() {
            while iv < intervals.len() && intervals[iv][1] < x1 {
                iv += 1;
                guess = None;
            }
            if iv == intervals.len() {
                break;
            }
            if x1 < intervals[iv][0] {
                continue;
            }
            let cp = self.locate(t, [x1, x2], guess.as_ref());
            if cp.y0.is_finite() {
                guess = Some(cp);
            }
            out[i] = cp;
        }
        out
    }

    /// Whether `(t, x)` lies in the region enclosed by `Γ`.
    ///
    /// In the tube this is the sign of `y₂`; elsewhere a crossing test against `Γ_t`.
    pub fn enclosed_region_test(&self, t: f64, x: [f64; 2]) -> bool {
        let cp = self.locate(t, x, None);
        if cp.inside_tube {
            return cp.y2 > 0.0;
        }
        SlicePolygon::new(&self.loops, t, 1024).contains(x[0], x[1])
    }

    /// Writes `ψ`, `ν` and `det DΨ|_{y₂=0}` on an `n0 × n1` grid as CSV.
    pub fn write_table_csv(&self, path: &Path, n0: usize, n1: usize) -> Result<()> {
        let mut out = String::from("y0,y1,psi0,psi1,psi2,nu0,nu1,nu2,detDPsi\n");
        for i in 0..n0 {
            let y0 = if n0 > 1 {
                -self.t_minus + (self.t_minus + self.t_plus) * i as f64 / (n0 - 1) as f64
            } else {
                0.0
            };
            for j in 0..n1 {
                let y1 = TAU * j as f64 / n1 as f64;
                let f = self.frame(y0, y1)?;
                let det = f.jacobian(0.0).determinant();
                out.push_str(&format!(
                    "{y0},{y1},{},{},{},{},{},{},{det}\n",
                    f.psi[0], f.psi[1], f.psi[2], f.nu[0], f.nu[1], f.nu[2]
                ));
            }
        }
        let mut file = std::fs::File::create(path).map_err(Error::io(path))?;
        file.write_all(out.as_bytes()).map_err(Error::io(path))
    }
}

/// Bucketed lookup of precomputed chart points, used to seed Newton.
#[derive(Clone, Debug, Default)]
struct SeedIndex {
    ys: Vec<[f64; 3]>,
    points: Vec<Point3>,
    origin: [f64; 3],
    cell: f64,
    dims: [usize; 3],
    starts: Vec<u32>,
    entries: Vec<u32>,
}

impl SeedIndex {
    fn build(chart: &SurfaceChart) -> Result<Self> {
        let pad = 0.05;
        let lo = -chart.t_minus - pad;
        let hi = chart.t_plus + pad;
        let n0 = ((hi - lo) / 0.015).ceil().max(64.0) as usize;
        let (n1, n2) = (TABLE_N1, TABLE_N2);
        let mut ys = Vec::with_capacity(n0 * n1 * n2);
        let mut points = Vec::with_capacity(n0 * n1 * n2);
        for i in 0..n0 {
            let y0 = lo + (hi - lo) * i as f64 / (n0 - 1) as f64;
            for j in 0..n1 {
                let y1 = wrap_angle(TAU * j as f64 / n1 as f64);
                let f = chart.frame(y0, y1)?;
                for k in 0..n2 {
                    let y2 = -2.0 * chart.rho + 4.0 * chart.rho * k as f64 / (n2 - 1) as f64;
                    ys.push([y0, y1, y2]);
                    points.push(f.map(y2));
                }
            }
        }
        // Largest image spacing along each table direction bounds the distance
        // from any tube point to its nearest table entry.
        let idx = |i: usize, j: usize, k: usize| (i * n1 + j) * n2 + k;
        let mut d = [0.0f64; 3];
        for i in 0..n0 {
            for j in 0..n1 {
                for k in 0..n2 {
                    let p = points[idx(i, j, k)];
                    if i + 1 < n0 {
                        d[0] = d[0].max((points[idx(i + 1, j, k)] - p).norm());
                    }
                    d[1] = d[1].max((points[idx(i, (j + 1) % n1, k)] - p).norm());
                    if k + 1 < n2 {
                        d[2] = d[2].max((points[idx(i, j, k + 1)] - p).norm());
                    }
                }
            }
        }
        let cell = 0.6 * (d[0] + d[1] + d[2]);
        let mut min = [f64::INFINITY; 3];
        let mut max = [f64::NEG_INFINITY; 3];
        for p in &points {
            for c in 0..3 {
                min[c] = min[c].min(p[c]);
                max[c] = max[c].max(p[c]);
            }
        }
        let origin = [min[0] - cell, min[1] - cell, min[2] - cell];
        let dims = [0, 1, 2].map(|c| ((max[c] - origin[c]) / cell).floor() as usize + 2);
        let nb = dims[0] * dims[1] * dims[2];
        let bucket = |p: &Point3| -> usize {
            let b = [0, 1, 2].map(|c| ((p[c] - origin[c]) / cell).floor() as usize);
            (b[0] * dims[1] + b[1]) * dims[2] + b[2]
        };
        let mut counts = vec![0u32; nb + 1];
        for p in &points {
            counts[bucket(p) + 1] += 1;
        }
        for b in 0..nb {
            counts[b + 1] += counts[b];
        }
        let starts = counts.clone();
        let mut fill = counts;
        let mut entries = vec![0u32; points.len()];
        for (n, p) in points.iter().enumerate() {
            let b = bucket(p);
            entries[fill[b] as usize] = n as u32;
            fill[b] += 1;
        }
        Ok(Self {
            ys,
            points,
            origin,
            cell,
            dims,
            starts,
            entries,
        })
    }

    fn nearest(&self, p: &Point3) -> Option<[f64; 3]> {
        if self.points.is_empty() {
            return None;
        }
        let mut b = [0isize; 3];
        for c in 0..3 {
            b[c] = ((p[c] - self.origin[c]) / self.cell).floor() as isize;
            if b[c] < -1 || b[c] > self.dims[c] as isize {
                return None;
            }
        }
        let mut best = f64::INFINITY;
        let mut best_n = usize::MAX;
        for i in b[0] - 1..=b[0] + 1 {
            if i < 0 || i >= self.dims[0] as isize {
                continue;
            }
            for j in b[1] - 1..=b[1] + 1 {
                if j < 0 || j >= self.dims[1] as isize {
                    continue;
                }
                for k in b[2] - 1..=b[2] + 1 {
                    if k < 0 || k >= self.dims[2] as isize {
                        continue;
                    }
                    let id = (i as usize * self.dims[1] + j as usize) * self.dims[2] + k as usize;
                    for &e in &self.entries[self.starts[id] as usize..self.starts[id + 1] as usize] {
                        let dist = (self.points[e as usize] - p).norm_squared();
                        if dist < best {
                            best = dist;
                            best_n = e as usize;
                        }
                    }
                }
            }
        }
        (best_n != usize::MAX).then(|| self.ys[best_n])
    }
}

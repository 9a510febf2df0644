//! Closed unit-speed curves in the plane, stored as truncated Fourier series.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `c(s) = Σ_k cos[k]·cos(ks) + sin[k]·sin(ks)`, a 2π-periodic plane curve.
///
/// `sin[0]` is ignored; missing trailing entries are zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierLoop {
    pub cos: Vec<[f64; 2]>,
    #[serde(default)]
    pub sin: Vec<[f64; 2]>,
}

/// Value and first two derivatives of a loop at one parameter.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LoopSample {
    pub value: [f64; 2],
    pub d1: [f64; 2],
    pub d2: [f64; 2],
}

impl FourierLoop {
    /// Circle `(r cos s, r sin s)`.
    pub fn circle(radius: f64) -> Self {
        Self {
            cos: vec![[0.0, 0.0], [radius, 0.0]],
            sin: vec![[0.0, 0.0], [0.0, radius]],
        }
    }

    pub fn n_modes(&self) -> usize {
        self.cos.len().max(self.sin.len()).saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.cos.is_empty() && self.sin.is_empty()
    }

    /// The reversed loop `s ↦ c(-s)`.
    pub fn reversed(&self) -> Self {
        Self {
            cos: self.cos.clone(),
            sin: self.sin.iter().map(|v| [-v[0], -v[1]]).collect(),
        }
    }

    /// Builds the closed curve with unit tangent `(cos θ(s), sin θ(s))`, centred at the origin.
    ///
    /// The tangent is sampled on `samples` points and transformed exactly; the
    /// returned loop keeps modes up to `n_modes`. Fails when the tangent has a
    /// nonzero mean, i.e. the curve would not close.
    pub fn from_tangent_angle(theta: impl Fn(f64) -> f64, n_modes: usize, samples: usize) -> Result<Self> {
        assert!(samples > 2 * n_modes, "need more samples than twice the mode count");
        let m = samples as f64;
        let tangents: Vec<[f64; 2]> = (0..samples)
            .map(|j| {
                let th = theta(TAU * j as f64 / m);
                [th.cos(), th.sin()]
            })
            .collect();
        let mut cos = vec![[0.0; 2]; n_modes + 1];
        let mut sin = vec![[0.0; 2]; n_modes + 1];
        for c in 0..2 {
            let mean = tangents.iter().map(|t| t[c]).sum::<f64>() / m;
            if mean.abs() > 1e-9 {
                return Err(Error::Config(format!("tangent field does not close (mean {mean:.3e})")));
            }
        }
        for k in 1..=n_modes {
            let kf = k as f64;
            let mut a = [0.0; 2];
            let mut b = [0.0; 2];
            for (j, t) in tangents.iter().enumerate() {
                let (sk, ck) = (kf * TAU * j as f64 / m).sin_cos();
                for c in 0..2 {
                    a[c] += t[c] * ck;
                    b[c] += t[c] * sk;
                }
            }
            for c in 0..2 {
                // tangent = A cos + B sin  =>  position = (A/k) sin - (B/k) cos
                cos[k][c] = -2.0 * b[c] / (m * kf);
                sin[k][c] = 2.0 * a[c] / (m * kf);
            }
        }
        Ok(Self { cos, sin })
    }

    pub fn eval(&self, s: f64) -> LoopSample {
        let (s1, c1) = s.sin_cos();
        let (mut ck, mut sk) = (1.0, 0.0);
        let mut out = LoopSample::default();
        for k in 0..=self.n_modes() {
            let a = self.cos.get(k).copied().unwrap_or([0.0; 2]);
            let b = if k == 0 {
                [0.0; 2]
            } else {
                self.sin.get(k).copied().unwrap_or([0.0; 2])
            };
            let kf = k as f64;
            for c in 0..2 {
                let even = a[c] * ck + b[c] * sk;
                out.value[c] += even;
                out.d1[c] += kf * (b[c] * ck - a[c] * sk);
                out.d2[c] -= kf * kf * even;
            }
            let next = ck * c1 - sk * s1;
            sk = sk * c1 + ck * s1;
            ck = next;
        }
        out
    }

    /// Largest deviation of `|c'|` from 1 on `n` equispaced samples.
    pub fn speed_deviation(&self, n: usize) -> f64 {
        (0..n)
            .map(|j| {
                let d = self.eval(TAU * j as f64 / n as f64).d1;
                (d[0].hypot(d[1]) - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// The string data `(a, b)` of an extremal surface.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoopPair {
    pub a: FourierLoop,
    pub b: FourierLoop,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub max_dev_a: f64,
    pub max_dev_b: f64,
    pub tol: f64,
    pub passed: bool,
}

pub const CLOSED_FORM_SPEED_TOL: f64 = 1e-10;
pub const RESAMPLED_SPEED_TOL: f64 = 1e-6;

impl LoopPair {
    /// `a = (cos, sin)`, `b = (cos, -sin)`: the circle of radius `cos y₀`.
    pub fn collapsing_circle() -> Self {
        let a = FourierLoop::circle(1.0);
        let b = a.reversed();
        Self { a, b }
    }

    /// Time-symmetric surface through the curve with tangent angle `s + β sin 3s`.
    ///
    /// With `b(s) = a(-s)` the surface starts at rest: `Γ₀ = a(S¹)` and `∂_t ψ = 0` at `y₀ = 0`.
    pub fn perturbed_circle(beta: f64) -> Result<Self> {
        let a = FourierLoop::from_tangent_angle(|s| s + beta * (3.0 * s).sin(), 24, 512)?;
        let b = a.reversed();
        Ok(Self { a, b })
    }

    pub fn n_modes(&self) -> usize {
        self.a.n_modes().max(self.b.n_modes())
    }

    pub fn validate(&self, tol: f64) -> ValidationReport {
        const SAMPLES: usize = 10_000;
        let max_dev_a = self.a.speed_deviation(SAMPLES);
        let max_dev_b = self.b.speed_deviation(SAMPLES);
        ValidationReport {
            max_dev_a,
            max_dev_b,
            tol,
            passed: max_dev_a < tol && max_dev_b < tol,
        }
    }
}

/// Checks `|a'| = |b'| = 1` on a dense grid.
pub fn validate_loop(loops: &LoopPair, tol: f64) -> Result<ValidationReport> {
    if loops.a.is_empty() || loops.b.is_empty() {
        return Err(Error::Config("loop coefficient lists must be nonempty".into()));
    }
    let report = loops.validate(tol);
    if report.passed {
        Ok(report)
    } else {
        Err(Error::NonUnitSpeed {
            deviation: report.max_dev_a.max(report.max_dev_b),
            tol,
        })
    }
}

//! One-dimensional interface profiles.
//!
//! `q = tanh` is the standing kink of `-q'' + 2(q² - 1)q = 0`. The scaled
//! profile is `q_ε(z) = tanh(z/ε)` and the truncated profile
//!
//! ```text
//! Q_ε(z) = q_ε(z) χ(z) + (1 - χ(z)) sign(z)
//! ```
//!
//! equals `sign(z)` outside `|z| < 2ρ/3`, where `χ` is a smooth even cutoff.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::quad::adaptive_simpson;

/// Energy of the kink, `∫ (ε/2) q_ε'² + (1/2ε)(q_ε² - 1)² dz` (independent of ε).
pub const C0: f64 = 4.0 / 3.0;

pub fn c0() -> f64 {
    C0
}

#[inline]
pub fn q(z: f64) -> f64 {
    z.tanh()
}

#[inline]
pub fn dq(z: f64) -> f64 {
    let t = z.tanh();
    1.0 - t * t
}

#[inline]
pub fn d2q(z: f64) -> f64 {
    let t = z.tanh();
    -2.0 * t * (1.0 - t * t)
}

#[inline]
pub fn q_eps(z: f64, eps: f64) -> f64 {
    (z / eps).tanh()
}

#[inline]
pub fn dq_eps(z: f64, eps: f64) -> f64 {
    dq(z / eps) / eps
}

#[inline]
pub fn d2q_eps(z: f64, eps: f64) -> f64 {
    d2q(z / eps) / (eps * eps)
}

#[inline]
fn sign(z: f64) -> f64 {
    if z > 0.0 {
        1.0
    } else if z < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Smooth step `g(t) = φ(t) / (φ(t) + φ(1-t))` with `φ(t) = exp(-1/t)` on `t > 0`,
/// together with its first two derivatives.
fn smooth_step(t: f64) -> (f64, f64, f64) {
    if t <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    if t >= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    let s = 1.0 - t;
    let a = (-1.0 / t).exp();
    let b = (-1.0 / s).exp();
    let da = a / (t * t);
    let db = -b / (s * s);
    let d2a = a * (1.0 / t.powi(4) - 2.0 / t.powi(3));
    let d2b = b * (1.0 / s.powi(4) - 2.0 / s.powi(3));
    let sum = a + b;
    let num = da * b - a * db;
    let den = sum * sum;
    let dnum = d2a * b - a * d2b;
    let dden = 2.0 * sum * (da + db);
    let g = a / sum;
    let g1 = num / den;
    let g2 = (dnum * den - num * dden) / (den * den);
    (g, g1, g2)
}

/// Cutoff `χ`, equal to 1 on `|z| ≤ ρ/3` and 0 on `|z| ≥ 2ρ/3`, with `zχ'(z) ≤ 0`.
pub fn chi(z: f64, rho: f64) -> f64 {
    chi_derivs(z, rho).0
}

/// `(χ, χ', χ'')` at `z`.
pub fn chi_derivs(z: f64, rho: f64) -> (f64, f64, f64) {
    let a = z.abs();
    let t = 2.0 - 3.0 * a / rho;
    let (g, g1, g2) = smooth_step(t);
    let k = 3.0 / rho;
    (g, -k * sign(z) * g1, k * k * g2)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileParams {
    pub epsilon: f64,
    pub rho: f64,
}

impl ProfileParams {
    pub fn new(epsilon: f64, rho: f64) -> Self {
        assert!(epsilon > 0.0 && epsilon <= 1.0, "epsilon must lie in (0, 1]");
        assert!(rho > 0.0, "rho must be positive");
        if epsilon > rho / 4.0 {
            log::warn!(
                "epsilon = {epsilon} exceeds rho/4 = {}; the cutoff is not well separated",
                rho / 4.0
            );
        }
        Self { epsilon, rho }
    }

    /// `Q_ε(z)`.
    #[inline]
    pub fn big_q(&self, z: f64) -> f64 {
        let a = z.abs();
        if a <= self.rho / 3.0 {
            return q_eps(z, self.epsilon);
        }
        if a >= 2.0 * self.rho / 3.0 {
            return sign(z);
        }
        let c = chi(z, self.rho);
        q_eps(z, self.epsilon) * c + (1.0 - c) * sign(z)
    }

    /// `(Q_ε, Q_ε', Q_ε'')` at `z`.
    #[inline]
    pub fn big_q_derivs(&self, z: f64) -> (f64, f64, f64) {
        let eps = self.epsilon;
        let a = z.abs();
        if a <= self.rho / 3.0 {
            let t = (z / eps).tanh();
            let d = (1.0 - t * t) / eps;
            return (t, d, -2.0 * t * d / eps);
        }
        if a >= 2.0 * self.rho / 3.0 {
            return (sign(z), 0.0, 0.0);
        }
        let (c, c1, c2) = chi_derivs(z, self.rho);
        let t = (z / eps).tanh();
        let d = (1.0 - t * t) / eps;
        let d2 = -2.0 * t * d / eps;
        let gap = t - sign(z);
        (
            t * c + (1.0 - c) * sign(z),
            d * c + gap * c1,
            d2 * c + 2.0 * d * c1 + gap * c2,
        )
    }

    /// Translation `τ_s Q_ε (z) = Q_ε(z - s)`.
    #[inline]
    pub fn translated(&self, s: f64) -> impl Fn(f64) -> f64 + '_ {
        move |z| self.big_q(z - s)
    }
}

/// Translation operator `τ_s f (z) = f(z - s)`.
pub fn translate<F: Fn(f64) -> f64>(f: F, s: f64) -> impl Fn(f64) -> f64 {
    move |z| f(z - s)
}

/// Uniform symmetric grid on `I = [-ρ, ρ]` together with samples on it.
#[derive(Clone, Debug, PartialEq)]
pub struct Fiber {
    pub rho: f64,
    pub dz: f64,
    pub values: Vec<f64>,
}

impl Fiber {
    /// Number of grid points for spacing at most `ε/16` on `[-ρ, ρ]` (always odd).
    pub fn points_for(epsilon: f64, rho: f64) -> usize {
        let half = (rho / (epsilon / 16.0)).ceil() as usize;
        2 * half + 1
    }

    pub fn zeros(epsilon: f64, rho: f64) -> Self {
        Self::with_points(Self::points_for(epsilon, rho), rho)
    }

    pub fn with_points(n: usize, rho: f64) -> Self {
        assert!(n >= 3 && n % 2 == 1, "fiber grid needs an odd number of points");
        Self {
            rho,
            dz: 2.0 * rho / (n - 1) as f64,
            values: vec![0.0; n],
        }
    }

    pub fn from_fn(epsilon: f64, rho: f64, f: impl Fn(f64) -> f64) -> Self {
        let mut fib = Self::zeros(epsilon, rho);
        for i in 0..fib.len() {
            fib.values[i] = f(fib.z(i));
        }
        fib
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Grid coordinate of sample `i`; the middle sample is exactly 0.
    #[inline]
    pub fn z(&self, i: usize) -> f64 {
        let mid = (self.len() / 2) as isize;
        (i as isize - mid) as f64 * self.dz
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.z(i)).collect()
    }

    /// Fourth-order derivative samples.
    pub fn derivative(&self) -> Vec<f64> {
        crate::quad::derivative(&self.values, self.dz)
    }

    /// Simpson integral of `f(z, v)` over `I`.
    pub fn integrate(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        let g: Vec<f64> = (0..self.len()).map(|i| f(self.z(i), self.values[i])).collect();
        crate::quad::simpson(&g, self.dz)
    }
}

/// `∫ q'(s)² ds` by adaptive quadrature; equals `c₀ = 4/3`.
pub fn kink_energy_quadrature() -> f64 {
    adaptive_simpson(|s| dq(s) * dq(s), -40.0, 40.0, 1e-14)
}

/// `K = ∫ s² q'(s)² ds`, the second moment of the kink energy density.
///
/// Computed once by adaptive quadrature on `(-40, 40)` and cached.
pub fn profile_energy_constant() -> f64 {
    static K: OnceLock<f64> = OnceLock::new();
    *K.get_or_init(|| adaptive_simpson(|s| s * s * dq(s).powi(2), -40.0, 40.0, 1e-14))
}

/// `K₂ = 2∫₀^∞ s (1 - tanh s)² ds`, so that `θ₂(q_ε) ≈ ε² K₂`.
pub fn theta2_constant() -> f64 {
    static K2: OnceLock<f64> = OnceLock::new();
    *K2.get_or_init(|| 2.0 * adaptive_simpson(|s| s * (1.0 - s.tanh()).powi(2), 0.0, 40.0, 1e-14))
}

/// `∫ s² (q(s) - sign s)² ds`, so that `∫ z² (q_ε - sign)² dz ≈ ε³ ·` this.
pub fn second_moment_gap_constant() -> f64 {
    static K: OnceLock<f64> = OnceLock::new();
    *K.get_or_init(|| 2.0 * adaptive_simpson(|s| s * s * (1.0 - s.tanh()).powi(2), 0.0, 40.0, 1e-14))
}

/// `f(t) = ‖τ_t q - q‖²_{L²(ℝ)}` by adaptive quadrature.
pub fn translation_defect(t: f64) -> f64 {
    let lo = -40.0 + t.min(0.0);
    let hi = 40.0 + t.max(0.0);
    adaptive_simpson(|s| (q(s - t) - q(s)).powi(2), lo, hi, 1e-14)
}

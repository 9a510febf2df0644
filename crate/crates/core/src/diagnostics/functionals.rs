use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::pullback::PullbackSlice;
use crate::profile::{Fiber, C0};
use crate::quad::{periodic_trapezoid, simpson_weights};

/// Potential prefactor in the slice functional `Θ₁`.
///
/// The fiber functional `θ₁` and `Θ₃` weight the potential by `1/(2ε)`; the
/// printed definition of `Θ₁` has `1/(2ε²)`. `Consistent` uses `1/(2ε)` so
/// that `Θ₁ = ∫ θ₁ dy₁`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theta1Variant {
    #[default]
    Consistent,
    AsPrinted,
}

impl Theta1Variant {
    pub fn potential_weight(self, epsilon: f64) -> f64 {
        match self {
            Theta1Variant::Consistent => 0.5 / epsilon,
            Theta1Variant::AsPrinted => 0.5 / (epsilon * epsilon),
        }
    }
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

/// `θ₁(v) = ∫_I (1 + z²)((ε/2)v'² + (1/2ε)(v² - 1)²) dz - c₀`, with `v'`
/// from fourth-order differences.
pub fn theta1(fiber: &Fiber, epsilon: f64) -> f64 {
    theta1_with_derivative(fiber, &fiber.derivative(), epsilon)
}

/// `θ₁` with a given derivative array.
pub fn theta1_with_derivative(fiber: &Fiber, dv: &[f64], epsilon: f64) -> f64 {
    let w = simpson_weights(fiber.len(), fiber.dz);
    let mut acc = 0.0;
    for i in 0..fiber.len() {
        let z = fiber.z(i);
        let v = fiber.values[i];
        let dens = 0.5 * epsilon * dv[i] * dv[i] + 0.5 / epsilon * (v * v - 1.0).powi(2);
        acc += w[i] * (1.0 + z * z) * dens;
    }
    acc - C0
}

/// `θ₂(v) = ∫_I |z| (v - sign z)² dz`.
pub fn theta2(fiber: &Fiber) -> f64 {
    fiber.integrate(|z, v| z.abs() * (v - sign(z)).powi(2))
}

/// Slice functionals at one `y₀`, with the per-fiber values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceDiagnostics {
    pub y0: f64,
    #[serde(rename = "Theta1")]
    pub theta1: f64,
    /// `∫∫ y₂² (v - sign y₂)²`.
    #[serde(rename = "Theta2")]
    pub theta2: f64,
    #[serde(rename = "Theta3")]
    pub theta3: f64,
    /// `∫∫ |y₂| (v - sign y₂)²`, the integral of the fiber values `θ₂`.
    pub theta2_abs: f64,
    pub variant: Theta1Variant,
    /// `θ₁` per fiber with the chain-rule `∂_{y₂}v`.
    pub theta1_fiber: Vec<f64>,
    pub theta2_fiber: Vec<f64>,
    /// Filled by the decomposition.
    pub s_star: Vec<f64>,
    pub sup_d0: f64,
    pub sup_d1: f64,
}

/// `Θ₁, Θ₂, Θ₃` of a slice: periodic trapezoid in `y₁`, Simpson in `y₂`.
pub fn theta_slice(slice: &PullbackSlice, epsilon: f64, variant: Theta1Variant) -> SliceDiagnostics {
    let spec = slice.spec;
    let (n1, n2) = (spec.n1, spec.n2);
    let w = simpson_weights(n2, spec.dz());
    let pot1 = variant.potential_weight(epsilon);
    let pot = 0.5 / epsilon;
    let half = 0.5 * epsilon;
    let mut t1 = vec![0.0; n1];
    let mut t2 = vec![0.0; n1];
    let mut t2a = vec![0.0; n1];
    let mut t3 = vec![0.0; n1];
    let mut th1 = vec![0.0; n1];
    let mut th2 = vec![0.0; n1];
    for j in 0..n1 {
        let (mut a1, mut a2, mut a2a, mut a3) = (0.0, 0.0, 0.0, 0.0);
        for k in 0..n2 {
            let m = slice.index(j, k);
            let z = spec.y2(k);
            let z2 = z * z;
            let (v, d0, d1, d2) = (slice.v[m], slice.d0[m], slice.d1[m], slice.d2[m]);
            let well = (v * v - 1.0).powi(2);
            let gap = (v - sign(z)).powi(2);
            a1 += w[k] * (1.0 + z2) * (half * d2 * d2 + pot1 * well);
            a2 += w[k] * z2 * gap;
            a2a += w[k] * z.abs() * gap;
            a3 += w[k] * (half * (d0 * d0 + d1 * d1) + z2 * (half * d2 * d2 + pot * well));
        }
        t1[j] = a1 - C0;
        t2[j] = a2;
        t2a[j] = a2a;
        t3[j] = a3;
        let fiber = slice.fiber(j);
        th1[j] = theta1_with_derivative(&fiber, &slice.d2[slice.index(j, 0)..slice.index(j + 1, 0)], epsilon);
        th2[j] = theta2(&fiber);
    }
    let sup = |d: &[f64]| d.iter().fold(0.0, |m: f64, x| m.max(x.abs()));
    SliceDiagnostics {
        y0: slice.y0,
        theta1: periodic_trapezoid(&t1, TAU),
        theta2: periodic_trapezoid(&t2, TAU),
        theta3: periodic_trapezoid(&t3, TAU),
        theta2_abs: periodic_trapezoid(&t2a, TAU),
        variant,
        theta1_fiber: th1,
        theta2_fiber: th2,
        s_star: Vec::new(),
        sup_d0: sup(&slice.d0),
        sup_d1: sup(&slice.d1),
    }
}

#![allow(dead_code)]

use interface_lab::profile::{dq_eps, q_eps};
use interface_lab::wave::{Boundary, GridSpec, Lattice, SpacetimeField};
use interface_lab::Execution;

/// Discrete L² error at `t_end` of the leapfrog solution against the exact
/// boosted kink `q_ε(γ(x₁ - ct))`, on a periodic strip of four rows.
pub fn boosted_kink_error(epsilon: f64, c: f64, h: f64, t_end: f64, exec: Execution) -> f64 {
    let gamma = 1.0 / (1.0 - c * c).sqrt();
    let half = 2.0;
    let m = (half / h).round() as usize;
    let lattice = Lattice::new(2 * m + 1, 4, h);
    let exact = |t: f64, x: f64| q_eps(gamma * (x - c * t), epsilon);
    let mut u0 = Vec::with_capacity(lattice.len());
    let mut ut = Vec::with_capacity(lattice.len());
    for _ in 0..lattice.ny {
        for i in 0..lattice.nx {
            let x = lattice.x(i);
            u0.push(exact(0.0, x));
            ut.push(-c * gamma * dq_eps(gamma * x, epsilon));
        }
    }
    let steps = (t_end / GridSpec::max_dt(h, epsilon) - 1e-9).ceil() as usize;
    let dt = t_end / steps as f64;
    let mut field =
        SpacetimeField::from_initial_data(lattice, epsilon, dt, 1.0, 0.0, u0, &ut, Boundary::PeriodicY, exec);
    for _ in 0..steps {
        field.step().unwrap();
    }
    let err2: f64 = (0..lattice.nx)
        .map(|i| (field.u_curr[i] - exact(t_end, lattice.x(i))).powi(2))
        .sum();
    (err2 * h).sqrt()
}

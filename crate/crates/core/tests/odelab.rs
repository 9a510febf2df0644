use interface_lab::diagnostics::theta1;
use interface_lab::odelab::*;
use interface_lab::profile::{chi, profile_energy_constant, q_eps, Fiber};
use interface_lab::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sech2(s: f64) -> f64 {
    1.0 / s.cosh().powi(2)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn assert_sobolev(grid: &OdeGrid, w: &[f64]) {
    let c = sobolev_check(grid, w);
    assert!(c.holds, "‖w‖²∞ = {} > ½‖w‖²_H1 = {}", c.sup_sq, c.half_h1_sq);
}

/// Fiber on `[-ρ, ρ]` with spacing `ε/per_eps`.
fn fine_fiber(eps: f64, rho: f64, per_eps: usize, f: impl Fn(f64) -> f64) -> Fiber {
    let half = (rho / (eps / per_eps as f64)).ceil() as usize;
    let mut fib = Fiber::with_points(2 * half + 1, rho);
    for i in 0..fib.len() {
        fib.values[i] = f(fib.z(i));
    }
    fib
}

#[test]
fn h_vanishes_on_the_kink_and_its_translates() {
    for eps in [0.1, 0.05] {
        for s in [0.0, 0.037] {
            let fib = fine_fiber(eps, 0.32, 800, |z| q_eps(z - s, eps));
            let h = compute_h(&fib, eps);
            let worst = max_abs(&h.values);
            // fourth-order differences at ε/800; the terms themselves are O(1/ε)
            assert!(worst < 1e-10 / eps, "eps {eps} s {s}: {worst:e}");
        }
    }
}

#[test]
fn h_of_a_perturbed_kink() {
    let eps = 0.05;
    let phi = |z: f64| (-(z / (2.0 * eps)).powi(2)).exp() * (z / eps).sin();
    let dphi = |z: f64| {
        let g = (-(z / (2.0 * eps)).powi(2)).exp();
        g * ((z / eps).cos() / eps - z / (2.0 * eps * eps) * (z / eps).sin())
    };
    let mut errs = Vec::new();
    for per_eps in [16, 32] {
        let fib = fine_fiber(eps, 0.32, per_eps, |z| q_eps(z, eps) + eps * phi(z));
        let h = compute_h(&fib, eps);
        let err = (0..fib.len())
            .map(|i| {
                let z = fib.z(i);
                let exact = eps * dphi(z) + 2.0 * q_eps(z, eps) * phi(z) + eps * phi(z).powi(2);
                (h.values[i] - exact).abs()
            })
            .fold(0.0, f64::max);
        errs.push(err);
    }
    assert!(errs[1] < 1e-4, "{errs:?}");
    assert!(errs[0] / errs[1] > 12.0, "fourth order expected: {errs:?}");
}

#[test]
fn rescaling_keeps_the_energy_norm() {
    let (eps, rho) = (0.05, 0.32);
    let grid = OdeGrid::new(8.0, 1e-3);
    let zero = Fiber::zeros(eps, rho);
    let r = rescale_at(&zero, &zero, eps, 0.01, &grid);
    assert!(r.w.iter().chain(&r.h).all(|&x| x == 0.0));

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let bumps: Vec<(f64, f64, f64)> = (0..3)
            .map(|_| {
                (
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-0.08..0.08),
                    rng.gen_range(0.3..0.6) * eps,
                )
            })
            .collect();
        let f = |z: f64| {
            bumps
                .iter()
                .map(|&(a, c, s)| a * (-((z - c) / s).powi(2) / 2.0).exp())
                .sum::<f64>()
        };
        let fib = fine_fiber(eps, rho, 400, f);
        let s0 = rng.gen_range(-0.05..0.05);
        let r = rescale_at(&fib, &fib, eps, s0, &grid);
        let lhs = fiber_h1eps(&fib, eps);
        let rhs = grid.h1(&r.w);
        assert!(((lhs - rhs) / lhs).abs() < 1e-8, "{lhs} vs {rhs}");
        // ‖h‖²_L2 = ε‖h_ε‖²
        let h_eps_sq = fib.integrate(|_, v| v * v);
        assert!((grid.l2(&r.h).powi(2) / (eps * h_eps_sq) - 1.0).abs() < 1e-8);
        assert_sobolev(&grid, &r.w);
    }
}

#[test]
fn rescaled_support_and_zero_crossing() {
    let (eps, rho) = (0.05, 0.32);
    let grid = OdeGrid::new(10.0, 1e-2);
    let s = 0.03;
    let fib = Fiber::from_fn(eps, rho, |z| q_eps(z - s, eps) + 0.01 * (z / rho).cos());
    let r = rescale(&fib, eps, &grid).unwrap();
    assert!(r.s0.abs() < 0.5 * rho && (r.s0 - s).abs() < 0.01);
    // h lives on εz + s₀ ∈ I, i.e. |z + s₀/ε| ≤ ρ/ε
    for i in 0..grid.len() {
        let z = grid.z(i);
        if (z + r.s0 / eps).abs() > rho / eps + grid.dz {
            assert_eq!(r.h[i], 0.0);
            assert_eq!(r.w[i], 0.0);
        }
    }
    // w(0) = w_ε(s₀) = v(s₀) - q_ε(0) = 0
    assert!(r.w[grid.half].abs() < 1e-6);

    let positive = Fiber::from_fn(eps, rho, |_| 1.0);
    assert!(matches!(rescale(&positive, eps, &grid), Err(Error::NoZeroCrossing)));
    let far = Fiber::from_fn(eps, rho, |z| q_eps(z - 0.25, eps));
    assert!(matches!(find_zero(&far), Err(Error::NoZeroCrossing)));
}

#[test]
fn kernel_closed_form() {
    let grid = OdeGrid::default();
    assert_eq!(grid.z_max(), 40.0);
    let zero = vec![0.0; grid.len()];
    let h = grid.sample(sech2);
    let w1 = apply_s(&grid, &zero, &h).unwrap();
    let err = (0..grid.len())
        .map(|i| (w1[i] - grid.z(i) * sech2(grid.z(i))).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-8, "max error {err:e}");
    assert_eq!(w1[grid.half], 0.0);
    assert_sobolev(&grid, &w1);

    assert!(apply_s(&grid, &zero, &zero).unwrap().iter().all(|&x| x == 0.0));
}

#[test]
fn kernel_is_linear_and_solves_the_linear_ode() {
    let grid = OdeGrid::new(40.0, 2e-3);
    let w0 = grid.sample(|z| 0.3 * (-z * z).exp() * z.sin());
    let h1 = grid.sample(|z| sech2(z) * z.cos());
    let h2 = grid.sample(|z| (-(z - 1.0).powi(2)).exp());
    let (a, b) = (0.7, -2.3);
    let combo: Vec<f64> = h1.iter().zip(&h2).map(|(x, y)| a * x + b * y).collect();
    let s1 = apply_s(&grid, &w0, &h1).unwrap();
    let s2 = apply_s(&grid, &w0, &h2).unwrap();
    let s12 = apply_s(&grid, &w0, &combo).unwrap();
    let err = (0..grid.len())
        .map(|i| (s12[i] - a * s1[i] - b * s2[i]).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-10, "{err:e}");

    let res = linear_residual(&grid, &w0, &s1, &h1);
    assert!(res < 10.0 * grid.dz * grid.dz, "{res:e}");
    for w in [&s1, &s2, &s12] {
        assert_sobolev(&grid, w);
    }
}

#[test]
fn kernel_requires_the_ball() {
    let grid = OdeGrid::new(40.0, 1e-2);
    let w0 = grid.sample(|z| 2.0 * (-z * z).exp());
    let h = grid.sample(sech2);
    assert!(grid.h1(&w0) > std::f64::consts::SQRT_2);
    assert!(matches!(apply_s(&grid, &w0, &h), Err(Error::HypothesisViolated { .. })));
}

#[test]
fn kernel_bound_over_random_data() {
    let grid = OdeGrid::new(40.0, 5e-3);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (a, c, s) = (
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-3.0..3.0),
            rng.gen_range(0.5..2.0),
        );
        let mut w0 = grid.sample(|z| a * (-((z - c) / s).powi(2)).exp());
        let n0 = grid.h1(&w0);
        let cap = rng.gen_range(0.0..1.0) * std::f64::consts::SQRT_2;
        if n0 > cap {
            w0.iter_mut().for_each(|x| *x *= cap / n0);
        }
        let (b, d, k) = (
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-5.0..5.0),
            rng.gen_range(0.5..3.0),
        );
        let h = grid.sample(|z| b * (-((z - d) / k).powi(2)).exp() * (z * k).cos());
        let w1 = apply_s(&grid, &w0, &h).unwrap();
        worst = worst.max(grid.h1(&w1) / grid.l2(&h));
        assert_sobolev(&grid, &w1);
    }
    assert!(worst <= 10.0, "measured constant {worst}");
}

#[test]
fn fixed_point_of_zero_data() {
    let grid = OdeGrid::new(40.0, 1e-2);
    let mut p = OdeProfile::new(grid, vec![0.0; grid.len()]);
    let r = fixed_point(&mut p, &FixedPointOptions::default()).unwrap();
    assert_eq!(r.iterations, 1);
    assert_eq!(r.w_h1, 0.0);
    assert!(r.factors.is_empty());
}

#[test]
fn fixed_point_solves_the_nonlinear_ode() {
    let grid = OdeGrid::default();
    let mut p = OdeProfile::new(grid, grid.sample(|z| 0.01 * sech2(z)));
    let r = fixed_point(&mut p, &FixedPointOptions::default()).unwrap();
    assert!(r.residual < 1e-8, "residual {:e}", r.residual);
    assert!(r.factors.iter().all(|&f| f < 1.0));
    assert!(r.sobolev.holds);
    assert_eq!(p.w[grid.half], 0.0);
    // independent check on the residual: centred differences of the returned w
    let mut worst: f64 = 0.0;
    for i in 1..grid.len() - 1 {
        let dw = (p.w[i + 1] - p.w[i - 1]) / (2.0 * grid.dz);
        let z = grid.z(i);
        worst = worst.max((dw + (2.0 * z.tanh() + p.w[i]) * p.w[i] - p.h[i]).abs());
    }
    assert!(worst < 10.0 * grid.dz * grid.dz, "{worst:e}");

    let json = serde_json::to_value(&r).unwrap();
    for key in ["h_norm", "w_h1", "iterations", "factors", "residual"] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn linear_response_across_data_sizes() {
    let grid = OdeGrid::default();
    let shape = grid.sample(|z| sech2(z) * (1.0 + 0.5 * z.sin()));
    let unit = grid.l2(&shape);
    let mut ratios = Vec::new();
    let mut top_factors = Vec::new();
    for size in [1e-3, 1e-2, 5e-2] {
        let h: Vec<f64> = shape.iter().map(|x| x * size / unit).collect();
        let mut p = OdeProfile::new(grid, h);
        let r = fixed_point(&mut p, &FixedPointOptions::default()).unwrap();
        assert!((r.h_norm - size).abs() < 1e-12);
        assert!(r.factors.iter().all(|&f| f < 1.0), "{:?}", r.factors);
        assert!(r.residual < 10.0 * grid.dz * grid.dz);
        assert!(r.sobolev.holds);
        ratios.push(r.w_h1 / r.h_norm);
        top_factors.push(r.factors[0]);
    }
    let (lo, hi) = ratios
        .iter()
        .fold((f64::MAX, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    assert!(hi / lo < 2.0, "ratios {ratios:?}");
    // smaller data contracts faster (first factor; the last one sits at the rounding floor)
    assert!(
        top_factors[0] < top_factors[1] && top_factors[1] < top_factors[2],
        "{top_factors:?}"
    );
}

#[test]
fn large_data_does_not_contract() {
    let grid = OdeGrid::new(40.0, 1e-2);
    let mut p = OdeProfile::new(grid, grid.sample(|z| -6.0 * sech2(z - 2.0)));
    let opts = FixedPointOptions {
        max_iter: 200,
        ..Default::default()
    };
    assert!(matches!(fixed_point(&mut p, &opts), Err(Error::NoContraction { .. })));
}

#[test]
fn coercivity_on_fibers() {
    let rho = 0.32;
    let opts = CoercivityOptions::default();
    for eps in [0.1, 0.05, 0.025] {
        let kink = fine_fiber(eps, rho, 32, |z| q_eps(z, eps));
        let r = coercivity_check(&kink, eps, &opts).unwrap();
        assert!(r.lhs < 1e-8, "lhs {:e}", r.lhs);
        assert!(r.holds && r.energy_bound_holds);
        // θ₁(q_ε) ≈ Kε² up to the tails beyond ±ρ
        assert!((r.theta1 / (profile_energy_constant() * eps * eps) - 1.0).abs() < 0.01);

        let wiggle = fine_fiber(eps, rho, 32, |z| {
            q_eps(z, eps) + eps.powf(1.5) * (z / eps).sin() * chi(z, rho)
        });
        let r = coercivity_check(&wiggle, eps, &opts).unwrap();
        assert!(r.holds, "eps {eps}: lhs {} rhs {}", r.lhs, r.rhs);
        assert!(r.ratio.is_finite() && r.ratio > 0.0);
        assert!(r.energy_bound_holds);

        // a kink four times too steep
        let steep = fine_fiber(eps, rho, 64, |z| q_eps(z, eps / 4.0));
        let r = coercivity_check(&steep, eps, &opts).unwrap();
        assert!(r.energy_gap > 0.1, "gap {}", r.energy_gap);
        assert!(r.theta1 > 0.0 && (r.theta1 - theta1(&steep, eps)).abs() < 1e-15);
    }
    let flat = Fiber::from_fn(0.05, rho, |_| 1.0);
    assert!(matches!(
        coercivity_check(&flat, 0.05, &opts),
        Err(Error::HypothesisFailed { .. })
    ));
}

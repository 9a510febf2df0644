use std::f64::consts::TAU;
use std::sync::Arc;

use interface_lab::decomposition::{build_comparison, Shift, ShiftGrid};
use interface_lab::diagnostics::*;
use interface_lab::geometry::{ChartOptions, LoopPair, SurfaceChart};
use interface_lab::profile::{
    profile_energy_constant, q_eps, second_moment_gap_constant, theta2_constant, translation_defect, Fiber,
    ProfileParams,
};
use interface_lab::quad::adaptive_simpson;
use interface_lab::wave::{Lattice, SnapshotStore};
use interface_lab::Execution;

fn circle_chart(rho: f64) -> SurfaceChart {
    SurfaceChart::new(
        LoopPair::collapsing_circle(),
        &ChartOptions {
            t_minus: 0.45,
            t_plus: 0.45,
            rho: Some(rho),
            det_floor: 1e-6,
        },
    )
    .unwrap()
}

fn store_from_fn(h: f64, half: f64, dt: f64, t_max: f64, f: impl Fn(f64, f64, f64) -> f64) -> SnapshotStore {
    let m = (half / h).round() as usize;
    let lat = Lattice::new(2 * m + 1, 2 * m + 1, h);
    let mut store = SnapshotStore::new(lat, 0.1);
    let nt = (t_max / dt).round() as i64;
    for n in -nt..=nt {
        let t = n as f64 * dt;
        let mut u = Vec::with_capacity(lat.len());
        for j in 0..lat.ny {
            for i in 0..lat.nx {
                u.push(f(t, lat.x(i), lat.y(j)));
            }
        }
        store.push(t, u);
    }
    store
}

#[test]
fn constant_field_pulls_back_to_constant() {
    let chart = circle_chart(0.3);
    let store = store_from_fn(0.05, 2.2, 0.05, 0.4, |_, _, _| -1.0);
    let spec = FiberSpec {
        n1: 16,
        n2: 9,
        rho: 0.3,
    };
    let s = pullback(&store, &chart, 0.1, spec, Execution::Parallel).unwrap();
    assert!(s.v.iter().all(|&v| (v + 1.0).abs() < 1e-14));
    for d in [&s.d0, &s.d1, &s.d2] {
        assert!(d.iter().all(|&x| x.abs() < 1e-13));
    }
}

#[test]
fn pullback_interpolation_converges() {
    let f = |t: f64, x: f64, y: f64| (1.1 * t + 0.7 * x).sin() * (1.3 * y).cos() + 0.2 * x * y;
    let df = |t: f64, x: f64, y: f64| {
        let (s, c) = (1.1 * t + 0.7 * x).sin_cos();
        let cy = (1.3 * y).cos();
        [
            1.1 * c * cy,
            0.7 * c * cy + 0.2 * y,
            -1.3 * s * (1.3 * y).sin() + 0.2 * x,
        ]
    };
    let chart = circle_chart(0.3);
    let spec = FiberSpec {
        n1: 16,
        n2: 9,
        rho: 0.3,
    };
    let errors = |h: f64| {
        let store = store_from_fn(h, 2.2, h, 0.4, f);
        let s = pullback(&store, &chart, 0.1, spec, Execution::Parallel).unwrap();
        let (mut ev, mut ed): (f64, f64) = (0.0, 0.0);
        for j in 0..spec.n1 {
            let frame = chart.frame(0.1, spec.y1(j)).unwrap();
            for k in 0..spec.n2 {
                let y2 = spec.y2(k);
                let p = frame.map(y2);
                let jac = frame.jacobian(y2);
                let g = df(p[0], p[1], p[2]);
                let m = s.index(j, k);
                ev = ev.max((s.v[m] - f(p[0], p[1], p[2])).abs());
                for (c, d) in [&s.d0, &s.d1, &s.d2].into_iter().enumerate() {
                    let col = jac.column(c);
                    let exact = g[0] * col[0] + g[1] * col[1] + g[2] * col[2];
                    ed = ed.max((d[m] - exact).abs());
                }
            }
        }
        (ev, ed)
    };
    let (v1, d1) = errors(0.1);
    let (v2, d2) = errors(0.05);
    assert!(v2 < 1e-5 && d2 < 1e-4, "errors {v2:e} {d2:e}");
    // fourth order for values; the time derivative of the cubic is third order
    assert!(v1 / v2 > 12.0, "value ratio {}", v1 / v2);
    assert!(d1 / d2 > 6.0, "derivative ratio {}", d1 / d2);
}

#[test]
fn manufactured_profile_pulls_back_exactly() {
    let eps = 0.05;
    let chart = circle_chart(0.3);
    let params = ProfileParams::new(eps, 0.3);
    let u = build_comparison(&chart, Shift::Zero, params).unwrap();
    let spec = FiberSpec::for_epsilon(eps, 0.3);
    let spec = FiberSpec { n1: 32, ..spec };
    for y0 in [-0.3, 0.0, 0.2] {
        let s = pullback(&u, &chart, y0, spec, Execution::Parallel).unwrap();
        for j in 0..spec.n1 {
            for k in 0..spec.n2 {
                let m = s.index(j, k);
                let (q, dq, _) = params.big_q_derivs(spec.y2(k));
                assert!((s.v[m] - q).abs() < 1e-6);
                assert!(s.d1[m].abs() < 1e-5);
                assert!(s.d0[m].abs() < 1e-5);
                assert!((s.d2[m] - dq).abs() < 1e-5 * (1.0 + dq));
            }
        }
    }
}

#[test]
fn manufactured_profile_through_snapshots() {
    // U_ε sampled on the grid and read back by interpolation
    let eps = 0.1;
    let chart = circle_chart(0.4);
    let params = ProfileParams::new(eps, 0.4);
    let u = build_comparison(&chart, Shift::Zero, params).unwrap();
    let spec = FiberSpec {
        n1: 24,
        n2: 65,
        rho: 0.4,
    };
    let error = |h: f64, dt: f64| {
        let m = (2.4 / h).round() as usize;
        let lat = Lattice::new(2 * m + 1, 2 * m + 1, h);
        let mut store = SnapshotStore::new(lat, eps);
        let nt = (0.3 / dt).ceil() as i64;
        for n in -nt..=nt {
            let t = n as f64 * dt;
            store.push(t, u.level(t, &lat, Execution::Parallel).unwrap().u);
        }
        let s = pullback(&store, &chart, 0.0, spec, Execution::Parallel).unwrap();
        let mut e: f64 = 0.0;
        for j in 0..spec.n1 {
            for k in 0..spec.n2 {
                e = e.max((s.v[s.index(j, k)] - params.big_q(spec.y2(k))).abs());
            }
        }
        e
    };
    let coarse = error(eps / 8.0, 0.2 * eps);
    let fine = error(eps / 16.0, 0.1 * eps);
    assert!(coarse < 2e-3, "coarse {coarse:e}");
    assert!(coarse / fine > 10.0, "ratio {}", coarse / fine);
}

#[test]
fn fiber_laws_for_the_kink() {
    // ρ = 0.5 keeps the truncation tail e^{-2ρ/ε} far below 1%
    let k = profile_energy_constant();
    let k2 = theta2_constant();
    for eps in [0.1, 0.05, 0.025] {
        let fib = Fiber::from_fn(eps, 0.5, |z| q_eps(z, eps));
        let t1 = theta1(&fib, eps);
        assert!(
            (t1 / (k * eps * eps) - 1.0).abs() < 0.01,
            "eps {eps}: {t1} vs {}",
            k * eps * eps
        );
        let t2 = theta2(&fib);
        assert!((t2 / (k2 * eps * eps) - 1.0).abs() < 0.01, "eps {eps}");
    }
    let sign = Fiber::from_fn(0.05, 0.3, |z| z.signum());
    assert_eq!(theta2(&sign), 0.0);
}

fn manufactured_slice(eps: f64, rho: f64, shift: Shift, n1: usize) -> (PullbackSlice, SurfaceChart) {
    let chart = circle_chart(rho);
    let params = ProfileParams::new(eps, rho);
    let spec = FiberSpec {
        n1,
        ..FiberSpec::for_epsilon(eps, rho)
    };
    let s = {
        let u = build_comparison(&chart, shift, params).unwrap();
        pullback(&u, &chart, 0.15, spec, Execution::Parallel).unwrap()
    };
    (s, chart)
}

#[test]
fn slice_functionals_of_the_profile() {
    let (eps, rho) = (0.05, 0.3);
    let (slice, _) = manufactured_slice(eps, rho, Shift::Zero, 64);
    let d = theta_slice(&slice, eps, Theta1Variant::Consistent);
    let params = ProfileParams::new(eps, rho);
    // oracle: adaptive quadrature of the same integrands of Q_ε
    let k2 = adaptive_simpson(|z| z * z * (params.big_q(z) - z.signum()).powi(2), -rho, rho, 1e-15);
    assert!(
        (d.theta2 / (TAU * k2) - 1.0).abs() < 1e-4,
        "{} vs {}",
        d.theta2,
        TAU * k2
    );
    // and its ε³ law up to the truncation
    assert!((k2 / (eps.powi(3) * second_moment_gap_constant()) - 1.0).abs() < 0.05);
    let tangential: f64 = slice.d0.iter().chain(&slice.d1).map(|x| x * x).sum::<f64>();
    assert!(0.5 * eps * tangential * slice.spec.dz() * TAU / 64.0 < 1e-8);
    assert!(d.theta2 >= 0.0 && d.theta3 >= 0.0);
    // Θ₁ as printed only rescales the potential term
    let p = theta_slice(&slice, eps, Theta1Variant::AsPrinted);
    assert!(p.theta1 > d.theta1);
}

#[test]
fn slice_functionals_integrate_fiber_functionals() {
    let (eps, rho) = (0.05, 0.3);
    let shift = Shift::Analytic(Arc::new(move |y0: f64, y1: f64| {
        let a = 0.3 * eps;
        [a * (1.0 + y0) * y1.cos(), a * y1.cos(), -a * (1.0 + y0) * y1.sin()]
    }));
    let (slice, _) = manufactured_slice(eps, rho, shift, 64);
    let d = theta_slice(&slice, eps, Theta1Variant::Consistent);
    let n2 = slice.spec.n2;
    let fibers: Vec<(f64, f64, f64)> = (0..64)
        .map(|j| {
            let f = slice.fiber(j);
            let chain = theta1_with_derivative(&f, &slice.d2[j * n2..(j + 1) * n2], eps);
            (chain, theta1(&f, eps), theta2(&f))
        })
        .collect();
    let int1 = fibers.iter().map(|f| f.0).sum::<f64>() * TAU / 64.0;
    let int2 = fibers.iter().map(|f| f.2).sum::<f64>() * TAU / 64.0;
    assert!((d.theta1 - int1).abs() < 1e-12, "{} vs {int1}", d.theta1);
    assert!((d.theta2_abs - int2).abs() < 1e-12);
    // differenced v' agrees up to the cutoff's steep high derivatives
    for f in &fibers {
        assert!((f.1 - f.0).abs() < 2e-3 * f.0.abs());
        assert!(f.0 >= -1e-8);
    }
}

#[test]
fn fiber_resolution_is_converged() {
    let (eps, rho) = (0.08, 0.32);
    let chart = circle_chart(rho);
    let params = ProfileParams::new(eps, rho);
    let shift = Shift::Analytic(Arc::new(move |_: f64, y1: f64| {
        let a = 0.5 * eps;
        [a * (2.0 * y1).sin(), 0.0, 2.0 * a * (2.0 * y1).cos()]
    }));
    let u = build_comparison(&chart, shift, params).unwrap();
    let base = FiberSpec {
        n1: 64,
        ..FiberSpec::for_epsilon(eps, rho)
    };
    let fine = FiberSpec {
        n2: 2 * base.n2 - 1,
        ..base
    };
    let a = theta_slice(
        &pullback(&u, &chart, 0.1, base, Execution::Parallel).unwrap(),
        eps,
        Theta1Variant::Consistent,
    );
    let b = theta_slice(
        &pullback(&u, &chart, 0.1, fine, Execution::Parallel).unwrap(),
        eps,
        Theta1Variant::Consistent,
    );
    for (x, y) in [(a.theta1, b.theta1), (a.theta2, b.theta2), (a.theta3, b.theta3)] {
        assert!(((x - y) / y).abs() < 1e-3, "{x} vs {y}");
    }
}

#[test]
fn h1eps_of_a_shifted_profile() {
    assert_eq!(h1eps_norm(0.0, 0.0, 0.1), 0.0);
    let (eps, rho) = (0.025, 0.3);
    let p = ProfileParams::new(eps, rho);
    let w = Fiber::from_fn(eps, rho, |z| p.big_q(z) - p.big_q(z - eps));
    let l2 = w.integrate(|_, v| v * v);
    assert!((l2 / (eps * translation_defect(1.0)) - 1.0).abs() < 1e-6);
    // small shifts: f(t)/t² → ∫q'² = 4/3
    let t = 1e-2;
    assert!((translation_defect(t) / (t * t) - 4.0 / 3.0).abs() < 1e-3);
}

#[test]
fn comparison_gradient_diverges_like_inverse_root() {
    let rho = 0.32;
    let norm = |eps: f64| {
        let chart = circle_chart(rho);
        let params = ProfileParams::new(eps, rho);
        let spec = FiberSpec {
            n1: 64,
            ..FiberSpec::for_epsilon(eps, rho)
        };
        let n = 12;
        let dy0 = 0.9 / n as f64;
        let y0s: Vec<f64> = (0..n).map(|i| -0.45 + (i as f64 + 0.5) * dy0).collect();
        let u = build_comparison(&chart, Shift::Zero, params).unwrap();
        let slices: Vec<_> = y0s
            .iter()
            .map(|&y0| pullback(&u, &chart, y0, spec, Execution::Parallel).unwrap())
            .collect();
        let shifts = ShiftGrid::from_fn(y0s, spec.n1, |_, _| 0.0);
        let t = tube_norms(&chart, &slices, &shifts, &params, 0.4, dy0, Execution::Parallel).unwrap();
        assert!(t.deviation.norm(eps) < 1e-6);
        t.comparison_grad_sq.sqrt()
    };
    let ratio = norm(0.04) / norm(0.08);
    assert!((ratio / 2f64.sqrt() - 1.0).abs() < 0.1, "ratio {ratio}");
}

#[test]
fn farfield_of_the_comparison_field_vanishes() {
    let (eps, rho) = (0.08, 0.32);
    let chart = circle_chart(rho);
    let params = ProfileParams::new(eps, rho);
    let u = build_comparison(&chart, Shift::Zero, params).unwrap();
    let lat = Lattice::new(161, 161, 0.02);
    let opts = FarFieldOptions {
        t0: 0.3,
        width: rho,
        levels: 4,
    };
    let f = farfield_deviation(&u, &chart, &lat, &opts, Execution::Parallel).unwrap();
    assert_eq!(f.inside_l2, 0.0);
    assert_eq!(f.outside_l2, 0.0);
    assert_eq!(f.energy, 0.0);
    assert_eq!(f.deviation.norm(eps), 0.0);
    // the ℳ volume is the box minus the tube image
    let total = 2.0 * 0.3 * (lat.x(lat.nx - 3) - lat.x(2) + lat.h).powi(2);
    assert!(f.volume > 0.5 * total && f.volume < total);
}

#[test]
fn execution_modes_agree() {
    let (eps, rho) = (0.08, 0.32);
    let chart = circle_chart(rho);
    let params = ProfileParams::new(eps, rho);
    let u = build_comparison(&chart, Shift::Zero, params).unwrap();
    let spec = FiberSpec {
        n1: 32,
        ..FiberSpec::for_epsilon(eps, rho)
    };
    let a = pullback(&u, &chart, 0.2, spec, Execution::Sequential).unwrap();
    let b = pullback(&u, &chart, 0.2, spec, Execution::Parallel).unwrap();
    assert_eq!(a.v, b.v);
    assert_eq!(a.d0, b.d0);
    let da = theta_slice(&a, eps, Theta1Variant::Consistent);
    let db = theta_slice(&b, eps, Theta1Variant::Consistent);
    assert_eq!(da, db);
}

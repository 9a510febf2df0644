mod common;

use std::f64::consts::TAU;

use interface_lab::geometry::{ChartOptions, LoopPair, SurfaceChart};
use interface_lab::profile::{ProfileParams, C0};
use interface_lab::wave::*;
use interface_lab::{Error, Execution};

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

fn constant_field(value: f64) -> SpacetimeField {
    let lat = Lattice::new(21, 21, 0.01);
    SpacetimeField::from_initial_data(
        lat,
        0.08,
        0.003,
        1.0,
        0.0,
        vec![value; lat.len()],
        &vec![0.0; lat.len()],
        Boundary::Frozen,
        Execution::Sequential,
    )
}

#[test]
fn constant_states_are_stationary() {
    for v in [1.0, 0.0, -1.0] {
        let mut f = constant_field(v);
        for _ in 0..50 {
            f.step().unwrap();
        }
        assert!(f.u_curr.iter().all(|&u| u == v));
    }
    assert_eq!(constant_field(-1.0).total_energy(), 0.0);
}

#[test]
fn boosted_kink_is_second_order() {
    let e1 = common::boosted_kink_error(0.1, 0.3, 0.0125, 0.5, Execution::Parallel);
    let e2 = common::boosted_kink_error(0.1, 0.3, 0.00625, 0.5, Execution::Parallel);
    let ratio = e1 / e2;
    assert!((ratio - 4.0).abs() <= 1.0, "ratio {ratio} (errors {e1:.3e}, {e2:.3e})");
    assert!(ratio.log2() >= 1.9);
}

#[test]
fn grid_rules() {
    let g = GridSpec::for_run(0.05, 1.2, 0.0, 0.5, 0.125);
    g.validate(0.05, 1.2).unwrap();
    assert!(g.half_width >= 1.2 + 0.5 + 0.5);
    assert!((g.n_steps() as f64 * g.dt - 0.5).abs() < 1e-12);
    let too_coarse = GridSpec { h: 0.05 / 6.0, ..g };
    assert!(matches!(too_coarse.validate(0.05, 1.2), Err(Error::InvalidGrid(_))));
    let too_long = GridSpec { dt: 0.5 * g.h, ..g };
    assert!(matches!(too_long.validate(0.05, 1.2), Err(Error::InvalidGrid(_))));
    let too_small = GridSpec { half_width: 1.0, ..g };
    assert!(matches!(too_small.validate(0.05, 1.2), Err(Error::InvalidGrid(_))));
    assert_eq!(GridSpec { t_end: -0.3, ..g }.direction(), -1.0);
}

#[test]
fn unstable_step_is_caught() {
    let lat = Lattice::new(41, 41, 0.01);
    let u0: Vec<f64> = (0..lat.len()).map(|k| if k % 7 == 0 { 0.2 } else { -0.1 }).collect();
    let mut f = SpacetimeField::from_initial_data(
        lat,
        0.1,
        0.05,
        1.0,
        0.0,
        u0,
        &vec![0.0; lat.len()],
        Boundary::Frozen,
        Execution::Sequential,
    );
    let err = (0..200).find_map(|_| f.step().err());
    assert!(matches!(err, Some(Error::BlowUp { .. })));
}

#[test]
fn prepared_collapsing_circle_data() {
    let eps = 0.05;
    let chart = circle_chart(0.3);
    let params = ProfileParams::new(eps, 0.3);
    let grid = GridSpec::for_run(eps, chart.max_spatial_radius(), 0.0, 0.1, 0.125);
    let field = prepare_initial_data(&chart, &params, &grid, Execution::Parallel).unwrap();
    let lat = field.lattice;
    // zero velocity at t = 0: the Taylor start differs from u₀ only by ½Δt²F
    let (_, ut) = interface_data(&chart, &params, &lat, 0.0, Execution::Parallel).unwrap();
    assert!(ut.iter().all(|v| v.abs() < 1e-12));
    let m = lat.nx / 2;
    assert_eq!(field.u_curr[lat.index(m, m)], 1.0);
    assert_eq!(field.u_curr[lat.index(0, 0)], -1.0);
    let k = (1.0 / lat.h).round() as usize;
    assert!((lat.x(m + k) - 1.0).abs() < 1e-12);
    assert!(field.u_curr[lat.index(m + k, m)].abs() < 1e-12);
    assert!(field.u_curr[lat.index(m, m + k)].abs() < 1e-12);

    // energy ≈ c₀/ε × length of the unit circle
    let e = field.total_energy();
    let expect = C0 / eps * TAU;
    assert!(((e - expect) / expect).abs() < 0.1, "energy {e} vs {expect}");
}

#[test]
fn moving_data_has_matched_velocity() {
    // the circle is shrinking at t = 0.3; compare ∂_t u with a centred difference in t
    let eps = 0.05;
    let chart = circle_chart(0.3);
    let params = ProfileParams::new(eps, 0.3);
    let lat = Lattice::new(401, 3, 0.006);
    let t = 0.3;
    let dt = 1e-5;
    let (_, ut) = interface_data(&chart, &params, &lat, t, Execution::Sequential).unwrap();
    let (up, _) = interface_data(&chart, &params, &lat, t + dt, Execution::Sequential).unwrap();
    let (um, _) = interface_data(&chart, &params, &lat, t - dt, Execution::Sequential).unwrap();
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for k in 0..lat.len() {
        let fd = (up[k] - um[k]) / (2.0 * dt);
        worst = worst.max((fd - ut[k]).abs());
        scale = scale.max(ut[k].abs());
    }
    assert!(scale > 1.0);
    assert!(worst < 1e-5 * scale, "worst {worst} scale {scale}");
}

#[test]
fn energy_is_conserved_and_symmetry_is_kept() {
    let eps = 0.08;
    let chart = circle_chart(0.32);
    let params = ProfileParams::new(eps, 0.32);
    let sim = simulate(&chart, &params, 0.0, -0.45, 0.45, 0.125, Execution::Parallel).unwrap();
    assert!(
        sim.forward.relative_drift() <= 0.01,
        "drift {}",
        sim.forward.relative_drift()
    );
    assert!(sim.backward.relative_drift() <= 0.01);
    let lat = sim.store.lattice;
    let n = lat.nx;
    let mut worst: f64 = 0.0;
    for s in sim.store.snapshots() {
        for j in 0..n {
            for i in 0..n {
                // 90° rotation (i, j) → (n-1-j, i)
                let a = s.u[lat.index(i, j)];
                let b = s.u[lat.index(n - 1 - j, i)];
                worst = worst.max((a - b).abs());
            }
        }
    }
    assert!(worst <= 1e-10, "rotation asymmetry {worst}");
    // time reversal of the data at rest: u(-t) = u(t)
    let snaps = sim.store.snapshots();
    let k0 = snaps.iter().position(|s| s.t == 0.0).unwrap();
    for d in 1..5 {
        let (a, b) = (&snaps[k0 - d], &snaps[k0 + d]);
        assert!((a.t + b.t).abs() < 1e-12);
        let diff = a.u.iter().zip(&b.u).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-12);
    }
    // the stored levels give at least 20 slices in (-T₁, T¹)
    let inside = sim.store.times().iter().filter(|t| t.abs() < 0.45).count();
    assert!(inside >= 20);
}

#[test]
fn finite_propagation_speed() {
    let eps = 0.08;
    let chart = circle_chart(0.32);
    let params = ProfileParams::new(eps, 0.32);
    let grid = GridSpec::for_run(eps, chart.max_spatial_radius(), 0.0, 0.3, 0.125);
    let mut field = prepare_initial_data(&chart, &params, &grid, Execution::Parallel).unwrap();
    let lat = field.lattice;
    let radius = |k: usize| lat.x(k % lat.nx).hypot(lat.y(k / lat.nx));
    // the Taylor start level already reaches one cell further than u₀
    let r0 = (0..lat.len())
        .filter(|&k| field.u_curr[k] != -1.0 || field.u_prev[k] != -1.0)
        .map(radius)
        .fold(0.0, f64::max);
    for _ in 0..grid.n_steps() {
        field.step().unwrap();
    }
    let t = field.t();
    let beyond = |margin: f64| {
        (0..lat.len())
            .filter(|&k| radius(k) > r0 + t + margin * lat.h)
            .map(|k| (field.u_curr[k] + 1.0).abs())
            .fold(0.0, f64::max)
    };
    // leapfrog spreads one cell per step, so the discrete solution carries a
    // rapidly decaying precursor ahead of the light cone
    assert!(beyond(2.0) < 1e-5, "deviation {} beyond the light cone", beyond(2.0));
    assert!(beyond(12.0) < 1e-12);
    assert!(beyond(2.0) > beyond(4.0) && beyond(4.0) > beyond(6.0));
}

#[test]
fn execution_modes_agree_bitwise() {
    let eps = 0.08;
    let chart = circle_chart(0.32);
    let params = ProfileParams::new(eps, 0.32);
    let grid = GridSpec::for_run(eps, chart.max_spatial_radius(), 0.1, 0.2, 0.125);
    let run = |exec| {
        let mut f = prepare_initial_data(&chart, &params, &grid, exec).unwrap();
        for _ in 0..10 {
            f.step().unwrap();
        }
        let e = f.total_energy();
        (f.u_curr, e)
    };
    let (a, ea) = run(Execution::Sequential);
    let (b, eb) = run(Execution::Parallel);
    assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
    assert_eq!(ea.to_bits(), eb.to_bits());
}

#[test]
fn snapshots_roundtrip_bitwise() {
    let mut f = constant_field(-1.0);
    f.u_curr[100] = 0.123456789012345;
    let mut store = SnapshotStore::new(f.lattice, f.epsilon);
    let log = evolve(&mut f, 7, usize::MAX, &mut store).unwrap();
    assert_eq!(store.len(), 2);
    assert_eq!(log.samples.len(), 2);
    let dir = tempfile::tempdir().unwrap();
    store.save(dir.path()).unwrap();
    let back = SnapshotStore::load(dir.path()).unwrap();
    assert_eq!(back.lattice, store.lattice);
    for (a, b) in back.snapshots().iter().zip(store.snapshots()) {
        assert_eq!(a.t.to_bits(), b.t.to_bits());
        assert!(a.u.iter().zip(&b.u).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
    let header: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("snap_00000.json")).unwrap()).unwrap();
    for key in ["t", "h", "L", "epsilon", "nx", "ny"] {
        assert!(header.get(key).is_some(), "missing {key}");
    }
}

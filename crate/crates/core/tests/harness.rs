use std::path::Path;

use interface_lab::harness::*;
use interface_lab::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn small_null_config(dir: &Path) -> RunConfig {
    RunConfig {
        epsilons: vec![0.1],
        t0: 0.1,
        n1: 64,
        min_slices: 6,
        field: FieldMode::Manufactured { amplitude: 0.3 },
        output_dir: dir.to_path_buf(),
        ..RunConfig::default()
    }
}

fn metrics(epsilon: f64, scale: f64) -> EpsilonMetrics {
    EpsilonMetrics {
        epsilon,
        sup_theta1: scale * epsilon.powi(2),
        sup_theta2: 0.1 * scale * epsilon.powi(2),
        sup_theta3: 2.0 * scale * epsilon.powi(2),
        h1_deviation: epsilon,
        shift_h1: 0.5 * epsilon,
        far_energy: epsilon.powi(2),
        far_l2: epsilon.powi(3),
        du_norm: epsilon.powf(-0.5),
        slices: 32,
        ..Default::default()
    }
}

fn synthetic_report() -> SweepReport {
    let runs = [0.08, 0.06, 0.045]
        .iter()
        .map(|&e| RunOutcome {
            epsilon: e,
            metrics: Some(metrics(e, 3.0)),
            error: None,
        })
        .collect();
    assemble_report(runs, &RateBands::default())
}

#[test]
fn config_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let custom = RunConfig {
        scenario: Scenario::PerturbedCircle { beta: 0.05 },
        epsilons: vec![0.1, 0.07, 0.05, 0.035],
        field: FieldMode::Manufactured { amplitude: 0.2 },
        theta1_variant: interface_lab::diagnostics::Theta1Variant::AsPrinted,
        exec: interface_lab::Execution::Sequential,
        workers: 2,
        ..RunConfig::default()
    };
    for cfg in [RunConfig::default(), custom] {
        let path = dir.path().join("c.json");
        cfg.save(&path).unwrap();
        assert_eq!(RunConfig::load(&path).unwrap(), cfg);
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), cfg);
    }
    // missing keys fall back to defaults
    let partial: RunConfig = serde_json::from_str(r#"{"rho": 0.3}"#).unwrap();
    assert_eq!(partial.rho, 0.3);
    assert_eq!(partial.epsilons, RunConfig::default().epsilons);
}

#[test]
fn config_validation() {
    assert!(RunConfig::default().validate().is_ok());
    let bad = |c: RunConfig| matches!(c.validate(), Err(Error::Config(_)));
    let d = RunConfig::default;
    assert!(bad(RunConfig {
        epsilons: vec![],
        ..d()
    }));
    assert!(bad(RunConfig {
        epsilons: vec![0.05, 0.06, 0.04],
        ..d()
    }));
    assert!(bad(RunConfig {
        epsilons: vec![0.08, 0.08, 0.04],
        ..d()
    }));
    assert!(bad(RunConfig {
        epsilons: vec![0.08, 0.06],
        ..d()
    }));
    assert!(RunConfig {
        epsilons: vec![0.08, 0.06],
        ..d()
    }
    .validate_run()
    .is_ok());
    assert!(bad(RunConfig { c2: -1.0, ..d() }));
    assert!(bad(RunConfig { delta: 0.0, ..d() }));
    assert!(bad(RunConfig { h_ratio: 0.2, ..d() }));
    assert!(bad(RunConfig { workers: 0, ..d() }));
    assert!(bad(RunConfig {
        field: FieldMode::Manufactured { amplitude: 5.0 },
        ..d()
    }));
    assert!(matches!(
        RunConfig::load(Path::new("/nonexistent/c.json")),
        Err(Error::Io { .. })
    ));
}

#[test]
fn slice_grid_cadence() {
    let cfg = RunConfig::default();
    let (y0, dy0) = cfg.slice_grid();
    assert!(y0.len() >= cfg.min_slices);
    assert!(dy0 <= cfg.rho / 8.0 + 1e-12);
    let t1 = cfg.t1();
    assert!((y0[0] + t1 - 0.5 * dy0).abs() < 1e-12);
    for (a, b) in y0.iter().zip(y0.iter().rev()) {
        assert!((a + b).abs() < 1e-12);
    }
}

#[test]
fn chart_must_cover_the_time_window() {
    let chart = build_chart(&RunConfig::default()).unwrap();
    assert_eq!(chart.rho, 0.32);
    let short = RunConfig {
        t1_offset: 0.02,
        ..RunConfig::default()
    };
    assert!(matches!(build_chart(&short), Err(Error::Config(_))));
}

#[test]
fn fit_rate_examples() {
    let f = fit_rate(&[(0.1, 0.01), (0.05, 0.0025), (0.025, 0.000625)]).unwrap();
    assert!((f.slope - 2.0).abs() < 1e-12);
    assert!((f.r2 - 1.0).abs() < 1e-12);
    assert!(f.residual < 1e-12);
    assert_eq!(f.points, 3);
    assert!((f.predict(0.2) - 0.04).abs() < 1e-12);

    let pairs: Vec<(f64, f64)> = [0.2, 0.1, 0.07, 0.03].iter().map(|&e: &f64| (e, e.powf(1.5))).collect();
    assert!((fit_rate(&pairs).unwrap().slope - 1.5).abs() < 1e-12);

    assert!(matches!(fit_rate(&pairs[..2]), Err(Error::TooFewPoints(2))));
    assert!(matches!(
        fit_rate(&[(0.1, 1.0), (0.05, 0.0), (0.02, 0.1)]),
        Err(Error::NonPositiveValue { value, .. }) if value == 0.0
    ));
    assert!(matches!(
        fit_rate(&[(0.1, 1.0), (0.05, -1.0), (0.02, 0.1)]),
        Err(Error::NonPositiveValue { .. })
    ));
}

#[test]
fn fit_rate_under_multiplicative_noise() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let eps = [0.1, 0.05, 0.025];
    for truth in [1.0, 2.0, 3.0] {
        for _ in 0..100 {
            let pairs: Vec<(f64, f64)> = eps
                .iter()
                .map(|&e: &f64| (e, 0.7 * e.powf(truth) * (1.0 + rng.gen_range(-0.05..0.05))))
                .collect();
            let f = fit_rate(&pairs).unwrap();
            assert!((f.slope - truth).abs() <= 0.15, "slope {} vs {truth}", f.slope);
        }
    }
}

#[test]
fn report_fits_and_ratios() {
    let r = synthetic_report();
    for (metric, slope) in [
        ("sup_theta1", 2.0),
        ("h1_deviation", 1.0),
        ("shift_h1", 1.0),
        ("far_energy", 2.0),
        ("far_l2", 3.0),
        ("du_norm", -0.5),
    ] {
        let f = r.fit(metric).unwrap();
        assert!((f.fit.unwrap().slope - slope).abs() < 1e-9, "{metric}");
    }
    assert!(r.fits.iter().filter(|f| f.band.is_some()).all(|f| f.pass == Some(true)));
    assert!(r.gradient_ratios.iter().all(|g| (g - 1.0).abs() < 1e-12));
    assert!(r.h1_over_eps.iter().all(|g| (g - 1.0).abs() < 1e-12));
    // zero values are recorded as fit errors, not dropped
    let theta2_abs = r.fit("sup_theta2_abs").unwrap();
    assert!(theta2_abs.fit.is_none() && theta2_abs.error.is_some());
}

#[test]
fn failed_runs_are_isolated() {
    let mut runs: Vec<RunOutcome> = [0.1, 0.08, 0.06, 0.045]
        .iter()
        .map(|&e| RunOutcome {
            epsilon: e,
            metrics: Some(metrics(e, 1.0)),
            error: None,
        })
        .collect();
    runs[1] = RunOutcome {
        epsilon: 0.08,
        metrics: None,
        error: Some("chart is singular".into()),
    };
    let r = assemble_report(runs, &RateBands::default());
    assert_eq!(r.successes().count(), 3);
    assert_eq!(r.fit("sup_theta1").unwrap().fit.unwrap().points, 3);
    assert_eq!(r.gradient_ratios.len(), 2);
}

#[test]
fn empty_report_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    assert!(matches!(
        emit_report(&SweepReport::default(), &out),
        Err(Error::EmptyReport(_))
    ));
    assert!(!out.exists());
    let failed = assemble_report(
        vec![RunOutcome {
            epsilon: 0.1,
            metrics: None,
            error: Some("x".into()),
        }],
        &RateBands::default(),
    );
    assert!(matches!(emit_report(&failed, &out), Err(Error::EmptyReport(_))));
    assert!(!out.exists());
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn report_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let r = synthetic_report();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let written = emit_report(&r, &a).unwrap();
    emit_report(&synthetic_report(), &b).unwrap();
    assert_eq!(read_all(&a), read_all(&b));
    let names: Vec<_> = read_all(&a).into_iter().map(|(n, _)| n).collect();
    for f in [
        "sweep.csv",
        "fits.csv",
        "summary.json",
        "plot_sup_theta1.svg",
        "plot_far_l2.svg",
    ] {
        assert!(names.iter().any(|n| n == f), "missing {f}");
    }
    assert_eq!(written.len(), names.len());
    // summary round-trips and re-emits the same bytes
    let loaded = load_report(&a.join("summary.json")).unwrap();
    assert_eq!(loaded, r);
    let c = dir.path().join("c");
    emit_report(&loaded, &c).unwrap();
    assert_eq!(read_all(&a), read_all(&c));
    let sweep = std::fs::read_to_string(a.join("sweep.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 4);
    assert!(sweep.starts_with("epsilon,sup_theta1,"));
}

#[test]
fn plot_axes_have_ten_percent_margins() {
    let pts = [(0.08, 2e-2), (0.06, 1e-2), (0.045, 5e-3)];
    let b = plot_bounds(&pts);
    let (xlo, xhi) = (0.045f64.log10(), 0.08f64.log10());
    let (ylo, yhi) = (5e-3f64.log10(), 2e-2f64.log10());
    assert!((b.x[0] - (xlo - 0.1 * (xhi - xlo))).abs() < 1e-12);
    assert!((b.x[1] - (xhi + 0.1 * (xhi - xlo))).abs() < 1e-12);
    assert!((b.y[0] - (ylo - 0.1 * (yhi - ylo))).abs() < 1e-12);
    assert!((b.y[1] - (yhi + 0.1 * (yhi - ylo))).abs() < 1e-12);
    for (e, v) in pts {
        assert!(b.x[0] < e.log10() && e.log10() < b.x[1]);
        assert!(b.y[0] < v.log10() && v.log10() < b.y[1]);
    }
    let flat = plot_bounds(&[(0.1, 1.0), (0.1, 1.0)]);
    assert!(flat.x[1] > flat.x[0] && flat.y[1] > flat.y[0]);
}

#[test]
fn manufactured_run_sits_at_the_floor() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_null_config(dir.path());
    let m = run_epsilon(&cfg, 0.1).unwrap();
    assert!(m.h1_deviation < 1e-6, "{}", m.h1_deviation);
    assert!(m.h1_far < 1e-6 && m.far_energy < 1e-6 && m.far_l2 < 1e-6);
    // the injected modulation is found: |s| = 0.3ε(1 + y₀)|cos y₁|
    let (y0, _) = cfg.slice_grid();
    let expected = 0.3 * 0.1 * (1.0 + y0.last().unwrap());
    assert!(
        (m.max_abs_shift - expected).abs() < 1e-6 * 0.1,
        "{} vs {expected}",
        m.max_abs_shift
    );
    assert_eq!(m.non_unique, 0);
    assert_eq!(m.energy_drift, 0.0);
    let run = dir.path().join(epsilon_dir_name(0.1));
    for f in ["config.json", "slices.csv", "shifts.csv", "summary.json"] {
        assert!(run.join(f).exists(), "missing {f}");
    }
    assert_eq!(RunConfig::load(&run.join("config.json")).unwrap().epsilons, vec![0.1]);

    // identical config, identical bytes
    let first = std::fs::read(run.join("summary.json")).unwrap();
    run_epsilon(&cfg, 0.1).unwrap();
    assert_eq!(first, std::fs::read(run.join("summary.json")).unwrap());
}

#[test]
fn ode_cases_emit_records() {
    let kernel = run_ode_case(OdeCase::Kernel).unwrap();
    assert!(kernel[0]["closed_form_error"].as_f64().unwrap() < 1e-8);
    let fp = run_ode_case(OdeCase::Fixedpoint).unwrap();
    let recs = fp.as_array().unwrap();
    assert_eq!(recs.len(), FIXEDPOINT_SIZES.len());
    for r in recs {
        for key in ["h_norm", "w_h1", "iterations", "factors", "residual"] {
            assert!(r.get(key).is_some());
        }
        assert!(r["factors"]
            .as_array()
            .unwrap()
            .iter()
            .all(|f| f.as_f64().unwrap() < 1.0));
    }
    let co = run_ode_case(OdeCase::Coercivity).unwrap();
    assert!(co.as_array().unwrap().iter().all(|r| r["holds"] == true));
    assert!("fixedpoint".parse::<OdeCase>().is_ok());
    assert!("spline".parse::<OdeCase>().is_err());
}

#[test]
fn stored_snapshots_reproduce_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        field: FieldMode::Solver,
        save_snapshots: true,
        ..small_null_config(dir.path())
    };
    let first = run_epsilon(&cfg, 0.1).unwrap();
    assert!(first.energy_drift > 0.0 && first.energy_drift < 1e-3);
    assert!(first.h1_deviation > 0.0 && first.non_unique == 0);
    let run = dir.path().join(epsilon_dir_name(0.1));
    assert!(run.join("energy.csv").exists());
    let again = analyze_run_dir(&run).unwrap();
    assert_eq!(again, first);
}

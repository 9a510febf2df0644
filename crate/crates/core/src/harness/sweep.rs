use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use super::config::{RateBands, RunConfig};
use super::report::{fit_rate, MetricFit, RunOutcome, SweepReport};
use super::run::{run_epsilon, EpsilonMetrics};
use crate::error::Result;

/// Fitted metrics and the band each must clear (`None`: reported only).
///
/// The `Θ_j` fits must also reach `r2_min`; the others are judged on the slope alone.
pub fn fitted_metrics(bands: &RateBands) -> Vec<(&'static str, Option<f64>)> {
    vec![
        ("sup_theta1", Some(bands.theta)),
        ("sup_theta2", Some(bands.theta)),
        ("sup_theta3", Some(bands.theta)),
        ("sup_theta2_abs", None),
        ("h1_deviation", Some(bands.h1)),
        ("h1_tube", None),
        ("h1_far", None),
        ("shift_h1", Some(bands.shift)),
        ("shift_h1_sq", None),
        ("far_energy", Some(bands.far_energy)),
        ("far_l2", Some(bands.far_l2)),
        ("du_norm", None),
    ]
}

/// Runs every ε of the config and fits rates over the successful runs.
///
/// Up to `config.workers` ε-runs are in flight at once. A failing (or
/// panicking) run is recorded and the others continue; each writes only into
/// its own directory. The report does not depend on scheduling.
pub fn run_sweep(config: &RunConfig) -> Result<SweepReport> {
    config.validate()?;
    let n = config.epsilons.len();
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<RunOutcome>>> = Mutex::new(vec![None; n]);
    let worker = || loop {
        let i = next.fetch_add(1, Ordering::SeqCst);
        if i >= n {
            break;
        }
        let epsilon = config.epsilons[i];
        let outcome = match catch_unwind(AssertUnwindSafe(|| run_epsilon(config, epsilon))) {
            Ok(Ok(m)) => RunOutcome {
                epsilon,
                metrics: Some(m),
                error: None,
            },
            Ok(Err(e)) => {
                log::error!("eps = {epsilon}: {e}");
                RunOutcome {
                    epsilon,
                    metrics: None,
                    error: Some(e.to_string()),
                }
            }
            Err(p) => {
                let msg = p
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "panic".into());
                log::error!("eps = {epsilon}: panicked: {msg}");
                RunOutcome {
                    epsilon,
                    metrics: None,
                    error: Some(format!("panic: {msg}")),
                }
            }
        };
        slots.lock().unwrap_or_else(|e| e.into_inner())[i] = Some(outcome);
    };
    let workers = config.workers.min(n);
    if workers <= 1 {
        worker();
    } else {
        std::thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(worker);
            }
        });
    }
    let runs: Vec<RunOutcome> = slots
        .into_inner()
        .unwrap_or_else(|e| e.into_inner())
        .into_iter()
        .flatten()
        .collect();
    Ok(assemble_report(runs, &config.bands))
}

/// Fits and ratios over the successful runs, in ε order.
pub fn assemble_report(runs: Vec<RunOutcome>, bands: &RateBands) -> SweepReport {
    let ok: Vec<EpsilonMetrics> = runs.iter().filter_map(|r| r.metrics).collect();
    let fits = fitted_metrics(bands)
        .into_iter()
        .map(|(metric, band)| {
            let pairs: Vec<(f64, f64)> = ok
                .iter()
                .filter_map(|m| m.get(metric).map(|v| (m.epsilon, v)))
                .collect();
            match fit_rate(&pairs) {
                Ok(fit) => MetricFit {
                    metric: metric.into(),
                    fit: Some(fit),
                    error: None,
                    band,
                    pass: band.map(|b| fit.slope >= b && (!metric.starts_with("sup_theta") || fit.r2 >= bands.r2_min)),
                },
                Err(e) => MetricFit {
                    metric: metric.into(),
                    fit: None,
                    error: Some(e.to_string()),
                    band,
                    pass: band.map(|_| false),
                },
            }
        })
        .collect();
    let gradient_ratios = ok
        .windows(2)
        .map(|w| (w[1].du_norm / w[0].du_norm) / (w[0].epsilon / w[1].epsilon).sqrt())
        .collect();
    let h1_over_eps = ok.iter().map(|m| m.h1_deviation / m.epsilon).collect();
    SweepReport {
        runs,
        fits,
        gradient_ratios,
        h1_over_eps,
    }
}

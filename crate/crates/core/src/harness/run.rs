use std::f64::consts::TAU;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::config::{epsilon_dir_name, FieldMode, RunConfig};
use crate::decomposition::{
    build_comparison, decompose_slice, shift_h1_norm, ProjectionOptions, Shift, ShiftFn, ShiftGrid,
};
use crate::diagnostics::{
    farfield_deviation, pullback, theta_slice, tube_norms, write_slices_csv, FarField, FarFieldOptions, FiberSpec,
    FieldSource, PullbackSlice, SliceDiagnostics, TubeNorms,
};
use crate::error::{Error, Result};
use crate::geometry::{ChartOptions, SurfaceChart};
use crate::profile::{Fiber, ProfileParams};
use crate::wave::{simulate, EnergyLog, GridSpec, Lattice, Simulation, SnapshotStore};

/// Chart of the configured scenario on `(-T₁, T¹)` with the configured `ρ`.
///
/// Fails with `Config` when the tube `|y₂| < ρ` over `(-T₁, T¹)` does not
/// cover the interface for all `|t| < T₀`, i.e. when the end faces `y₀ = ±T₁`
/// reach into the time window.
pub fn build_chart(config: &RunConfig) -> Result<SurfaceChart> {
    let loops = config.scenario.loops()?;
    let t1 = config.t1();
    let chart = SurfaceChart::new(
        loops,
        &ChartOptions {
            t_minus: t1,
            t_plus: t1,
            rho: Some(config.rho),
            det_floor: config.det_floor,
        },
    )?;
    let (lo, hi) = end_face_times(&chart, config.rho);
    if lo < config.t0 || hi > -config.t0 {
        return Err(Error::Config(format!(
            "tube ends reach into |t| < T0 = {}: face times {hi:.4} / {lo:.4}; increase t1_offset",
            config.t0
        )));
    }
    Ok(chart)
}

/// `min Ψ⁰` on the face `y₀ = T¹` and `max Ψ⁰` on `y₀ = -T₁`, over `|y₂| ≤ width`.
fn end_face_times(chart: &SurfaceChart, width: f64) -> (f64, f64) {
    let n1 = 512;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for j in 0..n1 {
        let y1 = TAU * j as f64 / n1 as f64;
        for y2 in [-width, width] {
            if let Ok(f) = chart.frame(chart.t_plus, y1) {
                lo = lo.min(f.map(y2)[0]);
            }
            if let Ok(f) = chart.frame(-chart.t_minus, y1) {
                hi = hi.max(f.map(y2)[0]);
            }
        }
    }
    (lo, hi)
}

/// Solver run covering every time the slices and the far field touch.
///
/// The pullback reads `Ψ⁰` over `|y₂| ≤ ρ`; cubic time interpolation needs two
/// stored levels on each side, hence a margin of `0.6ε` (three snapshot spacings).
pub fn simulate_epsilon(config: &RunConfig, chart: &SurfaceChart, epsilon: f64) -> Result<Simulation> {
    let params = ProfileParams::new(epsilon, config.rho);
    let (lo, hi) = chart.time_span(config.rho);
    let margin = 0.6 * epsilon;
    let t_lo = lo.min(-config.t0) - margin;
    let t_hi = hi.max(config.t0) + margin;
    simulate(chart, &params, 0.0, t_lo, t_hi, config.h_ratio, config.exec)
}

/// Scalars of one ε-run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EpsilonMetrics {
    pub epsilon: f64,
    pub sup_theta1: f64,
    pub sup_theta2: f64,
    pub sup_theta3: f64,
    /// `sup_{y₀} ∫ |y₂|(v - sign)²`, the integral of the fiber `θ₂`.
    pub sup_theta2_abs: f64,
    /// `‖u - U_ε‖_{H¹_ε}` over `(-T₀, T₀) × ℝ²`.
    pub h1_deviation: f64,
    pub h1_tube: f64,
    pub h1_far: f64,
    /// `sup_{y₀} ‖s_*(y₀, ·)‖²_{H¹(S¹)}`.
    pub shift_h1_sq: f64,
    pub shift_h1: f64,
    pub max_abs_shift: f64,
    pub far_energy: f64,
    /// `∫_ℳ (u ∓ 1)²`.
    pub far_l2: f64,
    /// `‖DU_ε‖_{L²}` over the tube part of `(-T₀, T₀) × ℝ²`.
    pub du_norm: f64,
    pub max_orthogonality: f64,
    pub non_unique: usize,
    pub energy_drift: f64,
    pub tube_volume: f64,
    pub far_volume: f64,
    pub slices: usize,
}

impl EpsilonMetrics {
    /// Named values in a fixed order (CSV columns and plots).
    pub fn named(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("sup_theta1", self.sup_theta1),
            ("sup_theta2", self.sup_theta2),
            ("sup_theta3", self.sup_theta3),
            ("sup_theta2_abs", self.sup_theta2_abs),
            ("h1_deviation", self.h1_deviation),
            ("h1_tube", self.h1_tube),
            ("h1_far", self.h1_far),
            ("shift_h1_sq", self.shift_h1_sq),
            ("shift_h1", self.shift_h1),
            ("max_abs_shift", self.max_abs_shift),
            ("far_energy", self.far_energy),
            ("far_l2", self.far_l2),
            ("du_norm", self.du_norm),
            ("max_orthogonality", self.max_orthogonality),
            ("non_unique", self.non_unique as f64),
            ("energy_drift", self.energy_drift),
            ("tube_volume", self.tube_volume),
            ("far_volume", self.far_volume),
            ("slices", self.slices as f64),
        ]
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.named().into_iter().find(|(n, _)| *n == name).map(|(_, v)| v)
    }
}

/// Everything the diagnostics produce for one ε.
#[derive(Clone, Debug)]
pub struct EpsilonAnalysis {
    pub metrics: EpsilonMetrics,
    pub slices: Vec<SliceDiagnostics>,
    pub shifts: ShiftGrid,
    pub residuals: Vec<Vec<f64>>,
    pub tube: TubeNorms,
    pub far: FarField,
}

/// Pullback, functionals, decomposition and norms for one field source.
pub fn analyze_epsilon(
    config: &RunConfig,
    chart: &SurfaceChart,
    epsilon: f64,
    source: &dyn FieldSource,
    lattice: &Lattice,
    energy_drift: f64,
) -> Result<EpsilonAnalysis> {
    let exec = config.exec;
    let params = ProfileParams::new(epsilon, config.rho);
    let spec = FiberSpec {
        n1: config.n1,
        n2: Fiber::points_for(epsilon, config.rho),
        rho: config.rho,
    };
    let opts = ProjectionOptions {
        c3: config.c3,
        delta: config.delta,
    };
    let (y0s, dy0) = config.slice_grid();
    let mut pulled: Vec<PullbackSlice> = Vec::with_capacity(y0s.len());
    let mut diags = Vec::with_capacity(y0s.len());
    let mut rows = Vec::with_capacity(y0s.len());
    let mut residuals = Vec::with_capacity(y0s.len());
    let mut non_unique = 0;
    let mut max_orth: f64 = 0.0;
    for &y0 in &y0s {
        let slice = pullback(source, chart, y0, spec, exec)?;
        let mut diag = theta_slice(&slice, epsilon, config.theta1_variant);
        let dec = decompose_slice(&slice, &params, &opts, exec)?;
        diag.s_star = dec.iter().map(|d| d.s_star).collect();
        non_unique += dec.iter().filter(|d| !d.unique).count();
        max_orth = dec.iter().fold(max_orth, |m, d| m.max(d.residual_orthogonality.abs()));
        rows.push(diag.s_star.clone());
        residuals.push(dec.iter().map(|d| d.residual_orthogonality).collect());
        diags.push(diag);
        pulled.push(slice);
    }
    let shifts = ShiftGrid::new(y0s.clone(), config.n1, rows)?;
    let tube = tube_norms(chart, &pulled, &shifts, &params, config.t0, dy0, exec)?;
    drop(pulled);
    let levels = (2.0 * config.t0 / (0.2 * epsilon)).ceil() as usize;
    let far = farfield_deviation(
        source,
        chart,
        lattice,
        &FarFieldOptions {
            t0: config.t0,
            width: config.rho,
            levels,
        },
        exec,
    )?;

    let mut shift_sq: f64 = 0.0;
    for i in 0..shifts.len() {
        shift_sq = shift_sq.max(shift_h1_norm(&shifts, i)?);
    }
    let sup = |f: fn(&SliceDiagnostics) -> f64| diags.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
    let metrics = EpsilonMetrics {
        epsilon,
        sup_theta1: sup(|d| d.theta1),
        sup_theta2: sup(|d| d.theta2),
        sup_theta3: sup(|d| d.theta3),
        sup_theta2_abs: sup(|d| d.theta2_abs),
        h1_deviation: tube.deviation.add(&far.deviation).norm(epsilon),
        h1_tube: tube.deviation.norm(epsilon),
        h1_far: far.deviation.norm(epsilon),
        shift_h1_sq: shift_sq,
        shift_h1: shift_sq.sqrt(),
        max_abs_shift: shifts.rows.iter().flatten().fold(0.0, |m, s| m.max(s.abs())),
        far_energy: far.energy,
        far_l2: far.l2_total(),
        du_norm: tube.comparison_grad_sq.sqrt(),
        max_orthogonality: max_orth,
        non_unique,
        energy_drift,
        tube_volume: tube.volume,
        far_volume: far.volume,
        slices: y0s.len(),
    };
    Ok(EpsilonAnalysis {
        metrics,
        slices: diags,
        shifts,
        residuals,
        tube,
        far,
    })
}

/// The manufactured field's modulation `s = a·ε(1 + y₀)cos y₁` and its derivatives.
pub fn manufactured_shift(amplitude: f64, epsilon: f64) -> ShiftFn {
    let a = amplitude * epsilon;
    Arc::new(move |y0, y1| [a * (1.0 + y0) * y1.cos(), a * y1.cos(), -a * (1.0 + y0) * y1.sin()])
}

/// Lattice for the manufactured field: `h = h_ratio·ε` on the box `R_max + 0.5`.
pub fn manufactured_lattice(config: &RunConfig, chart: &SurfaceChart, epsilon: f64) -> Lattice {
    GridSpec::for_run(epsilon, chart.max_spatial_radius(), 0.0, 0.0, config.h_ratio).lattice()
}

/// Per-ε output directory under the output root.
pub fn epsilon_dir(config: &RunConfig, epsilon: f64) -> PathBuf {
    config.output_root().join(epsilon_dir_name(epsilon))
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(Error::io(dir))
}

/// Writes the energy samples of both directions, sorted by time.
pub fn write_energy_csv(path: &Path, logs: &[&EnergyLog]) -> Result<()> {
    let mut samples: Vec<(f64, f64)> = logs.iter().flat_map(|l| l.samples.iter().copied()).collect();
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    samples.dedup_by(|a, b| a.0 == b.0);
    let mut w = csv::Writer::from_path(path).map_err(Error::csv(path))?;
    w.write_record(["t", "energy"]).map_err(Error::csv(path))?;
    for (t, e) in samples {
        w.write_record([format!("{t:e}"), format!("{e:e}")])
            .map_err(Error::csv(path))?;
    }
    w.flush().map_err(Error::io(path))
}

/// `max |E - E(0)| / E(0)` from an `energy.csv` written by [`write_energy_csv`].
pub fn read_energy_drift(path: &Path) -> Result<f64> {
    let mut r = csv::Reader::from_path(path).map_err(Error::csv(path))?;
    let mut samples = Vec::new();
    for rec in r.deserialize::<(f64, f64)>() {
        samples.push(rec.map_err(Error::csv(path))?);
    }
    let Some(&(_, e0)) = samples.iter().min_by(|a, b| a.0.abs().total_cmp(&b.0.abs())) else {
        return Err(Error::Config(format!("{}: no energy samples", path.display())));
    };
    Ok(samples.iter().map(|&(_, e)| ((e - e0) / e0).abs()).fold(0.0, f64::max))
}

/// `config.json` for one ε: the sweep config restricted to that ε.
pub fn single_epsilon_config(config: &RunConfig, epsilon: f64) -> RunConfig {
    RunConfig {
        epsilons: vec![epsilon],
        ..config.clone()
    }
}

/// Writes `slices.csv`, `shifts.csv` and `summary.json` into `dir`.
pub fn write_analysis(dir: &Path, analysis: &EpsilonAnalysis) -> Result<()> {
    create_dir(dir)?;
    write_slices_csv(&dir.join("slices.csv"), &analysis.slices)?;
    analysis
        .shifts
        .write_csv(&dir.join("shifts.csv"), &analysis.residuals)?;
    let path = dir.join("summary.json");
    let summary = serde_json::json!({
        "metrics": analysis.metrics,
        "tube": analysis.tube,
        "far_field": analysis.far,
    });
    let text = serde_json::to_string_pretty(&summary).map_err(Error::json(&path))?;
    std::fs::write(&path, text + "\n").map_err(Error::io(&path))
}

/// Full pipeline for one ε, with outputs under [`epsilon_dir`].
pub fn run_epsilon(config: &RunConfig, epsilon: f64) -> Result<EpsilonMetrics> {
    config.validate_run()?;
    let started = std::time::Instant::now();
    let chart = build_chart(config)?;
    let dir = epsilon_dir(config, epsilon);
    create_dir(&dir)?;
    single_epsilon_config(config, epsilon).save(&dir.join("config.json"))?;
    let analysis = match config.field {
        FieldMode::Solver => {
            let sim = simulate_epsilon(config, &chart, epsilon)?;
            log::info!(
                "eps = {epsilon}: solved in {:.1} s, {} snapshots",
                started.elapsed().as_secs_f64(),
                sim.store.len()
            );
            write_energy_csv(&dir.join("energy.csv"), &[&sim.forward, &sim.backward])?;
            if config.save_snapshots {
                sim.store.save(&dir.join("snapshots"))?;
            }
            let drift = sim.forward.relative_drift().max(sim.backward.relative_drift());
            analyze_epsilon(config, &chart, epsilon, &sim.store, &sim.store.lattice, drift)?
        }
        FieldMode::Manufactured { amplitude } => {
            let params = ProfileParams::new(epsilon, config.rho);
            let shift = Shift::Analytic(manufactured_shift(amplitude, epsilon));
            let field = build_comparison(&chart, shift, params)?;
            let lattice = manufactured_lattice(config, &chart, epsilon);
            analyze_epsilon(config, &chart, epsilon, &field, &lattice, 0.0)?
        }
    };
    write_analysis(&dir, &analysis)?;
    log::info!("eps = {epsilon}: done in {:.1} s", started.elapsed().as_secs_f64());
    Ok(analysis.metrics)
}

/// Re-runs the diagnostics on snapshots saved in `dir/snapshots`.
pub fn analyze_run_dir(dir: &Path) -> Result<EpsilonMetrics> {
    let config = RunConfig::load(&dir.join("config.json"))?;
    config.validate_run()?;
    let epsilon = config.epsilons[0];
    let chart = build_chart(&config)?;
    let store = SnapshotStore::load(&dir.join("snapshots"))?;
    if (store.epsilon - epsilon).abs() > 1e-12 {
        return Err(Error::Config(format!(
            "snapshots were computed for eps = {}, config says {epsilon}",
            store.epsilon
        )));
    }
    let drift = read_energy_drift(&dir.join("energy.csv"))?;
    let analysis = analyze_epsilon(&config, &chart, epsilon, &store, &store.lattice, drift)?;
    write_analysis(dir, &analysis)?;
    Ok(analysis.metrics)
}

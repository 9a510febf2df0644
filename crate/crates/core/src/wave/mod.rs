//! Leapfrog solver for `u_tt - Δu + (2/ε²)(u² - 1)u = 0` on a square box.

mod field;
mod grid;
mod initial;
mod snapshot;

pub use field::{Boundary, SpacetimeField, U_GUARD};
pub use grid::{GridSpec, Lattice, CFL_SAFETY};
pub use initial::{dt_distance, interface_data, prepare_initial_data};
pub use snapshot::{read_snapshot, write_snapshot, Snapshot, SnapshotHeader, SnapshotStore};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exec::Execution;
use crate::geometry::SurfaceChart;
use crate::profile::ProfileParams;

/// Energy samples `(t, E)` recorded at snapshot times.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyLog {
    pub samples: Vec<(f64, f64)>,
}

impl EnergyLog {
    /// `max |E - E₀| / E₀`.
    pub fn relative_drift(&self) -> f64 {
        let Some(&(_, e0)) = self.samples.first() else {
            return 0.0;
        };
        self.samples
            .iter()
            .map(|&(_, e)| ((e - e0) / e0).abs())
            .fold(0.0, f64::max)
    }
}

/// Steps `field` for `n_steps`, pushing a snapshot every `stride` steps and at the end.
///
/// `stride = usize::MAX` keeps only the initial and final levels.
pub fn evolve(
    field: &mut SpacetimeField,
    n_steps: usize,
    stride: usize,
    store: &mut SnapshotStore,
) -> Result<EnergyLog> {
    let stride = stride.max(1);
    let mut log = EnergyLog::default();
    store.push(field.t(), field.u_curr.clone());
    log.samples.push((field.t(), field.total_energy()));
    for n in 1..=n_steps {
        field.step()?;
        if n % stride == 0 || n == n_steps {
            store.push(field.t(), field.u_curr.clone());
            log.samples.push((field.t(), field.total_energy()));
        }
    }
    Ok(log)
}

/// Snapshot stride giving a spacing of about `0.2ε` between stored levels.
pub fn default_stride(epsilon: f64, dt: f64) -> usize {
    ((0.2 * epsilon / dt).floor() as usize).max(1)
}

/// A solved run: snapshots over `[t_lo, t_hi]` plus energy logs of both directions.
#[derive(Clone, Debug)]
pub struct Simulation {
    pub store: SnapshotStore,
    pub grid: GridSpec,
    pub forward: EnergyLog,
    pub backward: EnergyLog,
}

/// Solves from prepared data at `t_start` forwards to `t_hi` and backwards to `t_lo`.
///
/// The backward run is the same equation started with reversed velocity; both
/// share one box sized for the longer direction.
pub fn simulate(
    chart: &SurfaceChart,
    params: &ProfileParams,
    t_start: f64,
    t_lo: f64,
    t_hi: f64,
    h_ratio: f64,
    exec: Execution,
) -> Result<Simulation> {
    let r_max = chart.max_spatial_radius();
    let span = (t_hi - t_start).max(t_start - t_lo);
    let proto = GridSpec::for_run(params.epsilon, r_max, t_start, t_start + span, h_ratio);
    proto.validate(params.epsilon, r_max)?;
    let stride = default_stride(params.epsilon, proto.dt);
    let mut store = SnapshotStore::new(proto.lattice(), params.epsilon);
    let mut logs = [EnergyLog::default(), EnergyLog::default()];
    for (k, t_end) in [t_hi, t_lo].into_iter().enumerate() {
        if (t_end - t_start).abs() < 1e-15 {
            continue;
        }
        let grid = GridSpec { t_end, ..proto };
        let n_steps = ((t_end - t_start).abs() / proto.dt - 1e-9).ceil() as usize;
        let mut field = prepare_initial_data(chart, params, &grid, exec)?;
        log::info!(
            "eps = {}: {} steps {} on {}x{} grid",
            params.epsilon,
            n_steps,
            if k == 0 { "forward" } else { "backward" },
            field.lattice.nx,
            field.lattice.ny
        );
        logs[k] = evolve(&mut field, n_steps, stride, &mut store)?;
    }
    let [forward, backward] = logs;
    Ok(Simulation {
        store,
        grid: proto,
        forward,
        backward,
    })
}

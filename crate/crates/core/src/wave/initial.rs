use super::field::{Boundary, SpacetimeField};
use super::grid::GridSpec;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geometry::{inside_from_crossings, ChartPoint, SlicePolygon, SurfaceChart};
use crate::profile::ProfileParams;

/// Interface data `u = Q_ε(d̂)`, `∂_t u = Q_ε'(d̂)·∂_t d̂` at time `t`.
///
/// `d̂` is `y₂` in the tube and `±2ρ` outside (so `u = ±1` there, `+` in the
/// enclosed region). `∂_t d̂` is the `(y₂, t)` entry of `(DΨ)⁻¹`.
pub fn interface_data(
    chart: &SurfaceChart,
    params: &ProfileParams,
    lattice: &super::grid::Lattice,
    t: f64,
    exec: Execution,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if !chart.covers(t) {
        return Err(Error::ChartUnavailable {
            t,
            lo: -chart.t_minus,
            hi: chart.t_plus,
        });
    }
    let nx = lattice.nx;
    let poly = SlicePolygon::new(&chart.loops, t, 1024);
    let rows = exec.map(lattice.ny, |j| {
        let x2 = lattice.y(j);
        let crossings = poly.row_crossings(x2);
        let mut u = vec![0.0; nx];
        let mut ut = vec![0.0; nx];
        let mut guess: Option<ChartPoint> = None;
        for i in 0..nx {
            let x1 = lattice.x(i);
            let cp = chart.locate(t, [x1, x2], guess.as_ref());
            if cp.inside_tube {
                guess = Some(cp);
                let (q, dq, _) = params.big_q_derivs(cp.y2);
                u[i] = q;
                if dq != 0.0 {
                    ut[i] = dq * dt_distance(chart, &cp);
                }
            } else {
                if cp.y0.is_finite() {
                    guess = Some(cp);
                }
                u[i] = if inside_from_crossings(&crossings, x1) {
                    1.0
                } else {
                    -1.0
                };
            }
        }
        (u, ut)
    });
    let mut u = Vec::with_capacity(lattice.len());
    let mut ut = Vec::with_capacity(lattice.len());
    for (ru, rt) in rows {
        u.extend(ru);
        ut.extend(rt);
    }
    Ok((u, ut))
}

/// `∂_t y₂` at a tube point: row 2, column 0 of `(DΨ)⁻¹`.
pub fn dt_distance(chart: &SurfaceChart, cp: &ChartPoint) -> f64 {
    match chart.frame(cp.y0, cp.y1) {
        Ok(f) => f.jacobian(cp.y2).try_inverse().map_or(0.0, |inv| inv[(2, 0)]),
        Err(_) => 0.0,
    }
}

/// Well-prepared field at `grid.t_start`, set up to run towards `grid.t_end`.
pub fn prepare_initial_data(
    chart: &SurfaceChart,
    params: &ProfileParams,
    grid: &GridSpec,
    exec: Execution,
) -> Result<SpacetimeField> {
    let lattice = grid.lattice();
    let (u, ut) = interface_data(chart, params, &lattice, grid.t_start, exec)?;
    let ring_ok = (0..lattice.nx).all(|i| u[i] == -1.0 && u[lattice.index(i, lattice.ny - 1)] == -1.0)
        && (0..lattice.ny).all(|j| u[lattice.index(0, j)] == -1.0 && u[lattice.index(lattice.nx - 1, j)] == -1.0);
    if !ring_ok {
        return Err(Error::InvalidGrid("interface data reaches the box boundary".into()));
    }
    Ok(SpacetimeField::from_initial_data(
        lattice,
        params.epsilon,
        grid.dt,
        grid.direction(),
        grid.t_start,
        u,
        &ut,
        Boundary::Frozen,
        exec,
    ))
}

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::odelab::{
    apply_s, coercivity_check, fixed_point, sobolev_check, CoercivityOptions, FixedPointOptions, OdeGrid, OdeProfile,
};
use crate::profile::{chi, q_eps, Fiber};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OdeCase {
    /// `𝒮(0, sech²)` against the closed form `s·sech²s`.
    Kernel,
    /// Picard iteration for data sizes spanning a factor 50.
    Fixedpoint,
    /// Coercivity measurements on kink-like fibers for three ε.
    Coercivity,
}

impl std::str::FromStr for OdeCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kernel" => Ok(Self::Kernel),
            "fixedpoint" => Ok(Self::Fixedpoint),
            "coercivity" => Ok(Self::Coercivity),
            _ => Err(Error::Config(format!("unknown ode-lab case {s:?}"))),
        }
    }
}

/// Data sizes `‖h‖_{L²}` of the fixed-point case.
pub const FIXEDPOINT_SIZES: [f64; 5] = [1e-3, 2.5e-3, 1e-2, 2.5e-2, 5e-2];

type Profile = Box<dyn Fn(f64) -> f64>;

fn sech2(s: f64) -> f64 {
    1.0 / s.cosh().powi(2)
}

/// Runs one case; the result is a JSON array with one record per experiment.
pub fn run_ode_case(case: OdeCase) -> Result<Value> {
    let grid = OdeGrid::default();
    match case {
        OdeCase::Kernel => {
            let zero = vec![0.0; grid.len()];
            let h = grid.sample(sech2);
            let w = apply_s(&grid, &zero, &h)?;
            let err = (0..grid.len())
                .map(|i| (w[i] - grid.z(i) * sech2(grid.z(i))).abs())
                .fold(0.0, f64::max);
            Ok(json!([{
                "h_norm": grid.l2(&h),
                "w_h1": grid.h1(&w),
                "iterations": 1,
                "factors": [],
                "residual": crate::odelab::linear_residual(&grid, &zero, &w, &h),
                "closed_form_error": err,
                "sobolev": sobolev_check(&grid, &w),
            }]))
        }
        OdeCase::Fixedpoint => {
            let shape = grid.sample(|z| sech2(z) * (1.0 + 0.5 * z.sin()));
            let unit = grid.l2(&shape);
            let mut out = Vec::new();
            for size in FIXEDPOINT_SIZES {
                let h = shape.iter().map(|x| x * size / unit).collect();
                let mut p = OdeProfile::new(grid, h);
                let r = fixed_point(&mut p, &FixedPointOptions::default())?;
                out.push(serde_json::to_value(r).map_err(|e| Error::Config(e.to_string()))?);
            }
            Ok(Value::Array(out))
        }
        OdeCase::Coercivity => {
            let rho = 0.32;
            let opts = CoercivityOptions::default();
            let mut out = Vec::new();
            for eps in [0.1, 0.05, 0.025] {
                let fibers: [(&str, Profile); 3] = [
                    ("kink", Box::new(move |z| q_eps(z, eps))),
                    (
                        "wiggle",
                        Box::new(move |z| q_eps(z, eps) + eps.powf(1.5) * (z / eps).sin() * chi(z, rho)),
                    ),
                    ("shifted", Box::new(move |z| q_eps(z - 0.5 * eps, eps))),
                ];
                for (label, f) in fibers {
                    let half = (rho / (eps / 32.0)).ceil() as usize;
                    let mut fib = Fiber::with_points(2 * half + 1, rho);
                    for i in 0..fib.len() {
                        fib.values[i] = f(fib.z(i));
                    }
                    let r = coercivity_check(&fib, eps, &opts)?;
                    let mut v = serde_json::to_value(r).map_err(|e| Error::Config(e.to_string()))?;
                    v["fiber"] = json!(label);
                    out.push(v);
                }
            }
            Ok(Value::Array(out))
        }
    }
}

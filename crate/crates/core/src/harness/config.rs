use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diagnostics::Theta1Variant;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geometry::LoopPair;

/// Environment variable overriding the output root.
pub const OUTPUT_ENV: &str = "INTERFACE_LAB_OUTPUT";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Scenario {
    CollapsingCircle,
    /// Surface through the curve with tangent angle `s + β sin 3s`, starting at rest.
    PerturbedCircle {
        beta: f64,
    },
    /// Explicit Fourier coefficients of the two loops.
    Loops {
        loops: LoopPair,
    },
}

impl Scenario {
    pub fn loops(&self) -> Result<LoopPair> {
        match self {
            Scenario::CollapsingCircle => Ok(LoopPair::collapsing_circle()),
            Scenario::PerturbedCircle { beta } => LoopPair::perturbed_circle(*beta),
            Scenario::Loops { loops } => Ok(loops.clone()),
        }
    }
}

/// Where the field `u` comes from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum FieldMode {
    /// Leapfrog solution from prepared data.
    Solver,
    /// `u := U_ε` with the modulation `s = a·ε(1 + y₀)cos y₁`; no PDE is solved.
    Manufactured { amplitude: f64 },
}

/// Lower bounds on fitted slopes; kept below the nominal exponents to absorb
/// discretisation bias at desk-scale resolutions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RateBands {
    pub theta: f64,
    pub h1: f64,
    pub shift: f64,
    pub far_energy: f64,
    pub far_l2: f64,
    pub r2_min: f64,
    /// Relative tolerance on `‖DU_ε‖` ratios against `(ε₁/ε₂)^{1/2}`.
    pub gradient_ratio_tol: f64,
}

impl Default for RateBands {
    fn default() -> Self {
        Self {
            theta: 1.6,
            h1: 0.8,
            shift: 0.8,
            far_energy: 1.6,
            far_l2: 2.2,
            r2_min: 0.95,
            gradient_ratio_tol: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub scenario: Scenario,
    /// Strictly decreasing.
    pub epsilons: Vec<f64>,
    pub rho: f64,
    pub t0: f64,
    /// `T₁ = T¹ = T₀ + t1_offset`.
    pub t1_offset: f64,
    /// `h = h_ratio·ε`.
    pub h_ratio: f64,
    pub min_slices: usize,
    /// Slice spacing in `y₀` is at most `slice_spacing·ρ`.
    pub slice_spacing: f64,
    pub n1: usize,
    pub c2: f64,
    pub c3: f64,
    pub delta: f64,
    pub alpha0: f64,
    pub det_floor: f64,
    pub theta1_variant: Theta1Variant,
    pub field: FieldMode,
    pub output_dir: PathBuf,
    pub save_snapshots: bool,
    /// Number of ε-runs in flight at once.
    pub workers: usize,
    pub exec: Execution,
    pub bands: RateBands,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::CollapsingCircle,
            epsilons: vec![0.08, 0.06, 0.045],
            rho: 0.32,
            t0: 0.4,
            t1_offset: 0.24,
            h_ratio: 0.125,
            min_slices: 24,
            slice_spacing: 0.125,
            n1: 256,
            c2: 0.05,
            c3: 0.1,
            delta: 0.05,
            alpha0: 0.05,
            det_floor: 1e-6,
            theta1_variant: Theta1Variant::Consistent,
            field: FieldMode::Solver,
            output_dir: PathBuf::from("runs"),
            save_snapshots: false,
            workers: 1,
            exec: Execution::Parallel,
            bands: RateBands::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(Error::io(path))?;
        let cfg: Self = serde_json::from_str(&text).map_err(Error::json(path))?;
        Ok(cfg)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(Error::json(path))?;
        std::fs::write(path, text + "\n").map_err(Error::io(path))
    }

    pub fn t1(&self) -> f64 {
        self.t0 + self.t1_offset
    }

    /// Checks everything a single ε-run needs.
    pub fn validate_run(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.epsilons.is_empty() {
            return bad("epsilon list is empty".into());
        }
        if self.epsilons.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
            return bad(format!("epsilons must lie in (0, 1): {:?}", self.epsilons));
        }
        if self.epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return bad(format!("epsilons must be strictly decreasing: {:?}", self.epsilons));
        }
        let positive = [
            ("rho", self.rho),
            ("t0", self.t0),
            ("t1_offset", self.t1_offset),
            ("h_ratio", self.h_ratio),
            ("slice_spacing", self.slice_spacing),
            ("c2", self.c2),
            ("c3", self.c3),
            ("delta", self.delta),
            ("alpha0", self.alpha0),
            ("det_floor", self.det_floor),
        ];
        if let Some((name, v)) = positive.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
            return bad(format!("{name} must be positive, got {v}"));
        }
        if self.h_ratio > 0.125 {
            return bad(format!("h_ratio {} is coarser than eps/8", self.h_ratio));
        }
        if self.slice_spacing > 0.125 {
            return bad(format!("slice spacing {} rho exceeds rho/8", self.slice_spacing));
        }
        if self.min_slices < 3 {
            return bad("need at least 3 slices".into());
        }
        if self.n1 < 8 {
            return bad(format!("n1 = {} is too small", self.n1));
        }
        if self.workers == 0 {
            return bad("workers must be at least 1".into());
        }
        if let FieldMode::Manufactured { amplitude } = self.field {
            // |s| ≤ 2aε(1+T₁)... must stay well inside the cutoff plateau
            if !(amplitude.abs() * (1.0 + self.t1()) * self.epsilons[0] < self.rho / 6.0) {
                return bad(format!("manufactured amplitude {amplitude} is too large"));
            }
        }
        let b = &self.bands;
        if [
            b.theta,
            b.h1,
            b.shift,
            b.far_energy,
            b.far_l2,
            b.r2_min,
            b.gradient_ratio_tol,
        ]
        .iter()
        .any(|v| !(*v > 0.0))
        {
            return bad("rate bands must be positive".into());
        }
        Ok(())
    }

    /// [`validate_run`](Self::validate_run) plus at least three ε for the rate fits.
    pub fn validate(&self) -> Result<()> {
        self.validate_run()?;
        if self.epsilons.len() < 3 {
            return Err(Error::Config(format!(
                "a sweep needs at least 3 epsilons, got {}",
                self.epsilons.len()
            )));
        }
        Ok(())
    }

    /// Output root: `$INTERFACE_LAB_OUTPUT` if set, else `output_dir`.
    pub fn output_root(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_ENV) {
            Some(v) if !v.is_empty() => PathBuf::from(v),
            _ => self.output_dir.clone(),
        }
    }

    /// Uniform midpoint grid on `(-T₁, T¹)` with spacing at most `slice_spacing·ρ`.
    pub fn slice_grid(&self) -> (Vec<f64>, f64) {
        let t1 = self.t1();
        let n = self
            .min_slices
            .max((2.0 * t1 / (self.slice_spacing * self.rho) - 1e-9).ceil() as usize);
        let dy0 = 2.0 * t1 / n as f64;
        ((0..n).map(|i| -t1 + (i as f64 + 0.5) * dy0).collect(), dy0)
    }
}

/// Directory name of one ε-run.
pub fn epsilon_dir_name(epsilon: f64) -> String {
    format!("eps_{epsilon:.4}")
}

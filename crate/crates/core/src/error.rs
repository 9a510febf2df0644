use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("loop is not unit speed: max deviation {deviation:.3e} (tolerance {tol:.1e})")]
    NonUnitSpeed { deviation: f64, tol: f64 },

    #[error("tangents are degenerate at (y0, y1) = ({y0}, {y1})")]
    DegenerateTangents { y0: f64, y1: f64 },

    #[error("point is outside the tube: |y2| = {y2} >= {limit}")]
    OutOfTube { y2: f64, limit: f64 },

    #[error("chart is singular: min |det DPsi| = {min_det:.3e} below floor {floor:.1e}")]
    SingularChart { min_det: f64, floor: f64 },

    #[error("chart inversion did not converge: residual {residual:.3e} after {iterations} iterations")]
    NewtonDiverged { residual: f64, iterations: usize },

    #[error("time {t} is outside the chart range ({lo}, {hi})")]
    ChartUnavailable { t: f64, lo: f64, hi: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("solution blew up at t = {t}: max |u| = {max_abs}")]
    BlowUp { t: f64, max_abs: f64 },

    #[error("snapshots do not cover t = {t} (stored range [{lo}, {hi}])")]
    InsufficientSnapshots { t: f64, lo: f64, hi: f64 },

    #[error("point ({x0}, {x1}) lies outside the computational box")]
    OutOfBox { x0: f64, x1: f64 },

    #[error("fiber has no recognizable interface: scan minimum {min:.3e} exceeds {bound:.3e}")]
    HypothesisFailed { min: f64, bound: f64 },

    #[error("minimizer is not unique: convexity certificate failed (margin {margin:.3e})")]
    NotUnique { margin: f64 },

    #[error("need at least 3 adjacent slices for the y0 derivative, got {0}")]
    InsufficientSlices(usize),

    #[error("fiber has no zero crossing in [-rho/2, rho/2]")]
    NoZeroCrossing,

    #[error("H1 norm of w0 is {norm:.4}, above the admissible bound sqrt(2)")]
    HypothesisViolated { norm: f64 },

    #[error("Picard iteration is not contracting: factor {factor:.4} at iteration {iteration}")]
    NoContraction { factor: f64, iteration: usize },

    #[error("rate fit needs positive values, got {value} at epsilon = {epsilon}")]
    NonPositiveValue { epsilon: f64, value: f64 },

    #[error("rate fit needs at least 3 points, got {0}")]
    TooFewPoints(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("nothing to report: {0}")]
    EmptyReport(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
        let path = path.into();
        move |source| Error::Io { path, source }
    }

    pub(crate) fn json(path: impl Into<PathBuf>) -> impl FnOnce(serde_json::Error) -> Error {
        let path = path.into();
        move |source| Error::Json { path, source }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>) -> impl FnOnce(csv::Error) -> Error {
        let path = path.into();
        move |source| Error::Csv { path, source }
    }
}

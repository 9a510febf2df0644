//! Configuration, ε-sweeps, rate fits and reports.

mod config;
mod odecases;
mod report;
mod run;
mod sweep;

pub use config::*;
pub use odecases::*;
pub use report::*;
pub use run::*;
pub use sweep::*;

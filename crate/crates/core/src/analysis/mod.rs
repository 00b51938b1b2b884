//! Experiments built on the integrator: snowball exit, periodic orbits,
//! sliding segments and sweeps over `η_c`.

mod exit;
mod orbit;
mod sweep;

use thiserror::Error;

use crate::filippov::FilippovError;
use crate::model::ModelError;

pub use exit::{snowball_exit_experiment, ExitReport, ExitSearch};
pub use orbit::{detect_periodic_orbit, sliding_segments, OrbitSearch, PeriodicOrbitReport, SlidingSegment};
pub use sweep::{standard_initial_condition, sweep_eta_c, Attractor, BifurcationRow};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("orbit did not reach the {boundary} boundary before t = {t_max}")]
    NoEntry {
        boundary: crate::filippov::Boundary,
        t_max: f64,
    },
    #[error("orbit entered sliding at t = {entry_t} but did not exit before t = {t_max}")]
    NoExit { entry_t: f64, t_max: f64 },
    #[error("only {crossings} section crossing(s) before t = {t_max}; no return to the section")]
    NonRecurrent { crossings: usize, t_max: f64 },
    #[error("integration failed at t = {t}: {error}")]
    Integration { t: f64, error: FilippovError },
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl AnalysisError {
    pub(crate) fn integration(t: f64, error: FilippovError) -> Self {
        AnalysisError::Integration { t, error }
    }
}

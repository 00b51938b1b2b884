use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::filippov::{Boundary, EventKind, IntegratorConfig, Integrator, Mode, PlanarState};
use crate::model::IceLineModel;

/// Limits for [`snowball_exit_experiment`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExitSearch {
    /// Give up if no entry and exit happen before this time.
    pub t_max: f64,
    /// Length of the interval after the exit over which the largest `η` is recorded.
    pub post_exit_window: f64,
}

impl Default for ExitSearch {
    fn default() -> Self {
        Self {
            t_max: 1e6,
            post_exit_window: 100.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExitReport {
    pub entry_t: f64,
    #[serde(rename = "entry_A")]
    pub entry_a: f64,
    pub exit_t: f64,
    #[serde(rename = "exit_A")]
    pub exit_a: f64,
    /// `(entry_A - A*) / (δ η_c)`, from `Ȧ = -δ η_c` while sliding.
    pub analytic_exit_time: f64,
    pub measured_slide_time: f64,
    pub boundary: Boundary,
    /// Largest `η` reached within the post-exit window.
    pub eta_after_exit_max: f64,
}

/// Integrates from `ic` until the orbit has slid along `η = 0` and left it.
///
/// An `ic` already in [`Mode::SlideLower`] counts as entering at its own time.
pub fn snowball_exit_experiment<M: IceLineModel + ?Sized>(
    model: &M,
    ic: PlanarState,
    search: ExitSearch,
    cfg: &IntegratorConfig,
) -> Result<ExitReport, AnalysisError> {
    let eta_c = model.eta_c();
    if !(eta_c > 0.0) {
        return Err(AnalysisError::Precondition(format!(
            "the snowball exit needs eta_c > 0, got {eta_c}"
        )));
    }
    let mut it =
        Integrator::new(model, ic, *cfg).map_err(|e| AnalysisError::integration(ic.t, e))?;
    let mut entry = (ic.mode == Mode::SlideLower).then_some((ic.t, ic.x));
    let mut exit = None;

    'outer: while it.state().t < search.t_max {
        let t = it.state().t;
        let step = it
            .step(search.t_max)
            .map_err(|e| AnalysisError::integration(t, e))?;
        for e in &step.events {
            if e.boundary != Some(Boundary::Lower) {
                continue;
            }
            match e.kind {
                EventKind::SlidingEntry => entry = Some((e.t, e.state.x)),
                EventKind::SlidingExit if entry.is_some() => {
                    exit = Some((e.t, e.state.x));
                    break 'outer;
                }
                _ => {}
            }
        }
    }

    let Some((entry_t, entry_a)) = entry else {
        return Err(AnalysisError::NoEntry {
            boundary: Boundary::Lower,
            t_max: search.t_max,
        });
    };
    let Some((exit_t, exit_a)) = exit else {
        return Err(AnalysisError::NoExit {
            entry_t,
            t_max: search.t_max,
        });
    };

    let mut eta_max = it.state().y;
    let until = exit_t + search.post_exit_window;
    while it.state().t < until {
        let t = it.state().t;
        let step = it.step(until).map_err(|e| AnalysisError::integration(t, e))?;
        eta_max = eta_max.max(step.end.y);
    }

    let a_star = model.lower_tangency();
    Ok(ExitReport {
        entry_t,
        entry_a,
        exit_t,
        exit_a,
        analytic_exit_time: (entry_a - a_star) / (model.delta() * eta_c),
        measured_slide_time: exit_t - entry_t,
        boundary: Boundary::Lower,
        eta_after_exit_max: eta_max,
    })
}

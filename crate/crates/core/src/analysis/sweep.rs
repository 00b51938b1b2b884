use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::orbit::{detect_periodic_orbit, OrbitSearch, PeriodicOrbitReport};
use super::AnalysisError;
use crate::filippov::{IntegratorConfig, PlanarState};
use crate::model::{EquilibriumReport, IceLineModel, ModelParams, Stability};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Attractor {
    Equilibrium,
    PeriodicOrbit,
    Undetermined,
}

impl Attractor {
    pub fn as_str(self) -> &'static str {
        match self {
            Attractor::Equilibrium => "equilibrium",
            Attractor::PeriodicOrbit => "periodic_orbit",
            Attractor::Undetermined => "undetermined",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationRow {
    pub eta_c: f64,
    pub attractor: Attractor,
    pub equilibrium: Option<EquilibriumReport>,
    pub orbit: Option<PeriodicOrbitReport>,
    /// Why the row is undetermined.
    pub reason: Option<String>,
}

/// `(A_nullcline(η_c) + 1, η_c)`: next to the fixed point, on the side of
/// neither boundary.
pub fn standard_initial_condition<M: IceLineModel + ?Sized>(model: &M) -> PlanarState {
    let eta_c = model.eta_c();
    PlanarState::interior(model.nullcline_a(eta_c) + 1.0, eta_c)
}

fn classify(
    params: &ModelParams,
    eta_c: f64,
    cfg: &IntegratorConfig,
    search: &OrbitSearch,
) -> BifurcationRow {
    let undetermined = |equilibrium, orbit, reason: String| BifurcationRow {
        eta_c,
        attractor: Attractor::Undetermined,
        equilibrium,
        orbit,
        reason: Some(reason),
    };
    if !(eta_c > 0.0 && eta_c < 1.0) {
        return undetermined(None, None, format!("eta_c = {eta_c} is outside (0, 1)"));
    }
    let model = match params.with_eta_c(eta_c).build() {
        Ok(m) => m,
        Err(e) => return undetermined(None, None, e.to_string()),
    };
    let eq = model.equilibrium();
    match eq.stability {
        Stability::Stable => BifurcationRow {
            eta_c,
            attractor: Attractor::Equilibrium,
            equilibrium: Some(eq),
            orbit: None,
            reason: None,
        },
        Stability::Degenerate => {
            undetermined(Some(eq), None, "degenerate equilibrium (Re λ ≈ 0)".into())
        }
        Stability::Unstable => {
            let ic = standard_initial_condition(&model);
            match detect_periodic_orbit(&model, ic, search, cfg) {
                Ok(orbit) if orbit.converged => BifurcationRow {
                    eta_c,
                    attractor: Attractor::PeriodicOrbit,
                    equilibrium: Some(eq),
                    orbit: Some(orbit),
                    reason: None,
                },
                Ok(orbit) => {
                    let n = orbit.section_a.len();
                    undetermined(
                        Some(eq),
                        Some(orbit),
                        format!("return map not converged after {n} crossings"),
                    )
                }
                Err(e) => undetermined(Some(eq), None, e.to_string()),
            }
        }
    }
}

/// Classifies the attractor at every `η_c` in `grid` on a pool of `jobs`
/// threads. Rows come back in grid order; failures become undetermined rows.
pub fn sweep_eta_c(
    params: &ModelParams,
    grid: &[f64],
    cfg: &IntegratorConfig,
    search: &OrbitSearch,
    jobs: usize,
) -> Result<Vec<BifurcationRow>, AnalysisError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| AnalysisError::Precondition(format!("thread pool: {e}")))?;
    Ok(pool.install(|| {
        grid.par_iter()
            .map(|&eta_c| classify(params, eta_c, cfg, search))
            .collect()
    }))
}

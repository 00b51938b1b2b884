use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::filippov::{
    Boundary, EventKind, IntegratorConfig, Integrator, Mode, PlanarState, Section, Trajectory,
};
use crate::model::IceLineModel;

/// Settings for [`detect_periodic_orbit`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrbitSearch {
    /// Integration horizon; `None` means `2000 / δ`.
    pub t_max: Option<f64>,
    /// Return tolerance relative to the `A`-range of the last cycle.
    pub return_tol_rel: f64,
    /// Consecutive returns that must agree.
    pub required_returns: usize,
    /// Cycles whose `η` amplitude is below this are not counted as orbits.
    pub min_eta_amplitude: f64,
}

impl Default for OrbitSearch {
    fn default() -> Self {
        Self {
            t_max: None,
            return_tol_rel: 1e-6,
            required_returns: 3,
            min_eta_amplitude: 1e-6,
        }
    }
}

impl OrbitSearch {
    pub fn horizon(&self, delta: f64) -> f64 {
        self.t_max.unwrap_or(2000.0 / delta)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbitReport {
    pub period: f64,
    pub eta_min: f64,
    pub eta_max: f64,
    #[serde(rename = "A_min")]
    pub a_min: f64,
    #[serde(rename = "A_max")]
    pub a_max: f64,
    /// Sliding on (lower, upper) during the last cycle.
    pub includes_sliding: (bool, bool),
    pub converged: bool,
    /// `A` at every rising crossing of `η = η_c`.
    #[serde(rename = "section_A")]
    pub section_a: Vec<f64>,
    pub section_t: Vec<f64>,
}

impl PeriodicOrbitReport {
    /// The last recorded point on the section.
    pub fn section_point(&self, eta_c: f64) -> PlanarState {
        let k = self.section_a.len() - 1;
        PlanarState::interior(self.section_a[k], eta_c).at(self.section_t[k])
    }
}

#[derive(Debug, Clone, Copy)]
struct Cycle {
    eta_min: f64,
    eta_max: f64,
    a_min: f64,
    a_max: f64,
    lower: bool,
    upper: bool,
}

impl Cycle {
    fn start(s: &PlanarState) -> Self {
        let mut c = Self {
            eta_min: f64::INFINITY,
            eta_max: f64::NEG_INFINITY,
            a_min: f64::INFINITY,
            a_max: f64::NEG_INFINITY,
            lower: false,
            upper: false,
        };
        c.visit(s.x, s.y, s.mode);
        c
    }

    fn visit(&mut self, a: f64, eta: f64, mode: Mode) {
        self.eta_min = self.eta_min.min(eta);
        self.eta_max = self.eta_max.max(eta);
        self.a_min = self.a_min.min(a);
        self.a_max = self.a_max.max(a);
        match mode {
            Mode::SlideLower => self.lower = true,
            Mode::SlideUpper => self.upper = true,
            Mode::Interior => {}
        }
    }
}

/// Searches for an attracting periodic orbit through the return map on
/// `η = η_c`, crossed upward.
///
/// Converged once the last `required_returns` differences between successive
/// crossing values of `A` are each below `return_tol_rel` times the `A`-range
/// of the last cycle. The period and extrema come from the last full cycle.
pub fn detect_periodic_orbit<M: IceLineModel + ?Sized>(
    model: &M,
    ic: PlanarState,
    search: &OrbitSearch,
    cfg: &IntegratorConfig,
) -> Result<PeriodicOrbitReport, AnalysisError> {
    let eta_c = model.eta_c();
    let t_max = search.horizon(model.delta());
    if !(t_max > ic.t) {
        return Err(AnalysisError::Precondition(format!(
            "search horizon {t_max} does not exceed the initial time {}",
            ic.t
        )));
    }
    let mut it = Integrator::new(model, ic, *cfg)
        .map_err(|e| AnalysisError::integration(ic.t, e))?
        .with_section(Section::rising(eta_c));

    let mut section_a = Vec::new();
    let mut section_t = Vec::new();
    let mut current = Cycle::start(&it.state());
    let mut last_cycle: Option<Cycle> = None;
    let mut converged = false;

    while it.state().t < t_max && !converged {
        let t = it.state().t;
        let step = it.step(t_max).map_err(|e| AnalysisError::integration(t, e))?;
        let mut events = step.events.iter().filter(|e| e.kind == EventKind::SectionCross).peekable();
        // Interior probes keep interior extrema from slipping between step ends.
        let span = step.duration();
        for k in 1..=8 {
            let tp = step.start.t + span * k as f64 / 8.0;
            while let Some(e) = events.next_if(|e| e.t <= tp) {
                current.visit(e.state.x, e.state.y, Mode::Interior);
                section_a.push(e.state.x);
                section_t.push(e.t);
                if section_a.len() >= 2 {
                    last_cycle = Some(current);
                }
                current = Cycle::start(&e.state);
            }
            let (a, eta) = step.position(tp);
            let mode = if k == 8 { step.end.mode } else { step.start.mode };
            current.visit(a, eta, mode);
        }
        for e in &step.events {
            match (e.kind, e.boundary) {
                (EventKind::SlidingEntry, Some(Boundary::Lower)) => current.lower = true,
                (EventKind::SlidingEntry, Some(Boundary::Upper)) => current.upper = true,
                _ => {}
            }
        }
        if let Some(c) = last_cycle {
            converged = is_converged(&section_a, &c, search);
        }
    }

    let n = section_a.len();
    let Some(cycle) = last_cycle.filter(|_| n >= 2) else {
        return Err(AnalysisError::NonRecurrent { crossings: n, t_max });
    };
    Ok(PeriodicOrbitReport {
        period: section_t[n - 1] - section_t[n - 2],
        eta_min: cycle.eta_min,
        eta_max: cycle.eta_max,
        a_min: cycle.a_min,
        a_max: cycle.a_max,
        includes_sliding: (cycle.lower, cycle.upper),
        converged,
        section_a,
        section_t,
    })
}

fn is_converged(section_a: &[f64], cycle: &Cycle, search: &OrbitSearch) -> bool {
    let need = search.required_returns;
    if section_a.len() < need + 1 || cycle.eta_max - cycle.eta_min < search.min_eta_amplitude {
        return false;
    }
    let tol = search.return_tol_rel * (cycle.a_max - cycle.a_min);
    section_a[section_a.len() - need - 1..]
        .windows(2)
        .all(|w| (w[1] - w[0]).abs() < tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlidingSegment {
    pub boundary: Boundary,
    pub t_start: f64,
    pub t_end: f64,
    #[serde(rename = "A_start")]
    pub a_start: f64,
    #[serde(rename = "A_end")]
    pub a_end: f64,
    /// The trajectory was already sliding when it began.
    pub open_start: bool,
    /// The trajectory ended before the exit.
    pub open_end: bool,
}

/// Pairs sliding entries with exits. Unmatched ends are closed at the first
/// or last sample and flagged.
pub fn sliding_segments(traj: &Trajectory) -> Vec<SlidingSegment> {
    let mut out = Vec::new();
    let Some(first) = traj.samples.first() else {
        return out;
    };
    let mut open: Option<(Boundary, f64, f64, bool)> = first
        .mode
        .boundary()
        .map(|b| (b, first.t, first.x, true));
    for e in &traj.events {
        let Some(b) = e.boundary else { continue };
        match e.kind {
            EventKind::SlidingEntry => open = Some((b, e.t, e.state.x, false)),
            EventKind::SlidingExit => {
                if let Some((ob, t0, a0, open_start)) = open.take() {
                    if ob == b {
                        out.push(SlidingSegment {
                            boundary: b,
                            t_start: t0,
                            t_end: e.t,
                            a_start: a0,
                            a_end: e.state.x,
                            open_start,
                            open_end: false,
                        });
                    }
                }
            }
            _ => {}
        }
    }
    if let (Some((b, t0, a0, open_start)), Some(last)) = (open, traj.samples.last()) {
        out.push(SlidingSegment {
            boundary: b,
            t_start: t0,
            t_end: last.t,
            a_start: a0,
            a_end: last.x,
            open_start,
            open_end: true,
        });
    }
    out
}

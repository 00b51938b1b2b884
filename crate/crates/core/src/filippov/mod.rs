//! Planar Filippov systems on the strip `ℝ × [0, 1]`.
//!
//! A smooth field `(G, H)` is extended across the horizontal lines `y = 0`
//! and `y = 1`:
//!
//! ```text
//! ẋ = G(x, y)
//! ẏ = -|H|          y > 1
//!     (H - |H|)/2   y = 1
//!     H             0 < y < 1
//!     (H + |H|)/2   y = 0
//!     |H|           y < 0
//! ```
//!
//! The extended field is one-sided Lipschitz, so forward solutions are
//! unique and the strip is forward invariant. Where the interior field pushes
//! through a boundary the solution slides along it with velocity `(G, 0)`.

mod dopri;
mod integrator;
mod lipschitz;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use integrator::{integrate, integrate_with_section, step, IntegrationFailure, Integrator, Step};
pub use lipschitz::{one_sided_lipschitz, one_sided_lipschitz_quotient, Rect};

/// A C¹ vector field `(G, H)` on the plane. Must be total and deterministic.
pub trait SmoothField: Send + Sync {
    /// Rate of `x`.
    fn g(&self, x: f64, y: f64) -> f64;
    /// Rate of `y`.
    fn h(&self, x: f64, y: f64) -> f64;
    /// Known Lipschitz constant of `H`, if any.
    fn lipschitz_hint(&self) -> Option<f64> {
        None
    }
}

impl<T: SmoothField + ?Sized> SmoothField for &T {
    fn g(&self, x: f64, y: f64) -> f64 {
        (**self).g(x, y)
    }
    fn h(&self, x: f64, y: f64) -> f64 {
        (**self).h(x, y)
    }
    fn lipschitz_hint(&self) -> Option<f64> {
        (**self).lipschitz_hint()
    }
}

impl<T: SmoothField + ?Sized> SmoothField for Box<T> {
    fn g(&self, x: f64, y: f64) -> f64 {
        (**self).g(x, y)
    }
    fn h(&self, x: f64, y: f64) -> f64 {
        (**self).h(x, y)
    }
    fn lipschitz_hint(&self) -> Option<f64> {
        (**self).lipschitz_hint()
    }
}

/// Field built from two closures.
#[derive(Clone)]
pub struct FnField<G, H> {
    pub g: G,
    pub h: H,
    pub lipschitz_hint: Option<f64>,
}

impl<G, H> FnField<G, H>
where
    G: Fn(f64, f64) -> f64 + Send + Sync,
    H: Fn(f64, f64) -> f64 + Send + Sync,
{
    pub fn new(g: G, h: H) -> Self {
        Self {
            g,
            h,
            lipschitz_hint: None,
        }
    }
}

impl<G, H> SmoothField for FnField<G, H>
where
    G: Fn(f64, f64) -> f64 + Send + Sync,
    H: Fn(f64, f64) -> f64 + Send + Sync,
{
    fn g(&self, x: f64, y: f64) -> f64 {
        (self.g)(x, y)
    }
    fn h(&self, x: f64, y: f64) -> f64 {
        (self.h)(x, y)
    }
    fn lipschitz_hint(&self) -> Option<f64> {
        self.lipschitz_hint
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Interior,
    SlideLower,
    SlideUpper,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Interior => "interior",
            Mode::SlideLower => "slide_lower",
            Mode::SlideUpper => "slide_upper",
        }
    }

    pub fn boundary(self) -> Option<Boundary> {
        match self {
            Mode::Interior => None,
            Mode::SlideLower => Some(Boundary::Lower),
            Mode::SlideUpper => Some(Boundary::Upper),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Lower,
    Upper,
}

impl Boundary {
    pub fn y(self) -> f64 {
        match self {
            Boundary::Lower => 0.0,
            Boundary::Upper => 1.0,
        }
    }

    pub fn sliding_mode(self) -> Mode {
        match self {
            Boundary::Lower => Mode::SlideLower,
            Boundary::Upper => Mode::SlideUpper,
        }
    }

    /// True when an interior rate `h` pushes the orbit out of the strip
    /// through this boundary.
    pub(crate) fn pushes_out(self, h: f64) -> bool {
        match self {
            Boundary::Lower => h < 0.0,
            Boundary::Upper => h > 0.0,
        }
    }

    pub(crate) fn index(self) -> usize {
        match self {
            Boundary::Lower => 0,
            Boundary::Upper => 1,
        }
    }
}

impl std::fmt::Display for Boundary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Boundary::Lower => "lower",
            Boundary::Upper => "upper",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanarState {
    pub x: f64,
    pub y: f64,
    pub mode: Mode,
    pub t: f64,
}

impl PlanarState {
    pub fn interior(x: f64, y: f64) -> Self {
        Self {
            x,
            y,
            mode: Mode::Interior,
            t: 0.0,
        }
    }

    pub fn at(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.t.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionLabel {
    Above,
    UpperBoundary,
    Interior,
    LowerBoundary,
    Below,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    AttractingSliding,
    Crossing,
    Tangency,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    BoundaryHit,
    SlidingEntry,
    SlidingExit,
    TangencyCross,
    SectionCross,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::BoundaryHit => "boundary_hit",
            EventKind::SlidingEntry => "sliding_entry",
            EventKind::SlidingExit => "sliding_exit",
            EventKind::TangencyCross => "tangency_cross",
            EventKind::SectionCross => "section_cross",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub kind: EventKind,
    pub t: f64,
    /// State immediately after the event.
    pub state: PlanarState,
    /// Boundary involved, for boundary and sliding events.
    pub boundary: Option<Boundary>,
}

/// Horizontal Poincaré section `y = value`, crossed with `y` increasing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Section {
    pub value: f64,
}

impl Section {
    pub fn rising(value: f64) -> Self {
        Self { value }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<PlanarState>,
    pub events: Vec<Event>,
    pub dt_out: f64,
}

impl Trajectory {
    pub fn last(&self) -> Option<&PlanarState> {
        self.samples.last()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub boundary_tol: f64,
    pub tangency_tol: f64,
    pub max_step: f64,
    pub max_slide_time: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            boundary_tol: 1e-10,
            tangency_tol: 1e-9,
            max_step: 50.0,
            max_slide_time: 1e6,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), FilippovError> {
        let named = [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("boundary_tol", self.boundary_tol),
            ("tangency_tol", self.tangency_tol),
            ("max_step", self.max_step),
            ("max_slide_time", self.max_slide_time),
        ];
        for (name, v) in named {
            if !(v.is_finite() && v > 0.0) {
                return Err(FilippovError::InvalidConfig(format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
        }
        // Event location must not be looser than the step error it cuts.
        if self.boundary_tol > 10.0 * self.abs_tol {
            return Err(FilippovError::InvalidConfig(format!(
                "boundary_tol ({}) must not exceed 10 * abs_tol ({})",
                self.boundary_tol, self.abs_tol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FilippovError {
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid sampling domain: {0}")]
    InvalidDomain(String),
    #[error("sliding field requested at a crossing point x = {x} on the {boundary} boundary")]
    ModeViolation { x: f64, boundary: Boundary },
    #[error("step size underflow at t = {t} (h = {h:e}); the field is too stiff for the tolerances")]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error(
        "sliding on the {boundary} boundary since t = {since} exceeded max_slide_time = {limit} without reaching a tangency"
    )]
    RunawaySlide { boundary: Boundary, since: f64, limit: f64 },
    #[error("degenerate boundary at x = {x} on the {boundary} boundary: both G and H vanish")]
    DegenerateBoundary { x: f64, boundary: Boundary },
    #[error("integration stalled at t = {t}: repeated zero-length transitions")]
    Stalled { t: f64 },
    #[error("event location failed at t = {t}: {reason}")]
    EventLocation { t: f64, reason: String },
}

/// Which piece of the extended field governs `state`.
pub fn classify_region(
    state: &PlanarState,
    cfg: &IntegratorConfig,
) -> Result<RegionLabel, FilippovError> {
    if !state.is_finite() {
        return Err(FilippovError::InvalidState(format!(
            "non-finite state ({}, {}) at t = {}",
            state.x, state.y, state.t
        )));
    }
    let y = state.y;
    let tol = cfg.boundary_tol;
    Ok(if (y - 1.0).abs() <= tol {
        RegionLabel::UpperBoundary
    } else if y.abs() <= tol {
        RegionLabel::LowerBoundary
    } else if y > 1.0 {
        RegionLabel::Above
    } else if y < 0.0 {
        RegionLabel::Below
    } else {
        RegionLabel::Interior
    })
}

/// Evaluates the extended field at `state`. The x-rate is always `G(x, y)`.
pub fn extended_field<F: SmoothField + ?Sized>(
    field: &F,
    state: &PlanarState,
    cfg: &IntegratorConfig,
) -> Result<(f64, f64), FilippovError> {
    let region = classify_region(state, cfg)?;
    let (x, y) = (state.x, state.y);
    let h = field.h(x, y);
    let dy = match region {
        RegionLabel::Above => -h.abs(),
        RegionLabel::UpperBoundary => (h - h.abs()) / 2.0,
        RegionLabel::Interior => h,
        RegionLabel::LowerBoundary => (h + h.abs()) / 2.0,
        RegionLabel::Below => h.abs(),
    };
    Ok((field.g(x, y), dy))
}

/// Classifies the boundary point `(x, y_b)` by the sign of the interior `H`.
pub fn boundary_mode<F: SmoothField + ?Sized>(
    field: &F,
    x: f64,
    which: Boundary,
    cfg: &IntegratorConfig,
) -> BoundaryMode {
    let h = field.h(x, which.y());
    if h.abs() <= cfg.tangency_tol {
        BoundaryMode::Tangency
    } else if which.pushes_out(h) {
        BoundaryMode::AttractingSliding
    } else {
        BoundaryMode::Crossing
    }
}

/// Sliding velocity on a boundary and the Filippov weight that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlidingVelocity {
    pub dx: f64,
    pub dy: f64,
    /// Weight on the exterior field in `α F_out + (1 - α) F_in`.
    pub alpha: f64,
}

/// Filippov sliding velocity at `(x, y_b)`.
///
/// The weight solves `α·F_out + (1-α)·H = 0` for the normal component, where
/// `F_out` is `-|H|` above the strip and `|H|` below it.
pub fn sliding_field<F: SmoothField + ?Sized>(
    field: &F,
    x: f64,
    which: Boundary,
    cfg: &IntegratorConfig,
) -> Result<SlidingVelocity, FilippovError> {
    let yb = which.y();
    let h = field.h(x, yb);
    match boundary_mode(field, x, which, cfg) {
        BoundaryMode::Crossing => Err(FilippovError::ModeViolation { x, boundary: which }),
        // Limit of the attracting side as H -> 0.
        BoundaryMode::Tangency if !which.pushes_out(h) => Ok(SlidingVelocity {
            dx: field.g(x, yb),
            dy: 0.0,
            alpha: 0.5,
        }),
        _ => {
            let outside = match which {
                Boundary::Upper => -h.abs(),
                Boundary::Lower => h.abs(),
            };
            let alpha = h / (h - outside);
            let dy = alpha * outside + (1.0 - alpha) * h;
            Ok(SlidingVelocity {
                dx: field.g(x, yb),
                dy,
                alpha,
            })
        }
    }
}

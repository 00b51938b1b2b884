//! Event-driven integration of the extended field.
//!
//! Free flight (inside, above or below the strip) is integrated with the
//! smooth formula of the region the step started in; boundary crossings are
//! located on the dense-output interpolant and the step is cut there. On a
//! boundary the orbit either slides (`ẋ = G(x, y_b)`, `y` frozen) until the
//! interior `H` stops pushing outward, or passes into the strip.
//!
//! After leaving a boundary the orbit is allowed to graze it by up to
//! `boundary_tol` without generating a new hit, until it has moved more than
//! `2 * boundary_tol` away once.

use std::fmt;

use super::dopri::{self, Dense, Trial, Vec2};
use super::{
    boundary_mode, classify_region, Boundary, BoundaryMode, Event, EventKind, FilippovError,
    IntegratorConfig, Mode, PlanarState, RegionLabel, Section, SmoothField, Trajectory,
};
use crate::roots::brent;

/// Fractions of an accepted step at which the interpolant is probed for
/// sign changes of event functions.
const PROBES: [f64; 4] = [0.25, 0.5, 0.75, 1.0];

/// Consecutive zero-length steps tolerated before giving up.
const MAX_STALLS: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Flight {
    Above,
    Strip,
    Below,
}

impl Flight {
    fn rate<F: SmoothField + ?Sized>(self, field: &F, z: &Vec2) -> Vec2 {
        let h = field.h(z[0], z[1]);
        let dy = match self {
            Flight::Above => -h.abs(),
            Flight::Strip => h,
            Flight::Below => h.abs(),
        };
        [field.g(z[0], z[1]), dy]
    }

    /// Signed distance to `b`, non-negative on the side this flight lives on.
    fn distance(self, b: Boundary, y: f64) -> f64 {
        match (self, b) {
            (Flight::Strip, Boundary::Lower) => y,
            (Flight::Strip, Boundary::Upper) => 1.0 - y,
            (Flight::Above, _) => y - 1.0,
            (Flight::Below, _) => -y,
        }
    }

    fn boundaries(self) -> &'static [Boundary] {
        match self {
            Flight::Strip => &[Boundary::Lower, Boundary::Upper],
            Flight::Above => &[Boundary::Upper],
            Flight::Below => &[Boundary::Lower],
        }
    }
}

/// One call to [`Integrator::step`]: an accepted Runge–Kutta step, possibly
/// cut at an event, or a zero-length mode transition.
#[derive(Debug, Clone)]
pub struct Step {
    pub start: PlanarState,
    pub end: PlanarState,
    pub events: Vec<Event>,
    dense: Option<Interpolant>,
}

/// Dense output; outside the strip `y` comes from a monotone cubic instead.
#[derive(Debug, Clone, Copy)]
struct Interpolant {
    dense: Dense,
    monotone_y: Option<MonotoneCubic>,
}

impl Interpolant {
    fn eval(&self, t: f64) -> Vec2 {
        let mut z = self.dense.eval(t);
        if let Some(m) = &self.monotone_y {
            z[1] = m.eval(t);
        }
        z
    }
}

/// Cubic Hermite segment with Fritsch–Carlson slope limiting, monotone
/// whenever both end slopes share the sign of `y1 - y0`.
#[derive(Debug, Clone, Copy)]
struct MonotoneCubic {
    t0: f64,
    h: f64,
    y0: f64,
    y1: f64,
    m0: f64,
    m1: f64,
}

impl MonotoneCubic {
    fn new(t0: f64, h: f64, y0: f64, y1: f64, m0: f64, m1: f64) -> Self {
        let secant = (y1 - y0) / h;
        let (mut m0, mut m1) = if secant == 0.0 { (0.0, 0.0) } else { (m0, m1) };
        if secant != 0.0 {
            let a = m0 / secant;
            let b = m1 / secant;
            let r = a * a + b * b;
            if r > 9.0 {
                let tau = 3.0 / r.sqrt();
                m0 = tau * a * secant;
                m1 = tau * b * secant;
            }
        }
        Self { t0, h, y0, y1, m0, m1 }
    }

    fn eval(&self, t: f64) -> f64 {
        let s = ((t - self.t0) / self.h).clamp(0.0, 1.0);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * self.y0
            + (s3 - 2.0 * s2 + s) * self.h * self.m0
            + (-2.0 * s3 + 3.0 * s2) * self.y1
            + (s3 - s2) * self.h * self.m1
    }
}

impl Step {
    /// Position at time `t` within `[start.t, end.t]`.
    pub fn position(&self, t: f64) -> (f64, f64) {
        if t >= self.end.t {
            return (self.end.x, self.end.y);
        }
        match &self.dense {
            Some(d) => {
                let z = d.eval(t);
                (z[0], z[1])
            }
            None => (self.start.x, self.start.y),
        }
    }

    pub fn duration(&self) -> f64 {
        self.end.t - self.start.t
    }
}

/// Stateful forward integrator for one trajectory.
pub struct Integrator<'f, F: SmoothField + ?Sized> {
    field: &'f F,
    cfg: IntegratorConfig,
    state: PlanarState,
    flight: Flight,
    h_next: Option<f64>,
    /// Whether hits on [lower, upper] are currently detected at zero overshoot.
    armed: [bool; 2],
    slide_since: f64,
    section: Option<Section>,
    pending: Vec<Event>,
    fsal: Option<(Vec2, Vec2)>,
    stalls: u32,
}

impl<'f, F: SmoothField + ?Sized> Integrator<'f, F> {
    pub fn new(field: &'f F, ic: PlanarState, cfg: IntegratorConfig) -> Result<Self, FilippovError> {
        cfg.validate()?;
        let region = classify_region(&ic, &cfg)?;
        let mut it = Self {
            field,
            cfg,
            state: ic,
            flight: Flight::Strip,
            h_next: None,
            armed: [true, true],
            slide_since: ic.t,
            section: None,
            pending: Vec::new(),
            fsal: None,
            stalls: 0,
        };
        match ic.mode {
            Mode::SlideLower | Mode::SlideUpper => {
                let b = ic.mode.boundary().expect("sliding mode has a boundary");
                if (ic.y - b.y()).abs() > cfg.boundary_tol {
                    return Err(FilippovError::InvalidState(format!(
                        "state in {} mode has y = {} off its boundary",
                        ic.mode.as_str(),
                        ic.y
                    )));
                }
                it.state.y = b.y();
                it.check_degenerate(b)?;
                if boundary_mode(field, ic.x, b, &cfg) == BoundaryMode::Crossing {
                    return Err(FilippovError::ModeViolation { x: ic.x, boundary: b });
                }
            }
            Mode::Interior => match region {
                RegionLabel::Above => it.flight = Flight::Above,
                RegionLabel::Below => it.flight = Flight::Below,
                RegionLabel::Interior => it.flight = Flight::Strip,
                RegionLabel::LowerBoundary | RegionLabel::UpperBoundary => {
                    let b = if region == RegionLabel::LowerBoundary {
                        Boundary::Lower
                    } else {
                        Boundary::Upper
                    };
                    it.state.y = b.y();
                    it.check_degenerate(b)?;
                    let hv = field.h(ic.x, b.y());
                    if b.pushes_out(hv) {
                        let mut events = Vec::new();
                        it.begin_slide(b, &mut events);
                        it.pending = events;
                    } else {
                        it.flight = Flight::Strip;
                        it.armed[b.index()] = false;
                    }
                }
            },
        }
        Ok(it)
    }

    /// Records rising crossings of `section` as [`EventKind::SectionCross`].
    pub fn with_section(mut self, section: Section) -> Self {
        self.section = Some(section);
        self
    }

    pub fn state(&self) -> PlanarState {
        self.state
    }

    pub fn config(&self) -> &IntegratorConfig {
        &self.cfg
    }

    fn check_degenerate(&self, b: Boundary) -> Result<(), FilippovError> {
        let (x, yb) = (self.state.x, b.y());
        let tol = self.cfg.tangency_tol;
        if self.field.h(x, yb).abs() <= tol && self.field.g(x, yb).abs() <= tol {
            return Err(FilippovError::DegenerateBoundary { x, boundary: b });
        }
        Ok(())
    }

    /// Advances by one adaptive step, never past `t_end`.
    pub fn step(&mut self, t_end: f64) -> Result<Step, FilippovError> {
        let start = self.state;
        let mut events = std::mem::take(&mut self.pending);
        if !(t_end > start.t) {
            return Ok(Step {
                start,
                end: start,
                events,
                dense: None,
            });
        }
        let dense = match start.mode {
            Mode::Interior => self.flight_step(t_end, &mut events)?,
            Mode::SlideLower => self.slide_step(Boundary::Lower, t_end, &mut events)?,
            Mode::SlideUpper => self.slide_step(Boundary::Upper, t_end, &mut events)?,
        };
        if self.state.t > start.t {
            self.stalls = 0;
        } else {
            self.stalls += 1;
            if self.stalls > MAX_STALLS {
                return Err(FilippovError::Stalled { t: start.t });
            }
        }
        Ok(Step {
            start,
            end: self.state,
            events,
            dense,
        })
    }

    fn h_min(t: f64) -> f64 {
        1e-12 * t.abs().max(1.0)
    }

    /// Retries until the error test passes. Returns the trial, the step used
    /// and the proposal for the next step.
    fn accepted_trial<R: FnMut(&Vec2) -> Vec2>(
        &mut self,
        rhs: &mut R,
        z0: &Vec2,
        t_end: f64,
    ) -> Result<(Trial, f64, f64), FilippovError> {
        let cfg = self.cfg;
        let t0 = self.state.t;
        let k1 = match self.fsal {
            Some((z, k)) if z == *z0 => k,
            _ => rhs(z0),
        };
        let mut h = match self.h_next {
            Some(h) => h,
            None => dopri::initial_step(rhs, z0, &k1, cfg.rel_tol, cfg.abs_tol, cfg.max_step),
        }
        .min(cfg.max_step);
        loop {
            let span = t_end - t0;
            let clipped = h >= span;
            let h_try = if clipped { span } else { h };
            let trial = dopri::attempt(rhs, t0, z0, &k1, h_try, cfg.rel_tol, cfg.abs_tol);
            if trial.err.is_finite() && trial.err <= 1.0 {
                let grown = h_try * dopri::step_factor(trial.err, true);
                let h_next = if clipped { h.max(grown) } else { grown };
                return Ok((trial, h_try, h_next.min(cfg.max_step)));
            }
            let shrink = if trial.err.is_finite() {
                dopri::step_factor(trial.err, false)
            } else {
                0.1
            };
            h = h_try * shrink;
            if h < Self::h_min(t0) {
                return Err(FilippovError::StepSizeUnderflow { t: t0, h });
            }
        }
    }

    fn flight_step(
        &mut self,
        t_end: f64,
        events: &mut Vec<Event>,
    ) -> Result<Option<Interpolant>, FilippovError> {
        let field = self.field;
        let flight = self.flight;
        let btol = self.cfg.boundary_tol;
        let mut rhs = |z: &Vec2| flight.rate(field, z);
        let t0 = self.state.t;
        let z0 = [self.state.x, self.state.y];
        let (trial, h_used, h_next) = self.accepted_trial(&mut rhs, &z0, t_end)?;
        self.h_next = Some(h_next);
        let t1 = t0 + h_used;
        // Outside the strip the exact ẏ has a fixed sign but the Runge–Kutta
        // weights do not, so y is projected and interpolated monotonically.
        let mut y1 = trial.y1;
        let monotone_y = match flight {
            Flight::Strip => None,
            Flight::Above | Flight::Below => {
                y1[1] = if flight == Flight::Above {
                    y1[1].min(z0[1])
                } else {
                    y1[1].max(z0[1])
                };
                let m0 = flight.rate(field, &z0)[1];
                Some(MonotoneCubic::new(t0, h_used, z0[1], y1[1], m0, trial.k7[1]))
            }
        };
        let interp = Interpolant {
            dense: trial.dense,
            monotone_y,
        };
        let at = |t: f64| if t >= t1 { y1 } else { interp.eval(t) };

        // Earliest boundary crossing within the step.
        let mut cut: Option<(f64, Boundary)> = None;
        for &b in flight.boundaries() {
            let thr = if flight == Flight::Strip && !self.armed[b.index()] {
                -btol
            } else {
                0.0
            };
            let dist = |t: f64| flight.distance(b, at(t)[1]) - thr;
            if dist(t0) < 0.0 {
                cut = Some((t0, b));
                break;
            }
            let mut prev = t0;
            for theta in PROBES {
                let tp = t0 + theta * h_used;
                if dist(tp) < 0.0 {
                    let t_hit = brent(dist, prev, tp, 0.0).map_err(|e| {
                        FilippovError::EventLocation {
                            t: prev,
                            reason: e.to_string(),
                        }
                    })?;
                    if cut.map_or(true, |(tc, _)| t_hit < tc) {
                        cut = Some((t_hit, b));
                    }
                    break;
                }
                prev = tp;
            }
        }

        let t_lim = cut.map_or(t1, |(t, _)| t);
        if let (Flight::Strip, Some(section)) = (flight, self.section) {
            let s = |t: f64| at(t)[1] - section.value;
            let mut prev = t0;
            let mut prev_s = s(t0);
            for theta in PROBES {
                let tp = t0 + theta * (t_lim - t0);
                let cur_s = s(tp);
                if prev_s < 0.0 && cur_s >= 0.0 {
                    let tc = brent(s, prev, tp, 0.0).map_err(|e| FilippovError::EventLocation {
                        t: prev,
                        reason: e.to_string(),
                    })?;
                    let z = at(tc);
                    events.push(Event {
                        kind: EventKind::SectionCross,
                        t: tc,
                        state: PlanarState {
                            x: z[0],
                            y: z[1],
                            mode: Mode::Interior,
                            t: tc,
                        },
                        boundary: None,
                    });
                }
                prev = tp;
                prev_s = cur_s;
            }
        }

        match cut {
            Some((t_hit, b)) => {
                let z = at(t_hit);
                self.state = PlanarState {
                    x: z[0],
                    y: b.y(),
                    mode: Mode::Interior,
                    t: t_hit,
                };
                self.fsal = None;
                events.push(Event {
                    kind: EventKind::BoundaryHit,
                    t: t_hit,
                    state: self.state,
                    boundary: Some(b),
                });
                self.on_hit(b, events);
            }
            None => {
                let mut z1 = y1;
                if flight == Flight::Strip {
                    if !self.armed[0] && z1[1] < 0.0 {
                        z1[1] = 0.0;
                    }
                    if !self.armed[1] && z1[1] > 1.0 {
                        z1[1] = 1.0;
                    }
                }
                self.state = PlanarState {
                    x: z1[0],
                    y: z1[1],
                    mode: Mode::Interior,
                    t: t1,
                };
                self.fsal = (z1 == trial.y1).then_some((z1, trial.k7));
            }
        }

        if self.state.mode == Mode::Interior && self.flight == Flight::Strip {
            let y = self.state.y;
            if y > 2.0 * btol {
                self.armed[0] = true;
            }
            if 1.0 - y > 2.0 * btol {
                self.armed[1] = true;
            }
        }
        Ok(Some(interp))
    }

    fn on_hit(&mut self, b: Boundary, events: &mut Vec<Event>) {
        let hv = self.field.h(self.state.x, b.y());
        if b.pushes_out(hv) {
            self.begin_slide(b, events);
            return;
        }
        // Grazing from inside, or crossing in from outside the strip.
        if self.flight == Flight::Strip || hv.abs() <= self.cfg.tangency_tol {
            events.push(Event {
                kind: EventKind::TangencyCross,
                t: self.state.t,
                state: self.state,
                boundary: Some(b),
            });
        }
        self.flight = Flight::Strip;
        self.armed[b.index()] = false;
    }

    fn begin_slide(&mut self, b: Boundary, events: &mut Vec<Event>) {
        self.state.mode = b.sliding_mode();
        self.state.y = b.y();
        self.slide_since = self.state.t;
        self.fsal = None;
        events.push(Event {
            kind: EventKind::SlidingEntry,
            t: self.state.t,
            state: self.state,
            boundary: Some(b),
        });
    }

    fn exit_slide(&mut self, b: Boundary, events: &mut Vec<Event>) {
        self.state.mode = Mode::Interior;
        self.state.y = b.y();
        self.flight = Flight::Strip;
        self.armed[b.index()] = false;
        self.fsal = None;
        events.push(Event {
            kind: EventKind::SlidingExit,
            t: self.state.t,
            state: self.state,
            boundary: Some(b),
        });
    }

    fn slide_step(
        &mut self,
        b: Boundary,
        t_end: f64,
        events: &mut Vec<Event>,
    ) -> Result<Option<Interpolant>, FilippovError> {
        let field = self.field;
        let yb = b.y();
        // Non-negative once the interior field stops pushing through `b`.
        let release = |x: f64| match b {
            Boundary::Lower => field.h(x, yb),
            Boundary::Upper => -field.h(x, yb),
        };
        let x0 = self.state.x;
        let t0 = self.state.t;
        if release(x0) >= 0.0 {
            self.exit_slide(b, events);
            return Ok(None);
        }
        let limit = self.slide_since + self.cfg.max_slide_time;
        if t0 >= limit {
            return Err(FilippovError::RunawaySlide {
                boundary: b,
                since: self.slide_since,
                limit: self.cfg.max_slide_time,
            });
        }
        let mut rhs = |z: &Vec2| [field.g(z[0], yb), 0.0];
        let z0 = [x0, yb];
        let (trial, h_used, h_next) = self.accepted_trial(&mut rhs, &z0, t_end.min(limit))?;
        self.h_next = Some(h_next);
        let dense = trial.dense;
        let t1 = t0 + h_used;
        let x_at = |t: f64| if t >= t1 { trial.y1[0] } else { dense.eval(t)[0] };

        let mut exit = None;
        let mut prev = t0;
        for theta in PROBES {
            let tp = t0 + theta * h_used;
            if release(x_at(tp)) >= 0.0 {
                let te = brent(|t| release(x_at(t)), prev, tp, 0.0).map_err(|e| {
                    FilippovError::EventLocation {
                        t: prev,
                        reason: e.to_string(),
                    }
                })?;
                exit = Some(te);
                break;
            }
            prev = tp;
        }

        match exit {
            Some(te) => {
                self.state = PlanarState {
                    x: x_at(te),
                    y: yb,
                    mode: b.sliding_mode(),
                    t: te,
                };
                self.exit_slide(b, events);
            }
            None => {
                self.state = PlanarState {
                    x: trial.y1[0],
                    y: yb,
                    mode: b.sliding_mode(),
                    t: t1,
                };
                self.fsal = Some((trial.y1, trial.k7));
            }
        }
        Ok(Some(Interpolant {
            dense,
            monotone_y: None,
        }))
    }
}

/// Single adaptive step from `state` with a fresh integrator.
pub fn step<F: SmoothField + ?Sized>(
    field: &F,
    state: PlanarState,
    cfg: &IntegratorConfig,
) -> Result<(PlanarState, Vec<Event>), FilippovError> {
    let mut it = Integrator::new(field, state, *cfg)?;
    let s = it.step(f64::INFINITY)?;
    Ok((s.end, s.events))
}

/// An integration error together with everything computed before it.
#[derive(Debug, Clone)]
pub struct IntegrationFailure {
    pub error: FilippovError,
    pub t: f64,
    pub partial: Box<Trajectory>,
}

impl fmt::Display for IntegrationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "integration failed at t = {}: {}", self.t, self.error)
    }
}

impl std::error::Error for IntegrationFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

/// Integrates from `ic` to `t_max`, sampling every `dt_out` and at every event.
pub fn integrate<F: SmoothField + ?Sized>(
    field: &F,
    ic: PlanarState,
    t_max: f64,
    dt_out: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, IntegrationFailure> {
    integrate_with_section(field, ic, t_max, dt_out, None, cfg)
}

pub fn integrate_with_section<F: SmoothField + ?Sized>(
    field: &F,
    ic: PlanarState,
    t_max: f64,
    dt_out: f64,
    section: Option<Section>,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, IntegrationFailure> {
    let fail = |error: FilippovError, traj: Trajectory| IntegrationFailure {
        error,
        t: traj.samples.last().map_or(ic.t, |s| s.t),
        partial: Box::new(traj),
    };
    let empty = || Trajectory {
        samples: vec![ic],
        events: Vec::new(),
        dt_out,
    };
    if !(dt_out.is_finite() && dt_out > 0.0) {
        return Err(fail(
            FilippovError::InvalidConfig(format!("dt_out must be finite and > 0, got {dt_out}")),
            empty(),
        ));
    }
    if !(t_max.is_finite() && t_max >= ic.t) {
        return Err(fail(
            FilippovError::InvalidState(format!("t_max = {t_max} precedes the initial time {}", ic.t)),
            empty(),
        ));
    }
    let mut it = match Integrator::new(field, ic, *cfg) {
        Ok(it) => it,
        Err(e) => return Err(fail(e, empty())),
    };
    if let Some(s) = section {
        it = it.with_section(s);
    }

    let t0 = it.state().t;
    let mut traj = Trajectory {
        samples: vec![it.state()],
        events: Vec::new(),
        dt_out,
    };
    let mut next_k: u64 = 1;
    let push = |traj: &mut Trajectory, s: PlanarState| {
        if traj.samples.last().map_or(true, |l| l.t < s.t) {
            traj.samples.push(s);
        }
    };

    loop {
        let step = match it.step(t_max) {
            Ok(s) => s,
            Err(e) => return Err(fail(e, traj)),
        };
        let mut events = step.events.iter().peekable();
        loop {
            let tg = t0 + next_k as f64 * dt_out;
            if tg > step.end.t || tg > t_max {
                break;
            }
            while let Some(e) = events.next_if(|e| e.t <= tg) {
                push(&mut traj, e.state);
                traj.events.push(*e);
            }
            let sample = if tg >= step.end.t {
                step.end
            } else {
                let (x, y) = step.position(tg);
                PlanarState {
                    x,
                    y,
                    mode: step.start.mode,
                    t: tg,
                }
            };
            push(&mut traj, sample);
            next_k += 1;
        }
        for e in events {
            push(&mut traj, e.state);
            traj.events.push(*e);
        }
        if it.state().t >= t_max {
            break;
        }
    }
    push(&mut traj, it.state());
    Ok(traj)
}

//! Jormungand variant: bare sea ice is darker than snow-covered ice, with a
//! smooth snow line at `y_snow`.

use serde::{Deserialize, Serialize};

use crate::budyko::{insolation, insolation_integral, require_finite, require_positive};
use crate::filippov::SmoothField;
use crate::model::{IceLineModel, ModelError};
use crate::quadrature::{self, QuadratureOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JormungandParams {
    #[serde(rename = "Q")]
    pub q: f64,
    pub s2: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub rho: f64,
    pub delta: f64,
    pub eta_c: f64,
    #[serde(rename = "Tc")]
    pub tc: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub alpha_w: f64,
    pub alpha_i: f64,
    pub alpha_s: f64,
    pub y_snow: f64,
}

impl Default for JormungandParams {
    fn default() -> Self {
        Self {
            q: 321.0,
            s2: -0.482,
            b: 1.5,
            c: 2.5 * 1.5,
            rho: 1.0,
            delta: 0.01,
            eta_c: 0.8,
            tc: 0.0,
            m: 25.0,
            alpha_w: 0.35,
            alpha_i: 0.45,
            alpha_s: 0.8,
            y_snow: 0.35,
        }
    }
}

impl JormungandParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        require_positive(&[
            ("Q", self.q),
            ("B", self.b),
            ("C", self.c),
            ("rho", self.rho),
            ("delta", self.delta),
            ("M", self.m),
        ])?;
        require_finite(&[
            ("s2", self.s2),
            ("Tc", self.tc),
            ("eta_c", self.eta_c),
            ("y_snow", self.y_snow),
        ])?;
        if !(self.alpha_w < self.alpha_i && self.alpha_i < self.alpha_s) {
            return Err(ModelError::InvalidParameter(format!(
                "need alpha_w < alpha_i < alpha_s, got {}, {}, {}",
                self.alpha_w, self.alpha_i, self.alpha_s
            )));
        }
        require_finite(&[("alpha_w", self.alpha_w)])
    }
}

/// Ice albedo: bare ice equatorward of the snow line, snow poleward.
pub fn alpha2_j(y: f64, p: &JormungandParams) -> f64 {
    0.5 * (p.alpha_s + p.alpha_i) + 0.5 * (p.alpha_s - p.alpha_i) * (p.m * (y - p.y_snow)).tanh()
}

/// `dα₂/dy`.
fn alpha2_j_prime(y: f64, p: &JormungandParams) -> f64 {
    let t = (p.m * (y - p.y_snow)).tanh();
    0.5 * (p.alpha_s - p.alpha_i) * p.m * (1.0 - t * t)
}

/// Open water below the ice line, `α₂(y)` above it, the mean on it.
pub fn albedo_j(eta: f64, y: f64, p: &JormungandParams) -> f64 {
    if y < eta {
        p.alpha_w
    } else if y > eta {
        alpha2_j(y, p)
    } else {
        0.5 * (p.alpha_w + alpha2_j(eta, p))
    }
}

/// `∫₀¹ s(y) α_J(η, y) dy`. Arguments outside `[0, 1]` are clamped.
pub fn alpha_bar_j(eta: f64, p: &JormungandParams) -> Result<f64, ModelError> {
    alpha_bar_j_with(eta, p, QuadratureOptions::default()).map_err(ModelError::from)
}

fn alpha_bar_j_with(
    eta: f64,
    p: &JormungandParams,
    opts: QuadratureOptions,
) -> Result<f64, quadrature::QuadratureError> {
    let e = eta.clamp(0.0, 1.0);
    let water = p.alpha_w * insolation_integral(e, p.s2);
    // Extra breaks a few layer widths out so a steep tanh is not stepped over.
    let w = 1.0 / p.m;
    let breaks = [
        p.y_snow - 16.0 * w,
        p.y_snow - 4.0 * w,
        p.y_snow - w,
        p.y_snow,
        p.y_snow + w,
        p.y_snow + 4.0 * w,
        p.y_snow + 16.0 * w,
    ];
    let ice = quadrature::integrate(
        |y| insolation(y, p.s2) * alpha2_j(y, p),
        e,
        1.0,
        &breaks,
        opts,
    )
    .map_err(|err| match err {
        quadrature::QuadratureError::Accuracy {
            estimate,
            error_estimate,
            target,
            panels,
        } => quadrature::QuadratureError::Accuracy {
            estimate: water + estimate,
            error_estimate,
            target,
            panels,
        },
        other => other,
    })?;
    Ok(water + ice.value)
}

/// Ice-line right-hand side with the Jormungand albedo.
///
/// If the quadrature misses its target the best estimate is used; the
/// right-hand side has to be total.
pub fn h_j(a: f64, eta: f64, p: &JormungandParams) -> f64 {
    let e = eta.clamp(0.0, 1.0);
    let mean = alpha_bar_j(e, p).unwrap_or_else(|err| match err {
        ModelError::Quadrature(q) => q.estimate(),
        _ => f64::NAN,
    });
    p.rho * (bracket(eta, e, mean, p) - a / p.b - p.tc)
}

/// `Q/(B+C) (s(η)(1 - α_J(η, η)) + (C/B)(1 - ᾱ_J))`, with `e` the clamped `η`.
fn bracket(eta: f64, e: f64, mean: f64, p: &JormungandParams) -> f64 {
    let at_line = insolation(eta, p.s2) * (1.0 - albedo_j(e, e, p));
    p.q / (p.b + p.c) * (at_line + (p.c / p.b) * (1.0 - mean))
}

/// `∂h_J/∂η`, from `dᾱ_J/dη = s(η)(α_w - α₂(η))`.
pub fn dh_j_deta(eta: f64, p: &JormungandParams) -> f64 {
    let e = eta.clamp(0.0, 1.0);
    let s = insolation(e, p.s2);
    let ds = 3.0 * p.s2 * e;
    let a2 = alpha2_j(e, p);
    let on_line = 0.5 * (p.alpha_w + a2);
    let d_on_line = 0.5 * alpha2_j_prime(e, p);
    let d_mean = s * (p.alpha_w - a2);
    p.rho * p.q / (p.b + p.c) * (ds * (1.0 - on_line) - s * d_on_line - (p.c / p.b) * d_mean)
}

/// `A` on the η-nullcline `h_J(A, η) = 0`.
pub fn nullcline_a_j(eta: f64, p: &JormungandParams) -> Result<f64, ModelError> {
    let e = eta.clamp(0.0, 1.0);
    let mean = alpha_bar_j(e, p)?;
    Ok(p.b * (bracket(eta, e, mean, p) - p.tc))
}

/// `(g, h_J)` as a planar field with `x = A`, `y = η`.
#[derive(Debug, Clone)]
pub struct JormungandModel {
    params: JormungandParams,
}

impl JormungandModel {
    pub fn new(params: JormungandParams) -> Self {
        Self { params }
    }

    pub fn params(&self) -> &JormungandParams {
        &self.params
    }
}

pub fn as_ice_line_model_j(p: JormungandParams) -> JormungandModel {
    JormungandModel::new(p)
}

impl SmoothField for JormungandModel {
    fn g(&self, _x: f64, y: f64) -> f64 {
        self.params.delta * (y - self.params.eta_c)
    }

    fn h(&self, x: f64, y: f64) -> f64 {
        h_j(x, y, &self.params)
    }
}

impl IceLineModel for JormungandModel {
    fn delta(&self) -> f64 {
        self.params.delta
    }
    fn rho(&self) -> f64 {
        self.params.rho
    }
    fn eta_c(&self) -> f64 {
        self.params.eta_c
    }
    fn b(&self) -> f64 {
        self.params.b
    }
    fn nullcline_a(&self, eta: f64) -> f64 {
        let p = &self.params;
        let e = eta.clamp(0.0, 1.0);
        // Same fallback as `h_j`, so the nullcline is exactly h_J's zero set.
        let mean = alpha_bar_j(e, p).unwrap_or_else(|err| match err {
            ModelError::Quadrature(q) => q.estimate(),
            _ => f64::NAN,
        });
        p.b * (bracket(eta, e, mean, p) - p.tc)
    }
    fn dh_deta(&self, eta: f64) -> f64 {
        dh_j_deta(eta, &self.params)
    }
}

//! Budyko ice-line model with a greenhouse-gas variable.
//!
//! `h` is the tabulated cubic in `η` (the canonical right-hand side);
//! [`h_constructed`] rebuilds it from insolation and albedo and is kept as a
//! diagnostic because its constant term does not reproduce the table.

use serde::{Deserialize, Serialize};

use crate::filippov::SmoothField;
use crate::model::{assemble_equilibrium, EquilibriumReport, IceLineModel, ModelError};
use crate::roots::brent;

/// Coefficients of `η⁰..η³` in the tabulated `h`, per unit ρ.
pub const TABLE_CUBIC: [f64; 4] = [112.88, 56.91, -24.31, -11.05];
/// Divisor of `A` in the tabulated `h`.
pub const TABLE_B: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BudykoParams {
    #[serde(rename = "Q")]
    pub q: f64,
    pub s2: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    #[serde(rename = "Tc")]
    pub tc: f64,
    pub rho: f64,
    pub delta: f64,
    pub eta_c: f64,
}

impl Default for BudykoParams {
    fn default() -> Self {
        Self {
            q: 321.0,
            s2: -0.482,
            b: 1.5,
            c: 2.5 * 1.5,
            alpha1: 0.32,
            alpha2: 0.62,
            tc: -10.0,
            rho: 1.0,
            delta: 0.01,
            eta_c: 0.6,
        }
    }
}

pub(crate) fn require_positive(named: &[(&str, f64)]) -> Result<(), ModelError> {
    for &(name, v) in named {
        if !(v.is_finite() && v > 0.0) {
            return Err(ModelError::InvalidParameter(format!(
                "{name} must be finite and > 0, got {v}"
            )));
        }
    }
    Ok(())
}

pub(crate) fn require_finite(named: &[(&str, f64)]) -> Result<(), ModelError> {
    for &(name, v) in named {
        if !v.is_finite() {
            return Err(ModelError::InvalidParameter(format!("{name} must be finite, got {v}")));
        }
    }
    Ok(())
}

impl BudykoParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        require_positive(&[
            ("Q", self.q),
            ("B", self.b),
            ("C", self.c),
            ("rho", self.rho),
            ("delta", self.delta),
        ])?;
        require_finite(&[("s2", self.s2), ("Tc", self.tc), ("eta_c", self.eta_c)])?;
        if !(0.0 <= self.alpha1 && self.alpha1 < self.alpha2 && self.alpha2 <= 1.0) {
            return Err(ModelError::InvalidParameter(format!(
                "need 0 <= alpha1 < alpha2 <= 1, got alpha1 = {}, alpha2 = {}",
                self.alpha1, self.alpha2
            )));
        }
        Ok(())
    }
}

/// Mean annual insolation distribution `s(y) = 1 + (s2/2)(3y² - 1)`.
pub fn insolation(y: f64, s2: f64) -> f64 {
    1.0 + 0.5 * s2 * (3.0 * y * y - 1.0)
}

/// `∫₀^η s(y) dy`.
pub fn insolation_integral(eta: f64, s2: f64) -> f64 {
    eta + 0.5 * s2 * (eta * eta * eta - eta)
}

/// Step albedo: `α₁` below the ice line, `α₂` above, the mean on it.
pub fn albedo(eta: f64, y: f64, p: &BudykoParams) -> f64 {
    if y < eta {
        p.alpha1
    } else if y > eta {
        p.alpha2
    } else {
        0.5 * (p.alpha1 + p.alpha2)
    }
}

/// A value computed at a clamped argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Clamped {
    pub value: f64,
    /// Whether the argument lay outside `[0, 1]`.
    pub clamped: bool,
}

/// Insolation-weighted mean albedo `∫₀¹ s(y) α(η, y) dy`.
pub fn alpha_bar(eta: f64, p: &BudykoParams) -> Clamped {
    let e = eta.clamp(0.0, 1.0);
    let s = insolation_integral(e, p.s2);
    Clamped {
        value: p.alpha1 * s + p.alpha2 * (1.0 - s),
        clamped: e != eta,
    }
}

/// Tabulated right-hand side of the ice-line equation.
pub fn h_poly(a: f64, eta: f64, rho: f64) -> f64 {
    let [c0, c1, c2, c3] = TABLE_CUBIC;
    rho * (c0 + eta * (c1 + eta * (c2 + eta * c3)) - a / TABLE_B)
}

/// `∂h_poly/∂η`.
pub fn dh_poly_deta(eta: f64, rho: f64) -> f64 {
    let [_, c1, c2, c3] = TABLE_CUBIC;
    rho * (c1 + eta * (2.0 * c2 + 3.0 * c3 * eta))
}

/// Ice-line right-hand side assembled from insolation and albedo.
pub fn h_constructed(a: f64, eta: f64, p: &BudykoParams) -> f64 {
    let at_line = insolation(eta, p.s2) * (1.0 - albedo(eta, eta, p));
    let mean = (p.c / p.b) * (1.0 - alpha_bar(eta, p).value);
    p.rho * (p.q / (p.b + p.c) * (at_line + mean) - a / p.b - p.tc)
}

/// Greenhouse-gas rate `δ(η - η_c)`.
pub fn g(_a: f64, eta: f64, p: &BudykoParams) -> f64 {
    p.delta * (eta - p.eta_c)
}

/// `A` on the η-nullcline of the tabulated `h`.
pub fn nullcline_a(eta: f64) -> f64 {
    let [c0, c1, c2, c3] = TABLE_CUBIC;
    TABLE_B * (c0 + eta * (c1 + eta * (c2 + eta * c3)))
}

/// Fold of the nullcline of `c0 + c1 η + c2 η² + c3 η³ - A/B`.
pub fn fold_of(cubic: [f64; 4]) -> Result<f64, ModelError> {
    let [_, c1, c2, c3] = cubic;
    let d = |e: f64| c1 + e * (2.0 * c2 + 3.0 * c3 * e);
    brent(d, 0.0, 1.0, 1e-12).map_err(|_| ModelError::NoFold)
}

/// Fold `η_f` of the tabulated nullcline.
pub fn fold() -> f64 {
    fold_of(TABLE_CUBIC).expect("tabulated cubic has a fold in (0, 1)")
}

pub fn equilibrium(p: &BudykoParams) -> EquilibriumReport {
    assemble_equilibrium(
        nullcline_a(p.eta_c),
        p.eta_c,
        p.delta,
        p.rho,
        TABLE_B,
        dh_poly_deta(p.eta_c, p.rho),
    )
}

/// Cubic induced by [`h_constructed`] next to the tabulated one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CubicDiagnostic {
    /// `η⁰..η³` coefficients of `h_constructed(0, η)/ρ`.
    pub constructed: [f64; 4],
    pub table: [f64; 4],
    /// `table - constructed`, term by term.
    pub residual: [f64; 4],
}

/// Recovers the cubic in `η` of [`h_constructed`] by interpolation on four
/// Chebyshev nodes of `[0, 1]`. The construction is an exact cubic, so the
/// interpolant is the polynomial itself.
pub fn constructed_cubic(p: &BudykoParams) -> CubicDiagnostic {
    let nodes: [f64; 4] = std::array::from_fn(|k| {
        let theta = std::f64::consts::PI * (2 * k + 1) as f64 / 8.0;
        0.5 * (1.0 - theta.cos())
    });
    // Newton divided differences.
    let mut dd: [f64; 4] = std::array::from_fn(|k| h_constructed(0.0, nodes[k], p) / p.rho);
    for level in 1..4 {
        for k in (level..4).rev() {
            dd[k] = (dd[k] - dd[k - 1]) / (nodes[k] - nodes[k - level]);
        }
    }
    // Expand the Newton form into monomial coefficients (Horner from the top).
    let mut coeffs = [0.0; 4];
    coeffs[0] = dd[3];
    for k in (0..3).rev() {
        // coeffs <- coeffs * (η - nodes[k]) + dd[k]
        let mut next = [0.0; 4];
        for j in 0..4 {
            if j > 0 {
                next[j] += coeffs[j - 1];
            }
            next[j] -= nodes[k] * coeffs[j];
        }
        next[0] += dd[k];
        coeffs = next;
    }
    let table = TABLE_CUBIC;
    CubicDiagnostic {
        constructed: coeffs,
        table,
        residual: std::array::from_fn(|k| table[k] - coeffs[k]),
    }
}

/// `(g, h_poly)` as a planar field with `x = A`, `y = η`.
#[derive(Debug, Clone)]
pub struct BudykoModel {
    params: BudykoParams,
}

impl BudykoModel {
    pub fn new(params: BudykoParams) -> Self {
        Self { params }
    }

    pub fn params(&self) -> &BudykoParams {
        &self.params
    }
}

pub fn as_ice_line_model(p: BudykoParams) -> BudykoModel {
    BudykoModel::new(p)
}

impl SmoothField for BudykoModel {
    fn g(&self, _x: f64, y: f64) -> f64 {
        g(0.0, y, &self.params)
    }

    fn h(&self, x: f64, y: f64) -> f64 {
        h_poly(x, y, self.params.rho)
    }
}

impl IceLineModel for BudykoModel {
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
        TABLE_B
    }
    fn nullcline_a(&self, eta: f64) -> f64 {
        nullcline_a(eta)
    }
    fn dh_deta(&self, eta: f64) -> f64 {
        dh_poly_deta(eta, self.params.rho)
    }
    fn equilibrium(&self) -> EquilibriumReport {
        equilibrium(&self.params)
    }
}

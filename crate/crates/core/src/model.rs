//! Common interface of the ice-line models and their fixed-point analysis.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::budyko::{BudykoModel, BudykoParams};
use crate::filippov::SmoothField;
use crate::jormungand::{JormungandModel, JormungandParams};
use crate::quadrature::QuadratureError;

/// Below this, the largest eigenvalue real part counts as zero.
pub const DEGENERATE_RE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("the nullcline has no fold in (0, 1)")]
    NoFold,
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    Unstable,
    Degenerate,
}

impl Stability {
    pub fn as_str(self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
            Stability::Degenerate => "degenerate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    #[serde(rename = "A_c")]
    pub a_c: f64,
    pub eta_c: f64,
    /// Rows `[∂g/∂A, ∂g/∂η]` and `[∂h/∂A, ∂h/∂η]`.
    pub jacobian: [[f64; 2]; 2],
    pub eigenvalues: [Complex64; 2],
    pub stability: Stability,
}

impl EquilibriumReport {
    pub fn lambda_re_max(&self) -> f64 {
        self.eigenvalues[0].re.max(self.eigenvalues[1].re)
    }

    pub fn trace(&self) -> f64 {
        self.jacobian[0][0] + self.jacobian[1][1]
    }

    pub fn determinant(&self) -> f64 {
        let j = &self.jacobian;
        j[0][0] * j[1][1] - j[0][1] * j[1][0]
    }
}

/// Eigenvalues of a real 2×2 matrix from its trace and determinant.
///
/// The larger-magnitude real root is formed first and the other recovered
/// from the product, which avoids cancellation when `det` is small.
pub fn eigenvalues_2x2(trace: f64, det: f64) -> [Complex64; 2] {
    let disc = trace * trace - 4.0 * det;
    if disc >= 0.0 {
        let sign = if trace >= 0.0 { 1.0 } else { -1.0 };
        let l1 = 0.5 * (trace + sign * disc.sqrt());
        let l2 = if l1 != 0.0 { det / l1 } else { 0.0 };
        [Complex64::new(l1, 0.0), Complex64::new(l2, 0.0)]
    } else {
        let im = 0.5 * (-disc).sqrt();
        [
            Complex64::new(0.5 * trace, im),
            Complex64::new(0.5 * trace, -im),
        ]
    }
}

/// Builds the report for the fixed point of `g = δ(η - η_c)` and an `h`
/// that is linear in `A` with slope `-ρ/B`.
pub fn assemble_equilibrium(
    a_c: f64,
    eta_c: f64,
    delta: f64,
    rho: f64,
    b: f64,
    dh_deta: f64,
) -> EquilibriumReport {
    let jacobian = [[0.0, delta], [-rho / b, dh_deta]];
    let trace = dh_deta;
    let det = delta * rho / b;
    let eigenvalues = eigenvalues_2x2(trace, det);
    let re_max = eigenvalues[0].re.max(eigenvalues[1].re);
    let stability = if !(eta_c > 0.0 && eta_c < 1.0) || re_max.abs() < DEGENERATE_RE_TOL {
        Stability::Degenerate
    } else if re_max < 0.0 {
        Stability::Stable
    } else {
        Stability::Unstable
    };
    EquilibriumReport {
        a_c,
        eta_c,
        jacobian,
        eigenvalues,
        stability,
    }
}

/// An `(A, η)` system with `g = δ(η - η_c)` and `h` linear in `A`.
pub trait IceLineModel: SmoothField {
    fn delta(&self) -> f64;
    fn rho(&self) -> f64;
    fn eta_c(&self) -> f64;
    /// Magnitude of `-∂h/∂A` divided by ρ.
    fn b(&self) -> f64;
    /// The `A` at which `h(A, η) = 0`.
    fn nullcline_a(&self, eta: f64) -> f64;
    /// `∂h/∂η`, which does not depend on `A`.
    fn dh_deta(&self, eta: f64) -> f64;

    fn equilibrium(&self) -> EquilibriumReport {
        let eta_c = self.eta_c();
        assemble_equilibrium(
            self.nullcline_a(eta_c),
            eta_c,
            self.delta(),
            self.rho(),
            self.b(),
            self.dh_deta(eta_c),
        )
    }

    /// Sliding on `η = 0` ends where `A` reaches this value.
    fn lower_tangency(&self) -> f64 {
        self.nullcline_a(0.0)
    }

    fn upper_tangency(&self) -> f64 {
        self.nullcline_a(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Budyko,
    Jormungand,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Budyko => "budyko",
            ModelKind::Jormungand => "jormungand",
        }
    }
}

/// Parameters of either model family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ModelParams {
    Budyko(BudykoParams),
    Jormungand(JormungandParams),
}

impl ModelParams {
    pub fn default_for(kind: ModelKind) -> Self {
        match kind {
            ModelKind::Budyko => ModelParams::Budyko(BudykoParams::default()),
            ModelKind::Jormungand => ModelParams::Jormungand(JormungandParams::default()),
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            ModelParams::Budyko(_) => ModelKind::Budyko,
            ModelParams::Jormungand(_) => ModelKind::Jormungand,
        }
    }

    pub fn eta_c(&self) -> f64 {
        match self {
            ModelParams::Budyko(p) => p.eta_c,
            ModelParams::Jormungand(p) => p.eta_c,
        }
    }

    pub fn delta(&self) -> f64 {
        match self {
            ModelParams::Budyko(p) => p.delta,
            ModelParams::Jormungand(p) => p.delta,
        }
    }

    pub fn with_eta_c(mut self, eta_c: f64) -> Self {
        match &mut self {
            ModelParams::Budyko(p) => p.eta_c = eta_c,
            ModelParams::Jormungand(p) => p.eta_c = eta_c,
        }
        self
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        match self {
            ModelParams::Budyko(p) => p.validate(),
            ModelParams::Jormungand(p) => p.validate(),
        }
    }

    pub fn build(&self) -> Result<Model, ModelError> {
        self.validate()?;
        Ok(match *self {
            ModelParams::Budyko(p) => Model::Budyko(BudykoModel::new(p)),
            ModelParams::Jormungand(p) => Model::Jormungand(JormungandModel::new(p)),
        })
    }
}

/// Either model behind one concrete type.
#[derive(Debug, Clone)]
pub enum Model {
    Budyko(BudykoModel),
    Jormungand(JormungandModel),
}

macro_rules! dispatch {
    ($self:ident, $m:ident => $e:expr) => {
        match $self {
            Model::Budyko($m) => $e,
            Model::Jormungand($m) => $e,
        }
    };
}

impl SmoothField for Model {
    fn g(&self, x: f64, y: f64) -> f64 {
        dispatch!(self, m => m.g(x, y))
    }
    fn h(&self, x: f64, y: f64) -> f64 {
        dispatch!(self, m => m.h(x, y))
    }
    fn lipschitz_hint(&self) -> Option<f64> {
        dispatch!(self, m => m.lipschitz_hint())
    }
}

impl IceLineModel for Model {
    fn delta(&self) -> f64 {
        dispatch!(self, m => m.delta())
    }
    fn rho(&self) -> f64 {
        dispatch!(self, m => m.rho())
    }
    fn eta_c(&self) -> f64 {
        dispatch!(self, m => m.eta_c())
    }
    fn b(&self) -> f64 {
        dispatch!(self, m => m.b())
    }
    fn nullcline_a(&self, eta: f64) -> f64 {
        dispatch!(self, m => m.nullcline_a(eta))
    }
    fn dh_deta(&self, eta: f64) -> f64 {
        dispatch!(self, m => m.dh_deta(eta))
    }
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Budyko(_) => ModelKind::Budyko,
            Model::Jormungand(_) => ModelKind::Jormungand,
        }
    }

    pub fn params(&self) -> ModelParams {
        match self {
            Model::Budyko(m) => ModelParams::Budyko(*m.params()),
            Model::Jormungand(m) => ModelParams::Jormungand(*m.params()),
        }
    }
}

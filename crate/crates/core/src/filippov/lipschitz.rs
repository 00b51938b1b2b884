//! Sampling estimate of the one-sided Lipschitz constant of the extended field.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{extended_field, FilippovError, IntegratorConfig, PlanarState, SmoothField};

/// Axis-aligned sampling box in the `(x, y)` plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    fn validate(&self) -> Result<(), FilippovError> {
        let ok = [self.x_min, self.x_max, self.y_min, self.y_max]
            .iter()
            .all(|v| v.is_finite())
            && self.x_max > self.x_min
            && self.y_max > self.y_min;
        if ok {
            Ok(())
        } else {
            Err(FilippovError::InvalidDomain(format!("{self:?}")))
        }
    }
}

/// `(F(z1) - F(z2)) · (z1 - z2) / |z1 - z2|²` for the extended field `F`.
pub fn one_sided_lipschitz_quotient<F: SmoothField + ?Sized>(
    field: &F,
    z1: (f64, f64),
    z2: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<f64, FilippovError> {
    let dx = z1.0 - z2.0;
    let dy = z1.1 - z2.1;
    let d2 = dx * dx + dy * dy;
    if d2 == 0.0 {
        return Err(FilippovError::InvalidDomain("coincident sample points".into()));
    }
    let f1 = extended_field(field, &PlanarState::interior(z1.0, z1.1), cfg)?;
    let f2 = extended_field(field, &PlanarState::interior(z2.0, z2.1), cfg)?;
    Ok(((f1.0 - f2.0) * dx + (f1.1 - f2.1) * dy) / d2)
}

/// Maximum quotient over `n_samples` random pairs drawn uniformly from `rect`.
pub fn one_sided_lipschitz<F: SmoothField + ?Sized>(
    field: &F,
    rect: Rect,
    n_samples: usize,
    seed: u64,
    cfg: &IntegratorConfig,
) -> Result<f64, FilippovError> {
    rect.validate()?;
    if n_samples < 2 {
        return Err(FilippovError::InvalidDomain(format!(
            "need at least 2 sample pairs, got {n_samples}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| {
        (
            rng.gen_range(rect.x_min..rect.x_max),
            rng.gen_range(rect.y_min..rect.y_max),
        )
    };
    let mut best = f64::NEG_INFINITY;
    let mut taken = 0;
    while taken < n_samples {
        let z1 = draw(&mut rng);
        let z2 = draw(&mut rng);
        if z1 == z2 {
            continue;
        }
        best = best.max(one_sided_lipschitz_quotient(field, z1, z2, cfg)?);
        taken += 1;
    }
    Ok(best)
}

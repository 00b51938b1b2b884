//! Extended Budyko ice-line / greenhouse-gas model as a planar Filippov system.
//!
//! The state is `(A, η)`: the outgoing longwave coefficient `A` and the sine
//! of the ice-line latitude `η`. Inside the physical strip `0 ≤ η ≤ 1` the
//! model is smooth; on its edges orbits slide until a tangency releases them.

pub mod filippov;
pub mod quadrature;
pub mod roots;

pub mod analysis;
pub mod budyko;
pub mod jormungand;
pub mod model;

pub use filippov::{IntegratorConfig, Mode, PlanarState, SmoothField};
pub use model::{EquilibriumReport, IceLineModel, Model, ModelError, ModelKind, ModelParams, Stability};

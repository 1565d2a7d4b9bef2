//! Semiclassical differential operators in the normalized frame
//! `(ħD_r, f⁻¹ħD_θ)`, their principal symbols, ellipticity checks, and
//! the Lie-derivative and warped-Laplacian models.

mod apply;
mod elliptic;
mod models;
mod op;

pub use apply::{apply, GridDiffOp};
pub use elliptic::{check_elliptic, EllipticityReport};
pub use models::{
    check_metric_equivalence, lie_derivative, metric_equivalence_ratio, warped_laplacian, warped_potential,
};
pub use op::{DiffOp, MultiIndex};

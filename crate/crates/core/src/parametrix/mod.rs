//! The resolvent parametrix of an elliptic differential operator: exact
//! composition `P ∘ Op¹(a)`, the recursion for `b₀, …, b_N`, and numerical
//! residual and self-adjointness measurements.

mod compose;
mod recursion;
mod residual;
mod selfadjoint;

pub use compose::compose_diffop_symbol;
pub use recursion::{
    build_parametrix, build_parametrix_with, defect_series, Parametrix, ParametrixOptions, DEFAULT_NODE_BUDGET,
    MAX_DEPTH,
};
pub use residual::{random_waves, residual_field, residual_report, semiclassical_field, ResidualReport, Wave};
pub use selfadjoint::{
    cutoff_commutator, neumann_residuals, radial_cutoff, selfadjoint_pipeline, symmetry_defect, CommutatorReport,
    CutoffCommutator, ResolventRemainder, SelfAdjointOptions, SelfAdjointReport,
};

use super::config::{ExperimentConfig, OperatorKind};
use crate::diffops::{warped_laplacian, DiffOp, MultiIndex};
use crate::error::Result;
use crate::expr::Expr;

/// The differential operator selected by `operator` and `weight`.
pub fn build_operator(cfg: &ExperimentConfig) -> Result<DiffOp> {
    let w = cfg.weight_function()?;
    match cfg.operator {
        OperatorKind::Constant => DiffOp::new(2, w).with_term(MultiIndex::new(2, 0), 0, Expr::one())?.with_term(
            MultiIndex::new(0, 2),
            0,
            Expr::one(),
        ),
        OperatorKind::Potential => DiffOp::new(2, w).with_term(MultiIndex::new(2, 0), 0, Expr::one())?.with_term(
            MultiIndex::new(0, 0),
            0,
            (-(Expr::r().pow(2))).exp() * 0.5,
        ),
        OperatorKind::Warped => warped_laplacian(&w, &Expr::one()),
    }
}

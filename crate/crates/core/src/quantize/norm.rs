use super::grid::{Grid, HalfDensityField};
use crate::error::Result;
use crate::expr::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// A linear map on fields over one grid, with its `L²` adjoint.
pub trait LinearOperator: Sync {
    fn grid(&self) -> &Grid;
    fn apply(&self, u: &HalfDensityField) -> Result<HalfDensityField>;
    fn apply_adjoint(&self, u: &HalfDensityField) -> Result<HalfDensityField>;
}

type FieldMap<'a> = Box<dyn Fn(&HalfDensityField) -> Result<HalfDensityField> + Sync + 'a>;

/// An operator given by a pair of closures.
pub struct FnOperator<'a> {
    grid: Grid,
    apply: FieldMap<'a>,
    adjoint: FieldMap<'a>,
}

impl<'a> FnOperator<'a> {
    pub fn new(
        grid: &Grid,
        apply: impl Fn(&HalfDensityField) -> Result<HalfDensityField> + Sync + 'a,
        adjoint: impl Fn(&HalfDensityField) -> Result<HalfDensityField> + Sync + 'a,
    ) -> FnOperator<'a> {
        FnOperator { grid: *grid, apply: Box::new(apply), adjoint: Box::new(adjoint) }
    }

    /// Multiplication by a function of `(r, θ)`.
    pub fn multiplication(grid: &Grid, f: impl Fn(f64, f64) -> C64 + Sync + Clone + 'a) -> FnOperator<'a> {
        let g = f.clone();
        FnOperator::new(grid, move |u| Ok(u.multiply(&f)), move |u| Ok(u.multiply(|r, t| g(r, t).conj())))
    }
}

impl LinearOperator for FnOperator<'_> {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn apply(&self, u: &HalfDensityField) -> Result<HalfDensityField> {
        (self.apply)(u)
    }

    fn apply_adjoint(&self, u: &HalfDensityField) -> Result<HalfDensityField> {
        (self.adjoint)(u)
    }
}

/// Random complex field with independent uniform entries.
pub fn random_field(grid: &Grid, rng: &mut impl Rng) -> HalfDensityField {
    HalfDensityField::from_fn(grid, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

/// Power iteration on `A*A` from `trials` seeded random starts. Returns the
/// largest observed `‖Ax‖/‖x‖`, a lower bound on `‖A‖`.
pub fn op_norm_estimate(op: &dyn LinearOperator, trials: usize, iters: usize, seed: u64) -> Result<f64> {
    let results: Result<Vec<f64>> = (0..trials.max(1))
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(trial as u64 * 0x9e37_79b9));
            let mut x = random_field(op.grid(), &mut rng);
            let mut best: f64 = 0.0;
            for _ in 0..iters.max(1) {
                let nx = x.l2_norm();
                if nx == 0.0 {
                    break;
                }
                x = x.scale(C64::new(1.0 / nx, 0.0));
                let y = op.apply(&x)?;
                best = best.max(y.l2_norm());
                x = op.apply_adjoint(&y)?;
            }
            Ok(best)
        })
        .collect();
    Ok(results?.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;
    use crate::quantize::QuantizedOp;

    #[test]
    fn identity_and_scaling() {
        let g = Grid::new(0.0, 4.0, 16, 16, 0.5).unwrap();
        let id = FnOperator::new(&g, |u| Ok(u.clone()), |u| Ok(u.clone()));
        assert!((op_norm_estimate(&id, 2, 3, 1).unwrap() - 1.0).abs() < 1e-6);
        let two = FnOperator::multiplication(&g, |_, _| C64::new(2.0, 0.0));
        assert!((op_norm_estimate(&two, 2, 3, 1).unwrap() - 2.0).abs() < 1e-6);
        let zero = FnOperator::multiplication(&g, |_, _| C64::new(0.0, 0.0));
        assert_eq!(op_norm_estimate(&zero, 2, 3, 1).unwrap(), 0.0);
    }

    #[test]
    fn sine_multiplier() {
        let g = Grid::new(0.0, 4.0, 8, 64, 0.5).unwrap();
        let op = QuantizedOp::new(&g, &Expr::theta().sin(), 1.0).unwrap();
        let n = op_norm_estimate(&op, 3, 200, 7).unwrap();
        assert!((0.99..=1.0 + 1e-6).contains(&n), "{n}");
    }
}

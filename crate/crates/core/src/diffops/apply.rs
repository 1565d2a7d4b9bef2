use super::op::{DiffOp, MultiIndex};
use crate::error::{Error, Result};
use crate::expr::{Expr, Tape, Var, C64};
use crate::quantize::{hbar_d_r, hbar_d_theta, Grid, HalfDensityField, LinearOperator};

/// A [`DiffOp`] with coefficients sampled on a grid at the grid's `ħ`.
#[derive(Debug, Clone)]
pub struct GridDiffOp {
    grid: Grid,
    finv: Vec<f64>,
    terms: Vec<(MultiIndex, Vec<C64>)>,
}

fn sample(grid: &Grid, e: &Expr) -> Result<Vec<C64>> {
    let tape = Tape::compile(&e.subst(&[(Var::Hbar, Expr::real(grid.hbar))]));
    let mut scratch = Vec::new();
    let mut out = Vec::with_capacity(grid.len());
    for i in 0..grid.n_r {
        for k in 0..grid.n_theta {
            let mut vars = [C64::new(0.0, 0.0); 8];
            vars[Var::R.index()] = grid.r(i).into();
            vars[Var::Theta.index()] = grid.theta(k).into();
            out.push(tape.eval_vars(&vars, &mut scratch)?);
        }
    }
    Ok(out)
}

impl GridDiffOp {
    pub fn new(op: &DiffOp, grid: &Grid) -> Result<GridDiffOp> {
        let finv: Vec<f64> = (0..grid.n_r).map(|i| 1.0 / op.weight().eval(grid.r(i))).collect();
        if let Some(i) = finv.iter().position(|x| !x.is_finite()) {
            return Err(Error::WeightCheck(format!("weight not finite at r = {}", grid.r(i))));
        }
        let mut terms = Vec::new();
        for a in op.multi_indices() {
            terms.push((a, sample(grid, &op.coefficient(a))?));
        }
        Ok(GridDiffOp { grid: *grid, finv, terms })
    }

    fn check(&self, u: &HalfDensityField) -> Result<()> {
        if !self.grid.same_lattice(&u.grid) {
            return Err(Error::GridMismatch("field and operator grids differ".into()));
        }
        Ok(())
    }

    fn angular(&self, u: &HalfDensityField) -> HalfDensityField {
        let nt = self.grid.n_theta;
        let mut w = hbar_d_theta(u);
        for (q, v) in w.values.iter_mut().enumerate() {
            *v *= self.finv[q / nt];
        }
        w
    }

    fn powers(
        &self,
        u: &HalfDensityField,
        step: impl Fn(&HalfDensityField) -> HalfDensityField,
        n: u32,
    ) -> Vec<HalfDensityField> {
        let mut out = vec![u.clone()];
        for _ in 0..n {
            let next = step(out.last().expect("nonempty"));
            out.push(next);
        }
        out
    }
}

impl LinearOperator for GridDiffOp {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Spectral derivatives composed in the order `p_α (f⁻¹ħD_θ)^{α′} (ħD_r)^{α₀}`.
    fn apply(&self, u: &HalfDensityField) -> Result<HalfDensityField> {
        self.check(u)?;
        let max_r = self.terms.iter().map(|(a, _)| a.r).max().unwrap_or(0);
        let radial = self.powers(u, hbar_d_r, max_r);
        let mut out = HalfDensityField::zeros(&self.grid);
        for r in 0..=max_r {
            let group: Vec<_> = self.terms.iter().filter(|(a, _)| a.r == r).collect();
            let Some(max_t) = group.iter().map(|(a, _)| a.theta).max() else { continue };
            let ang = self.powers(&radial[r as usize], |w| self.angular(w), max_t);
            for (a, p) in group {
                let w = &ang[a.theta as usize];
                for (q, v) in out.values.iter_mut().enumerate() {
                    *v += p[q] * w.values[q];
                }
            }
        }
        Ok(out)
    }

    /// `Σ_α (ħD_r)^{α₀} (f⁻¹ħD_θ)^{α′} (p̄_α ·)`.
    fn apply_adjoint(&self, u: &HalfDensityField) -> Result<HalfDensityField> {
        self.check(u)?;
        let mut out = HalfDensityField::zeros(&self.grid);
        for (a, p) in &self.terms {
            let mut w = u.clone();
            for (q, v) in w.values.iter_mut().enumerate() {
                *v *= p[q].conj();
            }
            for _ in 0..a.theta {
                w = self.angular(&w);
            }
            for _ in 0..a.r {
                w = hbar_d_r(&w);
            }
            for (o, x) in out.values.iter_mut().zip(&w.values) {
                *o += x;
            }
        }
        Ok(out)
    }
}

/// `P u` on the grid of `u`.
pub fn apply(op: &DiffOp, u: &HalfDensityField) -> Result<HalfDensityField> {
    GridDiffOp::new(op, &u.grid)?.apply(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::WeightFunction;
    use std::f64::consts::PI;

    #[test]
    fn radial_fourier_mode() {
        let g = Grid::new(-4.0, 8.0, 32, 8, 0.25).unwrap();
        let u = HalfDensityField::from_fn(&g, |r, _| C64::from_polar(1.0, 2.0 * PI * r / 8.0));
        let p = DiffOp::new(1, WeightFunction::one()).with_term(MultiIndex::new(1, 0), 0, Expr::one()).unwrap();
        let w = apply(&p, &u).unwrap();
        let c = 2.0 * PI * 0.25 / 8.0;
        let err = w.values.iter().zip(&u.values).map(|(a, b)| (a - b * c).norm()).fold(0.0, f64::max);
        assert!(err < 1e-13, "{err}");
    }

    #[test]
    fn weighted_angular_mode() {
        let g = Grid::new(0.0, 4.0, 16, 16, 0.5).unwrap();
        let u = HalfDensityField::from_fn(&g, |_, th| C64::from_polar(1.0, th));
        let w = WeightFunction::sqrt1pr2();
        let p = DiffOp::new(1, w.clone()).with_term(MultiIndex::new(0, 1), 0, Expr::one()).unwrap();
        let out = apply(&p, &u).unwrap();
        for i in 0..g.n_r {
            for k in 0..g.n_theta {
                let oracle = u.get(i, k) * 0.5 / w.eval(g.r(i));
                assert!((out.get(i, k) - oracle).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn adjoint_pairing() {
        let g = Grid::new(-4.0, 8.0, 32, 16, 0.25).unwrap();
        let p = DiffOp::new(2, WeightFunction::sqrt1pr2())
            .with_term(MultiIndex::new(1, 1), 0, Expr::theta().sin() + Expr::r() * Expr::i())
            .unwrap()
            .with_term(MultiIndex::new(0, 0), 1, Expr::r().cos())
            .unwrap();
        let op = GridDiffOp::new(&p, &g).unwrap();
        let u = HalfDensityField::from_fn(&g, |r, th| C64::new((-r * r).exp() * th.cos(), 0.3 * (-r * r).exp()));
        let v = HalfDensityField::from_fn(&g, |r, th| C64::new((-(r - 0.5).powi(2)).exp(), (2.0 * th).sin()));
        let lhs = op.apply(&u).unwrap().inner(&v).unwrap();
        let rhs = u.inner(&op.apply_adjoint(&v).unwrap()).unwrap();
        assert!((lhs - rhs).norm() < 1e-12 * u.l2_norm() * v.l2_norm());
    }
}

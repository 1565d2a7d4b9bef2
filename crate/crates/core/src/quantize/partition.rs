use super::grid::{Grid, HalfDensityField};
use super::norm::{op_norm_estimate, FnOperator};
use super::op::QuantizedOp;
use crate::error::{Error, Result};
use crate::expr::{Bump, Expr, ScalarFn};
use crate::fit::{loglog_fit, LineFit};
use std::fmt::Write as _;
use std::sync::Arc;

/// `ψ_j = ψ(· - j)` with `ψ = b / Σ_i b(· - i)` for the standard bump `b`.
#[derive(Debug, Clone)]
pub struct PartitionOfUnity {
    bump: Bump,
}

impl Default for PartitionOfUnity {
    fn default() -> Self {
        PartitionOfUnity { bump: Bump::new(0) }
    }
}

impl PartitionOfUnity {
    pub fn psi(&self, x: f64) -> f64 {
        if x.abs() >= 1.0 {
            return 0.0;
        }
        let b = |y: f64| self.bump.eval(y).unwrap_or(0.0);
        b(x) / (b(x - 1.0) + b(x) + b(x + 1.0))
    }

    pub fn psi_j(&self, j: i64, r: f64) -> f64 {
        self.psi(r - j as f64)
    }

    /// `ψ` as an expression in `r`, valid on `(-1, 1)`.
    pub fn psi_expr(&self) -> Expr {
        let b = |e: Expr| Expr::apply_fn(Arc::new(Bump::new(0)), e);
        b(Expr::r()) / (b(Expr::r() - 1.0) + b(Expr::r()) + b(Expr::r() + 1.0))
    }

    /// Largest `|Σ_j ψ_j(r) - 1|` over grid radii.
    pub fn partition_defect(&self, grid: &Grid) -> f64 {
        (0..grid.n_r)
            .map(|i| {
                let r = grid.r(i);
                let j0 = r.floor() as i64;
                let s: f64 = (j0 - 2..=j0 + 2).map(|j| self.psi_j(j, r)).sum();
                (s - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn cut(&self, j: i64, u: &HalfDensityField) -> HalfDensityField {
        u.multiply(|r, _| self.psi_j(j, r).into())
    }

    fn require_inside(&self, grid: &Grid, j: i64) -> Result<()> {
        let (lo, hi) = (grid.r_origin, grid.r_origin + grid.r_length);
        if (j as f64 - 1.0) < lo || (j as f64 + 1.0) > hi {
            return Err(Error::SupportEscapesWindow(format!(
                "supp psi_{j} = ({}, {}) leaves [{lo}, {hi})",
                j - 1,
                j + 1
            )));
        }
        Ok(())
    }
}

/// Estimated norms `‖ψ_j Op ψ_k‖` for `j`, `k` in the given ranges.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockNormTable {
    pub js: Vec<i64>,
    pub ks: Vec<i64>,
    /// `norms[a][b]` belongs to `(js[a], ks[b])`.
    pub norms: Vec<Vec<f64>>,
}

pub fn block_norm_table(
    op: &QuantizedOp,
    pou: &PartitionOfUnity,
    js: &[i64],
    ks: &[i64],
    trials: usize,
    iters: usize,
    seed: u64,
) -> Result<BlockNormTable> {
    let grid = *op.grid();
    for &j in js.iter().chain(ks) {
        pou.require_inside(&grid, j)?;
    }
    let mut norms = Vec::with_capacity(js.len());
    for &j in js {
        let mut row = Vec::with_capacity(ks.len());
        for &k in ks {
            let block = FnOperator::new(
                &grid,
                |u| Ok(pou.cut(j, &op.apply(&pou.cut(k, u))?)),
                |u| Ok(pou.cut(k, &op.apply_adjoint(&pou.cut(j, u))?)),
            );
            row.push(op_norm_estimate(&block, trials, iters, seed)?);
        }
        norms.push(row);
    }
    Ok(BlockNormTable { js: js.to_vec(), ks: ks.to_vec(), norms })
}

impl BlockNormTable {
    /// Largest block norm at each distance `|j - k| = 0..=max_d`.
    pub fn by_distance(&self, max_d: usize) -> Vec<f64> {
        let mut out = vec![0.0f64; max_d + 1];
        for (a, &j) in self.js.iter().enumerate() {
            for (b, &k) in self.ks.iter().enumerate() {
                let d = (j - k).unsigned_abs() as usize;
                if d <= max_d {
                    out[d] = out[d].max(self.norms[a][b]);
                }
            }
        }
        out
    }

    /// Fit of `log ‖block‖` against `log ⟨j-k⟩`; the decay exponent is
    /// `-slope`.
    pub fn decay_fit(&self, max_d: usize) -> LineFit {
        let ys = self.by_distance(max_d);
        let xs: Vec<f64> = (0..=max_d).map(|d| (1.0 + (d * d) as f64).sqrt()).collect();
        loglog_fit(&xs, &ys)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("j,k,distance,norm\n");
        for (a, &j) in self.js.iter().enumerate() {
            for (b, &k) in self.ks.iter().enumerate() {
                let _ = writeln!(s, "{j},{k},{},{:e}", (j - k).abs(), self.norms[a][b]);
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_sums_to_one() {
        let g = Grid::new(-4.0, 16.0, 256, 8, 0.125).unwrap();
        let p = PartitionOfUnity::default();
        assert!(p.partition_defect(&g) <= 1e-12);
        assert_eq!(p.psi(1.0), 0.0);
        assert_eq!(p.psi(-1.3), 0.0);
        let e = p.psi_expr();
        let v = e.eval(&crate::expr::Point::default().with_r(0.3)).unwrap().re;
        assert!((v - p.psi(0.3)).abs() < 1e-15);
    }

    #[test]
    fn identity_blocks() {
        let g = Grid::new(-4.0, 16.0, 64, 8, 0.125).unwrap();
        let op = QuantizedOp::new(&g, &Expr::one(), 1.0).unwrap();
        let p = PartitionOfUnity::default();
        let t = block_norm_table(&op, &p, &[2, 3, 4], &[2, 3, 4, 5], 2, 8, 3).unwrap();
        assert_eq!(t.norms[0][2], 0.0);
        assert_eq!(t.norms[0][3], 0.0);
        let sup = (0..g.n_r).map(|i| p.psi(g.r(i) - 3.0)).fold(0.0, f64::max);
        assert!(t.norms[1][1] <= sup * sup + 1e-9);
        assert!(t.to_csv().lines().count() == 13);
    }

    #[test]
    fn escaping_support_is_rejected() {
        let g = Grid::new(0.0, 4.0, 16, 8, 0.5).unwrap();
        let op = QuantizedOp::new(&g, &Expr::one(), 1.0).unwrap();
        let e = block_norm_table(&op, &PartitionOfUnity::default(), &[0], &[1], 1, 1, 0);
        assert!(matches!(e, Err(Error::SupportEscapesWindow(_))));
    }
}

use super::op::DiffOp;
use crate::error::Result;
use crate::expr::{Point, C64};
use crate::symbols::{bracket, sample_inf, sample_sup, SampleWindow};

/// Sampled constants in `c_lower ⟨ρ⊕f⁻¹η⟩^m ≤ |z-σ| ≤ c_upper ⟨ρ⊕f⁻¹η⟩^m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticityReport {
    pub z: C64,
    pub c_lower: f64,
    pub c_upper: f64,
    pub worst: Point,
}

impl EllipticityReport {
    pub fn is_elliptic(&self) -> bool {
        self.c_lower > 1e-14
    }
}

pub fn check_elliptic(op: &DiffOp, z: C64, window: &SampleWindow) -> Result<EllipticityReport> {
    let sigma = op.principal_symbol();
    let m = op.order() as f64;
    let exprs = [sigma.expr.clone()];
    let score =
        |s: &crate::symbols::Sample| (z - s.values[0]).norm() * bracket(s.point.rho, s.point.eta / s.f).powf(-m);
    let base = Point::default().with_z(z);
    let (c_lower, worst) = sample_inf(window, op.weight(), base, &exprs, score)?;
    let (c_upper, _) = sample_sup(window, op.weight(), base, &exprs, score)?;
    Ok(EllipticityReport { z, c_lower, c_upper, worst })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffops::warped_laplacian;
    use crate::expr::Expr;
    use crate::symbols::WeightFunction;

    #[test]
    fn laplacian_at_minus_one() {
        for w in [WeightFunction::one(), WeightFunction::sqrt1pr2(), WeightFunction::exp_windowed()] {
            let p = warped_laplacian(&w, &Expr::one()).unwrap();
            let rep = check_elliptic(&p, C64::new(-1.0, 0.0), &SampleWindow::new((0.0, 8.0))).unwrap();
            // |−1−s| = 1+s and ⟨·⟩² = 1+s, so both constants are 1.
            assert!((rep.c_lower - 1.0).abs() < 1e-12 && (rep.c_upper - 1.0).abs() < 1e-12, "{rep:?}");
            assert!(rep.is_elliptic());
        }
    }

    #[test]
    fn z_in_range_is_not_elliptic() {
        let p = warped_laplacian(&WeightFunction::one(), &Expr::one()).unwrap();
        let win = SampleWindow::new((0.0, 8.0)).with_p(8.0, 33);
        let rep = check_elliptic(&p, C64::new(1.0, 0.0), &win).unwrap();
        assert!(!rep.is_elliptic(), "{rep:?}");
    }

    #[test]
    fn zero_operator_of_order_zero() {
        let p = DiffOp::new(0, WeightFunction::one());
        let rep = check_elliptic(&p, C64::new(1.0, 0.0), &SampleWindow::default()).unwrap();
        assert_eq!((rep.c_lower, rep.c_upper), (1.0, 1.0));
    }
}

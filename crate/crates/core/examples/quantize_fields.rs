//! Quantize symbols on a grid over `[r0, r0 + L) x S^1` and check the
//! basic relations between the left, right and Weyl quantizations.

use endcalc::quantize::{hbar_d_r, random_test_field, Grid, QuantizedOp};
use endcalc::{Expr, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let h = 0.125;
    let grid = Grid::new(-4.0, 8.0, 128, 16, h)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let u = random_test_field(&grid, 0.0, 0.7, &mut rng).band_limit();
    let v = random_test_field(&grid, 0.4, 0.7, &mut rng).band_limit();

    let a = Expr::r() * Expr::rho();
    let mut d = QuantizedOp::new(&grid, &a, 1.0)?.apply(&u)?;
    d.axpy(C64::new(-1.0, 0.0), &QuantizedOp::new(&grid, &a, 0.0)?.apply(&u)?)?;
    d.axpy(C64::new(0.0, -h), &u)?;
    println!("|(Op1 - Op0)(r rho) u - i hbar u| / |u| = {:.2e}", d.l2_norm() / u.l2_norm());

    let mut left = QuantizedOp::new(&grid, &a, 1.0)?.apply(&u)?;
    left.axpy(C64::new(-1.0, 0.0), &hbar_d_r(&u).multiply(|r, _| C64::new(r, 0.0)))?;
    println!("|Op1(r rho) u - r hbar D_r u| / |u|       = {:.2e}", left.l2_norm() / u.l2_norm());

    let b = (-(Expr::rho().pow(2)) / 2.0).exp() * (Expr::r().sin() * 0.5 + 1.0) + Expr::eta() * Expr::r().cos();
    for t in [0.0, 0.5, 1.0] {
        let op = QuantizedOp::new(&grid, &b, t)?;
        let dual = QuantizedOp::new(&grid, &b.conj(), 1.0 - t)?;
        let lhs = op.apply(&u)?.inner(&v)?;
        let rhs = u.inner(&dual.apply(&v)?)?;
        println!("t = {t}: <Op^t(b) u, v> - <u, Op^(1-t)(conj b) v> = {:.2e}", (lhs - rhs).norm());
    }
    Ok(())
}

//! The Laplacian of `dr^2 + f(r)^2 h(theta) dtheta^2` in the normalized
//! frame: its principal symbol, an ellipticity check and the action on a
//! field.

use endcalc::diffops::{check_elliptic, warped_laplacian, GridDiffOp};
use endcalc::quantize::{random_test_field, Grid, LinearOperator};
use endcalc::symbols::{SampleWindow, WeightFunction};
use endcalc::{Expr, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let w = WeightFunction::sqrt1pr2();
    let h = Expr::theta().cos() + 2.0;
    let p = warped_laplacian(&w, &h)?;
    println!("{}", p.to_text());
    println!("principal symbol: {}", p.principal_symbol().expr);
    for z in [C64::new(-1.0, 0.0), C64::new(0.0, 1.0), C64::new(4.0, 0.0)] {
        match check_elliptic(&p, z, &SampleWindow::new((-4.0, 4.0))) {
            Ok(rep) => {
                println!("z = {z}: elliptic {}, c in [{:.3}, {:.3}]", rep.is_elliptic(), rep.c_lower, rep.c_upper)
            }
            Err(e) => println!("z = {z}: {e}"),
        }
    }
    let grid = Grid::new(-4.0, 8.0, 128, 32, 0.125)?;
    let u = random_test_field(&grid, 0.0, 0.8, &mut ChaCha8Rng::seed_from_u64(2)).band_limit();
    let gp = GridDiffOp::new(&p, &grid)?;
    let pu = gp.apply(&u)?;
    let sym = (pu.inner(&u)? - u.inner(&pu)?).norm() / pu.l2_norm() / u.l2_norm();
    println!("<Pu, u> = {:.6}, symmetry defect {sym:.1e}", pu.inner(&u)?.re);
    Ok(())
}

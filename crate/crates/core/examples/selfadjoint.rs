//! Symmetry of the warped Laplacian, the parametrix remainders at
//! `z = +-i`, the Neumann series built on them and the cutoff commutator.

use endcalc::diffops::warped_laplacian;
use endcalc::parametrix::{build_parametrix, cutoff_commutator, selfadjoint_pipeline, SelfAdjointOptions};
use endcalc::quantize::Grid;
use endcalc::symbols::WeightFunction;
use endcalc::{Expr, C64};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = warped_laplacian(&WeightFunction::sqrt1pr2(), &Expr::one())?;
    let opts = SelfAdjointOptions { grid: (-5.0, 10.0, 128, 64), k_max: 6, ..Default::default() };
    let rep = selfadjoint_pipeline(&p, &[0.125, 0.0625], &opts)?;
    println!("symmetry defect {:.1e}", rep.symmetry_defect);
    for (i, h) in rep.hbar.iter().enumerate() {
        println!("hbar = {h}: |R(+i)| ~ {:.3e}, |R(-i)| ~ {:.3e}", rep.norm_plus[i], rep.norm_minus[i]);
    }
    println!("hbar0 = {:?}", rep.hbar0);
    for (k, r) in rep.neumann_plus.iter().enumerate() {
        println!("Neumann K = {k}: {r:.2e}");
    }
    let par = build_parametrix(&p, C64::new(0.0, 1.0), 1)?;
    let grid = Grid::new(-24.0, 48.0, 512, 16, 0.125)?;
    let com = cutoff_commutator(&p, &par, &grid, &[0.4, 0.2, 0.1], 2, 12, 3)?;
    println!("commutator norms {:.3?}, slope {:.2}", com.norm, com.slope);
    Ok(())
}

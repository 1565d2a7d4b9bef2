//! Build the resolvent parametrix of the warped Laplacian to increasing
//! depth and watch the residual of `(z - P) Op1(b) - 1` improve with hbar.

use endcalc::diffops::warped_laplacian;
use endcalc::parametrix::{build_parametrix, random_waves, residual_report, semiclassical_field};
use endcalc::quantize::{Grid, HalfDensityField};
use endcalc::symbols::WeightFunction;
use endcalc::{Expr, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = warped_laplacian(&WeightFunction::sqrt1pr2(), &Expr::one())?;
    let z = C64::new(-1.0, 0.0);
    let groups = [0.125, 0.0625, 0.03125]
        .iter()
        .map(|&h| {
            let g = Grid::new(-5.0, 10.0, 256, 64, h)?;
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            (0..2).map(|_| semiclassical_field(&g, 0.5, 0.8, &random_waves(0.5, &mut rng))).collect()
        })
        .collect::<Result<Vec<Vec<HalfDensityField>>, _>>()?;
    for n in 0..=2 {
        let par = build_parametrix(&p, z, n)?;
        let rep = residual_report(&p, &par.series, &groups, 1.0)?;
        println!("N = {n}: {} terms, slope {:.2}", par.depth() + 1, rep.slope);
        print!("{}", rep.to_csv());
    }
    Ok(())
}

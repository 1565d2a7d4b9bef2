//! Changing the angular chart by a Mobius-type arc map transforms `Op1(a)`
//! into `Op1` of the transferred symbol up to an `O(hbar)` error.

use endcalc::expr::Bump;
use endcalc::quantize::{chart_conjugate, ArcField, EtaQuadrature};
use endcalc::symbols::{chart_transfer_leading, AngularDiffeo, Symbol, WeightFunction};
use endcalc::{Expr, C64};
use std::sync::Arc;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bump = |e: Expr| Expr::apply_fn(Arc::new(Bump::new(0)), e);
    let a = Symbol::new(
        bump(Expr::theta() / 1.4) * (-(Expr::eta().pow(2)) / 4.0).exp() * (Expr::eta() + 1.0),
        0.0,
        WeightFunction::one(),
    );
    let map = AngularDiffeo::mobius(0.2, (-1.5, 1.5));
    println!("transferred symbol: {}", chart_transfer_leading(&a, &map)?.expr);
    let mut prev: Option<f64> = None;
    for h in [0.125, 0.0625, 0.03125] {
        let eq = EtaQuadrature { eta_max: 6.0, n_eta: 512, hbar: h };
        let v = ArcField::from_fn((-2.0, 1.1), 1024, |x| C64::from_polar((-(x + 0.6).powi(2) / 0.08).exp(), x / h));
        let (lhs, rhs) = chart_conjugate(&a, &map, &v, &eq)?;
        let d = lhs.distance(&rhs)? / v.l2_norm();
        match prev {
            Some(p) => println!("hbar = {h:<8} defect {d:.3e}  ratio {:.3}", d / p),
            None => println!("hbar = {h:<8} defect {d:.3e}"),
        }
        prev = Some(d);
    }
    Ok(())
}

//! The angular dilation `Theta^t_jk` conjugates a block of `Op^t(a)` into
//! the same block of the dilated symbol.

use endcalc::quantize::{
    scaling_conjugate, MomentumQuadrature, PartitionOfUnity, QuadratureWindow, ScalingMap, WindowField,
};
use endcalc::symbols::{Symbol, WeightFunction};
use endcalc::{Expr, C64};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let w = WeightFunction::exp_windowed();
    let window = QuadratureWindow::new((0.5, 3.5), 24, (-2.0, 2.0), 32)?;
    let mq = MomentumQuadrature { rho_max: 6.0, n_rho: 24, eta_max: 6.0, n_eta: 32, hbar: 0.5 };
    let base = (-(Expr::rho().pow(2)) - Expr::eta().pow(2)).exp() * (Expr::r().sin() * 0.5 + 1.0);
    for (j, k, t) in [(2, 2, 1.0), (1, 3, 0.0), (2, 3, 0.5)] {
        let a = if t == 0.5 { base.clone() } else { base.clone() * (Expr::theta().cos() * 0.3 + 1.0) };
        let u = WindowField::from_fn(window, |r, th| {
            C64::from_polar((-(r - k as f64).powi(2) - th * th / 0.18).exp(), 1.5 * th + 0.5 * r)
        });
        let map = ScalingMap::new(&w, j, k, t)?;
        let (lhs, rhs) =
            scaling_conjugate(&Symbol::new(a, 0.0, w.clone()), &map, &PartitionOfUnity::default(), &u, &mq)?;
        println!(
            "(j, k, t) = ({j}, {k}, {t}): F = {:8.3}, |lhs - rhs| / |u| = {:.1e}",
            map.factor,
            lhs.distance(&rhs)? / u.l2_norm()
        );
    }
    Ok(())
}

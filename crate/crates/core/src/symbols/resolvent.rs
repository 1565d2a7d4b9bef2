use super::seminorm::{bracket, sample_inf, sample_sup, SampleWindow};
use super::Symbol;
use crate::error::{Error, Result};
use crate::expr::{Expr, Point, C64};

/// Sampled value of `Δ_N(z) = Σ_{l≤N} sup ⟨ρ⊕f⁻¹η⟩^{m(l+1)} / |z-σ|^{l+1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolventBound {
    pub z: C64,
    pub n: usize,
    pub delta_n: f64,
}

/// Smallest sampled `|z-σ| ⟨ρ⊕f⁻¹η⟩^{-m}` and where it occurs.
pub fn ellipticity_margin(sigma: &Symbol, z: C64, window: &SampleWindow) -> Result<(f64, Point)> {
    let m = sigma.order;
    sample_inf(window, &sigma.weight, Point::default().with_z(z), std::slice::from_ref(&sigma.expr), |s| {
        (z - s.values[0]).norm() * bracket(s.point.rho, s.point.eta / s.f).powf(-m)
    })
}

fn require_margin(sigma: &Symbol, z: C64, window: &SampleWindow) -> Result<f64> {
    let (margin, p) = ellipticity_margin(sigma, z, window)?;
    if !(margin > 1e-12) {
        return Err(Error::ZTooClose { margin, r: p.r, theta: p.theta, rho: p.rho, eta: p.eta });
    }
    Ok(margin)
}

/// The symbol `(z-σ)⁻¹` of order `-m`, after a sampled margin check.
pub fn resolvent_symbol(sigma: &Symbol, z: C64, window: &SampleWindow) -> Result<Symbol> {
    require_margin(sigma, z, window)?;
    let expr = (Expr::constant(z) - &sigma.expr).recip();
    Ok(Symbol::new(expr, -sigma.order, sigma.weight.clone()))
}

pub fn delta_n(sigma: &Symbol, z: C64, n: usize, window: &SampleWindow) -> Result<ResolventBound> {
    require_margin(sigma, z, window)?;
    let m = sigma.order;
    let mut total = 0.0;
    for l in 0..=n {
        let k = (l + 1) as f64;
        let (s, _) =
            sample_sup(window, &sigma.weight, Point::default().with_z(z), std::slice::from_ref(&sigma.expr), |s| {
                bracket(s.point.rho, s.point.eta / s.f).powf(m * k) / (z - s.values[0]).norm().powf(k)
            })?;
        total += s;
    }
    Ok(ResolventBound { z, n, delta_n: total })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::{seminorm_estimate, WeightFunction};

    fn laplace(w: WeightFunction) -> Symbol {
        let e = Expr::rho().pow(2) + (Expr::eta() * w.inv()).pow(2);
        Symbol::new(e, 2.0, w)
    }

    fn win() -> SampleWindow {
        SampleWindow::new((0.0, 3.0)).with_r_samples(4).with_theta_samples(2)
    }

    #[test]
    fn origin_value_and_margin() {
        let s = laplace(WeightFunction::exp_windowed());
        let b = resolvent_symbol(&s, C64::new(-1.0, 0.0), &win()).unwrap();
        assert_eq!(b.expr.eval(&Point::default()).unwrap(), C64::new(-1.0, 0.0));
        assert_eq!(b.order, -2.0);
        let (m, _) = ellipticity_margin(&s, C64::new(-1.0, 0.0), &win()).unwrap();
        assert!((m - 1.0).abs() < 1e-12);
    }

    #[test]
    fn imaginary_z_has_bounded_seminorm() {
        let s = Symbol::new(Expr::rho().pow(2), 2.0, WeightFunction::one());
        let b = resolvent_symbol(&s, C64::new(0.0, 1.0), &win()).unwrap();
        let v = seminorm_estimate(&b, 2, &win()).unwrap();
        assert!(v.is_finite() && v > 0.0);
    }

    #[test]
    fn z_in_range_is_rejected() {
        let s = laplace(WeightFunction::one());
        let err = resolvent_symbol(&s, C64::new(1.0, 0.0), &win()).unwrap_err();
        assert!(matches!(err, Error::ZTooClose { .. }));
    }

    #[test]
    fn delta_zero_exact_cancellation() {
        let s = Symbol::new(Expr::rho().pow(2), 2.0, WeightFunction::one());
        let d = delta_n(&s, C64::new(-1.0, 0.0), 0, &win()).unwrap();
        assert!((d.delta_n - 1.0).abs() < 1e-12);
    }

    #[test]
    fn delta_approaches_one_from_below() {
        let s = Symbol::new(Expr::rho().pow(2), 2.0, WeightFunction::one());
        let d = delta_n(&s, C64::new(-4.0, 0.0), 0, &win()).unwrap();
        let oracle = (1.0 + 64.0) / (4.0 + 64.0);
        assert!((d.delta_n - oracle).abs() < 1e-12 && d.delta_n >= 0.9);
        let d1 = delta_n(&s, C64::new(-4.0, 0.0), 1, &win()).unwrap();
        let d2 = delta_n(&s, C64::new(-4.0, 0.0), 2, &win()).unwrap();
        assert!(d2.delta_n >= d1.delta_n && d1.delta_n >= d.delta_n);
    }
}

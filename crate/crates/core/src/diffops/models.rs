use super::op::{DiffOp, MultiIndex};
use crate::error::{Error, Result};
use crate::expr::{Expr, Tape, Var, C64};
use crate::symbols::WeightFunction;

const I_INV: C64 = C64::new(0.0, -1.0);

/// `i⁻¹ħ L_X` on half-densities for `X = X₁∂_r + f⁻¹Y₁∂_θ`.
pub fn lie_derivative(x1: &Expr, y1: &Expr, weight: &WeightFunction) -> Result<DiffOp> {
    let finv = weight.inv();
    let div = x1.diff(Var::R)? + &finv * &y1.diff(Var::Theta)?;
    let op = DiffOp::new(1, weight.clone())
        .with_term(MultiIndex::new(1, 0), 0, x1.clone())?
        .with_term(MultiIndex::new(0, 1), 0, y1.clone())?
        .with_term(MultiIndex::new(0, 0), 1, div.scale(I_INV * 0.5))?;
    Ok(op)
}

/// `V_φ = -¼(log f)'² - ½(log f)'' + f⁻² V′(θ)` with
/// `V′ = -¼(h⁻²h'' - (7/4)h⁻³h'²)` for the metric `dr² + f²h dθ²`.
pub fn warped_potential(weight: &WeightFunction, h: &Expr) -> Result<Expr> {
    let l = weight.log();
    let l1 = l.diff(Var::R)?;
    let l2 = l1.diff(Var::R)?;
    let h1 = h.diff(Var::Theta)?;
    let h2 = h1.diff(Var::Theta)?;
    let vp = (h.pow(-2) * h2 - h.pow(-3) * h1.pow(2) * 1.75) * -0.25;
    Ok((l1.pow(2) * -0.25 - l2 * 0.5 + weight.inv().pow(2) * vp).normalize())
}

/// `-ħ²Δ_g` on half-densities for `g = dr² + f(r)²h(θ)dθ²`:
/// `(ħD_r)² + h⁻¹(f⁻¹ħD_θ)² + ħ(-i f⁻¹ ∂_θh⁻¹)(f⁻¹ħD_θ) - ħ²V_φ`.
pub fn warped_laplacian(weight: &WeightFunction, h: &Expr) -> Result<DiffOp> {
    if h.variables().iter().any(|v| *v != Var::Theta) {
        return Err(Error::InvalidArgument("h must depend on theta only".into()));
    }
    let tape = Tape::compile(h);
    for k in 0..256 {
        let th = std::f64::consts::TAU * k as f64 / 256.0;
        let mut vars = [C64::new(0.0, 0.0); 8];
        vars[Var::Theta.index()] = th.into();
        let v = tape.eval_vars(&vars, &mut Vec::new())?;
        if !(v.re > 0.0 && v.im.abs() <= 1e-14 * v.re) {
            return Err(Error::CoefficientCheck(format!("metric factor h is not positive at theta = {th}")));
        }
    }
    let hinv = h.recip();
    let first = (weight.inv() * hinv.diff(Var::Theta)?).scale(I_INV);
    DiffOp::new(2, weight.clone())
        .with_term(MultiIndex::new(2, 0), 0, Expr::one())?
        .with_term(MultiIndex::new(0, 2), 0, hinv)?
        .with_term(MultiIndex::new(0, 1), 1, first.normalize())?
        .with_term(MultiIndex::new(0, 0), 2, -warped_potential(weight, h)?)
}

/// Largest ratio, over `r` in the window, between the angular metric
/// `f(r)⁻²g_θθ(r, θ)` and its value at the window start. Warped metrics give 1.
pub fn metric_equivalence_ratio(
    weight: &WeightFunction,
    g_theta: &Expr,
    window: (f64, f64),
    samples: usize,
) -> Result<f64> {
    let e = g_theta * &weight.inv().pow(2);
    let tape = Tape::compile(&e);
    let n = samples.max(2);
    let at = |r: f64, th: f64| -> Result<f64> {
        let mut vars = [C64::new(0.0, 0.0); 8];
        vars[Var::R.index()] = r.into();
        vars[Var::Theta.index()] = th.into();
        Ok(tape.eval_vars(&vars, &mut Vec::new())?.re)
    };
    let mut worst: f64 = 1.0;
    for k in 0..n {
        let th = std::f64::consts::TAU * k as f64 / n as f64;
        let base = at(window.0, th)?;
        for i in 0..n {
            let r = window.0 + (window.1 - window.0) * i as f64 / (n - 1) as f64;
            let q = at(r, th)? / base;
            if !(q > 0.0) {
                return Err(Error::CoefficientCheck(format!("angular metric degenerates at r = {r}, theta = {th}")));
            }
            worst = worst.max(q).max(1.0 / q);
        }
    }
    Ok(worst)
}

/// Fails when [`metric_equivalence_ratio`] exceeds `factor`.
pub fn check_metric_equivalence(
    weight: &WeightFunction,
    g_theta: &Expr,
    window: (f64, f64),
    factor: f64,
) -> Result<()> {
    let q = metric_equivalence_ratio(weight, g_theta, window, 33)?;
    if q > factor {
        return Err(Error::CoefficientCheck(format!("angular metric ratio {q:.3} exceeds {factor}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffops::{apply, GridDiffOp};
    use crate::expr::{Bump, Point, ScalarFn};
    use crate::quantize::{Grid, HalfDensityField, LinearOperator};
    use std::sync::Arc;

    #[test]
    fn flat_laplacian_has_no_potential() {
        let p = warped_laplacian(&WeightFunction::one(), &Expr::one()).unwrap();
        assert!(p.coeff(MultiIndex::new(0, 0), 2).is_zero());
        assert!(!p.has_layer(1) && !p.has_layer(2));
        assert_eq!(p.principal_symbol().expr, Expr::rho().pow(2) + Expr::eta().pow(2));
    }

    #[test]
    fn exponential_weight_potential_is_minus_quarter() {
        let v = warped_potential(&WeightFunction::exp_windowed(), &Expr::one()).unwrap();
        assert_eq!(v.as_const(), Some(C64::new(-0.25, 0.0)));
    }

    #[test]
    fn hbar_layers_for_nontrivial_metric() {
        let h = Expr::theta().cos() * 0.3 + 1.0;
        let p = warped_laplacian(&WeightFunction::sqrt1pr2(), &h).unwrap();
        assert!(p.has_layer(0) && p.has_layer(1) && p.has_layer(2));
        assert_eq!(p.max_hbar_degree(), 2);
        let p = warped_laplacian(&WeightFunction::sqrt1pr2(), &Expr::one()).unwrap();
        assert!(!p.has_layer(1) && p.has_layer(2));
    }

    #[test]
    fn rejects_nonpositive_metric() {
        let h = Expr::theta().cos();
        assert!(matches!(warped_laplacian(&WeightFunction::one(), &h), Err(Error::CoefficientCheck(_))));
    }

    #[test]
    fn lie_derivative_coefficients() {
        let w = WeightFunction::one();
        let p = lie_derivative(&Expr::one(), &Expr::zero(), &w).unwrap();
        assert_eq!(p.coeff(MultiIndex::new(1, 0), 0), Expr::one());
        assert!(!p.has_layer(1));

        let b = Expr::apply_fn(Arc::new(Bump::new(0)), Expr::r());
        let x1 = Expr::r() * &b;
        let p = lie_derivative(&x1, &Expr::zero(), &w).unwrap();
        let c = p.coeff(MultiIndex::new(0, 0), 1);
        // Oracle: (i⁻¹/2) d/dr (r b(r)) by central differences.
        let g = |r: f64| r * Bump::new(0).eval(r).unwrap();
        for &r in &[-0.6, -0.1, 0.3, 0.7] {
            let s = 1e-5;
            let fd = (g(r + s) - g(r - s)) / (2.0 * s);
            let v = c.eval(&Point::default().with_r(r)).unwrap();
            assert!((v - C64::new(0.0, -0.5 * fd)).norm() < 1e-8, "{r}");
        }
    }

    #[test]
    fn principal_symbols_of_models() {
        let w = WeightFunction::sqrt1pr2();
        let x1 = Expr::r().sin();
        let y1 = Expr::theta().cos();
        let s = lie_derivative(&x1, &y1, &w).unwrap().principal_symbol();
        let pt = Point::default().with_r(0.7).with_theta(1.1).with_rho(0.4).with_eta(-2.0);
        let oracle = 0.7f64.sin() * 0.4 + 1.1f64.cos() * -2.0 / 0.7f64.hypot(1.0);
        assert!((s.expr.eval(&pt).unwrap().re - oracle).abs() < 1e-14);
        let s = warped_laplacian(&w, &Expr::one()).unwrap().principal_symbol();
        let oracle = 0.16 + 4.0 / (1.0 + 0.49);
        assert!((s.expr.eval(&pt).unwrap().re - oracle).abs() < 1e-14);
    }

    #[test]
    fn lie_derivative_is_symmetric() {
        let g = Grid::new(-6.0, 12.0, 64, 32, 0.25).unwrap();
        let w = WeightFunction::sqrt1pr2();
        let p = lie_derivative(&(Expr::r() * 0.5).sin(), &(Expr::theta().cos() * 0.5 + 1.0), &w).unwrap();
        let op = GridDiffOp::new(&p, &g).unwrap();
        let u = HalfDensityField::from_fn(&g, |r, th| C64::from_polar((-r * r / 2.0).exp(), th)).band_limit();
        let v =
            HalfDensityField::from_fn(&g, |r, th| C64::new((-(r - 1.0).powi(2)).exp() * th.sin(), 0.0)).band_limit();
        let d = (op.apply(&u).unwrap().inner(&v).unwrap() - u.inner(&op.apply(&v).unwrap()).unwrap()).norm();
        assert!(d <= 1e-8 * u.l2_norm() * v.l2_norm(), "{d}");
    }

    #[test]
    fn warped_laplacian_is_symmetric() {
        let g = Grid::new(-6.0, 12.0, 64, 64, 0.25).unwrap();
        let h = Expr::theta().cos() * 0.3 + 1.0;
        let p = warped_laplacian(&WeightFunction::sqrt1pr2(), &h).unwrap();
        let op = GridDiffOp::new(&p, &g).unwrap();
        let u = HalfDensityField::from_fn(&g, |r, th| C64::from_polar((-r * r / 2.0).exp(), 2.0 * th)).band_limit();
        let v =
            HalfDensityField::from_fn(&g, |r, th| C64::new((-(r - 1.0).powi(2)).exp() * th.sin(), 0.0)).band_limit();
        let d = (op.apply(&u).unwrap().inner(&v).unwrap() - u.inner(&op.apply(&v).unwrap()).unwrap()).norm();
        assert!(d <= 1e-8 * u.l2_norm() * v.l2_norm(), "{d}");
    }

    #[test]
    fn warped_laplacian_matches_finite_differences() {
        // Oracle: -ħ²[∂_r² v + f⁻²∂_θ(h⁻¹∂_θ v) + V_φ v] with 4th-order stencils.
        let n = 128;
        let g = Grid::new(-6.0, 12.0, n, n, 0.5).unwrap();
        let w = WeightFunction::sqrt1pr2();
        let h = Expr::theta().cos() * 0.3 + 1.0;
        let p = warped_laplacian(&w, &h).unwrap();
        let vpot = warped_potential(&w, &h).unwrap();
        let bump = |r: f64, th: f64| (-r * r / 2.0).exp() * (1.0 + 0.5 * th.cos() + 0.2 * (2.0 * th).sin());
        let u = HalfDensityField::from_fn(&g, |r, th| C64::new(bump(r, th), 0.0));
        let pu = apply(&p, &u).unwrap();
        let hb = g.hbar;
        let hv = |th: f64| 1.0 + 0.3 * th.cos();
        let (dr, dt) = (g.dr(), g.dtheta());
        let d2 = |f: &dyn Fn(f64) -> f64, x: f64, s: f64| {
            (-f(x + 2.0 * s) + 16.0 * f(x + s) - 30.0 * f(x) + 16.0 * f(x - s) - f(x - 2.0 * s)) / (12.0 * s * s)
        };
        let d1 = |f: &dyn Fn(f64) -> f64, x: f64, s: f64| {
            (-f(x + 2.0 * s) + 8.0 * f(x + s) - 8.0 * f(x - s) + f(x - 2.0 * s)) / (12.0 * s)
        };
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..n {
            let r = g.r(i);
            let f = w.eval(r);
            for k in 0..n {
                let th = g.theta(k);
                let urr = d2(&|x| bump(x, th), r, dr);
                let flux = |t: f64| d1(&|y| bump(r, y), t, dt) / hv(t);
                let ang = d1(&flux, th, dt);
                let v = vpot.eval(&Point::default().with_r(r).with_theta(th)).unwrap().re;
                let oracle = -hb * hb * (urr + ang / (f * f) + v * bump(r, th));
                num += (pu.get(i, k) - oracle).norm_sqr();
                den += oracle * oracle;
            }
        }
        let rel = (num / den).sqrt();
        assert!(rel <= 1e-4, "{rel}");
    }

    #[test]
    fn metric_equivalence() {
        let w = WeightFunction::sqrt1pr2();
        let warped = w.expr().pow(2) * (Expr::theta().cos() * 0.3 + 1.0);
        assert!((metric_equivalence_ratio(&w, &warped, (0.0, 8.0), 17).unwrap() - 1.0).abs() < 1e-12);
        let skewed = w.expr().pow(2) * (Expr::r() * 0.5).exp();
        assert!(check_metric_equivalence(&w, &skewed, (0.0, 8.0), 10.0).is_err());
    }
}

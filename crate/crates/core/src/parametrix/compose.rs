use crate::diffops::DiffOp;
use crate::error::Result;
use crate::expr::{Expr, Var, C64};
use crate::symbols::SymbolSeries;
use std::collections::HashMap;

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `(-i)^k`.
fn minus_i_pow(k: u32) -> C64 {
    [C64::new(1.0, 0.0), C64::new(0.0, -1.0), C64::new(-1.0, 0.0), C64::new(0.0, 1.0)][(k % 4) as usize]
}

/// ħ-graded coefficients of `P # a` above the principal layer: entry `k`
/// collects the terms carrying `ħ^k`, with entry 0 left empty.
pub(crate) fn subprincipal_layers(p: &DiffOp, a: &Expr) -> Result<Vec<Expr>> {
    let finv = p.weight().inv();
    let mut derivs: HashMap<(u32, u32), Expr> = HashMap::new();
    let mut layers: Vec<Vec<Expr>> = Vec::new();
    for (alpha, j, coeff) in p.terms() {
        for i in 0..=alpha.r {
            for ip in 0..=alpha.theta {
                let deg = j + (i + ip) as usize;
                if deg == 0 {
                    continue;
                }
                let d = match derivs.get(&(i, ip)) {
                    Some(d) => d.clone(),
                    None => {
                        let d = a.diff_n(Var::R, i as usize)?.diff_n(Var::Theta, ip as usize)?;
                        derivs.insert((i, ip), d.clone());
                        d
                    }
                };
                if d.is_zero() {
                    continue;
                }
                let c = minus_i_pow(i + ip) * binomial(alpha.r, i) * binomial(alpha.theta, ip);
                let term = Expr::mul([
                    Expr::constant(c),
                    coeff.clone(),
                    finv.pow(alpha.theta as i32),
                    Expr::eta().pow((alpha.theta - ip) as i32),
                    Expr::rho().pow((alpha.r - i) as i32),
                    d,
                ]);
                if layers.len() <= deg {
                    layers.resize_with(deg + 1, Vec::new);
                }
                layers[deg].push(term);
            }
        }
    }
    let mut out: Vec<Expr> = layers.into_iter().map(Expr::add).collect();
    if out.is_empty() {
        out.push(Expr::zero());
    }
    Ok(out)
}

/// The exact ħ-expansion of `Σ_α p_α(ħ; q) f^{-α′} (η + ħD_θ)^{α′} (ρ + ħD_r)^{α₀} a`,
/// the full symbol of `P ∘ Op¹(a)`. The ħ⁰ term is `σ(P)·a`.
pub fn compose_diffop_symbol(p: &DiffOp, a: &Expr, z: C64) -> Result<SymbolSeries> {
    let mut terms = subprincipal_layers(p, a)?;
    let top = p.order() as usize + p.max_hbar_degree();
    if terms.len() < top + 1 {
        terms.resize(top + 1, Expr::zero());
    }
    terms[0] = &p.principal_symbol().expr * a;
    let m = p.order() as f64;
    let orders = (0..terms.len()).map(|k| m - k as f64).collect();
    let mut s = SymbolSeries::new(terms, orders, p.weight().clone());
    s.z = Some(z);
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffops::{warped_laplacian, MultiIndex};
    use crate::expr::Point;
    use crate::symbols::WeightFunction;

    fn rho_sq() -> DiffOp {
        DiffOp::new(2, WeightFunction::one()).with_term(MultiIndex::new(2, 0), 0, Expr::one()).unwrap()
    }

    #[test]
    fn r_independent_symbol_has_no_corrections() {
        let a = (Expr::real(-1.0) - Expr::rho().pow(2)).recip();
        let s = compose_diffop_symbol(&rho_sq(), &a, C64::new(-1.0, 0.0)).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.terms[0], Expr::rho().pow(2) * &a);
        assert!(s.terms[1].is_zero() && s.terms[2].is_zero());
    }

    #[test]
    fn binomial_expansion_in_r() {
        // (ρ + ħD_r)² a = ρ² a - 2iħ ρ a′ - ħ² a″
        let a = Expr::r().sin() * Expr::rho();
        let s = compose_diffop_symbol(&rho_sq(), &a, C64::new(-1.0, 0.0)).unwrap();
        let pt = Point::default().with_r(0.7).with_rho(1.3);
        let (sn, cs) = (0.7f64.sin(), 0.7f64.cos());
        let oracle =
            [C64::new(1.3 * 1.3 * 1.3 * sn, 0.0), C64::new(0.0, -2.0 * 1.3 * 1.3 * cs), C64::new(1.3 * sn, 0.0)];
        for (t, o) in s.terms.iter().zip(oracle) {
            assert!((t.eval(&pt).unwrap() - o).norm() < 1e-13);
        }
    }

    #[test]
    fn principal_layer_matches_expanded_sum() {
        let w = WeightFunction::sqrt1pr2();
        let p = warped_laplacian(&w, &(2.0 + Expr::theta().cos())).unwrap();
        let a = (Expr::real(-1.0) - &p.principal_symbol().expr).recip();
        let s = compose_diffop_symbol(&p, &a, C64::new(-1.0, 0.0)).unwrap();
        let pt = Point::default().with_r(0.4).with_theta(1.1).with_rho(0.8).with_eta(-1.7);
        let f = w.eval(0.4);
        let h = 2.0 + 1.1f64.cos();
        let sigma = 0.8 * 0.8 + 1.7 * 1.7 / (f * f * h);
        let oracle = sigma / (-1.0 - sigma);
        assert!((s.terms[0].eval(&pt).unwrap().re - oracle).abs() < 1e-13);
    }
}

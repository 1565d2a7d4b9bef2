use super::compose::subprincipal_layers;
use crate::diffops::{check_elliptic, DiffOp};
use crate::error::{Error, Result};
use crate::expr::{Expr, C64};
use crate::symbols::{SampleWindow, SymbolSeries};
use std::collections::HashSet;

pub const DEFAULT_NODE_BUDGET: usize = 200_000;
pub const MAX_DEPTH: usize = 4;

#[derive(Debug, Clone)]
pub struct ParametrixOptions {
    pub window: SampleWindow,
    pub node_budget: usize,
}

impl Default for ParametrixOptions {
    fn default() -> Self {
        ParametrixOptions { window: SampleWindow::new((0.0, 8.0)), node_budget: DEFAULT_NODE_BUDGET }
    }
}

/// `b = Σ_{j≤N} ħ^j b_j` together with the exact residual symbol
/// `(z-P) # b - 1 = Σ_{k>N} ħ^k e_k`.
#[derive(Debug, Clone)]
pub struct Parametrix {
    pub series: SymbolSeries,
    /// `[e_{N+1}, e_{N+2}, …]`.
    pub remainder: Vec<Expr>,
}

impl Parametrix {
    pub fn depth(&self) -> usize {
        self.series.len() - 1
    }

    pub fn leading_remainder(&self) -> &Expr {
        &self.remainder[0]
    }
}

/// `z - σ(P)`, the expression shared by every term of the recursion.
pub(crate) fn shifted_principal(p: &DiffOp, z: C64) -> Expr {
    Expr::constant(z) - &p.principal_symbol().expr
}

fn dag_size(exprs: &[Expr]) -> usize {
    let mut seen = HashSet::new();
    let mut stack: Vec<Expr> = exprs.to_vec();
    while let Some(e) = stack.pop() {
        if seen.insert(e.structural_hash()) {
            stack.extend(e.children());
        }
    }
    seen.len()
}

/// Ħ-coefficients of `Σ_l ħ^l F_l` where `F_l` is a graded list.
fn accumulate(into: &mut Vec<Vec<Expr>>, shift: usize, layers: &[Expr]) {
    for (k, e) in layers.iter().enumerate() {
        if e.is_zero() {
            continue;
        }
        let deg = shift + k;
        if into.len() <= deg {
            into.resize_with(deg + 1, Vec::new);
        }
        into[deg].push(e.clone());
    }
}

pub fn build_parametrix(p: &DiffOp, z: C64, n: usize) -> Result<Parametrix> {
    build_parametrix_with(p, z, n, &ParametrixOptions::default())
}

pub fn build_parametrix_with(p: &DiffOp, z: C64, n: usize, opts: &ParametrixOptions) -> Result<Parametrix> {
    if n > MAX_DEPTH {
        return Err(Error::InvalidArgument(format!("parametrix depth {n} exceeds {MAX_DEPTH}")));
    }
    let report = check_elliptic(p, z, &opts.window)?;
    if !report.is_elliptic() {
        let w = report.worst;
        return Err(Error::ZTooClose { margin: report.c_lower, r: w.r, theta: w.theta, rho: w.rho, eta: w.eta });
    }
    let zs = shifted_principal(p, z);
    let zs_inv = zs.recip();
    let m = p.order() as f64;
    let mut terms = vec![zs_inv.clone()];
    // pending[k]: pieces of P # Σ_l ħ^l b_l at ħ^k, principal layers excluded
    let mut pending: Vec<Vec<Expr>> = Vec::new();
    accumulate(&mut pending, 0, &subprincipal_layers(p, &terms[0])?);
    for j in 1..=n {
        let e = -Expr::add(pending.get(j).cloned().unwrap_or_default());
        let b = Expr::mul([Expr::constant(C64::new(-1.0, 0.0)), e, zs_inv.clone()]);
        terms.push(b);
        if dag_size(&terms) > opts.node_budget {
            return Err(Error::SeriesTooDeep { achieved: j - 1, budget: opts.node_budget });
        }
        accumulate(&mut pending, j, &subprincipal_layers(p, &terms[j])?);
    }
    let remainder: Vec<Expr> = pending.iter().skip(n + 1).map(|pieces| -Expr::add(pieces.iter().cloned())).collect();
    let remainder = if remainder.is_empty() { vec![Expr::zero()] } else { remainder };
    let orders = (0..=n).map(|j| -m - j as f64).collect();
    let mut series = SymbolSeries::new(terms, orders, p.weight().clone());
    series.z = Some(z);
    Ok(Parametrix { series, remainder })
}

/// The ħ-coefficients of `(z - P) # (Σ ħ^l b_l) - 1`, computed afresh from
/// the series. The ħ⁰ layer of `(z - P) # b_l` is `(z - σ(P))·b_l`.
pub fn defect_series(p: &DiffOp, series: &SymbolSeries) -> Result<Vec<Expr>> {
    let z = series.z.ok_or_else(|| Error::InvalidArgument("series carries no z".into()))?;
    let zs = shifted_principal(p, z);
    let mut acc: Vec<Vec<Expr>> = vec![vec![Expr::real(-1.0)]];
    for (l, b) in series.terms.iter().enumerate() {
        let mut layers: Vec<Expr> = subprincipal_layers(p, b)?.into_iter().map(|e| -e).collect();
        layers[0] = &zs * b;
        accumulate(&mut acc, l, &layers);
    }
    Ok(acc.into_iter().map(Expr::add).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffops::{warped_laplacian, MultiIndex};
    use crate::expr::{Point, Var};
    use crate::symbols::{seminorm_estimate, Symbol, WeightFunction};

    fn constant_coeff() -> DiffOp {
        DiffOp::new(2, WeightFunction::one())
            .with_term(MultiIndex::new(2, 0), 0, Expr::one())
            .unwrap()
            .with_term(MultiIndex::new(0, 2), 0, Expr::one())
            .unwrap()
    }

    fn with_potential() -> DiffOp {
        DiffOp::new(2, WeightFunction::one())
            .with_term(MultiIndex::new(2, 0), 0, Expr::one())
            .unwrap()
            .with_term(MultiIndex::new(0, 0), 0, 0.5 * (-Expr::r().pow(2)).exp())
            .unwrap()
    }

    fn minus_one() -> C64 {
        C64::new(-1.0, 0.0)
    }

    #[test]
    fn constant_coefficients_stop_at_b0() {
        let par = build_parametrix(&constant_coeff(), minus_one(), 3).unwrap();
        assert!(par.series.terms[1..].iter().all(Expr::is_zero));
        assert!(par.remainder.iter().all(Expr::is_zero));
        assert_eq!(par.series.orders, vec![-2.0, -3.0, -4.0, -5.0]);
    }

    #[test]
    fn b1_is_minus_e1_over_shifted_symbol() {
        let p = with_potential();
        let par = build_parametrix(&p, minus_one(), 1).unwrap();
        let b0 = &par.series.terms[0];
        let e1 = -crate::parametrix::compose_diffop_symbol(&p, b0, minus_one()).unwrap().terms[1].clone();
        let zs = shifted_principal(&p, minus_one());
        let other = (-(e1 / zs)).normalize();
        assert_eq!(par.series.terms[1].normalize(), other);
        // b₀ = (-1-ρ²-c)⁻¹ so ∂_r b₀ = c′ b₀² and e₁ = 2iρ c′ b₀²
        let pt = Point::default().with_r(0.6).with_rho(0.9);
        let c = 0.5 * (-0.36f64).exp();
        let dc = -2.0 * 0.6 * c;
        let b0v = 1.0 / (-1.0 - 0.81 - c);
        let oracle = C64::new(0.0, 2.0 * 0.9 * dc * b0v * b0v) * b0v;
        assert!((par.series.terms[1].eval(&pt).unwrap() - (-oracle)).norm() < 1e-13);
    }

    #[test]
    fn defect_cancels_structurally() {
        let w = WeightFunction::sqrt1pr2();
        for p in [constant_coeff(), with_potential(), warped_laplacian(&w, &Expr::one()).unwrap()] {
            let par = build_parametrix(&p, minus_one(), 2).unwrap();
            let d = defect_series(&p, &par.series).unwrap();
            for (k, e) in d.iter().enumerate().take(3) {
                assert!(e.normalize().is_zero(), "layer {k}: {e}");
            }
            for (k, e) in par.remainder.iter().enumerate() {
                let other = d.get(3 + k).cloned().unwrap_or_else(Expr::zero);
                let pt = Point::default().with_r(0.3).with_theta(0.2).with_rho(0.7).with_eta(-0.4).with_hbar(0.1);
                assert!((e.eval(&pt).unwrap() - other.eval(&pt).unwrap()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn declared_orders_have_finite_seminorms() {
        let w = WeightFunction::sqrt1pr2();
        let p = warped_laplacian(&w, &Expr::one()).unwrap();
        let par = build_parametrix(&p, minus_one(), 2).unwrap();
        let win = SampleWindow::new((0.0, 4.0)).with_r_samples(5).with_theta_samples(1);
        for (b, m) in par.series.terms.iter().zip(&par.series.orders) {
            let v = seminorm_estimate(&Symbol::new(b.clone(), *m, w.clone()), 1, &win).unwrap();
            assert!(v.is_finite() && v > 0.0, "order {m}: {v}");
        }
    }

    #[test]
    fn rejects_z_in_spectrum_and_overdeep_requests() {
        let p = constant_coeff();
        assert!(matches!(build_parametrix(&p, C64::new(1.0, 0.0), 0), Err(Error::ZTooClose { .. })));
        assert!(build_parametrix(&p, minus_one(), 5).is_err());
    }

    #[test]
    fn node_budget_reports_depth() {
        let p = warped_laplacian(&WeightFunction::sqrt1pr2(), &(2.0 + Expr::theta().cos())).unwrap();
        assert!(build_parametrix(&p, minus_one(), 4).is_ok());
        let opts = ParametrixOptions { node_budget: 150, ..Default::default() };
        match build_parametrix_with(&p, minus_one(), 4, &opts) {
            Err(Error::SeriesTooDeep { achieved, budget }) => assert_eq!((achieved, budget), (2, 150)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn hbar_free_terms() {
        let p = warped_laplacian(&WeightFunction::sqrt1pr2(), &Expr::one()).unwrap();
        let par = build_parametrix(&p, minus_one(), 2).unwrap();
        assert!(par.series.terms.iter().all(|t| !t.depends_on(Var::Hbar)));
    }
}

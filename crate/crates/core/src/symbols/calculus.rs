use super::{Bisymbol, Symbol, SymbolSeries};
use crate::error::{Error, Result};
use crate::expr::{Expr, Var, C64};

fn check_depth(j: usize) -> Result<()> {
    if j > 4 {
        return Err(Error::InvalidArgument(format!("expansion depth {j} exceeds 4")));
    }
    Ok(())
}

fn unprime(e: &Expr) -> Expr {
    e.subst(&[(Var::RPrime, Expr::r()), (Var::ThetaPrime, Expr::theta())])
}

fn prime(e: &Expr) -> Expr {
    e.subst(&[(Var::R, Expr::var(Var::RPrime)), (Var::Theta, Expr::var(Var::ThetaPrime))])
}

fn factorial(j: usize) -> f64 {
    (1..=j).product::<usize>() as f64
}

/// Reduces a bisymbol to a `t`-symbol:
/// `b_j = (i^j / j!) (∂_p · ∂_s)^j a(q + (1-t)s, p, q - ts) |_{s=0}`.
pub fn bisymbol_expansion(a: &Bisymbol, depth: usize) -> Result<SymbolSeries> {
    check_depth(depth)?;
    let t = a.t;
    let step = |e: &Expr| -> Result<Expr> {
        let dr = Expr::add([e.diff(Var::R)? * (1.0 - t), e.diff(Var::RPrime)? * (-t)]);
        let dth = Expr::add([e.diff(Var::Theta)? * (1.0 - t), e.diff(Var::ThetaPrime)? * (-t)]);
        Ok(dr.diff(Var::Rho)? + dth.diff(Var::Eta)?)
    };
    let mut cur = a.expr.clone();
    let mut terms = vec![unprime(&cur)];
    for j in 1..=depth {
        cur = step(&cur)?;
        let c = C64::new(0.0, 1.0).powi(j as i32) / factorial(j);
        terms.push(unprime(&cur).scale(c));
    }
    let orders = (0..=depth).map(|j| a.order - j as f64).collect();
    Ok(SymbolSeries::new(terms, orders, a.weight.clone()))
}

fn sharp(a: &Symbol, chi: &Symbol, unit: C64, depth: usize) -> Result<SymbolSeries> {
    check_depth(depth)?;
    if chi.expr.depends_on(Var::Rho) || chi.expr.depends_on(Var::Eta) {
        return Err(Error::InvalidArgument("multiplier must not depend on (rho, eta)".into()));
    }
    let mut cur = &a.expr * prime(&chi.expr);
    let mut terms = vec![unprime(&cur)];
    for j in 1..=depth {
        cur = cur.diff(Var::RPrime)?.diff(Var::Rho)? + cur.diff(Var::ThetaPrime)?.diff(Var::Eta)?;
        terms.push(unprime(&cur).scale(unit.powi(j as i32) / factorial(j)));
    }
    let m = a.order + chi.order;
    let orders = (0..=depth).map(|j| m - j as f64).collect();
    Ok(SymbolSeries::new(terms, orders, a.weight.clone()))
}

/// Symbol of `χ ∘ Op^t(a)`; term `j` carries `(i(1-t))^j / j!`.
pub fn sharp_left(chi: &Symbol, a: &Symbol, t: f64, depth: usize) -> Result<SymbolSeries> {
    sharp(a, chi, C64::new(0.0, 1.0 - t), depth)
}

/// Symbol of `Op^t(a) ∘ χ`; term `j` carries `(-it)^j / j!`.
pub fn sharp_right(a: &Symbol, chi: &Symbol, t: f64, depth: usize) -> Result<SymbolSeries> {
    sharp(a, chi, C64::new(0.0, -t), depth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::WeightFunction;

    fn sym(e: Expr) -> Symbol {
        Symbol::new(e, 0.0, WeightFunction::one())
    }

    #[test]
    fn left_at_t1_is_product() {
        let chi = sym(Expr::r().sin());
        let a = sym(Expr::rho().pow(3) * Expr::r());
        let s = sharp_left(&chi, &a, 1.0, 4).unwrap();
        assert_eq!(s.terms[0], (&chi.expr * &a.expr));
        assert!(s.terms[1..].iter().all(|e| e.is_zero()));
    }

    #[test]
    fn left_r_rho_at_t0() {
        let s = sharp_left(&sym(Expr::r()), &sym(Expr::rho()), 0.0, 2).unwrap();
        assert_eq!(s.terms[0], Expr::r() * Expr::rho());
        assert_eq!(s.terms[1], Expr::i());
        assert!(s.terms[2].is_zero());
    }

    #[test]
    fn right_rho_r_at_t1() {
        let s = sharp_right(&sym(Expr::rho()), &sym(Expr::r()), 1.0, 2).unwrap();
        assert_eq!(s.terms[0], Expr::r() * Expr::rho());
        assert_eq!(s.terms[1], -Expr::i());
    }

    #[test]
    fn right_at_t0_is_product() {
        let s = sharp_right(&sym(Expr::rho().exp()), &sym(Expr::theta().cos()), 0.0, 3).unwrap();
        assert!(s.terms[1..].iter().all(|e| e.is_zero()));
    }

    #[test]
    fn bisymbol_without_primes_is_unchanged_at_t1() {
        let a = Bisymbol::new(Expr::r().cos() * Expr::rho().pow(2), 2.0, 1.0, WeightFunction::one());
        let s = bisymbol_expansion(&a, 3).unwrap();
        assert_eq!(s.terms[0], a.expr);
        assert!(s.terms[1..].iter().all(|e| e.is_zero()));
    }

    #[test]
    fn bisymbol_of_right_multiplier_matches_sharp_right() {
        let chi = Expr::r().sin() * Expr::theta().cos();
        let s = Expr::rho().pow(2) * Expr::r() + Expr::eta() * Expr::rho();
        let b = Bisymbol::new(&s * prime(&chi), 2.0, 1.0, WeightFunction::one());
        let lhs = bisymbol_expansion(&b, 3).unwrap();
        let rhs = sharp_right(&sym(s), &sym(chi), 1.0, 3).unwrap();
        for j in 0..3 {
            assert_eq!(lhs.terms[j], rhs.terms[j], "term {j}");
        }
    }

    #[test]
    fn multiplier_must_be_momentum_free() {
        assert!(sharp_left(&sym(Expr::rho()), &sym(Expr::one()), 0.5, 1).is_err());
    }
}

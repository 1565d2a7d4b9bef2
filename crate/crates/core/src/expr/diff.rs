use super::{Expr, Node, Var, C64};
use crate::error::{Error, Result};
use std::collections::HashMap;

impl Expr {
    /// Exact partial derivative with respect to `v`.
    pub fn diff(&self, v: Var) -> Result<Expr> {
        let mut memo = HashMap::new();
        diff_rec(self, v, &mut memo)
    }

    /// Repeated partial derivative `∂_v^n`.
    pub fn diff_n(&self, v: Var, n: usize) -> Result<Expr> {
        let mut e = self.clone();
        for _ in 0..n {
            e = e.diff(v)?;
        }
        Ok(e)
    }
}

fn diff_rec(e: &Expr, v: Var, memo: &mut HashMap<usize, Expr>) -> Result<Expr> {
    if !e.depends_on(v) {
        return Ok(Expr::zero());
    }
    if let Some(d) = memo.get(&e.ptr_key()) {
        return Ok(d.clone());
    }
    let d = match e.node() {
        Node::Const(_) => Expr::zero(),
        Node::Var(w) => {
            if *w == v {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Node::Add(xs) => {
            let mut terms = Vec::with_capacity(xs.len());
            for x in xs {
                terms.push(diff_rec(x, v, memo)?);
            }
            Expr::add(terms)
        }
        Node::Mul(xs) => {
            let mut terms = Vec::new();
            for (i, x) in xs.iter().enumerate() {
                let dx = diff_rec(x, v, memo)?;
                if dx.is_zero() {
                    continue;
                }
                let mut fs: Vec<Expr> = Vec::with_capacity(xs.len());
                fs.push(dx);
                fs.extend(xs.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, y)| y.clone()));
                terms.push(Expr::mul(fs));
            }
            Expr::add(terms)
        }
        Node::Pow(b, k) => {
            let db = diff_rec(b, v, memo)?;
            Expr::mul([Expr::real(*k as f64), b.pow(k - 1), db])
        }
        Node::Exp(x) => Expr::mul([e.clone(), diff_rec(x, v, memo)?]),
        Node::Log(x) => Expr::mul([diff_rec(x, v, memo)?, x.recip()]),
        Node::Sin(x) => Expr::mul([x.cos(), diff_rec(x, v, memo)?]),
        Node::Cos(x) => Expr::mul([Expr::constant(C64::new(-1.0, 0.0)), x.sin(), diff_rec(x, v, memo)?]),
        Node::Func(f, x) => {
            let outer = f.derivative(x).ok_or_else(|| Error::MissingDerivativeRule(f.name().to_string()))?;
            Expr::mul([outer, diff_rec(x, v, memo)?])
        }
    };
    memo.insert(e.ptr_key(), d.clone());
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::functions::CustomFn;
    use crate::expr::Point;
    use std::sync::Arc;

    #[test]
    fn polynomial_rule() {
        let e = Expr::rho().pow(2);
        assert_eq!(e.diff(Var::Rho).unwrap(), Expr::rho() * 2.0);
    }

    #[test]
    fn log_of_exp_weight() {
        let e = Expr::r().exp().ln();
        let d = e.diff(Var::R).unwrap();
        assert!(d.is_one(), "{d}");
    }

    #[test]
    fn resolvent_derivative() {
        let s = Expr::z() - Expr::rho().pow(2);
        let d = s.recip().diff(Var::Rho).unwrap();
        let expected = Expr::rho() * 2.0 * s.pow(-2);
        let pt = Point::default().with_rho(0.7).with_z(C64::new(-1.0, 0.0));
        let a = d.eval(&pt).unwrap();
        let b = expected.eval(&pt).unwrap();
        assert!((a - b).norm() < 1e-14);
    }

    #[test]
    fn missing_rule_is_reported() {
        let f = Arc::new(CustomFn::new("kappa", |x| Some(x.tanh())));
        let e = Expr::apply_fn(f, Expr::theta());
        assert_eq!(e.diff(Var::Theta), Err(Error::MissingDerivativeRule("kappa".into())));
        assert!(e.diff(Var::R).unwrap().is_zero());
    }

    #[test]
    fn chain_rule_through_trig() {
        let e = (Expr::theta() * 2.0).sin();
        let d = e.diff(Var::Theta).unwrap();
        let pt = Point::default().with_theta(0.4);
        assert!((d.eval(&pt).unwrap().re - 2.0 * 0.8f64.cos()).abs() < 1e-15);
    }
}

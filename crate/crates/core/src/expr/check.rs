use super::{Bump, Expr, Point, Sqrt1pR2, Tape, Var, C64};
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdReport {
    pub symbolic: C64,
    pub numeric: C64,
    pub rel_err: f64,
}

/// Compares the symbolic derivative with a central difference along `v`.
///
/// `rel_err = |symbolic - numeric| / max(1, |symbolic|)`.
pub fn fd_check(e: &Expr, v: Var, pt: &Point, step: f64) -> Result<FdReport> {
    if !(step > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
    }
    let symbolic = e.diff(v)?.eval(pt)?;
    let tape = Tape::compile(e);
    let shifted = |s: f64| {
        let mut p = *pt;
        if v == Var::Z {
            p.z += C64::new(s, 0.0);
        } else {
            let x = p.get(v).re;
            p.set(v, x + s);
        }
        p
    };
    let numeric = (tape.eval(&shifted(step))? - tape.eval(&shifted(-step))?) / (2.0 * step);
    let rel_err = (symbolic - numeric).norm() / symbolic.norm().max(1.0);
    Ok(FdReport { symbolic, numeric, rel_err })
}

/// A named expression with the variable and point it is checked at.
#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub expr: Expr,
    pub var: Var,
    pub point: Point,
}

/// Twenty expressions that together use every node kind.
pub fn fd_corpus() -> Vec<CorpusEntry> {
    let (r, th, rho, eta, h, z) = (Expr::r(), Expr::theta(), Expr::rho(), Expr::eta(), Expr::hbar(), Expr::z());
    let f = |e: Expr| Expr::apply_fn(Arc::new(Sqrt1pR2), e);
    let bump = |e: Expr| Expr::apply_fn(Arc::new(Bump::new(0)), e);
    let pt = Point::new(0.7, 0.4, 0.9, -0.6, 0.3, C64::new(-1.0, 0.5)).with_r_prime(0.2).with_theta_prime(1.1);
    let entry = |name, expr, var| CorpusEntry { name, expr, var, point: pt };
    vec![
        entry("cubic", rho.pow(3), Var::Rho),
        entry("sin-cos", th.sin() * th.cos(), Var::Theta),
        entry("exp-linear", r.exp() * &rho, Var::R),
        entry("log", (1.0 + r.pow(2)).ln(), Var::R),
        entry("resolvent", (&z - rho.pow(2)).recip(), Var::Rho),
        entry("resolvent-squared", (&z - rho.pow(2) - eta.pow(2)).pow(-2), Var::Eta),
        entry("sqrt1pr2", f(r.clone()), Var::R),
        entry("bump", bump(&r / 2.0), Var::R),
        entry("angular-kinetic", eta.pow(2) * f(r.clone()).pow(-2), Var::R),
        entry("gaussian-mode", (-r.pow(2)).exp() * (3.0 * &th).cos(), Var::Theta),
        entry("hbar-linear", &h * &rho * r.sin(), Var::Hbar),
        entry("log-bracket", (1.0 + rho.pow(2) + eta.pow(2)).ln(), Var::Eta),
        entry("complex-affine", Expr::i() * &rho + r.pow(2), Var::R),
        entry("phase", (Expr::i() * &r * &rho).exp(), Var::Rho),
        entry("cos-gaussian", rho.cos() * (-eta.pow(2)).exp(), Var::Rho),
        entry("warped-angular", (2.0 + th.cos()).recip() * eta.pow(2), Var::Theta),
        entry("complex-log", (&z - rho.pow(2)).ln(), Var::Z),
        entry("trig-powers", r.sin().pow(3) * th.cos().pow(-2), Var::Theta),
        entry("nested", (&r * &th).sin().exp(), Var::R),
        entry(
            "two-point",
            Expr::var(Var::RPrime) * Expr::var(Var::ThetaPrime) * (&r - Expr::var(Var::RPrime)).sin(),
            Var::RPrime,
        ),
    ]
}

#[derive(Debug, Clone)]
pub struct SelfTestReport {
    /// `(name, rel_err)` per corpus entry, step `1e-5`.
    pub fd: Vec<(&'static str, f64)>,
    /// Largest `|∂_a∂_b e - ∂_b∂_a e| / max(1, |∂_a∂_b e|)` over the random points.
    pub mixed_max: f64,
    pub mixed_points: usize,
}

impl SelfTestReport {
    pub fn fd_passes(&self, tol: f64) -> usize {
        self.fd.iter().filter(|(_, e)| *e <= tol).count()
    }
}

/// Runs the finite-difference corpus and compares mixed partials in
/// `(r, θ, ρ, η)` at `points` seeded random points.
pub fn expr_selftest(points: usize, seed: u64) -> Result<SelfTestReport> {
    let corpus = fd_corpus();
    let fd = corpus
        .iter()
        .map(|c| Ok((c.name, fd_check(&c.expr, c.var, &c.point, 1e-5)?.rel_err)))
        .collect::<Result<Vec<_>>>()?;
    let vars = [Var::R, Var::Theta, Var::Rho, Var::Eta];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mixed_max: f64 = 0.0;
    for k in 0..points {
        let c = &corpus[k % corpus.len()];
        let a = vars[rng.gen_range(0..4)];
        let b = vars[rng.gen_range(0..4)];
        let mut pt = c.point;
        for v in vars {
            pt.set(v, rng.gen_range(-1.0..1.0));
        }
        let ab = c.expr.diff(a)?.diff(b)?.eval(&pt)?;
        let ba = c.expr.diff(b)?.diff(a)?.eval(&pt)?;
        mixed_max = mixed_max.max((ab - ba).norm() / ab.norm().max(1.0));
    }
    Ok(SelfTestReport { fd, mixed_max, mixed_points: points })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_covers_every_node_kind() {
        use crate::expr::Node;
        let mut kinds = std::collections::HashSet::new();
        for c in fd_corpus() {
            let mut stack = vec![c.expr.clone()];
            while let Some(e) = stack.pop() {
                kinds.insert(std::mem::discriminant(e.node()));
                stack.extend(e.children());
            }
        }
        let probe = [Node::Const(C64::new(0.0, 0.0))];
        assert!(kinds.contains(&std::mem::discriminant(&probe[0])));
        assert_eq!(kinds.len(), 10);
        assert_eq!(fd_corpus().len(), 20);
    }

    #[test]
    fn selftest_passes() {
        let rep = expr_selftest(100, 5).unwrap();
        assert_eq!(rep.fd_passes(1e-6), 20, "{:?}", rep.fd);
        assert!(rep.mixed_max <= 1e-10, "{}", rep.mixed_max);
    }

    #[test]
    fn cubic() {
        let r = fd_check(&Expr::rho().pow(3), Var::Rho, &Point::default().with_rho(1.0), 1e-5).unwrap();
        assert!(r.rel_err <= 1e-9);
    }

    #[test]
    fn sine() {
        let r = fd_check(&Expr::theta().sin(), Var::Theta, &Point::default().with_theta(0.3), 1e-5).unwrap();
        assert!((r.symbolic.re - 0.3f64.cos()).abs() < 1e-15);
        assert!((r.symbolic.re - 0.9553364891).abs() < 1e-10);
        assert!(r.rel_err <= 1e-9);
    }

    #[test]
    fn squared_resolvent() {
        let e = (Expr::z() - Expr::rho().pow(2)).pow(-2);
        let pt = Point::default().with_rho(0.5).with_z(C64::new(-1.0, 0.0));
        let r = fd_check(&e, Var::Rho, &pt, 1e-5).unwrap();
        assert!(r.rel_err <= 1e-6);
    }

    #[test]
    fn rejects_nonpositive_step() {
        assert!(fd_check(&Expr::r(), Var::R, &Point::default(), 0.0).is_err());
    }

    #[test]
    fn stencil_singularity_propagates() {
        let e = Expr::rho().recip();
        let pt = Point::default().with_rho(1e-6);
        assert!(matches!(fd_check(&e, Var::Rho, &pt, 1e-6), Err(Error::SingularEvaluation { .. })));
    }
}

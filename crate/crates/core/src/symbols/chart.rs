use super::Symbol;
use crate::error::{Error, Result};
use crate::expr::{Expr, Point, Tape, Var};

/// A smooth increasing change of angular coordinate `θ ↦ φ(θ)` on an arc,
/// with its inverse `ψ`. Both are expressions in `θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularDiffeo {
    pub phi: Expr,
    pub psi: Expr,
    pub domain: (f64, f64),
}

impl AngularDiffeo {
    pub fn new(phi: Expr, psi: Expr, domain: (f64, f64)) -> Result<AngularDiffeo> {
        for e in [&phi, &psi] {
            if e.variables().iter().any(|v| *v != Var::Theta) {
                return Err(Error::InvalidArgument("angular map must depend on theta only".into()));
            }
        }
        Ok(AngularDiffeo { phi, psi, domain })
    }

    pub fn identity(domain: (f64, f64)) -> AngularDiffeo {
        AngularDiffeo { phi: Expr::theta(), psi: Expr::theta(), domain }
    }

    /// `θ ↦ cθ`.
    pub fn dilation(c: f64, domain: (f64, f64)) -> AngularDiffeo {
        AngularDiffeo { phi: Expr::theta() * c, psi: Expr::theta() / c, domain }
    }

    /// The Möbius-type arc map `θ ↦ θ/(1+κθ)`, inverse `x ↦ x/(1-κx)`.
    pub fn mobius(kappa: f64, domain: (f64, f64)) -> AngularDiffeo {
        let phi = Expr::theta() / (1.0 + Expr::theta() * kappa);
        let psi = Expr::theta() / (1.0 - Expr::theta() * kappa);
        AngularDiffeo { phi, psi, domain }
    }

    /// Image arc `φ(domain)`.
    pub fn image(&self) -> Result<(f64, f64)> {
        let t = Tape::compile(&self.phi);
        let at = |x: f64| t.eval(&Point::default().with_theta(x)).map(|c| c.re);
        Ok((at(self.domain.0)?, at(self.domain.1)?))
    }

    pub fn inverse(&self) -> Result<AngularDiffeo> {
        Ok(AngularDiffeo { phi: self.psi.clone(), psi: self.phi.clone(), domain: self.image()? })
    }

    pub fn derivative(&self) -> Result<Expr> {
        self.phi.diff(Var::Theta)
    }

    /// Samples `φ' > 0` on the domain.
    pub fn check(&self, samples: usize) -> Result<()> {
        let d = Tape::compile(&self.derivative()?);
        let n = samples.max(2);
        for i in 0..n {
            let theta = self.domain.0 + (self.domain.1 - self.domain.0) * i as f64 / (n - 1) as f64;
            let v = d.eval(&Point::default().with_theta(theta))?;
            if !(v.re > 0.0) || v.im.abs() > 1e-12 {
                return Err(Error::NotDiffeomorphism { theta, derivative: v.re });
            }
        }
        Ok(())
    }

    pub fn apply(&self, theta: f64) -> Result<f64> {
        Ok(self.phi.eval(&Point::default().with_theta(theta))?.re)
    }

    pub fn apply_inverse(&self, theta: f64) -> Result<f64> {
        Ok(self.psi.eval(&Point::default().with_theta(theta))?.re)
    }
}

/// Leading symbol after the change of angular coordinate: the pushforward
/// of `a` under `(θ, η) ↦ (φ(θ), η/φ'(θ))`, i.e.
/// `(θ, η) ↦ a(ψ(θ), η φ'(ψ(θ)))`.
pub fn chart_transfer_leading(a: &Symbol, map: &AngularDiffeo) -> Result<Symbol> {
    map.check(65)?;
    let dphi_at_psi = map.derivative()?.subst(&[(Var::Theta, map.psi.clone())]);
    let expr = a.expr.subst(&[(Var::Theta, map.psi.clone()), (Var::Eta, Expr::eta() * dphi_at_psi)]);
    Ok(Symbol { expr, ..a.clone() })
}

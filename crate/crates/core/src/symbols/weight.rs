use crate::error::{Error, Result};
use crate::expr::{Expr, Sqrt1pR2, Tape, Var, C64};
use std::fmt;
use std::sync::Arc;

/// The radial weight `f(r) ≥ 1` normalising angular directions.
#[derive(Clone)]
pub struct WeightFunction {
    name: String,
    f: Expr,
    tape: Arc<Tape>,
    /// Valid radial range; `f ≥ 1` is only required here.
    domain: (f64, f64),
    /// Claimed bounds on `|∂_r^j log f|` for `j = 1..=bounds.len()`.
    claimed_bounds: Vec<f64>,
}

impl fmt::Debug for WeightFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WeightFunction({}: {})", self.name, self.f)
    }
}

impl PartialEq for WeightFunction {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.f == other.f
    }
}

impl WeightFunction {
    pub fn new(name: &str, f: Expr, domain: (f64, f64), claimed_bounds: Vec<f64>) -> Result<WeightFunction> {
        if f.variables().iter().any(|v| *v != Var::R) {
            return Err(Error::WeightCheck(format!("weight `{name}` must depend on r only")));
        }
        let tape = Arc::new(Tape::compile(&f));
        Ok(WeightFunction { name: name.to_string(), f, tape, domain, claimed_bounds })
    }

    /// `f ≡ 1`, the cylindrical end.
    pub fn one() -> WeightFunction {
        WeightFunction::new("one", Expr::one(), (f64::NEG_INFINITY, f64::INFINITY), vec![0.0; 4]).unwrap()
    }

    /// `f = sqrt(1 + r²)`, the conical end.
    pub fn sqrt1pr2() -> WeightFunction {
        let f = Expr::apply_fn(Arc::new(Sqrt1pR2), Expr::r());
        WeightFunction::new("sqrt1pr2", f, (f64::NEG_INFINITY, f64::INFINITY), vec![0.5, 1.0, 1.5, 6.0]).unwrap()
    }

    /// `f = e^r`, the hyperbolic end; `f ≥ 1` needs `r ≥ 0`.
    pub fn exp_windowed() -> WeightFunction {
        WeightFunction::new("exp-windowed", Expr::r().exp(), (0.0, f64::INFINITY), vec![1.0, 0.0, 0.0, 0.0]).unwrap()
    }

    pub fn by_name(name: &str) -> Result<WeightFunction> {
        match name {
            "one" => Ok(WeightFunction::one()),
            "sqrt1pr2" => Ok(WeightFunction::sqrt1pr2()),
            "exp-windowed" => Ok(WeightFunction::exp_windowed()),
            other => Err(Error::InvalidArgument(format!("unknown weight `{other}`"))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn expr(&self) -> &Expr {
        &self.f
    }

    pub fn inv(&self) -> Expr {
        self.f.recip()
    }

    pub fn log(&self) -> Expr {
        self.f.ln()
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn claimed_bounds(&self) -> &[f64] {
        &self.claimed_bounds
    }

    pub fn is_trivial(&self) -> bool {
        self.f.is_one()
    }

    pub fn eval(&self, r: f64) -> f64 {
        let mut vars = [C64::new(0.0, 0.0); 8];
        vars[Var::R.index()] = C64::new(r, 0.0);
        let mut scratch = Vec::new();
        self.tape.eval_vars(&vars, &mut scratch).map(|c| c.re).unwrap_or(f64::NAN)
    }

    /// Samples `f ≥ 1` and the claimed log-derivative bounds on a window.
    pub fn check(&self, window: (f64, f64), samples: usize) -> Result<()> {
        if window.0 < self.domain.0 || window.1 > self.domain.1 {
            return Err(Error::WeightCheck(format!(
                "window [{}, {}] leaves the domain of `{}`",
                window.0, window.1, self.name
            )));
        }
        let n = samples.max(2);
        let mut logs = vec![self.log()];
        for j in 0..self.claimed_bounds.len() {
            logs.push(logs[j].diff(Var::R)?);
        }
        let tapes: Vec<Tape> = logs.iter().map(Tape::compile).collect();
        for i in 0..n {
            let r = window.0 + (window.1 - window.0) * i as f64 / (n - 1) as f64;
            let fr = self.eval(r);
            if !(fr >= 1.0 - 1e-12) {
                return Err(Error::WeightCheck(format!("f({r}) = {fr} < 1 for `{}`", self.name)));
            }
            for (j, bound) in self.claimed_bounds.iter().enumerate() {
                let d = tapes[j + 1].eval(&crate::expr::Point::default().with_r(r))?.norm();
                if d > bound * (1.0 + 1e-9) + 1e-12 {
                    return Err(Error::WeightCheck(format!(
                        "|d^{} log f|({r}) = {d} exceeds claimed {bound} for `{}`",
                        j + 1,
                        self.name
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_pass_their_checks() {
        WeightFunction::one().check((-20.0, 20.0), 401).unwrap();
        WeightFunction::sqrt1pr2().check((-20.0, 20.0), 4001).unwrap();
        WeightFunction::exp_windowed().check((0.0, 10.0), 201).unwrap();
    }

    #[test]
    fn exp_weight_rejects_negative_window() {
        assert!(WeightFunction::exp_windowed().check((-1.0, 2.0), 10).is_err());
    }

    #[test]
    fn understated_bound_is_caught() {
        let w = WeightFunction::new("bad", Expr::r().exp(), (0.0, 5.0), vec![0.5]).unwrap();
        assert!(matches!(w.check((0.0, 5.0), 11), Err(Error::WeightCheck(_))));
    }

    #[test]
    fn lookup_by_name() {
        assert_eq!(WeightFunction::by_name("sqrt1pr2").unwrap().eval(0.0), 1.0);
        assert!(WeightFunction::by_name("cosh").is_err());
    }
}

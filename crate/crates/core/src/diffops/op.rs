use crate::error::{Error, Result};
use crate::expr::{Expr, FunctionRegistry, Tape, Var, C64};
use crate::symbols::{Symbol, WeightFunction};
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// `α = (α₀, α′)`: powers of `ħD_r` and of `f⁻¹ħD_θ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex {
    pub r: u32,
    pub theta: u32,
}

impl MultiIndex {
    pub const fn new(r: u32, theta: u32) -> MultiIndex {
        MultiIndex { r, theta }
    }

    pub fn order(self) -> u32 {
        self.r + self.theta
    }
}

/// `P = Σ_α p_α(ħ; r, θ) (f⁻¹ħD_θ)^{α′} (ħD_r)^{α₀}` with
/// `p_α = Σ_j ħ^j p_{α,j}`.
#[derive(Debug, Clone)]
pub struct DiffOp {
    order: u32,
    weight: WeightFunction,
    coeffs: BTreeMap<MultiIndex, Vec<Expr>>,
}

impl DiffOp {
    pub fn new(order: u32, weight: WeightFunction) -> DiffOp {
        DiffOp { order, weight, coeffs: BTreeMap::new() }
    }

    /// Adds `ħ^j p` to the coefficient of `α`.
    pub fn add_term(&mut self, alpha: MultiIndex, j: usize, p: Expr) -> Result<()> {
        if alpha.order() > self.order {
            return Err(Error::InvalidArgument(format!(
                "multi-index ({}, {}) exceeds order {}",
                alpha.r, alpha.theta, self.order
            )));
        }
        if let Some(v) = p.variables().into_iter().find(|v| !matches!(v, Var::R | Var::Theta)) {
            return Err(Error::InvalidArgument(format!("coefficient depends on {}", v.name())));
        }
        let layers = self.coeffs.entry(alpha).or_default();
        if layers.len() <= j {
            layers.resize(j + 1, Expr::zero());
        }
        layers[j] = &layers[j] + &p;
        Ok(())
    }

    pub fn with_term(mut self, alpha: MultiIndex, j: usize, p: Expr) -> Result<DiffOp> {
        self.add_term(alpha, j, p)?;
        Ok(self)
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn weight(&self) -> &WeightFunction {
        &self.weight
    }

    /// `p_{α,j}`, zero when absent.
    pub fn coeff(&self, alpha: MultiIndex, j: usize) -> Expr {
        self.coeffs.get(&alpha).and_then(|l| l.get(j)).cloned().unwrap_or_else(Expr::zero)
    }

    /// Nonzero `(α, j, p_{α,j})` in index order.
    pub fn terms(&self) -> impl Iterator<Item = (MultiIndex, usize, &Expr)> {
        self.coeffs
            .iter()
            .flat_map(|(a, l)| l.iter().enumerate().filter(|(_, e)| !e.is_zero()).map(move |(j, e)| (*a, j, e)))
    }

    pub fn multi_indices(&self) -> Vec<MultiIndex> {
        self.coeffs.keys().copied().filter(|a| self.coeffs[a].iter().any(|e| !e.is_zero())).collect()
    }

    /// Whether some `p_{α,j}` is nonzero.
    pub fn has_layer(&self, j: usize) -> bool {
        self.terms().any(|(_, k, _)| k == j)
    }

    pub fn max_hbar_degree(&self) -> usize {
        self.terms().map(|(_, j, _)| j).max().unwrap_or(0)
    }

    /// `p_α(ħ) = Σ_j ħ^j p_{α,j}` as an expression in `(r, θ, ħ)`.
    pub fn coefficient(&self, alpha: MultiIndex) -> Expr {
        let layers = match self.coeffs.get(&alpha) {
            Some(l) => l,
            None => return Expr::zero(),
        };
        Expr::add(layers.iter().enumerate().map(|(j, p)| p * &Expr::hbar().pow(j as i32)))
    }

    /// `Σ_α p_{α,0} (f⁻¹η)^{α′} ρ^{α₀}`.
    pub fn principal_symbol(&self) -> Symbol {
        let finv = self.weight.inv();
        let expr = Expr::add(
            self.multi_indices()
                .into_iter()
                .map(|a| self.coeff(a, 0) * (Expr::eta() * &finv).pow(a.theta as i32) * Expr::rho().pow(a.r as i32)),
        );
        Symbol::new(expr, self.order as f64, self.weight.clone())
    }

    /// Samples `f^{-β′} ∂_θ^{β′} ∂_r^{β₀} p_{α,j}` for `|β| ≤ depth` on
    /// `window × [0, 2π)` and rejects non-finite or larger-than-`bound` values.
    pub fn check_coefficients(&self, window: (f64, f64), samples: usize, depth: usize, bound: f64) -> Result<()> {
        let finv = self.weight.inv();
        let n = samples.max(2);
        for (alpha, j, p) in self.terms() {
            for b0 in 0..=depth {
                for b1 in 0..=depth - b0 {
                    let d = p.diff_n(Var::R, b0)?.diff_n(Var::Theta, b1)? * finv.pow(b1 as i32);
                    if d.is_zero() {
                        continue;
                    }
                    let tape = Tape::compile(&d);
                    let thetas = if d.depends_on(Var::Theta) { n } else { 1 };
                    let mut scratch = Vec::new();
                    for i in 0..n {
                        let r = window.0 + (window.1 - window.0) * i as f64 / (n - 1) as f64;
                        for k in 0..thetas {
                            let th = std::f64::consts::TAU * k as f64 / thetas as f64;
                            let mut vars = [C64::new(0.0, 0.0); 8];
                            vars[Var::R.index()] = r.into();
                            vars[Var::Theta.index()] = th.into();
                            let v = tape.eval_vars(&vars, &mut scratch).map_err(|e| {
                                Error::CoefficientCheck(format!(
                                    "p[{},{}; {j}] derivative ({b0},{b1}) at r={r}, theta={th}: {e}",
                                    alpha.r, alpha.theta
                                ))
                            })?;
                            if !(v.norm() <= bound) {
                                return Err(Error::CoefficientCheck(format!(
                                    "p[{},{}; {j}] derivative ({b0},{b1}) reaches {:.3e} at r={r}, theta={th}",
                                    alpha.r,
                                    alpha.theta,
                                    v.norm()
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Header line then one `α₀ α′ j expr` line per nonzero term.
    pub fn to_text(&self) -> String {
        let mut s = format!("# diffop order={} weight={}\n", self.order, self.weight.name());
        for (a, j, p) in self.terms() {
            let _ = writeln!(s, "{} {} {} {}", a.r, a.theta, j, p);
        }
        s
    }

    pub fn from_text(text: &str, registry: &FunctionRegistry) -> Result<DiffOp> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Format("empty diffop text".into()))?;
        let mut order = None;
        let mut weight = None;
        for field in header.trim_start_matches('#').split_whitespace().skip(1) {
            match field.split_once('=') {
                Some(("order", v)) => {
                    order = Some(v.parse::<u32>().map_err(|_| Error::Format(format!("bad order `{v}`")))?)
                }
                Some(("weight", v)) => weight = Some(WeightFunction::by_name(v)?),
                _ => return Err(Error::Format(format!("unknown header field `{field}`"))),
            }
        }
        if !header.starts_with("# diffop") {
            return Err(Error::Format("missing `# diffop` header".into()));
        }
        let mut op = DiffOp::new(
            order.ok_or_else(|| Error::Format("header lacks order".into()))?,
            weight.ok_or_else(|| Error::Format("header lacks weight".into()))?,
        );
        for line in lines {
            let mut it = line.splitn(4, ' ');
            let mut num = |what: &str| -> Result<usize> {
                it.next().and_then(|s| s.parse().ok()).ok_or_else(|| Error::Format(format!("bad {what} in `{line}`")))
            };
            let (a0, a1, j) = (num("alpha_r")?, num("alpha_theta")?, num("hbar degree")?);
            let e = it.next().ok_or_else(|| Error::Format(format!("missing expression in `{line}`")))?;
            op.add_term(MultiIndex::new(a0 as u32, a1 as u32), j, Expr::parse(e, registry)?.normalize())?;
        }
        Ok(op)
    }
}

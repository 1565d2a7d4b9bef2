use super::WeightFunction;
use crate::error::{Error, Result};
use crate::expr::{Expr, FunctionRegistry, Var, C64};

/// A symbol `a(r, θ, ρ, η; ħ, z)` in the weighted class of order `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Symbol {
    pub expr: Expr,
    pub order: f64,
    pub weight: WeightFunction,
}

impl Symbol {
    pub fn new(expr: Expr, order: f64, weight: WeightFunction) -> Symbol {
        Symbol { expr, order, weight }
    }

    pub fn conj(&self) -> Symbol {
        Symbol { expr: self.expr.conj(), ..self.clone() }
    }

    /// Header line plus expression text.
    pub fn to_text(&self) -> String {
        format!("# symbol order={} weight={}\n{}\n", self.order, self.weight.name(), self.expr)
    }

    pub fn from_text(s: &str, registry: &FunctionRegistry) -> Result<Symbol> {
        let (header, body) = split_header(s)?;
        let order = header_field(&header, "order")?.parse().map_err(|_| Error::Format("bad order".into()))?;
        let weight = WeightFunction::by_name(&header_field(&header, "weight")?)?;
        Ok(Symbol { expr: Expr::parse(body.trim(), registry)?, order, weight })
    }
}

/// An amplitude `a(q, p, q')` carrying the quantisation parameter `t`.
/// The primed slot uses the variables `r'` and `θ'`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bisymbol {
    pub expr: Expr,
    pub order: f64,
    pub t: f64,
    pub weight: WeightFunction,
}

impl Bisymbol {
    pub fn new(expr: Expr, order: f64, t: f64, weight: WeightFunction) -> Bisymbol {
        Bisymbol { expr, order, t, weight }
    }

    pub fn to_text(&self) -> String {
        format!("# bisymbol order={} t={} weight={}\n{}\n", self.order, self.t, self.weight.name(), self.expr)
    }
}

/// A truncated expansion `b₀ + ħ b₁ + … + ħᴺ b_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolSeries {
    pub terms: Vec<Expr>,
    pub orders: Vec<f64>,
    pub weight: WeightFunction,
    pub z: Option<C64>,
}

impl SymbolSeries {
    pub fn new(terms: Vec<Expr>, orders: Vec<f64>, weight: WeightFunction) -> SymbolSeries {
        assert_eq!(terms.len(), orders.len());
        SymbolSeries { terms, orders, weight, z: None }
    }

    pub fn single(s: &Symbol) -> SymbolSeries {
        SymbolSeries::new(vec![s.expr.clone()], vec![s.order], s.weight.clone())
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Σ ħ^j b_j` with `ħ` left symbolic.
    pub fn total(&self) -> Expr {
        Expr::add(self.terms.iter().enumerate().map(|(j, b)| Expr::hbar().pow(j as i32) * b))
    }

    /// `Σ ħ^j b_j` at a fixed `ħ`.
    pub fn total_at(&self, hbar: f64) -> Expr {
        self.total().subst(&[(Var::Hbar, Expr::real(hbar))])
    }

    pub fn truncate(&self, n: usize) -> SymbolSeries {
        let k = (n + 1).min(self.terms.len());
        SymbolSeries {
            terms: self.terms[..k].to_vec(),
            orders: self.orders[..k].to_vec(),
            weight: self.weight.clone(),
            z: self.z,
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("# series terms={} weight={}", self.terms.len(), self.weight.name());
        if let Some(z) = self.z {
            s.push_str(&format!(" z={},{}", z.re, z.im));
        }
        s.push('\n');
        for (e, m) in self.terms.iter().zip(&self.orders) {
            s.push_str(&format!("{m} {e}\n"));
        }
        s
    }

    pub fn from_text(s: &str, registry: &FunctionRegistry) -> Result<SymbolSeries> {
        let (header, body) = split_header(s)?;
        let weight = WeightFunction::by_name(&header_field(&header, "weight")?)?;
        let z = match header_field(&header, "z") {
            Ok(v) => {
                let (re, im) = v.split_once(',').ok_or_else(|| Error::Format("bad z".into()))?;
                let p = |x: &str| x.parse::<f64>().map_err(|_| Error::Format("bad z".into()));
                Some(C64::new(p(re)?, p(im)?))
            }
            Err(_) => None,
        };
        let mut terms = Vec::new();
        let mut orders = Vec::new();
        for line in body.lines().filter(|l| !l.trim().is_empty()) {
            let (m, e) = line.trim().split_once(' ').ok_or_else(|| Error::Format(format!("bad term line `{line}`")))?;
            orders.push(m.parse().map_err(|_| Error::Format(format!("bad order `{m}`")))?);
            terms.push(Expr::parse(e, registry)?);
        }
        Ok(SymbolSeries { terms, orders, weight, z })
    }
}

fn split_header(s: &str) -> Result<(String, &str)> {
    let s = s.trim_start();
    let (first, rest) = s.split_once('\n').unwrap_or((s, ""));
    if !first.starts_with('#') {
        return Err(Error::Format("missing `#` header line".into()));
    }
    Ok((first.to_string(), rest))
}

fn header_field(header: &str, key: &str) -> Result<String> {
    header
        .split_whitespace()
        .find_map(|tok| tok.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .map(str::to_string)
        .ok_or_else(|| Error::Format(format!("header lacks `{key}`")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbol_text_round_trip() {
        let s = Symbol::new(Expr::rho() * Expr::r().exp(), 1.0, WeightFunction::exp_windowed());
        let back = Symbol::from_text(&s.to_text(), &FunctionRegistry::builtin()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn series_text_round_trip() {
        let w = WeightFunction::sqrt1pr2();
        let mut s = SymbolSeries::new(
            vec![(Expr::z() - Expr::rho().pow(2)).recip(), Expr::rho() * Expr::i()],
            vec![-2.0, -3.0],
            w,
        );
        s.z = Some(C64::new(-1.0, 0.5));
        let back = SymbolSeries::from_text(&s.to_text(), &FunctionRegistry::builtin()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn total_weights_terms_by_hbar() {
        let s = SymbolSeries::new(vec![Expr::rho(), Expr::one()], vec![1.0, 0.0], WeightFunction::one());
        assert_eq!(s.total_at(0.5), Expr::rho() + 0.5);
    }
}

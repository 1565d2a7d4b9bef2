use super::{Expr, FnRef};
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

/// A real scalar function usable as a named expression node.
pub trait ScalarFn: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    /// Value at a real argument, `None` outside the domain.
    fn eval(&self, x: f64) -> Option<f64>;

    /// The derivative `f'(arg)` as an expression, if a rule is known.
    fn derivative(&self, arg: &Expr) -> Option<Expr>;
}

/// `x ↦ sqrt(1 + x²)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sqrt1pR2;

impl ScalarFn for Sqrt1pR2 {
    fn name(&self) -> &str {
        "sqrt1pr2"
    }

    fn eval(&self, x: f64) -> Option<f64> {
        Some(x.hypot(1.0))
    }

    fn derivative(&self, arg: &Expr) -> Option<Expr> {
        Some(arg * Expr::apply_fn(Arc::new(Sqrt1pR2), arg.clone()).recip())
    }
}

/// The n-th derivative of the standard bump `exp(-1/(1-x²))` on (-1, 1).
///
/// Written as `p_n(x) / (1-x²)^(2n) · exp(-1/(1-x²))` with `p_n` built from
/// the recurrence `p_{n+1} = p_n'(1-x²)² + 4n x(1-x²) p_n - 2x p_n`.
#[derive(Clone)]
pub struct Bump {
    order: usize,
    name: String,
    poly: Vec<f64>,
}

impl Bump {
    pub fn new(order: usize) -> Bump {
        let mut p = vec![1.0];
        for n in 0..order {
            p = next_poly(&p, n);
        }
        let name = if order == 0 { "bump".to_string() } else { format!("bump'{order}") };
        Bump { order, name, poly: p }
    }

    pub fn order(&self) -> usize {
        self.order
    }
}

impl fmt::Debug for Bump {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bump({})", self.order)
    }
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] += y;
    }
    out
}

fn next_poly(p: &[f64], n: usize) -> Vec<f64> {
    let dp: Vec<f64> =
        if p.len() > 1 { p.iter().enumerate().skip(1).map(|(i, c)| i as f64 * c).collect() } else { vec![0.0] };
    let one_minus = [1.0, 0.0, -1.0];
    let t1 = poly_mul(&dp, &poly_mul(&one_minus, &one_minus));
    let t2 = poly_mul(&[0.0, 4.0 * n as f64], &poly_mul(&one_minus, p));
    let t3 = poly_mul(&[0.0, -2.0], p);
    poly_add(&poly_add(&t1, &t2), &t3)
}

impl ScalarFn for Bump {
    fn name(&self) -> &str {
        &self.name
    }

    fn eval(&self, x: f64) -> Option<f64> {
        let s = 1.0 - x * x;
        if s <= 0.0 {
            return Some(0.0);
        }
        let b = (-1.0 / s).exp();
        if b == 0.0 {
            return Some(0.0);
        }
        let p = self.poly.iter().rev().fold(0.0, |acc, c| acc * x + c);
        Some(p * b / s.powi(2 * self.order as i32))
    }

    fn derivative(&self, arg: &Expr) -> Option<Expr> {
        Some(Expr::apply_fn(Arc::new(Bump::new(self.order + 1)), arg.clone()))
    }
}

type EvalFn = dyn Fn(f64) -> Option<f64> + Send + Sync;
type DerivFn = dyn Fn(&Expr) -> Expr + Send + Sync;

/// A function assembled from closures; the derivative rule is optional.
#[derive(Clone)]
pub struct CustomFn {
    name: String,
    eval: Arc<EvalFn>,
    derivative: Option<Arc<DerivFn>>,
}

impl CustomFn {
    pub fn new(name: &str, eval: impl Fn(f64) -> Option<f64> + Send + Sync + 'static) -> CustomFn {
        CustomFn { name: name.to_string(), eval: Arc::new(eval), derivative: None }
    }

    pub fn with_derivative(mut self, d: impl Fn(&Expr) -> Expr + Send + Sync + 'static) -> CustomFn {
        self.derivative = Some(Arc::new(d));
        self
    }
}

impl fmt::Debug for CustomFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CustomFn({})", self.name)
    }
}

impl ScalarFn for CustomFn {
    fn name(&self) -> &str {
        &self.name
    }

    fn eval(&self, x: f64) -> Option<f64> {
        (self.eval)(x)
    }

    fn derivative(&self, arg: &Expr) -> Option<Expr> {
        self.derivative.as_ref().map(|d| d(arg))
    }
}

/// Name lookup used by the text parser.
#[derive(Clone, Default)]
pub struct FunctionRegistry {
    entries: HashMap<String, FnRef>,
}

impl FunctionRegistry {
    /// Registry with the built-in functions (`sqrt1pr2` and the bump family).
    pub fn builtin() -> FunctionRegistry {
        let mut r = FunctionRegistry::default();
        r.register(Arc::new(Sqrt1pR2));
        r
    }

    pub fn register(&mut self, f: FnRef) {
        self.entries.insert(f.name().to_string(), f);
    }

    pub fn get(&self, name: &str) -> Option<FnRef> {
        if let Some(f) = self.entries.get(name) {
            return Some(f.clone());
        }
        if name == "bump" {
            return Some(Arc::new(Bump::new(0)));
        }
        let order = name.strip_prefix("bump'")?.parse().ok()?;
        Some(Arc::new(Bump::new(order)))
    }
}

impl fmt::Debug for FunctionRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut names: Vec<_> = self.entries.keys().collect();
        names.sort();
        f.debug_struct("FunctionRegistry").field("names", &names).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_derivatives_match_differences() {
        let h = 1e-5;
        for n in 0..4 {
            let f = Bump::new(n);
            let g = Bump::new(n + 1);
            for &x in &[-0.7, -0.2, 0.0, 0.35, 0.8] {
                let fd = (f.eval(x + h).unwrap() - f.eval(x - h).unwrap()) / (2.0 * h);
                let exact = g.eval(x).unwrap();
                assert!((fd - exact).abs() <= 1e-6 * (1.0 + exact.abs()), "n={n} x={x}");
            }
        }
    }

    #[test]
    fn bump_vanishes_outside() {
        let f = Bump::new(2);
        assert_eq!(f.eval(1.0), Some(0.0));
        assert_eq!(f.eval(-3.0), Some(0.0));
        assert!((Bump::new(0).eval(0.0).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn registry_resolves_bump_family() {
        let r = FunctionRegistry::builtin();
        assert_eq!(r.get("bump'3").unwrap().name(), "bump'3");
        assert!(r.get("sqrt1pr2").is_some());
        assert!(r.get("nope").is_none());
    }
}

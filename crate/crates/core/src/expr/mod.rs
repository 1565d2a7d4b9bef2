//! Exact symbolic expressions over phase-space variables.
//!
//! Every symbol, coefficient and parametrix term in the crate is an [`Expr`].
//! Nodes are reference counted and immutable, so expressions form a DAG that
//! can be shared freely between threads. The smart constructors
//! ([`Expr::add`], [`Expr::mul`], [`Expr::pow`] and the arithmetic operator
//! impls) always return canonical expressions: sums and products are
//! flattened, constants folded, like terms and like factors collected, and
//! commutative operands sorted by a structural key. [`Expr::normalize`]
//! rebuilds an arbitrary (raw) expression through those constructors.

mod check;
mod diff;
mod eval;
mod functions;
mod text;

pub use check::{expr_selftest, fd_check, fd_corpus, CorpusEntry, FdReport, SelfTestReport};
pub use eval::{Point, Tape};
pub use functions::{Bump, CustomFn, FunctionRegistry, ScalarFn, Sqrt1pR2};

use num_complex::Complex64;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops;
use std::sync::Arc;

pub type C64 = Complex64;

/// Variables an expression may reference.
///
/// `RPrime` and `ThetaPrime` are the second spatial slot of bisymbols.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    R,
    Theta,
    Rho,
    Eta,
    Hbar,
    Z,
    RPrime,
    ThetaPrime,
}

impl Var {
    pub const ALL: [Var; 8] = [Var::R, Var::Theta, Var::Rho, Var::Eta, Var::Hbar, Var::Z, Var::RPrime, Var::ThetaPrime];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Var::R => "r",
            Var::Theta => "theta",
            Var::Rho => "rho",
            Var::Eta => "eta",
            Var::Hbar => "hbar",
            Var::Z => "z",
            Var::RPrime => "r'",
            Var::ThetaPrime => "theta'",
        }
    }

    pub fn from_name(s: &str) -> Option<Var> {
        Var::ALL.iter().copied().find(|v| v.name() == s)
    }

    fn bit(self) -> u16 {
        1 << (self as u16)
    }
}

pub type FnRef = Arc<dyn ScalarFn>;

#[derive(Clone, Debug)]
pub enum Node {
    Const(C64),
    Var(Var),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow(Expr, i32),
    Exp(Expr),
    Log(Expr),
    Sin(Expr),
    Cos(Expr),
    Func(FnRef, Expr),
}

struct NodeData {
    node: Node,
    hash: u64,
    vars: u16,
}

/// Shared immutable expression handle.
#[derive(Clone)]
pub struct Expr(Arc<NodeData>);

// splitmix-style mixing keeps hashes stable across runs and platforms
fn mix(mut h: u64, v: u64) -> u64 {
    h ^= v.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(h << 6).wrapping_add(h >> 2);
    h = (h ^ (h >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    h = (h ^ (h >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    h ^ (h >> 31)
}

fn f64_key(x: f64) -> u64 {
    if x == 0.0 {
        0
    } else {
        x.to_bits()
    }
}

fn str_key(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3))
}

impl Node {
    fn rank(&self) -> u8 {
        match self {
            Node::Const(_) => 0,
            Node::Var(_) => 1,
            Node::Pow(..) => 2,
            Node::Func(..) => 3,
            Node::Exp(_) => 4,
            Node::Log(_) => 5,
            Node::Sin(_) => 6,
            Node::Cos(_) => 7,
            Node::Mul(_) => 8,
            Node::Add(_) => 9,
        }
    }
}

impl Expr {
    /// Wraps a node without any simplification.
    pub fn raw(node: Node) -> Expr {
        let mut h = mix(0, node.rank() as u64);
        let mut vars = 0u16;
        match &node {
            Node::Const(c) => {
                h = mix(h, f64_key(c.re));
                h = mix(h, f64_key(c.im));
            }
            Node::Var(v) => {
                h = mix(h, *v as u64);
                vars = v.bit();
            }
            Node::Add(xs) | Node::Mul(xs) => {
                h = mix(h, xs.len() as u64);
                for x in xs {
                    h = mix(h, x.0.hash);
                    vars |= x.0.vars;
                }
            }
            Node::Pow(b, k) => {
                h = mix(mix(h, b.0.hash), *k as i64 as u64);
                vars = b.0.vars;
            }
            Node::Exp(x) | Node::Log(x) | Node::Sin(x) | Node::Cos(x) => {
                h = mix(h, x.0.hash);
                vars = x.0.vars;
            }
            Node::Func(f, x) => {
                h = mix(mix(h, str_key(f.name())), x.0.hash);
                vars = x.0.vars;
            }
        }
        Expr(Arc::new(NodeData { node, hash: h, vars }))
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    pub fn structural_hash(&self) -> u64 {
        self.0.hash
    }

    pub fn ptr_eq(&self, other: &Expr) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    fn ptr_key(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn depends_on(&self, v: Var) -> bool {
        self.0.vars & v.bit() != 0
    }

    pub fn variables(&self) -> Vec<Var> {
        Var::ALL.iter().copied().filter(|v| self.depends_on(*v)).collect()
    }

    // ----- leaves -----

    pub fn constant(c: C64) -> Expr {
        Expr::raw(Node::Const(c))
    }

    pub fn real(x: f64) -> Expr {
        Expr::constant(C64::new(x, 0.0))
    }

    pub fn zero() -> Expr {
        Expr::real(0.0)
    }

    pub fn one() -> Expr {
        Expr::real(1.0)
    }

    pub fn i() -> Expr {
        Expr::constant(C64::new(0.0, 1.0))
    }

    pub fn var(v: Var) -> Expr {
        Expr::raw(Node::Var(v))
    }

    pub fn r() -> Expr {
        Expr::var(Var::R)
    }
    pub fn theta() -> Expr {
        Expr::var(Var::Theta)
    }
    pub fn rho() -> Expr {
        Expr::var(Var::Rho)
    }
    pub fn eta() -> Expr {
        Expr::var(Var::Eta)
    }
    pub fn hbar() -> Expr {
        Expr::var(Var::Hbar)
    }
    pub fn z() -> Expr {
        Expr::var(Var::Z)
    }

    pub fn as_const(&self) -> Option<C64> {
        match self.node() {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(C64::new(0.0, 0.0))
    }

    pub fn is_one(&self) -> bool {
        self.as_const() == Some(C64::new(1.0, 0.0))
    }

    // ----- canonicalising constructors -----

    pub fn add(terms: impl IntoIterator<Item = Expr>) -> Expr {
        let mut constant = C64::new(0.0, 0.0);
        let mut index: HashMap<Expr, usize> = HashMap::new();
        let mut collected: Vec<(Expr, C64, f64)> = Vec::new();
        let mut push = |t: &Expr, constant: &mut C64| {
            let (c, rest) = split_coefficient(t);
            match rest {
                None => *constant += c,
                Some(rest) => match index.get(&rest) {
                    Some(&i) => {
                        collected[i].1 += c;
                        collected[i].2 += c.norm();
                    }
                    None => {
                        index.insert(rest.clone(), collected.len());
                        collected.push((rest, c, c.norm()));
                    }
                },
            }
        };
        for t in terms {
            match t.node() {
                Node::Add(xs) => {
                    for x in xs {
                        push(x, &mut constant);
                    }
                }
                _ => push(&t, &mut constant),
            }
        }
        let mut out: Vec<Expr> = collected
            .into_iter()
            .filter(|(_, c, mag)| !cancelled(*c, *mag))
            .map(|(rest, c, _)| with_coefficient(c, rest))
            .collect();
        out.sort_by(canonical_cmp);
        if constant != C64::new(0.0, 0.0) {
            out.insert(0, Expr::constant(constant));
        }
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => Expr::raw(Node::Add(out)),
        }
    }

    pub fn mul(factors: impl IntoIterator<Item = Expr>) -> Expr {
        let mut constant = C64::new(1.0, 0.0);
        let mut index: HashMap<Expr, usize> = HashMap::new();
        let mut powers: Vec<(Expr, i64)> = Vec::new();
        let mut push = |f: &Expr, constant: &mut C64| match f.node() {
            Node::Const(c) => *constant *= c,
            _ => {
                let (base, k) = match f.node() {
                    Node::Pow(b, k) => (b.clone(), *k as i64),
                    _ => (f.clone(), 1),
                };
                match index.get(&base) {
                    Some(&i) => powers[i].1 += k,
                    None => {
                        index.insert(base.clone(), powers.len());
                        powers.push((base, k));
                    }
                }
            }
        };
        for f in factors {
            match f.node() {
                Node::Mul(xs) => {
                    for x in xs {
                        push(x, &mut constant);
                    }
                }
                _ => push(&f, &mut constant),
            }
        }
        if constant == C64::new(0.0, 0.0) {
            return Expr::zero();
        }
        let mut out: Vec<Expr> = powers
            .into_iter()
            .filter(|(_, k)| *k != 0)
            .map(|(b, k)| if k == 1 { b } else { Expr::raw(Node::Pow(b, k as i32)) })
            .collect();
        out.sort_by(canonical_cmp);
        let unit = constant == C64::new(1.0, 0.0);
        match out.len() {
            0 => Expr::constant(constant),
            1 if unit => out.pop().unwrap(),
            1 if matches!(out[0].node(), Node::Add(_)) => {
                let Node::Add(xs) = out[0].node() else { unreachable!() };
                Expr::add(xs.iter().map(|x| scale(constant, x)))
            }
            _ => {
                if !unit {
                    out.insert(0, Expr::constant(constant));
                }
                Expr::raw(Node::Mul(out))
            }
        }
    }

    pub fn pow(&self, k: i32) -> Expr {
        if k == 0 {
            return Expr::one();
        }
        if k == 1 {
            return self.clone();
        }
        match self.node() {
            Node::Const(c) => {
                if c.norm() == 0.0 && k < 0 {
                    Expr::raw(Node::Pow(self.clone(), k))
                } else {
                    Expr::constant(c.powi(k))
                }
            }
            Node::Pow(b, j) => b.pow(j * k),
            Node::Mul(xs) => Expr::mul(xs.iter().map(|x| x.pow(k))),
            _ => Expr::raw(Node::Pow(self.clone(), k)),
        }
    }

    pub fn recip(&self) -> Expr {
        self.pow(-1)
    }

    pub fn exp(&self) -> Expr {
        match self.as_const() {
            Some(c) => Expr::constant(c.exp()),
            None => Expr::raw(Node::Exp(self.clone())),
        }
    }

    pub fn ln(&self) -> Expr {
        match self.as_const() {
            Some(c) if c.im == 0.0 && c.re > 0.0 => Expr::real(c.re.ln()),
            _ => Expr::raw(Node::Log(self.clone())),
        }
    }

    pub fn sin(&self) -> Expr {
        match self.as_const() {
            Some(c) => Expr::constant(c.sin()),
            None => Expr::raw(Node::Sin(self.clone())),
        }
    }

    pub fn cos(&self) -> Expr {
        match self.as_const() {
            Some(c) => Expr::constant(c.cos()),
            None => Expr::raw(Node::Cos(self.clone())),
        }
    }

    pub fn apply_fn(f: FnRef, arg: Expr) -> Expr {
        if let Some(c) = arg.as_const() {
            if c.im == 0.0 {
                if let Some(v) = f.eval(c.re) {
                    return Expr::real(v);
                }
            }
        }
        Expr::raw(Node::Func(f, arg))
    }

    pub fn scale(&self, c: C64) -> Expr {
        scale(c, self)
    }

    /// Rebuilds the expression bottom-up through the canonicalising
    /// constructors.
    pub fn normalize(&self) -> Expr {
        let mut memo = HashMap::new();
        normalize_rec(self, &mut memo)
    }

    /// Substitutes expressions for variables simultaneously.
    pub fn subst(&self, map: &[(Var, Expr)]) -> Expr {
        let mask = map.iter().fold(0u16, |m, (v, _)| m | v.bit());
        let mut memo = HashMap::new();
        subst_rec(self, map, mask, &mut memo)
    }

    /// Number of distinct nodes in the DAG.
    pub fn node_count(&self) -> usize {
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![self.clone()];
        while let Some(e) = stack.pop() {
            if !seen.insert(e.ptr_key()) {
                continue;
            }
            stack.extend(e.children().iter().cloned());
        }
        seen.len()
    }

    pub fn children(&self) -> Vec<Expr> {
        match self.node() {
            Node::Const(_) | Node::Var(_) => vec![],
            Node::Add(xs) | Node::Mul(xs) => xs.clone(),
            Node::Pow(b, _) => vec![b.clone()],
            Node::Exp(x) | Node::Log(x) | Node::Sin(x) | Node::Cos(x) | Node::Func(_, x) => {
                vec![x.clone()]
            }
        }
    }

    /// Complex conjugate, treating every variable except `z` as real.
    pub fn conj(&self) -> Expr {
        let mut memo = HashMap::new();
        conj_rec(self, &mut memo)
    }
}

fn cancelled(c: C64, magnitude: f64) -> bool {
    c.norm() == 0.0 || c.norm() <= 1e-13 * magnitude
}

fn scale(c: C64, e: &Expr) -> Expr {
    Expr::mul([Expr::constant(c), e.clone()])
}

/// Splits a canonical term into (numeric coefficient, remaining product).
fn split_coefficient(t: &Expr) -> (C64, Option<Expr>) {
    match t.node() {
        Node::Const(c) => (*c, None),
        Node::Mul(xs) => match xs[0].as_const() {
            Some(c) => {
                let rest = if xs.len() == 2 { xs[1].clone() } else { Expr::raw(Node::Mul(xs[1..].to_vec())) };
                (c, Some(rest))
            }
            None => (C64::new(1.0, 0.0), Some(t.clone())),
        },
        _ => (C64::new(1.0, 0.0), Some(t.clone())),
    }
}

fn with_coefficient(c: C64, rest: Expr) -> Expr {
    if c == C64::new(1.0, 0.0) {
        return rest;
    }
    let mut xs = vec![Expr::constant(c)];
    match rest.node() {
        Node::Mul(fs) => xs.extend(fs.iter().cloned()),
        _ => xs.push(rest),
    }
    Expr::raw(Node::Mul(xs))
}

fn canonical_cmp(a: &Expr, b: &Expr) -> std::cmp::Ordering {
    (a.node().rank(), a.0.hash).cmp(&(b.node().rank(), b.0.hash))
}

fn normalize_rec(e: &Expr, memo: &mut HashMap<usize, Expr>) -> Expr {
    if let Some(x) = memo.get(&e.ptr_key()) {
        return x.clone();
    }
    let out = match e.node() {
        Node::Const(c) => {
            // fold negative zero so hashing is canonical
            Expr::constant(C64::new(c.re + 0.0, c.im + 0.0))
        }
        Node::Var(_) => e.clone(),
        Node::Add(xs) => Expr::add(xs.iter().map(|x| normalize_rec(x, memo)).collect::<Vec<_>>()),
        Node::Mul(xs) => Expr::mul(xs.iter().map(|x| normalize_rec(x, memo)).collect::<Vec<_>>()),
        Node::Pow(b, k) => normalize_rec(b, memo).pow(*k),
        Node::Exp(x) => normalize_rec(x, memo).exp(),
        Node::Log(x) => normalize_rec(x, memo).ln(),
        Node::Sin(x) => normalize_rec(x, memo).sin(),
        Node::Cos(x) => normalize_rec(x, memo).cos(),
        Node::Func(f, x) => Expr::apply_fn(f.clone(), normalize_rec(x, memo)),
    };
    memo.insert(e.ptr_key(), out.clone());
    out
}

fn subst_rec(e: &Expr, map: &[(Var, Expr)], mask: u16, memo: &mut HashMap<usize, Expr>) -> Expr {
    if e.0.vars & mask == 0 {
        return e.clone();
    }
    if let Some(x) = memo.get(&e.ptr_key()) {
        return x.clone();
    }
    let mut go = |x: &Expr| subst_rec(x, map, mask, memo);
    let out = match e.node() {
        Node::Const(_) => e.clone(),
        Node::Var(v) => map.iter().find(|(w, _)| w == v).map(|(_, x)| x.clone()).unwrap_or_else(|| e.clone()),
        Node::Add(xs) => Expr::add(xs.iter().map(&mut go).collect::<Vec<_>>()),
        Node::Mul(xs) => Expr::mul(xs.iter().map(&mut go).collect::<Vec<_>>()),
        Node::Pow(b, k) => go(b).pow(*k),
        Node::Exp(x) => go(x).exp(),
        Node::Log(x) => go(x).ln(),
        Node::Sin(x) => go(x).sin(),
        Node::Cos(x) => go(x).cos(),
        Node::Func(f, x) => Expr::apply_fn(f.clone(), go(x)),
    };
    memo.insert(e.ptr_key(), out.clone());
    out
}

fn conj_rec(e: &Expr, memo: &mut HashMap<usize, Expr>) -> Expr {
    if let Some(x) = memo.get(&e.ptr_key()) {
        return x.clone();
    }
    let mut go = |x: &Expr| conj_rec(x, memo);
    let out = match e.node() {
        Node::Const(c) => Expr::constant(c.conj()),
        Node::Var(Var::Z) => {
            // conj(z) = 2 Re z - z is not expressible without Re; keep z and
            // let callers substitute a conjugated constant instead.
            e.clone()
        }
        Node::Var(_) => e.clone(),
        Node::Add(xs) => Expr::add(xs.iter().map(&mut go).collect::<Vec<_>>()),
        Node::Mul(xs) => Expr::mul(xs.iter().map(&mut go).collect::<Vec<_>>()),
        Node::Pow(b, k) => go(b).pow(*k),
        Node::Exp(x) => go(x).exp(),
        Node::Log(x) => go(x).ln(),
        Node::Sin(x) => go(x).sin(),
        Node::Cos(x) => go(x).cos(),
        Node::Func(f, x) => Expr::apply_fn(f.clone(), go(x)),
    };
    memo.insert(e.ptr_key(), out.clone());
    out
}

impl PartialEq for Expr {
    fn eq(&self, other: &Expr) -> bool {
        if self.ptr_eq(other) {
            return true;
        }
        if self.0.hash != other.0.hash {
            return false;
        }
        match (self.node(), other.node()) {
            (Node::Const(a), Node::Const(b)) => f64_key(a.re) == f64_key(b.re) && f64_key(a.im) == f64_key(b.im),
            (Node::Var(a), Node::Var(b)) => a == b,
            (Node::Add(a), Node::Add(b)) | (Node::Mul(a), Node::Mul(b)) => a == b,
            (Node::Pow(a, j), Node::Pow(b, k)) => j == k && a == b,
            (Node::Exp(a), Node::Exp(b))
            | (Node::Log(a), Node::Log(b))
            | (Node::Sin(a), Node::Sin(b))
            | (Node::Cos(a), Node::Cos(b)) => a == b,
            (Node::Func(f, a), Node::Func(g, b)) => f.name() == g.name() && a == b,
            _ => false,
        }
    }
}

impl Eq for Expr {}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl From<f64> for Expr {
    fn from(x: f64) -> Expr {
        Expr::real(x)
    }
}

impl From<C64> for Expr {
    fn from(c: C64) -> Expr {
        Expr::constant(c)
    }
}

impl From<Var> for Expr {
    fn from(v: Var) -> Expr {
        Expr::var(v)
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                let f: fn(&Expr, &Expr) -> Expr = $body;
                f(&self, &rhs)
            }
        }
        impl ops::$tr<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                let f: fn(&Expr, &Expr) -> Expr = $body;
                f(&self, rhs)
            }
        }
        impl ops::$tr<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                let f: fn(&Expr, &Expr) -> Expr = $body;
                f(self, &rhs)
            }
        }
        impl ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                let f: fn(&Expr, &Expr) -> Expr = $body;
                f(self, rhs)
            }
        }
        impl ops::$tr<f64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                let f: fn(&Expr, &Expr) -> Expr = $body;
                f(&self, &Expr::real(rhs))
            }
        }
        impl ops::$tr<f64> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                let f: fn(&Expr, &Expr) -> Expr = $body;
                f(self, &Expr::real(rhs))
            }
        }
        impl ops::$tr<Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                let f: fn(&Expr, &Expr) -> Expr = $body;
                f(&Expr::real(self), &rhs)
            }
        }
        impl ops::$tr<&Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                let f: fn(&Expr, &Expr) -> Expr = $body;
                f(&Expr::real(self), rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| Expr::add([a.clone(), b.clone()]));
binop!(Sub, sub, |a, b| Expr::add([a.clone(), b.scale(C64::new(-1.0, 0.0))]));
binop!(Mul, mul, |a, b| Expr::mul([a.clone(), b.clone()]));
binop!(Div, div, |a, b| Expr::mul([a.clone(), b.recip()]));

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self.scale(C64::new(-1.0, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw_mul(xs: Vec<Expr>) -> Expr {
        Expr::raw(Node::Mul(xs))
    }
    fn raw_add(xs: Vec<Expr>) -> Expr {
        Expr::raw(Node::Add(xs))
    }

    #[test]
    fn normalize_drops_zero_term() {
        let e = raw_add(vec![raw_mul(vec![Expr::zero(), Expr::rho()]), Expr::eta()]);
        assert_eq!(e.normalize(), Expr::eta());
    }

    #[test]
    fn normalize_collects_square() {
        let e = raw_mul(vec![Expr::rho(), Expr::rho()]);
        assert_eq!(e.normalize(), Expr::rho().pow(2));
    }

    #[test]
    fn normalize_folds_constants() {
        let e = raw_mul(vec![raw_add(vec![Expr::one(), Expr::one()]), Expr::r()]);
        let n = e.normalize();
        assert_eq!(n, Expr::mul([Expr::real(2.0), Expr::r()]));
        assert_eq!(format!("{n}"), "(* 2 r)");
    }

    #[test]
    fn reciprocal_cancels() {
        let s = Expr::z() - Expr::rho().pow(2);
        let e = &s * s.recip();
        assert!(e.is_one());
    }

    #[test]
    fn negated_sum_cancels() {
        let a = Expr::rho() * Expr::r() + Expr::eta().sin() * 3.0;
        let b = Expr::mul([Expr::real(-1.0), a.clone()]);
        assert!(Expr::add([a, b]).is_zero());
    }

    #[test]
    fn operand_order_is_canonical() {
        let a = Expr::rho() + Expr::eta() + Expr::r();
        let b = Expr::r() + (Expr::eta() + Expr::rho());
        assert_eq!(a, b);
        assert_eq!(a.structural_hash(), b.structural_hash());
    }

    #[test]
    fn subst_replaces_variables() {
        let e = Expr::r() * Expr::rho();
        let s = e.subst(&[(Var::R, Expr::r() + 1.0)]);
        assert_eq!(s, (Expr::r() + 1.0) * Expr::rho());
    }

    #[test]
    fn dependency_mask() {
        let e = Expr::r().exp() * Expr::eta();
        assert!(e.depends_on(Var::R));
        assert!(e.depends_on(Var::Eta));
        assert!(!e.depends_on(Var::Theta));
        assert_eq!(e.variables(), vec![Var::R, Var::Eta]);
    }
}

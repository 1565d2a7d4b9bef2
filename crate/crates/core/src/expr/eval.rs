use super::{Expr, FnRef, Node, Var, C64};
use crate::error::{Error, Result};
use std::collections::HashMap;

/// A phase-space point together with the semiclassical and spectral
/// parameters. `theta` is read modulo 2π by every periodic consumer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub r: f64,
    pub theta: f64,
    pub rho: f64,
    pub eta: f64,
    pub hbar: f64,
    pub z: C64,
    pub r_prime: f64,
    pub theta_prime: f64,
}

impl Default for Point {
    fn default() -> Point {
        Point {
            r: 0.0,
            theta: 0.0,
            rho: 0.0,
            eta: 0.0,
            hbar: 1.0,
            z: C64::new(0.0, 0.0),
            r_prime: 0.0,
            theta_prime: 0.0,
        }
    }
}

impl Point {
    pub fn new(r: f64, theta: f64, rho: f64, eta: f64, hbar: f64, z: C64) -> Point {
        Point { r, theta, rho, eta, hbar, z, ..Point::default() }
    }

    pub fn with_r(mut self, x: f64) -> Point {
        self.r = x;
        self
    }
    pub fn with_theta(mut self, x: f64) -> Point {
        self.theta = x;
        self
    }
    pub fn with_rho(mut self, x: f64) -> Point {
        self.rho = x;
        self
    }
    pub fn with_eta(mut self, x: f64) -> Point {
        self.eta = x;
        self
    }
    pub fn with_hbar(mut self, x: f64) -> Point {
        self.hbar = x;
        self
    }
    pub fn with_z(mut self, z: C64) -> Point {
        self.z = z;
        self
    }
    pub fn with_r_prime(mut self, x: f64) -> Point {
        self.r_prime = x;
        self
    }
    pub fn with_theta_prime(mut self, x: f64) -> Point {
        self.theta_prime = x;
        self
    }

    pub fn get(&self, v: Var) -> C64 {
        match v {
            Var::R => C64::new(self.r, 0.0),
            Var::Theta => C64::new(self.theta, 0.0),
            Var::Rho => C64::new(self.rho, 0.0),
            Var::Eta => C64::new(self.eta, 0.0),
            Var::Hbar => C64::new(self.hbar, 0.0),
            Var::Z => self.z,
            Var::RPrime => C64::new(self.r_prime, 0.0),
            Var::ThetaPrime => C64::new(self.theta_prime, 0.0),
        }
    }

    pub fn set(&mut self, v: Var, x: f64) {
        match v {
            Var::R => self.r = x,
            Var::Theta => self.theta = x,
            Var::Rho => self.rho = x,
            Var::Eta => self.eta = x,
            Var::Hbar => self.hbar = x,
            Var::Z => self.z = C64::new(x, self.z.im),
            Var::RPrime => self.r_prime = x,
            Var::ThetaPrime => self.theta_prime = x,
        }
    }

    pub fn vars(&self) -> [C64; 8] {
        Var::ALL.map(|v| self.get(v))
    }
}

#[derive(Clone)]
enum Op {
    Const(C64),
    Var(usize),
    Add(u32, u32),
    Mul(u32, u32),
    Pow(u32, i32),
    Exp(u32),
    Log(u32),
    Sin(u32),
    Cos(u32),
    Func(FnRef, u32),
}

/// An expression compiled to a straight-line program with common
/// subexpressions shared. Compile once, evaluate at many points.
#[derive(Clone)]
pub struct Tape {
    ops: Vec<Op>,
    args: Vec<u32>,
    nodes: Vec<Expr>,
}

impl Tape {
    pub fn compile(e: &Expr) -> Tape {
        let mut t = Tape { ops: Vec::new(), args: Vec::new(), nodes: Vec::new() };
        let mut memo: HashMap<Expr, u32> = HashMap::new();
        t.emit(e, &mut memo);
        t
    }

    fn emit(&mut self, e: &Expr, memo: &mut HashMap<Expr, u32>) -> u32 {
        if let Some(&i) = memo.get(e) {
            return i;
        }
        let op = match e.node() {
            Node::Const(c) => Op::Const(*c),
            Node::Var(v) => Op::Var(v.index()),
            Node::Add(xs) | Node::Mul(xs) => {
                let ids: Vec<u32> = xs.iter().map(|x| self.emit(x, memo)).collect();
                let start = self.args.len() as u32;
                self.args.extend(ids);
                let end = self.args.len() as u32;
                if matches!(e.node(), Node::Add(_)) {
                    Op::Add(start, end)
                } else {
                    Op::Mul(start, end)
                }
            }
            Node::Pow(b, k) => Op::Pow(self.emit(b, memo), *k),
            Node::Exp(x) => Op::Exp(self.emit(x, memo)),
            Node::Log(x) => Op::Log(self.emit(x, memo)),
            Node::Sin(x) => Op::Sin(self.emit(x, memo)),
            Node::Cos(x) => Op::Cos(self.emit(x, memo)),
            Node::Func(f, x) => Op::Func(f.clone(), self.emit(x, memo)),
        };
        let id = self.ops.len() as u32;
        self.ops.push(op);
        self.nodes.push(e.clone());
        memo.insert(e.clone(), id);
        id
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn eval(&self, pt: &Point) -> Result<C64> {
        let mut scratch = Vec::with_capacity(self.ops.len());
        self.eval_vars(&pt.vars(), &mut scratch)
    }

    /// Evaluates with a caller-owned scratch buffer to avoid allocation in
    /// tight loops.
    pub fn eval_vars(&self, vars: &[C64; 8], scratch: &mut Vec<C64>) -> Result<C64> {
        scratch.clear();
        for (i, op) in self.ops.iter().enumerate() {
            let v = match op {
                Op::Const(c) => *c,
                Op::Var(k) => vars[*k],
                Op::Add(s, e) => self.args[*s as usize..*e as usize]
                    .iter()
                    .fold(C64::new(0.0, 0.0), |acc, &j| acc + scratch[j as usize]),
                Op::Mul(s, e) => self.args[*s as usize..*e as usize]
                    .iter()
                    .fold(C64::new(1.0, 0.0), |acc, &j| acc * scratch[j as usize]),
                Op::Pow(b, k) => {
                    let x = scratch[*b as usize];
                    if *k < 0 && x.norm_sqr() == 0.0 {
                        return Err(self.singular(i, "reciprocal of zero"));
                    }
                    powi(x, *k)
                }
                Op::Exp(x) => scratch[*x as usize].exp(),
                Op::Log(x) => {
                    let x = scratch[*x as usize];
                    if x.im == 0.0 && x.re <= 0.0 {
                        return Err(self.singular(i, "log of nonpositive real"));
                    }
                    x.ln()
                }
                Op::Sin(x) => scratch[*x as usize].sin(),
                Op::Cos(x) => scratch[*x as usize].cos(),
                Op::Func(f, x) => {
                    let x = scratch[*x as usize];
                    if x.im.abs() > 1e-12 * (1.0 + x.re.abs()) {
                        return Err(self.singular(i, "named function at non-real argument"));
                    }
                    match f.eval(x.re) {
                        Some(y) => C64::new(y, 0.0),
                        None => return Err(self.singular(i, "argument outside function domain")),
                    }
                }
            };
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(self.singular(i, "non-finite value"));
            }
            scratch.push(v);
        }
        Ok(*scratch.last().expect("tape is never empty"))
    }

    fn singular(&self, i: usize, reason: &str) -> Error {
        let mut node = self.nodes[i].to_string();
        if node.len() > 200 {
            node.truncate(200);
            node.push_str("...");
        }
        Error::SingularEvaluation { node, reason: reason.to_string() }
    }
}

fn powi(x: C64, k: i32) -> C64 {
    if x.im == 0.0 {
        C64::new(x.re.powi(k), 0.0)
    } else {
        x.powi(k)
    }
}

impl Expr {
    /// Evaluates at a point. Compiles a fresh [`Tape`]; hot loops should
    /// compile once instead.
    pub fn eval(&self, pt: &Point) -> Result<C64> {
        Tape::compile(self).eval(pt)
    }
}

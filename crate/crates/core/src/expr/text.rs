//! Fully parenthesised s-expression form.
//!
//! ```text
//! (+ a b ...)  (* a b ...)  (^ base k)  (exp a)  (log a)  (sin a)  (cos a)
//! (fn name a)  (c re im)    r theta rho eta hbar z r' theta'   1.5
//! ```

use super::{Expr, FunctionRegistry, Node, Var, C64};
use crate::error::{Error, Result};
use std::fmt;

fn fmt_real(x: f64) -> String {
    let x = x + 0.0;
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x:?}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const(c) => {
                if c.im == 0.0 {
                    write!(f, "{}", fmt_real(c.re))
                } else {
                    write!(f, "(c {} {})", fmt_real(c.re), fmt_real(c.im))
                }
            }
            Node::Var(v) => write!(f, "{}", v.name()),
            Node::Add(xs) | Node::Mul(xs) => {
                let op = if matches!(self.node(), Node::Add(_)) { "+" } else { "*" };
                write!(f, "({op}")?;
                for x in xs {
                    write!(f, " {x}")?;
                }
                write!(f, ")")
            }
            Node::Pow(b, k) => write!(f, "(^ {b} {k})"),
            Node::Exp(x) => write!(f, "(exp {x})"),
            Node::Log(x) => write!(f, "(log {x})"),
            Node::Sin(x) => write!(f, "(sin {x})"),
            Node::Cos(x) => write!(f, "(cos {x})"),
            Node::Func(g, x) => write!(f, "(fn {} {x})", g.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok<'a> {
    Open,
    Close,
    Atom(&'a str),
}

fn tokenize(s: &str) -> Vec<(usize, Tok<'_>)> {
    let mut out = Vec::new();
    let bytes = s.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if b.is_ascii_whitespace() {
            i += 1;
        } else if b == b'(' {
            out.push((i, Tok::Open));
            i += 1;
        } else if b == b')' {
            out.push((i, Tok::Close));
            i += 1;
        } else {
            let start = i;
            while i < bytes.len() && !bytes[i].is_ascii_whitespace() && bytes[i] != b'(' && bytes[i] != b')' {
                i += 1;
            }
            out.push((start, Tok::Atom(&s[start..i])));
        }
    }
    out
}

struct Parser<'a, 'r> {
    toks: Vec<(usize, Tok<'a>)>,
    pos: usize,
    len: usize,
    registry: &'r FunctionRegistry,
}

impl<'a> Parser<'a, '_> {
    fn err(&self, message: impl Into<String>) -> Error {
        let offset = self.toks.get(self.pos).map(|t| t.0).unwrap_or(self.len);
        Error::Parse { offset, message: message.into() }
    }

    fn next(&mut self) -> Result<Tok<'a>> {
        let t = self.toks.get(self.pos).map(|t| t.1.clone()).ok_or_else(|| self.err("unexpected end of input"))?;
        self.pos += 1;
        Ok(t)
    }

    fn atom(&mut self) -> Result<&'a str> {
        match self.next()? {
            Tok::Atom(a) => Ok(a),
            _ => {
                self.pos -= 1;
                Err(self.err("expected atom"))
            }
        }
    }

    fn number(&mut self) -> Result<f64> {
        let a = self.atom()?;
        a.parse::<f64>().map_err(|_| {
            self.pos -= 1;
            self.err(format!("invalid number `{a}`"))
        })
    }

    fn close(&mut self) -> Result<()> {
        match self.next()? {
            Tok::Close => Ok(()),
            _ => {
                self.pos -= 1;
                Err(self.err("expected `)`"))
            }
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        match self.next()? {
            Tok::Close => {
                self.pos -= 1;
                Err(self.err("unexpected `)`"))
            }
            Tok::Atom(a) => {
                if let Some(v) = Var::from_name(a) {
                    return Ok(Expr::var(v));
                }
                a.parse::<f64>().map(Expr::real).map_err(|_| {
                    self.pos -= 1;
                    self.err(format!("unknown atom `{a}`"))
                })
            }
            Tok::Open => {
                let head = self.atom()?;
                let e = match head {
                    "+" | "*" => {
                        let mut xs = Vec::new();
                        while !matches!(self.toks.get(self.pos), Some((_, Tok::Close)) | None) {
                            xs.push(self.expr()?);
                        }
                        if xs.is_empty() {
                            return Err(self.err("empty sum or product"));
                        }
                        if head == "+" {
                            Expr::raw(Node::Add(xs))
                        } else {
                            Expr::raw(Node::Mul(xs))
                        }
                    }
                    "^" => {
                        let b = self.expr()?;
                        let k = self.number()?;
                        if k.fract() != 0.0 || k.abs() > i32::MAX as f64 {
                            return Err(self.err("exponent must be an integer"));
                        }
                        Expr::raw(Node::Pow(b, k as i32))
                    }
                    "exp" => Expr::raw(Node::Exp(self.expr()?)),
                    "log" => Expr::raw(Node::Log(self.expr()?)),
                    "sin" => Expr::raw(Node::Sin(self.expr()?)),
                    "cos" => Expr::raw(Node::Cos(self.expr()?)),
                    "c" => {
                        let re = self.number()?;
                        let im = self.number()?;
                        Expr::constant(C64::new(re, im))
                    }
                    "fn" => {
                        let name = self.atom()?;
                        let f = self.registry.get(name).ok_or_else(|| Error::UnknownFunction(name.to_string()))?;
                        Expr::raw(Node::Func(f, self.expr()?))
                    }
                    other => {
                        self.pos -= 1;
                        return Err(self.err(format!("unknown operator `{other}`")));
                    }
                };
                self.close()?;
                Ok(e)
            }
        }
    }
}

impl Expr {
    /// Parses the s-expression form. Structure is kept as written; call
    /// [`Expr::normalize`] for the canonical form.
    pub fn parse(s: &str, registry: &FunctionRegistry) -> Result<Expr> {
        let mut p = Parser { toks: tokenize(s), pos: 0, len: s.len(), registry };
        let e = p.expr()?;
        if p.pos != p.toks.len() {
            return Err(p.err("trailing input"));
        }
        Ok(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Sqrt1pR2;
    use std::sync::Arc;

    #[test]
    fn round_trip_all_node_kinds() {
        let f = Expr::apply_fn(Arc::new(Sqrt1pR2), Expr::r());
        let e = (Expr::z() - Expr::rho().pow(2) - (Expr::eta() / &f).pow(2)).recip()
            + Expr::theta().sin() * Expr::r().cos()
            + Expr::r().exp().ln() * Expr::constant(C64::new(0.25, -1.5))
            + Expr::var(Var::RPrime) * Expr::var(Var::ThetaPrime) * Expr::hbar() * 0.1;
        let s = e.to_string();
        let back = Expr::parse(&s, &FunctionRegistry::builtin()).unwrap();
        assert_eq!(back, e);
        assert_eq!(back.to_string(), s);
    }

    #[test]
    fn parse_then_normalize() {
        let e = Expr::parse("(* (+ 1 1) r)", &FunctionRegistry::builtin()).unwrap();
        assert_eq!(e.normalize().to_string(), "(* 2 r)");
    }

    #[test]
    fn parse_errors_carry_offsets() {
        let reg = FunctionRegistry::builtin();
        match Expr::parse("(+ r (frob rho))", &reg) {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 6),
            other => panic!("{other:?}"),
        }
        assert!(matches!(Expr::parse("(+ r", &reg), Err(Error::Parse { .. })));
        assert!(matches!(Expr::parse("(fn nope r)", &reg), Err(Error::UnknownFunction(_))));
        assert!(matches!(Expr::parse("r r", &reg), Err(Error::Parse { .. })));
    }
}

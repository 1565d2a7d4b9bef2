//! Parse a symbol, differentiate it exactly and compare against finite
//! differences.

use endcalc::expr::{fd_check, FunctionRegistry};
use endcalc::{Expr, Point, Var, C64};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let reg = FunctionRegistry::builtin();
    let a = Expr::parse("(+ (* (exp (* -1 (^ rho 2))) (sin r)) (* (^ eta 2) (^ (+ 1 (^ r 2)) -1)))", &reg)?;
    println!("a          = {a}");
    let pt = Point::new(0.7, 0.4, 0.9, -0.6, 0.1, C64::new(0.0, 0.0));
    for v in [Var::R, Var::Rho, Var::Eta] {
        let d = a.diff(v)?;
        let rep = fd_check(&a, v, &pt, 1e-5)?;
        println!("d/d{:<4}    = {d}", v.name());
        println!("  value {:.12}, finite difference rel. error {:.1e}", rep.symbolic.re, rep.rel_err);
    }
    let mixed = a.diff(Var::R)?.diff(Var::Rho)?;
    let swapped = a.diff(Var::Rho)?.diff(Var::R)?;
    println!("mixed partials agree: {}", (mixed.eval(&pt)? - swapped.eval(&pt)?).norm() < 1e-14);
    Ok(())
}

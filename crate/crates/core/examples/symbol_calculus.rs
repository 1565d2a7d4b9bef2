//! Symbol classes on the end: seminorms, the resolvent symbol of a
//! principal symbol and a composition expansion.

use endcalc::symbols::{resolvent_symbol, seminorm_estimate, sharp_left, SampleWindow, Symbol, WeightFunction};
use endcalc::{Expr, C64};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let w = WeightFunction::sqrt1pr2();
    let window = SampleWindow::new((0.0, 8.0));
    let sigma = Symbol::new(Expr::rho().pow(2) + (Expr::eta() * w.inv()).pow(2), 2.0, w.clone());
    println!("sigma         = {}", sigma.expr);
    for n in 0..=2 {
        println!("|sigma|_{n}     = {:.4}", seminorm_estimate(&sigma, n, &window)?);
    }
    let b = resolvent_symbol(&sigma, C64::new(-1.0, 0.0), &window)?;
    println!("(z - sigma)^-1 has order {}; |b|_1 = {:.4}", b.order, seminorm_estimate(&b, 1, &window)?);

    let chi = Symbol::new((-(Expr::r().pow(2))).exp(), 0.0, w);
    let series = sharp_left(&chi, &b, 0.0, 2)?;
    for (j, term) in series.terms.iter().enumerate() {
        println!("hbar^{j} term: {} nodes", term.node_count());
    }
    Ok(())
}

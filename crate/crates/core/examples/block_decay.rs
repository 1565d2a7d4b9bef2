//! Off-diagonal decay of the blocks `psi_j Op(a) psi_k` for a symbol that
//! is compactly supported in momentum.

use endcalc::expr::Bump;
use endcalc::quantize::{block_norm_table, Grid, PartitionOfUnity, QuantizedOp};
use endcalc::Expr;
use std::sync::Arc;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bump = |e: Expr| Expr::apply_fn(Arc::new(Bump::new(0)), e);
    let a = bump(Expr::rho() / 2.0) * bump(Expr::eta() / 2.0) * (Expr::r().sin() * 0.5 + 1.0);
    let grid = Grid::new(-4.0, 16.0, 256, 8, 0.125)?;
    let pou = PartitionOfUnity::default();
    println!("partition defect on the grid: {:.1e}", pou.partition_defect(&grid));
    let js: Vec<i64> = (1..=6).collect();
    let table = block_norm_table(&QuantizedOp::new(&grid, &a, 1.0)?, &pou, &js, &js, 2, 12, 1)?;
    for (d, n) in table.by_distance(5).iter().enumerate() {
        println!("|j-k| = {d}: max block norm {n:.3e}");
    }
    println!("fitted decay exponent: {:.2}", -table.decay_fit(5).slope);
    Ok(())
}

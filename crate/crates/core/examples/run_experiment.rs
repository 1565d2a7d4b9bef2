//! Drive an experiment from configuration text, the same way the
//! `endcalc` binary does, and inspect the outcome in memory.

use endcalc::experiments::{execute, list_experiments, ExperimentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    print!("{}", list_experiments());
    let cfg = ExperimentConfig::from_text(
        "experiment = residual-scaling\n\
         hbar = 1/8, 1/16\n\
         n = 1\n\
         fields = 2\n",
    )?;
    println!("\n{}", cfg.to_text());
    let out = execute(&cfg)?;
    for c in &out.summary.checks {
        println!(
            "{:<28} {:>10.4} {} {}  {}",
            c.name,
            c.value,
            c.relation,
            c.threshold,
            if c.pass { "ok" } else { "FAIL" }
        );
    }
    print!("{}", out.csv);
    Ok(())
}

//! Reproducible numerical experiments. Each run produces a CSV of raw
//! measurements, a JSON summary with pass/fail checks and, where it makes
//! sense, a log-log SVG plot.

mod config;
mod operators;
mod plot;
mod quantize_runs;
mod resolvent_runs;

pub use config::{Experiment, ExperimentConfig, OperatorKind, KEYS};
pub use operators::build_operator;
pub use plot::{loglog_svg, Series};

use crate::error::{Error, Result};
use serde::Serialize;
use std::fs;
use std::path::Path;

/// One thresholded measurement.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// `"<"`, `"<="` or `">="`.
    pub relation: String,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Check {
        Check { name: name.into(), value, relation: "<=".into(), threshold, pass: value <= threshold }
    }

    pub fn below(name: impl Into<String>, value: f64, threshold: f64) -> Check {
        Check { name: name.into(), value, relation: "<".into(), threshold, pass: value < threshold }
    }

    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Check {
        Check { name: name.into(), value, relation: ">=".into(), threshold, pass: value >= threshold }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub experiment: String,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub metrics: serde_json::Value,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub csv: String,
    pub summary: Summary,
    pub plot: Option<String>,
}

impl Outcome {
    fn new(
        exp: Experiment,
        csv: String,
        checks: Vec<Check>,
        metrics: serde_json::Value,
        plot: Option<String>,
    ) -> Outcome {
        let pass = checks.iter().all(|c| c.pass);
        Outcome { csv, summary: Summary { experiment: exp.name().into(), pass, checks, metrics }, plot }
    }

    pub fn pass(&self) -> bool {
        self.summary.pass
    }

    pub fn summary_json(&self) -> String {
        serde_json::to_string_pretty(&self.summary).expect("summary serializes")
    }
}

pub struct ExperimentInfo {
    pub name: &'static str,
    pub description: &'static str,
    pub claim: &'static str,
}

const INFO: [ExperimentInfo; 7] = [
    ExperimentInfo {
        name: "residual-scaling",
        description: "residual of (z-P)Op(b) - 1 against hbar for truncated parametrices",
        claim: "R(z) = O(hbar^inf), measured as O(hbar^(N+1))",
    },
    ExperimentInfo {
        name: "l2-bound",
        description: "operator norm of Op^t(a) against symbol seminorms over a symbol corpus",
        claim: "L2 boundedness: ||Op(a)|| <= C |a|_N",
    },
    ExperimentInfo {
        name: "block-decay",
        description: "norms of cut-off blocks psi_j Op(a) psi_k against |j-k|",
        claim: "block estimate <j-k>^(-N)",
    },
    ExperimentInfo {
        name: "scaling-identity",
        description: "angular dilation conjugating a block into the scaled symbol",
        claim: "scaling conjugation identity for Theta^t_jk",
    },
    ExperimentInfo {
        name: "chart-transfer",
        description: "change of angular chart against the leading transferred symbol",
        claim: "chart transfer leading term, O(hbar) correction",
    },
    ExperimentInfo {
        name: "selfadjoint",
        description: "symmetry, parametrix remainders at z = +-i, Neumann series and cutoff commutator",
        claim: "essential self-adjointness for small hbar; commutator O(delta)",
    },
    ExperimentInfo {
        name: "expr-selftest",
        description: "finite-difference and mixed-partial checks of the expression engine",
        claim: "exact symbolic differentiation",
    },
];

pub fn experiments() -> &'static [ExperimentInfo] {
    &INFO
}

/// Aligned text table, one row per experiment.
pub fn list_experiments() -> String {
    let w0 = INFO.iter().map(|i| i.name.len()).max().unwrap_or(0);
    let w1 = INFO.iter().map(|i| i.claim.len()).max().unwrap_or(0);
    let mut s = format!("{:<w0$}  {:<w1$}  {}\n", "experiment", "claim", "description");
    for i in &INFO {
        s.push_str(&format!("{:<w0$}  {:<w1$}  {}\n", i.name, i.claim, i.description));
    }
    s
}

pub fn list_experiments_json() -> String {
    let rows: Vec<_> = INFO
        .iter()
        .map(|i| serde_json::json!({ "name": i.name, "claim": i.claim, "description": i.description }))
        .collect();
    serde_json::to_string_pretty(&rows).expect("rows serialize")
}

/// Runs an experiment without touching the file system.
pub fn execute(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate()?;
    match cfg.experiment {
        Experiment::ResidualScaling => resolvent_runs::residual_scaling(cfg),
        Experiment::SelfAdjoint => resolvent_runs::selfadjoint(cfg),
        Experiment::L2Bound => quantize_runs::l2_bound(cfg),
        Experiment::BlockDecay => quantize_runs::block_decay(cfg),
        Experiment::ScalingIdentity => quantize_runs::scaling_identity(cfg),
        Experiment::ChartTransfer => quantize_runs::chart_transfer(cfg),
        Experiment::ExprSelftest => expr_selftest(cfg),
    }
}

/// Runs an experiment and writes `results.csv`, `summary.json` and, when
/// available, `plot.svg` into the configured output directory.
pub fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    let out = execute(cfg)?;
    write_outputs(&cfg.output, &out)?;
    Ok(out)
}

fn write_outputs(dir: &Path, out: &Outcome) -> Result<()> {
    let io = |e: std::io::Error| Error::Io(format!("{}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(io)?;
    fs::write(dir.join("results.csv"), &out.csv).map_err(io)?;
    fs::write(dir.join("summary.json"), out.summary_json()).map_err(io)?;
    if let Some(svg) = &out.plot {
        fs::write(dir.join("plot.svg"), svg).map_err(io)?;
    }
    Ok(())
}

fn expr_selftest(cfg: &ExperimentConfig) -> Result<Outcome> {
    let rep = crate::expr::expr_selftest(100, cfg.seed)?;
    let mut csv = String::from("name,rel_err\n");
    for (n, e) in &rep.fd {
        csv.push_str(&format!("{n},{e:e}\n"));
    }
    let worst = rep.fd.iter().map(|(_, e)| *e).fold(0.0, f64::max);
    let checks = vec![
        Check::at_least("fd_passes", rep.fd_passes(1e-6) as f64, 20.0),
        Check::at_most("fd_max_rel_err", worst, 1e-6),
        Check::at_most("mixed_partials_max", rep.mixed_max, 1e-10),
    ];
    let metrics = serde_json::json!({ "mixed_points": rep.mixed_points });
    Ok(Outcome::new(cfg.experiment, csv, checks, metrics, None))
}

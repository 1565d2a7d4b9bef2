use super::config::ExperimentConfig;
use super::plot::{loglog_svg, Series};
use super::{Check, Outcome};
use crate::error::Result;
use crate::expr::{Bump, Expr, C64};
use crate::quantize::{
    block_norm_table, chart_conjugate, op_norm_estimate, scaling_conjugate, ArcField, EtaQuadrature, Grid,
    MomentumQuadrature, PartitionOfUnity, QuadratureWindow, QuantizedOp, ScalingMap, WindowField,
};
use crate::symbols::{seminorm_estimate, AngularDiffeo, SampleWindow, Symbol};
use std::fmt::Write as _;
use std::sync::Arc;

const TRIALS: usize = 2;
const ITERS: usize = 12;
const SEMINORM_ORDER: usize = 2;
const MAX_DISTANCE: usize = 5;

fn bump(e: Expr) -> Expr {
    Expr::apply_fn(Arc::new(Bump::new(0)), e)
}

fn gauss(e: Expr) -> Expr {
    (-(e.pow(2))).exp()
}

/// Order-zero symbols, the first one being the calibration reference.
pub fn l2_corpus() -> Vec<(&'static str, Expr)> {
    let (r, th, rho, eta) = (Expr::r(), Expr::theta(), Expr::rho(), Expr::eta());
    vec![
        ("one", Expr::one()),
        ("sin_theta", th.sin()),
        ("gauss_rho", gauss(rho.clone())),
        ("cos_r_gauss_eta", r.cos() * gauss(eta.clone())),
        ("rho_over_bracket", &rho * (rho.pow(2) + 1.0).recip()),
        ("inverse_bracket", (rho.pow(2) + eta.pow(2) + 1.0).recip()),
        ("gauss_r_cos_rho", gauss(r.clone()) * rho.cos()),
        ("inverse_two_plus_sin_r", (r.sin() + 2.0).recip()),
        ("bump_rho_angular", bump(&rho / 3.0) * (th.cos() * 0.5 + 1.0)),
        ("phase_r_gauss_p", (Expr::i() * r).exp() * ((rho.pow(2) + eta.pow(2)) * -0.5).exp()),
    ]
}

/// Calibrates `C` on the reference symbol at the first `ħ` and checks the
/// rest of the corpus at every `ħ` of the same grid shape against it.
pub(super) fn l2_bound(cfg: &ExperimentConfig) -> Result<Outcome> {
    let w = cfg.weight_function()?;
    let window = SampleWindow::new((cfg.r_origin, cfg.r_origin + cfg.r_length));
    let corpus = l2_corpus();
    let seminorms: Vec<f64> = corpus
        .iter()
        .map(|(_, e)| seminorm_estimate(&Symbol::new(e.clone(), 0.0, w.clone()), SEMINORM_ORDER, &window))
        .collect::<Result<_>>()?;
    let mut csv = String::from("symbol,hbar,op_norm,seminorm,ratio\n");
    let mut ratios = Vec::with_capacity(cfg.hbar.len());
    for &h in &cfg.hbar {
        let grid = Grid::new(cfg.r_origin, cfg.r_length, cfg.n_r, cfg.n_theta, h)?;
        let mut row = Vec::with_capacity(corpus.len());
        for ((name, e), s) in corpus.iter().zip(&seminorms) {
            let op = QuantizedOp::from_symbol(&grid, &Symbol::new(e.clone(), 0.0, w.clone()), cfg.t)?;
            let norm = op_norm_estimate(&op, TRIALS, ITERS, cfg.seed)?;
            let _ = writeln!(csv, "{name},{h:e},{norm:e},{s:e},{:e}", norm / s);
            row.push(norm / s);
        }
        ratios.push(row);
    }
    let c = ratios[0][0];
    let worst = ratios.iter().flat_map(|row| row.iter().skip(1)).copied().fold(0.0, f64::max);
    let checks = vec![Check::at_most("max_ratio_over_calibrated_c", worst / c, 1.0)];
    let metrics = serde_json::json!({
        "calibrated_c": c,
        "worst_ratio": worst,
        "seminorm_order": SEMINORM_ORDER,
        "ratios": ratios,
        "symbols": corpus.iter().map(|(n, _)| *n).collect::<Vec<_>>(),
    });
    Ok(Outcome::new(cfg.experiment, csv, checks, metrics, None))
}

/// Smooth symbol compactly supported in momentum.
pub fn block_symbol() -> Expr {
    bump(Expr::rho() / 2.0) * bump(Expr::eta() / 2.0) * (Expr::r().sin() * 0.5 + 1.0)
}

pub(super) fn block_decay(cfg: &ExperimentConfig) -> Result<Outcome> {
    let grid = Grid::new(cfg.r_origin, cfg.r_length, cfg.n_r, cfg.n_theta, cfg.hbar[0])?;
    let pou = PartitionOfUnity::default();
    let js: Vec<i64> = (1..=MAX_DISTANCE as i64 + 1).collect();
    let unit =
        block_norm_table(&QuantizedOp::new(&grid, &Expr::one(), cfg.t)?, &pou, &js, &js, TRIALS, ITERS, cfg.seed)?;
    let smooth =
        block_norm_table(&QuantizedOp::new(&grid, &block_symbol(), cfg.t)?, &pou, &js, &js, TRIALS, ITERS, cfg.seed)?;
    let far_unit = unit.by_distance(MAX_DISTANCE).iter().skip(2).copied().fold(0.0, f64::max);
    let fit = smooth.decay_fit(MAX_DISTANCE);
    let csv = format!(
        "symbol,j,k,distance,norm\n{}{}",
        prefix_rows("one", &unit.to_csv()),
        prefix_rows("bump", &smooth.to_csv())
    );
    let profile = smooth.by_distance(MAX_DISTANCE);
    let checks = vec![
        Check::at_most("unit_symbol_far_blocks", far_unit, 0.0),
        Check::at_least("decay_exponent", -fit.slope, 2.0),
    ];
    let plot = loglog_svg(
        "block norms",
        "<j-k>",
        "max block norm",
        &[Series {
            label: format!("exponent {:.2}", -fit.slope),
            points: profile.iter().enumerate().map(|(d, n)| ((1.0 + (d * d) as f64).sqrt(), *n)).collect(),
        }],
    );
    let metrics = serde_json::json!({
        "decay_exponent": -fit.slope,
        "fit_residual": fit.residual,
        "by_distance": profile,
        "unit_by_distance": unit.by_distance(MAX_DISTANCE),
    });
    Ok(Outcome::new(cfg.experiment, csv, checks, metrics, Some(plot)))
}

fn prefix_rows(tag: &str, table_csv: &str) -> String {
    table_csv.lines().skip(1).map(|l| format!("{tag},{l}\n")).collect()
}

pub const SCALING_TRIPLES: [(i64, i64, f64); 3] = [(2, 2, 1.0), (1, 3, 0.0), (2, 3, 0.5)];

fn scaling_symbol(theta_dependent: bool) -> Expr {
    let e = gauss(Expr::rho()) * gauss(Expr::eta()) * (Expr::r().sin() * 0.5 + 1.0);
    if theta_dependent {
        e * (Expr::theta().cos() * 0.3 + 1.0)
    } else {
        e
    }
}

pub(super) fn scaling_identity(cfg: &ExperimentConfig) -> Result<Outcome> {
    let w = cfg.weight_function()?;
    let h = cfg.hbar[0];
    let mq = MomentumQuadrature { rho_max: 6.0, n_rho: 24, eta_max: 6.0, n_eta: 32, hbar: h };
    let win = QuadratureWindow::new((0.5, 3.5), 24, (-2.0, 2.0), 32)?;
    let pou = PartitionOfUnity::default();
    let mut csv = String::from("j,k,t,factor,rel_err,lhs_norm\n");
    let mut checks = Vec::new();
    for (j, k, t) in SCALING_TRIPLES {
        let u = WindowField::from_fn(win, |r, th| {
            C64::from_polar((-(r - k as f64).powi(2) - th * th / 0.18).exp(), 1.5 * th + 0.5 * r)
        });
        let map = ScalingMap::new(&w, j, k, t)?;
        let a = Symbol::new(scaling_symbol(t == 0.0 || t == 1.0), 0.0, w.clone());
        let (lhs, rhs) = scaling_conjugate(&a, &map, &pou, &u, &mq)?;
        let rel = lhs.distance(&rhs)? / u.l2_norm();
        let _ = writeln!(csv, "{j},{k},{t},{:e},{rel:e},{:e}", map.factor, lhs.l2_norm() / u.l2_norm());
        checks.push(Check::at_most(format!("j{j}_k{k}_t{t}_rel_err"), rel, 1e-6));
        checks.push(Check::at_least(format!("j{j}_k{k}_t{t}_block_norm"), lhs.l2_norm() / u.l2_norm(), 1e-3));
    }
    Ok(Outcome::new(cfg.experiment, csv, checks, serde_json::json!({ "weight": cfg.weight, "hbar": h }), None))
}

fn arc_symbol() -> Symbol {
    let e = bump(Expr::theta() / 1.4) * (-(Expr::eta().pow(2)) / 4.0).exp() * (Expr::eta() + 1.0);
    Symbol::new(e, 0.0, crate::symbols::WeightFunction::one())
}

/// Pooled relative chart-transfer defect over three WKB fields.
pub fn chart_defect(map: &AngularDiffeo, h: f64) -> Result<f64> {
    let eq = EtaQuadrature { eta_max: 6.0, n_eta: 256, hbar: h };
    let (mut num, mut den) = (0.0, 0.0);
    for (c, eta0) in [(0.2, -0.4), (-0.6, 1.0), (0.0, 0.0)] {
        let v =
            ArcField::from_fn((-2.0, 1.1), 1024, |x| C64::from_polar((-(x - c).powi(2) / 0.08).exp(), eta0 * x / h));
        let (l, r) = chart_conjugate(&arc_symbol(), map, &v, &eq)?;
        num += l.distance(&r)?.powi(2);
        den += v.l2_norm().powi(2);
    }
    Ok((num / den).sqrt())
}

pub(super) fn chart_transfer(cfg: &ExperimentConfig) -> Result<Outcome> {
    let map = AngularDiffeo::mobius(0.2, (-1.5, 1.5));
    let defects: Vec<f64> = cfg.hbar.iter().map(|&h| chart_defect(&map, h)).collect::<Result<_>>()?;
    let mut csv = String::from("hbar,defect\n");
    for (h, d) in cfg.hbar.iter().zip(&defects) {
        let _ = writeln!(csv, "{h:e},{d:e}");
    }
    let c = defects[0] / cfg.hbar[0];
    let mut checks = Vec::new();
    if defects.len() > 1 {
        let ratio = defects[1] / defects[0];
        checks.push(Check::at_least("halving_ratio_low", ratio, 0.35));
        checks.push(Check::at_most("halving_ratio_high", ratio, 0.65));
    }
    let plot = loglog_svg(
        "chart transfer defect",
        "hbar",
        "relative defect",
        &[Series {
            label: format!("C = {c:.3}"),
            points: cfg.hbar.iter().copied().zip(defects.iter().copied()).collect(),
        }],
    );
    let metrics = serde_json::json!({ "c": c, "defects": defects });
    Ok(Outcome::new(cfg.experiment, csv, checks, metrics, Some(plot)))
}

#[cfg(test)]
mod tests {
    use super::super::{execute, Experiment};
    use super::*;

    #[test]
    fn corpus_has_ten_order_zero_symbols() {
        assert_eq!(l2_corpus().len(), 10);
        assert!(l2_corpus()[0].1.is_one());
    }

    #[test]
    fn default_quantization_runs_pass() {
        for e in [Experiment::L2Bound, Experiment::BlockDecay, Experiment::ScalingIdentity, Experiment::ChartTransfer] {
            let out = execute(&ExperimentConfig::for_experiment(e)).unwrap();
            println!("{}", out.summary_json());
            assert!(out.pass(), "{e}: {}", out.summary_json());
        }
    }
}

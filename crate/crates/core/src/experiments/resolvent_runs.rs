use super::config::{ExperimentConfig, OperatorKind};
use super::operators::build_operator;
use super::plot::{loglog_svg, Series};
use super::{Check, Outcome};
use crate::error::Result;
use crate::parametrix::{
    build_parametrix, cutoff_commutator, defect_series, random_waves, residual_report, selfadjoint_pipeline,
    semiclassical_field, SelfAdjointOptions,
};
use crate::quantize::{Grid, HalfDensityField};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;

const SLOPE_MARGIN: f64 = 0.8;
const EXACT_TOL: f64 = 1e-9;
const P_MAX: f64 = 0.5;

fn test_fields(cfg: &ExperimentConfig, h: f64) -> Result<Vec<HalfDensityField>> {
    let g = Grid::new(cfg.r_origin, cfg.r_length, cfg.n_r, cfg.n_theta, h)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let center = cfg.r_origin + 0.55 * cfg.r_length;
    (0..cfg.fields)
        .map(|_| semiclassical_field(&g, center, 0.08 * cfg.r_length, &random_waves(P_MAX, &mut rng)))
        .collect()
}

pub(super) fn residual_scaling(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p = build_operator(cfg)?;
    let groups: Vec<Vec<HalfDensityField>> = cfg.hbar.iter().map(|&h| test_fields(cfg, h)).collect::<Result<_>>()?;
    let mut csv = String::from("n,hbar");
    for k in 0..cfg.fields {
        let _ = write!(csv, ",field{k}");
    }
    csv.push('\n');
    let (mut checks, mut series, mut fits) = (Vec::new(), Vec::new(), Vec::new());
    for n in 0..=cfg.n {
        let par = build_parametrix(&p, cfg.z, n)?;
        let defect = defect_series(&p, &par.series)?;
        let live = defect.iter().take(n + 1).skip(1).filter(|e| !e.normalize().is_zero()).count();
        checks.push(Check::at_most(format!("n{n}_nonzero_defect_layers"), live as f64, 0.0));
        let rep = residual_report(&p, &par.series, &groups, cfg.t)?;
        for (h, rs) in rep.hbar.iter().zip(&rep.residuals) {
            let _ = write!(csv, "{n},{h:e}");
            for r in rs {
                let _ = write!(csv, ",{r:e}");
            }
            csv.push('\n');
        }
        if cfg.operator == OperatorKind::Constant {
            checks.push(Check::at_most(format!("n{n}_max_residual"), rep.max_residual(), EXACT_TOL));
        } else {
            checks.push(Check::at_least(format!("n{n}_slope"), rep.slope, n as f64 + SLOPE_MARGIN));
        }
        let worst = rep.worst_case_fit();
        series.push(Series {
            label: format!("N = {n}, slope {:.2}", rep.slope),
            points: rep
                .hbar
                .iter()
                .zip(&rep.residuals)
                .map(|(h, rs)| (*h, rs.iter().fold(0.0, |m: f64, r| m.max(*r))))
                .collect(),
        });
        fits.push(serde_json::json!({
            "n": n,
            "slope": rep.slope,
            "intercept": rep.intercept,
            "fit_residual": rep.fit_residual,
            "worst_case_slope": worst.slope,
            "max_residual": rep.max_residual(),
        }));
    }
    let plot = loglog_svg("parametrix residual", "hbar", "relative residual", &series);
    let metrics = serde_json::json!({ "operator": cfg.operator.name(), "weight": cfg.weight, "fits": fits });
    Ok(Outcome::new(cfg.experiment, csv, checks, metrics, Some(plot)))
}

pub(super) fn selfadjoint(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p = build_operator(cfg)?;
    let opts = SelfAdjointOptions {
        grid: (cfg.r_origin, cfg.r_length, cfg.n_r, cfg.n_theta),
        depth: cfg.n,
        seed: cfg.seed,
        ..SelfAdjointOptions::default()
    };
    let rep = selfadjoint_pipeline(&p, &cfg.hbar, &opts)?;
    let par = build_parametrix(&p, cfg.z, cfg.n)?;
    let h0 = cfg.hbar[0];
    let wide = Grid::new(-24.0, 48.0, 512, cfg.n_theta.min(16), h0)?;
    let deltas = [0.4, 0.2, 0.1];
    let com = cutoff_commutator(&p, &par, &wide, &deltas, opts.trials, opts.iters, cfg.seed)?;

    let mut csv = String::from("quantity,parameter,value\n");
    let _ = writeln!(csv, "symmetry_defect,{h0:e},{:e}", rep.symmetry_defect);
    for (i, h) in rep.hbar.iter().enumerate() {
        let _ = writeln!(csv, "remainder_plus,{h:e},{:e}", rep.norm_plus[i]);
        let _ = writeln!(csv, "remainder_minus,{h:e},{:e}", rep.norm_minus[i]);
    }
    for (k, (a, b)) in rep.neumann_plus.iter().zip(&rep.neumann_minus).enumerate() {
        let _ = writeln!(csv, "neumann_plus,{k},{a:e}");
        let _ = writeln!(csv, "neumann_minus,{k},{b:e}");
    }
    for (d, n) in com.delta.iter().zip(&com.norm) {
        let _ = writeln!(csv, "commutator,{d:e},{n:e}");
    }

    let last = |v: &[f64]| v.last().copied().unwrap_or(f64::INFINITY);
    let checks = vec![
        Check::at_most("symmetry_defect", rep.symmetry_defect, 1e-8),
        Check::below("remainder_plus_smallest_hbar", last(&rep.norm_plus), 1.0),
        Check::below("remainder_minus_smallest_hbar", last(&rep.norm_minus), 1.0),
        Check::at_most("neumann_residual", rep.neumann_final(), 1e-3),
        Check::at_least("commutator_slope", com.slope, 0.8),
    ];
    let plot = loglog_svg(
        "parametrix remainder",
        "hbar",
        "norm estimate",
        &[
            Series {
                label: "z = +i".into(),
                points: rep.hbar.iter().copied().zip(rep.norm_plus.iter().copied()).collect(),
            },
            Series {
                label: "z = -i".into(),
                points: rep.hbar.iter().copied().zip(rep.norm_minus.iter().copied()).collect(),
            },
        ],
    );
    let metrics = serde_json::json!({ "pipeline": rep, "commutator": com });
    Ok(Outcome::new(cfg.experiment, csv, checks, metrics, Some(plot)))
}

#[cfg(test)]
mod tests {
    use super::super::{execute, Experiment};
    use super::*;

    #[test]
    fn constant_operator_run_is_exact() {
        let mut cfg = ExperimentConfig::for_experiment(Experiment::ResidualScaling);
        for (k, v) in
            [("operator", "constant"), ("weight", "one"), ("n_r", "256"), ("n_theta", "32"), ("r_length", "8")]
        {
            cfg.set(k, v).unwrap();
        }
        cfg.set("r_origin", "-4").unwrap();
        cfg.set("hbar", "1/4, 1/8").unwrap();
        cfg.n = 1;
        cfg.fields = 2;
        let out = execute(&cfg).unwrap();
        assert!(out.pass(), "{}", out.summary_json());
        assert_eq!(out.csv.lines().count(), 5);
        assert!(out.plot.unwrap().contains("N = 1"));
    }
}

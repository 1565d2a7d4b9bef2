use super::{Symbol, WeightFunction};
use crate::error::{Error, Result};
use crate::expr::{Expr, Point, Tape, Var, C64};
use rayon::prelude::*;
use std::collections::HashMap;

/// Deterministic sample set used for every grid supremum.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleWindow {
    pub r: (f64, f64),
    pub r_samples: usize,
    pub theta_samples: usize,
    pub p_max: f64,
    pub p_samples: usize,
}

impl Default for SampleWindow {
    fn default() -> SampleWindow {
        SampleWindow { r: (0.0, 8.0), r_samples: 17, theta_samples: 16, p_max: 8.0, p_samples: 33 }
    }
}

impl SampleWindow {
    pub fn new(r: (f64, f64)) -> SampleWindow {
        SampleWindow { r, ..SampleWindow::default() }
    }

    pub fn with_p(mut self, p_max: f64, p_samples: usize) -> SampleWindow {
        self.p_max = p_max;
        self.p_samples = p_samples;
        self
    }

    pub fn with_r_samples(mut self, n: usize) -> SampleWindow {
        self.r_samples = n;
        self
    }

    pub fn with_theta_samples(mut self, n: usize) -> SampleWindow {
        self.theta_samples = n;
        self
    }

    fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        if n <= 1 {
            return vec![0.5 * (lo + hi)];
        }
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    pub fn r_values(&self) -> Vec<f64> {
        Self::linspace(self.r.0, self.r.1, self.r_samples)
    }

    pub fn theta_values(&self) -> Vec<f64> {
        let n = self.theta_samples.max(1);
        (0..n).map(|k| std::f64::consts::TAU * k as f64 / n as f64).collect()
    }

    pub fn p_values(&self) -> Vec<f64> {
        Self::linspace(-self.p_max, self.p_max, self.p_samples)
    }
}

/// `⟨ρ ⊕ f⁻¹η⟩ = (1 + ρ² + f⁻²η²)^{1/2}`.
pub fn bracket(rho: f64, eta_over_f: f64) -> f64 {
    (1.0 + rho * rho + eta_over_f * eta_over_f).sqrt()
}

/// The bracket as an expression, for symbolic use.
pub fn bracket_sq_expr(w: &WeightFunction) -> Expr {
    1.0 + Expr::rho().pow(2) + (Expr::eta() * w.inv()).pow(2)
}

/// Evaluated sample handed to a [`sample_fold`] callback.
pub struct Sample<'a> {
    pub point: Point,
    pub f: f64,
    pub values: &'a [C64],
}

/// Folds `score` over the window samples and returns the largest score with
/// its location. `θ` samples collapse to one when no tape depends on `θ`.
pub fn sample_sup(
    window: &SampleWindow,
    weight: &WeightFunction,
    base: Point,
    exprs: &[Expr],
    score: impl Fn(&Sample) -> f64 + Sync,
) -> Result<(f64, Point)> {
    let tapes: Vec<Tape> = exprs.iter().map(Tape::compile).collect();
    let thetas = if exprs.iter().any(|e| e.depends_on(Var::Theta)) { window.theta_values() } else { vec![0.0] };
    let ps = window.p_values();
    let etas = if exprs.iter().any(|e| e.depends_on(Var::Eta)) { ps.clone() } else { vec![0.0] };
    let rs = window.r_values();
    let partial: Result<Vec<(f64, Point)>> = rs
        .par_iter()
        .map(|&r| {
            let f = weight.eval(r);
            let mut scratch = Vec::new();
            let mut vals = vec![C64::new(0.0, 0.0); tapes.len()];
            let mut best = (f64::NEG_INFINITY, base);
            for &theta in &thetas {
                for &rho in &ps {
                    for &eta in &etas {
                        let pt = Point { r, theta, rho, eta, ..base };
                        let vars = pt.vars();
                        for (k, t) in tapes.iter().enumerate() {
                            vals[k] = t.eval_vars(&vars, &mut scratch).map_err(|e| locate(e, &pt))?;
                        }
                        let s = score(&Sample { point: pt, f, values: &vals });
                        if s > best.0 || s.is_nan() {
                            best = (s, pt);
                        }
                    }
                }
            }
            Ok(best)
        })
        .collect();
    Ok(partial?.into_iter().fold((f64::NEG_INFINITY, base), |a, b| if b.0 > a.0 || b.0.is_nan() { b } else { a }))
}

/// Variant of [`sample_sup`] returning the smallest score.
pub fn sample_inf(
    window: &SampleWindow,
    weight: &WeightFunction,
    base: Point,
    exprs: &[Expr],
    score: impl Fn(&Sample) -> f64 + Sync,
) -> Result<(f64, Point)> {
    let (s, p) = sample_sup(window, weight, base, exprs, |smp| -score(smp))?;
    Ok((-s, p))
}

fn locate(e: Error, pt: &Point) -> Error {
    match e {
        Error::SingularEvaluation { node, reason } => Error::SingularEvaluation {
            node,
            reason: format!("{reason} at (r={}, theta={}, rho={}, eta={})", pt.r, pt.theta, pt.rho, pt.eta),
        },
        other => other,
    }
}

/// Multi-indices `(α₀, α′, β₀, β′)` with total degree at most `n`, paired
/// with the corresponding derivative of `a`. Vanishing derivatives are
/// dropped.
pub fn derivative_table(a: &Expr, n: usize) -> Result<Vec<([usize; 4], Expr)>> {
    let vars = [Var::R, Var::Theta, Var::Rho, Var::Eta];
    let mut memo: HashMap<[usize; 4], Expr> = HashMap::new();
    memo.insert([0; 4], a.clone());
    let mut out = vec![([0; 4], a.clone())];
    let mut frontier = vec![[0usize; 4]];
    for _ in 0..n {
        let mut next = Vec::new();
        for idx in &frontier {
            let e = memo[idx].clone();
            for (k, v) in vars.iter().enumerate() {
                // only extend in nondecreasing variable order to visit each index once
                if idx[k + 1..].iter().any(|&c| c > 0) {
                    continue;
                }
                let mut j = *idx;
                j[k] += 1;
                let d = e.diff(*v)?;
                if d.is_zero() {
                    continue;
                }
                memo.insert(j, d.clone());
                out.push((j, d));
                next.push(j);
            }
        }
        frontier = next;
    }
    Ok(out)
}

/// Grid estimate of the weighted seminorm of order `n`: the sum over
/// multi-indices of the sampled supremum of
/// `f^{-|α′|+|β′|} ⟨ρ⊕f⁻¹η⟩^{-m+|β|} |∂_q^α ∂_p^β a|`.
/// A lower bound for the true seminorm.
pub fn seminorm_estimate(a: &Symbol, n: usize, window: &SampleWindow) -> Result<f64> {
    seminorm_estimate_sigma(a, n, window, 1.0)
}

/// As [`seminorm_estimate`] with the momentum gain `⟨·⟩^{σ|β|}`; `σ = 0`
/// gives the class without improvement under momentum derivatives.
pub fn seminorm_estimate_sigma(a: &Symbol, n: usize, window: &SampleWindow, sigma: f64) -> Result<f64> {
    if n > 4 {
        return Err(Error::InvalidArgument(format!("derivative budget {n} exceeds 4")));
    }
    let table = derivative_table(&a.expr, n)?;
    let exprs: Vec<Expr> = table.iter().map(|(_, e)| e.clone()).collect();
    let m = a.order;
    let idx: Vec<[usize; 4]> = table.iter().map(|(i, _)| *i).collect();
    let mut total = 0.0;
    // one sup per multi-index
    for (k, ix) in idx.iter().enumerate() {
        let (s, _) = sample_sup(window, &a.weight, Point::default(), &exprs[k..k + 1], |smp| {
            let beta = (ix[2] + ix[3]) as f64;
            let br = bracket(smp.point.rho, smp.point.eta / smp.f);
            smp.f.powi(ix[3] as i32 - ix[1] as i32) * br.powf(-m + sigma * beta) * smp.values[0].norm()
        })?;
        total += s;
    }
    Ok(total)
}

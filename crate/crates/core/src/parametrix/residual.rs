use crate::diffops::{DiffOp, GridDiffOp};
use crate::error::{Error, Result};
use crate::expr::C64;
use crate::fit::{loglog_fit, LineFit};
use crate::quantize::{clean_spectrum, Grid, HalfDensityField, LinearOperator, QuantizedOp};
use crate::symbols::SymbolSeries;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::fmt::Write as _;

/// A plane wave `c e^{i(ρ₀ r + η₀ θ)/ħ}` with `η₀/ħ` rounded to an integer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wave {
    pub rho: f64,
    pub eta: f64,
    pub amplitude: C64,
}

/// `e^{-((r-c)/w)²} Σ waves`, band-limited. Fails when band-limiting removes
/// more than `1e-20` of the squared norm.
pub fn semiclassical_field(grid: &Grid, center: f64, width: f64, waves: &[Wave]) -> Result<HalfDensityField> {
    let h = grid.hbar;
    let raw = HalfDensityField::from_fn(grid, |r, th| {
        let env = (-((r - center) / width).powi(2)).exp();
        waves
            .iter()
            .map(|w| {
                let l = (w.eta / h).round();
                w.amplitude * C64::new(0.0, w.rho * r / h + l * th).exp()
            })
            .sum::<C64>()
            * env
    });
    let u = clean_spectrum(&raw);
    let lost = raw.values.iter().zip(&u.values).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>();
    let total = raw.values.iter().map(|a| a.norm_sqr()).sum::<f64>();
    if lost > 1e-20 * total {
        return Err(Error::Undersampled(format!(
            "field with momenta up to {:.3} loses {:.2e} of its energy on {}x{} at hbar {}",
            waves.iter().map(|w| w.rho.abs().max(w.eta.abs())).fold(0.0, f64::max),
            lost / total,
            grid.n_r,
            grid.n_theta,
            h
        )));
    }
    Ok(u)
}

/// Two random waves with momenta in `[-p_max, p_max]²`.
pub fn random_waves(p_max: f64, rng: &mut impl Rng) -> Vec<Wave> {
    (0..2)
        .map(|_| Wave {
            rho: rng.gen_range(-p_max..=p_max),
            eta: rng.gen_range(-p_max..=p_max),
            amplitude: C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub hbar: Vec<f64>,
    /// `residuals[i][k]`: field `k` at `hbar[i]`.
    pub residuals: Vec<Vec<f64>>,
    pub slope: f64,
    pub fit_residual: f64,
    pub intercept: f64,
}

impl ResidualReport {
    fn new(hbar: Vec<f64>, residuals: Vec<Vec<f64>>) -> ResidualReport {
        let (xs, ys): (Vec<f64>, Vec<f64>) =
            hbar.iter().zip(&residuals).flat_map(|(h, rs)| rs.iter().map(move |r| (*h, *r))).unzip();
        let LineFit { slope, intercept, residual } = loglog_fit(&xs, &ys);
        ResidualReport { hbar, residuals, slope, fit_residual: residual, intercept }
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().flatten().fold(0.0f64, |m, r| m.max(*r))
    }

    /// Slope fitted to the worst field at each `ħ`.
    pub fn worst_case_fit(&self) -> LineFit {
        let ys: Vec<f64> = self.residuals.iter().map(|rs| rs.iter().fold(0.0f64, |m, r| m.max(*r))).collect();
        loglog_fit(&self.hbar, &ys)
    }

    pub fn to_csv(&self) -> String {
        let k = self.residuals.first().map_or(0, Vec::len);
        let mut s = String::from("hbar");
        for i in 0..k {
            let _ = write!(s, ",field{i}");
        }
        s.push('\n');
        for (h, rs) in self.hbar.iter().zip(&self.residuals) {
            let _ = write!(s, "{h:e}");
            for r in rs {
                let _ = write!(s, ",{r:e}");
            }
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// `(z - P) Op^t(b) u - u` for one field.
pub fn residual_field(p: &GridDiffOp, b: &QuantizedOp, z: C64, u: &HalfDensityField) -> Result<HalfDensityField> {
    let w = b.apply(u)?;
    let mut out = w.scale(z);
    out.axpy(C64::new(-1.0, 0.0), &p.apply(&w)?)?;
    out.axpy(C64::new(-1.0, 0.0), u)?;
    Ok(out)
}

/// Relative residuals `‖(z-P)Op^t(Σħ^l b_l)u - u‖/‖u‖` for groups of fields
/// sharing a grid, one group per `ħ`.
pub fn residual_report(
    p: &DiffOp,
    series: &SymbolSeries,
    groups: &[Vec<HalfDensityField>],
    t: f64,
) -> Result<ResidualReport> {
    let z = series.z.ok_or_else(|| Error::InvalidArgument("series carries no z".into()))?;
    let mut hbar = Vec::with_capacity(groups.len());
    let mut residuals = Vec::with_capacity(groups.len());
    for fields in groups {
        let grid = fields.first().ok_or_else(|| Error::InvalidArgument("empty field group".into()))?.grid;
        if let Some(f) = fields.iter().find(|f| !f.grid.same_lattice(&grid) || f.grid.hbar != grid.hbar) {
            return Err(Error::GridMismatch(format!("field on hbar {} in group on hbar {}", f.grid.hbar, grid.hbar)));
        }
        let gp = GridDiffOp::new(p, &grid)?;
        let b = QuantizedOp::from_series(&grid, series, t)?;
        let rs: Result<Vec<f64>> =
            fields.par_iter().map(|u| Ok(residual_field(&gp, &b, z, u)?.l2_norm() / u.l2_norm())).collect();
        hbar.push(grid.hbar);
        residuals.push(rs?);
    }
    Ok(ResidualReport::new(hbar, residuals))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffops::{warped_laplacian, MultiIndex};
    use crate::expr::Expr;
    use crate::parametrix::build_parametrix;
    use crate::symbols::WeightFunction;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_coefficients_are_inverted_exactly() {
        let p = DiffOp::new(2, WeightFunction::one())
            .with_term(MultiIndex::new(2, 0), 0, Expr::one())
            .unwrap()
            .with_term(MultiIndex::new(0, 2), 0, Expr::one())
            .unwrap();
        let par = build_parametrix(&p, C64::new(-1.0, 0.0), 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let groups: Vec<Vec<HalfDensityField>> = [0.25, 0.125]
            .iter()
            .map(|&h| {
                let g = Grid::new(-4.0, 8.0, 64, 32, h).unwrap();
                (0..2).map(|_| semiclassical_field(&g, 0.0, 0.8, &random_waves(0.5, &mut rng)).unwrap()).collect()
            })
            .collect();
        let rep = residual_report(&p, &par.series, &groups, 1.0).unwrap();
        assert!(rep.max_residual() < 1e-12, "{:?}", rep.residuals);
        assert!(rep.to_csv().starts_with("hbar,field0,field1\n"));
        assert!(rep.to_json().contains("\"slope\""));
    }

    #[test]
    fn undersampled_waves_are_rejected() {
        let g = Grid::new(-4.0, 8.0, 32, 16, 0.05).unwrap();
        let w = Wave { rho: 1.0, eta: 0.0, amplitude: C64::new(1.0, 0.0) };
        assert!(matches!(semiclassical_field(&g, 0.0, 0.8, &[w]), Err(Error::Undersampled(_))));
    }

    #[test]
    fn first_order_residual_decays() {
        let w = WeightFunction::sqrt1pr2();
        let p = warped_laplacian(&w, &Expr::one()).unwrap();
        let par = build_parametrix(&p, C64::new(-1.0, 0.0), 0).unwrap();
        let waves = [Wave { rho: 0.4, eta: 0.3, amplitude: C64::new(1.0, 0.0) }];
        let groups: Vec<Vec<HalfDensityField>> = [0.125, 0.0625]
            .iter()
            .map(|&h| {
                let g = Grid::new(-5.0, 10.0, 128, 32, h).unwrap();
                vec![semiclassical_field(&g, 0.5, 0.8, &waves).unwrap()]
            })
            .collect();
        let rep = residual_report(&p, &par.series, &groups, 1.0).unwrap();
        assert!(rep.slope > 0.8, "{rep:?}");
    }
}

use super::recursion::{build_parametrix, Parametrix};
use super::residual::{random_waves, residual_field, semiclassical_field};
use crate::diffops::{DiffOp, GridDiffOp};
use crate::error::{Error, Result};
use crate::expr::C64;
use crate::fit::{loglog_fit, LineFit};
use crate::quantize::{
    op_norm_estimate, random_test_field, smooth_step, Grid, HalfDensityField, LinearOperator, QuantizedOp,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// `R = ((z-P) Op¹(b) - 1) Π` with `Π` the band-limiting projector.
pub struct ResolventRemainder {
    p: GridDiffOp,
    b: QuantizedOp,
    z: C64,
}

impl ResolventRemainder {
    pub fn new(p: &DiffOp, par: &Parametrix, grid: &Grid) -> Result<ResolventRemainder> {
        let z = par.series.z.ok_or_else(|| Error::InvalidArgument("series carries no z".into()))?;
        Ok(ResolventRemainder { p: GridDiffOp::new(p, grid)?, b: QuantizedOp::from_series(grid, &par.series, 1.0)?, z })
    }

    /// `Op¹(b) u`.
    pub fn parametrix(&self, u: &HalfDensityField) -> Result<HalfDensityField> {
        self.b.apply(u)
    }

    /// `(z - P) w`.
    pub fn shifted(&self, w: &HalfDensityField) -> Result<HalfDensityField> {
        let mut out = w.scale(self.z);
        out.axpy(C64::new(-1.0, 0.0), &self.p.apply(w)?)?;
        Ok(out)
    }
}

impl LinearOperator for ResolventRemainder {
    fn grid(&self) -> &Grid {
        self.b.grid()
    }

    fn apply(&self, u: &HalfDensityField) -> Result<HalfDensityField> {
        residual_field(&self.p, &self.b, self.z, &u.band_limit())
    }

    fn apply_adjoint(&self, u: &HalfDensityField) -> Result<HalfDensityField> {
        let mut v = u.scale(self.z.conj());
        v.axpy(C64::new(-1.0, 0.0), &self.p.apply_adjoint(u)?)?;
        let mut out = self.b.apply_adjoint(&v)?;
        out.axpy(C64::new(-1.0, 0.0), u)?;
        Ok(out.band_limit())
    }
}

/// `w = Op¹(b) Σ_{k≤K} (-ΠR)^k u` and the residuals `‖(z-P)w_K - u‖/‖u‖`
/// for `K = 0..=k_max`.
pub fn neumann_residuals(rem: &ResolventRemainder, u: &HalfDensityField, k_max: usize) -> Result<Vec<f64>> {
    let norm = u.l2_norm();
    let mut term = u.clone();
    let mut sum = u.clone();
    let mut out = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        if k > 0 {
            term = rem.apply(&term)?.band_limit().scale(C64::new(-1.0, 0.0));
            sum.axpy(C64::new(1.0, 0.0), &term)?;
        }
        let mut res = rem.shifted(&rem.parametrix(&sum)?)?;
        res.axpy(C64::new(-1.0, 0.0), u)?;
        out.push(res.l2_norm() / norm);
    }
    Ok(out)
}

/// `|⟨Pu, v⟩ - ⟨u, Pv⟩| / (‖Pu‖‖v‖ + ‖u‖‖Pv‖)` over seeded smooth fields.
pub fn symmetry_defect(p: &DiffOp, grid: &Grid, pairs: usize, seed: u64) -> Result<f64> {
    let gp = GridDiffOp::new(p, grid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let center = grid.r_origin + 0.5 * grid.r_length;
    let width = 0.1 * grid.r_length;
    let mut worst: f64 = 0.0;
    for _ in 0..pairs {
        let u = random_test_field(grid, center, width, &mut rng);
        let v = random_test_field(grid, center, width, &mut rng);
        let (pu, pv) = (gp.apply(&u)?, gp.apply(&v)?);
        let d = (pu.inner(&v)? - u.inner(&pv)?).norm();
        worst = worst.max(d / (pu.l2_norm() * v.l2_norm() + u.l2_norm() * pv.l2_norm()));
    }
    Ok(worst)
}

#[derive(Debug, Clone)]
pub struct SelfAdjointOptions {
    /// `(r_origin, L_r, n_r, n_θ)`, shared by every `ħ`.
    pub grid: (f64, f64, usize, usize),
    pub depth: usize,
    pub k_max: usize,
    pub trials: usize,
    pub iters: usize,
    pub seed: u64,
    /// Momentum bound of the Neumann test field.
    pub p_max: f64,
}

impl Default for SelfAdjointOptions {
    fn default() -> Self {
        SelfAdjointOptions {
            grid: (-5.0, 10.0, 256, 128),
            depth: 1,
            k_max: 20,
            trials: 2,
            iters: 12,
            seed: 7,
            p_max: 0.3,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SelfAdjointReport {
    pub symmetry_defect: f64,
    pub hbar: Vec<f64>,
    pub norm_plus: Vec<f64>,
    pub norm_minus: Vec<f64>,
    /// Largest listed `ħ` with both estimates below one.
    pub hbar0: Option<f64>,
    /// `ħ` at which the Neumann series was run: the smallest listed.
    pub neumann_hbar: f64,
    pub neumann_plus: Vec<f64>,
    pub neumann_minus: Vec<f64>,
}

impl SelfAdjointReport {
    pub fn neumann_final(&self) -> f64 {
        let last = |v: &[f64]| v.last().copied().unwrap_or(f64::INFINITY);
        last(&self.neumann_plus).max(last(&self.neumann_minus))
    }
}

pub fn selfadjoint_pipeline(p: &DiffOp, hbars: &[f64], opts: &SelfAdjointOptions) -> Result<SelfAdjointReport> {
    if hbars.is_empty() {
        return Err(Error::InvalidArgument("empty hbar list".into()));
    }
    let (r0, len, nr, nt) = opts.grid;
    let grid = |h: f64| Grid::new(r0, len, nr, nt, h);
    let symmetry = symmetry_defect(p, &grid(hbars[0])?, 3, opts.seed)?;
    let mut norms = [Vec::new(), Vec::new()];
    let zs = [C64::new(0.0, 1.0), C64::new(0.0, -1.0)];
    let pars: Vec<Parametrix> = zs.iter().map(|&z| build_parametrix(p, z, opts.depth)).collect::<Result<_>>()?;
    for &h in hbars {
        let g = grid(h)?;
        for (s, par) in pars.iter().enumerate() {
            let rem = ResolventRemainder::new(p, par, &g)?;
            norms[s].push(op_norm_estimate(&rem, opts.trials, opts.iters, opts.seed)?);
        }
    }
    let hbar0 = hbars
        .iter()
        .zip(norms[0].iter().zip(&norms[1]))
        .filter(|(_, (a, b))| **a < 1.0 && **b < 1.0)
        .map(|(h, _)| *h)
        .fold(None, |m: Option<f64>, h| Some(m.map_or(h, |x| x.max(h))));
    let h_min = hbars.iter().copied().fold(f64::INFINITY, f64::min);
    let g = grid(h_min)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let u = semiclassical_field(&g, r0 + 0.5 * len, 0.1 * len, &random_waves(opts.p_max, &mut rng))?;
    let mut neumann = Vec::new();
    for par in &pars {
        let rem = ResolventRemainder::new(p, par, &g)?;
        neumann.push(neumann_residuals(&rem, &u, opts.k_max)?);
    }
    let [norm_plus, norm_minus] = norms;
    let neumann_minus = neumann.pop().expect("two signs");
    let neumann_plus = neumann.pop().expect("two signs");
    Ok(SelfAdjointReport {
        symmetry_defect: symmetry,
        hbar: hbars.to_vec(),
        norm_plus,
        norm_minus,
        hbar0,
        neumann_hbar: h_min,
        neumann_plus,
        neumann_minus,
    })
}

/// `χ(δ|r|)` with `χ = 1` on `[0, 1]` and `χ = 0` on `[2, ∞)`.
pub fn radial_cutoff(delta: f64, r: f64) -> f64 {
    1.0 - smooth_step(delta * r.abs() - 1.0)
}

/// `T_δ = [P, χ(δ|r|)] Op¹(b) Π`.
pub struct CutoffCommutator<'a> {
    rem: &'a ResolventRemainder,
    delta: f64,
}

impl<'a> CutoffCommutator<'a> {
    pub fn new(rem: &'a ResolventRemainder, delta: f64) -> Result<CutoffCommutator<'a>> {
        let g = rem.grid();
        let reach = 2.0 / delta;
        if g.r_origin > -reach || g.r_origin + g.r_length < reach {
            return Err(Error::SupportEscapesWindow(format!(
                "cutoff at delta {delta} needs r in [-{reach}, {reach}], window is [{}, {}]",
                g.r_origin,
                g.r_origin + g.r_length
            )));
        }
        Ok(CutoffCommutator { rem, delta })
    }

    fn cut(&self, u: &HalfDensityField) -> HalfDensityField {
        let d = self.delta;
        u.multiply(move |r, _| C64::new(radial_cutoff(d, r), 0.0))
    }

    fn commutator(&self, w: &HalfDensityField, adjoint: bool) -> Result<HalfDensityField> {
        let p = |x: &HalfDensityField| if adjoint { self.rem.p.apply_adjoint(x) } else { self.rem.p.apply(x) };
        let mut out = p(&self.cut(w))?;
        out.axpy(C64::new(-1.0, 0.0), &self.cut(&p(w)?))?;
        Ok(out)
    }
}

impl LinearOperator for CutoffCommutator<'_> {
    fn grid(&self) -> &Grid {
        self.rem.grid()
    }

    fn apply(&self, u: &HalfDensityField) -> Result<HalfDensityField> {
        self.commutator(&self.rem.parametrix(&u.band_limit())?, false)
    }

    /// `[P, χ]* = -[P*, χ]`.
    fn apply_adjoint(&self, u: &HalfDensityField) -> Result<HalfDensityField> {
        let c = self.commutator(u, true)?.scale(C64::new(-1.0, 0.0));
        Ok(self.rem.b.apply_adjoint(&c)?.band_limit())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CommutatorReport {
    pub delta: Vec<f64>,
    pub norm: Vec<f64>,
    pub slope: f64,
    pub fit_residual: f64,
}

/// Norm estimates of `[P, χ(δ|r|)] Op¹(b(z)) Π` on one grid.
pub fn cutoff_commutator(
    p: &DiffOp,
    par: &Parametrix,
    grid: &Grid,
    deltas: &[f64],
    trials: usize,
    iters: usize,
    seed: u64,
) -> Result<CommutatorReport> {
    let rem = ResolventRemainder::new(p, par, grid)?;
    let norm: Vec<f64> = deltas
        .iter()
        .map(|&d| op_norm_estimate(&CutoffCommutator::new(&rem, d)?, trials, iters, seed))
        .collect::<Result<_>>()?;
    let LineFit { slope, residual, .. } = loglog_fit(deltas, &norm);
    Ok(CommutatorReport { delta: deltas.to_vec(), norm, slope, fit_residual: residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffops::{warped_laplacian, MultiIndex};
    use crate::expr::Expr;
    use crate::symbols::WeightFunction;

    fn constant_coeff() -> DiffOp {
        DiffOp::new(2, WeightFunction::one())
            .with_term(MultiIndex::new(2, 0), 0, Expr::one())
            .unwrap()
            .with_term(MultiIndex::new(0, 2), 0, Expr::one())
            .unwrap()
    }

    fn small() -> SelfAdjointOptions {
        SelfAdjointOptions { grid: (-4.0, 8.0, 64, 32), k_max: 1, trials: 1, iters: 4, ..Default::default() }
    }

    #[test]
    fn constant_coefficients_have_no_remainder() {
        let rep = selfadjoint_pipeline(&constant_coeff(), &[0.25, 0.125], &small()).unwrap();
        assert!(rep.symmetry_defect < 1e-12);
        assert!(rep.norm_plus.iter().chain(&rep.norm_minus).all(|n| *n <= 1e-9), "{rep:?}");
        assert_eq!(rep.hbar0, Some(0.25));
        assert!(rep.neumann_final() <= 1e-8, "{rep:?}");
    }

    #[test]
    fn remainder_adjoint_pairing() {
        let w = WeightFunction::sqrt1pr2();
        let p = warped_laplacian(&w, &Expr::one()).unwrap();
        let par = build_parametrix(&p, C64::new(0.0, 1.0), 1).unwrap();
        let g = Grid::new(-4.0, 8.0, 32, 16, 0.25).unwrap();
        let rem = ResolventRemainder::new(&p, &par, &g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = random_test_field(&g, 0.0, 1.0, &mut rng);
        let v = random_test_field(&g, 0.5, 1.0, &mut rng);
        let lhs = rem.apply(&u).unwrap().inner(&v).unwrap();
        let rhs = u.inner(&rem.apply_adjoint(&v).unwrap()).unwrap();
        assert!((lhs - rhs).norm() < 1e-10 * u.l2_norm() * v.l2_norm());
        let c = CutoffCommutator::new(&rem, 0.6).unwrap();
        let lhs = c.apply(&u).unwrap().inner(&v).unwrap();
        let rhs = u.inner(&c.apply_adjoint(&v).unwrap()).unwrap();
        assert!((lhs - rhs).norm() < 1e-10 * u.l2_norm() * v.l2_norm());
        assert!(CutoffCommutator::new(&rem, 0.4).is_err());
    }

    #[test]
    fn cutoff_profile() {
        assert_eq!(radial_cutoff(0.5, 1.5), 1.0);
        assert_eq!(radial_cutoff(0.5, -4.5), 0.0);
        let mid = radial_cutoff(0.5, 3.0);
        assert!((mid - 0.5).abs() < 1e-12);
    }
}

use super::grid::{fft2, fft_theta, Grid, HalfDensityField};
use super::norm::LinearOperator;
use crate::error::{Error, Result};
use crate::expr::{Expr, Tape, Var, C64};
use crate::symbols::{Symbol, SymbolSeries};
use rayon::prelude::*;
use std::collections::HashMap;
use std::f64::consts::TAU;
use std::sync::OnceLock;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// `Op^t_ħ(a)` on a periodic grid.
///
/// For `t = 1` the sum over `q'` is a DFT and the symbol is applied mode by
/// mode. `t = 0` is realised as the exact discrete adjoint of `Op¹(ā)`.
/// Other `t` use kernels assembled per distinct quantisation point.
pub struct QuantizedOp {
    grid: Grid,
    expr: Expr,
    t: f64,
    kind: Kind,
}

enum Kind {
    Scalar(C64),
    Left(Left),
    Right(Box<QuantizedOp>),
    Generic(Generic),
}

struct Left {
    tape: Tape,
    theta_dep: bool,
    tables: Vec<OnceLock<Vec<C64>>>,
    samples: OnceLock<Vec<C64>>,
}

const SAMPLE_CACHE_LIMIT: usize = 1 << 22;

struct Generic {
    tape: Tape,
    theta_dep: bool,
    radial: Vec<OnceLock<Vec<C64>>>,
    full: OnceLock<Vec<C64>>,
}

fn roots(n: usize) -> Vec<C64> {
    (0..n).map(|j| C64::from_polar(1.0, TAU * j as f64 / n as f64)).collect()
}

impl QuantizedOp {
    pub fn new(grid: &Grid, a: &Expr, t: f64) -> Result<QuantizedOp> {
        QuantizedOp::with_z(grid, a, t, None)
    }

    /// As [`QuantizedOp::new`], fixing the spectral parameter if the symbol
    /// mentions `z`.
    pub fn with_z(grid: &Grid, a: &Expr, t: f64, z: Option<C64>) -> Result<QuantizedOp> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidArgument(format!("t = {t} outside [0, 1]")));
        }
        if a.depends_on(Var::RPrime) || a.depends_on(Var::ThetaPrime) {
            return Err(Error::InvalidArgument("quantised symbol must not use primed variables".into()));
        }
        let mut map = vec![(Var::Hbar, Expr::real(grid.hbar))];
        if let Some(z) = z {
            map.push((Var::Z, Expr::constant(z)));
        }
        let expr = a.subst(&map);
        if expr.depends_on(Var::Z) {
            return Err(Error::InvalidArgument("symbol depends on z but no z was given".into()));
        }
        let theta_dep = expr.depends_on(Var::Theta);
        let kind = if let Some(c) = expr.as_const() {
            Kind::Scalar(c)
        } else if t == 1.0 {
            Kind::Left(Left {
                tape: Tape::compile(&expr),
                theta_dep,
                tables: (0..grid.n_theta).map(|_| OnceLock::new()).collect(),
                samples: OnceLock::new(),
            })
        } else if t == 0.0 {
            Kind::Right(Box::new(QuantizedOp::new(grid, &expr.conj(), 1.0)?))
        } else {
            if theta_dep && grid.len() > 2048 {
                return Err(Error::InvalidGrid(format!(
                    "angle-dependent symbols at t = {t} need n_r * n_theta <= 2048"
                )));
            }
            Kind::Generic(Generic {
                tape: Tape::compile(&expr),
                theta_dep,
                radial: (0..grid.n_theta).map(|_| OnceLock::new()).collect(),
                full: OnceLock::new(),
            })
        };
        Ok(QuantizedOp { grid: *grid, expr, t, kind })
    }

    pub fn from_symbol(grid: &Grid, a: &Symbol, t: f64) -> Result<QuantizedOp> {
        QuantizedOp::new(grid, &a.expr, t)
    }

    /// Quantises `Σ ħ^j b_j` at the grid's `ħ`.
    pub fn from_series(grid: &Grid, s: &SymbolSeries, t: f64) -> Result<QuantizedOp> {
        QuantizedOp::with_z(grid, &s.total_at(grid.hbar), t, s.z)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn symbol(&self) -> &Expr {
        &self.expr
    }

    fn check(&self, u: &HalfDensityField) -> Result<()> {
        if u.grid != self.grid {
            return Err(Error::GridMismatch(format!("field on {:?}, operator on {:?}", u.grid, self.grid)));
        }
        Ok(())
    }

    pub fn apply(&self, u: &HalfDensityField) -> Result<HalfDensityField> {
        self.check(u)?;
        match &self.kind {
            Kind::Scalar(c) => Ok(u.scale(*c)),
            Kind::Left(l) => self.left_apply(l, u),
            Kind::Right(inner) => inner.apply_adjoint(u),
            Kind::Generic(g) => self.generic_apply(g, u, false),
        }
    }

    pub fn apply_adjoint(&self, u: &HalfDensityField) -> Result<HalfDensityField> {
        self.check(u)?;
        match &self.kind {
            Kind::Scalar(c) => Ok(u.scale(c.conj())),
            Kind::Left(l) => self.left_adjoint(l, u),
            Kind::Right(inner) => inner.apply(u),
            Kind::Generic(g) => self.generic_apply(g, u, true),
        }
    }

    fn vars(&self, r: f64, theta: f64, rho: f64, eta: f64) -> [C64; 8] {
        let mut v = [ZERO; 8];
        v[Var::R.index()] = C64::new(r, 0.0);
        v[Var::Theta.index()] = C64::new(theta, 0.0);
        v[Var::Rho.index()] = C64::new(rho, 0.0);
        v[Var::Eta.index()] = C64::new(eta, 0.0);
        v[Var::Hbar.index()] = C64::new(self.grid.hbar, 0.0);
        v
    }

    // ----- t = 1 -----

    /// `T_l[i, m] = a(r_i, ρ_m, η_l) e^{2πi m i / n_r}`.
    fn left_table<'a>(&self, l: &'a Left, lidx: usize) -> Result<&'a Vec<C64>> {
        if let Some(t) = l.tables[lidx].get() {
            return Ok(t);
        }
        let g = &self.grid;
        let n = g.n_r;
        let w = roots(n);
        let eta = g.eta(lidx);
        let rows: Result<Vec<Vec<C64>>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut scratch = Vec::new();
                (0..n)
                    .map(|m| {
                        let a = l.tape.eval_vars(&self.vars(g.r(i), 0.0, g.rho(m), eta), &mut scratch)?;
                        Ok(a * w[(m * i) % n])
                    })
                    .collect()
            })
            .collect();
        let table: Vec<C64> = rows?.concat();
        Ok(l.tables[lidx].get_or_init(|| table))
    }

    fn left_apply(&self, l: &Left, u: &HalfDensityField) -> Result<HalfDensityField> {
        let g = self.grid;
        let s = u.spectrum();
        if l.theta_dep {
            return self.left_apply_theta(l, &s);
        }
        let (nr, nt) = (g.n_r, g.n_theta);
        let cols: Result<Vec<(usize, Vec<C64>)>> = (0..nt)
            .into_par_iter()
            .filter(|&lx| (0..nr).any(|m| s[g.index(m, lx)] != ZERO))
            .map(|lx| {
                let t = self.left_table(l, lx)?;
                let active: Vec<(usize, C64)> =
                    (0..nr).map(|m| (m, s[g.index(m, lx)])).filter(|(_, c)| *c != ZERO).collect();
                let col = (0..nr).map(|i| active.iter().map(|&(m, c)| t[i * nr + m] * c).sum()).collect();
                Ok((lx, col))
            })
            .collect();
        let mut out = vec![ZERO; g.len()];
        for (lx, col) in cols? {
            for i in 0..nr {
                out[g.index(i, lx)] = col[i];
            }
        }
        out.par_chunks_mut(nt).for_each(|row| fft_theta(row, nt, true));
        Ok(HalfDensityField { grid: g, values: out })
    }

    /// Symbol values `a(q, p)` indexed `[q * N + p]`, cached for moderate
    /// grids.
    fn left_samples<'a>(&self, l: &'a Left) -> Result<Option<&'a Vec<C64>>> {
        let g = &self.grid;
        let n = g.len();
        if n * n > SAMPLE_CACHE_LIMIT {
            return Ok(None);
        }
        if let Some(s) = l.samples.get() {
            return Ok(Some(s));
        }
        let rows: Result<Vec<Vec<C64>>> = (0..n)
            .into_par_iter()
            .map(|q| {
                let (i, k) = (q / g.n_theta, q % g.n_theta);
                let mut scratch = Vec::new();
                (0..n)
                    .map(|p| {
                        let (m, lx) = (p / g.n_theta, p % g.n_theta);
                        l.tape.eval_vars(&self.vars(g.r(i), g.theta(k), g.rho(m), g.eta(lx)), &mut scratch)
                    })
                    .collect()
            })
            .collect();
        let table = rows?.concat();
        Ok(Some(l.samples.get_or_init(|| table)))
    }

    fn symbol_at(
        &self,
        l: &Left,
        cache: Option<&Vec<C64>>,
        q: (usize, usize),
        p: (usize, usize),
        scratch: &mut Vec<C64>,
    ) -> Result<C64> {
        let g = &self.grid;
        match cache {
            Some(c) => Ok(c[g.index(q.0, q.1) * g.len() + g.index(p.0, p.1)]),
            None => l.tape.eval_vars(&self.vars(g.r(q.0), g.theta(q.1), g.rho(p.0), g.eta(p.1)), scratch),
        }
    }

    fn left_apply_theta(&self, l: &Left, s: &[C64]) -> Result<HalfDensityField> {
        let g = self.grid;
        let (nr, nt) = (g.n_r, g.n_theta);
        let wr = roots(nr);
        let wt = roots(nt);
        let cache = self.left_samples(l)?;
        let active: Vec<(usize, usize, C64)> = (0..nr)
            .flat_map(|m| (0..nt).map(move |lx| (m, lx)))
            .map(|(m, lx)| (m, lx, s[g.index(m, lx)]))
            .filter(|x| x.2 != ZERO)
            .collect();
        let rows: Result<Vec<Vec<C64>>> = (0..nr)
            .into_par_iter()
            .map(|i| {
                let mut scratch = Vec::new();
                (0..nt)
                    .map(|k| {
                        let mut acc = ZERO;
                        for &(m, lx, c) in &active {
                            let a = self.symbol_at(l, cache, (i, k), (m, lx), &mut scratch)?;
                            acc += a * c * wr[(m * i) % nr] * wt[(lx * k) % nt];
                        }
                        Ok(acc)
                    })
                    .collect()
            })
            .collect();
        Ok(HalfDensityField { grid: g, values: rows?.concat() })
    }

    fn left_adjoint(&self, l: &Left, u: &HalfDensityField) -> Result<HalfDensityField> {
        let g = self.grid;
        let (nr, nt) = (g.n_r, g.n_theta);
        let mut c = vec![ZERO; g.len()];
        if l.theta_dep {
            let cache = self.left_samples(l)?;
            let wr = roots(nr);
            let wt = roots(nt);
            let rows: Result<Vec<Vec<C64>>> = (0..nr)
                .into_par_iter()
                .map(|m| {
                    let mut scratch = Vec::new();
                    (0..nt)
                        .map(|lx| {
                            let mut acc = ZERO;
                            for i in 0..nr {
                                for k in 0..nt {
                                    let v = u.get(i, k);
                                    if v == ZERO {
                                        continue;
                                    }
                                    let a = self.symbol_at(l, cache, (i, k), (m, lx), &mut scratch)?;
                                    acc += (a * wr[(m * i) % nr] * wt[(lx * k) % nt]).conj() * v;
                                }
                            }
                            Ok(acc)
                        })
                        .collect()
                })
                .collect();
            c = rows?.concat();
        } else {
            let mut v = u.values.clone();
            v.par_chunks_mut(nt).for_each(|row| fft_theta(row, nt, false));
            let cols: Result<Vec<(usize, Vec<C64>)>> = (0..nt)
                .into_par_iter()
                .filter(|&lx| (0..nr).any(|i| v[g.index(i, lx)] != ZERO))
                .map(|lx| {
                    let t = self.left_table(l, lx)?;
                    let col =
                        (0..nr).map(|m| (0..nr).map(|i| t[i * nr + m].conj() * v[g.index(i, lx)]).sum()).collect();
                    Ok((lx, col))
                })
                .collect();
            for (lx, col) in cols? {
                for m in 0..nr {
                    c[g.index(m, lx)] = col[m];
                }
            }
        }
        fft2(&mut c, nr, nt, true);
        let n = g.len() as f64;
        c.iter_mut().for_each(|x| *x /= n);
        Ok(HalfDensityField { grid: g, values: c })
    }

    // ----- generic t -----

    /// Quantisation points between `x'` and `x` on a periodic axis of `n`
    /// cells, in cell units, with weights. The step `d` is the minimal image
    /// of `x - x'`; antipodal pairs are ambiguous and split evenly between
    /// both signs so that the adjoint relation stays exact.
    fn midpoints(&self, i: usize, ip: usize, n: usize) -> Vec<(f64, f64)> {
        let mut d = i as i64 - ip as i64;
        let half = n as i64 / 2;
        if d >= half {
            d -= n as i64;
        } else if d < -half {
            d += n as i64;
        }
        let at = |d: i64| (ip as f64 + self.t * d as f64).rem_euclid(n as f64);
        if d == -half {
            vec![(at(d), 0.5), (at(half), 0.5)]
        } else {
            vec![(at(d), 1.0)]
        }
    }

    /// Groups weighted ordered pairs `(i, i')` by their quantisation point.
    fn classes(&self, n: usize) -> Vec<(f64, Vec<(usize, usize, f64)>)> {
        let mut map: HashMap<u64, usize> = HashMap::new();
        let mut out: Vec<(f64, Vec<(usize, usize, f64)>)> = Vec::new();
        for i in 0..n {
            for ip in 0..n {
                for (x, w) in self.midpoints(i, ip, n) {
                    let slot = *map.entry(x.to_bits()).or_insert_with(|| {
                        out.push((x, Vec::new()));
                        out.len() - 1
                    });
                    out[slot].1.push((i, ip, w));
                }
            }
        }
        out
    }

    /// `K_l[i, i'] = n_r⁻¹ Σ_m a(x, ρ_m, η_l) e^{2πi m (i-i')/n_r}`.
    fn radial_kernel<'a>(&self, g: &'a Generic, lidx: usize) -> Result<&'a Vec<C64>> {
        if let Some(k) = g.radial[lidx].get() {
            return Ok(k);
        }
        let grid = &self.grid;
        let n = grid.n_r;
        let eta = grid.eta(lidx);
        let classes = self.classes(n);
        let parts: Result<Vec<Vec<(usize, C64)>>> = classes
            .par_iter()
            .map(|(x, pairs)| {
                let r = grid.r_origin + x * grid.dr();
                let mut scratch = Vec::new();
                let mut col = (0..n)
                    .map(|m| g.tape.eval_vars(&self.vars(r, 0.0, grid.rho(m), eta), &mut scratch))
                    .collect::<Result<Vec<C64>>>()?;
                super::grid::fft_theta(&mut col, n, true);
                Ok(pairs.iter().map(|&(i, ip, w)| (i * n + ip, col[(i + n - ip) % n] * (w / n as f64))).collect())
            })
            .collect();
        let mut k = vec![ZERO; n * n];
        for part in parts? {
            for (idx, v) in part {
                k[idx] += v;
            }
        }
        Ok(g.radial[lidx].get_or_init(|| k))
    }

    fn full_kernel<'a>(&self, g: &'a Generic) -> Result<&'a Vec<C64>> {
        if let Some(k) = g.full.get() {
            return Ok(k);
        }
        let grid = &self.grid;
        let (nr, nt) = (grid.n_r, grid.n_theta);
        let n = grid.len();
        let cr = self.classes(nr);
        let ct = self.classes(nt);
        let jobs: Vec<(usize, usize)> = (0..cr.len()).flat_map(|a| (0..ct.len()).map(move |b| (a, b))).collect();
        let parts: Result<Vec<Vec<(usize, C64)>>> = jobs
            .par_iter()
            .map(|&(a, b)| {
                let r = grid.r_origin + cr[a].0 * grid.dr();
                let th = ct[b].0 * grid.dtheta();
                let mut scratch = Vec::new();
                let mut tab = Vec::with_capacity(n);
                for m in 0..nr {
                    for lx in 0..nt {
                        tab.push(g.tape.eval_vars(&self.vars(r, th, grid.rho(m), grid.eta(lx)), &mut scratch)?);
                    }
                }
                fft2(&mut tab, nr, nt, true);
                let mut out = Vec::with_capacity(cr[a].1.len() * ct[b].1.len());
                for &(i, ip, wi) in &cr[a].1 {
                    for &(k, kp, wk) in &ct[b].1 {
                        let d = grid.index((i + nr - ip) % nr, (k + nt - kp) % nt);
                        out.push((grid.index(i, k) * n + grid.index(ip, kp), tab[d] * (wi * wk / n as f64)));
                    }
                }
                Ok(out)
            })
            .collect();
        let mut k = vec![ZERO; n * n];
        for part in parts? {
            for (idx, v) in part {
                k[idx] += v;
            }
        }
        Ok(g.full.get_or_init(|| k))
    }

    fn generic_apply(&self, g: &Generic, u: &HalfDensityField, adjoint: bool) -> Result<HalfDensityField> {
        let grid = self.grid;
        let (nr, nt) = (grid.n_r, grid.n_theta);
        if g.theta_dep {
            let k = self.full_kernel(g)?;
            let n = grid.len();
            let values = (0..n)
                .into_par_iter()
                .map(|q| {
                    if adjoint {
                        (0..n).map(|qp| k[qp * n + q].conj() * u.values[qp]).sum()
                    } else {
                        (0..n).map(|qp| k[q * n + qp] * u.values[qp]).sum()
                    }
                })
                .collect();
            return Ok(HalfDensityField { grid, values });
        }
        let mut v = u.values.clone();
        v.par_chunks_mut(nt).for_each(|row| fft_theta(row, nt, false));
        v.iter_mut().for_each(|x| *x /= nt as f64);
        let cols: Result<Vec<(usize, Vec<C64>)>> = (0..nt)
            .into_par_iter()
            .filter(|&lx| (0..nr).any(|i| v[grid.index(i, lx)] != ZERO))
            .map(|lx| {
                let k = self.radial_kernel(g, lx)?;
                let col = (0..nr)
                    .map(|i| {
                        (0..nr)
                            .map(|ip| {
                                let kv = if adjoint { k[ip * nr + i].conj() } else { k[i * nr + ip] };
                                kv * v[grid.index(ip, lx)]
                            })
                            .sum()
                    })
                    .collect();
                Ok((lx, col))
            })
            .collect();
        let mut out = vec![ZERO; grid.len()];
        for (lx, col) in cols? {
            for i in 0..nr {
                out[grid.index(i, lx)] = col[i];
            }
        }
        out.par_chunks_mut(nt).for_each(|row| fft_theta(row, nt, true));
        Ok(HalfDensityField { grid, values: out })
    }
}

impl LinearOperator for QuantizedOp {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn apply(&self, u: &HalfDensityField) -> Result<HalfDensityField> {
        QuantizedOp::apply(self, u)
    }

    fn apply_adjoint(&self, u: &HalfDensityField) -> Result<HalfDensityField> {
        QuantizedOp::apply_adjoint(self, u)
    }
}

/// One-shot `Op^t(a) u`.
pub fn apply_op(a: &Expr, t: f64, u: &HalfDensityField) -> Result<HalfDensityField> {
    QuantizedOp::new(&u.grid, a, t)?.apply(u)
}

/// Spectral `ħD_r u`.
pub fn hbar_d_r(u: &HalfDensityField) -> HalfDensityField {
    multiplier(u, |g, m, _| g.rho(m))
}

/// Spectral `ħD_θ u`.
pub fn hbar_d_theta(u: &HalfDensityField) -> HalfDensityField {
    multiplier(u, |g, _, l| g.eta(l))
}

/// Applies a Fourier multiplier `c(m, l)` on the dual lattice.
pub fn multiplier(u: &HalfDensityField, c: impl Fn(&Grid, usize, usize) -> f64) -> HalfDensityField {
    let g = u.grid;
    let mut s = u.spectrum();
    for m in 0..g.n_r {
        for l in 0..g.n_theta {
            s[g.index(m, l)] *= c(&g, m, l);
        }
    }
    HalfDensityField::from_spectrum(&g, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantize::grid::random_test_field;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid() -> Grid {
        Grid::new(-8.0, 16.0, 128, 16, 0.25).unwrap()
    }

    fn field(seed: u64) -> HalfDensityField {
        random_test_field(&grid(), 0.0, 1.0, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    fn rel(a: &HalfDensityField, b: &HalfDensityField) -> f64 {
        (a - b).l2_norm() / b.l2_norm().max(1e-300)
    }

    #[test]
    fn identity_symbol_for_all_t() {
        let u = field(1);
        for t in [0.0, 0.5, 1.0, 0.3] {
            let v = apply_op(&Expr::one(), t, &u).unwrap();
            assert!(rel(&v, &u) <= 1e-12, "t={t}");
        }
    }

    #[test]
    fn rho_is_spectral_derivative() {
        let g = grid();
        let u = HalfDensityField::from_fn(&g, |r, _| C64::new(0.0, TAU * r / g.r_length).exp() * (-(r * r)).exp());
        let d = hbar_d_r(&u);
        for t in [0.0, 0.5, 1.0] {
            assert!(rel(&apply_op(&Expr::rho(), t, &u).unwrap(), &d) <= 1e-8);
        }
    }

    #[test]
    fn left_minus_right_r_rho() {
        let u = field(2);
        let a = Expr::r() * Expr::rho();
        let d = &apply_op(&a, 1.0, &u).unwrap() - &apply_op(&a, 0.0, &u).unwrap();
        let expect = u.scale(C64::new(0.0, grid().hbar));
        assert!(rel(&d, &expect) <= 1e-8, "{}", rel(&d, &expect));
    }

    fn adjoint_defect(a: &Expr, t: f64) -> f64 {
        let g = grid();
        let (u, v) = (field(3), field(4));
        let lhs = QuantizedOp::new(&g, a, t).unwrap().apply(&u).unwrap().inner(&v).unwrap();
        let rhs = u.inner(&QuantizedOp::new(&g, &a.conj(), 1.0 - t).unwrap().apply(&v).unwrap()).unwrap();
        (lhs - rhs).norm() / (u.l2_norm() * v.l2_norm())
    }

    #[test]
    fn adjoint_relation_theta_free() {
        let a = Expr::r().sin() * Expr::rho() + Expr::i() * Expr::eta().pow(2) * (Expr::r() * 0.3).cos();
        for t in [0.0, 0.25, 0.5, 1.0] {
            assert!(adjoint_defect(&a, t) <= 1e-10, "t={t}");
        }
    }

    #[test]
    fn adjoint_relation_theta_dependent() {
        let g = Grid::new(-2.0, 4.0, 8, 8, 0.5).unwrap();
        let a = Expr::theta().cos() * Expr::rho() + Expr::r() * Expr::eta() * Expr::i();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u = HalfDensityField::from_fn(&g, |_, _| C64::new(rand::Rng::gen(&mut rng), 0.0));
        let v = HalfDensityField::from_fn(&g, |r, th| C64::new(r.cos(), th.sin()));
        for t in [0.0, 0.5, 0.7, 1.0] {
            let lhs = QuantizedOp::new(&g, &a, t).unwrap().apply(&u).unwrap().inner(&v).unwrap();
            let b = QuantizedOp::new(&g, &a.conj(), 1.0 - t).unwrap();
            let rhs = u.inner(&b.apply(&v).unwrap()).unwrap();
            assert!((lhs - rhs).norm() <= 1e-10 * u.l2_norm() * v.l2_norm(), "t={t}");
        }
    }

    #[test]
    fn operator_adjoint_matches_inner_products() {
        let g = grid();
        let a = Expr::r().cos() * Expr::rho() * Expr::i() + Expr::eta();
        for t in [0.0, 0.5, 1.0] {
            let op = QuantizedOp::new(&g, &a, t).unwrap();
            let (u, v) = (field(5), field(6));
            let lhs = op.apply(&u).unwrap().inner(&v).unwrap();
            let rhs = u.inner(&op.apply_adjoint(&v).unwrap()).unwrap();
            assert!((lhs - rhs).norm() <= 1e-10 * u.l2_norm() * v.l2_norm());
        }
    }

    #[test]
    fn linear_in_symbol_and_field() {
        let g = grid();
        let a = Expr::r().sin() * Expr::rho();
        let b = Expr::eta() * Expr::r();
        let (u, v) = (field(7), field(8));
        let two = C64::new(2.0, 0.0);
        let lhs = apply_op(&(a.clone() * 2.0 + b.clone()), 1.0, &u).unwrap();
        let mut rhs = apply_op(&a, 1.0, &u).unwrap().scale(two);
        rhs.axpy(C64::new(1.0, 0.0), &apply_op(&b, 1.0, &u).unwrap()).unwrap();
        assert!(rel(&lhs, &rhs) <= 1e-12);
        let op = QuantizedOp::new(&g, &a, 0.5).unwrap();
        let mut w = u.scale(two);
        w.axpy(C64::new(1.0, 0.0), &v).unwrap();
        let mut expect = op.apply(&u).unwrap().scale(two);
        expect.axpy(C64::new(1.0, 0.0), &op.apply(&v).unwrap()).unwrap();
        assert!(rel(&op.apply(&w).unwrap(), &expect) <= 1e-12);
    }
}

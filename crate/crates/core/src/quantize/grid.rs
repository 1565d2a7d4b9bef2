use crate::error::{Error, Result};
use crate::expr::C64;
use rand::Rng;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::f64::consts::TAU;
use std::io::{Read, Write};
use std::ops;
use std::sync::{Arc, Mutex, OnceLock};

/// Periodic sample grid on `[r_origin, r_origin + r_length) × [0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub r_origin: f64,
    pub r_length: f64,
    pub n_r: usize,
    pub n_theta: usize,
    pub hbar: f64,
}

impl Grid {
    pub fn new(r_origin: f64, r_length: f64, n_r: usize, n_theta: usize, hbar: f64) -> Result<Grid> {
        for (name, n) in [("n_r", n_r), ("n_theta", n_theta)] {
            if n < 8 || !n.is_power_of_two() {
                return Err(Error::InvalidGrid(format!("{name} = {n} must be a power of two >= 8")));
            }
        }
        if !(r_length > 0.0) || !r_origin.is_finite() {
            return Err(Error::InvalidGrid(format!("bad r window [{r_origin}, +{r_length})")));
        }
        if !(hbar > 0.0 && hbar <= 1.0) {
            return Err(Error::InvalidGrid(format!("hbar = {hbar} outside (0, 1]")));
        }
        Ok(Grid { r_origin, r_length, n_r, n_theta, hbar })
    }

    pub fn with_hbar(&self, hbar: f64) -> Result<Grid> {
        Grid::new(self.r_origin, self.r_length, self.n_r, self.n_theta, hbar)
    }

    /// Rejects grids whose angular dual lattice cannot reach `eta_needed`.
    pub fn require_eta_cover(&self, eta_needed: f64) -> Result<()> {
        let cover = self.hbar * (self.n_theta / 2) as f64;
        if cover < eta_needed {
            return Err(Error::InvalidGrid(format!("eta lattice reaches {cover}, need {eta_needed}; raise n_theta")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n_r * self.n_theta
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dr(&self) -> f64 {
        self.r_length / self.n_r as f64
    }

    pub fn dtheta(&self) -> f64 {
        TAU / self.n_theta as f64
    }

    pub fn cell(&self) -> f64 {
        self.dr() * self.dtheta()
    }

    pub fn r(&self, i: usize) -> f64 {
        self.r_origin + i as f64 * self.dr()
    }

    pub fn theta(&self, k: usize) -> f64 {
        k as f64 * self.dtheta()
    }

    /// Signed frequency of FFT slot `m` for length `n`.
    pub fn freq(m: usize, n: usize) -> i64 {
        if m < n / 2 {
            m as i64
        } else {
            m as i64 - n as i64
        }
    }

    pub fn rho(&self, m: usize) -> f64 {
        TAU * self.hbar * Grid::freq(m, self.n_r) as f64 / self.r_length
    }

    pub fn eta(&self, l: usize) -> f64 {
        self.hbar * Grid::freq(l, self.n_theta) as f64
    }

    pub fn index(&self, i: usize, k: usize) -> usize {
        i * self.n_theta + k
    }

    /// Folds `r` into the periodic window.
    pub fn wrap_r(&self, r: f64) -> f64 {
        self.r_origin + (r - self.r_origin).rem_euclid(self.r_length)
    }

    pub fn same_lattice(&self, other: &Grid) -> bool {
        self == other
    }
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut g = cache.lock().unwrap();
    g.entry((n, inverse))
        .or_insert_with(|| {
            let mut p = FftPlanner::new();
            if inverse {
                p.plan_fft_inverse(n)
            } else {
                p.plan_fft_forward(n)
            }
        })
        .clone()
}

/// Unnormalised FFT along θ (contiguous rows).
pub fn fft_theta(data: &mut [C64], n_theta: usize, inverse: bool) {
    plan(n_theta, inverse).process(data);
}

/// Unnormalised FFT along r (strided columns).
pub fn fft_r(data: &mut [C64], n_r: usize, n_theta: usize, inverse: bool) {
    let p = plan(n_r, inverse);
    let mut col = vec![C64::new(0.0, 0.0); n_r];
    for k in 0..n_theta {
        for i in 0..n_r {
            col[i] = data[i * n_theta + k];
        }
        p.process(&mut col);
        for i in 0..n_r {
            data[i * n_theta + k] = col[i];
        }
    }
}

/// Unnormalised 2-D FFT; `forward` uses `e^{-i…}`.
pub fn fft2(data: &mut [C64], n_r: usize, n_theta: usize, inverse: bool) {
    fft_theta(data, n_theta, inverse);
    fft_r(data, n_r, n_theta, inverse);
}

/// Coefficient `v` of a half-density `v |dr dθ|^{1/2}` sampled on a grid,
/// stored row-major in `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfDensityField {
    pub grid: Grid,
    pub values: Vec<C64>,
}

impl HalfDensityField {
    pub fn zeros(grid: &Grid) -> HalfDensityField {
        HalfDensityField { grid: *grid, values: vec![C64::new(0.0, 0.0); grid.len()] }
    }

    pub fn from_values(grid: &Grid, values: Vec<C64>) -> Result<HalfDensityField> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!("{} values for a {}-point grid", values.len(), grid.len())));
        }
        Ok(HalfDensityField { grid: *grid, values })
    }

    pub fn from_fn(grid: &Grid, mut f: impl FnMut(f64, f64) -> C64) -> HalfDensityField {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.n_r {
            for k in 0..grid.n_theta {
                values.push(f(grid.r(i), grid.theta(k)));
            }
        }
        HalfDensityField { grid: *grid, values }
    }

    pub fn get(&self, i: usize, k: usize) -> C64 {
        self.values[self.grid.index(i, k)]
    }

    fn check(&self, other: &HalfDensityField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", self.grid, other.grid)));
        }
        Ok(())
    }

    /// `∫ u v̄` with the equal-weight rule.
    pub fn inner(&self, other: &HalfDensityField) -> Result<C64> {
        self.check(other)?;
        let s: C64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b.conj()).sum();
        Ok(s * self.grid.cell())
    }

    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn scale(&self, c: C64) -> HalfDensityField {
        HalfDensityField { grid: self.grid, values: self.values.iter().map(|v| v * c).collect() }
    }

    pub fn axpy(&mut self, c: C64, x: &HalfDensityField) -> Result<()> {
        self.check(x)?;
        for (a, b) in self.values.iter_mut().zip(&x.values) {
            *a += c * b;
        }
        Ok(())
    }

    /// Pointwise product with a function of `(r, θ)`.
    pub fn multiply(&self, f: impl Fn(f64, f64) -> C64) -> HalfDensityField {
        let g = self.grid;
        let mut out = self.clone();
        for i in 0..g.n_r {
            for k in 0..g.n_theta {
                out.values[g.index(i, k)] *= f(g.r(i), g.theta(k));
            }
        }
        out
    }

    /// Normalised spectral coefficients `û(m, l)` (so that the inverse
    /// unnormalised transform returns `u`).
    pub fn spectrum(&self) -> Vec<C64> {
        let mut s = self.values.clone();
        fft2(&mut s, self.grid.n_r, self.grid.n_theta, false);
        let n = self.grid.len() as f64;
        s.iter_mut().for_each(|v| *v /= n);
        s
    }

    pub fn from_spectrum(grid: &Grid, mut s: Vec<C64>) -> HalfDensityField {
        fft2(&mut s, grid.n_r, grid.n_theta, true);
        HalfDensityField { grid: *grid, values: s }
    }

    /// Zeroes every spectral coefficient whose signed index lies in the top
    /// third of either axis.
    pub fn band_limit(&self) -> HalfDensityField {
        let g = self.grid;
        let mut s = self.spectrum();
        let cut_r = g.n_r as i64 / 3;
        let cut_t = g.n_theta as i64 / 3;
        for m in 0..g.n_r {
            for l in 0..g.n_theta {
                if Grid::freq(m, g.n_r).abs() > cut_r || Grid::freq(l, g.n_theta).abs() > cut_t {
                    s[g.index(m, l)] = C64::new(0.0, 0.0);
                }
            }
        }
        HalfDensityField::from_spectrum(&g, s)
    }

    /// Largest `|u|` within `margin` (fraction of the window) of the seam.
    pub fn seam_magnitude(&self, margin: f64) -> f64 {
        let g = self.grid;
        let w = margin * g.r_length;
        let mut m: f64 = 0.0;
        for i in 0..g.n_r {
            let r = g.r(i) - g.r_origin;
            if r < w || r > g.r_length - w {
                for k in 0..g.n_theta {
                    m = m.max(self.get(i, k).norm());
                }
            }
        }
        m
    }

    pub fn require_window_support(&self, margin: f64, tol: f64) -> Result<()> {
        let m = self.seam_magnitude(margin);
        if m > tol {
            return Err(Error::SupportEscapesWindow(format!("field reaches {m:e} near the seam")));
        }
        Ok(())
    }

    /// Binary form: 32-byte header (`HDF1`, `n_r` u16, `n_θ` u16, `L_r`,
    /// `r_origin`, `ħ` as f64) followed by little-endian complex64 values.
    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        let g = self.grid;
        if g.n_r > u16::MAX as usize || g.n_theta > u16::MAX as usize {
            return Err(Error::Format("grid too large for HDF1".into()));
        }
        let mut buf = Vec::with_capacity(32 + 8 * self.values.len());
        buf.extend_from_slice(b"HDF1");
        buf.extend_from_slice(&(g.n_r as u16).to_le_bytes());
        buf.extend_from_slice(&(g.n_theta as u16).to_le_bytes());
        buf.extend_from_slice(&g.r_length.to_le_bytes());
        buf.extend_from_slice(&g.r_origin.to_le_bytes());
        buf.extend_from_slice(&g.hbar.to_le_bytes());
        for v in &self.values {
            buf.extend_from_slice(&(v.re as f32).to_le_bytes());
            buf.extend_from_slice(&(v.im as f32).to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<HalfDensityField> {
        let mut head = [0u8; 32];
        r.read_exact(&mut head)?;
        if &head[0..4] != b"HDF1" {
            return Err(Error::Format("bad magic".into()));
        }
        let u16_at = |o: usize| u16::from_le_bytes([head[o], head[o + 1]]) as usize;
        let f64_at = |o: usize| f64::from_le_bytes(head[o..o + 8].try_into().unwrap());
        let grid = Grid::new(f64_at(16), f64_at(8), u16_at(4), u16_at(6), f64_at(24))?;
        let mut body = vec![0u8; 8 * grid.len()];
        r.read_exact(&mut body)?;
        let values = body
            .chunks_exact(8)
            .map(|c| {
                let re = f32::from_le_bytes(c[0..4].try_into().unwrap());
                let im = f32::from_le_bytes(c[4..8].try_into().unwrap());
                C64::new(re as f64, im as f64)
            })
            .collect();
        Ok(HalfDensityField { grid, values })
    }
}

impl ops::Sub for &HalfDensityField {
    type Output = HalfDensityField;
    fn sub(self, rhs: &HalfDensityField) -> HalfDensityField {
        assert_eq!(self.grid, rhs.grid, "grid mismatch");
        let values = self.values.iter().zip(&rhs.values).map(|(a, b)| a - b).collect();
        HalfDensityField { grid: self.grid, values }
    }
}

impl ops::Add for &HalfDensityField {
    type Output = HalfDensityField;
    fn add(self, rhs: &HalfDensityField) -> HalfDensityField {
        assert_eq!(self.grid, rhs.grid, "grid mismatch");
        let values = self.values.iter().zip(&rhs.values).map(|(a, b)| a + b).collect();
        HalfDensityField { grid: self.grid, values }
    }
}

/// A smooth, band-limited random field: a Gaussian envelope centred at
/// `center` with width `width`, times random low angular and radial
/// carriers, with the top third of the spectrum removed.
pub fn random_test_field(grid: &Grid, center: f64, width: f64, rng: &mut impl Rng) -> HalfDensityField {
    let modes: Vec<(f64, i64, C64)> = (0..4)
        .map(|_| {
            let kr = rng.gen_range(-2.0..2.0);
            let kt = rng.gen_range(-2..=2);
            let c = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            (kr, kt, c)
        })
        .collect();
    let u = HalfDensityField::from_fn(grid, |r, th| {
        let env = (-((r - center) / width).powi(2)).exp();
        let carrier: C64 = modes.iter().map(|(kr, kt, c)| c * C64::new(0.0, kr * r + *kt as f64 * th).exp()).sum();
        carrier * env
    });
    clean_spectrum(&u)
}

/// Band-limits a field and drops spectral coefficients below `1e-14` of the
/// largest so that sparse spectra stay sparse.
pub fn clean_spectrum(u: &HalfDensityField) -> HalfDensityField {
    let g = u.grid;
    let mut s = u.band_limit().spectrum();
    let top = s.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    for v in s.iter_mut() {
        if v.norm() < 1e-14 * top {
            *v = C64::new(0.0, 0.0);
        }
    }
    HalfDensityField::from_spectrum(&g, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid() -> Grid {
        Grid::new(-4.0, 8.0, 32, 16, 0.25).unwrap()
    }

    #[test]
    fn constant_field_norm() {
        let g = grid();
        let u = HalfDensityField::from_fn(&g, |_, _| C64::new(1.0, 0.0));
        assert!((u.l2_norm().powi(2) - 8.0 * TAU).abs() < 1e-12);
        assert!((u.inner(&u).unwrap().re - u.l2_norm().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn angular_modes_are_orthogonal() {
        let g = grid();
        let a = HalfDensityField::from_fn(&g, |_, t| C64::new(0.0, t).exp());
        let b = HalfDensityField::from_fn(&g, |_, t| C64::new(0.0, 2.0 * t).exp());
        assert!(a.inner(&b).unwrap().norm() <= 1e-12);
    }

    #[test]
    fn spectrum_round_trip() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = random_test_field(&g, 0.0, 1.0, &mut rng);
        let v = HalfDensityField::from_spectrum(&g, u.spectrum());
        assert!((&u - &v).l2_norm() < 1e-12 * u.l2_norm());
    }

    #[test]
    fn binary_round_trip() {
        let g = grid();
        let u = HalfDensityField::from_fn(&g, C64::new);
        let mut buf = Vec::new();
        u.write_to(&mut buf).unwrap();
        assert_eq!(buf.len(), 32 + 8 * g.len());
        let v = HalfDensityField::read_from(&mut buf.as_slice()).unwrap();
        assert_eq!(v.grid, g);
        assert!((&u - &v).max_abs() < 1e-5);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new(0.0, 1.0, 12, 16, 0.5).is_err());
        assert!(Grid::new(0.0, 1.0, 4, 16, 0.5).is_err());
        assert!(Grid::new(0.0, 1.0, 16, 16, 0.0).is_err());
        assert!(grid().require_eta_cover(3.0).is_err());
        assert!(grid().require_eta_cover(2.0).is_ok());
    }

    #[test]
    fn dual_lattice() {
        let g = grid();
        assert_eq!(g.rho(1), TAU * 0.25 / 8.0);
        assert_eq!(g.rho(31), -TAU * 0.25 / 8.0);
        assert_eq!(g.eta(8), -2.0);
    }
}

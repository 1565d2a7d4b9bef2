//! Angular dilations `Θ(r, θ) = (r, Fθ)` and their action on quantized
//! blocks, evaluated by direct quadrature on a non-periodic window.

use super::partition::PartitionOfUnity;
use crate::error::{Error, Result};
use crate::expr::{Expr, Tape, Var, C64};
use crate::symbols::{Symbol, WeightFunction};
use rayon::prelude::*;
use std::f64::consts::PI;

/// Midpoint samples of a rectangle in `(r, θ)`; `θ` is not periodic here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureWindow {
    pub r: (f64, f64),
    pub n_r: usize,
    pub theta: (f64, f64),
    pub n_theta: usize,
}

impl QuadratureWindow {
    pub fn new(r: (f64, f64), n_r: usize, theta: (f64, f64), n_theta: usize) -> Result<QuadratureWindow> {
        if !(r.1 > r.0 && theta.1 > theta.0) || n_r < 2 || n_theta < 2 {
            return Err(Error::InvalidArgument("quadrature window must be nonempty".into()));
        }
        Ok(QuadratureWindow { r, n_r, theta, n_theta })
    }

    pub fn dr(&self) -> f64 {
        (self.r.1 - self.r.0) / self.n_r as f64
    }

    pub fn dtheta(&self) -> f64 {
        (self.theta.1 - self.theta.0) / self.n_theta as f64
    }

    pub fn r_at(&self, i: usize) -> f64 {
        self.r.0 + (i as f64 + 0.5) * self.dr()
    }

    pub fn theta_at(&self, k: usize) -> f64 {
        self.theta.0 + (k as f64 + 0.5) * self.dtheta()
    }

    fn dilate(&self, c: f64) -> QuadratureWindow {
        QuadratureWindow { theta: (self.theta.0 * c, self.theta.1 * c), ..*self }
    }
}

/// Momentum box `[-ρ_max, ρ_max] × [-η_max, η_max]` with midpoint samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumQuadrature {
    pub rho_max: f64,
    pub n_rho: usize,
    pub eta_max: f64,
    pub n_eta: usize,
    pub hbar: f64,
}

impl MomentumQuadrature {
    pub fn drho(&self) -> f64 {
        2.0 * self.rho_max / self.n_rho as f64
    }

    pub fn deta(&self) -> f64 {
        2.0 * self.eta_max / self.n_eta as f64
    }

    pub fn rho_at(&self, m: usize) -> f64 {
        -self.rho_max + (m as f64 + 0.5) * self.drho()
    }

    pub fn eta_at(&self, l: usize) -> f64 {
        -self.eta_max + (l as f64 + 0.5) * self.deta()
    }

    /// Rejects sample spacings that alias the phase `e^{ip·(q-q')/ħ}`.
    pub fn check_resolution(&self, w: &QuadratureWindow) -> Result<()> {
        let h = self.hbar;
        if !(h > 0.0) {
            return Err(Error::InvalidArgument(format!("hbar must be positive, got {h}")));
        }
        let steps = [("rho", self.rho_max * w.dr() / h), ("eta", self.eta_max * w.dtheta() / h)];
        for (name, s) in steps {
            if s > PI / 2.0 {
                return Err(Error::Undersampled(format!("{name} phase step {s:.3} exceeds pi/2")));
            }
        }
        let periods = [
            ("rho", 2.0 * PI * h / self.drho(), w.r.1 - w.r.0),
            ("eta", 2.0 * PI * h / self.deta(), w.theta.1 - w.theta.0),
        ];
        for (name, period, span) in periods {
            if period < 2.0 * span {
                return Err(Error::Undersampled(format!(
                    "{name} spacing gives alias period {period:.3} below twice the window span {span:.3}"
                )));
            }
        }
        Ok(())
    }
}

/// Half-density coefficients on a [`QuadratureWindow`], row-major in `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowField {
    pub window: QuadratureWindow,
    pub values: Vec<C64>,
}

impl WindowField {
    pub fn from_fn(window: QuadratureWindow, f: impl Fn(f64, f64) -> C64) -> WindowField {
        let mut values = Vec::with_capacity(window.n_r * window.n_theta);
        for i in 0..window.n_r {
            for k in 0..window.n_theta {
                values.push(f(window.r_at(i), window.theta_at(k)));
            }
        }
        WindowField { window, values }
    }

    pub fn get(&self, i: usize, k: usize) -> C64 {
        self.values[i * self.window.n_theta + k]
    }

    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        (s * self.window.dr() * self.window.dtheta()).sqrt()
    }

    /// `‖self - other‖`; the windows must agree to rounding.
    pub fn distance(&self, other: &WindowField) -> Result<f64> {
        let (a, b) = (&self.window, &other.window);
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * (1.0 + x.abs());
        if a.n_r != b.n_r
            || a.n_theta != b.n_theta
            || !close(a.r.0, b.r.0)
            || !close(a.r.1, b.r.1)
            || !close(a.theta.0, b.theta.0)
            || !close(a.theta.1, b.theta.1)
        {
            return Err(Error::GridMismatch("window fields on different windows".into()));
        }
        let s: f64 = self.values.iter().zip(&other.values).map(|(x, y)| (x - y).norm_sqr()).sum();
        Ok((s * a.dr() * a.dtheta()).sqrt())
    }
}

/// `Θ^t_{jk}`: dilation of `θ` by `F = f(tj + (1-t)k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingMap {
    pub j: i64,
    pub k: i64,
    pub t: f64,
    pub factor: f64,
}

impl ScalingMap {
    pub fn new(weight: &WeightFunction, j: i64, k: i64, t: f64) -> Result<ScalingMap> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidArgument(format!("t must lie in [0, 1], got {t}")));
        }
        let x = t * j as f64 + (1.0 - t) * k as f64;
        let factor = weight.eval(x);
        if !(factor >= 1.0) {
            return Err(Error::WeightCheck(format!("f({x}) = {factor} is below 1")));
        }
        Ok(ScalingMap { j, k, t, factor })
    }

    /// `(Θ^*v)(r, θ) = F^{1/2} v(r, Fθ)`, sampled on the contracted window.
    pub fn pullback(&self, v: &WindowField) -> WindowField {
        let s = self.factor.sqrt();
        WindowField { window: v.window.dilate(1.0 / self.factor), values: v.values.iter().map(|x| x * s).collect() }
    }

    /// `(Θ_*w)(r, θ) = F^{-1/2} w(r, θ/F)`, the inverse of [`Self::pullback`].
    pub fn pushforward(&self, w: &WindowField) -> WindowField {
        let s = self.factor.sqrt().recip();
        WindowField { window: w.window.dilate(self.factor), values: w.values.iter().map(|x| x * s).collect() }
    }

    /// `(Θ̃_*a)(r, θ, ρ, η) = a(r, θ/F, ρ, Fη)`.
    pub fn push_symbol(&self, a: &Expr) -> Expr {
        a.subst(&[(Var::Theta, Expr::theta() / self.factor), (Var::Eta, Expr::eta() * self.factor)])
    }
}

fn phase_table(n_p: usize, p: impl Fn(usize) -> f64, n_x: usize, x: impl Fn(usize) -> f64, h: f64) -> Vec<C64> {
    let mut out = Vec::with_capacity(n_p * n_x);
    for m in 0..n_p {
        for i in 0..n_x {
            out.push(C64::from_polar(1.0, p(m) * x(i) / h));
        }
    }
    out
}

/// `ψ_j Op^t_ħ(a) ψ_k w` by direct quadrature over the window and momentum box.
///
/// `t = 1` and `t = 0` accept any symbol; other `t` need `a` independent of `θ`.
pub fn direct_block(
    a: &Expr,
    t: f64,
    j: i64,
    k: i64,
    pou: &PartitionOfUnity,
    w: &WindowField,
    mq: &MomentumQuadrature,
) -> Result<WindowField> {
    mq.check_resolution(&w.window)?;
    for v in [Var::RPrime, Var::ThetaPrime, Var::Z] {
        if a.depends_on(v) {
            return Err(Error::InvalidArgument(format!("symbol depends on {}", v.name())));
        }
    }
    let a = a.subst(&[(Var::Hbar, Expr::real(mq.hbar))]);
    let tape = Tape::compile(&a);
    let win = w.window;
    let (nr, nt, nm, nl) = (win.n_r, win.n_theta, mq.n_rho, mq.n_eta);
    let h = mq.hbar;
    let er = phase_table(nm, |m| mq.rho_at(m), nr, |i| win.r_at(i), h);
    let et = phase_table(nl, |l| mq.eta_at(l), nt, |k| win.theta_at(k), h);
    let psi_k: Vec<f64> = (0..nr).map(|i| pou.psi_j(k, win.r_at(i))).collect();
    let psi_j: Vec<f64> = (0..nr).map(|i| pou.psi_j(j, win.r_at(i))).collect();
    let wk: Vec<C64> = (0..nr * nt).map(|q| w.values[q] * psi_k[q / nt]).collect();
    let (dq, dp) = (win.dr() * win.dtheta(), mq.drho() * mq.deta());
    let norm = dq * dp / (2.0 * PI * h).powi(2);
    let sym = |r: f64, th: f64, rho: f64, eta: f64, scratch: &mut Vec<C64>| -> Result<C64> {
        let mut vars = [C64::new(0.0, 0.0); 8];
        vars[Var::R.index()] = r.into();
        vars[Var::Theta.index()] = th.into();
        vars[Var::Rho.index()] = rho.into();
        vars[Var::Eta.index()] = eta.into();
        vars[Var::Hbar.index()] = h.into();
        tape.eval_vars(&vars, scratch)
    };

    // Forward transform of a row-major (r, θ) array to (ρ, η).
    let forward = |f: &[C64]| -> Vec<C64> {
        let mut half = vec![C64::new(0.0, 0.0); nr * nl];
        for i in 0..nr {
            for l in 0..nl {
                let mut s = C64::new(0.0, 0.0);
                for kk in 0..nt {
                    s += et[l * nt + kk].conj() * f[i * nt + kk];
                }
                half[i * nl + l] = s;
            }
        }
        let mut out = vec![C64::new(0.0, 0.0); nm * nl];
        for m in 0..nm {
            for i in 0..nr {
                let e = er[m * nr + i].conj();
                for l in 0..nl {
                    out[m * nl + l] += e * half[i * nl + l];
                }
            }
        }
        out
    };

    let values: Vec<C64> = if t == 1.0 {
        let hat = forward(&wk);
        (0..nr * nt)
            .into_par_iter()
            .map_init(Vec::new, |scratch, q| {
                let (i, kk) = (q / nt, q % nt);
                if psi_j[i] == 0.0 {
                    return Ok(C64::new(0.0, 0.0));
                }
                let (r, th) = (win.r_at(i), win.theta_at(kk));
                let mut s = C64::new(0.0, 0.0);
                for m in 0..nm {
                    let rho = mq.rho_at(m);
                    for l in 0..nl {
                        let c = hat[m * nl + l];
                        if c.norm_sqr() == 0.0 {
                            continue;
                        }
                        s += sym(r, th, rho, mq.eta_at(l), scratch)? * er[m * nr + i] * et[l * nt + kk] * c;
                    }
                }
                Ok(s * psi_j[i] * norm)
            })
            .collect::<Result<_>>()?
    } else if t == 0.0 {
        let hat: Vec<C64> = (0..nm * nl)
            .into_par_iter()
            .map_init(Vec::new, |scratch, p| {
                let (m, l) = (p / nl, p % nl);
                let (rho, eta) = (mq.rho_at(m), mq.eta_at(l));
                let mut s = C64::new(0.0, 0.0);
                for i in 0..nr {
                    if psi_k[i] == 0.0 {
                        continue;
                    }
                    let r = win.r_at(i);
                    for kk in 0..nt {
                        let x = wk[i * nt + kk];
                        if x.norm_sqr() == 0.0 {
                            continue;
                        }
                        let e = (er[m * nr + i] * et[l * nt + kk]).conj();
                        s += sym(r, win.theta_at(kk), rho, eta, scratch)? * e * x;
                    }
                }
                Ok(s)
            })
            .collect::<Result<_>>()?;
        let mut out = vec![C64::new(0.0, 0.0); nr * nt];
        for i in 0..nr {
            if psi_j[i] == 0.0 {
                continue;
            }
            for kk in 0..nt {
                let mut s = C64::new(0.0, 0.0);
                for m in 0..nm {
                    for l in 0..nl {
                        s += er[m * nr + i] * et[l * nt + kk] * hat[m * nl + l];
                    }
                }
                out[i * nt + kk] = s * psi_j[i] * norm;
            }
        }
        out
    } else {
        if a.depends_on(Var::Theta) {
            return Err(Error::InvalidArgument(format!(
                "direct quadrature at t = {t} needs a symbol independent of theta"
            )));
        }
        // A[i, l] = Σ_k e^{-iη_lθ_k/ħ} w(i, k)
        let mut ahat = vec![C64::new(0.0, 0.0); nr * nl];
        for i in 0..nr {
            for l in 0..nl {
                let mut s = C64::new(0.0, 0.0);
                for kk in 0..nt {
                    s += et[l * nt + kk].conj() * wk[i * nt + kk];
                }
                ahat[i * nl + l] = s;
            }
        }
        // V[i, l] = Σ_{i'} Σ_m a(tr_i + (1-t)r_{i'}, ρ_m, η_l) e^{iρ_m(r_i - r_{i'})/ħ} A[i', l]
        let v: Vec<C64> = (0..nr * nl)
            .into_par_iter()
            .map_init(Vec::new, |scratch, q| {
                let (i, l) = (q / nl, q % nl);
                if psi_j[i] == 0.0 {
                    return Ok(C64::new(0.0, 0.0));
                }
                let eta = mq.eta_at(l);
                let mut s = C64::new(0.0, 0.0);
                for ip in 0..nr {
                    let x = ahat[ip * nl + l];
                    if psi_k[ip] == 0.0 || x.norm_sqr() == 0.0 {
                        continue;
                    }
                    let rm = t * win.r_at(i) + (1.0 - t) * win.r_at(ip);
                    let mut kern = C64::new(0.0, 0.0);
                    for m in 0..nm {
                        kern += sym(rm, 0.0, mq.rho_at(m), eta, scratch)? * er[m * nr + i] * er[m * nr + ip].conj();
                    }
                    s += kern * x;
                }
                Ok(s)
            })
            .collect::<Result<_>>()?;
        let mut out = vec![C64::new(0.0, 0.0); nr * nt];
        for i in 0..nr {
            if psi_j[i] == 0.0 {
                continue;
            }
            for kk in 0..nt {
                let s: C64 = (0..nl).map(|l| et[l * nt + kk] * v[i * nl + l]).sum();
                out[i * nt + kk] = s * psi_j[i] * norm;
            }
        }
        out
    };
    Ok(WindowField { window: win, values })
}

/// Both sides of the dilation identity
/// `Θ_* ψ_j Op^t(a) ψ_k Θ^* u = ψ_j Op^t(Θ̃_*a) ψ_k u`.
///
/// `mq` is the momentum box in the frame of `a`; the right side uses the
/// box contracted by `F` in `η`, so both sums run over matched samples.
pub fn scaling_conjugate(
    a: &Symbol,
    map: &ScalingMap,
    pou: &PartitionOfUnity,
    u: &WindowField,
    mq: &MomentumQuadrature,
) -> Result<(WindowField, WindowField)> {
    let pulled = map.pullback(u);
    let inner = direct_block(&a.expr, map.t, map.j, map.k, pou, &pulled, mq)?;
    let lhs = map.pushforward(&inner);
    let mq_rhs = MomentumQuadrature { eta_max: mq.eta_max / map.factor, ..*mq };
    let rhs = direct_block(&map.push_symbol(&a.expr), map.t, map.j, map.k, pou, u, &mq_rhs)?;
    Ok((lhs, rhs))
}

//! Angular charts: conjugation of `Op¹_ħ` by an arc diffeomorphism and the
//! two-arc assembly `Op_M(a) = Σ_ι χ_ι φ_ι^* Op¹(φ̃_{ι*}(κ_ι a)) φ_{ι*} χ_ι`.
//!
//! Chart coordinates are not periodic, so the `θ` integral is a direct sum
//! over (possibly non-uniform) nodes and `η` is a midpoint rule on a box.

use super::grid::HalfDensityField;
use crate::error::{Error, Result};
use crate::expr::{Bump, Expr, ScalarFn, Tape, Var, C64};
use crate::symbols::{chart_transfer_leading, AngularDiffeo, Symbol};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaQuadrature {
    pub eta_max: f64,
    pub n_eta: usize,
    pub hbar: f64,
}

impl EtaQuadrature {
    pub fn deta(&self) -> f64 {
        2.0 * self.eta_max / self.n_eta as f64
    }

    pub fn eta_at(&self, l: usize) -> f64 {
        -self.eta_max + (l as f64 + 0.5) * self.deta()
    }

    fn check(&self, max_step: f64, span: f64) -> Result<()> {
        let phase = self.eta_max * max_step / self.hbar;
        if phase > PI / 2.0 {
            return Err(Error::Undersampled(format!("eta phase step {phase:.3} exceeds pi/2")));
        }
        let period = 2.0 * PI * self.hbar / self.deta();
        if period < 2.0 * span {
            return Err(Error::Undersampled(format!(
                "eta alias period {period:.3} below twice the node span {span:.3}"
            )));
        }
        Ok(())
    }
}

/// Samples on uniform midpoints of an arc `(lo, hi)` in a chart coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcField {
    pub window: (f64, f64),
    pub values: Vec<C64>,
}

impl ArcField {
    pub fn from_fn(window: (f64, f64), n: usize, f: impl Fn(f64) -> C64) -> ArcField {
        let dx = (window.1 - window.0) / n as f64;
        ArcField { window, values: (0..n).map(|k| f(window.0 + (k as f64 + 0.5) * dx)).collect() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dx(&self) -> f64 {
        (self.window.1 - self.window.0) / self.values.len() as f64
    }

    pub fn x_at(&self, k: usize) -> f64 {
        self.window.0 + (k as f64 + 0.5) * self.dx()
    }

    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.dx()).sqrt()
    }

    pub fn distance(&self, other: &ArcField) -> Result<f64> {
        if self.window != other.window || self.len() != other.len() {
            return Err(Error::GridMismatch("arc fields on different windows".into()));
        }
        let s: f64 = self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm_sqr()).sum();
        Ok((s * self.dx()).sqrt())
    }
}

/// `(2πħ)⁻¹ ∫ b(x_o, η) e^{iη(x_o - x)/ħ} v(x) dx dη` over weighted input nodes.
fn node_op1(
    b: &mut dyn FnMut(f64, f64) -> Result<C64>,
    eq: &EtaQuadrature,
    in_x: &[f64],
    in_w: &[f64],
    in_v: &[C64],
    out_x: &[f64],
) -> Result<Vec<C64>> {
    let max_step = in_x.windows(2).map(|p| (p[1] - p[0]).abs()).fold(0.0, f64::max);
    let lo = in_x.iter().chain(out_x).copied().fold(f64::INFINITY, f64::min);
    let hi = in_x.iter().chain(out_x).copied().fold(f64::NEG_INFINITY, f64::max);
    eq.check(max_step, hi - lo)?;
    let h = eq.hbar;
    let hat: Vec<C64> = (0..eq.n_eta)
        .map(|l| {
            let eta = eq.eta_at(l);
            in_x.iter().zip(in_w).zip(in_v).map(|((x, w), v)| C64::from_polar(*w, -eta * x / h) * v).sum()
        })
        .collect();
    let scale = eq.deta() / (2.0 * PI * h);
    out_x
        .iter()
        .map(|&x| {
            let mut s = C64::new(0.0, 0.0);
            for (l, c) in hat.iter().enumerate() {
                let eta = eq.eta_at(l);
                s += b(x, eta)? * C64::from_polar(1.0, eta * x / h) * c;
            }
            Ok(s * scale)
        })
        .collect()
}

fn angular_symbol(a: &Expr, hbar: f64) -> Result<Tape> {
    for v in [Var::Rho, Var::RPrime, Var::ThetaPrime, Var::Z] {
        if a.depends_on(v) {
            return Err(Error::InvalidArgument(format!("angular symbol depends on {}", v.name())));
        }
    }
    Ok(Tape::compile(&a.subst(&[(Var::Hbar, Expr::real(hbar))])))
}

fn eval_at(tape: &Tape, scratch: &mut Vec<C64>, r: f64, theta: f64, eta: f64) -> Result<C64> {
    let mut vars = [C64::new(0.0, 0.0); 8];
    vars[Var::R.index()] = r.into();
    vars[Var::Theta.index()] = theta.into();
    vars[Var::Eta.index()] = eta.into();
    tape.eval_vars(&vars, scratch)
}

/// Both sides of the leading-order chart transfer for a symbol `a(θ, η)`:
/// `lhs = φ_* Op¹(a) φ^* v` and `rhs = Op¹(φ̃_* a) v`, with `v` given in the
/// target coordinate. Their difference is `O(ħ)`.
pub fn chart_conjugate(
    a: &Symbol,
    map: &AngularDiffeo,
    v: &ArcField,
    eq: &EtaQuadrature,
) -> Result<(ArcField, ArcField)> {
    if a.expr.depends_on(Var::R) {
        return Err(Error::InvalidArgument("chart conjugation takes a symbol in (theta, eta)".into()));
    }
    let (i0, i1) = map.image()?;
    let (lo, hi) = (i0.min(i1), i0.max(i1));
    if v.window.0 < lo || v.window.1 > hi {
        return Err(Error::SupportEscapesWindow(format!(
            "arc ({}, {}) not inside chart image ({lo}, {hi})",
            v.window.0, v.window.1
        )));
    }
    let dphi = Tape::compile(&map.derivative()?);
    let psi = Tape::compile(&map.psi);
    let at = |t: &Tape, x: f64| -> Result<f64> {
        let mut vars = [C64::new(0.0, 0.0); 8];
        vars[Var::Theta.index()] = x.into();
        Ok(t.eval_vars(&vars, &mut Vec::new())?.re)
    };
    let n = v.len();
    let xs: Vec<f64> = (0..n).map(|k| v.x_at(k)).collect();
    let mut thetas = Vec::with_capacity(n);
    let mut jac = Vec::with_capacity(n);
    for &x in &xs {
        let th = at(&psi, x)?;
        thetas.push(th);
        jac.push(at(&dphi, th)?.abs());
    }
    // φ^*v at θ_k = ψ(x_k); dθ = ψ'(x_k) dx = dx / φ'(θ_k).
    let weights: Vec<f64> = jac.iter().map(|j| v.dx() / j).collect();
    let pulled: Vec<C64> = v.values.iter().zip(&jac).map(|(x, j)| x * j.sqrt()).collect();
    let tape = angular_symbol(&a.expr, eq.hbar)?;
    let mut scratch = Vec::new();
    let inner =
        node_op1(&mut |th, eta| eval_at(&tape, &mut scratch, 0.0, th, eta), eq, &thetas, &weights, &pulled, &thetas)?;
    let lhs = ArcField { window: v.window, values: inner.iter().zip(&jac).map(|(x, j)| x / j.sqrt()).collect() };
    let moved = chart_transfer_leading(a, map)?;
    let tape = angular_symbol(&moved.expr, eq.hbar)?;
    let w = vec![v.dx(); n];
    let rhs = node_op1(&mut |x, eta| eval_at(&tape, &mut scratch, 0.0, x, eta), eq, &xs, &w, &v.values, &xs)?;
    Ok((lhs, ArcField { window: v.window, values: rhs }))
}

pub(crate) fn smooth_step(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / s).exp();
        let b = (-1.0 / (1.0 - s)).exp();
        a / (a + b)
    }
}

fn wrap(theta: f64) -> f64 {
    let t = (theta + PI).rem_euclid(2.0 * PI) - PI;
    if t <= -PI {
        t + 2.0 * PI
    } else {
        t
    }
}

/// Two arcs of half-width `π/2 + overlap` centred at `0` and `π`. The first
/// chart is the identity, the second composes the rotation by `π` with
/// `map`.
#[derive(Debug, Clone)]
pub struct TwoArcAtlas {
    pub overlap: f64,
    pub map: AngularDiffeo,
}

impl TwoArcAtlas {
    pub fn new(overlap: f64, map: AngularDiffeo) -> Result<TwoArcAtlas> {
        if !(overlap > 0.0 && overlap < PI / 2.0) {
            return Err(Error::InvalidArgument(format!("overlap must lie in (0, pi/2), got {overlap}")));
        }
        let half = PI / 2.0 + overlap;
        if map.domain.0 > -half || map.domain.1 < half {
            return Err(Error::InvalidArgument("arc map domain does not cover the arc".into()));
        }
        map.check(129)?;
        Ok(TwoArcAtlas { overlap, map })
    }

    /// Möbius-type second chart `s ↦ s/(1 + κs)`.
    pub fn mobius(overlap: f64, kappa: f64) -> Result<TwoArcAtlas> {
        let half = PI / 2.0 + overlap;
        TwoArcAtlas::new(overlap, AngularDiffeo::mobius(kappa, (-half - 1e-9, half + 1e-9)))
    }

    pub fn center(&self, chart: usize) -> f64 {
        if chart == 0 {
            0.0
        } else {
            PI
        }
    }

    fn local(&self, chart: usize, theta: f64) -> f64 {
        wrap(theta - self.center(chart))
    }

    fn beta(&self, s: f64) -> f64 {
        Bump::new(0).eval(s / (PI / 2.0 + self.overlap / 3.0)).unwrap_or(0.0)
    }

    /// Cylindrical partition of unity `κ_0 + κ_1 = 1`.
    pub fn kappa(&self, chart: usize, theta: f64) -> f64 {
        let a = self.beta(self.local(chart, theta));
        let b = self.beta(self.local(1 - chart, theta));
        a / (a + b)
    }

    /// Equal to one near `supp κ_ι`, supported inside the arc.
    pub fn chi(&self, chart: usize, theta: f64) -> f64 {
        let s = self.local(chart, theta).abs();
        1.0 - smooth_step((s - (PI / 2.0 + self.overlap / 2.0)) / (0.4 * self.overlap))
    }

    fn coordinate(&self, chart: usize) -> AngularDiffeo {
        if chart == 0 {
            AngularDiffeo::identity(self.map.domain)
        } else {
            self.map.clone()
        }
    }

    /// `Op_M(a) u` for a global symbol `a(r, θ, η)`, applied row by row in `r`.
    pub fn op_m(&self, a: &Symbol, u: &HalfDensityField, eq: &EtaQuadrature) -> Result<HalfDensityField> {
        let g = &u.grid;
        if (g.hbar - eq.hbar).abs() > 1e-15 {
            return Err(Error::GridMismatch("eta quadrature and grid use different hbar".into()));
        }
        let tape = angular_symbol(&a.expr, eq.hbar)?;
        let mut out = HalfDensityField::zeros(g);
        let mut scratch = Vec::new();
        for chart in 0..2 {
            let coord = self.coordinate(chart);
            let phi = Tape::compile(&coord.phi);
            let dphi = Tape::compile(&coord.derivative()?);
            let psi = Tape::compile(&coord.psi);
            let at = |t: &Tape, x: f64| -> Result<f64> {
                let mut vars = [C64::new(0.0, 0.0); 8];
                vars[Var::Theta.index()] = x.into();
                Ok(t.eval_vars(&vars, &mut Vec::new())?.re)
            };
            let mut ks: Vec<usize> = (0..g.n_theta).filter(|&k| self.chi(chart, g.theta(k)) > 0.0).collect();
            ks.sort_by(|&a, &b| self.local(chart, g.theta(a)).total_cmp(&self.local(chart, g.theta(b))));
            let mut xs = Vec::with_capacity(ks.len());
            let mut jac = Vec::with_capacity(ks.len());
            for &k in &ks {
                let s = self.local(chart, g.theta(k));
                xs.push(at(&phi, s)?);
                jac.push(at(&dphi, s)?.abs());
            }
            let weights: Vec<f64> = jac.iter().map(|j| j * g.dtheta()).collect();
            let center = self.center(chart);
            for i in 0..g.n_r {
                let r = g.r(i);
                let vals: Vec<C64> =
                    ks.iter().zip(&jac).map(|(&k, j)| u.get(i, k) * self.chi(chart, g.theta(k)) / j.sqrt()).collect();
                if vals.iter().all(|v| v.norm_sqr() == 0.0) {
                    continue;
                }
                // φ̃_*(κa)(x, ξ) = (κa)(ψ(x), ξ φ'(ψ(x))) in local coordinates.
                let mut b = |x: f64, xi: f64| -> Result<C64> {
                    let s = at(&psi, x)?;
                    let theta = s + center;
                    let k = self.kappa(chart, theta);
                    if k == 0.0 {
                        return Ok(C64::new(0.0, 0.0));
                    }
                    Ok(eval_at(&tape, &mut scratch, r, theta, xi * at(&dphi, s)?)? * k)
                };
                let res = node_op1(&mut b, eq, &xs, &weights, &vals, &xs)?;
                for ((&k, j), y) in ks.iter().zip(&jac).zip(res) {
                    out.values[g.index(i, k)] += y * j.sqrt() * self.chi(chart, g.theta(k));
                }
            }
        }
        Ok(out)
    }
}

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use serde::Serialize;

use super::AnalysisError;
use crate::diophantine::{DiophantineStamp, RotationVector};
use crate::models::{solve_lindstedt, ModelKind, ModelSpec};
use crate::numeric::least_squares;
use crate::series::Mode;

/// Above this `|x| + |v|` a run counts as blown up.
const BLOWUP: f64 = 1e8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OdeOptions {
    pub eps: f64,
    /// Truncation order of the reference response solution.
    pub order: usize,
    /// Defaults to 200 periods `2π/|ω|`.
    pub t_final: Option<f64>,
    /// Defaults to `10⁻³ · 2π/|ω|`.
    pub h: Option<f64>,
    pub offset: f64,
    /// Fraction of the run, counted from the end, on which deviations are
    /// measured.
    pub tail: f64,
    pub tube_factor: f64,
    /// Lower bound on the tube radius before scaling by `tube_factor`.
    pub floor: f64,
}

impl OdeOptions {
    pub fn new(eps: f64, order: usize) -> Self {
        OdeOptions {
            eps,
            order,
            t_final: None,
            h: None,
            offset: 0.1,
            tail: 0.2,
            tube_factor: 10.0,
            floor: 1e-12,
        }
    }

    fn period(omega: &RotationVector) -> f64 {
        let w = omega.values().iter().map(|x| x * x).sum::<f64>().sqrt();
        std::f64::consts::TAU / w
    }

    pub fn resolved_t_final(&self, omega: &RotationVector) -> f64 {
        self.t_final.unwrap_or(200.0 * Self::period(omega))
    }

    pub fn resolved_h(&self, omega: &RotationVector) -> f64 {
        self.h.unwrap_or(1e-3 * Self::period(omega))
    }
}

/// `x(t) = Re Σ_ν c_ν e^{iω·ν t}` with `c_ν = Σ_k ε^k u^{(k)}_ν`.
#[derive(Clone, Debug)]
pub struct Response {
    pub eps: f64,
    pub order: usize,
    pub stamp: DiophantineStamp,
    terms: Vec<(f64, C64)>,
}

impl Response {
    pub fn x(&self, t: f64) -> f64 {
        self.terms.iter().map(|(w, c)| (c * C64::from_polar(1.0, w * t)).re).sum()
    }

    pub fn v(&self, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|(w, c)| (c * C64::new(0.0, *w) * C64::from_polar(1.0, w * t)).re)
            .sum()
    }

    pub fn n_modes(&self) -> usize {
        self.terms.len()
    }
}

fn require_dissipative(spec: &ModelSpec) -> Result<(), AnalysisError> {
    if spec.kind() != ModelKind::Dissipative {
        return Err(AnalysisError::InvalidInput(
            "direct integration needs the dissipative model".into(),
        ));
    }
    Ok(())
}

/// Order-`K` truncation of the response solution at a fixed `ε`.
pub fn response_solution(
    spec: &ModelSpec,
    omega: &RotationVector,
    eps: f64,
    order: usize,
) -> Result<Response, AnalysisError> {
    require_dissipative(spec)?;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(AnalysisError::InvalidInput(format!("ε must be positive, got {eps}")));
    }
    let rep = solve_lindstedt(spec, omega, order)?;
    let mut summed: BTreeMap<Mode, C64> = BTreeMap::new();
    for (k, nu, v) in rep.series.iter() {
        *summed.entry(nu.clone()).or_default() += v[0] * eps.powi(k as i32);
    }
    Ok(Response {
        eps,
        order,
        stamp: rep.stamp,
        terms: summed.into_iter().map(|(nu, c)| (omega.dot(&nu), c)).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    /// Step actually used.
    pub h: f64,
    pub halved: bool,
}

type Rhs<'a> = dyn Fn(f64, f64, f64) -> f64 + 'a;

/// `E = v²/2 + G(x)` with `G' = g`. Along exact solutions of
/// `ẍ + γẋ + g(x) = f(t)`, `Ė = −γv² + fv ≤ F²/(4γ)` for `|f| ≤ F`, so a run
/// whose energy outgrows `E(0) + t F²/(4γ)` has gone numerically unstable.
struct EnergyBound {
    g_integral: Vec<f64>,
    rate: f64,
}

impl EnergyBound {
    fn new(g: &[f64], forcing_sup: f64, gamma: f64) -> Self {
        let mut g_integral = vec![0.0];
        g_integral.extend(g.iter().enumerate().map(|(j, c)| c / (j + 1) as f64));
        EnergyBound {
            g_integral,
            rate: forcing_sup * forcing_sup / (4.0 * gamma),
        }
    }

    fn energy(&self, x: f64, v: f64) -> f64 {
        0.5 * v * v + self.g_integral.iter().rev().fold(0.0, |s, c| s * x + c)
    }
}

fn rk4(acc: &Rhs, bound: &EnergyBound, x0: f64, v0: f64, t_final: f64, h: f64) -> Option<Trajectory> {
    let steps = (t_final / h).round().max(1.0) as usize;
    let mut t = Vec::with_capacity(steps + 1);
    let mut xs = Vec::with_capacity(steps + 1);
    let mut vs = Vec::with_capacity(steps + 1);
    let (mut x, mut v) = (x0, v0);
    let e0 = bound.energy(x0, v0);
    let slack = 1e-6 * (1.0 + e0.abs());
    t.push(0.0);
    xs.push(x);
    vs.push(v);
    for n in 0..steps {
        let s = n as f64 * h;
        let (k1x, k1v) = (v, acc(s, x, v));
        let (k2x, k2v) = (v + 0.5 * h * k1v, acc(s + 0.5 * h, x + 0.5 * h * k1x, v + 0.5 * h * k1v));
        let (k3x, k3v) = (v + 0.5 * h * k2v, acc(s + 0.5 * h, x + 0.5 * h * k2x, v + 0.5 * h * k2v));
        let (k4x, k4v) = (v + h * k3v, acc(s + h, x + h * k3x, v + h * k3v));
        x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        let s = (n + 1) as f64 * h;
        if !(x.is_finite() && v.is_finite())
            || x.abs() + v.abs() > BLOWUP
            || bound.energy(x, v) > e0 + s * bound.rate + slack
        {
            return None;
        }
        t.push(s);
        xs.push(x);
        vs.push(v);
    }
    Some(Trajectory { t, x: xs, v: vs, h, halved: false })
}

fn integrate_with(
    acc: &Rhs,
    bound: &EnergyBound,
    x0: f64,
    v0: f64,
    t_final: f64,
    h: f64,
) -> Result<Trajectory, AnalysisError> {
    if !(h > 0.0 && t_final > 0.0 && h.is_finite() && t_final.is_finite()) {
        return Err(AnalysisError::InvalidInput(format!(
            "need h > 0 and T > 0, got h = {h}, T = {t_final}"
        )));
    }
    if let Some(tr) = rk4(acc, bound, x0, v0, t_final, h) {
        return Ok(tr);
    }
    let h2 = 0.5 * h;
    let mut tr = rk4(acc, bound, x0, v0, t_final, h2).ok_or(AnalysisError::StepInstability { h: h2 })?;
    tr.halved = true;
    Ok(tr)
}

/// Fixed-step RK4 for `ẍ + ε^{−1}ẋ + g(x) = f(ωt)`.
pub fn integrate_ode(
    spec: &ModelSpec,
    omega: &RotationVector,
    eps: f64,
    x0: f64,
    v0: f64,
    t_final: f64,
    h: f64,
) -> Result<Trajectory, AnalysisError> {
    require_dissipative(spec)?;
    if !(eps > 0.0) {
        return Err(AnalysisError::InvalidInput(format!("ε must be positive, got {eps}")));
    }
    if omega.dim() != spec.dim_d() {
        return Err(AnalysisError::InvalidInput(format!(
            "ω has {} components, the forcing {}",
            omega.dim(),
            spec.dim_d()
        )));
    }
    let gamma = 1.0 / eps;
    let w = omega.values().to_vec();
    let acc = |t: f64, x: f64, v: f64| {
        let psi: Vec<f64> = w.iter().map(|wi| wi * t).collect();
        -gamma * v + spec.eval_rhs(&[C64::new(x, 0.0)], &psi)[0].re
    };
    let f_sup: f64 = spec.fourier_forcing().unwrap_or(&[]).iter().map(|c| c.value.norm()).sum();
    let bound = EnergyBound::new(spec.g_taylor().unwrap_or(&[]), f_sup, gamma);
    integrate_with(&acc, &bound, x0, v0, t_final, h)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Attractive,
    NotAttractive,
    /// `∂_x g(c₀) ≤ 0`: no claim is made.
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AttractivityReport {
    pub eps: f64,
    pub order: usize,
    pub a: f64,
    pub t_final: f64,
    pub h: f64,
    pub offset: f64,
    /// Largest `|x − x_trunc|` over the tail, starting on the truncation.
    pub on_deviation: f64,
    /// Same, starting `offset` away.
    pub off_deviation: f64,
    pub initial_deviation: f64,
    pub tube: f64,
    /// First time after which the offset run stays inside the tube.
    pub entered_at: Option<f64>,
    pub stays: bool,
    pub verdict: Verdict,
    pub stamp: Option<DiophantineStamp>,
}

fn tail_deviation(tr: &Trajectory, resp: &Response, from: f64) -> f64 {
    tr.t
        .iter()
        .zip(&tr.x)
        .filter(|(t, _)| **t >= from)
        .map(|(t, x)| (x - resp.x(*t)).abs())
        .fold(0.0, f64::max)
}

/// Two runs, one starting on the truncated response solution and one offset
/// from it; the offset run must enter the tube `tube_factor · on_deviation`
/// and stay there over the tail.
pub fn attractivity_check(
    spec: &ModelSpec,
    omega: &RotationVector,
    opts: &OdeOptions,
) -> Result<AttractivityReport, AnalysisError> {
    require_dissipative(spec)?;
    let a = spec.damping_a().unwrap_or(0.0);
    let t_final = opts.resolved_t_final(omega);
    let h = opts.resolved_h(omega);
    if !(opts.tail > 0.0 && opts.tail <= 1.0) {
        return Err(AnalysisError::InvalidInput(format!("tail fraction must lie in (0, 1], got {}", opts.tail)));
    }
    if a <= 0.0 {
        return Ok(AttractivityReport {
            eps: opts.eps,
            order: opts.order,
            a,
            t_final,
            h,
            offset: opts.offset,
            on_deviation: f64::NAN,
            off_deviation: f64::NAN,
            initial_deviation: opts.offset.abs(),
            tube: f64::NAN,
            entered_at: None,
            stays: false,
            verdict: Verdict::NotApplicable,
            stamp: None,
        });
    }
    let resp = response_solution(spec, omega, opts.eps, opts.order)?;
    let (x0, v0) = (resp.x(0.0), resp.v(0.0));
    let from = (1.0 - opts.tail) * t_final;
    let on = integrate_ode(spec, omega, opts.eps, x0, v0, t_final, h)?;
    let off = integrate_ode(spec, omega, opts.eps, x0 + opts.offset, v0, t_final, h)?;
    let on_dev = tail_deviation(&on, &resp, from);
    let off_dev = tail_deviation(&off, &resp, from);
    let tube = opts.tube_factor * on_dev.max(opts.floor);
    let mut entered_at = None;
    for (t, x) in off.t.iter().zip(&off.x).rev() {
        if (x - resp.x(*t)).abs() > tube {
            break;
        }
        entered_at = Some(*t);
    }
    let stays = entered_at.is_some_and(|t| t <= from);
    Ok(AttractivityReport {
        eps: opts.eps,
        order: opts.order,
        a,
        t_final,
        h: off.h.max(on.h),
        offset: opts.offset,
        on_deviation: on_dev,
        off_deviation: off_dev,
        initial_deviation: opts.offset.abs(),
        tube,
        entered_at,
        stays,
        verdict: if stays && off_dev < tube { Verdict::Attractive } else { Verdict::NotAttractive },
        stamp: Some(resp.stamp),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelaxationReport {
    pub eps: f64,
    pub c0: f64,
    pub a: f64,
    /// Real part of the slowest eigenvalue of `ÿ + ε^{−1}ẏ + a y = 0`.
    pub predicted_rate: f64,
    pub fitted_rate: f64,
    pub rel_error: f64,
    pub fit_points: usize,
    pub r_squared: f64,
}

/// Relaxation to `c₀` with the oscillating forcing switched off: the slope
/// of `log √(a y² + ẏ²)`, `y = x − c₀`, against the linearisation.
pub fn relaxation_check(
    spec: &ModelSpec,
    eps: f64,
    offset: f64,
    t_final: f64,
    h: f64,
) -> Result<RelaxationReport, AnalysisError> {
    require_dissipative(spec)?;
    let (Some(c0), Some(a), Some(g)) = (spec.c0(), spec.damping_a(), spec.g_taylor()) else {
        return Err(AnalysisError::InvalidInput("missing equilibrium data".into()));
    };
    if !(eps > 0.0) || a <= 0.0 || offset == 0.0 {
        return Err(AnalysisError::InvalidInput(
            "relaxation needs ε > 0, a > 0 and a nonzero offset".into(),
        ));
    }
    let f0: f64 = spec
        .fourier_forcing()
        .unwrap_or(&[])
        .iter()
        .filter(|c| c.nu.is_zero())
        .map(|c| c.value.re)
        .sum();
    let gamma = 1.0 / eps;
    let acc = |_t: f64, x: f64, v: f64| {
        let gx = g.iter().rev().fold(0.0, |s, c| s * x + c);
        -gamma * v + f0 - gx
    };
    let bound = EnergyBound::new(g, f0.abs(), gamma);
    let tr = integrate_with(&acc, &bound, c0 + offset, 0.0, t_final, h)?;
    let disc = 0.25 * gamma * gamma - a;
    let predicted = if disc > 0.0 { -0.5 * gamma + disc.sqrt() } else { -0.5 * gamma };
    // Linear regime, well above roundoff.
    let hi = 1e-3 * offset.abs() * a.sqrt();
    let lo = 1e-11 * offset.abs().max(c0.abs()) * a.sqrt().max(1.0);
    let mut rows = Vec::new();
    let mut ys = Vec::new();
    for ((t, x), v) in tr.t.iter().zip(&tr.x).zip(&tr.v) {
        let y = x - c0;
        let r = (a * y * y + v * v).sqrt();
        if r < hi && r > lo {
            rows.push(vec![1.0, *t]);
            ys.push(r.ln());
        }
    }
    if rows.len() < 10 {
        return Err(AnalysisError::InvalidInput(
            "run too short to reach the linear decay regime".into(),
        ));
    }
    let (coef, r2) = least_squares(&rows, &ys)
        .ok_or_else(|| AnalysisError::InvalidInput("decay fit is rank deficient".into()))?;
    Ok(RelaxationReport {
        eps,
        c0,
        a,
        predicted_rate: predicted,
        fitted_rate: coef[1],
        rel_error: ((coef[1] - predicted) / predicted).abs(),
        fit_points: rows.len(),
        r_squared: r2,
    })
}

use num_complex::Complex64 as C64;
use serde::Serialize;

use super::{ModelError, ModelSpec};
use crate::diophantine::RotationVector;
use crate::numeric::CompensatedC;
use crate::parallel;
use crate::series::{ft_eval, FTSeries, Mode};

/// Uniform `64`-point grid for `d = 1`, `64 × 64` for `d = 2`, and 4096
/// Kronecker points `2π{j√p_i}` for `d ≥ 3`.
pub fn default_grid(d: usize) -> Vec<Vec<f64>> {
    let tau = std::f64::consts::TAU;
    match d {
        1 => (0..64).map(|j| vec![tau * j as f64 / 64.0]).collect(),
        2 => (0..64 * 64)
            .map(|j| vec![tau * (j / 64) as f64 / 64.0, tau * (j % 64) as f64 / 64.0])
            .collect(),
        _ => {
            const PRIMES: [f64; 12] = [2., 3., 5., 7., 11., 13., 17., 19., 23., 29., 31., 37.];
            (0..4096)
                .map(|j| {
                    (0..d)
                        .map(|i| {
                            let p = PRIMES.get(i).copied().unwrap_or(41.0 + 2.0 * i as f64);
                            let x = j as f64 * p.sqrt();
                            tau * (x - x.floor())
                        })
                        .collect()
                })
                .collect()
        }
    }
}

/// Largest defect and largest size of the two sides over the grid.
fn residual_parts(
    spec: &ModelSpec,
    omega: &RotationVector,
    series: &FTSeries,
    eps: f64,
    grid: &[Vec<f64>],
) -> (f64, f64) {
    let n = spec.dim_n();
    let mut summed: std::collections::BTreeMap<Mode, Vec<CompensatedC>> = Default::default();
    let mut w = vec![1.0; series.max_order() + 1];
    for k in 1..w.len() {
        w[k] = w[k - 1] * eps;
    }
    for (k, nu, v) in series.iter() {
        if nu.is_zero() {
            continue;
        }
        let slot = summed
            .entry(nu.clone())
            .or_insert_with(|| vec![CompensatedC::default(); n]);
        for (s, z) in slot.iter_mut().zip(v) {
            s.add(z * w[k]);
        }
    }
    let lhs: Vec<(Mode, Vec<C64>)> = summed
        .into_iter()
        .map(|(nu, v)| {
            let dl = spec.delta_eps(omega.dot(&nu), eps);
            (nu, v.iter().map(|c| c.value() * dl).collect())
        })
        .collect();
    let per_point = parallel::map(grid, |psi| {
        let mut du = vec![CompensatedC::default(); n];
        for (nu, v) in &lhs {
            let e = nu.phase(psi);
            for (a, z) in du.iter_mut().zip(v) {
                a.add(z * e);
            }
        }
        let x = ft_eval(series, psi, eps);
        let f = spec.eval_rhs(&x, psi);
        let mut worst = 0.0_f64;
        let mut size = 0.0_f64;
        for j in 0..n {
            let a = du[j].value();
            let b = f[j] * eps;
            worst = worst.max((a - b).norm());
            size = size.max(a.norm() + b.norm());
        }
        (worst, size)
    });
    per_point
        .into_iter()
        .fold((0.0, 0.0), |(r, s), (a, b)| (r.max(a), s.max(b)))
}

/// `max_ψ |D_ε u − ε F(u, ψ)|` for the truncated series `u = Σ_k ε^k u^{(k)}`.
///
/// `D_ε` is applied in Fourier space; `F` is evaluated pointwise from the
/// model's closed form.
pub fn residual_eval(
    spec: &ModelSpec,
    omega: &RotationVector,
    series: &FTSeries,
    eps: f64,
    grid: &[Vec<f64>],
) -> f64 {
    residual_parts(spec, omega, series, eps, grid).0
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderCheck {
    pub order: usize,
    pub eps: [f64; 2],
    pub residual: [f64; 2],
    /// `log(r₁/r₂) / log(ε₁/ε₂)`.
    pub p: f64,
    /// `p ≥ K + 0.8`.
    pub contract_met: bool,
}

/// Fitted exponent of `residual(ε) ∝ ε^p` from two values `0 < ε₂ < ε₁` on
/// the default grid.
pub fn residual_order_check(
    spec: &ModelSpec,
    omega: &RotationVector,
    series: &FTSeries,
    eps1: f64,
    eps2: f64,
) -> Result<OrderCheck, ModelError> {
    if !(eps2 > 0.0 && eps1 > eps2) {
        return Err(ModelError::InvalidSpec(format!(
            "residual order check needs 0 < ε₂ < ε₁, got ε₁ = {eps1}, ε₂ = {eps2}"
        )));
    }
    let grid = default_grid(spec.dim_d());
    let (r1, s1) = residual_parts(spec, omega, series, eps1, &grid);
    let (r2, s2) = residual_parts(spec, omega, series, eps2, &grid);
    for (r, s) in [(r1, s1), (r2, s2)] {
        if r <= 64.0 * f64::EPSILON * s {
            return Err(ModelError::RoundoffFloor { residual: r, scale: s });
        }
    }
    let p = (r1 / r2).ln() / (eps1 / eps2).ln();
    let order = series.max_order();
    Ok(OrderCheck {
        order,
        eps: [eps1, eps2],
        residual: [r1, r2],
        p,
        contract_met: p >= order as f64 + 0.8,
    })
}

use serde::Serialize;

use super::AnalysisError;
use crate::diophantine::{diophantine_constant, RotationVector};
use crate::series::Mode;

const TABLE_ROWS: usize = 20;
const REFINE: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasureOptions {
    /// `a_i > 0`: eigenvalues of `−∂²_β f₀(β₀)` (elliptic case).
    pub a_list: Vec<f64>,
    pub gamma: f64,
    /// Diophantine exponent of `ω`.
    pub tau: f64,
    pub tau_prime: f64,
    pub eps0: f64,
    pub nu_max: u32,
    pub grid_n: usize,
}

impl MeasureOptions {
    pub fn new(a_list: Vec<f64>, gamma: f64, tau: f64, tau_prime: f64, eps0: f64) -> Self {
        MeasureOptions {
            a_list,
            gamma,
            tau,
            tau_prime,
            eps0,
            nu_max: 200,
            grid_n: 1 << 16,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NuContribution {
    pub nu: Mode,
    pub a_index: usize,
    /// Excluded `ε` interval, clipped to `[0, ε₀]`.
    pub interval: [f64; 2],
    pub length: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasureReport {
    pub eps0: f64,
    pub gamma: f64,
    pub tau: f64,
    pub tau_prime: f64,
    pub r: usize,
    pub nu_max: u32,
    /// `τ′ > τ + r`; without it the fraction need not vanish as `ε₀ → 0`.
    pub margin_ok: bool,
    /// `m₀ = (γ / 4√(ε₀A))^{1/τ}` with `γ` capped by the Diophantine constant
    /// of `ω`.
    pub m0: f64,
    /// Excluded intervals found with `|ν| < m₀` (zero when the cut-off is
    /// valid).
    pub hits_below_m0: usize,
    pub n_intervals: usize,
    /// `meas(𝔈′ ∩ [0, ε₀]) / ε₀` from the exact union of intervals.
    pub excluded_fraction: f64,
    /// Midpoint-grid estimate of the same fraction.
    pub grid_fraction: f64,
    pub grid_n: usize,
    pub refined: bool,
    /// Thinnest interval still below the grid spacing after one refinement.
    pub unresolved: bool,
    pub thinnest_interval: f64,
    /// `γ (√(ε₀A)/γ)^{(τ′−r)/τ} √ε₀/√a / ε₀` with unit constant: a shape
    /// check, not a bound.
    pub analytic_shape: f64,
    pub contributions: Vec<NuContribution>,
}

/// Canonical half of `{0 < |ν|₁ ≤ R}`: first nonzero entry positive.
fn half_ball(d: usize, radius: u32) -> Vec<Mode> {
    fn rec(d: usize, left: i64, prefix: &mut Vec<i32>, positive: bool, out: &mut Vec<Mode>) {
        if prefix.len() == d {
            if positive {
                out.push(Mode(prefix.clone()));
            }
            return;
        }
        let lo = if positive { -left } else { 0 };
        for x in lo..=left {
            prefix.push(x as i32);
            rec(d, left - x.abs(), prefix, positive || x > 0, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(d, radius as i64, &mut Vec::new(), false, &mut out);
    out
}

fn merged(mut iv: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    iv.sort_by(|a, b| a[0].total_cmp(&b[0]));
    let mut out: Vec<[f64; 2]> = Vec::with_capacity(iv.len());
    for i in iv {
        match out.last_mut() {
            Some(last) if i[0] <= last[1] => last[1] = last[1].max(i[1]),
            _ => out.push(i),
        }
    }
    out
}

fn grid_fraction(union: &[[f64; 2]], eps0: f64, n: usize) -> f64 {
    let h = eps0 / n as f64;
    let hits = (0..n)
        .filter(|&j| {
            let e = (j as f64 + 0.5) * h;
            let idx = union.partition_point(|iv| iv[1] < e);
            idx < union.len() && union[idx][0] <= e
        })
        .count();
    hits as f64 / n as f64
}

/// Fraction of `ε ∈ [0, ε₀]` excluded by
/// `||ω·ν| − √(ε a_i)| ≤ γ|ν|^{−τ′}` for some `i` and `0 < |ν|₁ ≤ ν_max`.
///
/// Each pair `(ν, i)` excludes the interval
/// `[(|ω·ν| − w)₊²/a_i, (|ω·ν| + w)²/a_i]`, `w = γ|ν|^{−τ′}`; the union is
/// measured exactly and cross-checked on a midpoint grid.
pub fn melnikov_measure(omega: &RotationVector, opts: &MeasureOptions) -> Result<MeasureReport, AnalysisError> {
    if omega.is_mod_one() {
        return Err(AnalysisError::InvalidInput("the measure scan needs a flow frequency vector".into()));
    }
    if let Some(a) = opts.a_list.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
        return Err(AnalysisError::InvalidInput(format!(
            "a_i = {a}: only the elliptic case a_i > 0 is covered"
        )));
    }
    if !(opts.gamma > 0.0 && opts.eps0 > 0.0 && opts.tau > 0.0 && opts.tau_prime > 0.0) {
        return Err(AnalysisError::InvalidInput("γ, ε₀, τ and τ′ must be positive".into()));
    }
    if opts.nu_max == 0 || opts.grid_n == 0 {
        return Err(AnalysisError::InvalidInput("ν_max and the grid size must be positive".into()));
    }
    let r = omega.dim();
    let margin_ok = opts.tau_prime > opts.tau + r as f64;
    let big_a = opts.a_list.iter().copied().fold(0.0, f64::max);
    let small_a = opts.a_list.iter().copied().fold(f64::INFINITY, f64::min);
    let gamma_w = diophantine_constant(omega, opts.tau, opts.nu_max)?.gamma;
    let g_eff = opts.gamma.min(gamma_w);
    let m0 = if big_a > 0.0 {
        (g_eff / (4.0 * (opts.eps0 * big_a).sqrt())).powf(1.0 / opts.tau)
    } else {
        f64::INFINITY
    };

    let mut intervals = Vec::new();
    let mut table = Vec::new();
    let mut hits_below = 0;
    if !opts.a_list.is_empty() {
        for nu in half_ball(r, opts.nu_max) {
            let x = omega.dot(&nu).abs();
            let n = nu.l1() as f64;
            let w = opts.gamma * n.powf(-opts.tau_prime);
            for (i, &a) in opts.a_list.iter().enumerate() {
                let lo = (x - w).max(0.0).powi(2) / a;
                let hi = ((x + w).powi(2) / a).min(opts.eps0);
                if lo >= opts.eps0 || hi <= lo {
                    continue;
                }
                if n < m0 {
                    hits_below += 1;
                }
                intervals.push([lo, hi]);
                table.push(NuContribution {
                    nu: nu.clone(),
                    a_index: i,
                    interval: [lo, hi],
                    length: hi - lo,
                });
            }
        }
    }
    let thinnest = table.iter().map(|c| c.length).fold(f64::INFINITY, f64::min);
    let n_intervals = intervals.len();
    let union = merged(intervals);
    let measure: f64 = union.iter().map(|iv| iv[1] - iv[0]).sum();

    let mut grid_n = opts.grid_n;
    let mut refined = false;
    if thinnest < opts.eps0 / grid_n as f64 {
        grid_n *= REFINE;
        refined = true;
    }
    let unresolved = thinnest < opts.eps0 / grid_n as f64;
    let grid = grid_fraction(&union, opts.eps0, grid_n);

    table.sort_by(|a, b| b.length.total_cmp(&a.length).then_with(|| a.nu.cmp(&b.nu)));
    table.truncate(TABLE_ROWS);
    let analytic_shape = if opts.a_list.is_empty() {
        0.0
    } else {
        let s = (opts.eps0 * big_a).sqrt() / opts.gamma;
        opts.gamma * s.powf((opts.tau_prime - r as f64) / opts.tau) * opts.eps0.sqrt() / small_a.sqrt() / opts.eps0
    };
    Ok(MeasureReport {
        eps0: opts.eps0,
        gamma: opts.gamma,
        tau: opts.tau,
        tau_prime: opts.tau_prime,
        r,
        nu_max: opts.nu_max,
        margin_ok,
        m0,
        hits_below_m0: hits_below,
        n_intervals,
        excluded_fraction: (measure / opts.eps0).clamp(0.0, 1.0),
        grid_fraction: grid,
        grid_n,
        refined,
        unresolved,
        thinnest_interval: if thinnest.is_finite() { thinnest } else { 0.0 },
        analytic_shape,
        contributions: table,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_ball_size() {
        // |{0 < |ν|₁ ≤ R}| in d = 2 is 2R(R+1)
        assert_eq!(half_ball(2, 5).len(), 30);
        assert_eq!(half_ball(1, 7).len(), 7);
        assert!(half_ball(3, 3).iter().all(|m| m.0.iter().find(|&&x| x != 0).unwrap() > &0));
    }

    #[test]
    fn union_merges_overlaps() {
        let u = merged(vec![[0.3, 0.5], [0.0, 0.1], [0.05, 0.2], [0.5, 0.6]]);
        assert_eq!(u, vec![[0.0, 0.2], [0.3, 0.6]]);
        assert!((grid_fraction(&u, 1.0, 1000) - 0.5).abs() < 2e-3);
    }
}

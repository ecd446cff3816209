use serde::Serialize;

use super::AnalysisError;
use crate::numeric::{least_squares, ln_factorial};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Growth {
    Geometric,
    FactorialLike,
}

/// Second-difference test on `log|a_k|` over a tail window.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthTest {
    /// First and last order of the window.
    pub window: [usize; 2],
    pub second_differences: Vec<f64>,
    pub mean: f64,
    pub t_statistic: f64,
    pub growth: Growth,
}

/// `(k, log|a_k|)` for the nonzero entries `k ≥ 1`.
fn log_points(values: &[f64]) -> Vec<(usize, f64)> {
    values
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, v)| v.abs() > 0.0 && v.is_finite())
        .map(|(k, v)| (k, v.abs().ln()))
        .collect()
}

fn tail(points: &[(usize, f64)], kmax: usize) -> Vec<(usize, f64)> {
    let start = kmax.div_ceil(2);
    points.iter().copied().filter(|&(k, _)| k >= start).collect()
}

/// Factorial-like when the second differences of `log|a_k|` over the last
/// half of the orders have positive mean with `t > 3`. `values[k]` is the
/// order-`k` entry; `k = 0` is ignored.
pub fn classify_growth(values: &[f64]) -> Result<GrowthTest, AnalysisError> {
    let points = log_points(values);
    let kmax = values.len().saturating_sub(1);
    let window = tail(&points, kmax);
    if window.len() < 4 {
        return Err(AnalysisError::TooFewOrders { have: window.len(), need: 4 });
    }
    // consecutive orders only; gaps would mix step sizes
    let d2: Vec<f64> = window
        .windows(3)
        .filter(|w| w[1].0 == w[0].0 + 1 && w[2].0 == w[1].0 + 1)
        .map(|w| w[2].1 - 2.0 * w[1].1 + w[0].1)
        .collect();
    if d2.len() < 2 {
        return Err(AnalysisError::TooFewOrders { have: d2.len(), need: 2 });
    }
    let n = d2.len() as f64;
    let mean = d2.iter().sum::<f64>() / n;
    let var = d2.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let scale = window.iter().map(|p| p.1.abs()).fold(1.0, f64::max);
    let t = if var.sqrt() <= 1e-13 * scale {
        if mean > 1e-12 * scale {
            f64::INFINITY
        } else {
            0.0
        }
    } else {
        mean / (var.sqrt() / n.sqrt())
    };
    Ok(GrowthTest {
        window: [window[0].0, window[window.len() - 1].0],
        second_differences: d2,
        mean,
        t_statistic: t,
        growth: if mean > 0.0 && t > 3.0 { Growth::FactorialLike } else { Growth::Geometric },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadiusEstimate {
    pub norms: Vec<f64>,
    /// `norm_k^{1/k}`, `k ≥ 1`.
    pub root_test: Vec<f64>,
    pub window: [usize; 2],
    /// Fit `log norm_k ≈ c + s k` over the window.
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// `e^{−s}`; absent for factorial-like growth.
    pub rho: Option<f64>,
    pub growth: GrowthTest,
}

/// Radius of convergence from per-order norms (`norms[k]`, `k = 0..=K`) by
/// least squares on `log norm_k` over the last half of the orders.
pub fn radius_estimate(norms: &[f64]) -> Result<RadiusEstimate, AnalysisError> {
    let points = log_points(norms);
    let kmax = norms.len().saturating_sub(1);
    let window = tail(&points, kmax);
    if window.len() < 4 {
        return Err(AnalysisError::TooFewOrders { have: window.len(), need: 4 });
    }
    let rows: Vec<Vec<f64>> = window.iter().map(|&(k, _)| vec![1.0, k as f64]).collect();
    let y: Vec<f64> = window.iter().map(|p| p.1).collect();
    let (b, r2) = least_squares(&rows, &y)
        .ok_or_else(|| AnalysisError::InvalidInput("degenerate radius fit".into()))?;
    let growth = classify_growth(norms)?;
    Ok(RadiusEstimate {
        norms: norms.to_vec(),
        root_test: norms
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, v)| v.abs().powf(1.0 / k as f64))
            .collect(),
        window: [window[0].0, window[window.len() - 1].0],
        slope: b[1],
        intercept: b[0],
        r_squared: r2,
        rho: (growth.growth == Growth::Geometric).then(|| (-b[1]).exp()),
        growth,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BorelSignature {
    /// Original factorial-like, transform geometric.
    BorelSummable,
    /// Both geometric.
    Convergent,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BorelReport {
    /// `b_k = a_k / k!`.
    pub transformed: Vec<f64>,
    pub original: GrowthTest,
    pub borel: GrowthTest,
    pub signature: BorelSignature,
}

/// `b_k = a_k/k!` together with the growth class of both sequences.
pub fn borel_transform(coeffs: &[f64]) -> Result<BorelReport, AnalysisError> {
    let b: Vec<f64> = coeffs
        .iter()
        .enumerate()
        .map(|(k, a)| a.signum() * (a.abs().ln() - ln_factorial(k)).exp())
        .collect();
    let original = classify_growth(coeffs)?;
    let borel = classify_growth(&b)?;
    let signature = match (original.growth, borel.growth) {
        (Growth::FactorialLike, Growth::Geometric) => BorelSignature::BorelSummable,
        (Growth::Geometric, Growth::Geometric) => BorelSignature::Convergent,
        _ => BorelSignature::Inconclusive,
    };
    Ok(BorelReport {
        transformed: b,
        original,
        borel,
        signature,
    })
}

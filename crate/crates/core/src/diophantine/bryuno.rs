use serde::Serialize;

use super::cf::{continued_fraction, ContinuedFraction};
use super::search::{minimize, search_cost, DEFAULT_SEARCH_BUDGET};
use super::{Component, DiophantineError, RotationVector};
use crate::series::Mode;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BryunoKind {
    /// `B(α) = Σ_{n≥0} log(q_{n+1})/q_n`
    Scalar,
    /// `𝔅(ω) = Σ_{n≥1} 2^{−n} log(1/α_n(ω))`
    Vector,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BryunoReport {
    pub kind: BryunoKind,
    pub n_max: usize,
    pub partial_sums: Vec<f64>,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quotients: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_n: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_n: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub minimizers: Option<Vec<Mode>>,
    /// Bound (or, for float input, estimate) on the neglected tail.
    pub tail: f64,
    /// `true` when `tail` is a rigorous bound.
    pub tail_is_bound: bool,
    pub converged: bool,
}

const PHI: f64 = 1.618_033_988_749_895;

/// Bound on `Σ_{n>N} log(q_{n+1})/q_n` given `Q = q_{N+1}` and an upper bound
/// `A` on every later partial quotient.
///
/// Uses `q_{n+1} ≤ (A+1) q_n` and the Fibonacci lower growth
/// `q_{N+1+j} ≥ Q φ^{j−1}`; `(L + log q)/q` decreases for `q ≥ 2`.
fn tail_bound(a_max: u64, ln_q: f64, q: f64) -> f64 {
    if q < 2.0 {
        return f64::INFINITY;
    }
    let l = ((a_max + 1) as f64).ln();
    (l + ln_q) / q * (1.0 + PHI * PHI) + 4.236_067_977_5 * PHI.ln() / q
}

/// Bryuno sum of a single irrational `α` from its continued fraction,
/// summed for `n = 0..=n_max` (needs `q_{n_max+1}`).
pub fn bryuno_function(alpha: &Component, n_max: usize) -> Result<BryunoReport, DiophantineError> {
    let cf = match continued_fraction(alpha, n_max + 1) {
        Ok(cf) => cf,
        Err(DiophantineError::CfTruncated { valid, requested }) => {
            return Err(DiophantineError::InsufficientTerms {
                required: requested,
                available: valid.len(),
            })
        }
        Err(e) => return Err(e),
    };
    Ok(scalar_report(alpha, &cf, n_max))
}

fn scalar_report(alpha: &Component, cf: &ContinuedFraction, n_max: usize) -> BryunoReport {
    let q = cf.denominators_f64();
    let mut partial_sums = Vec::with_capacity(n_max + 1);
    let mut acc = 0.0;
    for n in 0..=n_max {
        acc += cf.ln_denominator(n + 1) / q[n];
        partial_sums.push(acc);
    }
    let (a_max, exact) = match alpha {
        Component::Cf(spec) => {
            let later = spec.head.iter().skip(n_max + 1).chain(&spec.period);
            (*later.max().expect("nonempty period"), true)
        }
        Component::Surd(_) => match cf.period {
            Some((start, len)) => (*cf.quotients[start..start + len].iter().max().unwrap(), true),
            None => (*cf.quotients.iter().max().unwrap(), false),
        },
        Component::Float(_) => (*cf.quotients.iter().max().unwrap_or(&1), false),
    };
    let tail = tail_bound(a_max, cf.ln_denominator(n_max + 1), q[n_max + 1]);
    BryunoReport {
        kind: BryunoKind::Scalar,
        n_max,
        value: acc,
        partial_sums,
        quotients: Some(cf.quotients.clone()),
        q_n: Some(q),
        alpha_n: None,
        minimizers: None,
        tail,
        tail_is_bound: exact,
        converged: tail < 1e-12,
    }
}

/// Bryuno sum of a rotation vector with `α_n(ω) = min_{0<|ν|₁≤2^n} δ(ν)`
/// found by exhaustive search. For `d = 2` flows the cost at level `n` is
/// about `3·2^n` divisor evaluations; in dimension `d` it grows like
/// `2^{n(d−1)}`.
pub fn bryuno_omega(omega: &RotationVector, n_max: usize) -> Result<BryunoReport, DiophantineError> {
    if n_max == 0 || n_max > 30 {
        return Err(DiophantineError::InvalidInput(format!(
            "n_max = {n_max} outside 1..=30"
        )));
    }
    let total: f64 = (1..=n_max).map(|n| search_cost(omega, 1 << n)).sum();
    if total > DEFAULT_SEARCH_BUDGET as f64 {
        return Err(DiophantineError::SearchBudget {
            required: total.min(u64::MAX as f64) as u64,
            budget: DEFAULT_SEARCH_BUDGET,
        });
    }
    let mut alpha_n = Vec::with_capacity(n_max);
    let mut minimizers = Vec::with_capacity(n_max);
    let mut partial_sums = Vec::with_capacity(n_max);
    let mut acc = 0.0;
    for n in 1..=n_max {
        let best = minimize(omega, 1 << n, |_| 1.0, DEFAULT_SEARCH_BUDGET)?;
        if let Some(witness) = best.rational {
            return Err(DiophantineError::Rational { witness });
        }
        acc += (-best.divisor.ln()) / (1u64 << n) as f64;
        partial_sums.push(acc);
        alpha_n.push(best.divisor);
        minimizers.push(best.nu);
    }
    // heuristic: log(1/α_n) grows at most linearly in n for Bryuno vectors
    let last = -alpha_n[n_max - 1].ln();
    let tail = 2.0 * last / (1u64 << n_max) as f64;
    Ok(BryunoReport {
        kind: BryunoKind::Vector,
        n_max,
        value: acc,
        partial_sums,
        quotients: None,
        q_n: None,
        alpha_n: Some(alpha_n),
        minimizers: Some(minimizers),
        tail,
        tail_is_bound: false,
        converged: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diophantine::{CfSpec, QuadraticSurd};

    #[test]
    fn golden_bryuno_matches_fibonacci_sum() {
        let r = bryuno_function(&Component::Surd(QuadraticSurd::golden()), 80).unwrap();
        let (mut f0, mut f1) = (1.0_f64, 1.0_f64);
        let mut direct = 0.0;
        for _ in 0..=80 {
            direct += f1.ln() / f0;
            let f2 = f0 + f1;
            f0 = f1;
            f1 = f2;
        }
        assert!((r.value - direct).abs() < 1e-13);
        assert!(r.converged && r.tail_is_bound);
        assert!(r.partial_sums.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn tail_bound_dominates_actual_tail() {
        let alpha = Component::Cf(CfSpec::new(vec![], vec![1, 3, 7]).unwrap());
        let short = bryuno_function(&alpha, 6).unwrap();
        let long = bryuno_function(&alpha, 80).unwrap();
        assert!(long.value - short.value <= short.tail);
    }
}

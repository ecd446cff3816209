//! Exhaustive minimisation of weighted small divisors over an `ℓ¹` ball.
//!
//! Only one of `ν, −ν` is visited (first nonzero entry positive). For flows the
//! first `d − 1` entries are enumerated and the last one is chosen
//! analytically: with the prefix fixed, `|c + ω_d t|` is convex in `t` and the
//! weight `(S + |t|)^τ` is log-concave, so the minimum over the admissible
//! interval sits at `t = 0` or next to `−c/ω_d`, clamped to the interval.

use super::{DiophantineError, RotationVector};
use crate::parallel;
use crate::series::Mode;

/// Default cap on the number of candidate momenta one search may visit.
pub const DEFAULT_SEARCH_BUDGET: u64 = 400_000_000;

#[derive(Clone, Debug)]
pub(crate) struct Best {
    pub value: f64,
    pub divisor: f64,
    pub nu: Mode,
    /// First momentum (in enumeration order) whose divisor is a rounding zero.
    pub rational: Option<Mode>,
}

impl Best {
    fn offer(&mut self, value: f64, divisor: f64, nu: &Mode) {
        if value < self.value || (value == self.value && nu < &self.nu) {
            self.value = value;
            self.divisor = divisor;
            self.nu = nu.clone();
        }
    }

    fn merge(&mut self, other: Best) {
        if self.rational.is_none() {
            self.rational = other.rational.clone();
        }
        self.offer(other.value, other.divisor, &other.nu);
    }

    fn empty(d: usize) -> Best {
        Best {
            value: f64::INFINITY,
            divisor: f64::INFINITY,
            nu: Mode::zero(d),
            rational: None,
        }
    }
}

/// Number of integer points in the `dims`-dimensional `ℓ¹` ball of radius `r`.
pub(crate) fn ball_size(dims: usize, r: u32) -> f64 {
    let r = r as usize;
    let mut counts = vec![1.0_f64; r + 1];
    for _ in 0..dims {
        let prev = counts.clone();
        for (radius, c) in counts.iter_mut().enumerate() {
            *c = prev[radius] + 2.0 * (0..radius).map(|s| prev[s]).sum::<f64>();
        }
    }
    counts[r]
}

/// Candidate evaluations needed for one search at radius `r`.
pub(crate) fn search_cost(omega: &RotationVector, r: u32) -> f64 {
    if omega.is_mod_one() {
        r as f64
    } else {
        3.0 * ball_size(omega.dim() - 1, r) / 2.0 + 1.0
    }
}

pub(crate) fn minimize<W>(
    omega: &RotationVector,
    radius: u32,
    weight: W,
    budget: u64,
) -> Result<Best, DiophantineError>
where
    W: Fn(u32) -> f64 + Sync + Send,
{
    let cost = search_cost(omega, radius);
    if cost > budget as f64 {
        return Err(DiophantineError::SearchBudget {
            required: cost.min(u64::MAX as f64) as u64,
            budget,
        });
    }
    let d = omega.dim();
    let check = |best: &mut Best, nu: &Mode| {
        let div = omega.divisor(nu);
        if best.rational.is_none() && div <= 8.0 * f64::EPSILON * omega.divisor_scale(nu) {
            best.rational = Some(nu.clone());
        }
        best.offer(div * weight(nu.l1()), div, nu);
    };

    if omega.is_mod_one() {
        let chunks: Vec<(u32, u32)> = (0..radius.div_ceil(4096))
            .map(|c| (c * 4096 + 1, ((c + 1) * 4096).min(radius)))
            .collect();
        let parts = parallel::map(&chunks, |&(lo, hi)| {
            let mut best = Best::empty(1);
            for q in lo..=hi {
                check(&mut best, &Mode(vec![q as i32]));
            }
            best
        });
        return Ok(reduce(parts, d));
    }

    let r = radius as i32;
    let firsts: Vec<i32> = if d == 1 { vec![0] } else { (0..=r).collect() };
    let parts = parallel::map(&firsts, |&first| {
        let mut best = Best::empty(d);
        let mut prefix = Vec::with_capacity(d);
        if d == 1 {
            check(&mut best, &Mode(vec![1]));
            return best;
        }
        prefix.push(first);
        walk(omega, r, &mut prefix, &mut |nu| check(&mut best, nu));
        best
    });
    Ok(reduce(parts, d))
}

fn reduce(parts: Vec<Best>, d: usize) -> Best {
    let mut best = Best::empty(d);
    for p in parts {
        best.merge(p);
    }
    best
}

/// Recursive prefix enumeration; `prefix` already holds at least one entry.
fn walk(omega: &RotationVector, r: i32, prefix: &mut Vec<i32>, visit: &mut dyn FnMut(&Mode)) {
    let d = omega.dim();
    let used: i32 = prefix.iter().map(|x| x.abs()).sum();
    let all_zero = prefix.iter().all(|&x| x == 0);
    if prefix.len() == d - 1 {
        let w = omega.values()[d - 1];
        let c: f64 = prefix
            .iter()
            .zip(omega.values())
            .map(|(&p, &wi)| p as f64 * wi)
            .sum();
        let m = r - used;
        let lo = if all_zero { 1 } else { -m };
        if lo > m {
            return;
        }
        let mut cands: Vec<i32> = Vec::with_capacity(3);
        if all_zero {
            cands.push(1);
        } else {
            cands.push(0);
        }
        if w != 0.0 {
            let t = -c / w;
            for x in [t.floor(), t.ceil()] {
                let x = x.clamp(lo as f64, m as f64) as i32;
                cands.push(x);
            }
        }
        cands.sort_unstable();
        cands.dedup();
        let mut nu = prefix.clone();
        nu.push(0);
        for t in cands {
            nu[d - 1] = t;
            visit(&Mode(nu.clone()));
        }
        return;
    }
    let m = r - used;
    let lo = if all_zero { 0 } else { -m };
    for x in lo..=m {
        prefix.push(x);
        walk(omega, r, prefix, visit);
        prefix.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_sizes() {
        assert_eq!(ball_size(1, 5), 11.0);
        assert_eq!(ball_size(2, 2), 13.0);
        assert_eq!(ball_size(0, 7), 1.0);
    }

    fn brute(omega: &RotationVector, r: i32, tau: f64) -> f64 {
        let mut best = f64::INFINITY;
        for a in -r..=r {
            for b in -r..=r {
                for c in -r..=r {
                    if a.abs() + b.abs() + c.abs() > r || (a, b, c) == (0, 0, 0) {
                        continue;
                    }
                    let nu = Mode(vec![a, b, c]);
                    best = best.min(omega.divisor(&nu) * (nu.l1() as f64).powf(tau));
                }
            }
        }
        best
    }

    #[test]
    fn analytic_last_coordinate_matches_full_enumeration() {
        let w = RotationVector::from_floats(&[1.0, 2f64.sqrt(), 3f64.sqrt() - 1.0]).unwrap();
        for tau in [0.0, 1.0, 2.0, 3.5] {
            let fast = minimize(&w, 12, |l| (l as f64).powf(tau), u64::MAX).unwrap();
            assert_eq!(fast.value, brute(&w, 12, tau), "τ = {tau}");
        }
    }

    #[test]
    fn budget_is_enforced() {
        let w = RotationVector::from_floats(&[1.0, 2f64.sqrt(), 3f64.sqrt()]).unwrap();
        assert!(matches!(
            minimize(&w, 1000, |_| 1.0, 1000),
            Err(DiophantineError::SearchBudget { .. })
        ));
    }
}

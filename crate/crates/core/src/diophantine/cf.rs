//! Continued-fraction expansions.
//!
//! Quadratic surds are expanded exactly in big-integer arithmetic through the
//! `(P + √D)/Q` recurrence, which also detects the period. A float is treated
//! as the correctly rounded value of some real in `[x − ulp/2, x + ulp/2]`;
//! only the quotients shared by both interval ends are reported.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{Float, One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::{Component, DiophantineError, QuadraticSurd};

/// `α = a₀ + 1/(a₁ + 1/(a₂ + …))` with convergent denominators `q₀ = 1`,
/// `q₁ = a₁`, `q_{n+1} = a_{n+1} q_n + q_{n−1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ContinuedFraction {
    pub a0: i64,
    /// `a₁, a₂, …`
    pub quotients: Vec<u64>,
    /// `q₀, q₁, …, q_n` (one more entry than `quotients`).
    #[serde(serialize_with = "serialize_big")]
    pub denominators: Vec<BigUint>,
    /// `(start, length)` of the detected period within `quotients`.
    pub period: Option<(usize, usize)>,
}

fn serialize_big<S: serde::Serializer>(v: &[BigUint], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for q in v {
        match q.to_u64() {
            Some(x) => seq.serialize_element(&x)?,
            None => seq.serialize_element(&q.to_string())?,
        }
    }
    seq.end()
}

impl ContinuedFraction {
    fn from_quotients(a0: i64, quotients: Vec<u64>, period: Option<(usize, usize)>) -> Self {
        let mut denominators = Vec::with_capacity(quotients.len() + 1);
        let mut prev = BigUint::zero();
        let mut cur = BigUint::one();
        denominators.push(cur.clone());
        for &a in &quotients {
            let next = &cur * BigUint::from(a) + &prev;
            prev = std::mem::replace(&mut cur, next);
            denominators.push(cur.clone());
        }
        ContinuedFraction {
            a0,
            quotients,
            denominators,
            period,
        }
    }

    /// `q_n` as floats.
    pub fn denominators_f64(&self) -> Vec<f64> {
        self.denominators
            .iter()
            .map(|q| q.to_f64().unwrap_or(f64::INFINITY))
            .collect()
    }

    /// `ln q_n`, accurate even past the f64 range.
    pub fn ln_denominator(&self, n: usize) -> f64 {
        big_ln(&self.denominators[n])
    }
}

pub(crate) fn big_ln(q: &BigUint) -> f64 {
    let bits = q.bits();
    if bits < 1000 {
        return q.to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    let top = (q >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Expand `α` to `n_terms` quotients after `a₀`.
pub fn continued_fraction(
    alpha: &Component,
    n_terms: usize,
) -> Result<ContinuedFraction, DiophantineError> {
    match alpha {
        Component::Surd(s) => Ok(surd_expansion(s, n_terms)),
        Component::Cf(spec) => {
            let quotients: Vec<u64> = (0..n_terms).map(|i| spec.quotient(i + 1)).collect();
            let period = Some((spec.head.len(), spec.period.len()));
            Ok(ContinuedFraction::from_quotients(0, quotients, period))
        }
        Component::Float(x) => float_expansion(*x, n_terms),
    }
}

fn surd_expansion(s: &QuadraticSurd, n_terms: usize) -> ContinuedFraction {
    let (a, b, m, c) = (
        BigInt::from(s.a),
        BigInt::from(s.b),
        BigInt::from(s.m),
        BigInt::from(s.c),
    );
    let (mut p, d, mut q) = if b.is_positive() {
        (a, &b * &b * &m, c)
    } else {
        (-a, &b * &b * &m, -c)
    };
    let mut d = d;
    if !(&d - &p * &p).is_multiple_of(&q) {
        let qa = q.abs();
        p *= &qa;
        d *= &q * &q;
        q *= &qa;
    }
    let root = d.sqrt();
    let floor_step = |p: &BigInt, q: &BigInt| -> BigInt {
        let num = p + &root;
        if q.is_positive() {
            num.div_floor(q)
        } else {
            -(num.div_floor(&-q)) - BigInt::one()
        }
    };

    let a0 = floor_step(&p, &q);
    let mut seen: HashMap<(BigInt, BigInt), usize> = HashMap::new();
    let mut quotients = Vec::with_capacity(n_terms);
    let mut period = None;
    let mut ak = a0.clone();
    for i in 0..n_terms {
        p = &ak * &q - &p;
        q = (&d - &p * &p) / &q;
        if period.is_none() {
            if let Some(&j) = seen.get(&(p.clone(), q.clone())) {
                period = Some((j, i - j));
            } else {
                seen.insert((p.clone(), q.clone()), i);
            }
        }
        ak = floor_step(&p, &q);
        quotients.push(ak.to_u64().expect("partial quotient fits in u64"));
    }
    ContinuedFraction::from_quotients(a0.to_i64().expect("integer part fits in i64"), quotients, period)
}

fn rational_quotients(mut num: BigInt, mut den: BigInt) -> Vec<BigInt> {
    let mut out = Vec::new();
    while !den.is_zero() {
        let (a, r) = num.div_mod_floor(&den);
        out.push(a);
        num = std::mem::replace(&mut den, r);
    }
    out
}

fn exact_rational(mantissa: u64, exponent: i16, sign: i8, twice_plus: i64) -> (BigInt, BigInt) {
    // (2m + twice_plus)·2^(e−1)
    let mut num = BigInt::from(2 * mantissa as i128 + twice_plus as i128);
    if sign < 0 {
        num = -num;
    }
    let e = exponent as i32 - 1;
    if e >= 0 {
        (num << e as usize, BigInt::one())
    } else {
        (num, BigInt::one() << (-e) as usize)
    }
}

fn float_expansion(x: f64, n_terms: usize) -> Result<ContinuedFraction, DiophantineError> {
    if !x.is_finite() {
        return Err(DiophantineError::InvalidInput(format!("non-finite value {x}")));
    }
    let (mantissa, exponent, sign) = x.integer_decode();
    let (ln, ld) = exact_rational(mantissa, exponent, sign, -1);
    let (hn, hd) = exact_rational(mantissa, exponent, sign, 1);
    let lo = rational_quotients(ln, ld);
    let hi = rational_quotients(hn, hd);
    // the final quotient of a finite expansion is ambiguous; never trust it
    let usable = lo.len().min(hi.len()).saturating_sub(1);
    let mut common = 0;
    while common < usable && lo[common] == hi[common] {
        common += 1;
    }
    if common == 0 {
        return Err(DiophantineError::CfTruncated {
            valid: Vec::new(),
            requested: n_terms,
        });
    }
    let a0 = lo[0].to_i64().ok_or_else(|| {
        DiophantineError::InvalidInput(format!("integer part of {x} out of range"))
    })?;
    let valid: Vec<u64> = lo[1..common]
        .iter()
        .map(|a| a.to_u64().unwrap_or(u64::MAX))
        .collect();
    if valid.len() < n_terms {
        return Err(DiophantineError::CfTruncated {
            valid,
            requested: n_terms,
        });
    }
    Ok(ContinuedFraction::from_quotients(
        a0,
        valid[..n_terms].to_vec(),
        None,
    ))
}

/// Exact expansion of `num/den`, for oracles.
pub fn rational_continued_fraction(num: i64, den: i64) -> Vec<i64> {
    rational_quotients(BigInt::from(num), BigInt::from(den))
        .iter()
        .map(|a| a.to_i64().unwrap())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diophantine::CfSpec;

    #[test]
    fn golden_mean_quotients_and_fibonacci() {
        let cf = continued_fraction(&Component::Surd(QuadraticSurd::golden()), 12).unwrap();
        assert_eq!(cf.a0, 0);
        assert!(cf.quotients.iter().all(|&a| a == 1));
        let q: Vec<u64> = cf.denominators.iter().map(|q| q.to_u64().unwrap()).collect();
        assert_eq!(&q[..8], &[1, 1, 2, 3, 5, 8, 13, 21]);
        assert_eq!(cf.period, Some((0, 1)));
    }

    #[test]
    fn silver_mean_quotients() {
        let cf = continued_fraction(&Component::Surd(QuadraticSurd::silver()), 10).unwrap();
        assert_eq!(cf.a0, 0);
        assert!(cf.quotients.iter().all(|&a| a == 2));
    }

    #[test]
    fn surd_with_preperiod() {
        // √7 = [2; 1,1,1,4, ...]
        let s = QuadraticSurd::new(0, 1, 7, 1).unwrap();
        let cf = continued_fraction(&Component::Surd(s), 9).unwrap();
        assert_eq!(cf.a0, 2);
        assert_eq!(cf.quotients, vec![1, 1, 1, 4, 1, 1, 1, 4, 1]);
        assert_eq!(cf.period, Some((0, 4)));
        // negative b: (3 − √2)/7
        let s = QuadraticSurd::new(3, -1, 2, 7).unwrap();
        let cf = continued_fraction(&Component::Surd(s), 6).unwrap();
        let v = s.value();
        let mut x = v;
        let mut expect = Vec::new();
        x -= x.floor();
        for _ in 0..6 {
            x = 1.0 / x;
            expect.push(x.floor() as u64);
            x -= x.floor();
        }
        assert_eq!(cf.quotients, expect);
    }

    #[test]
    fn float_prefix_matches_exact_rational() {
        let x = 0.123456789_f64;
        let exact = rational_continued_fraction(123_456_789, 1_000_000_000);
        let cf = continued_fraction(&Component::Float(x), 5).unwrap();
        assert_eq!(cf.a0, exact[0]);
        let exact_tail: Vec<u64> = exact[1..6].iter().map(|&a| a as u64).collect();
        assert_eq!(cf.quotients, exact_tail);
        match continued_fraction(&Component::Float(x), 60) {
            Err(DiophantineError::CfTruncated { valid, requested }) => {
                assert_eq!(requested, 60);
                assert!(valid.len() >= 5);
                let n = valid.len().min(exact.len() - 2);
                let exact_n: Vec<u64> = exact[1..=n].iter().map(|&a| a as u64).collect();
                assert_eq!(&valid[..n], &exact_n[..]);
            }
            other => panic!("expected truncation, got {other:?}"),
        }
    }

    #[test]
    fn cf_spec_denominators_follow_recurrence() {
        let spec = CfSpec::new(vec![1, 1, 50], vec![1]).unwrap();
        let cf = continued_fraction(&Component::Cf(spec), 6).unwrap();
        assert_eq!(cf.quotients, vec![1, 1, 50, 1, 1, 1]);
        let q = cf.denominators_f64();
        assert_eq!(q, vec![1.0, 1.0, 2.0, 101.0, 103.0, 204.0, 307.0]);
    }

    #[test]
    fn big_ln_matches_f64() {
        let q = BigUint::from(123_456_789_u64);
        assert!((big_ln(&q) - (123_456_789f64).ln()).abs() < 1e-14);
        let huge = BigUint::one() << 2000usize;
        assert!((big_ln(&huge) - 2000.0 * std::f64::consts::LN_2).abs() < 1e-9);
    }
}

//! Truncated Fourier-Taylor series.
//!
//! A series is a sparse map `(k, ν) -> C^n` where `k` is the order in the
//! perturbation parameter and `ν ∈ Z^d` a Fourier momentum. Keys iterate in
//! order `k` ascending, then `ν` lexicographic, which fixes the summation order
//! of every convolution and therefore makes results bit-reproducible.

mod compose;
mod csv;
mod poly;

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::CompensatedC;

pub use compose::{ft_compose_analytic, ft_compose_magnitudes, ForcingModes, ForcingTerm};
pub use poly::{MultiIndex, MultiPoly};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeriesError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("order {order} outside 0..={max_order}")]
    OrderOutOfRange { order: usize, max_order: usize },
    #[error("Taylor data available to degree {available}, composition needs degree {required}")]
    TaylorDataExhausted { required: usize, available: usize },
    #[error("forcing is not hermitian at mode {mode}: defect {defect:e}")]
    NotHermitian { mode: Mode, defect: f64 },
    #[error("malformed series CSV at line {line}: {reason}")]
    Csv { line: usize, reason: String },
}

/// Integer Fourier momentum.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Mode(pub Vec<i32>);

impl Mode {
    pub fn zero(d: usize) -> Self {
        Mode(vec![0; d])
    }

    pub fn unit(d: usize, j: usize) -> Self {
        let mut v = vec![0; d];
        v[j] = 1;
        Mode(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    /// `|ν|₁`.
    pub fn l1(&self) -> u32 {
        self.0.iter().map(|x| x.unsigned_abs()).sum()
    }

    pub fn add(&self, other: &Mode) -> Mode {
        Mode(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Mode) -> Mode {
        Mode(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self) -> Mode {
        Mode(self.0.iter().map(|a| -a).collect())
    }

    /// `ω·ν`, accumulated in index order.
    pub fn dot(&self, omega: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(omega)
            .map(|(&n, &w)| n as f64 * w)
            .sum()
    }

    /// `e^{iν·ψ}`.
    pub fn phase(&self, psi: &[f64]) -> C64 {
        C64::from_polar(1.0, self.dot(psi))
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// Truncated Fourier-Taylor series with values in `C^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct FTSeries {
    dim_d: usize,
    dim_n: usize,
    max_order: usize,
    mode_bound: Option<u32>,
    coeffs: BTreeMap<(usize, Mode), Vec<C64>>,
}

impl FTSeries {
    pub fn zero(dim_d: usize, dim_n: usize, max_order: usize) -> Self {
        FTSeries {
            dim_d,
            dim_n,
            max_order,
            mode_bound: None,
            coeffs: BTreeMap::new(),
        }
    }

    /// The constant 1 in every component.
    pub fn one(dim_d: usize, dim_n: usize, max_order: usize) -> Self {
        let mut s = Self::zero(dim_d, dim_n, max_order);
        s.coeffs
            .insert((0, Mode::zero(dim_d)), vec![C64::new(1.0, 0.0); dim_n]);
        s
    }

    pub fn with_mode_bound(mut self, bound: u32) -> Self {
        self.mode_bound = Some(bound);
        self
    }

    pub fn dim_d(&self) -> usize {
        self.dim_d
    }

    pub fn dim_n(&self) -> usize {
        self.dim_n
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn mode_bound(&self) -> Option<u32> {
        self.mode_bound
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, k: usize, nu: &Mode) -> Option<&[C64]> {
        self.coeffs.get(&(k, nu.clone())).map(|v| v.as_slice())
    }

    pub fn coeff_or_zero(&self, k: usize, nu: &Mode) -> Vec<C64> {
        self.coeff(k, nu)
            .map(|v| v.to_vec())
            .unwrap_or_else(|| vec![C64::new(0.0, 0.0); self.dim_n])
    }

    /// Store a coefficient. Exact zeros are not stored.
    pub fn set(&mut self, k: usize, nu: Mode, value: Vec<C64>) -> Result<(), SeriesError> {
        if k > self.max_order {
            return Err(SeriesError::OrderOutOfRange {
                order: k,
                max_order: self.max_order,
            });
        }
        if nu.dim() != self.dim_d || value.len() != self.dim_n {
            return Err(SeriesError::DimensionMismatch(format!(
                "coefficient of shape (d={}, n={}) in series (d={}, n={})",
                nu.dim(),
                value.len(),
                self.dim_d,
                self.dim_n
            )));
        }
        if value.iter().all(|z| z.re == 0.0 && z.im == 0.0) {
            self.coeffs.remove(&(k, nu));
        } else {
            self.coeffs.insert((k, nu), value);
        }
        Ok(())
    }

    pub fn remove(&mut self, k: usize, nu: &Mode) {
        self.coeffs.remove(&(k, nu.clone()));
    }

    /// All stored coefficients in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &Mode, &[C64])> {
        self.coeffs.iter().map(|((k, nu), v)| (*k, nu, v.as_slice()))
    }

    /// Stored coefficients of one order, ν ascending.
    pub fn order(&self, k: usize) -> impl Iterator<Item = (&Mode, &[C64])> {
        let lo = (k, Mode(vec![i32::MIN; self.dim_d]));
        let hi = (k, Mode(vec![i32::MAX; self.dim_d]));
        self.coeffs.range(lo..=hi).map(|((_, nu), v)| (nu, v.as_slice()))
    }

    /// Copy with orders above `k` dropped.
    pub fn truncated(&self, k: usize) -> FTSeries {
        let k = k.min(self.max_order);
        FTSeries {
            dim_d: self.dim_d,
            dim_n: self.dim_n,
            max_order: k,
            mode_bound: self.mode_bound,
            coeffs: self
                .coeffs
                .iter()
                .filter(|((kk, _), _)| *kk <= k)
                .map(|(a, b)| (a.clone(), b.clone()))
                .collect(),
        }
    }

    /// Same coefficients, larger truncation order.
    pub fn extended(&self, max_order: usize) -> FTSeries {
        let mut s = self.clone();
        s.max_order = s.max_order.max(max_order);
        s
    }

    /// Copy without the order-0 coefficients.
    pub fn fluctuation(&self) -> FTSeries {
        let mut s = self.clone();
        s.coeffs.retain(|(k, _), _| *k > 0);
        s
    }

    /// Scalar series holding component `j`.
    pub fn component(&self, j: usize) -> FTSeries {
        let mut s = FTSeries::zero(self.dim_d, 1, self.max_order);
        s.mode_bound = self.mode_bound;
        for ((k, nu), v) in &self.coeffs {
            let z = v[j];
            if z.re != 0.0 || z.im != 0.0 {
                s.coeffs.insert((*k, nu.clone()), vec![z]);
            }
        }
        s
    }

    /// Multiply by `e^{iν₀·ψ}`.
    pub fn shifted(&self, nu0: &Mode) -> FTSeries {
        let mut s = FTSeries::zero(self.dim_d, self.dim_n, self.max_order);
        s.mode_bound = self.mode_bound;
        for ((k, nu), v) in &self.coeffs {
            s.coeffs.insert((*k, nu.add(nu0)), v.clone());
        }
        s
    }

    pub fn scaled(&self, c: C64) -> FTSeries {
        let mut s = self.clone();
        for v in s.coeffs.values_mut() {
            for z in v.iter_mut() {
                *z *= c;
            }
        }
        s.coeffs.retain(|_, v| v.iter().any(|z| z.re != 0.0 || z.im != 0.0));
        s
    }

    /// Largest `|c(k,−ν) − conj c(k,ν)|` over order `k`, relative to the
    /// order's largest coefficient.
    pub fn hermitian_defect(&self, k: usize) -> f64 {
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        let zero = vec![C64::new(0.0, 0.0); self.dim_n];
        for (nu, v) in self.order(k) {
            let mirror = self.coeff(k, &nu.neg()).unwrap_or(&zero);
            for (a, b) in v.iter().zip(mirror) {
                worst = worst.max((a - b.conj()).norm());
                scale = scale.max(a.norm());
            }
        }
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }

    /// Replace order `k` by its hermitian part `(c(ν) + conj c(−ν))/2`.
    pub fn symmetrize(&mut self, k: usize) {
        let keys: Vec<Mode> = self.order(k).map(|(nu, _)| nu.clone()).collect();
        let zero = vec![C64::new(0.0, 0.0); self.dim_n];
        let mut updates = Vec::with_capacity(keys.len());
        for nu in &keys {
            let a = self.coeff(k, nu).unwrap_or(&zero).to_vec();
            let b = self.coeff(k, &nu.neg()).unwrap_or(&zero).to_vec();
            let v: Vec<C64> = a
                .iter()
                .zip(&b)
                .map(|(x, y)| (x + y.conj()) * 0.5)
                .collect();
            updates.push((nu.neg(), v.iter().map(|z| z.conj()).collect::<Vec<_>>()));
            updates.push((nu.clone(), v));
        }
        for (nu, v) in updates {
            // dimensions are inherited, cannot fail
            let _ = self.set(k, nu, v);
        }
    }

    /// First stored key violating `|ν|₁ ≤ k·N`.
    pub fn support_violation(&self, bound: u32) -> Option<(usize, Mode)> {
        self.coeffs
            .keys()
            .find(|(k, nu)| nu.l1() > *k as u32 * bound)
            .cloned()
    }

    fn check_shape(&self, other: &FTSeries, what: &str) -> Result<(), SeriesError> {
        if self.dim_d != other.dim_d || self.dim_n != other.dim_n || self.max_order != other.max_order
        {
            return Err(SeriesError::DimensionMismatch(format!(
                "{what}: (d={}, n={}, K={}) vs (d={}, n={}, K={})",
                self.dim_d, self.dim_n, self.max_order, other.dim_d, other.dim_n, other.max_order
            )));
        }
        Ok(())
    }
}

fn combine_bounds(a: Option<u32>, b: Option<u32>) -> Option<u32> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        _ => None,
    }
}

/// Coefficient-wise sum.
pub fn ft_add(a: &FTSeries, b: &FTSeries) -> Result<FTSeries, SeriesError> {
    a.check_shape(b, "ft_add")?;
    let mut out = a.clone();
    out.mode_bound = combine_bounds(a.mode_bound, b.mode_bound);
    for ((k, nu), v) in &b.coeffs {
        let sum: Vec<C64> = match a.coeffs.get(&(*k, nu.clone())) {
            Some(w) => w.iter().zip(v).map(|(x, y)| x + y).collect(),
            None => v.clone(),
        };
        out.set(*k, nu.clone(), sum)?;
    }
    Ok(out)
}

/// Coefficient-wise difference.
pub fn ft_sub(a: &FTSeries, b: &FTSeries) -> Result<FTSeries, SeriesError> {
    ft_add(a, &b.scaled(C64::new(-1.0, 0.0)))
}

/// Truncated Cauchy-convolution product, component-wise in `C^n`.
///
/// Each output coefficient is accumulated with compensated summation in the
/// fixed order (a-key, b-key), so the result does not depend on threading.
pub fn ft_mul(a: &FTSeries, b: &FTSeries) -> Result<FTSeries, SeriesError> {
    a.check_shape(b, "ft_mul")?;
    let kmax = a.max_order;
    let n = a.dim_n;
    let mut acc: BTreeMap<(usize, Mode), Vec<CompensatedC>> = BTreeMap::new();
    for ((ka, na), va) in &a.coeffs {
        for ((kb, nb), vb) in &b.coeffs {
            let k = ka + kb;
            if k > kmax {
                continue;
            }
            let slot = acc
                .entry((k, na.add(nb)))
                .or_insert_with(|| vec![CompensatedC::default(); n]);
            for j in 0..n {
                slot[j].add(va[j] * vb[j]);
            }
        }
    }
    let mut out = FTSeries::zero(a.dim_d, n, kmax);
    out.mode_bound = combine_bounds(a.mode_bound, b.mode_bound);
    for ((k, nu), v) in acc {
        out.set(k, nu, v.iter().map(|c| c.value()).collect())?;
    }
    Ok(out)
}

/// `Σ_{k≤K} ε^k Σ_ν e^{iν·ψ} c(k,ν)`.
pub fn ft_eval(u: &FTSeries, psi: &[f64], eps: f64) -> Vec<C64> {
    let mut acc = vec![CompensatedC::default(); u.dim_n];
    let mut powers = vec![1.0; u.max_order + 1];
    for k in 1..powers.len() {
        powers[k] = powers[k - 1] * eps;
    }
    for ((k, nu), v) in &u.coeffs {
        let w = nu.phase(psi) * powers[*k];
        for (slot, z) in acc.iter_mut().zip(v) {
            slot.add(w * z);
        }
    }
    acc.iter().map(|c| c.value()).collect()
}

/// `norm_k = Σ_ν |c(k,ν)|` with the Euclidean norm on `C^n`.
pub fn ft_order_norms(u: &FTSeries) -> Vec<f64> {
    let mut norms = vec![0.0; u.max_order + 1];
    for ((k, _), v) in &u.coeffs {
        norms[*k] += v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    }
    norms
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn single(k: usize, nu: i32, z: C64, kmax: usize) -> FTSeries {
        let mut s = FTSeries::zero(1, 1, kmax);
        s.set(k, Mode(vec![nu]), vec![z]).unwrap();
        s
    }

    #[test]
    fn add_is_componentwise() {
        let a = single(1, 1, c(0.0, 1.0), 2);
        let b = single(1, 1, c(2.0, 0.0), 2);
        let s = ft_add(&a, &b).unwrap();
        assert_eq!(s.coeff(1, &Mode(vec![1])).unwrap(), &[c(2.0, 1.0)]);
    }

    #[test]
    fn add_identity_and_inverse() {
        let a = single(1, 1, c(0.3, -0.2), 2);
        let z = FTSeries::zero(1, 1, 2);
        assert_eq!(ft_add(&a, &z).unwrap(), a);
        assert!(ft_sub(&a, &a).unwrap().is_empty());
    }

    #[test]
    fn add_rejects_shape_mismatch() {
        let a = FTSeries::zero(1, 1, 2);
        let b = FTSeries::zero(2, 1, 2);
        assert!(matches!(ft_add(&a, &b), Err(SeriesError::DimensionMismatch(_))));
        let b = FTSeries::zero(1, 1, 3);
        assert!(ft_mul(&a, &b).is_err());
    }

    #[test]
    fn mul_single_modes() {
        let a = single(1, 1, c(1.0, 0.0), 2);
        let b = single(1, -1, c(1.0, 0.0), 2);
        let p = ft_mul(&a, &b).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.coeff(2, &Mode(vec![0])).unwrap(), &[c(1.0, 0.0)]);
    }

    #[test]
    fn mul_identity() {
        let mut a = single(1, 1, c(0.5, 0.25), 3);
        a.set(2, Mode(vec![-2]), vec![c(-1.0, 3.0)]).unwrap();
        let one = FTSeries::one(1, 1, 3);
        assert_eq!(ft_mul(&a, &one).unwrap(), a);
    }

    #[test]
    fn mul_square_of_cosine() {
        let mut a = single(1, 1, c(1.0, 0.0), 2);
        a.set(1, Mode(vec![-1]), vec![c(1.0, 0.0)]).unwrap();
        let p = ft_mul(&a, &a).unwrap();
        assert_eq!(p.coeff(2, &Mode(vec![2])).unwrap(), &[c(1.0, 0.0)]);
        assert_eq!(p.coeff(2, &Mode(vec![0])).unwrap(), &[c(2.0, 0.0)]);
        assert_eq!(p.coeff(2, &Mode(vec![-2])).unwrap(), &[c(1.0, 0.0)]);
        assert_eq!(p.len(), 3);
    }

    #[test]
    fn mul_truncates() {
        let a = single(2, 1, c(1.0, 0.0), 3);
        assert!(ft_mul(&a, &a).unwrap().is_empty());
    }

    #[test]
    fn eval_examples() {
        let z = c(0.5, -1.5);
        let s = single(1, 1, z, 1);
        let psi = [0.7];
        let v = ft_eval(&s, &psi, 0.1);
        let expect = z * 0.1 * C64::from_polar(1.0, 0.7);
        assert!((v[0] - expect).norm() < 1e-16);
        let mut u0 = FTSeries::zero(1, 1, 1);
        u0.set(0, Mode(vec![0]), vec![c(2.0, 0.0)]).unwrap();
        u0.set(1, Mode(vec![3]), vec![c(1.0, 0.0)]).unwrap();
        assert_eq!(ft_eval(&u0, &psi, 0.0), vec![c(2.0, 0.0)]);
    }

    #[test]
    fn order_norms() {
        assert_eq!(ft_order_norms(&FTSeries::zero(1, 1, 2)), vec![0.0, 0.0, 0.0]);
        let s = single(2, 1, c(0.0, 3.0), 2);
        assert_eq!(ft_order_norms(&s), vec![0.0, 0.0, 3.0]);
    }

    #[test]
    fn hermitian_defect_and_symmetrize() {
        let mut s = single(1, 1, c(1.0, 2.0), 1);
        assert_eq!(s.hermitian_defect(1), 1.0);
        s.set(1, Mode(vec![-1]), vec![c(1.0, -2.0)]).unwrap();
        assert_eq!(s.hermitian_defect(1), 0.0);
        s.set(1, Mode(vec![-1]), vec![c(1.0, -2.0 + 1e-12)]).unwrap();
        s.symmetrize(1);
        assert_eq!(s.hermitian_defect(1), 0.0);
    }

    #[test]
    fn support_violation_detects_far_modes() {
        let s = single(1, 2, c(1.0, 0.0), 1);
        assert_eq!(s.support_violation(1), Some((1, Mode(vec![2]))));
        assert_eq!(s.support_violation(2), None);
    }

    #[test]
    fn order_range_query() {
        let mut s = FTSeries::zero(2, 1, 3);
        s.set(1, Mode(vec![1, 0]), vec![c(1.0, 0.0)]).unwrap();
        s.set(2, Mode(vec![-1, 5]), vec![c(2.0, 0.0)]).unwrap();
        s.set(2, Mode(vec![0, -4]), vec![c(3.0, 0.0)]).unwrap();
        let keys: Vec<_> = s.order(2).map(|(nu, _)| nu.clone()).collect();
        assert_eq!(keys, vec![Mode(vec![-1, 5]), Mode(vec![0, -4])]);
    }
}

//! Rotation vectors and the arithmetic of their small divisors.
//!
//! A [`RotationVector`] is either a flow frequency `ω ∈ R^d` (divisors
//! `|ω·ν|`) or a rotation number of a map (divisors `‖ω ν‖`, distance to the
//! nearest integer). Components keep their exact representation when one is
//! available so continued fractions never lose precision.

mod bryuno;
mod cf;
mod search;

use serde::Serialize;
use thiserror::Error;

use crate::numeric::Compensated;
use crate::series::Mode;

pub use bryuno::{bryuno_function, bryuno_omega, BryunoKind, BryunoReport};
pub use cf::{continued_fraction, rational_continued_fraction, ContinuedFraction};
pub use search::DEFAULT_SEARCH_BUDGET;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiophantineError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("float precision exhausted after {} of {requested} partial quotients", valid.len())]
    CfTruncated { valid: Vec<u64>, requested: usize },
    #[error("{required} continued-fraction terms needed, {available} available")]
    InsufficientTerms { required: usize, available: usize },
    #[error("rotation vector is rationally dependent: ω·ν = 0 for ν = {witness}")]
    Rational { witness: Mode },
    #[error("search needs {required} candidate evaluations, budget is {budget}")]
    SearchBudget { required: u64, budget: u64 },
}

/// `(a + b√m)/c` with `m` not a perfect square and `b, c ≠ 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct QuadraticSurd {
    pub a: i64,
    pub b: i64,
    pub m: u64,
    pub c: i64,
}

impl QuadraticSurd {
    pub fn new(a: i64, b: i64, m: u64, c: i64) -> Result<Self, DiophantineError> {
        let root = (m as f64).sqrt().round() as u64;
        let square = (root.saturating_sub(1)..=root + 1).any(|r| r * r == m);
        if b == 0 || c == 0 || square {
            return Err(DiophantineError::InvalidInput(format!(
                "({a} + {b}√{m})/{c} is rational"
            )));
        }
        Ok(QuadraticSurd { a, b, m, c })
    }

    /// `(√5 − 1)/2`.
    pub fn golden() -> Self {
        QuadraticSurd { a: -1, b: 1, m: 5, c: 2 }
    }

    /// `√2 − 1`.
    pub fn silver() -> Self {
        QuadraticSurd { a: -1, b: 1, m: 2, c: 1 }
    }

    pub fn value(&self) -> f64 {
        (self.a as f64 + self.b as f64 * (self.m as f64).sqrt()) / self.c as f64
    }
}

/// `α = [0; head…, period, period, …]`, quotients `a₁, a₂, …`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CfSpec {
    pub head: Vec<u64>,
    pub period: Vec<u64>,
}

impl CfSpec {
    pub fn new(head: Vec<u64>, period: Vec<u64>) -> Result<Self, DiophantineError> {
        if period.is_empty() {
            return Err(DiophantineError::InvalidInput(
                "a finite continued fraction is rational; the period must be nonempty".into(),
            ));
        }
        if head.iter().chain(&period).any(|&a| a == 0) {
            return Err(DiophantineError::InvalidInput(
                "partial quotients must be positive".into(),
            ));
        }
        Ok(CfSpec { head, period })
    }

    /// `a_i` for `i ≥ 1`.
    pub fn quotient(&self, i: usize) -> u64 {
        let j = i - 1;
        if j < self.head.len() {
            self.head[j]
        } else {
            self.period[(j - self.head.len()) % self.period.len()]
        }
    }

    pub fn value(&self) -> f64 {
        // convergents until the denominators pass 2^60
        let (mut p0, mut q0, mut p1, mut q1) = (1.0_f64, 0.0_f64, 0.0_f64, 1.0_f64);
        let mut i = 1;
        while q1 < 1.2e18 && i < 10_000 {
            let a = self.quotient(i) as f64;
            let (p2, q2) = (a * p1 + p0, a * q1 + q0);
            p0 = p1;
            q0 = q1;
            p1 = p2;
            q1 = q2;
            i += 1;
        }
        p1 / q1
    }
}

/// One coordinate of a rotation vector.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    Float(f64),
    Surd(QuadraticSurd),
    Cf(CfSpec),
}

impl Component {
    pub fn value(&self) -> f64 {
        match self {
            Component::Float(x) => *x,
            Component::Surd(s) => s.value(),
            Component::Cf(c) => c.value(),
        }
    }
}

/// Diophantine metadata attached to a rotation vector: `γ` is the brute-force
/// minimum of `|ω·ν|·|ν|₁^τ` over `0 < |ν|₁ ≤ ν_max`, attained at `argmin`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiophantineStamp {
    pub gamma: f64,
    pub tau: f64,
    pub nu_max: u32,
    pub argmin: Mode,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RotationVector {
    components: Vec<Component>,
    values: Vec<f64>,
    mod_one: bool,
    stamp: Option<DiophantineStamp>,
}

impl RotationVector {
    /// Flow frequency; divisors are `|ω·ν|`.
    pub fn flow(components: Vec<Component>) -> Result<Self, DiophantineError> {
        Self::build(components, false)
    }

    /// Rotation number of a map on the circle; divisors are `‖ω ν‖`.
    pub fn rotation_number(component: Component) -> Result<Self, DiophantineError> {
        Self::build(vec![component], true)
    }

    pub fn from_floats(values: &[f64]) -> Result<Self, DiophantineError> {
        Self::flow(values.iter().map(|&x| Component::Float(x)).collect())
    }

    /// `(1, (√5−1)/2)`.
    pub fn golden_flow() -> Self {
        Self::flow(vec![
            Component::Float(1.0),
            Component::Surd(QuadraticSurd::golden()),
        ])
        .expect("valid")
    }

    fn build(components: Vec<Component>, mod_one: bool) -> Result<Self, DiophantineError> {
        if components.is_empty() {
            return Err(DiophantineError::InvalidInput(
                "rotation vector needs at least one component".into(),
            ));
        }
        let values: Vec<f64> = components.iter().map(Component::value).collect();
        if let Some(x) = values.iter().find(|x| !x.is_finite()) {
            return Err(DiophantineError::InvalidInput(format!("non-finite component {x}")));
        }
        Ok(RotationVector {
            components,
            values,
            mod_one,
            stamp: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn is_mod_one(&self) -> bool {
        self.mod_one
    }

    pub fn stamp(&self) -> Option<&DiophantineStamp> {
        self.stamp.as_ref()
    }

    /// `τ = d − 1` for flows (at least 1), `τ = 1` for rotation numbers.
    pub fn default_tau(&self) -> f64 {
        if self.mod_one {
            1.0
        } else {
            (self.dim() as f64 - 1.0).max(1.0)
        }
    }

    /// `ω·ν` with a compensated sum.
    pub fn dot(&self, nu: &Mode) -> f64 {
        let mut s = Compensated::default();
        for (w, &n) in self.values.iter().zip(&nu.0) {
            s.add(w * n as f64);
        }
        s.value()
    }

    /// The small divisor `|ω·ν|`, or `‖ω ν‖` for rotation numbers.
    pub fn divisor(&self, nu: &Mode) -> f64 {
        let x = self.dot(nu);
        if self.mod_one {
            (x - x.round()).abs()
        } else {
            x.abs()
        }
    }

    /// Magnitude against which a divisor counts as a floating-point zero.
    pub(crate) fn divisor_scale(&self, nu: &Mode) -> f64 {
        self.values
            .iter()
            .zip(&nu.0)
            .map(|(w, &n)| (w * n as f64).abs())
            .sum()
    }

    /// Compute and attach `γ` at radius `nu_max`; fails when a vanishing
    /// divisor is found inside the radius.
    pub fn verified(mut self, tau: Option<f64>, nu_max: u32) -> Result<Self, DiophantineError> {
        let tau = tau.unwrap_or_else(|| self.default_tau());
        let stamp = diophantine_constant(&self, tau, nu_max)?;
        self.stamp = Some(stamp);
        Ok(self)
    }

    /// Attach a caller-supplied stamp, for instance one read back from a report.
    pub fn with_stamp(mut self, stamp: DiophantineStamp) -> Self {
        self.stamp = Some(stamp);
        self
    }
}

/// `γ = min_{0<|ν|₁≤ν_max} δ(ν)·|ν|₁^τ` where `δ` is the divisor of `ω`.
///
/// An estimate at the recorded radius, not a certificate. A vanishing divisor
/// inside the radius is reported as [`DiophantineError::Rational`].
pub fn diophantine_constant(
    omega: &RotationVector,
    tau: f64,
    nu_max: u32,
) -> Result<DiophantineStamp, DiophantineError> {
    let min_tau = if omega.is_mod_one() { 0.0 } else { omega.dim() as f64 - 1.0 };
    if !(tau >= min_tau) {
        return Err(DiophantineError::InvalidInput(format!(
            "τ = {tau} below the admissible minimum {min_tau}"
        )));
    }
    if nu_max == 0 {
        return Err(DiophantineError::InvalidInput("ν_max must be positive".into()));
    }
    let best = search::minimize(omega, nu_max, |l1| (l1 as f64).powf(tau), DEFAULT_SEARCH_BUDGET)?;
    if let Some(witness) = best.rational {
        return Err(DiophantineError::Rational { witness });
    }
    Ok(DiophantineStamp {
        gamma: best.value,
        tau,
        nu_max,
        argmin: best.nu,
    })
}

/// Sharp scale of a momentum: `0` when `δ(ν) ≥ γ`, otherwise the `n ≥ 1`
/// with `2^{−n}γ ≤ δ(ν) < 2^{−n+1}γ`; `−1` for `ν = 0` and `i32::MAX` for
/// an exactly vanishing divisor.
pub fn scale_of(nu: &Mode, omega: &RotationVector, gamma: f64) -> i32 {
    if nu.is_zero() {
        return -1;
    }
    scale_of_divisor(omega.divisor(nu), gamma)
}

/// [`scale_of`] for an already computed divisor.
pub fn scale_of_divisor(x: f64, gamma: f64) -> i32 {
    assert!(gamma > 0.0, "γ must be positive");
    if x >= gamma {
        return 0;
    }
    if x <= 0.0 {
        return i32::MAX;
    }
    // halving is exact in binary, so the brackets are compared without rounding
    let mut n = 1;
    let mut lower = gamma * 0.5;
    while x < lower {
        n += 1;
        lower *= 0.5;
        if lower == 0.0 {
            return i32::MAX;
        }
    }
    n
}

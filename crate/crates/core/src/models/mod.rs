//! The four model families and their order-by-order Lindstedt solvers.
//!
//! Every model is written as `D_ε u = ε F(u, ψ)` where `D_ε` acts diagonally
//! in Fourier space through `δ(ω·ν, ε) = Σ_p ε^p δ_p(ω·ν)`:
//!
//! | model          | unknown                | `δ₀(x)`              | `δ₁(x)` |
//! |----------------|------------------------|----------------------|---------|
//! | maximal torus  | `α = α₀ + ψ + u`       | `−x²`                |         |
//! | standard map   | `x = α₀ + ψ + u`       | `2(cos 2πx − 1)`     |         |
//! | lower tori     | `(α₀ + ψ + a, β₀ + b)` | `−x²`                |         |
//! | dissipative    | `x = c₀ + u`           | `ix`                 | `−x²`   |

mod document;
mod forcing;
mod residual;
mod solver;
mod stationary;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diophantine::DiophantineError;
use crate::series::{ForcingModes, Mode, MultiPoly, SeriesError};

pub use document::{ComponentDoc, FourierDoc, ModelDocument, OmegaDoc, TaylorDoc};
pub use residual::{default_grid, residual_eval, residual_order_check, OrderCheck};
pub use solver::{
    compatibility_report, solve_lindstedt, solve_lindstedt_with, CompatibilityEntry,
    CompatibilityReport, SolveOptions, SolveReport,
};
pub use stationary::{stationary_point_check, Extremum, StationaryReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid model: {0}")]
    InvalidSpec(String),
    #[error("β₀ is not a stationary point: |∂f₀(β₀)| = {gradient_norm:e}")]
    NotStationary { gradient_norm: f64 },
    #[error("nondegeneracy violated: smallest singular value {min_singular:e}")]
    Degenerate { min_singular: f64 },
    #[error("equilibrium equation g(c₀) = f₀ violated by {defect:e}")]
    NoEquilibrium { defect: f64 },
    #[error("vanishing small divisor at order {order}, ν = {nu}")]
    ZeroDivisor { order: usize, nu: Mode },
    #[error("order {order} is not hermitian: relative defect {defect:e}")]
    NotHermitian { order: usize, defect: f64 },
    #[error(
        "compatibility condition fails at order {order}, component {component}: relative value {relative:e}"
    )]
    Compatibility {
        order: usize,
        component: usize,
        relative: f64,
    },
    #[error("residuals at the roundoff floor ({residual:e} against scale {scale:e}); raise ε or lower K")]
    RoundoffFloor { residual: f64, scale: f64 },
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Diophantine(#[from] DiophantineError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub stationary: f64,
    pub nondeg: f64,
    pub compat: f64,
    pub hermitian: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            stationary: 1e-10,
            nondeg: 1e-8,
            compat: 1e-12,
            hermitian: 1e-10,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    MaximalTorus,
    StandardMap,
    LowerTori,
    Dissipative,
}

/// Fourier coefficient `f_ν` of `Σ_ν f_ν e^{iν·ψ}`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierCoeff {
    pub nu: Mode,
    pub value: C64,
}

impl FourierCoeff {
    pub fn new(nu: Vec<i32>, re: f64, im: f64) -> Self {
        FourierCoeff {
            nu: Mode(nu),
            value: C64::new(re, im),
        }
    }
}

/// Perturbation of the lower-tori Hamiltonian `f(α, β) = Σ_ν e^{iν·α} f_ν(β)`.
#[derive(Clone, Debug, PartialEq)]
pub enum LowerForcing {
    /// `f = Σ c e^{iν·α + iμ·β}`: entries `(ν, μ, c)`.
    Trig(Vec<(Mode, Mode, C64)>),
    /// Taylor polynomials of `f_ν(β₀ + z)` in `z ∈ R^s`, exact through
    /// total degree `degree`.
    Taylor {
        degree: usize,
        modes: Vec<(Mode, MultiPoly)>,
    },
}

#[derive(Clone, Debug, PartialEq)]
enum ModelData {
    Maximal {
        f: Vec<FourierCoeff>,
    },
    StandardMap {
        f: Vec<FourierCoeff>,
    },
    Lower {
        r: usize,
        s: usize,
        beta0: Vec<f64>,
        forcing: LowerForcing,
        hessian: DMatrix<f64>,
    },
    Dissipative {
        g_taylor: Vec<f64>,
        c0: f64,
        a: f64,
        f: Vec<FourierCoeff>,
    },
}

/// A validated model instance.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    kind: ModelKind,
    dim_d: usize,
    dim_n: usize,
    alpha0: Vec<f64>,
    tol: Tolerances,
    data: ModelData,
}

fn check_modes(f: &[FourierCoeff], d: usize, what: &str) -> Result<(), ModelError> {
    if f.is_empty() {
        return Err(ModelError::InvalidSpec(format!("{what}: no forcing modes")));
    }
    if let Some(c) = f.iter().find(|c| c.nu.dim() != d) {
        return Err(ModelError::InvalidSpec(format!(
            "{what}: mode {} has dimension {}, expected {d}",
            c.nu,
            c.nu.dim()
        )));
    }
    Ok(())
}

fn real_check(f: &[FourierCoeff], tol: f64, what: &str) -> Result<(), ModelError> {
    let scale = f.iter().map(|c| c.value.norm()).fold(0.0, f64::max);
    for c in f {
        let mirror: C64 = f
            .iter()
            .filter(|m| m.nu == c.nu.neg())
            .map(|m| m.value)
            .sum();
        let own: C64 = f.iter().filter(|m| m.nu == c.nu).map(|m| m.value).sum();
        if (mirror - own.conj()).norm() > tol * scale {
            return Err(ModelError::InvalidSpec(format!(
                "{what}: coefficients of ν = {} and −ν are not complex conjugate (real forcing required)",
                c.nu
            )));
        }
    }
    Ok(())
}

impl ModelSpec {
    /// `H = ω·A + A²/2 + ε f(α)` with `f(α) = Σ f_ν e^{iν·α}`.
    pub fn maximal_torus(f: Vec<FourierCoeff>) -> Result<Self, ModelError> {
        let d = f.first().map(|c| c.nu.dim()).unwrap_or(0);
        check_modes(&f, d, "maximal torus")?;
        let tol = Tolerances::default();
        real_check(&f, tol.hermitian, "maximal torus")?;
        Ok(ModelSpec {
            kind: ModelKind::MaximalTorus,
            dim_d: d,
            dim_n: d,
            alpha0: vec![0.0; d],
            tol,
            data: ModelData::Maximal { f },
        })
    }

    /// `x_{n+1} − 2x_n + x_{n−1} = ε F(x_n)` with `F = Σ φ_ν e^{iνx}`; `None` means
    /// `F = sin x`.
    pub fn standard_map(f: Option<Vec<FourierCoeff>>) -> Result<Self, ModelError> {
        let f = f.unwrap_or_else(|| {
            vec![
                FourierCoeff::new(vec![-1], 0.0, 0.5),
                FourierCoeff::new(vec![1], 0.0, -0.5),
            ]
        });
        check_modes(&f, 1, "standard map")?;
        let tol = Tolerances::default();
        real_check(&f, tol.hermitian, "standard map")?;
        let mean: C64 = f.iter().filter(|c| c.nu.is_zero()).map(|c| c.value).sum();
        if mean.norm() != 0.0 {
            return Err(ModelError::InvalidSpec(
                "standard map: F must have zero mean".into(),
            ));
        }
        Ok(ModelSpec {
            kind: ModelKind::StandardMap,
            dim_d: 1,
            dim_n: 1,
            alpha0: vec![0.0],
            tol,
            data: ModelData::StandardMap { f },
        })
    }

    /// `H = ω·A + B²/2 + ε f(α, β)`, `α ∈ T^r`, `β ∈ R^s`, around the
    /// stationary point `β₀` of `f₀`.
    pub fn lower_tori(
        r: usize,
        s: usize,
        beta0: Vec<f64>,
        forcing: LowerForcing,
        tol: Tolerances,
    ) -> Result<Self, ModelError> {
        if r == 0 || s == 0 || beta0.len() != s {
            return Err(ModelError::InvalidSpec(format!(
                "lower tori need r, s ≥ 1 and β₀ of length s (r={r}, s={s}, |β₀|={})",
                beta0.len()
            )));
        }
        match &forcing {
            LowerForcing::Trig(t) => {
                if t.is_empty() {
                    return Err(ModelError::InvalidSpec("lower tori: no forcing modes".into()));
                }
                if let Some((nu, mu, _)) = t.iter().find(|(nu, mu, _)| nu.dim() != r || mu.dim() != s)
                {
                    return Err(ModelError::InvalidSpec(format!(
                        "lower tori: term (ν={nu}, μ={mu}) has wrong dimensions"
                    )));
                }
            }
            LowerForcing::Taylor { modes: t, .. } => {
                if t.is_empty() {
                    return Err(ModelError::InvalidSpec("lower tori: no forcing modes".into()));
                }
                if let Some((nu, _)) = t.iter().find(|(nu, p)| nu.dim() != r || p.nvars() != s || p.dim_out() != 1) {
                    return Err(ModelError::InvalidSpec(format!(
                        "lower tori: Taylor data of mode {nu} has wrong dimensions"
                    )));
                }
            }
        }
        let report = stationary_point_check(&forcing, &beta0, &tol)?;
        let hessian = DMatrix::from_fn(s, s, |i, j| report.hessian[i][j]);
        let min_sv = hessian.singular_values().min();
        if !(min_sv > tol.nondeg) {
            return Err(ModelError::Degenerate { min_singular: min_sv });
        }
        let spec = ModelSpec {
            kind: ModelKind::LowerTori,
            dim_d: r,
            dim_n: r + s,
            alpha0: vec![0.0; r],
            tol,
            data: ModelData::Lower {
                r,
                s,
                beta0,
                forcing,
                hessian,
            },
        };
        spec.forcing_modes(2)?
            .check_hermitian(tol.hermitian)
            .map_err(|_| {
                ModelError::InvalidSpec(
                    "lower tori: forcing is not real (ν and −ν data are not conjugate)".into(),
                )
            })?;
        Ok(spec)
    }

    /// `ẍ + ε^{−1} ẋ + g(x) = f(ωt)` with `g(x) = Σ_j g_j x^j`; `c₀` solves
    /// `g(c₀) = f₀` and is found numerically when not given.
    pub fn dissipative(
        m: usize,
        g_taylor: Vec<f64>,
        c0: Option<f64>,
        f: Vec<FourierCoeff>,
        tol: Tolerances,
    ) -> Result<Self, ModelError> {
        check_modes(&f, m, "dissipative")?;
        real_check(&f, tol.hermitian, "dissipative")?;
        if g_taylor.len() < 2 || g_taylor.iter().any(|x| !x.is_finite()) {
            return Err(ModelError::InvalidSpec(
                "dissipative: g_taylor needs at least the coefficients g₀, g₁".into(),
            ));
        }
        let f0: C64 = f.iter().filter(|c| c.nu.is_zero()).map(|c| c.value).sum();
        let c0 = match c0 {
            Some(c) => c,
            None => forcing::solve_equilibrium(&g_taylor, f0.re)?,
        };
        let shifted = forcing::shift_polynomial(&g_taylor, c0);
        let defect = (shifted[0] - f0.re).abs();
        if defect > tol.stationary * f0.norm().max(1.0) {
            return Err(ModelError::NoEquilibrium { defect });
        }
        let a = shifted[1];
        if !(a.abs() > tol.nondeg) {
            return Err(ModelError::Degenerate { min_singular: a.abs() });
        }
        Ok(ModelSpec {
            kind: ModelKind::Dissipative,
            dim_d: m,
            dim_n: 1,
            alpha0: vec![0.0; m],
            tol,
            data: ModelData::Dissipative { g_taylor, c0, a, f },
        })
    }

    pub fn with_alpha0(mut self, alpha0: Vec<f64>) -> Result<Self, ModelError> {
        if alpha0.len() != self.dim_d {
            return Err(ModelError::InvalidSpec(format!(
                "α₀ has length {}, expected {}",
                alpha0.len(),
                self.dim_d
            )));
        }
        if self.kind == ModelKind::Dissipative && alpha0.iter().any(|&x| x != 0.0) {
            return Err(ModelError::InvalidSpec(
                "the dissipative model has no phase α₀".into(),
            ));
        }
        self.alpha0 = alpha0;
        Ok(self)
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    /// Number of frequencies (Fourier dimension).
    pub fn dim_d(&self) -> usize {
        self.dim_d
    }

    /// Number of unknown components.
    pub fn dim_n(&self) -> usize {
        self.dim_n
    }

    pub fn alpha0(&self) -> &[f64] {
        &self.alpha0
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    /// `(r, s)` for lower tori.
    pub fn lower_dims(&self) -> Option<(usize, usize)> {
        match &self.data {
            ModelData::Lower { r, s, .. } => Some((*r, *s)),
            _ => None,
        }
    }

    pub fn beta0(&self) -> Option<&[f64]> {
        match &self.data {
            ModelData::Lower { beta0, .. } => Some(beta0),
            _ => None,
        }
    }

    /// `∂²_β f₀(β₀)` for lower tori.
    pub fn hessian(&self) -> Option<&DMatrix<f64>> {
        match &self.data {
            ModelData::Lower { hessian, .. } => Some(hessian),
            _ => None,
        }
    }

    /// `a_i`: eigenvalues of `−∂²_β f₀(β₀)`, ascending (lower tori only).
    pub fn normal_eigenvalues(&self) -> Option<Vec<f64>> {
        let h = self.hessian()?;
        let mut a: Vec<f64> = (-h.clone()).symmetric_eigenvalues().iter().copied().collect();
        a.sort_by(f64::total_cmp);
        Some(a)
    }

    pub fn c0(&self) -> Option<f64> {
        match &self.data {
            ModelData::Dissipative { c0, .. } => Some(*c0),
            _ => None,
        }
    }

    /// `a = ∂_x g(c₀)` for the dissipative model.
    pub fn damping_a(&self) -> Option<f64> {
        match &self.data {
            ModelData::Dissipative { a, .. } => Some(*a),
            _ => None,
        }
    }

    /// Coefficients of `g(x) = Σ g_j x^j`.
    pub fn g_taylor(&self) -> Option<&[f64]> {
        match &self.data {
            ModelData::Dissipative { g_taylor, .. } => Some(g_taylor),
            _ => None,
        }
    }

    /// Fourier data of the forcing (`f`, `F` or `f(ψ)`); `None` for lower tori.
    pub fn fourier_forcing(&self) -> Option<&[FourierCoeff]> {
        match &self.data {
            ModelData::Maximal { f } | ModelData::StandardMap { f } => Some(f),
            ModelData::Dissipative { f, .. } => Some(f),
            ModelData::Lower { .. } => None,
        }
    }

    /// `δ_p(x)`.
    pub fn delta(&self, p: usize, x: f64) -> C64 {
        match (self.kind, p) {
            (ModelKind::MaximalTorus | ModelKind::LowerTori, 0) => C64::new(-x * x, 0.0),
            (ModelKind::StandardMap, 0) => {
                let s = (std::f64::consts::PI * x).sin();
                C64::new(-4.0 * s * s, 0.0)
            }
            (ModelKind::Dissipative, 0) => C64::new(0.0, x),
            (ModelKind::Dissipative, 1) => C64::new(-x * x, 0.0),
            _ => C64::new(0.0, 0.0),
        }
    }

    /// `δ(x, ε) = Σ_p ε^p δ_p(x)`.
    pub fn delta_eps(&self, x: f64, eps: f64) -> C64 {
        let mut out = C64::new(0.0, 0.0);
        let mut w = 1.0;
        for p in 0..=self.k0() {
            out += self.delta(p, x) * w;
            w *= eps;
        }
        out
    }

    /// Highest `p` with `δ_p ≠ 0`.
    pub fn k0(&self) -> usize {
        if self.kind == ModelKind::Dissipative {
            1
        } else {
            0
        }
    }

    /// Zero-momentum propagator `G`: `u^{(k)}_0 = G·Φ_k` with `Φ_k` the
    /// order-`k` zero mode of the composed right-hand side before the
    /// correction. `None` when zero modes are set to zero.
    pub fn g_matrix(&self) -> Option<DMatrix<f64>> {
        match &self.data {
            ModelData::Lower { r, s, hessian, .. } => {
                let inv = hessian.clone().try_inverse()?;
                let mut g = DMatrix::zeros(r + s, r + s);
                g.view_mut((*r, *r), (*s, *s)).copy_from(&inv);
                Some(g)
            }
            ModelData::Dissipative { a, .. } => Some(DMatrix::from_element(1, 1, 1.0 / a)),
            _ => None,
        }
    }

    /// Largest `|ν₀|₁` over the forcing modes.
    pub fn mode_radius(&self) -> u32 {
        match &self.data {
            ModelData::Maximal { f } | ModelData::StandardMap { f } => {
                f.iter().map(|c| c.nu.l1()).max().unwrap_or(0)
            }
            ModelData::Dissipative { f, .. } => f.iter().map(|c| c.nu.l1()).max().unwrap_or(0),
            ModelData::Lower { forcing, .. } => match forcing {
                LowerForcing::Trig(t) => t.iter().map(|(nu, _, _)| nu.l1()).max().unwrap_or(0),
                LowerForcing::Taylor { modes: t, .. } => t.iter().map(|(nu, _)| nu.l1()).max().unwrap_or(0),
            },
        }
    }

    /// Taylor-Fourier modes of `F` around the unperturbed solution, exact
    /// through `degree`.
    pub fn forcing_modes(&self, degree: usize) -> Result<ForcingModes, ModelError> {
        forcing::forcing_modes(self, degree)
    }

    /// `F(u, ψ)` evaluated pointwise. `u` is the full deviation (for the
    /// dissipative model, `x` itself).
    pub fn eval_rhs(&self, u: &[C64], psi: &[f64]) -> Vec<C64> {
        forcing::eval_rhs(self, u, psi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_map_divisor_is_accurate_for_small_arguments() {
        let sm = ModelSpec::standard_map(None).unwrap();
        let x = 1e-9;
        let exact = -4.0 * (std::f64::consts::PI * x).powi(2);
        assert!((sm.delta(0, x).re - exact).abs() < 1e-30);
    }

    #[test]
    fn dissipative_equilibrium_and_damping() {
        let f = vec![
            FourierCoeff::new(vec![0], 1.0, 0.0),
            FourierCoeff::new(vec![1], 0.5, 0.0),
            FourierCoeff::new(vec![-1], 0.5, 0.0),
        ];
        let spec =
            ModelSpec::dissipative(1, vec![0.0, 0.0, 0.0, 1.0], None, f, Tolerances::default())
                .unwrap();
        assert!((spec.c0().unwrap() - 1.0).abs() < 1e-14);
        assert!((spec.damping_a().unwrap() - 3.0).abs() < 1e-13);
    }

    #[test]
    fn zero_forcing_mean_on_cubic_is_degenerate() {
        let f = vec![
            FourierCoeff::new(vec![1], 0.5, 0.0),
            FourierCoeff::new(vec![-1], 0.5, 0.0),
        ];
        let err =
            ModelSpec::dissipative(1, vec![0.0, 0.0, 0.0, 1.0], None, f, Tolerances::default())
                .unwrap_err();
        assert!(matches!(err, ModelError::Degenerate { .. }), "{err:?}");
    }

    #[test]
    fn non_real_forcing_is_rejected() {
        let f = vec![FourierCoeff::new(vec![1, 1], 0.5, 0.0)];
        assert!(ModelSpec::maximal_torus(f).is_err());
    }
}

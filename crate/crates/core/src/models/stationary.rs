use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use super::forcing::lower_polys;
use super::{LowerForcing, ModelError, Tolerances};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Extremum {
    Minimum,
    Maximum,
    Saddle,
}

/// Local data of `f₀(β) = ⟨f(·, β)⟩` at `β₀`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StationaryReport {
    pub gradient: Vec<f64>,
    pub gradient_norm: f64,
    /// `H = ∂²_β f₀(β₀)`.
    pub hessian: Vec<Vec<f64>>,
    /// Eigenvalues of `H`, ascending.
    pub hessian_eigenvalues: Vec<f64>,
    /// `a_i`: eigenvalues of `−H`, ascending.
    pub a: Vec<f64>,
    pub extremum: Extremum,
    /// Type of the torus for `ε > 0` (`β̈ ≈ −εH(β − β₀)`).
    pub positive_eps: &'static str,
    pub negative_eps: &'static str,
}

/// Gradient and Hessian of the `α`-average of the perturbation at `β₀`.
///
/// Fails with [`ModelError::NotStationary`] when the gradient exceeds
/// `tol.stationary`.
pub fn stationary_point_check(
    forcing: &LowerForcing,
    beta0: &[f64],
    tol: &Tolerances,
) -> Result<StationaryReport, ModelError> {
    let s = beta0.len();
    let polys = lower_polys(forcing, s, beta0, 2)?;
    let p0 = polys.iter().find(|(nu, _)| nu.is_zero()).map(|(_, p)| p);
    let coeff = |m: Vec<u32>| -> f64 {
        p0.and_then(|p| p.coeff(&m).map(|v| v[0].re))
            .unwrap_or(0.0)
    };
    let unit = |j: usize, e: u32| {
        let mut m = vec![0u32; s];
        m[j] += e;
        m
    };
    let gradient: Vec<f64> = (0..s).map(|j| coeff(unit(j, 1))).collect();
    let gradient_norm = gradient.iter().map(|g| g * g).sum::<f64>().sqrt();
    if gradient_norm > tol.stationary {
        return Err(ModelError::NotStationary { gradient_norm });
    }
    let h = DMatrix::from_fn(s, s, |a, b| {
        if a == b {
            2.0 * coeff(unit(a, 2))
        } else {
            let mut m = unit(a, 1);
            m[b] += 1;
            coeff(m)
        }
    });
    let mut eig: Vec<f64> = SymmetricEigen::new(h.clone()).eigenvalues.iter().copied().collect();
    eig.sort_by(|x, y| x.total_cmp(y));
    let mut a: Vec<f64> = eig.iter().map(|x| -x).collect();
    a.sort_by(|x, y| x.total_cmp(y));
    let extremum = if eig.iter().all(|&x| x > 0.0) {
        Extremum::Minimum
    } else if eig.iter().all(|&x| x < 0.0) {
        Extremum::Maximum
    } else {
        Extremum::Saddle
    };
    let (positive_eps, negative_eps) = match extremum {
        Extremum::Minimum => ("elliptic", "hyperbolic"),
        Extremum::Maximum => ("hyperbolic", "elliptic"),
        Extremum::Saddle => ("mixed", "mixed"),
    };
    Ok(StationaryReport {
        gradient,
        gradient_norm,
        hessian: (0..s).map(|r| (0..s).map(|c| h[(r, c)]).collect()).collect(),
        hessian_eigenvalues: eig,
        a,
        extremum,
        positive_eps,
        negative_eps,
    })
}

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use super::{ModelError, ModelKind, ModelSpec};
use crate::diophantine::{DiophantineStamp, RotationVector};
use crate::series::{ft_compose_analytic, ft_compose_magnitudes, FTSeries, Mode};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolveOptions {
    /// Radius of the rational-independence search; defaults to
    /// `max(K·N_f, 128)` where `N_f` is the forcing radius.
    pub nu_max: Option<u32>,
    /// Diophantine exponent for the stamp; defaults to the vector's own.
    pub tau: Option<f64>,
}

/// `[F]^{(k)}_0` after the solve, one entry per order `k = 0..=K`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompatibilityEntry {
    pub order: usize,
    /// `(re, im)` per component.
    pub value: Vec<[f64; 2]>,
    /// Sum of the moduli of the terms making up each component.
    pub scale: Vec<f64>,
    pub relative: Vec<f64>,
    /// `true` where the component was forced to zero by a zero-mode
    /// correction, `false` where it vanishes by cancellation.
    pub imposed: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompatibilityReport {
    pub entries: Vec<CompatibilityEntry>,
    pub worst_relative: f64,
    pub worst_order: usize,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveReport {
    #[serde(skip)]
    pub series: FTSeries,
    pub model: ModelKind,
    pub order: usize,
    /// `min |δ₀(ω·ν)|` over the momenta divided at each order `1..=K`.
    pub min_divisor: Vec<f64>,
    /// `u^{(k)}_0` for `k = 1..=K` when zero modes are solved for.
    pub zero_mode_corrections: Vec<Vec<[f64; 2]>>,
    /// Relative hermitian defect of each order before symmetrisation.
    pub hermitian_defect: Vec<f64>,
    pub order_norms: Vec<f64>,
    pub compatibility: CompatibilityReport,
    pub stamp: DiophantineStamp,
}

fn pair(z: &C64) -> [f64; 2] {
    [z.re, z.im]
}

fn apply(g: &DMatrix<f64>, v: &[C64]) -> Vec<C64> {
    (0..g.nrows())
        .map(|r| (0..g.ncols()).map(|c| v[c] * g[(r, c)]).sum())
        .collect()
}

fn check_omega(spec: &ModelSpec, omega: &RotationVector) -> Result<(), ModelError> {
    let sm = spec.kind() == ModelKind::StandardMap;
    if sm != omega.is_mod_one() {
        return Err(ModelError::InvalidSpec(if sm {
            "the standard map needs a rotation number, not a flow vector".into()
        } else {
            "flow models need a frequency vector, not a rotation number".into()
        }));
    }
    if omega.dim() != spec.dim_d() {
        return Err(ModelError::InvalidSpec(format!(
            "ω has {} components, the model has {} frequencies",
            omega.dim(),
            spec.dim_d()
        )));
    }
    Ok(())
}

pub fn solve_lindstedt(
    spec: &ModelSpec,
    omega: &RotationVector,
    order: usize,
) -> Result<SolveReport, ModelError> {
    solve_lindstedt_with(spec, omega, order, &SolveOptions::default())
}

/// Coefficients `u^{(k)}_ν`, `k = 1..=K`, order by order:
///
/// `δ₀(ω·ν) u^{(k)}_ν = [F]^{(k−1)}_ν − Σ_{p≥1} δ_p(ω·ν) u^{(k−p)}_ν` for
/// `ν ≠ 0`, then `u^{(k)}_0 = G [F]^{(k)}_0|_{u^{(k)}_0 = 0}` where the model
/// has a zero-mode propagator, and `u^{(k)}_0 = 0` otherwise.
pub fn solve_lindstedt_with(
    spec: &ModelSpec,
    omega: &RotationVector,
    order: usize,
    opts: &SolveOptions,
) -> Result<SolveReport, ModelError> {
    if order == 0 {
        return Err(ModelError::InvalidSpec("order K must be at least 1".into()));
    }
    check_omega(spec, omega)?;
    let stamp = match (omega.stamp(), opts.nu_max, opts.tau) {
        (Some(s), None, None) => s.clone(),
        _ => {
            let radius = opts
                .nu_max
                .unwrap_or_else(|| (order as u32 * spec.mode_radius()).max(128));
            omega
                .clone()
                .verified(opts.tau, radius)?
                .stamp()
                .cloned()
                .expect("stamp attached")
        }
    };
    let tol = spec.tolerances();
    let forcing = spec.forcing_modes(order)?;
    forcing.check_hermitian(tol.hermitian)?;
    let d = spec.dim_d();
    let n = spec.dim_n();
    let zero_mode = Mode::zero(d);
    let g = spec.g_matrix();

    let mut u = FTSeries::zero(d, n, order);
    if let Some(c0) = spec.c0() {
        u.set(0, zero_mode.clone(), vec![C64::new(c0, 0.0)])?;
    }
    let mut min_divisor = Vec::with_capacity(order);
    let mut corrections = Vec::new();
    let mut hermitian_defect = Vec::with_capacity(order);

    for k in 1..=order {
        let fk = ft_compose_analytic(&forcing, &u.truncated(k - 1))?;
        let mut modes: BTreeSet<Mode> = fk
            .order(k - 1)
            .map(|(nu, _)| nu.clone())
            .filter(|nu| !nu.is_zero())
            .collect();
        for p in 1..=spec.k0().min(k - 1) {
            modes.extend(u.order(k - p).map(|(nu, _)| nu.clone()).filter(|nu| !nu.is_zero()));
        }
        let mut smallest = f64::INFINITY;
        for nu in modes {
            if omega.divisor(&nu) <= 8.0 * f64::EPSILON * omega.divisor_scale(&nu) {
                return Err(ModelError::ZeroDivisor { order: k, nu });
            }
            let x = omega.dot(&nu);
            let d0 = spec.delta(0, x);
            if d0.norm() == 0.0 {
                return Err(ModelError::ZeroDivisor { order: k, nu });
            }
            smallest = smallest.min(d0.norm());
            let mut rhs = fk.coeff_or_zero(k - 1, &nu);
            for p in 1..=spec.k0().min(k - 1) {
                let dp = spec.delta(p, x);
                for (r, c) in rhs.iter_mut().zip(u.coeff_or_zero(k - p, &nu)) {
                    *r -= dp * c;
                }
            }
            u.set(k, nu, rhs.iter().map(|r| r / d0).collect())?;
        }
        min_divisor.push(smallest);

        if let Some(g) = &g {
            let full = ft_compose_analytic(&forcing, &u.truncated(k))?;
            let phi = full.coeff_or_zero(k, &zero_mode);
            let corr = apply(g, &phi);
            corrections.push(corr.iter().map(pair).collect());
            u.set(k, zero_mode.clone(), corr)?;
        }

        let defect = u.hermitian_defect(k);
        if defect > tol.hermitian {
            return Err(ModelError::NotHermitian { order: k, defect });
        }
        hermitian_defect.push(defect);
        u.symmetrize(k);
    }

    let compatibility = compatibility_report(spec, &u)?;
    if compatibility.worst_relative > tol.compat {
        let e = &compatibility.entries[compatibility.worst_order];
        let component = (0..n)
            .max_by(|&a, &b| e.relative[a].total_cmp(&e.relative[b]))
            .unwrap_or(0);
        return Err(ModelError::Compatibility {
            order: e.order,
            component,
            relative: compatibility.worst_relative,
        });
    }
    let order_norms = crate::series::ft_order_norms(&u);
    Ok(SolveReport {
        series: u,
        model: spec.kind(),
        order,
        min_divisor,
        zero_mode_corrections: corrections,
        hermitian_defect,
        order_norms,
        compatibility,
        stamp,
    })
}

/// `[F(u)]^{(k)}_0` for `k = 0..=K`, each component measured against the
/// sum of the moduli of its contributions.
pub fn compatibility_report(
    spec: &ModelSpec,
    series: &FTSeries,
) -> Result<CompatibilityReport, ModelError> {
    let kmax = series.max_order();
    let forcing = spec.forcing_modes(kmax)?;
    let values = ft_compose_analytic(&forcing, series)?;
    let scales = ft_compose_magnitudes(&forcing, series)?;
    let n = spec.dim_n();
    let zero = Mode::zero(spec.dim_d());
    let imposed: Vec<bool> = match spec.kind() {
        ModelKind::MaximalTorus | ModelKind::StandardMap => vec![false; n],
        ModelKind::LowerTori => {
            let (r, _) = spec.lower_dims().expect("lower tori");
            (0..n).map(|j| j >= r).collect()
        }
        ModelKind::Dissipative => vec![true],
    };
    let mut entries = Vec::with_capacity(kmax + 1);
    let mut worst = 0.0_f64;
    let mut worst_order = 0;
    for k in 0..=kmax {
        let v = values.coeff_or_zero(k, &zero);
        let s: Vec<f64> = scales.coeff_or_zero(k, &zero).iter().map(|z| z.re).collect();
        let rel: Vec<f64> = v
            .iter()
            .zip(&s)
            .map(|(z, &sc)| {
                if z.norm() == 0.0 {
                    0.0
                } else if sc == 0.0 {
                    f64::INFINITY
                } else {
                    z.norm() / sc
                }
            })
            .collect();
        let here = rel.iter().copied().fold(0.0, f64::max);
        if here > worst {
            worst = here;
            worst_order = k;
        }
        entries.push(CompatibilityEntry {
            order: k,
            value: v.iter().map(pair).collect(),
            scale: s,
            relative: rel,
            imposed: imposed.clone(),
        });
    }
    Ok(CompatibilityReport {
        entries,
        worst_relative: worst,
        worst_order,
        tolerance: spec.tolerances().compat,
    })
}

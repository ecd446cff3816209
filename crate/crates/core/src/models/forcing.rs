//! Taylor-Fourier data of the right-hand sides and their pointwise values.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::{LowerForcing, ModelData, ModelError, ModelSpec};
use crate::numeric::Compensated;
use crate::series::{ForcingModes, Mode, MultiPoly};

fn i() -> C64 {
    C64::new(0.0, 1.0)
}

fn phase(nu: &Mode, alpha: &[C64]) -> C64 {
    let mut arg = C64::new(0.0, 0.0);
    for (&n, a) in nu.0.iter().zip(alpha) {
        arg += a * n as f64;
    }
    (i() * arg).exp()
}

/// Polynomials `P_ν(z) = f_ν(β₀ + z)` exact through `degree`.
pub(crate) fn lower_polys(
    forcing: &LowerForcing,
    s: usize,
    beta0: &[f64],
    degree: usize,
) -> Result<Vec<(Mode, MultiPoly)>, ModelError> {
    match forcing {
        LowerForcing::Taylor { degree: have, modes } => {
            if *have < degree {
                return Err(ModelError::Series(crate::series::SeriesError::TaylorDataExhausted {
                    required: degree,
                    available: *have,
                }));
            }
            Ok(modes
                .iter()
                .map(|(nu, p)| (nu.clone(), p.truncated(degree)))
                .collect())
        }
        LowerForcing::Trig(terms) => {
            let mut out: Vec<(Mode, MultiPoly)> = Vec::new();
            for (nu, mu, c) in terms {
                let kappa: Vec<C64> = mu.0.iter().map(|&m| i() * m as f64).collect();
                let shift = phase(mu, &beta0.iter().map(|&b| C64::new(b, 0.0)).collect::<Vec<_>>());
                let p = MultiPoly::exp_linear(&kappa, degree).scale(c * shift);
                match out.iter_mut().find(|(m, _)| m == nu) {
                    Some((_, q)) => *q = q.add(&p),
                    None => out.push((nu.clone(), p)),
                }
            }
            debug_assert!(out.iter().all(|(_, p)| p.nvars() == s));
            Ok(out)
        }
    }
}

pub(crate) fn forcing_modes(spec: &ModelSpec, degree: usize) -> Result<ForcingModes, ModelError> {
    let d = spec.dim_d;
    let n = spec.dim_n;
    let a0 = &spec.alpha0;
    let a0c: Vec<C64> = a0.iter().map(|&x| C64::new(x, 0.0)).collect();
    match &spec.data {
        ModelData::Maximal { f } => {
            let terms = f.iter().map(|c| {
                let kappa: Vec<C64> = c.nu.0.iter().map(|&m| i() * m as f64).collect();
                let w = c.value * phase(&c.nu, &a0c);
                let v: Vec<C64> = c.nu.0.iter().map(|&m| -i() * m as f64 * w).collect();
                (c.nu.clone(), MultiPoly::exp_linear(&kappa, degree).scale_vec(&v))
            });
            Ok(ForcingModes::new(d, n, degree, terms))
        }
        ModelData::StandardMap { f } => {
            let terms = f.iter().map(|c| {
                let kappa = [i() * c.nu.0[0] as f64];
                let w = c.value * phase(&c.nu, &a0c);
                (c.nu.clone(), MultiPoly::exp_linear(&kappa, degree).scale(w))
            });
            Ok(ForcingModes::new(d, n, degree, terms))
        }
        ModelData::Lower {
            r,
            s,
            beta0,
            forcing,
            ..
        } => {
            let polys = lower_polys(forcing, *s, beta0, degree + 1)?;
            let mut terms = Vec::with_capacity(polys.len());
            for (nu, p) in polys {
                let mut kappa = vec![C64::new(0.0, 0.0); n];
                for (j, &m) in nu.0.iter().enumerate() {
                    kappa[j] = i() * m as f64;
                }
                let e = MultiPoly::exp_linear(&kappa, degree).scale(phase(&nu, &a0c));
                let pe = p.embed(n, *r);
                let base = e.mul(&pe, degree);
                let mut parts = Vec::with_capacity(n);
                for &m in &nu.0 {
                    parts.push(base.scale(-i() * m as f64));
                }
                for j in 0..*s {
                    let dp = p.derivative(j).embed(n, *r);
                    parts.push(e.mul(&dp, degree).scale(C64::new(-1.0, 0.0)));
                }
                terms.push((nu, MultiPoly::stack(&parts)));
            }
            Ok(ForcingModes::new(d, n, degree, terms))
        }
        ModelData::Dissipative { g_taylor, c0, f, .. } => {
            let shifted = shift_polynomial(g_taylor, *c0);
            let mut terms = Vec::with_capacity(f.len() + 1);
            let mut zero = vec![(vec![0u32], vec![C64::new(-shifted[0], 0.0)])];
            for (s, g) in shifted.iter().enumerate().skip(1) {
                zero.push((vec![s as u32], vec![C64::new(-g, 0.0)]));
            }
            terms.push((Mode::zero(d), MultiPoly::from_terms(1, 1, zero)));
            for c in f {
                terms.push((c.nu.clone(), MultiPoly::constant(1, vec![c.value])));
            }
            Ok(ForcingModes::new(d, n, degree, terms))
        }
    }
}

/// Coefficients of `g(c₀ + y)` in powers of `y`.
pub(crate) fn shift_polynomial(g: &[f64], c0: f64) -> Vec<f64> {
    let deg = g.len() - 1;
    let mut out = vec![0.0; deg + 1];
    for (s, slot) in out.iter_mut().enumerate() {
        let mut acc = Compensated::default();
        let mut binom = 1.0;
        let mut pw = 1.0;
        for (j, &gj) in g.iter().enumerate().skip(s) {
            if j > s {
                binom = binom * j as f64 / (j - s) as f64;
                pw *= c0;
            }
            acc.add(binom * gj * pw);
        }
        *slot = acc.value();
    }
    out
}

fn eval_real_poly(g: &[f64], x: C64) -> C64 {
    g.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * x + c)
}

/// Real root of `g(x) = f₀`; fails unless exactly one real root exists.
pub(crate) fn solve_equilibrium(g: &[f64], f0: f64) -> Result<f64, ModelError> {
    let mut p: Vec<f64> = g.to_vec();
    p[0] -= f0;
    while p.len() > 1 && *p.last().unwrap() == 0.0 {
        p.pop();
    }
    let deg = p.len() - 1;
    if deg == 0 {
        return Err(ModelError::NoEquilibrium { defect: p[0].abs() });
    }
    // Zero roots are split off: a nilpotent companion block stalls the QR
    // iteration.
    let zeros = p.iter().take_while(|&&c| c == 0.0).count();
    let mut roots: Vec<f64> = if zeros > 0 { vec![0.0] } else { Vec::new() };
    let p: Vec<f64> = p[zeros..].to_vec();
    let deg = deg - zeros;
    let lead = p[deg];
    let companion = DMatrix::from_fn(deg, deg, |r, c| {
        if r == 0 {
            -p[deg - 1 - c] / lead
        } else if r == c + 1 {
            1.0
        } else {
            0.0
        }
    });
    let eig = if deg == 0 {
        Vec::new()
    } else {
        companion
            .try_schur(f64::EPSILON, 10_000)
            .ok_or_else(|| ModelError::InvalidSpec("equilibrium root finder did not converge".into()))?
            .complex_eigenvalues()
            .iter()
            .copied()
            .collect()
    };
    for z in eig.iter() {
        if z.im.abs() > 1e-6 * (1.0 + z.re.abs()) {
            continue;
        }
        let mut x = z.re;
        for _ in 0..50 {
            let v = eval_real_poly(&p, C64::new(x, 0.0)).re;
            let dv: f64 = p
                .iter()
                .enumerate()
                .skip(1)
                .map(|(j, &c)| j as f64 * c * x.powi(j as i32 - 1))
                .sum();
            if dv == 0.0 {
                break;
            }
            let step = v / dv;
            x -= step;
            if step.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        if !roots.iter().any(|r| (r - x).abs() <= 1e-6 * (1.0 + x.abs())) {
            roots.push(x);
        }
    }
    match roots.len() {
        0 => Err(ModelError::NoEquilibrium {
            defect: f64::INFINITY,
        }),
        1 => Ok(roots[0]),
        _ => Err(ModelError::InvalidSpec(format!(
            "g(x) = f₀ has {} real solutions {:?}; set c0 explicitly",
            roots.len(),
            roots
        ))),
    }
}

pub(crate) fn eval_rhs(spec: &ModelSpec, u: &[C64], psi: &[f64]) -> Vec<C64> {
    let n = spec.dim_n;
    let d = spec.dim_d;
    let zero = C64::new(0.0, 0.0);
    match &spec.data {
        ModelData::Maximal { f } => {
            let alpha: Vec<C64> = (0..d).map(|j| spec.alpha0[j] + psi[j] + u[j]).collect();
            let mut out = vec![zero; n];
            for c in f {
                let e = c.value * phase(&c.nu, &alpha);
                for (o, &m) in out.iter_mut().zip(&c.nu.0) {
                    *o += -i() * m as f64 * e;
                }
            }
            out
        }
        ModelData::StandardMap { f } => {
            let x = [spec.alpha0[0] + psi[0] + u[0]];
            vec![f.iter().map(|c| c.value * phase(&c.nu, &x)).sum()]
        }
        ModelData::Lower {
            r,
            s,
            beta0,
            forcing,
            ..
        } => {
            let alpha: Vec<C64> = (0..*r).map(|j| spec.alpha0[j] + psi[j] + u[j]).collect();
            let z = &u[*r..];
            let mut out = vec![zero; n];
            match forcing {
                LowerForcing::Trig(terms) => {
                    let beta: Vec<C64> = (0..*s).map(|j| beta0[j] + z[j]).collect();
                    for (nu, mu, c) in terms {
                        let e = c * phase(nu, &alpha) * phase(mu, &beta);
                        for j in 0..*r {
                            out[j] += -i() * nu.0[j] as f64 * e;
                        }
                        for j in 0..*s {
                            out[r + j] += -i() * mu.0[j] as f64 * e;
                        }
                    }
                }
                LowerForcing::Taylor { modes, .. } => {
                    for (nu, p) in modes {
                        let e = phase(nu, &alpha);
                        let pv = p.eval(z)[0] * e;
                        for j in 0..*r {
                            out[j] += -i() * nu.0[j] as f64 * pv;
                        }
                        for j in 0..*s {
                            out[r + j] += -(p.derivative(j).eval(z)[0] * e);
                        }
                    }
                }
            }
            out
        }
        ModelData::Dissipative { g_taylor, f, .. } => {
            let psi_c: Vec<C64> = psi.iter().map(|&x| C64::new(x, 0.0)).collect();
            let forcing: C64 = f.iter().map(|c| c.value * phase(&c.nu, &psi_c)).sum();
            vec![forcing - eval_real_poly(g_taylor, u[0])]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shifted_cubic() {
        // (1 + y)^3 = 1 + 3y + 3y² + y³
        assert_eq!(shift_polynomial(&[0.0, 0.0, 0.0, 1.0], 1.0), vec![1.0, 3.0, 3.0, 1.0]);
        let s = shift_polynomial(&[2.0, -1.0, 0.5], -3.0);
        // g(−3 + y) = 2 + 3 − y + 0.5(9 − 6y + y²)
        assert_eq!(s, vec![9.5, -4.0, 0.5]);
    }

    #[test]
    fn equilibrium_of_cubic() {
        assert!((solve_equilibrium(&[0.0, 0.0, 0.0, 1.0], 8.0).unwrap() - 2.0).abs() < 1e-14);
        assert!(solve_equilibrium(&[0.0, -1.0, 0.0, 1.0], 0.0).is_err());
        assert!(solve_equilibrium(&[1.0, 0.0, 1.0], 0.0).is_err());
    }
}

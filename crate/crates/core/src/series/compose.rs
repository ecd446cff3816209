use std::collections::BTreeMap;

use num_complex::Complex64 as C64;

use super::poly::{MultiIndex, MultiPoly};
use super::{ft_mul, FTSeries, Mode, SeriesError};
use crate::numeric::CompensatedC;

/// One Fourier mode of the right-hand side: `F(u₀ + y, ψ) ∋ e^{iν₀·ψ} P(y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ForcingTerm {
    pub mode: Mode,
    pub poly: MultiPoly,
}

/// Right-hand side as a finite list of Fourier modes, each carrying the Taylor
/// polynomial of its coefficient around the unperturbed solution.
///
/// The polynomials are exact through `valid_degree`; a composition of a
/// series truncated at order `K` needs `valid_degree ≥ K`.
#[derive(Clone, Debug, PartialEq)]
pub struct ForcingModes {
    dim_d: usize,
    dim_n: usize,
    valid_degree: usize,
    terms: Vec<ForcingTerm>,
}

impl ForcingModes {
    /// Terms sharing a mode are merged; zero polynomials dropped.
    pub fn new(
        dim_d: usize,
        dim_n: usize,
        valid_degree: usize,
        terms: impl IntoIterator<Item = (Mode, MultiPoly)>,
    ) -> Self {
        let mut merged: BTreeMap<Mode, MultiPoly> = BTreeMap::new();
        for (mode, poly) in terms {
            assert_eq!(mode.dim(), dim_d, "mode dimension");
            assert_eq!(poly.dim_out(), dim_n, "polynomial output dimension");
            let poly = poly.truncated(valid_degree);
            let entry = merged
                .entry(mode)
                .or_insert_with(|| MultiPoly::zero(poly.nvars(), dim_n));
            *entry = entry.add(&poly);
        }
        ForcingModes {
            dim_d,
            dim_n,
            valid_degree,
            terms: merged
                .into_iter()
                .filter(|(_, p)| !p.is_zero())
                .map(|(mode, poly)| ForcingTerm { mode, poly })
                .collect(),
        }
    }

    pub fn dim_d(&self) -> usize {
        self.dim_d
    }

    pub fn dim_n(&self) -> usize {
        self.dim_n
    }

    pub fn valid_degree(&self) -> usize {
        self.valid_degree
    }

    pub fn terms(&self) -> &[ForcingTerm] {
        &self.terms
    }

    pub fn term(&self, mode: &Mode) -> Option<&MultiPoly> {
        self.terms
            .binary_search_by(|t| t.mode.cmp(mode))
            .ok()
            .map(|i| &self.terms[i].poly)
    }

    /// Largest `|ν₀|₁` among the modes.
    pub fn mode_radius(&self) -> u32 {
        self.terms.iter().map(|t| t.mode.l1()).max().unwrap_or(0)
    }

    /// Check `P_{−ν₀} = conj(P_{ν₀})` for every mode.
    pub fn check_hermitian(&self, tol: f64) -> Result<(), SeriesError> {
        let scale = self
            .terms
            .iter()
            .flat_map(|t| t.poly.terms().flat_map(|(_, v)| v.iter().map(|z| z.norm())))
            .fold(0.0, f64::max);
        for t in &self.terms {
            let mirror = self
                .term(&t.mode.neg())
                .cloned()
                .unwrap_or_else(|| MultiPoly::zero(t.poly.nvars(), self.dim_n));
            let defect = mirror.max_difference(&t.poly.conj());
            if defect > tol * scale.max(f64::MIN_POSITIVE) {
                return Err(SeriesError::NotHermitian {
                    mode: t.mode.clone(),
                    defect,
                });
            }
        }
        Ok(())
    }
}

/// `[F(u, ψ)]`: substitute the series `u` into the right-hand side.
///
/// Order-0 coefficients of `u` are the expansion point and are ignored; the
/// polynomial of every mode is evaluated on the fluctuation `u − u₀` by
/// building each needed monomial once as a product of component series.
pub fn ft_compose_analytic(f: &ForcingModes, u: &FTSeries) -> Result<FTSeries, SeriesError> {
    compose(f, u, false)
}

/// Same sums as [`ft_compose_analytic`] with every coefficient replaced by
/// its modulus: the result bounds the sum of absolute values of the terms
/// that make up each output coefficient.
pub fn ft_compose_magnitudes(f: &ForcingModes, u: &FTSeries) -> Result<FTSeries, SeriesError> {
    compose(f, u, true)
}

fn compose(f: &ForcingModes, u: &FTSeries, magnitudes: bool) -> Result<FTSeries, SeriesError> {
    if u.dim_d() != f.dim_d || u.dim_n() != f.dim_n {
        return Err(SeriesError::DimensionMismatch(format!(
            "composition of forcing (d={}, n={}) with series (d={}, n={})",
            f.dim_d,
            f.dim_n,
            u.dim_d(),
            u.dim_n()
        )));
    }
    let kmax = u.max_order();
    if f.valid_degree < kmax {
        return Err(SeriesError::TaylorDataExhausted {
            required: kmax,
            available: f.valid_degree,
        });
    }
    let mut y = u.fluctuation();
    if magnitudes {
        y = absolute(&y);
    }
    let comps: Vec<FTSeries> = (0..f.dim_n).map(|j| y.component(j)).collect();
    let mut cache: BTreeMap<MultiIndex, FTSeries> = BTreeMap::new();

    let mut acc: BTreeMap<(usize, Mode), Vec<CompensatedC>> = BTreeMap::new();
    for term in &f.terms {
        for (m, c) in term.poly.terms() {
            let deg: usize = m.iter().map(|&e| e as usize).sum();
            if deg > kmax {
                continue;
            }
            let mono = monomial(m, &comps, &mut cache, u)?;
            for (k, nu, val) in mono.iter() {
                let slot = acc
                    .entry((k, nu.add(&term.mode)))
                    .or_insert_with(|| vec![CompensatedC::default(); f.dim_n]);
                for (j, cj) in c.iter().enumerate() {
                    let cj = if magnitudes {
                        C64::new(cj.norm(), 0.0)
                    } else {
                        *cj
                    };
                    slot[j].add(cj * val[0]);
                }
            }
        }
    }
    let mut out = FTSeries::zero(f.dim_d, f.dim_n, kmax);
    for ((k, nu), v) in acc {
        out.set(k, nu, v.iter().map(|z| z.value()).collect())?;
    }
    Ok(out)
}

fn absolute(s: &FTSeries) -> FTSeries {
    let mut out = FTSeries::zero(s.dim_d(), s.dim_n(), s.max_order());
    for (k, nu, v) in s.iter() {
        // shapes are inherited
        let _ = out.set(k, nu.clone(), v.iter().map(|z| C64::new(z.norm(), 0.0)).collect());
    }
    out
}

fn monomial<'a>(
    m: &MultiIndex,
    comps: &[FTSeries],
    cache: &'a mut BTreeMap<MultiIndex, FTSeries>,
    u: &FTSeries,
) -> Result<&'a FTSeries, SeriesError> {
    if !cache.contains_key(m) {
        let value = build_monomial(m, comps, cache, u)?;
        cache.insert(m.clone(), value);
    }
    Ok(&cache[m])
}

fn build_monomial(
    m: &MultiIndex,
    comps: &[FTSeries],
    cache: &mut BTreeMap<MultiIndex, FTSeries>,
    u: &FTSeries,
) -> Result<FTSeries, SeriesError> {
    let deg: u32 = m.iter().sum();
    if deg == 0 {
        return Ok(FTSeries::one(u.dim_d(), 1, u.max_order()));
    }
    let j = m.iter().position(|&e| e > 0).expect("nonzero degree");
    if deg == 1 {
        return Ok(comps[j].clone());
    }
    let mut prev = m.clone();
    prev[j] -= 1;
    let lower = monomial(&prev, comps, cache, u)?.clone();
    ft_mul(&lower, &comps[j])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn sine_modes_at_zero_fluctuation() {
        let terms = [1, -1].map(|nu0: i32| {
            let coeff = c(0.0, -0.5 * nu0 as f64);
            (
                Mode(vec![nu0]),
                MultiPoly::exp_linear(&[c(0.0, nu0 as f64)], 4).scale(coeff),
            )
        });
        let f = ForcingModes::new(1, 1, 4, terms);
        f.check_hermitian(1e-14).unwrap();
        let out = ft_compose_analytic(&f, &FTSeries::zero(1, 1, 2)).unwrap();
        assert_eq!(out.coeff(0, &Mode(vec![1])).unwrap(), &[c(0.0, -0.5)]);
        assert_eq!(out.coeff(0, &Mode(vec![-1])).unwrap(), &[c(0.0, 0.5)]);
        assert_eq!(out.len(), 2);
    }

    #[test]
    fn linear_forcing_returns_fluctuation() {
        let p = MultiPoly::from_terms(1, 1, vec![(vec![1], vec![c(1.0, 0.0)])]);
        let f = ForcingModes::new(1, 1, 3, vec![(Mode(vec![0]), p)]);
        let mut u = FTSeries::zero(1, 1, 3);
        u.set(1, Mode(vec![1]), vec![c(0.3, 0.1)]).unwrap();
        u.set(3, Mode(vec![-2]), vec![c(-1.0, 2.0)]).unwrap();
        assert_eq!(ft_compose_analytic(&f, &u).unwrap(), u);
    }

    #[test]
    fn exhausted_taylor_data_is_reported() {
        let p = MultiPoly::from_terms(1, 1, vec![(vec![1], vec![c(1.0, 0.0)])]);
        let f = ForcingModes::new(1, 1, 1, vec![(Mode(vec![0]), p)]);
        let u = FTSeries::zero(1, 1, 3);
        assert_eq!(
            ft_compose_analytic(&f, &u),
            Err(SeriesError::TaylorDataExhausted {
                required: 3,
                available: 1
            })
        );
    }

    #[test]
    fn non_hermitian_forcing_is_rejected() {
        let p = MultiPoly::constant(1, vec![c(1.0, 0.0)]);
        let f = ForcingModes::new(1, 1, 0, vec![(Mode(vec![1]), p)]);
        assert!(f.check_hermitian(1e-12).is_err());
    }
}

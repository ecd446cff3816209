//! JSON model documents.
//!
//! ```json
//! {
//!   "model": "maximal_torus",
//!   "omega": {"components": [1.0, "golden"], "nu_max": 200},
//!   "order": 6,
//!   "forcing": [{"nu": [1, 1], "re": 0.5}, {"nu": [-1, -1], "re": 0.5}]
//! }
//! ```
//!
//! Omega components are numbers, `"golden"`, `"silver"`,
//! `{"surd": [a, b, m, c]}` for `(a + b√m)/c`, or
//! `{"cf": {"head": [...], "period": [...]}}`. Lower tori take either trig
//! terms (`"forcing"` entries with `"mu"`) or Taylor data (`"taylor"` entries
//! `{"nu", "m", "re", "im"}` for the coefficient of `z^m` in `f_ν(β₀ + z)`).

use num_complex::Complex64 as C64;
use serde::Deserialize;

use super::{FourierCoeff, LowerForcing, ModelError, ModelKind, ModelSpec, SolveOptions, Tolerances};
use crate::diophantine::{CfSpec, Component, QuadraticSurd, RotationVector};
use crate::series::{Mode, MultiPoly};

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FourierDoc {
    pub nu: Vec<i32>,
    #[serde(default)]
    pub mu: Option<Vec<i32>>,
    #[serde(default)]
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TaylorDoc {
    pub nu: Vec<i32>,
    pub m: Vec<u32>,
    #[serde(default)]
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CfDoc {
    #[serde(default)]
    pub head: Vec<u64>,
    pub period: Vec<u64>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum ComponentDoc {
    Number(f64),
    Named(String),
    Surd { surd: [i64; 4] },
    Cf { cf: CfDoc },
}

impl ComponentDoc {
    pub fn to_component(&self) -> Result<Component, ModelError> {
        Ok(match self {
            ComponentDoc::Number(x) => Component::Float(*x),
            ComponentDoc::Named(name) => match name.as_str() {
                "golden" => Component::Surd(QuadraticSurd::golden()),
                "silver" => Component::Surd(QuadraticSurd::silver()),
                other => {
                    return Err(ModelError::InvalidSpec(format!(
                        "unknown named component {other:?} (expected \"golden\" or \"silver\")"
                    )))
                }
            },
            ComponentDoc::Surd { surd: [a, b, m, c] } => {
                if *m < 0 {
                    return Err(ModelError::InvalidSpec("surd radicand must be nonnegative".into()));
                }
                Component::Surd(QuadraticSurd::new(*a, *b, *m as u64, *c)?)
            }
            ComponentDoc::Cf { cf } => Component::Cf(CfSpec::new(cf.head.clone(), cf.period.clone())?),
        })
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OmegaDoc {
    pub components: Vec<ComponentDoc>,
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default)]
    pub nu_max: Option<u32>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub model: ModelKind,
    pub omega: OmegaDoc,
    #[serde(default)]
    pub order: Option<usize>,
    #[serde(default)]
    pub forcing: Option<Vec<FourierDoc>>,
    #[serde(default)]
    pub taylor: Option<Vec<TaylorDoc>>,
    /// Degree through which the `taylor` data is exact; defaults to the
    /// highest degree present.
    #[serde(default)]
    pub taylor_degree: Option<usize>,
    #[serde(default)]
    pub g_taylor: Option<Vec<f64>>,
    #[serde(default)]
    pub beta0: Option<Vec<f64>>,
    #[serde(default)]
    pub alpha0: Option<Vec<f64>>,
    #[serde(default)]
    pub c0: Option<f64>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn fourier(docs: &[FourierDoc], what: &str) -> Result<Vec<FourierCoeff>, ModelError> {
    if let Some(d) = docs.iter().find(|d| d.mu.is_some()) {
        return Err(ModelError::InvalidSpec(format!(
            "{what}: \"mu\" is only meaningful for lower tori (entry ν = {:?})",
            d.nu
        )));
    }
    Ok(docs
        .iter()
        .map(|d| FourierCoeff::new(d.nu.clone(), d.re, d.im))
        .collect())
}

impl ModelDocument {
    /// The rotation vector, unverified.
    pub fn rotation_vector(&self) -> Result<RotationVector, ModelError> {
        let comps = self
            .omega
            .components
            .iter()
            .map(ComponentDoc::to_component)
            .collect::<Result<Vec<_>, _>>()?;
        if self.model == ModelKind::StandardMap {
            if comps.len() != 1 {
                return Err(ModelError::InvalidSpec(
                    "the standard map takes a single rotation number".into(),
                ));
            }
            Ok(RotationVector::rotation_number(comps[0].clone())?)
        } else {
            Ok(RotationVector::flow(comps)?)
        }
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            nu_max: self.omega.nu_max,
            tau: self.omega.tau,
        }
    }

    pub fn model_spec(&self) -> Result<ModelSpec, ModelError> {
        let d = self.omega.components.len();
        let spec = match self.model {
            ModelKind::MaximalTorus => {
                let f = self.forcing.as_deref().ok_or_else(|| {
                    ModelError::InvalidSpec("maximal torus needs \"forcing\"".into())
                })?;
                ModelSpec::maximal_torus(fourier(f, "maximal torus")?)?
            }
            ModelKind::StandardMap => {
                let f = self
                    .forcing
                    .as_deref()
                    .map(|f| fourier(f, "standard map"))
                    .transpose()?;
                ModelSpec::standard_map(f)?
            }
            ModelKind::LowerTori => {
                let beta0 = self
                    .beta0
                    .clone()
                    .ok_or_else(|| ModelError::InvalidSpec("lower tori need \"beta0\"".into()))?;
                let s = beta0.len();
                let forcing = match (&self.taylor, &self.forcing) {
                    (Some(t), None) => {
                        let mut modes: Vec<(Mode, MultiPoly)> = Vec::new();
                        for e in t {
                            if e.m.len() != s {
                                return Err(ModelError::InvalidSpec(format!(
                                    "taylor entry m = {:?} must have length s = {s}",
                                    e.m
                                )));
                            }
                            let p = MultiPoly::from_terms(s, 1, vec![(e.m.clone(), vec![C64::new(e.re, e.im)])]);
                            match modes.iter_mut().find(|(nu, _)| nu.0 == e.nu) {
                                Some((_, q)) => *q = q.add(&p),
                                None => modes.push((Mode(e.nu.clone()), p)),
                            }
                        }
                        let present = t.iter().map(|e| e.m.iter().sum::<u32>() as usize).max().unwrap_or(0);
                        LowerForcing::Taylor {
                            degree: self.taylor_degree.unwrap_or(present),
                            modes,
                        }
                    }
                    (None, Some(f)) => {
                        let mut terms = Vec::with_capacity(f.len());
                        for e in f {
                            let mu = e.mu.clone().ok_or_else(|| {
                                ModelError::InvalidSpec(format!(
                                    "lower-tori forcing entry ν = {:?} needs \"mu\"",
                                    e.nu
                                ))
                            })?;
                            terms.push((Mode(e.nu.clone()), Mode(mu), C64::new(e.re, e.im)));
                        }
                        LowerForcing::Trig(terms)
                    }
                    _ => {
                        return Err(ModelError::InvalidSpec(
                            "lower tori need exactly one of \"forcing\" (with \"mu\") and \"taylor\"".into(),
                        ))
                    }
                };
                ModelSpec::lower_tori(d, s, beta0, forcing, self.tolerances)?
            }
            ModelKind::Dissipative => {
                let f = self.forcing.as_deref().ok_or_else(|| {
                    ModelError::InvalidSpec("dissipative model needs \"forcing\"".into())
                })?;
                let g = self.g_taylor.clone().ok_or_else(|| {
                    ModelError::InvalidSpec("dissipative model needs \"g_taylor\"".into())
                })?;
                ModelSpec::dissipative(d, g, self.c0, fourier(f, "dissipative")?, self.tolerances)?
            }
        };
        let spec = spec.with_tolerances(self.tolerances);
        match &self.alpha0 {
            Some(a) => spec.with_alpha0(a.clone()),
            None => Ok(spec),
        }
    }
}

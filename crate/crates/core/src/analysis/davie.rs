use serde::Serialize;

use super::growth::{radius_estimate, RadiusEstimate};
use super::AnalysisError;
use crate::diophantine::{bryuno_function, Component, DiophantineStamp, RotationVector};
use crate::models::{solve_lindstedt, ModelSpec};
use crate::parallel;

/// Bryuno sums are taken to this depth.
const BRYUNO_DEPTH: usize = 100;

/// Pairs whose Bryuno values differ by at least this factor must be ranked.
pub const SEPARATION: f64 = 1.5;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DavieEntry {
    pub label: String,
    pub alpha: f64,
    pub bryuno: f64,
    pub bryuno_converged: bool,
    pub radius: RadiusEstimate,
    pub stamp: DiophantineStamp,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DavieReport {
    pub order: usize,
    pub entries: Vec<DavieEntry>,
    /// Index pairs `(i, j)` with `B_j ≥ 1.5 B_i`.
    pub separated_pairs: Vec<[usize; 2]>,
    /// Separated pairs where `ρ_i > ρ_j` fails.
    pub violations: Vec<[usize; 2]>,
    /// No separated pair, or a radius missing.
    pub inconclusive: bool,
    pub consistent: bool,
}

/// Standard-map radius estimates at order `K` against the Bryuno function:
/// for well-separated `B` the radius ranking must be the reverse of the `B`
/// ranking. Ordinal only.
pub fn davie_compare(alphas: &[(String, Component)], order: usize) -> Result<DavieReport, AnalysisError> {
    if alphas.is_empty() {
        return Err(AnalysisError::InvalidInput("no rotation numbers given".into()));
    }
    let spec = ModelSpec::standard_map(None)?;
    let entries = parallel::map(alphas, |(label, c)| -> Result<DavieEntry, AnalysisError> {
        let w = RotationVector::rotation_number(c.clone())?;
        let rep = solve_lindstedt(&spec, &w, order)?;
        let b = bryuno_function(c, BRYUNO_DEPTH)?;
        Ok(DavieEntry {
            label: label.clone(),
            alpha: c.value(),
            bryuno: b.value,
            bryuno_converged: b.converged,
            radius: radius_estimate(&rep.order_norms)?,
            stamp: rep.stamp,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;

    let mut separated = Vec::new();
    let mut violations = Vec::new();
    let mut missing = false;
    for i in 0..entries.len() {
        for j in 0..entries.len() {
            if i == j || entries[j].bryuno < SEPARATION * entries[i].bryuno {
                continue;
            }
            separated.push([i, j]);
            match (entries[i].radius.rho, entries[j].radius.rho) {
                (Some(ri), Some(rj)) => {
                    if ri <= rj {
                        violations.push([i, j]);
                    }
                }
                _ => missing = true,
            }
        }
    }
    let inconclusive = missing || (separated.is_empty() && entries.len() > 1);
    Ok(DavieReport {
        order,
        consistent: violations.is_empty() && !missing,
        inconclusive,
        separated_pairs: separated,
        violations,
        entries,
    })
}

//! Convergence, summability, excluded-measure and direct-integration checks
//! layered on the solver output.

mod davie;
mod growth;
mod measure;
mod ode;

use thiserror::Error;

use crate::diophantine::DiophantineError;
use crate::models::ModelError;

pub use davie::{davie_compare, DavieEntry, DavieReport};
pub use growth::{
    borel_transform, classify_growth, radius_estimate, BorelReport, BorelSignature, Growth,
    GrowthTest, RadiusEstimate,
};
pub use measure::{melnikov_measure, MeasureOptions, MeasureReport, NuContribution};
pub use ode::{
    attractivity_check, integrate_ode, relaxation_check, response_solution, AttractivityReport,
    OdeOptions, RelaxationReport, Response, Trajectory, Verdict,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("too few orders: {have} usable, at least {need} needed")]
    TooFewOrders { have: usize, need: usize },
    #[error("integration unstable even after halving the step to h = {h:e}")]
    StepInstability { h: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Diophantine(#[from] DiophantineError),
}

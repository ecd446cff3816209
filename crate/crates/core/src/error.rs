use thiserror::Error;

use crate::analysis::AnalysisError;
use crate::diophantine::DiophantineError;
use crate::models::ModelError;
use crate::series::SeriesError;
use crate::trees::TreeError;

/// Umbrella error for callers that mix modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Diophantine(#[from] DiophantineError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

use std::fmt;
use std::path::Path;

use lindstedt::analysis::AnalysisError;
use lindstedt::diophantine::DiophantineError;
use lindstedt::models::ModelError;
use lindstedt::series::SeriesError;
use lindstedt::trees::TreeError;

/// Exit 1: the mathematics failed a contract. Exit 2: the input was unusable.
#[derive(Debug)]
pub enum CliError {
    Contract(String),
    Input(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Contract(_) => 1,
            CliError::Input(_) => 2,
        }
    }

    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    pub fn json(path: &Path, e: &serde_json::Error) -> Self {
        CliError::Input(format!(
            "{}:{}:{}: {}",
            path.display(),
            e.line(),
            e.column(),
            e
        ))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Contract(m) => write!(f, "contract violated: {m}"),
            CliError::Input(m) => write!(f, "input error: {m}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<DiophantineError> for CliError {
    fn from(e: DiophantineError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<SeriesError> for CliError {
    fn from(e: SeriesError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Compatibility { .. } | ModelError::NotHermitian { .. } => {
                CliError::Contract(e.to_string())
            }
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<TreeError> for CliError {
    fn from(e: TreeError) -> Self {
        match e {
            TreeError::Model(m) => m.into(),
            TreeError::Series(s) => s.into(),
            TreeError::Mismatch { .. } | TreeError::SiegelBryuno { .. } | TreeError::ZeroDenominator { .. } => {
                CliError::Contract(e.to_string())
            }
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Model(m) => m.into(),
            AnalysisError::Diophantine(d) => d.into(),
            AnalysisError::StepInstability { .. } => CliError::Contract(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

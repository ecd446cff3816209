use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use lindstedt::diophantine::DiophantineStamp;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// `{γ, τ, ν_max}` of the Diophantine estimate a result depends on.
#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub gamma: f64,
    pub tau: f64,
    pub nu_max: u32,
}

impl From<&DiophantineStamp> for Provenance {
    fn from(s: &DiophantineStamp) -> Self {
        Provenance {
            gamma: s.gamma,
            tau: s.tau,
            nu_max: s.nu_max,
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a, R: Serialize> {
    command: &'a str,
    config_hash: &'a str,
    config: &'a Value,
    provenance: &'a [Provenance],
    passed: bool,
    report: &'a R,
}

/// SHA-256 over the canonical config (keys sorted) followed by the raw
/// bytes of the model document, if any.
pub fn config_hash(config: &Value, spec_bytes: Option<&[u8]>) -> String {
    let mut h = Sha256::new();
    h.update(config.to_string().as_bytes());
    if let Some(b) = spec_bytes {
        h.update([0u8]);
        h.update(b);
    }
    let mut out = String::with_capacity(64);
    for byte in h.finalize() {
        let _ = write!(out, "{byte:02x}");
    }
    out
}

pub struct Outputs {
    dir: PathBuf,
    pub written: Vec<PathBuf>,
}

impl Outputs {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::input(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, body)
            .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))?;
        self.written.push(path);
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    pub fn report<R: Serialize>(
        &mut self,
        name: &str,
        command: &str,
        config: &Value,
        hash: &str,
        provenance: &[Provenance],
        passed: bool,
        report: &R,
    ) -> Result<(), CliError> {
        let env = Envelope {
            command,
            config_hash: hash,
            config,
            provenance,
            passed,
            report,
        };
        let mut body = serde_json::to_string_pretty(&env)
            .map_err(|e| CliError::input(format!("cannot serialise {name}: {e}")))?;
        body.push('\n');
        self.text(name, &body)
    }

    /// Two-column gnuplot data.
    pub fn plot(&mut self, name: &str, header: &str, rows: impl IntoIterator<Item = (f64, f64)>) -> Result<(), CliError> {
        let mut body = format!("# {header}\n");
        for (x, y) in rows {
            let _ = writeln!(body, "{:e} {:e}", x + 0.0, y + 0.0);
        }
        self.text(name, &body)
    }
}

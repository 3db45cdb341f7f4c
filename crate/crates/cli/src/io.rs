//! Signal files and CSV traces.

use std::fmt::Write as _;
use std::path::Path;

use manifold_deconv::{ManifoldKind, Signal};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Stage};

/// On-disk form of a signal: manifold tag, grid shape and the flat
/// row-major coordinate payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalFile {
    pub manifold: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
    /// Jump positions of a generated 1D phantom.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jumps: Option<Vec<usize>>,
}

impl SignalFile {
    pub fn from_signal(s: &Signal) -> Self {
        Self {
            manifold: s.kind().to_string(),
            shape: s.shape().to_vec(),
            data: s.to_flat(),
            jumps: None,
        }
    }

    /// `"Rn"` is accepted for Euclidean data; the dimension then comes from
    /// the payload length.
    pub fn kind(&self) -> Result<ManifoldKind, manifold_deconv::Error> {
        if self.manifold == "Rn" {
            let n: usize = self.shape.iter().product();
            if n == 0 || !self.data.len().is_multiple_of(n) || self.data.is_empty() {
                return Err(manifold_deconv::Error::ShapeMismatch(format!(
                    "{} reals do not split over shape {:?}",
                    self.data.len(),
                    self.shape
                )));
            }
            return Ok(ManifoldKind::Euclidean(self.data.len() / n));
        }
        self.manifold.parse()
    }

    pub fn to_signal(&self) -> Result<Signal, manifold_deconv::Error> {
        Signal::from_flat(self.kind()?, &self.shape, &self.data)
    }
}

pub fn read_signal(path: &Path, stage: Stage) -> Result<Signal, CliError> {
    read_signal_file(path, stage)?
        .to_signal()
        .map_err(|e| CliError::io(stage, path, e))
}

pub fn read_signal_file(path: &Path, stage: Stage) -> Result<SignalFile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(stage, path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::io(stage, path, e))
}

pub fn write_signal(path: &Path, file: &SignalFile, stage: Stage) -> Result<(), CliError> {
    let mut text = serde_json::to_string(file).map_err(|e| CliError::io(stage, path, e))?;
    text.push('\n');
    write_bytes(path, text.as_bytes(), stage)
}

pub fn write_bytes(path: &Path, bytes: &[u8], stage: Stage) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(stage, dir, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| CliError::io(stage, path, e))
}

/// `iteration,value` lines, iterations counted from 1.
pub fn trace_csv(trace: &[f64]) -> String {
    let mut out = String::from("iteration,value\n");
    for (k, v) in trace.iter().enumerate() {
        let _ = writeln!(out, "{},{v}", k + 1);
    }
    out
}

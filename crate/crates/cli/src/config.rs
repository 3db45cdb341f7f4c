//! Pipeline configuration: one JSON document, optionally patched with
//! `dotted.key=value` overrides.

use std::path::{Path, PathBuf};

use manifold_deconv::operator::KernelSpec;
use manifold_deconv::regularizers::RegularizerSpec;
use manifold_deconv::sim::{NoiseSpec, PhantomSpec};
use manifold_deconv::solvers::SolverSpec;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, Stage};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IoPaths {
    pub ground: Option<PathBuf>,
    pub degraded: Option<PathBuf>,
    pub result: Option<PathBuf>,
    pub trace: Option<PathBuf>,
    pub image: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub bench: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub phantom: PhantomSpec,
    pub kernel: KernelSpec,
    pub noise: NoiseSpec,
    pub regularizer: RegularizerSpec,
    pub solver: SolverSpec,
    /// Data exponent; when present it replaces `solver.p`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default)]
    pub io: IoPaths,
}

impl PipelineConfig {
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(Stage::Config, path, e))?;
        Self::parse(&text, overrides)
    }

    pub fn parse(text: &str, overrides: &[String]) -> Result<Self, CliError> {
        let mut doc: Value = serde_json::from_str(text).map_err(|e| CliError::config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        if let (Some(p), Some(solver)) = (
            doc.get("p").cloned(),
            doc.get_mut("solver").and_then(Value::as_object_mut),
        ) {
            solver.insert("p".into(), p);
        }
        let cfg: PipelineConfig = serde_json::from_value(doc).map_err(|e| CliError::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let wrap = |e: manifold_deconv::Error| CliError::config(e.to_string());
        self.phantom.validate().map_err(wrap)?;
        self.kernel.validate().map_err(wrap)?;
        self.noise.validate().map_err(wrap)?;
        self.regularizer.validate().map_err(wrap)?;
        self.solver.validate().map_err(wrap)?;
        self.noise.check_kind(self.phantom.manifold).map_err(wrap)?;
        if self.kernel.dims() != self.phantom.shape.len() {
            return Err(CliError::config(format!(
                "kernel is {}-d but the phantom is {}-d",
                self.kernel.dims(),
                self.phantom.shape.len()
            )));
        }
        Ok(())
    }
}

/// Sets `a.b.c` in `doc` to `value`, parsed as JSON when possible and as a
/// string otherwise. Missing objects are created; numeric segments index
/// arrays.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::config(format!("override `{assignment}` is not key=value")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut cur = doc;
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::config(format!("bad override key `{key}`")));
    }
    for (k, part) in parts.iter().enumerate() {
        let last = k + 1 == parts.len();
        cur = match cur {
            Value::Array(items) => {
                let idx: usize = part
                    .parse()
                    .map_err(|_| CliError::config(format!("`{part}` in `{key}` must index an array")))?;
                items
                    .get_mut(idx)
                    .ok_or_else(|| CliError::config(format!("index {idx} out of range in `{key}`")))?
            }
            Value::Object(map) => map.entry(part.to_string()).or_insert(if last {
                Value::Null
            } else {
                Value::Object(Default::default())
            }),
            other => {
                *other = Value::Object(Default::default());
                other
                    .as_object_mut()
                    .expect("just set")
                    .entry(part.to_string())
                    .or_insert(Value::Null)
            }
        };
    }
    *cur = value;
    Ok(())
}

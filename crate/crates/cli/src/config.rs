//! Resolved per-command configuration: flags over config file over defaults.

use std::path::{Path, PathBuf};

use mnls_core::solver::SolverConfig;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadialConfig {
    pub dim: usize,
    pub p: Option<f64>,
    pub rmax: f64,
    /// Output mesh size; r_max / 0.01 when absent.
    pub mesh: Option<usize>,
    pub out: PathBuf,
    pub report: Option<PathBuf>,
}

impl Default for RadialConfig {
    fn default() -> Self {
        RadialConfig {
            dim: 2,
            p: None,
            rmax: 30.0,
            mesh: None,
            out: "radial.csv".into(),
            report: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    pub dim: usize,
    pub p: f64,
    pub b: f64,
    #[serde(rename = "box")]
    pub half_extent: f64,
    pub n: usize,
    pub decoupled: bool,
    pub out: PathBuf,
    pub report: Option<PathBuf>,
    pub solver: SolverConfig,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            dim: 2,
            p: 4.0,
            b: 0.0,
            half_extent: 12.0,
            n: 257,
            decoupled: false,
            out: "groundstate.mnls".into(),
            report: None,
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub dim: usize,
    pub p: f64,
    pub b: Vec<f64>,
    #[serde(rename = "box")]
    pub half_extent: f64,
    pub n: usize,
    pub out: PathBuf,
    pub report: Option<PathBuf>,
    pub solver: SolverConfig,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            dim: 2,
            p: 4.0,
            b: vec![0.0, 0.05, 0.1, 0.15, 0.2],
            half_extent: 12.0,
            n: 129,
            out: "energy.csv".into(),
            report: None,
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumConfig {
    pub dim: usize,
    pub p: f64,
    /// One value: a single spectrum. Several (including 0): a convergence sweep.
    pub b: Vec<f64>,
    pub k: usize,
    pub tol: f64,
    #[serde(rename = "box")]
    pub half_extent: f64,
    pub n: usize,
    pub out: PathBuf,
    pub report: Option<PathBuf>,
    pub solver: SolverConfig,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig {
            dim: 2,
            p: 4.0,
            b: vec![0.0],
            k: 6,
            tol: 1e-8,
            half_extent: 10.0,
            n: 97,
            out: "spectrum.csv".into(),
            report: None,
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecayConfig {
    pub dim: usize,
    pub p: f64,
    pub b: f64,
    #[serde(rename = "box")]
    pub half_extent: f64,
    pub n: usize,
    /// Fit window [r_lo, r_hi] of the 2d law.
    pub window: [f64; 2],
    /// Analyse this dump instead of solving.
    pub input: Option<PathBuf>,
    pub out: PathBuf,
    pub report: Option<PathBuf>,
    pub solver: SolverConfig,
}

impl Default for DecayConfig {
    fn default() -> Self {
        DecayConfig {
            dim: 2,
            p: 4.0,
            b: 0.2,
            half_extent: 14.0,
            n: 257,
            window: [6.0, 10.0],
            input: None,
            out: "decay.csv".into(),
            report: None,
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub quick: bool,
    pub seed: u64,
    pub report: Option<PathBuf>,
}

/// Merges `patch` into `base`, recursing into objects; nulls in `patch` are
/// skipped and tagged objects (with a "kind" key) replace wholesale.
pub fn overlay(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                if v.is_null() {
                    continue;
                }
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() && v.get("kind").is_none() => {
                        overlay(slot, v)
                    }
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, p) if !p.is_null() => *slot = p,
        _ => {}
    }
}

/// Reads the section named `command` from a JSON config file.
pub fn file_section(path: &Path, command: &str) -> CliResult<Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let root: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
    let Value::Object(mut map) = root else {
        return Err(CliError::Usage(format!(
            "config {} must hold a JSON object",
            path.display()
        )));
    };
    Ok(map.remove(command).unwrap_or(Value::Object(Map::new())))
}

/// defaults ← config file section ← flags.
pub fn resolve<C: Default + Serialize + DeserializeOwned>(
    command: &str,
    file: Option<&Path>,
    flags: Value,
) -> CliResult<C> {
    let mut value =
        serde_json::to_value(C::default()).map_err(|e| CliError::Usage(e.to_string()))?;
    if let Some(path) = file {
        overlay(&mut value, file_section(path, command)?);
    }
    overlay(&mut value, flags);
    serde_json::from_value(value).map_err(|e| CliError::Usage(format!("{command} config: {e}")))
}

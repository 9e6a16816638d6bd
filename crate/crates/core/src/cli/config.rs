//! Run configuration: JSON in, validated model and sweep setup out.

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::darkstates::epsilon_condition;
use crate::error::Error;
use crate::models::{Aqrm2Params, Jc2Params, Model, MultimodeParams};
use crate::spectra::{linear_grid, DarkSpec, LabelSpec, Sector, SweepSetup, DEFAULT_GRID_POINTS};

use super::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Aqrm2,
    Jc2,
    Multimode,
    MultimodeTransformed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Panel {
    P1a,
    P1b,
    P2a,
    P2b,
    P3a,
    P3b,
    P3c,
    P3d,
}

impl Panel {
    pub const ALL: [Panel; 8] = [
        Panel::P1a,
        Panel::P1b,
        Panel::P2a,
        Panel::P2b,
        Panel::P3a,
        Panel::P3b,
        Panel::P3c,
        Panel::P3d,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Panel::P1a => "1a",
            Panel::P1b => "1b",
            Panel::P2a => "2a",
            Panel::P2b => "2b",
            Panel::P3a => "3a",
            Panel::P3b => "3b",
            Panel::P3c => "3c",
            Panel::P3d => "3d",
        }
    }

    pub fn parse(id: &str) -> Option<Panel> {
        Panel::ALL.into_iter().find(|p| p.id() == id)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Task {
    Spectrum,
    DarkState,
    Crossings,
    SymmetryCheck,
    Convergence,
    Figure(Panel),
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Task::Spectrum => f.write_str("spectrum"),
            Task::DarkState => f.write_str("dark_state"),
            Task::Crossings => f.write_str("crossings"),
            Task::SymmetryCheck => f.write_str("symmetry_check"),
            Task::Convergence => f.write_str("convergence"),
            Task::Figure(p) => write!(f, "figure:{}", p.id()),
        }
    }
}

impl TryFrom<String> for Task {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        match s.as_str() {
            "spectrum" => Ok(Task::Spectrum),
            "dark_state" => Ok(Task::DarkState),
            "crossings" => Ok(Task::Crossings),
            "symmetry_check" => Ok(Task::SymmetryCheck),
            "convergence" => Ok(Task::Convergence),
            other => other
                .strip_prefix("figure:")
                .and_then(Panel::parse)
                .map(Task::Figure)
                .ok_or_else(|| format!("unknown task `{other}`")),
        }
    }
}

impl From<Task> for String {
    fn from(t: Task) -> String {
        t.to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Truncation {
    /// One cutoff per mode; for `multimode_transformed` the first is `b₁`.
    pub cutoffs: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub start: f64,
    #[serde(default = "one")]
    pub stop: f64,
    #[serde(default = "default_points")]
    pub points: usize,
    pub keep: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DarkStateConfig {
    pub g: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceConfig {
    pub g: f64,
    pub cutoffs: Vec<usize>,
    pub levels: usize,
    #[serde(default = "default_convergence_tol")]
    pub tol: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetryConfig {
    pub g: Vec<f64>,
    #[serde(default = "default_margin")]
    pub margin: usize,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossingConfig {
    /// Grid gaps above this are not refined as candidate crossings.
    #[serde(default = "default_max_gap")]
    pub max_gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineConfig {
    pub n_max: usize,
    pub epsilon: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub dir: Option<String>,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: None,
            formats: default_formats(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub family: Family,
    /// Family parameters; couplings form the profile scaled by the sweep
    /// variable, and `eps1`/`eps2` accept `"dark"` or `"-dark"`.
    pub params: Map<String, Value>,
    pub truncation: Truncation,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub sector: Sector,
    #[serde(default)]
    pub dark: Option<DarkSpec>,
    #[serde(default)]
    pub label: Option<LabelSpec>,
    #[serde(default)]
    pub tasks: Vec<Task>,
    #[serde(default)]
    pub dark_state: Option<DarkStateConfig>,
    #[serde(default)]
    pub convergence: Option<ConvergenceConfig>,
    #[serde(default)]
    pub symmetry: Option<SymmetryConfig>,
    #[serde(default)]
    pub crossings: Option<CrossingConfig>,
    #[serde(default)]
    pub baselines: Option<BaselineConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

fn one() -> f64 {
    1.0
}

fn default_points() -> usize {
    DEFAULT_GRID_POINTS
}

fn default_convergence_tol() -> f64 {
    1e-8
}

fn default_margin() -> usize {
    crate::fockalg::INTERIOR_MARGIN
}

fn default_threshold() -> f64 {
    crate::symmetry::COMMUTATOR_THRESHOLD
}

fn default_max_gap() -> f64 {
    0.05
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json]
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn wants(&self, format: Format) -> bool {
        self.output.formats.contains(&format)
    }

    /// Model with resolved bias keywords and validated truncation.
    pub fn model(&self) -> Result<Model, CliError> {
        let cutoffs = &self.truncation.cutoffs;
        let single = || -> Result<usize, CliError> {
            match cutoffs.as_slice() {
                [n] => Ok(*n),
                _ => Err(CliError::Precondition(Error::InvalidTruncation(format!(
                    "single-mode family needs exactly one cutoff, got {}",
                    cutoffs.len()
                )))),
            }
        };
        let model = match self.family {
            Family::Aqrm2 => {
                let params: Aqrm2Params = resolve(&self.params)?;
                params.validate()?;
                Model::Aqrm2 {
                    params,
                    cutoff: single()?,
                }
            }
            Family::Jc2 => {
                let params: Jc2Params = resolve(&self.params)?;
                params.validate()?;
                Model::Jc2 {
                    params,
                    cutoff: single()?,
                }
            }
            Family::Multimode => {
                let params: MultimodeParams = resolve(&self.params)?;
                params.validate()?;
                Model::Multimode {
                    params,
                    cutoffs: cutoffs.clone(),
                }
            }
            Family::MultimodeTransformed => {
                let params: MultimodeParams = resolve(&self.params)?;
                params.collective_couplings()?;
                let (first, rest) = cutoffs.split_first().ok_or_else(|| {
                    CliError::Precondition(Error::InvalidTruncation("no cutoffs given".into()))
                })?;
                Model::MultimodeTransformed {
                    params,
                    cutoff: *first,
                    rest_cutoffs: rest.to_vec(),
                }
            }
        };
        model.basis()?;
        Ok(model)
    }

    pub fn grid(&self) -> Result<Option<Vec<f64>>, CliError> {
        match &self.sweep {
            Some(s) => Ok(Some(linear_grid(s.start, s.stop, s.points)?)),
            None => Ok(None),
        }
    }

    pub fn setup(&self, model: &Model) -> Option<SweepSetup> {
        self.sweep.as_ref().map(|s| SweepSetup {
            model: model.clone(),
            sector: self.sector,
            dark: self.dark,
            label: self.label,
            keep: s.keep,
        })
    }
}

/// Replaces `"dark"`/`"-dark"` bias keywords by `±ε` from the bias
/// condition, then deserializes the family parameters.
fn resolve<T: serde::de::DeserializeOwned>(params: &Map<String, Value>) -> Result<T, CliError> {
    let mut params = params.clone();
    for key in ["eps1", "eps2"] {
        let Some(Value::String(word)) = params.get(key) else {
            continue;
        };
        let sign = match word.as_str() {
            "dark" => 1.0,
            "-dark" => -1.0,
            other => {
                return Err(CliError::Parse(format!(
                    "{key}: expected a number, \"dark\" or \"-dark\", got \"{other}\""
                )))
            }
        };
        let delta = |k: &str| -> Result<f64, CliError> {
            params
                .get(k)
                .and_then(Value::as_f64)
                .ok_or_else(|| CliError::Parse(format!("{key} = \"{word}\" needs numeric {k}")))
        };
        let omega = match params.get("omega") {
            Some(v) => v.as_f64().ok_or_else(|| CliError::Parse("omega must be a number".into()))?,
            None => match params.get("omegas").and_then(Value::as_array).and_then(|a| a.first()) {
                Some(v) => v.as_f64().ok_or_else(|| CliError::Parse("omegas must be numbers".into()))?,
                None => 1.0,
            },
        };
        let eps = omega * epsilon_condition(delta("delta1")? / omega, delta("delta2")? / omega)?;
        params.insert(key.to_string(), Value::from(sign * eps));
    }
    serde_json::from_value(Value::Object(params)).map_err(|e| CliError::Parse(format!("params: {e}")))
}

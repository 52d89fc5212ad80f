//! Run configuration: a JSON document, optionally overridden by flags.

use std::path::{Path, PathBuf};

use microswim::gaits::GaitDescriptor;
use microswim::sweep::SweepGrid;
use microswim::{BracketSpec, DragPair, IntegratorConfig, Method, ModelId, ModelParams, Pose, ShapeVector, State};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialState {
    /// `(x, y, θ)`.
    #[serde(default)]
    pub pose: [f64; 3],
    /// Shape coordinates; the model's reference shape when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub svg: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

fn default_cycles() -> usize {
    4
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelId,
    #[serde(default)]
    pub params: ModelParams,
    #[serde(default)]
    pub drag: DragPair,
    #[serde(default)]
    pub initial: InitialState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gait: Option<GaitDescriptor>,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default = "default_cycles")]
    pub cycles: usize,
    #[serde(default)]
    pub output: OutputPaths,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bracket: Option<BracketSpec>,
    /// Certification method; chosen from the shape when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
}

impl RunConfig {
    pub fn new(model: ModelId) -> RunConfig {
        RunConfig {
            model,
            params: ModelParams::default(),
            drag: DragPair::default(),
            initial: InitialState::default(),
            gait: None,
            integrator: IntegratorConfig::default(),
            cycles: default_cycles(),
            output: OutputPaths::default(),
            sweep: None,
            bracket: None,
            method: None,
        }
    }

    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })?;
        RunConfig::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<RunConfig, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }

    /// Checks everything that can be checked before computing.
    pub fn validate(&self) -> Result<(), CliError> {
        self.params.validate()?;
        self.drag.validate()?;
        self.integrator.validate()?;
        if self.cycles == 0 {
            return Err(CliError::Config("cycles must be at least 1".into()));
        }
        if let Some(shape) = &self.initial.shape {
            ShapeVector::new(self.model, shape)?;
        }
        if let Some(spec) = &self.bracket {
            spec.validate(self.model.controls())?;
        }
        Ok(())
    }

    pub fn shape(&self) -> Result<ShapeVector, CliError> {
        match &self.initial.shape {
            Some(c) => Ok(ShapeVector::new(self.model, c)?),
            None => Ok(ShapeVector::reference(self.model, &self.params)),
        }
    }

    pub fn initial_state(&self) -> Result<State, CliError> {
        let [x, y, theta] = self.initial.pose;
        Ok(State::new(self.shape()?, Pose::new(x, y, theta)?))
    }
}

/// Parses a comma-separated list of numbers; the empty string is the empty list.
pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|t| t.trim().parse::<f64>().map_err(|e| format!("'{}': {e}", t.trim()))).collect()
}

pub fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    match parse_list(s)?.as_slice() {
        [a, b] => Ok((*a, *b)),
        v => Err(format!("expected two comma-separated numbers, got {}", v.len())),
    }
}

/// A gait given inline as JSON, by canonical name, or as a path to a JSON file.
pub fn parse_gait(arg: &str) -> Result<GaitDescriptor, CliError> {
    let text = match arg.trim() {
        "stretching-drift" => return Ok(GaitDescriptor::stretching_drift()),
        "sliding-drift" => return Ok(GaitDescriptor::sliding_drift()),
        "harmonic" => return Ok(GaitDescriptor::harmonic()),
        t if t.starts_with('{') => t.to_string(),
        path => std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })?,
    };
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("gait: {e}")))
}

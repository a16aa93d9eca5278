//! JSON run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::catalog::{self, BifurcationDefaults, Params};
use crate::mechanics::ChartSystem;
use crate::numerics::Numerics;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
    #[error("line {line}, column {column}: {msg}")]
    Parse { line: usize, column: usize, msg: String },
    #[error("field `{field}`: {msg}")]
    Invalid { field: String, msg: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub name: String,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub chart_radius: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedGuess {
    pub u: Vec<f64>,
    #[serde(default)]
    pub mu2: Option<Vec<f64>>,
}

/// Bifurcation inputs; missing entries fall back to the catalog defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BifurcationSection {
    pub v0: Option<Vec<f64>>,
    pub theta1: Option<Vec<f64>>,
    pub mu1_grid: Option<Vec<Vec<f64>>>,
    pub tau_max: Option<f64>,
    pub n_steps: Option<usize>,
    pub seed_guess: Option<SeedGuess>,
    /// Simulation horizon of the dynamic branch check.
    pub horizon: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub system: SystemSection,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub bifurcation: BifurcationSection,
    #[serde(default)]
    pub outputs: OutputSection,
}

pub const DEFAULT_HORIZON: f64 = 10.0;

fn invalid(field: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field: field.to_string(), msg: msg.into() }
}

impl Config {
    pub fn parse(text: &str) -> Result<Config, ConfigError> {
        let cfg: Config = serde_json::from_str(text)
            .map_err(|e| ConfigError::Parse { line: e.line(), column: e.column(), msg: e.to_string() })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io { path: path.display().to_string(), msg: e.to_string() })?;
        Config::parse(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        catalog::resolve_params(&self.system.name, &self.system.params)
            .map_err(|e| invalid("system", e.to_string()))?;
        if let Some(r) = self.system.chart_radius {
            if !(r.is_finite() && r > 0.0) {
                return Err(invalid("system.chart_radius", "must be positive and finite"));
            }
        }
        self.numerics.validate().map_err(|e| invalid("numerics", e.to_string()))?;
        let b = &self.bifurcation;
        if let Some(t) = b.tau_max {
            if !(t.is_finite() && t >= 0.0) {
                return Err(invalid("bifurcation.tau_max", "must be nonnegative and finite"));
            }
        }
        if b.n_steps == Some(0) {
            return Err(invalid("bifurcation.n_steps", "must be positive"));
        }
        if let Some(h) = b.horizon {
            if !(h.is_finite() && h > 0.0) {
                return Err(invalid("bifurcation.horizon", "must be positive and finite"));
            }
        }
        if matches!(&b.mu1_grid, Some(g) if g.is_empty()) {
            return Err(invalid("bifurcation.mu1_grid", "must not be empty"));
        }
        let finite = |field: &str, v: &[f64]| {
            if v.iter().all(|x| x.is_finite()) {
                Ok(())
            } else {
                Err(invalid(field, "entries must be finite"))
            }
        };
        for (field, v) in [("bifurcation.v0", &b.v0), ("bifurcation.theta1", &b.theta1)] {
            if let Some(v) = v {
                finite(field, v)?;
            }
        }
        for row in b.mu1_grid.iter().flatten() {
            finite("bifurcation.mu1_grid", row)?;
        }
        Ok(())
    }

    pub fn build_system(&self) -> crate::error::Result<ChartSystem> {
        catalog::make_system_with(&self.system.name, &self.system.params, self.system.chart_radius, self.numerics)
    }

    /// Catalog defaults overridden by the bifurcation section.
    pub fn bifurcation_inputs(&self) -> crate::error::Result<BifurcationDefaults> {
        let mut d = catalog::default_bifurcation(&self.system.name, &self.system.params)?;
        let b = &self.bifurcation;
        if let Some(v) = &b.v0 {
            d.v0 = v.clone();
        }
        if let Some(v) = &b.theta1 {
            d.theta1 = v.clone();
        }
        if let Some(v) = &b.mu1_grid {
            d.mu1_grid = v.clone();
        }
        if let Some(v) = b.tau_max {
            d.tau_max = v;
        }
        if let Some(v) = b.n_steps {
            d.n_steps = v;
        }
        Ok(d)
    }

    pub fn horizon(&self) -> f64 {
        self.bifurcation.horizon.unwrap_or(DEFAULT_HORIZON)
    }

    /// `name = value` lines for every setting that differs from a default.
    pub fn overrides(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (k, v) in &self.system.params {
            out.push(format!("system.params.{k} = {v}"));
        }
        if let Some(r) = self.system.chart_radius {
            out.push(format!("system.chart_radius = {r}"));
        }
        out.extend(self.numerics.overrides().into_iter().map(|l| format!("numerics.{l}")));
        if let Ok(serde_json::Value::Object(m)) = serde_json::to_value(&self.bifurcation) {
            for (k, v) in m {
                if !v.is_null() {
                    out.push(format!("bifurcation.{k} = {v}"));
                }
            }
        }
        out
    }
}

/// Parses `u=1.3:0.5,mu2=0:0:0`.
pub fn parse_seed_guess(s: &str) -> Result<SeedGuess, ConfigError> {
    let mut u = None;
    let mut mu2 = None;
    for part in s.split(',').filter(|p| !p.trim().is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(|| invalid("--seed-guess", format!("expected key=value, got `{part}`")))?;
        let vals: Vec<f64> = v
            .split(':')
            .map(|x| x.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| invalid("--seed-guess", format!("bad number list `{v}`")))?;
        match k.trim() {
            "u" => u = Some(vals),
            "mu2" => mu2 = Some(vals),
            other => return Err(invalid("--seed-guess", format!("unknown key `{other}`"))),
        }
    }
    Ok(SeedGuess { u: u.ok_or_else(|| invalid("--seed-guess", "missing u"))?, mu2 })
}

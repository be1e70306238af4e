//! Run configuration, read from a single TOML file. Every section and key is optional;
//! missing keys take the library defaults.

use std::path::{Path, PathBuf};

use avfrontier::frontier::{FrontierConfig, HeadroomMode};
use avfrontier::ingest::{ColumnSchema, KinematicsSource};
use avfrontier::interaction::LaneTopology;
use avfrontier::metrics::{MetricsConfig, ModelEncoding};
use avfrontier::objectives::ObjectivesConfig;
use avfrontier::{FrameTransform, SmoothingConfig};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// One raw trajectory table and its roadway layout. The name becomes the normalization
/// group of its rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputSpec {
    pub name: String,
    pub path: PathBuf,
    #[serde(default)]
    pub adjacency: Vec<(String, String)>,
    #[serde(default = "default_lane_width")]
    pub lane_width: f64,
}

fn default_lane_width() -> f64 {
    LaneTopology::default().lane_width
}

impl InputSpec {
    pub fn topology(&self) -> LaneTopology {
        LaneTopology { adjacency: self.adjacency.clone(), lane_width: self.lane_width }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IngestOptions {
    pub schema: ColumnSchema,
    pub transform: FrameTransform,
    /// `None` disables smoothing.
    pub smoothing: Option<SmoothingConfig>,
    pub kinematics: KinematicsSource,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            schema: ColumnSchema::default(),
            transform: FrameTransform::identity(),
            smoothing: Some(SmoothingConfig::default()),
            kinematics: KinematicsSource::Derive,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelOptions {
    pub encoding: ModelEncoding,
    /// Previously fitted models to apply instead of fitting new ones.
    pub frozen: Option<PathBuf>,
}

impl Default for ModelOptions {
    fn default() -> Self {
        Self { encoding: ModelEncoding::Json, frozen: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ParetoOptions {
    pub frontier: FrontierConfig,
    pub headroom: HeadroomMode,
    pub hull: bool,
}

impl Default for ParetoOptions {
    fn default() -> Self {
        Self { frontier: FrontierConfig::default(), headroom: HeadroomMode::Surface, hull: true }
    }
}

/// Reference lines drawn on the histograms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    pub m_max: f64,
    /// Relaxed-following time headway, s.
    pub headway: f64,
    pub gain: f64,
    pub jerk: f64,
    pub decel: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { m_max: 1.85, headway: 4.0, gain: 1.0, jerk: 2.5, decel: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReportOptions {
    pub bins: usize,
    pub thresholds: Thresholds,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self { bins: 40, thresholds: Thresholds::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub seed: u64,
    pub dt: f64,
    pub out_dir: PathBuf,
    pub inputs: Vec<InputSpec>,
    pub ingest: IngestOptions,
    pub metrics: MetricsConfig,
    pub models: ModelOptions,
    pub objectives: ObjectivesConfig,
    pub pareto: ParetoOptions,
    pub report: ReportOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            dt: avfrontier::DEFAULT_DT,
            out_dir: PathBuf::from("out"),
            inputs: Vec::new(),
            ingest: IngestOptions::default(),
            metrics: MetricsConfig::default(),
            models: ModelOptions::default(),
            objectives: ObjectivesConfig::default(),
            pareto: ParetoOptions::default(),
            report: ReportOptions::default(),
        }
    }
}

impl RunConfig {
    /// Parse a config file. Relative input paths are resolved against the file's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io("config", path, e))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for input in &mut cfg.inputs {
            if input.path.is_relative() {
                input.path = base.join(&input.path);
            }
        }
        if let Some(frozen) = cfg.models.frozen.as_mut().filter(|p| p.is_relative()) {
            *frozen = base.join(&*frozen);
        }
        Ok(cfg)
    }

    /// Propagate the shared keys into the per-module configurations.
    pub fn resolved(mut self) -> Self {
        self.metrics.dt = self.dt;
        self.metrics.spacing.seed = self.seed;
        if let Some(s) = self.ingest.smoothing.as_mut() {
            s.dt = self.dt;
        }
        self
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(CliError::Config(format!("dt must be positive, got {}", self.dt)));
        }
        self.ingest.transform.validate()?;
        if let Some(s) = &self.ingest.smoothing {
            s.validate()?;
        }
        self.metrics.validate()?;
        self.objectives.validate()?;
        self.pareto.frontier.validate()?;
        let t = &self.report.thresholds;
        for (name, v) in
            [("m_max", t.m_max), ("headway", t.headway), ("gain", t.gain), ("jerk", t.jerk), ("decel", t.decel)]
        {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Config(format!("report threshold {name} must be positive, got {v}")));
            }
        }
        if self.report.bins == 0 {
            return Err(CliError::Config("report.bins must be positive".into()));
        }
        let mut names: Vec<&str> = self.inputs.iter().map(|i| i.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(CliError::Config("input names must be unique".into()));
        }
        if names.iter().any(|n| n.is_empty() || n.contains(['/', '\\'])) {
            return Err(CliError::Config("input names must be non-empty and contain no path separators".into()));
        }
        Ok(())
    }

    /// Canonical serialization used for the config digest.
    pub fn canonical(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_all_defaults() {
        let cfg: RunConfig = toml::from_str("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        cfg.validate().unwrap();
    }

    #[test]
    fn partial_sections_merge_with_defaults() {
        let cfg: RunConfig = toml::from_str(
            r#"
            seed = 9
            [[inputs]]
            name = "a"
            path = "a.csv"
            adjacency = [["1", "2"]]
            [metrics]
            jerk_threshold = 3.0
            [pareto.frontier]
            dependent_axis = "S"
            lattice = 20
            "#,
        )
        .unwrap();
        let cfg = cfg.resolved();
        assert_eq!(cfg.metrics.jerk_threshold, 3.0);
        assert_eq!(cfg.metrics.decel_threshold, MetricsConfig::default().decel_threshold);
        assert_eq!(cfg.metrics.spacing.seed, 9);
        assert_eq!(cfg.pareto.frontier.lattice, 20);
        assert_eq!(cfg.inputs[0].topology().adjacency, vec![("1".to_string(), "2".to_string())]);
    }

    #[test]
    fn rejects_bad_thresholds_and_duplicate_inputs() {
        let mut cfg = RunConfig::default();
        cfg.report.thresholds.gain = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        let input = InputSpec { name: "x".into(), path: "x.csv".into(), adjacency: vec![], lane_width: 3.5 };
        cfg.inputs = vec![input.clone(), input];
        assert!(cfg.validate().is_err());
    }
}

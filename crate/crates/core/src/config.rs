//! Run settings: defaults, a flat TOML file and command-line overrides, in
//! increasing precedence.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::montecarlo::{McConfig, DEFAULT_BINS, DEFAULT_CHUNK, DEFAULT_SAMPLES, DEFAULT_SEED};
use crate::scenario::{LegacyModel, Scenario};
use crate::sweep::{Axis, Grid};

pub const DEFAULT_ALPHA1: f64 = 0.8;
pub const DEFAULT_SNR_DB: f64 = 10.0;
pub const DEFAULT_RATE: f64 = 1.0;
pub const DEFAULT_OMEGA: f64 = 1.0;

/// One layer of settings. Every field is optional so layers can be stacked.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub alpha1: Option<f64>,
    pub snr_db: Option<f64>,
    pub rate: Option<f64>,
    pub zeta: Option<f64>,
    pub omega: Option<f64>,
    pub samples: Option<u64>,
    pub seed: Option<u64>,
    pub chunk: Option<u64>,
    pub bins: Option<usize>,
    pub axis: Option<String>,
    pub grid: Option<String>,
    pub mc: Option<bool>,
    pub execution: Option<Execution>,
}

impl Settings {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// `self` wins wherever it has a value.
    pub fn over(self, lower: Settings) -> Settings {
        Settings {
            alpha1: self.alpha1.or(lower.alpha1),
            snr_db: self.snr_db.or(lower.snr_db),
            rate: self.rate.or(lower.rate),
            zeta: self.zeta.or(lower.zeta),
            omega: self.omega.or(lower.omega),
            samples: self.samples.or(lower.samples),
            seed: self.seed.or(lower.seed),
            chunk: self.chunk.or(lower.chunk),
            bins: self.bins.or(lower.bins),
            axis: self.axis.or(lower.axis),
            grid: self.grid.or(lower.grid),
            mc: self.mc.or(lower.mc),
            execution: self.execution.or(lower.execution),
        }
    }

    pub fn resolve(&self) -> Result<Resolved> {
        let scenario = Scenario::new(
            self.alpha1.unwrap_or(DEFAULT_ALPHA1),
            self.snr_db.unwrap_or(DEFAULT_SNR_DB),
            self.omega.unwrap_or(DEFAULT_OMEGA),
            self.rate.unwrap_or(DEFAULT_RATE),
        )?;
        let zeta = self.zeta.unwrap_or(0.0);
        LegacyModel::from_zeta(zeta)?;
        let axis: Axis = self.axis.as_deref().unwrap_or("snr").parse()?;
        let grid = match &self.grid {
            Some(g) => g.parse()?,
            None => axis.default_grid(),
        };
        let samples = self.samples.unwrap_or(DEFAULT_SAMPLES);
        let execution = self.execution.unwrap_or_default();
        let mc_config = McConfig {
            samples,
            seed: self.seed.unwrap_or(DEFAULT_SEED),
            chunk: self.chunk.unwrap_or(DEFAULT_CHUNK.min(samples.max(1))),
            bins: self.bins.unwrap_or(DEFAULT_BINS),
            execution,
        };
        mc_config.validate()?;
        Ok(Resolved {
            scenario,
            zeta,
            axis,
            grid,
            mc: self.mc.unwrap_or(false),
            mc_config,
            execution,
        })
    }
}

/// Fully resolved settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Resolved {
    pub scenario: Scenario,
    pub zeta: f64,
    pub axis: Axis,
    pub grid: Grid,
    pub mc: bool,
    pub mc_config: McConfig,
    pub execution: Execution,
}

impl Resolved {
    /// The resolved values as a settings file that resolves back to `self`.
    pub fn to_toml(&self) -> Result<String> {
        let s = Settings {
            alpha1: Some(self.scenario.alpha1()),
            snr_db: Some(self.scenario.snr_db()),
            rate: Some(self.scenario.rate()),
            zeta: Some(self.zeta),
            omega: Some(self.scenario.omega()),
            samples: Some(self.mc_config.samples),
            seed: Some(self.mc_config.seed),
            chunk: Some(self.mc_config.chunk),
            bins: Some(self.mc_config.bins),
            axis: Some(self.axis.to_string()),
            grid: Some(self.grid.to_string()),
            mc: Some(self.mc),
            execution: Some(self.execution),
        };
        toml::to_string(&s).map_err(|e| Error::Parse(e.to_string()))
    }
}

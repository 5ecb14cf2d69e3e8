use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{samples_from_csv, GridSpec, InitialCondition};
use crate::norm::{GroundStateSource, DEFAULT_LONG_HORIZON};
use crate::qite::QiteConfig;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    #[default]
    Qite,
    ExactOnly,
}

fn default_horizon() -> f64 {
    DEFAULT_LONG_HORIZON
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormConfig {
    /// Correction period `K`; `null` never corrects.
    pub period: Option<usize>,
    #[serde(default)]
    pub ground_state: GroundStateSource,
    /// Imaginary-time horizon of the long-run ground-state estimate.
    #[serde(default = "default_horizon")]
    pub long_horizon: f64,
}

impl Default for NormConfig {
    fn default() -> Self {
        NormConfig {
            period: Some(10),
            ground_state: GroundStateSource::ExactEigen,
            long_horizon: DEFAULT_LONG_HORIZON,
        }
    }
}

/// Finite-shot readout applied to the snapshot amplitudes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReadoutConfig {
    pub shots: u64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSpec,
    pub initial: InitialCondition,
    /// Column of samples replacing `initial` (flat order); relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_csv: Option<PathBuf>,
    pub alpha: f64,
    pub qite: QiteConfig,
    #[serde(default)]
    pub norm: NormConfig,
    pub outputs: PathBuf,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    #[serde(default)]
    pub mode: RunMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub readout: Option<ReadoutConfig>,
}

impl RunConfig {
    /// Parses and validates a JSON document; `base` resolves relative CSV paths.
    pub fn from_json(text: &str, base: Option<&Path>) -> Result<Self> {
        let mut cfg: RunConfig = serde_json::from_str(text).map_err(|e| {
            Error::Config(vec![format!(
                "line {} column {}: {e}",
                e.line(),
                e.column()
            )])
        })?;
        if let (Some(csv), Some(base)) = (&cfg.initial_csv, base) {
            if csv.is_relative() {
                cfg.initial_csv = Some(base.join(csv));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(vec![format!("{}: {e}", path.display())]))?;
        Self::from_json(&text, path.parent())
    }

    /// Initial samples in flat order.
    pub fn initial_samples(&self) -> Result<Vec<f64>> {
        match &self.initial_csv {
            Some(p) => InitialCondition::Samples {
                values: samples_from_csv(p)?,
            }
            .sample(&self.grid),
            None => self.initial.sample(&self.grid),
        }
    }

    pub fn final_time(&self) -> f64 {
        self.qite.steps as f64 * self.qite.dt
    }

    /// Collects every problem instead of stopping at the first.
    pub fn validate(&self) -> Result<()> {
        let mut diags = Vec::new();
        if let Err(e) = self.grid.validate() {
            diags.push(format!("grid: {e}"));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            diags.push(format!("alpha: {} must be positive", self.alpha));
        }
        if let Err(e) = self.qite.validate() {
            diags.push(format!("qite: {e}"));
        }
        if self.norm.period == Some(0) {
            diags.push("norm.period: must be at least 1 (or null)".into());
        }
        if !(self.norm.long_horizon > 0.0) {
            diags.push("norm.long_horizon: must be positive".into());
        }
        let end = self.final_time();
        for (i, t) in self.snapshot_times.iter().enumerate() {
            if !(*t >= 0.0 && *t <= end + 0.5 * self.qite.dt) {
                diags.push(format!("snapshot_times[{i}]: {t} outside [0, {end}]"));
            }
        }
        if let Some(r) = &self.readout {
            if r.shots == 0 {
                diags.push("readout.shots: must be positive".into());
            }
        }
        if diags.is_empty() {
            if let Err(e) = self.initial_samples() {
                diags.push(format!("initial: {e}"));
            }
        }
        if diags.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(diags))
        }
    }
}

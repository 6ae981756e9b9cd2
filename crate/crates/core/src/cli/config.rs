//! Experiment configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{LabError, Result};
use crate::estimates::DEFAULT_DELTA;
use crate::model::ModelSpec;
use crate::wannier::DEFAULT_CLUSTER_TOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateToggles {
    #[serde(default = "yes")]
    pub near_bd: bool,
    #[serde(default = "yes")]
    pub far_bd: bool,
    #[serde(default = "yes")]
    pub approx: bool,
    #[serde(default = "yes")]
    pub pl_chern: bool,
    #[serde(default = "yes")]
    pub p_x_pl: bool,
    #[serde(default = "yes")]
    pub decay_trick: bool,
}

fn yes() -> bool {
    true
}

impl Default for EstimateToggles {
    fn default() -> Self {
        EstimateToggles {
            near_bd: true,
            far_bd: true,
            approx: true,
            pl_chern: true,
            p_x_pl: true,
            decay_trick: true,
        }
    }
}

fn default_fermi_level() -> f64 {
    0.0
}

fn default_delta() -> f64 {
    DEFAULT_DELTA
}

fn default_cluster_tol() -> f64 {
    DEFAULT_CLUSTER_TOL
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    #[serde(default = "default_fermi_level")]
    pub fermi_level: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(rename = "L_values")]
    pub l_values: Vec<usize>,
    #[serde(default)]
    pub toggles: EstimateToggles,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "default_cluster_tol")]
    pub cluster_tol: f64,
    /// Half widths of the size sweep in `dichotomy`; defaults to `[model.N]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<usize>>,
    /// Inner window of the boundary estimates; defaults to `max(1, N/4)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<usize>,
    /// Separations of the boundary estimates; defaults to `1..=N-a`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_values: Option<Vec<usize>>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Hex SHA-256 of the compact JSON form.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(serde_json::to_vec(self).expect("config serializes")))
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.sizes.clone().unwrap_or_else(|| vec![self.model.half_width])
    }

    pub fn window_a(&self) -> usize {
        self.a.unwrap_or((self.model.half_width / 4).max(1))
    }

    pub fn b_values(&self) -> Vec<usize> {
        self.b_values.clone().unwrap_or_else(|| {
            let a = self.window_a();
            (1..=self.model.half_width.saturating_sub(a)).collect()
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(LabError::Config(format!("delta must be positive, got {}", self.delta)));
        }
        if !(self.cluster_tol > 0.0 && self.cluster_tol.is_finite()) {
            return Err(LabError::Config(format!("cluster_tol must be positive, got {}", self.cluster_tol)));
        }
        if !self.fermi_level.is_finite() {
            return Err(LabError::Config("fermi_level must be finite".into()));
        }
        if self.l_values.is_empty() {
            return Err(LabError::Config("L_values must not be empty".into()));
        }
        let sizes = self.sizes();
        if sizes.contains(&0) {
            return Err(LabError::Config("sizes must be positive".into()));
        }
        let smallest = sizes.iter().copied().chain([self.model.half_width]).min().unwrap_or(0);
        for &l in &self.l_values {
            if l == 0 || l > smallest / 2 {
                return Err(LabError::Config(format!(
                    "window L = {l} outside 1..={} (N/2 for the smallest size N = {smallest})",
                    smallest / 2
                )));
            }
        }
        let a = self.window_a();
        let b = self.b_values();
        if a == 0 || b.is_empty() || b.contains(&0) {
            return Err(LabError::Config("need a >= 1 and a nonempty list of b >= 1".into()));
        }
        let reach = a + b.iter().max().copied().unwrap_or(0);
        if reach > self.model.half_width {
            return Err(LabError::Config(format!(
                "a + max(b) = {reach} exceeds N = {}",
                self.model.half_width
            )));
        }
        Ok(())
    }
}

//! TOML run configuration.
//!
//! ```toml
//! [ensemble]
//! law = "student-t"
//! nu = 5.0
//!
//! [run]
//! n_grid = [128, 256]
//! trials = 200
//! seed = 42
//! pipeline = "raw"
//! p_list = [2]
//!
//! [domain]
//! energies = [0.0]
//! v_max = 1.0
//! alpha = 2
//! v_grid = { kind = "floor" }
//!
//! [constants]
//! a0 = 8.0
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ensembles::EntryLaw;
use crate::experiments::{Constants, ExperimentConfig, Pipeline, Rule, SpectralStatsConfig, VGrid};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub n_grid: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_pipeline")]
    pub pipeline: Pipeline,
    #[serde(default = "default_p_list")]
    pub p_list: Vec<u32>,
    #[serde(default = "default_audit_max_n")]
    pub audit_max_n: usize,
    #[serde(default)]
    pub counting_x: f64,
    #[serde(default = "default_counting_delta")]
    pub counting_delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    #[serde(default = "default_energies")]
    pub energies: Vec<f64>,
    #[serde(default = "default_v_max")]
    pub v_max: f64,
    #[serde(default = "default_alpha")]
    pub alpha: u32,
    #[serde(default = "default_v_grid")]
    pub v_grid: VGrid,
}

impl Default for DomainSection {
    fn default() -> Self {
        Self {
            energies: default_energies(),
            v_max: default_v_max(),
            alpha: default_alpha(),
            v_grid: default_v_grid(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsSection {
    pub a0: Option<f64>,
    pub a1: Option<f64>,
    pub chernoff_c: Option<f64>,
    pub r_rule: Option<Rule>,
    pub r_under_rule: Option<Rule>,
    pub r_over_rule: Option<Rule>,
    pub k_rule: Option<Rule>,
    pub replacement_bound: Option<f64>,
}

impl ConstantsSection {
    fn resolve(&self) -> Constants {
        let d = Constants::default();
        Constants {
            a0: self.a0.unwrap_or(d.a0),
            a1: self.a1.unwrap_or(d.a1),
            chernoff_c: self.chernoff_c.unwrap_or(d.chernoff_c),
            r_rule: self.r_rule.clone().unwrap_or(d.r_rule),
            r_under_rule: self.r_under_rule.clone().unwrap_or(d.r_under_rule),
            r_over_rule: self.r_over_rule.clone().unwrap_or(d.r_over_rule),
            k_rule: self.k_rule.clone().unwrap_or(d.k_rule),
            replacement_bound: self.replacement_bound.or(d.replacement_bound),
        }
    }
}

fn default_trials() -> usize {
    100
}
fn default_pipeline() -> Pipeline {
    Pipeline::Raw
}
fn default_p_list() -> Vec<u32> {
    vec![2]
}
fn default_audit_max_n() -> usize {
    64
}
fn default_counting_delta() -> f64 {
    8.0
}
fn default_energies() -> Vec<f64> {
    vec![0.0]
}
fn default_v_max() -> f64 {
    1.0
}
fn default_alpha() -> u32 {
    2
}
fn default_v_grid() -> VGrid {
    VGrid::Geometric { per_decade: 8 }
}

/// Parsed configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub ensemble: EntryLaw,
    pub run: RunSection,
    #[serde(default)]
    pub domain: DomainSection,
    pub constants: Option<ConstantsSection>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.ensemble.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<(Self, String)> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Ok((Self::parse(&text)?, text))
    }

    pub fn constants(&self) -> Constants {
        self.constants.as_ref().map(|c| c.resolve()).unwrap_or_default()
    }

    pub fn experiment(&self) -> ExperimentConfig {
        ExperimentConfig {
            ensemble: self.ensemble.clone(),
            n_grid: self.run.n_grid.clone(),
            energies: self.domain.energies.clone(),
            v_max: self.domain.v_max,
            alpha: self.domain.alpha,
            v_grid: self.domain.v_grid.clone(),
            p_list: self.run.p_list.clone(),
            trials: self.run.trials,
            base_seed: self.run.seed,
            pipeline: self.run.pipeline,
            constants: self.constants(),
            audit_max_n: self.run.audit_max_n,
        }
    }

    pub fn spectral_stats(&self, with_vectors: bool) -> SpectralStatsConfig {
        SpectralStatsConfig {
            ensemble: self.ensemble.clone(),
            n_grid: self.run.n_grid.clone(),
            trials: self.run.trials,
            base_seed: self.run.seed,
            with_vectors,
            counting_x: self.run.counting_x,
            counting_delta: self.run.counting_delta,
        }
    }
}

/// Sorted-key, whitespace-normalised rendering of a TOML document.
pub fn canonicalize(text: &str) -> Result<String> {
    let table: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    toml::to_string(&table).map_err(|e| Error::Config(e.to_string()))
}

/// SHA-256 of [`canonicalize`], hex encoded.
pub fn config_digest(text: &str) -> Result<String> {
    Ok(hex::encode(Sha256::digest(canonicalize(text)?.as_bytes())))
}

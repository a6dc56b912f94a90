//! JSON configuration file and its resolution into an [`ExperimentConfig`].
//!
//! Every key is optional and defaults to the reference scenario: three
//! sensors with 10-unit batteries, request probability 0.1, the two-state
//! harvesting chain, β = 0.6, μ = 2 and the standard learning schedule.
//! Unknown keys are rejected.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{
    CostParams, EnergyHarvestModel, SensorConfig, DEFAULT_AOI_CAP, DEFAULT_BATTERY_CAPACITY,
    DEFAULT_REQUEST_PROB,
};
use crate::error::{Error, Result};
use crate::experiment::{ExperimentConfig, SensorSetup};
use crate::policies::{LearningSchedule, PolicyKind};
use crate::seed::{stream_rng, Stream, EXPERIMENT_SCOPE};

pub const DEFAULT_NUM_SENSORS: usize = 3;
pub const DEFAULT_TOLERANCE_RANGE: [f64; 2] = [3.0, 15.0];
pub const DEFAULT_SLOTS_PER_EPISODE: u64 = 2_000_000;
pub const DEFAULT_EPISODES: u32 = 5;
pub const DEFAULT_METRICS_STRIDE: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorEntry {
    /// Stream identity; defaults to the sensor's position in the list.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub id: Option<u64>,
    pub battery_capacity: u32,
    pub request_prob: f64,
    /// Drawn uniformly from `tolerance_range` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub aoi_cap: u32,
    pub harvest: EnergyHarvestModel,
}

impl Default for SensorEntry {
    fn default() -> Self {
        SensorEntry {
            id: None,
            battery_capacity: DEFAULT_BATTERY_CAPACITY,
            request_prob: DEFAULT_REQUEST_PROB,
            tolerance: None,
            aoi_cap: DEFAULT_AOI_CAP,
            harvest: EnergyHarvestModel::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub sensors: Vec<SensorEntry>,
    pub tolerance_range: [f64; 2],
    pub cost: CostParams,
    pub schedule: LearningSchedule,
    pub policies: Vec<PolicyKind>,
    pub slots_per_episode: u64,
    pub episodes: u32,
    pub master_seed: u64,
    pub beta_grid: Option<Vec<f64>>,
    pub metrics_stride: u64,
    /// Apply the Q-update on slots without a request as well.
    pub update_on_idle: bool,
}

impl Default for ConfigFile {
    fn default() -> Self {
        ConfigFile {
            sensors: vec![SensorEntry::default(); DEFAULT_NUM_SENSORS],
            tolerance_range: DEFAULT_TOLERANCE_RANGE,
            cost: CostParams::default(),
            schedule: LearningSchedule::default(),
            policies: PolicyKind::ALL.to_vec(),
            slots_per_episode: DEFAULT_SLOTS_PER_EPISODE,
            episodes: DEFAULT_EPISODES,
            master_seed: 0,
            beta_grid: None,
            metrics_stride: DEFAULT_METRICS_STRIDE,
            update_on_idle: true,
        }
    }
}

impl ConfigFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let mut de = serde_json::Deserializer::from_str(text);
        let parsed: ConfigFile = serde_path_to_error::deserialize(&mut de).map_err(|err| {
            let path = err.path().to_string();
            let inner = err.into_inner();
            match inner.classify() {
                serde_json::error::Category::Data => Error::invalid(path, inner.to_string()),
                _ => Error::MalformedConfig(inner.to_string()),
            }
        })?;
        de.end()
            .map_err(|e| Error::MalformedConfig(e.to_string()))?;
        Ok(parsed)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Validates the document and materializes per-sensor tolerances.
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let [lo, hi] = self.tolerance_range;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(Error::invalid(
                "tolerance_range",
                "must be [lo, hi] with 0 < lo <= hi",
            ));
        }
        if self.sensors.is_empty() {
            return Err(Error::invalid("sensors", "at least one sensor is required"));
        }
        let mut sensors = Vec::with_capacity(self.sensors.len());
        for (i, entry) in self.sensors.iter().enumerate() {
            let path = format!("sensors[{i}]");
            let id = entry.id.unwrap_or(i as u64);
            if sensors.iter().any(|s: &SensorSetup| s.id == id) {
                return Err(Error::invalid(
                    format!("{path}.id"),
                    format!("duplicate sensor id {id}"),
                ));
            }
            let tolerance = match entry.tolerance {
                Some(t) => t,
                None => {
                    let mut rng =
                        stream_rng(self.master_seed, EXPERIMENT_SCOPE, id, Stream::Tolerance);
                    if lo == hi {
                        lo
                    } else {
                        rng.gen_range(lo..=hi)
                    }
                }
            };
            let config = SensorConfig {
                battery_capacity: entry.battery_capacity,
                request_prob: entry.request_prob,
                tolerance,
                aoi_cap: entry.aoi_cap,
            };
            config.validate(&path)?;
            entry.harvest.validate(&format!("{path}.harvest"))?;
            sensors.push(SensorSetup {
                id,
                config,
                harvest: entry.harvest,
            });
        }

        let cfg = ExperimentConfig {
            sensors,
            tolerance_range: self.tolerance_range,
            cost: self.cost,
            schedule: self.schedule,
            policies: self.policies.clone(),
            slots_per_episode: self.slots_per_episode,
            episodes: self.episodes,
            master_seed: self.master_seed,
            beta_grid: self.beta_grid.clone(),
            metrics_stride: self.metrics_stride,
            update_on_idle: self.update_on_idle,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl From<&ExperimentConfig> for ConfigFile {
    /// Fully explicit document: ids and materialized tolerances included.
    fn from(cfg: &ExperimentConfig) -> Self {
        ConfigFile {
            sensors: cfg
                .sensors
                .iter()
                .map(|s| SensorEntry {
                    id: Some(s.id),
                    battery_capacity: s.config.battery_capacity,
                    request_prob: s.config.request_prob,
                    tolerance: Some(s.config.tolerance),
                    aoi_cap: s.config.aoi_cap,
                    harvest: s.harvest,
                })
                .collect(),
            tolerance_range: cfg.tolerance_range,
            cost: cfg.cost,
            schedule: cfg.schedule,
            policies: cfg.policies.clone(),
            slots_per_episode: cfg.slots_per_episode,
            episodes: cfg.episodes,
            master_seed: cfg.master_seed,
            beta_grid: cfg.beta_grid.clone(),
            metrics_stride: cfg.metrics_stride,
            update_on_idle: cfg.update_on_idle,
        }
    }
}

/// Reads, validates and resolves a configuration file.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    ConfigFile::load(path)?.resolve()
}

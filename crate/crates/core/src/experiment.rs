//! Episodes, multi-episode averaging and β-sweeps.
//!
//! Each sensor owns its request, harvest and exploration streams, seeded from
//! `(master_seed, episode, sensor id)`. Sensors never interact, so a joint
//! run and separate single-sensor runs produce identical per-sensor results,
//! and the same episode index gives every policy the same request and harvest
//! sample paths.

use rayon::prelude::*;
use serde::Serialize;

use crate::env::{
    env_step, sample_request, CostParams, EnergyHarvestModel, SensorConfig, SensorState,
    SlotOutcome,
};
use crate::error::{Error, Result};
use crate::policies::{
    build_policy, LearningSchedule, PolicyKind, PolicySetup, QTable, Transition, UpdatePolicy,
};
use crate::seed::{derive_seed, stream_rng, SimRng, Stream};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensorSetup {
    pub id: u64,
    pub config: SensorConfig,
    pub harvest: EnergyHarvestModel,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub sensors: Vec<SensorSetup>,
    pub tolerance_range: [f64; 2],
    pub cost: CostParams,
    pub schedule: LearningSchedule,
    pub policies: Vec<PolicyKind>,
    pub slots_per_episode: u64,
    pub episodes: u32,
    pub master_seed: u64,
    pub beta_grid: Option<Vec<f64>>,
    pub metrics_stride: u64,
    pub update_on_idle: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sensors.is_empty() {
            return Err(Error::invalid("sensors", "at least one sensor is required"));
        }
        for (i, s) in self.sensors.iter().enumerate() {
            s.config.validate(&format!("sensors[{i}]"))?;
            s.harvest.validate(&format!("sensors[{i}].harvest"))?;
        }
        self.cost.validate("cost")?;
        self.schedule.validate("schedule")?;
        if self.policies.is_empty() {
            return Err(Error::invalid(
                "policies",
                "at least one policy is required",
            ));
        }
        if self.slots_per_episode < 1 {
            return Err(Error::invalid("slots_per_episode", "must be at least 1"));
        }
        if self.episodes < 1 {
            return Err(Error::invalid("episodes", "must be at least 1"));
        }
        if self.metrics_stride < 1 {
            return Err(Error::invalid("metrics_stride", "must be at least 1"));
        }
        if let Some(grid) = &self.beta_grid {
            if grid.is_empty() {
                return Err(Error::invalid("beta_grid", "must not be empty"));
            }
            for (i, beta) in grid.iter().enumerate() {
                if !(0.0..=1.0).contains(beta) {
                    return Err(Error::invalid(
                        format!("beta_grid[{i}]"),
                        "must lie in [0, 1]",
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn with_beta(&self, beta: f64) -> Self {
        ExperimentConfig {
            cost: CostParams { beta, ..self.cost },
            ..self.clone()
        }
    }

    /// Seeds of every stream used by `episode`, in sensor order.
    pub fn episode_seeds(&self, episode: u64) -> Vec<StreamSeeds> {
        self.sensors
            .iter()
            .map(|s| StreamSeeds {
                episode,
                sensor_id: s.id,
                requests: derive_seed(self.master_seed, episode, s.id, Stream::Requests),
                harvest: derive_seed(self.master_seed, episode, s.id, Stream::Harvest),
                exploration: derive_seed(self.master_seed, episode, s.id, Stream::Exploration),
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StreamSeeds {
    pub episode: u64,
    pub sensor_id: u64,
    pub requests: u64,
    pub harvest: u64,
    pub exploration: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SensorMetrics {
    pub id: u64,
    pub cumulative_cost: f64,
    pub requests: u64,
    pub commands: u64,
    pub transmissions: u64,
    /// Commands that reached a sensor with an empty battery.
    pub empty_battery_commands: u64,
}

/// Running averages after `slot` slots.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub slot: u64,
    pub per_sensor: Vec<f64>,
    /// Sum of the per-sensor averages.
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetrics {
    pub policy: PolicyKind,
    pub beta: f64,
    pub episode: u64,
    pub slots: u64,
    pub sensors: Vec<SensorMetrics>,
    pub curve: Vec<CurvePoint>,
}

impl RunMetrics {
    pub fn per_sensor_average(&self) -> Vec<f64> {
        self.sensors
            .iter()
            .map(|s| s.cumulative_cost / self.slots as f64)
            .collect()
    }

    /// Time-average cost summed over sensors.
    pub fn average_cost(&self) -> f64 {
        self.per_sensor_average().iter().sum()
    }
}

#[derive(Debug, Clone)]
pub struct EpisodeResult {
    pub metrics: RunMetrics,
    /// Final table of each sensor for learning policies.
    pub q_tables: Vec<Option<QTable>>,
}

/// Per-slot view handed to an observer: sensor position, state before the
/// slot, the outcome and the sensor's Q-table after learning.
pub struct SlotRecord<'a> {
    pub slot: u64,
    pub sensor: usize,
    pub state: &'a SensorState,
    pub outcome: &'a SlotOutcome,
    pub q_table: Option<&'a QTable>,
}

struct SensorRun<'a> {
    setup: &'a SensorSetup,
    state: SensorState,
    policy: Box<dyn UpdatePolicy>,
    requests: SimRng,
    harvest: SimRng,
    exploration: SimRng,
    metrics: SensorMetrics,
}

impl<'a> SensorRun<'a> {
    fn new(
        cfg: &ExperimentConfig,
        setup: &'a SensorSetup,
        policy: PolicyKind,
        episode: u64,
    ) -> Self {
        let mut harvest = stream_rng(cfg.master_seed, episode, setup.id, Stream::Harvest);
        let state = SensorState::initial(&setup.config, &setup.harvest, &mut harvest);
        let policy = build_policy(
            policy,
            &PolicySetup {
                battery_capacity: setup.config.battery_capacity,
                aoi_cap: setup.config.aoi_cap,
                tolerance: setup.config.tolerance,
                schedule: cfg.schedule,
                update_on_idle: cfg.update_on_idle,
            },
        );
        SensorRun {
            setup,
            state,
            policy,
            requests: stream_rng(cfg.master_seed, episode, setup.id, Stream::Requests),
            harvest,
            exploration: stream_rng(cfg.master_seed, episode, setup.id, Stream::Exploration),
            metrics: SensorMetrics {
                id: setup.id,
                ..SensorMetrics::default()
            },
        }
    }

    fn step(&mut self, slot: u64, params: &CostParams) -> Result<SlotOutcome> {
        let cfg = &self.setup.config;
        let request = sample_request(cfg, &mut self.requests);
        let command = request
            && self
                .policy
                .command(slot, &self.state, &mut self.exploration);
        let outcome = env_step(
            &self.state,
            cfg,
            &self.setup.harvest,
            params,
            request,
            command,
            slot,
            &mut self.harvest,
        )?;
        self.policy.learn(
            slot,
            &Transition {
                state: self.state,
                request,
                command,
                cost: outcome.cost,
                next_state: outcome.next_state,
            },
        );

        let m = &mut self.metrics;
        m.cumulative_cost += outcome.cost;
        m.requests += u64::from(request);
        m.commands += u64::from(command);
        m.transmissions += u64::from(outcome.transmitted);
        m.empty_battery_commands += u64::from(command && self.state.battery == 0);
        Ok(outcome)
    }
}

pub fn run_episode(
    cfg: &ExperimentConfig,
    policy: PolicyKind,
    episode: u64,
) -> Result<EpisodeResult> {
    run_episode_observed(cfg, policy, episode, |_| {})
}

/// Runs one episode, calling `observer` after every sensor-slot.
pub fn run_episode_observed(
    cfg: &ExperimentConfig,
    policy: PolicyKind,
    episode: u64,
    mut observer: impl FnMut(&SlotRecord<'_>),
) -> Result<EpisodeResult> {
    cfg.validate()?;
    let mut runs: Vec<SensorRun<'_>> = cfg
        .sensors
        .iter()
        .map(|setup| SensorRun::new(cfg, setup, policy, episode))
        .collect();
    let mut curve = Vec::with_capacity((cfg.slots_per_episode / cfg.metrics_stride) as usize);

    for slot in 1..=cfg.slots_per_episode {
        for (k, run) in runs.iter_mut().enumerate() {
            let before = run.state;
            let outcome = run.step(slot, &cfg.cost)?;
            run.state = outcome.next_state;
            observer(&SlotRecord {
                slot,
                sensor: k,
                state: &before,
                outcome: &outcome,
                q_table: run.policy.q_table(),
            });
        }
        if slot % cfg.metrics_stride == 0 {
            let per_sensor: Vec<f64> = runs
                .iter()
                .map(|r| r.metrics.cumulative_cost / slot as f64)
                .collect();
            curve.push(CurvePoint {
                slot,
                total: per_sensor.iter().sum(),
                per_sensor,
            });
        }
    }

    let q_tables = runs.iter().map(|r| r.policy.q_table().cloned()).collect();
    Ok(EpisodeResult {
        metrics: RunMetrics {
            policy,
            beta: cfg.cost.beta,
            episode,
            slots: cfg.slots_per_episode,
            sensors: runs.into_iter().map(|r| r.metrics).collect(),
            curve,
        },
        q_tables,
    })
}

/// Mean and standard deviation across episodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    /// Sample standard deviation; zero for a single value.
    pub fn of(values: &[f64]) -> Stat {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Stat { mean, std }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentSummary {
    pub policy: PolicyKind,
    pub beta: f64,
    pub episodes: Vec<RunMetrics>,
    /// Final average cost across episodes.
    pub final_cost: Stat,
    /// `(slot, stat)` of the total running average at every sample point.
    pub mean_curve: Vec<(u64, Stat)>,
    /// Final tables of episode 0.
    pub q_tables: Vec<Option<QTable>>,
}

impl ExperimentSummary {
    fn from_episodes(policy: PolicyKind, beta: f64, results: Vec<EpisodeResult>) -> Self {
        let finals: Vec<f64> = results.iter().map(|r| r.metrics.average_cost()).collect();
        let points = results[0].metrics.curve.len();
        let mean_curve = (0..points)
            .map(|i| {
                let at: Vec<f64> = results.iter().map(|r| r.metrics.curve[i].total).collect();
                (results[0].metrics.curve[i].slot, Stat::of(&at))
            })
            .collect();
        let q_tables = results[0].q_tables.clone();
        ExperimentSummary {
            policy,
            beta,
            final_cost: Stat::of(&finals),
            mean_curve,
            q_tables,
            episodes: results.into_iter().map(|r| r.metrics).collect(),
        }
    }
}

pub fn run_experiment(cfg: &ExperimentConfig, policy: PolicyKind) -> Result<ExperimentSummary> {
    Ok(run_grid(cfg, &[cfg.cost.beta], &[policy])?.remove(0))
}

/// Runs every `(beta, policy)` combination for `cfg.episodes` episodes.
/// Episodes run in parallel; results come back in `(beta, policy)` order
/// regardless of scheduling.
pub fn run_grid(
    cfg: &ExperimentConfig,
    betas: &[f64],
    policies: &[PolicyKind],
) -> Result<Vec<ExperimentSummary>> {
    cfg.validate()?;
    let configs: Vec<ExperimentConfig> = betas.iter().map(|&b| cfg.with_beta(b)).collect();
    for (i, c) in configs.iter().enumerate() {
        c.cost
            .validate("cost")
            .map_err(|_| Error::invalid(format!("beta_grid[{i}]"), "must lie in [0, 1]"))?;
    }
    let tasks: Vec<(usize, PolicyKind, u64)> = (0..configs.len())
        .flat_map(|b| {
            policies
                .iter()
                .flat_map(move |&p| (0..u64::from(cfg.episodes)).map(move |e| (b, p, e)))
        })
        .collect();
    let mut results = tasks
        .par_iter()
        .map(|&(b, p, e)| run_episode(&configs[b], p, e))
        .collect::<Result<Vec<_>>>()?
        .into_iter();

    let mut summaries = Vec::with_capacity(betas.len() * policies.len());
    for &beta in betas {
        for &policy in policies {
            let episodes: Vec<EpisodeResult> =
                results.by_ref().take(cfg.episodes as usize).collect();
            summaries.push(ExperimentSummary::from_episodes(policy, beta, episodes));
        }
    }
    Ok(summaries)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub beta: f64,
    pub policy: PolicyKind,
    pub mean_avg_cost: f64,
    pub std: f64,
    /// Mean cost divided by the random policy's mean cost at the same β.
    pub normalized_avg_cost: f64,
}

/// Runs the configured policies over `beta_grid`. The random policy is
/// always simulated for normalization but only reported if requested.
pub fn beta_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    let grid = cfg
        .beta_grid
        .clone()
        .ok_or_else(|| Error::invalid("beta_grid", "a β-sweep needs a non-empty grid"))?;
    let summaries = run_grid(cfg, &grid, &with_random(&cfg.policies))?;
    Ok(sweep_rows(&grid, &cfg.policies, &summaries))
}

pub(crate) fn with_random(policies: &[PolicyKind]) -> Vec<PolicyKind> {
    let mut all = policies.to_vec();
    if !all.contains(&PolicyKind::Random) {
        all.push(PolicyKind::Random);
    }
    all
}

/// Builds sweep rows for `policies` from summaries that also cover the random
/// policy at every β.
pub fn sweep_rows(
    grid: &[f64],
    policies: &[PolicyKind],
    summaries: &[ExperimentSummary],
) -> Vec<SweepRow> {
    let find = |beta: f64, policy: PolicyKind| {
        summaries
            .iter()
            .find(|s| s.beta == beta && s.policy == policy)
            .expect("summary for every (beta, policy)")
    };
    let mut rows = Vec::with_capacity(grid.len() * policies.len());
    for &beta in grid {
        let random = find(beta, PolicyKind::Random).final_cost.mean;
        for &policy in policies {
            let stat = find(beta, policy).final_cost;
            rows.push(SweepRow {
                beta,
                policy,
                mean_avg_cost: stat.mean,
                std: stat.std,
                normalized_avg_cost: if random > 0.0 {
                    stat.mean / random
                } else {
                    f64::NAN
                },
            });
        }
    }
    rows
}

//! Decision making at the edge node.
//!
//! Every policy implements [`UpdatePolicy`]. The runner only asks a policy
//! for a command on request slots; on idle slots the command is forced to 0.
//! Learning policies are then shown every transition through
//! [`UpdatePolicy::learn`].

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::SensorState;
use crate::error::{Error, Result};
use crate::seed::SimRng;

/// What the controller conditions on: a battery level and the age of the
/// cached value. The partial-knowledge agent sees the battery reported in the
/// last update, the genie-aided one sees the true level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ObservedState {
    pub cached_battery: u32,
    pub aoi: u32,
}

/// Which battery level a Q-learning agent observes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observation {
    CachedBattery,
    TrueBattery,
}

impl Observation {
    pub fn observe(self, state: &SensorState) -> ObservedState {
        let battery = match self {
            Observation::CachedBattery => state.cached_battery,
            Observation::TrueBattery => state.battery,
        };
        ObservedState {
            cached_battery: battery,
            aoi: state.aoi,
        }
    }
}

/// Dense action-value table over `(battery, aoi) x {0, 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    battery_capacity: u32,
    aoi_cap: u32,
    values: Vec<[f64; 2]>,
}

impl QTable {
    pub fn new(battery_capacity: u32, aoi_cap: u32) -> Self {
        let states = (battery_capacity as usize + 1) * aoi_cap as usize;
        QTable {
            battery_capacity,
            aoi_cap,
            values: vec![[0.0; 2]; states],
        }
    }

    pub fn battery_capacity(&self) -> u32 {
        self.battery_capacity
    }

    pub fn aoi_cap(&self) -> u32 {
        self.aoi_cap
    }

    pub fn num_states(&self) -> usize {
        self.values.len()
    }

    pub fn index(&self, s: ObservedState) -> usize {
        debug_assert!(s.cached_battery <= self.battery_capacity);
        debug_assert!((1..=self.aoi_cap).contains(&s.aoi));
        s.cached_battery as usize * self.aoi_cap as usize + (s.aoi as usize - 1)
    }

    pub fn state_at(&self, index: usize) -> ObservedState {
        let cap = self.aoi_cap as usize;
        ObservedState {
            cached_battery: (index / cap) as u32,
            aoi: (index % cap) as u32 + 1,
        }
    }

    pub fn states(&self) -> impl Iterator<Item = ObservedState> + '_ {
        (0..self.values.len()).map(|i| self.state_at(i))
    }

    pub fn get(&self, s: ObservedState, action: bool) -> f64 {
        self.values[self.index(s)][usize::from(action)]
    }

    pub fn set(&mut self, s: ObservedState, action: bool, value: f64) {
        let i = self.index(s);
        self.values[i][usize::from(action)] = value;
    }

    pub fn values(&self) -> &[[f64; 2]] {
        &self.values
    }

    pub fn min_value(&self, s: ObservedState) -> f64 {
        let [q0, q1] = self.values[self.index(s)];
        q0.min(q1)
    }

    /// Greedy action; ties go to 0 (no transmission).
    pub fn greedy_action(&self, s: ObservedState) -> bool {
        let [q0, q1] = self.values[self.index(s)];
        q1 < q0
    }

    pub fn scaled(&self, factor: f64) -> QTable {
        QTable {
            values: self
                .values
                .iter()
                .map(|[a, b]| [a * factor, b * factor])
                .collect(),
            ..*self
        }
    }

    /// CSV snapshot: `cached_battery,aoi,q_value_a0,q_value_a1`, one row per
    /// state in index order.
    pub fn write_csv<W: Write>(&self, writer: W) -> csv::Result<()> {
        let mut out = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(writer);
        out.write_record(["cached_battery", "aoi", "q_value_a0", "q_value_a1"])?;
        for (i, [q0, q1]) in self.values.iter().enumerate() {
            let s = self.state_at(i);
            out.write_record([
                s.cached_battery.to_string(),
                s.aoi.to_string(),
                q0.to_string(),
                q1.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Exploration and learning-rate schedules, both driven by the global slot
/// counter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearningSchedule {
    pub eps_floor: f64,
    pub eps_scale: f64,
    pub eps_decay: f64,
    pub alpha_early: f64,
    pub alpha_late: f64,
    /// Last slot (inclusive) that uses `alpha_early`.
    pub alpha_switch_slot: u64,
    pub discount: f64,
}

impl Default for LearningSchedule {
    fn default() -> Self {
        LearningSchedule {
            eps_floor: 0.02,
            eps_scale: 0.98,
            eps_decay: 0.01,
            alpha_early: 0.5,
            alpha_late: 0.1,
            alpha_switch_slot: 100,
            discount: 0.99,
        }
    }
}

impl LearningSchedule {
    pub fn validate(&self, path: &str) -> Result<()> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !unit(self.eps_floor) || !unit(self.eps_scale) || self.eps_floor + self.eps_scale > 1.0 {
            return Err(Error::invalid(
                format!("{path}.eps_scale"),
                "eps_floor and eps_scale must be in [0, 1] with a sum of at most 1",
            ));
        }
        if !(self.eps_decay >= 0.0 && self.eps_decay.is_finite()) {
            return Err(Error::invalid(
                format!("{path}.eps_decay"),
                "must be finite and non-negative",
            ));
        }
        if !unit(self.alpha_early) {
            return Err(Error::invalid(
                format!("{path}.alpha_early"),
                "must lie in [0, 1]",
            ));
        }
        if !unit(self.alpha_late) {
            return Err(Error::invalid(
                format!("{path}.alpha_late"),
                "must lie in [0, 1]",
            ));
        }
        if !(self.discount > 0.0 && self.discount <= 1.0) {
            return Err(Error::invalid(
                format!("{path}.discount"),
                "must lie in (0, 1]",
            ));
        }
        Ok(())
    }

    pub fn epsilon_at(&self, slot: u64) -> f64 {
        self.eps_floor + self.eps_scale * (-self.eps_decay * slot as f64).exp()
    }

    pub fn alpha_at(&self, slot: u64) -> f64 {
        if slot <= self.alpha_switch_slot {
            self.alpha_early
        } else {
            self.alpha_late
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    /// Q-learning on the battery level reported in the last update.
    QLearning,
    /// Q-learning that observes the true battery level.
    QLearningGenie,
    Greedy,
    Threshold,
    Random,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 5] = [
        PolicyKind::QLearning,
        PolicyKind::QLearningGenie,
        PolicyKind::Greedy,
        PolicyKind::Threshold,
        PolicyKind::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::QLearning => "q_learning",
            PolicyKind::QLearningGenie => "q_learning_genie",
            PolicyKind::Greedy => "greedy",
            PolicyKind::Threshold => "threshold",
            PolicyKind::Random => "random",
        }
    }

    pub fn is_learning(self) -> bool {
        matches!(self, PolicyKind::QLearning | PolicyKind::QLearningGenie)
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = PolicyKind::ALL.iter().map(|k| k.name()).collect();
                format!(
                    "unknown policy `{s}` (expected one of {})",
                    names.join(", ")
                )
            })
    }
}

/// Epsilon-greedy choice: exploit the argmin of `Q(s, .)` with probability
/// `1 - eps`, otherwise pick an action uniformly.
pub fn select_action<R: Rng + ?Sized>(q: &QTable, s: ObservedState, eps: f64, rng: &mut R) -> bool {
    if rng.gen::<f64>() < eps {
        rng.gen::<bool>()
    } else {
        q.greedy_action(s)
    }
}

/// One tabular Q-learning backup; returns the new value of `Q(s, a)`.
pub fn q_update(
    q: &mut QTable,
    s: ObservedState,
    action: bool,
    cost: f64,
    s_next: ObservedState,
    alpha: f64,
    gamma: f64,
) -> f64 {
    let target = cost + gamma * q.min_value(s_next);
    let value = (1.0 - alpha) * q.get(s, action) + alpha * target;
    q.set(s, action, value);
    value
}

/// Command issued by a non-learning policy.
pub fn baseline_action<R: Rng + ?Sized>(
    kind: PolicyKind,
    request: bool,
    aoi: u32,
    tolerance: f64,
    rng: &mut R,
) -> Result<bool> {
    if !request {
        return match kind {
            PolicyKind::QLearning | PolicyKind::QLearningGenie => Err(not_a_baseline(kind)),
            _ => Ok(false),
        };
    }
    match kind {
        PolicyKind::Greedy => Ok(true),
        PolicyKind::Threshold => Ok(f64::from(aoi) + 1.0 > tolerance),
        PolicyKind::Random => Ok(rng.gen::<bool>()),
        PolicyKind::QLearning | PolicyKind::QLearningGenie => Err(not_a_baseline(kind)),
    }
}

fn not_a_baseline(kind: PolicyKind) -> Error {
    Error::ContractViolation(format!("{kind} is a learning policy, not a baseline"))
}

/// Common interface of every controller. One instance controls one sensor.
pub trait UpdatePolicy: Send {
    fn kind(&self) -> PolicyKind;

    /// Command for a slot in which the sensor's value was requested.
    fn command(&mut self, slot: u64, state: &SensorState, rng: &mut SimRng) -> bool;

    /// Observes the transition of `slot`.
    fn learn(&mut self, _slot: u64, _transition: &Transition) {}

    fn q_table(&self) -> Option<&QTable> {
        None
    }
}

/// A completed slot as seen by a learning policy.
#[derive(Debug, Clone, Copy)]
pub struct Transition {
    pub state: SensorState,
    pub request: bool,
    pub command: bool,
    pub cost: f64,
    pub next_state: SensorState,
}

/// Tabular Q-learning controller.
///
/// With `update_on_idle` every slot is a learning step, idle slots included
/// (their command is forced to 0). Without it, only request slots are
/// decision epochs: the update for one request slot is applied at the next
/// request slot, bootstrapping from the state observed there. Idle slots cost
/// nothing, so the cost of the epoch is the cost of its request slot.
pub struct QLearningAgent {
    table: QTable,
    schedule: LearningSchedule,
    observation: Observation,
    update_on_idle: bool,
    pending: Option<(ObservedState, bool, f64)>,
}

impl QLearningAgent {
    pub fn new(
        battery_capacity: u32,
        aoi_cap: u32,
        schedule: LearningSchedule,
        observation: Observation,
        update_on_idle: bool,
    ) -> Self {
        QLearningAgent {
            table: QTable::new(battery_capacity, aoi_cap),
            schedule,
            observation,
            update_on_idle,
            pending: None,
        }
    }

    pub fn into_table(self) -> QTable {
        self.table
    }
}

impl UpdatePolicy for QLearningAgent {
    fn kind(&self) -> PolicyKind {
        match self.observation {
            Observation::CachedBattery => PolicyKind::QLearning,
            Observation::TrueBattery => PolicyKind::QLearningGenie,
        }
    }

    fn command(&mut self, slot: u64, state: &SensorState, rng: &mut SimRng) -> bool {
        let eps = self.schedule.epsilon_at(slot);
        select_action(&self.table, self.observation.observe(state), eps, rng)
    }

    fn learn(&mut self, slot: u64, t: &Transition) {
        let alpha = self.schedule.alpha_at(slot);
        let gamma = self.schedule.discount;
        let state = self.observation.observe(&t.state);
        if self.update_on_idle {
            let next = self.observation.observe(&t.next_state);
            q_update(
                &mut self.table,
                state,
                t.command,
                t.cost,
                next,
                alpha,
                gamma,
            );
            return;
        }
        if !t.request {
            return;
        }
        if let Some((prev, command, cost)) = self.pending.take() {
            q_update(&mut self.table, prev, command, cost, state, alpha, gamma);
        }
        self.pending = Some((state, t.command, t.cost));
    }

    fn q_table(&self) -> Option<&QTable> {
        Some(&self.table)
    }
}

/// Greedy, threshold or random baseline.
pub struct Baseline {
    kind: PolicyKind,
    tolerance: f64,
}

impl Baseline {
    pub fn new(kind: PolicyKind, tolerance: f64) -> Result<Self> {
        if kind.is_learning() {
            return Err(not_a_baseline(kind));
        }
        Ok(Baseline { kind, tolerance })
    }
}

impl UpdatePolicy for Baseline {
    fn kind(&self) -> PolicyKind {
        self.kind
    }

    fn command(&mut self, _slot: u64, state: &SensorState, rng: &mut SimRng) -> bool {
        baseline_action(self.kind, true, state.aoi, self.tolerance, rng)
            .expect("constructor rejects learning kinds")
    }
}

/// Everything needed to instantiate a policy for one sensor.
#[derive(Debug, Clone, Copy)]
pub struct PolicySetup {
    pub battery_capacity: u32,
    pub aoi_cap: u32,
    pub tolerance: f64,
    pub schedule: LearningSchedule,
    pub update_on_idle: bool,
}

pub fn build_policy(kind: PolicyKind, setup: &PolicySetup) -> Box<dyn UpdatePolicy> {
    let agent = |observation| {
        Box::new(QLearningAgent::new(
            setup.battery_capacity,
            setup.aoi_cap,
            setup.schedule,
            observation,
            setup.update_on_idle,
        ))
    };
    match kind {
        PolicyKind::QLearning => agent(Observation::CachedBattery),
        PolicyKind::QLearningGenie => agent(Observation::TrueBattery),
        _ => Box::new(Baseline::new(kind, setup.tolerance).expect("baseline kind")),
    }
}

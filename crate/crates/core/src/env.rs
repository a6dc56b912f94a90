//! Per-slot dynamics of one energy-harvesting sensor and its cache entry.
//!
//! Within a slot the order is fixed: the request bit is drawn, the policy
//! chooses a command, the sensor transmits if commanded and its battery is
//! non-empty, then energy arrival, battery, age and cost are resolved. Energy
//! harvested during a slot only becomes usable in the next one.
//!
//! Every random draw is one uniform `f64` compared against a probability, so a
//! recorded tape of uniforms fully determines a trajectory.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_BATTERY_CAPACITY: u32 = 10;
pub const DEFAULT_REQUEST_PROB: f64 = 0.1;
pub const DEFAULT_AOI_CAP: u32 = 64;

const ROW_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorConfig {
    /// Battery size in energy units.
    pub battery_capacity: u32,
    /// Probability that the sensor's value is requested in a slot.
    pub request_prob: f64,
    /// Age the application tolerates before the penalty exceeds one.
    pub tolerance: f64,
    /// Ages are clamped to this value in the dynamics, cost and state index.
    pub aoi_cap: u32,
}

impl SensorConfig {
    pub fn validate(&self, path: &str) -> Result<()> {
        if self.battery_capacity < 1 {
            return Err(Error::invalid(
                format!("{path}.battery_capacity"),
                "must be at least 1",
            ));
        }
        if !(0.0..=1.0).contains(&self.request_prob) {
            return Err(Error::invalid(
                format!("{path}.request_prob"),
                "must lie in [0, 1]",
            ));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::invalid(
                format!("{path}.tolerance"),
                "must be positive and finite",
            ));
        }
        if self.aoi_cap < 1 {
            return Err(Error::invalid(
                format!("{path}.aoi_cap"),
                "must be at least 1",
            ));
        }
        Ok(())
    }
}

/// State of the hidden two-state harvesting chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HarvestState {
    Good,
    Bad,
}

impl HarvestState {
    pub const ALL: [HarvestState; 2] = [HarvestState::Good, HarvestState::Bad];

    pub fn index(self) -> usize {
        match self {
            HarvestState::Good => 0,
            HarvestState::Bad => 1,
        }
    }

    pub fn from_index(index: usize) -> Self {
        match index {
            0 => HarvestState::Good,
            _ => HarvestState::Bad,
        }
    }
}

/// Two-state Markov-modulated Bernoulli energy arrivals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergyHarvestModel {
    /// Per-slot probability of harvesting one unit in each chain state.
    pub harvest_prob: [f64; 2],
    /// Row-stochastic matrix: `transition[i][j]` is the probability of moving
    /// from state `i` to state `j`.
    pub transition: [[f64; 2]; 2],
}

impl Default for EnergyHarvestModel {
    fn default() -> Self {
        EnergyHarvestModel {
            harvest_prob: [0.04, 0.0004],
            transition: [[0.7, 0.3], [0.6, 0.4]],
        }
    }
}

impl EnergyHarvestModel {
    /// Harvests one unit every slot regardless of the chain state.
    pub fn always_harvest() -> Self {
        EnergyHarvestModel {
            harvest_prob: [1.0, 1.0],
            transition: [[1.0, 0.0], [0.0, 1.0]],
        }
    }

    pub fn validate(&self, path: &str) -> Result<()> {
        for (i, p) in self.harvest_prob.iter().enumerate() {
            if !(0.0..=1.0).contains(p) {
                return Err(Error::invalid(
                    format!("{path}.harvest_prob[{i}]"),
                    "must lie in [0, 1]",
                ));
            }
        }
        for (i, row) in self.transition.iter().enumerate() {
            for (j, p) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(p) {
                    return Err(Error::invalid(
                        format!("{path}.transition[{i}][{j}]"),
                        "must lie in [0, 1]",
                    ));
                }
            }
            if (row[0] + row[1] - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::invalid(
                    format!("{path}.transition[{i}]"),
                    "row must sum to 1",
                ));
            }
        }
        Ok(())
    }

    /// Stationary distribution of the chain. A chain that never switches has
    /// no unique one; the uniform distribution is returned in that case.
    pub fn stationary(&self) -> [f64; 2] {
        let leave_good = self.transition[0][1];
        let leave_bad = self.transition[1][0];
        let total = leave_good + leave_bad;
        if total == 0.0 {
            return [0.5, 0.5];
        }
        [leave_bad / total, leave_good / total]
    }

    /// Long-run expected energy arrivals per slot.
    pub fn mean_harvest_rate(&self) -> f64 {
        let pi = self.stationary();
        pi[0] * self.harvest_prob[0] + pi[1] * self.harvest_prob[1]
    }

    pub fn sample_initial<R: Rng + ?Sized>(&self, rng: &mut R) -> HarvestState {
        if rng.gen::<f64>() < self.stationary()[0] {
            HarvestState::Good
        } else {
            HarvestState::Bad
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SensorState {
    /// True battery level at the beginning of the slot.
    pub battery: u32,
    /// Battery level reported in the last received status update.
    pub cached_battery: u32,
    /// Age of the cached value at the beginning of the slot.
    pub aoi: u32,
    pub eh_state: HarvestState,
    /// Slot in which the last status update was received.
    pub last_update_slot: u64,
}

impl SensorState {
    /// Full battery, fresh cache, chain state drawn from its stationary law.
    pub fn initial<R: Rng + ?Sized>(
        cfg: &SensorConfig,
        eh: &EnergyHarvestModel,
        rng: &mut R,
    ) -> Self {
        SensorState {
            battery: cfg.battery_capacity,
            cached_battery: cfg.battery_capacity,
            aoi: 1,
            eh_state: eh.sample_initial(rng),
            last_update_slot: 0,
        }
    }

    pub fn check(&self, cfg: &SensorConfig) -> Result<()> {
        if self.battery > cfg.battery_capacity
            || self.cached_battery > cfg.battery_capacity
            || self.aoi < 1
            || self.aoi > cfg.aoi_cap
        {
            return Err(Error::ContractViolation(format!(
                "state {self:?} outside bounds of {cfg:?}"
            )));
        }
        Ok(())
    }
}

/// What the edge node receives when a sensor transmits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatusUpdatePacket {
    /// Opaque measurement handle; the sensed value itself is not modelled.
    pub payload: u64,
    pub generation_slot: u64,
    pub reported_battery: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostParams {
    /// Weight of staleness against energy, in [0, 1].
    pub beta: f64,
    /// Exponent of the age penalty, at least 1.
    pub mu: f64,
}

impl Default for CostParams {
    fn default() -> Self {
        CostParams { beta: 0.6, mu: 2.0 }
    }
}

impl CostParams {
    pub fn validate(&self, path: &str) -> Result<()> {
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::invalid(format!("{path}.beta"), "must lie in [0, 1]"));
        }
        if !(self.mu >= 1.0 && self.mu.is_finite()) {
            return Err(Error::invalid(
                format!("{path}.mu"),
                "must be finite and at least 1",
            ));
        }
        Ok(())
    }

    /// Largest cost a single slot can produce for a sensor with `tolerance`
    /// and ages capped at `aoi_cap`.
    pub fn max_slot_cost(&self, tolerance: f64, aoi_cap: u32) -> f64 {
        (1.0 - self.beta) + self.beta * age_penalty(aoi_cap, tolerance, self.mu)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlotOutcome {
    pub request: bool,
    pub command: bool,
    pub transmitted: bool,
    pub energy_arrival: bool,
    pub cost: f64,
    pub packet: Option<StatusUpdatePacket>,
    pub next_state: SensorState,
}

pub fn sample_request<R: Rng + ?Sized>(cfg: &SensorConfig, rng: &mut R) -> bool {
    rng.gen::<f64>() < cfg.request_prob
}

/// Draws this slot's energy arrival from the current chain state, then moves
/// the chain.
pub fn harvest_step<R: Rng + ?Sized>(
    model: &EnergyHarvestModel,
    eh_state: HarvestState,
    rng: &mut R,
) -> (bool, HarvestState) {
    let row = eh_state.index();
    let arrival = rng.gen::<f64>() < model.harvest_prob[row];
    let next = if rng.gen::<f64>() < model.transition[row][0] {
        HarvestState::Good
    } else {
        HarvestState::Bad
    };
    (arrival, next)
}

/// A commanded sensor transmits only with a non-empty battery.
pub fn transmit_decision(command: bool, battery: u32) -> bool {
    command && battery > 0
}

pub fn battery_step(
    battery: u32,
    energy_arrival: bool,
    transmitted: bool,
    capacity: u32,
) -> Result<u32> {
    if transmitted && battery == 0 {
        return Err(Error::ContractViolation(
            "transmission from an empty battery".into(),
        ));
    }
    if battery > capacity {
        return Err(Error::ContractViolation(format!(
            "battery {battery} above capacity {capacity}"
        )));
    }
    let level = battery + u32::from(energy_arrival) - u32::from(transmitted);
    Ok(level.min(capacity))
}

pub fn aoi_step(aoi: u32, transmitted: bool, aoi_cap: u32) -> u32 {
    if transmitted {
        1
    } else {
        (aoi + 1).min(aoi_cap)
    }
}

/// `(next_aoi / tolerance)^mu`
pub fn age_penalty(next_aoi: u32, tolerance: f64, mu: f64) -> f64 {
    (f64::from(next_aoi) / tolerance).powf(mu)
}

pub fn slot_cost(params: &CostParams, transmitted: bool, request: bool, penalty: f64) -> f64 {
    let energy = if transmitted { 1.0 - params.beta } else { 0.0 };
    let staleness = if request { params.beta * penalty } else { 0.0 };
    energy + staleness
}

/// Advances one sensor by one slot. `rng` is the sensor's harvest stream.
#[allow(clippy::too_many_arguments)]
pub fn env_step<R: Rng + ?Sized>(
    state: &SensorState,
    cfg: &SensorConfig,
    eh_model: &EnergyHarvestModel,
    params: &CostParams,
    request: bool,
    command: bool,
    slot: u64,
    rng: &mut R,
) -> Result<SlotOutcome> {
    let transmitted = transmit_decision(command, state.battery);
    let (energy_arrival, eh_state) = harvest_step(eh_model, state.eh_state, rng);
    let battery = battery_step(
        state.battery,
        energy_arrival,
        transmitted,
        cfg.battery_capacity,
    )?;
    let aoi = aoi_step(state.aoi, transmitted, cfg.aoi_cap);
    let cost = slot_cost(
        params,
        transmitted,
        request,
        age_penalty(aoi, cfg.tolerance, params.mu),
    );

    let packet = transmitted.then_some(StatusUpdatePacket {
        payload: slot,
        generation_slot: slot,
        reported_battery: state.battery,
    });
    let (cached_battery, last_update_slot) = match packet {
        Some(p) => (p.reported_battery, p.generation_slot),
        None => (state.cached_battery, state.last_update_slot),
    };

    Ok(SlotOutcome {
        request,
        command,
        transmitted,
        energy_arrival,
        cost,
        packet,
        next_state: SensorState {
            battery,
            cached_battery,
            aoi,
            eh_state,
            last_update_slot,
        },
    })
}


#[cfg(test)]
mod tests {
    use super::tape::TapeRng;
    use super::*;
    use crate::seed::SimRng;
    use rand::SeedableRng;

    fn default_sensor(tolerance: f64) -> SensorConfig {
        SensorConfig {
            battery_capacity: 10,
            request_prob: 0.1,
            tolerance,
            aoi_cap: 64,
        }
    }

    #[test]
    fn degenerate_request_probabilities() {
        let mut rng = SimRng::seed_from_u64(1);
        let mut cfg = default_sensor(5.0);
        cfg.request_prob = 0.0;
        assert!((0..1000).all(|_| !sample_request(&cfg, &mut rng)));
        cfg.request_prob = 1.0;
        assert!((0..1000).all(|_| sample_request(&cfg, &mut rng)));
    }

    #[test]
    fn request_rate_matches_probability() {
        let mut rng = SimRng::seed_from_u64(2);
        let cfg = default_sensor(5.0);
        let n = 1_000_000;
        let hits = (0..n).filter(|_| sample_request(&cfg, &mut rng)).count();
        let mean = hits as f64 / n as f64;
        // 3 sigma of Binomial(1e6, 0.1) is 9e-4
        assert!((mean - 0.1).abs() <= 1e-3, "mean {mean}");
    }

    #[test]
    fn certain_harvest_in_good_state() {
        let mut rng = SimRng::seed_from_u64(3);
        let model = EnergyHarvestModel {
            harvest_prob: [1.0, 0.0],
            ..EnergyHarvestModel::default()
        };
        for _ in 0..100 {
            assert!(harvest_step(&model, HarvestState::Good, &mut rng).0);
        }
    }

    #[test]
    fn stationary_distribution_of_default_chain() {
        // pi_1 = 0.7 pi_1 + 0.6 pi_2 with pi_1 + pi_2 = 1 gives (2/3, 1/3).
        let pi = EnergyHarvestModel::default().stationary();
        assert!((pi[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((pi[1] - 1.0 / 3.0).abs() < 1e-15);
        let rate = EnergyHarvestModel::default().mean_harvest_rate();
        assert!((rate - (2.0 / 3.0 * 0.04 + 1.0 / 3.0 * 0.0004)).abs() < 1e-15);
        assert!((rate - 0.0268).abs() < 1e-12);
    }

    #[test]
    fn long_run_harvest_rate_matches_stationary_arithmetic() {
        let model = EnergyHarvestModel::default();
        let mut rng = SimRng::seed_from_u64(4);
        let mut state = model.sample_initial(&mut rng);
        let n = 10_000_000u64;
        let mut arrivals = 0u64;
        let mut good = 0u64;
        for _ in 0..n {
            if state == HarvestState::Good {
                good += 1;
            }
            let (e, next) = harvest_step(&model, state, &mut rng);
            arrivals += u64::from(e);
            state = next;
        }
        let rate = arrivals as f64 / n as f64;
        let expected = model.mean_harvest_rate();
        // Arrivals are positively correlated through the chain; the i.i.d.
        // binomial sigma is inflated by sqrt(1 + 2 rho / (1 - rho)) with the
        // chain's second eigenvalue rho = 0.1.
        let sigma = (expected * (1.0 - expected) / n as f64).sqrt() * (1.0 + 0.2 / 0.9f64).sqrt();
        assert!(
            (rate - expected).abs() <= 3.0 * sigma,
            "rate {rate} vs {expected}"
        );
        let frac_good = good as f64 / n as f64;
        assert!(
            (frac_good - 2.0 / 3.0).abs() < 1e-3,
            "good fraction {frac_good}"
        );
    }

    #[test]
    fn transmit_requires_command_and_energy() {
        assert!(!transmit_decision(true, 0));
        assert!(transmit_decision(true, 3));
        assert!(!transmit_decision(false, 5));
    }

    #[test]
    fn battery_evolution() {
        assert_eq!(battery_step(5, false, true, 10).unwrap(), 4);
        assert_eq!(battery_step(10, true, false, 10).unwrap(), 10);
        assert_eq!(battery_step(0, true, false, 10).unwrap(), 1);
        assert_eq!(battery_step(1, true, true, 10).unwrap(), 1);
        assert!(matches!(
            battery_step(0, true, true, 10),
            Err(Error::ContractViolation(_))
        ));
    }

    #[test]
    fn aoi_evolution() {
        assert_eq!(aoi_step(7, false, 64), 8);
        assert_eq!(aoi_step(7, true, 64), 1);
        assert_eq!(aoi_step(64, false, 64), 64);
    }

    #[test]
    fn penalty_values() {
        assert_eq!(age_penalty(15, 15.0, 2.0), 1.0);
        assert_eq!(age_penalty(6, 3.0, 2.0), 4.0);
        assert_eq!(age_penalty(1, 1.0, 1.0), 1.0);
        assert_eq!(age_penalty(9, 1.0, 1.0), 9.0);
    }

    #[test]
    fn cost_values() {
        let p = CostParams { beta: 0.6, mu: 2.0 };
        assert!((slot_cost(&p, true, true, 1.0) - 1.0).abs() < 1e-15);
        assert_eq!(slot_cost(&p, false, false, 123.0), 0.0);
        let p1 = CostParams { beta: 1.0, mu: 2.0 };
        assert_eq!(slot_cost(&p1, true, true, 4.0), 4.0);
    }

    #[test]
    fn command_to_empty_battery_is_wasted() {
        let cfg = SensorConfig {
            tolerance: 4.0,
            ..default_sensor(4.0)
        };
        let params = CostParams::default();
        let state = SensorState {
            battery: 0,
            cached_battery: 2,
            aoi: 4,
            eh_state: HarvestState::Good,
            last_update_slot: 3,
        };
        // no arrival, stay in Good
        let mut rng = TapeRng::new(vec![0.9, 0.1]);
        let out = env_step(
            &state,
            &cfg,
            &EnergyHarvestModel::default(),
            &params,
            true,
            true,
            8,
            &mut rng,
        )
        .unwrap();
        assert!(!out.transmitted);
        assert!(out.packet.is_none());
        assert_eq!(out.next_state.aoi, 5);
        assert_eq!(out.next_state.cached_battery, 2);
        assert_eq!(out.next_state.last_update_slot, 3);
        assert!((out.cost - 0.6 * (5.0f64 / 4.0).powi(2)).abs() < 1e-12);
    }

    #[test]
    fn successful_update_reports_pre_step_battery() {
        let cfg = default_sensor(4.0);
        let params = CostParams::default();
        let state = SensorState {
            battery: 3,
            cached_battery: 3,
            aoi: 9,
            eh_state: HarvestState::Bad,
            last_update_slot: 1,
        };
        let mut rng = TapeRng::new(vec![0.5, 0.5]);
        let out = env_step(
            &state,
            &cfg,
            &EnergyHarvestModel::default(),
            &params,
            true,
            true,
            10,
            &mut rng,
        )
        .unwrap();
        assert!(out.transmitted && !out.energy_arrival);
        assert_eq!(out.next_state.battery, 2);
        assert_eq!(out.next_state.cached_battery, 3);
        assert_eq!(out.next_state.aoi, 1);
        assert_eq!(out.next_state.last_update_slot, 10);
        assert_eq!(out.packet.unwrap().reported_battery, 3);
        assert!((out.cost - (0.4 + 0.6 * (1.0f64 / 4.0).powi(2))).abs() < 1e-12);
    }

    /// Ten slots driven by a recorded tape and checked against a trace
    /// simulated by hand.
    ///
    /// Parameters: B = 3, zeta = 2, mu = 2, beta = 0.6, default chain.
    /// Start: b = 1, cached = 1, aoi = 1, Good.
    ///
    /// | t  | r | a | (arr u, trans u) | e | V'   | d | b' | cached' | aoi' | cost                  |
    /// |----|---|---|------------------|---|------|---|----|---------|------|-----------------------|
    /// | 1  | 0 | 0 | (0.50, 0.10)     | 0 | Good | 0 | 1  | 1       | 2    | 0                     |
    /// | 2  | 1 | 1 | (0.01, 0.80)     | 1 | Bad  | 1 | 1  | 1       | 1    | 0.4 + 0.6*0.25 = 0.55 |
    /// | 3  | 1 | 0 | (0.30, 0.65)     | 0 | Bad  | 0 | 1  | 1       | 2    | 0.6*1 = 0.6           |
    /// | 4  | 0 | 0 | (0.0003, 0.20)   | 1 | Good | 0 | 2  | 1       | 3    | 0                     |
    /// | 5  | 1 | 1 | (0.05, 0.69)     | 0 | Good | 1 | 1  | 2       | 1    | 0.55                  |
    /// | 6  | 1 | 1 | (0.99, 0.71)     | 0 | Bad  | 1 | 0  | 1       | 1    | 0.55                  |
    /// | 7  | 1 | 1 | (0.0001, 0.50)   | 1 | Good | 0 | 1  | 1       | 2    | 0.6*1 = 0.6           |
    /// | 8  | 1 | 0 | (0.039, 0.75)    | 1 | Bad  | 0 | 2  | 1       | 3    | 0.6*2.25 = 1.35       |
    /// | 9  | 0 | 0 | (0.5, 0.3)       | 0 | Good | 0 | 2  | 1       | 4    | 0                     |
    /// | 10 | 1 | 1 | (0.0401, 0.9)    | 0 | Bad  | 1 | 1  | 2       | 1    | 0.55                  |
    ///
    /// Slot 7: the true battery is 0 so the command is nullified; the arrival
    /// in the Bad state (u = 0.0001 < 0.0004) only helps from slot 8 on.
    #[test]
    fn ten_slot_trace_matches_hand_simulation() {
        let cfg = SensorConfig {
            battery_capacity: 3,
            request_prob: 0.1,
            tolerance: 2.0,
            aoi_cap: 64,
        };
        let eh = EnergyHarvestModel::default();
        let params = CostParams { beta: 0.6, mu: 2.0 };
        let tape = vec![
            0.50, 0.10, 0.01, 0.80, 0.30, 0.65, 0.0003, 0.20, 0.05, 0.69, 0.99, 0.71, 0.0001, 0.50,
            0.039, 0.75, 0.5, 0.3, 0.0401, 0.9,
        ];
        let mut rng = TapeRng::new(tape);
        let inputs = [
            (false, false),
            (true, true),
            (true, false),
            (false, false),
            (true, true),
            (true, true),
            (true, true),
            (true, false),
            (false, false),
            (true, true),
        ];
        use HarvestState::{Bad, Good};
        // (e, V', d, b', cached', aoi', cost)
        let expected = [
            (false, Good, false, 1, 1, 2, 0.0),
            (true, Bad, true, 1, 1, 1, 0.55),
            (false, Bad, false, 1, 1, 2, 0.6),
            (true, Good, false, 2, 1, 3, 0.0),
            (false, Good, true, 1, 2, 1, 0.55),
            (false, Bad, true, 0, 1, 1, 0.55),
            (true, Good, false, 1, 1, 2, 0.6),
            (true, Bad, false, 2, 1, 3, 1.35),
            (false, Good, false, 2, 1, 4, 0.0),
            (false, Bad, true, 1, 2, 1, 0.55),
        ];
        let mut state = SensorState {
            battery: 1,
            cached_battery: 1,
            aoi: 1,
            eh_state: Good,
            last_update_slot: 0,
        };
        for (t, ((r, a), exp)) in inputs.iter().zip(expected.iter()).enumerate() {
            let slot = t as u64 + 1;
            let out = env_step(&state, &cfg, &eh, &params, *r, *a, slot, &mut rng).unwrap();
            let got = (
                out.energy_arrival,
                out.next_state.eh_state,
                out.transmitted,
                out.next_state.battery,
                out.next_state.cached_battery,
                out.next_state.aoi,
            );
            assert_eq!(
                got,
                (exp.0, exp.1, exp.2, exp.3, exp.4, exp.5),
                "slot {slot}"
            );
            assert!(
                (out.cost - exp.6).abs() < 1e-12,
                "slot {slot} cost {}",
                out.cost
            );
            state = out.next_state;
        }
        assert!(rng.exhausted());
        assert_eq!(state.last_update_slot, 10);
    }

    #[test]
    fn validation_rejects_out_of_range_values() {
        let mut cfg = default_sensor(5.0);
        cfg.request_prob = 1.2;
        assert!(cfg.validate("sensors[0]").is_err());
        let mut eh = EnergyHarvestModel::default();
        eh.transition[1] = [0.5, 0.6];
        let err = eh.validate("sensors[0].harvest").unwrap_err();
        assert!(err.to_string().contains("sensors[0].harvest.transition[1]"));
        assert!(CostParams { beta: 1.5, mu: 2.0 }.validate("cost").is_err());
        assert!(CostParams { beta: 0.5, mu: 0.5 }.validate("cost").is_err());
    }
}

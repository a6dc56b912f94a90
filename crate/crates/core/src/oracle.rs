//! Model-based ground truth for small instances.
//!
//! The full-knowledge single-sensor problem is an MDP over
//! `(battery, aoi, harvest state, request)`. Folding the request bit into the
//! state makes the transmit action admissible only where it matters and keeps
//! the process exactly Markov. Transition rows are composed from the same
//! step functions the simulator uses, so the model and [`crate::env`] cannot
//! drift apart silently; a Monte-Carlo test pins them to each other.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::env::{
    age_penalty, aoi_step, battery_step, env_step, sample_request, slot_cost, transmit_decision,
    CostParams, EnergyHarvestModel, HarvestState, SensorConfig, SensorState,
};
use crate::error::{Error, Result};
use crate::seed::SimRng;

pub const DEFAULT_STATE_LIMIT: usize = 1_000_000;
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_MAX_ITERS: usize = 100_000;

/// Models up to this size are evaluated with a dense linear solve.
const DIRECT_SOLVE_LIMIT: usize = 2_048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OracleState {
    pub battery: u32,
    pub aoi: u32,
    pub eh_state: HarvestState,
    pub request: bool,
}

#[derive(Debug, Clone)]
pub struct MdpModel {
    pub cfg: SensorConfig,
    pub eh_model: EnergyHarvestModel,
    pub params: CostParams,
    pub discount: f64,
    /// Sparse rows indexed by `2 * state + action`; empty when the action is
    /// not admissible.
    rows: Vec<Vec<(usize, f64)>>,
    costs: Vec<[f64; 2]>,
}

impl MdpModel {
    pub fn state_count(cfg: &SensorConfig) -> usize {
        (cfg.battery_capacity as usize + 1) * cfg.aoi_cap as usize * 4
    }

    pub fn build(
        cfg: &SensorConfig,
        eh_model: &EnergyHarvestModel,
        params: &CostParams,
        discount: f64,
    ) -> Result<Self> {
        Self::build_with_limit(cfg, eh_model, params, discount, DEFAULT_STATE_LIMIT)
    }

    pub fn build_with_limit(
        cfg: &SensorConfig,
        eh_model: &EnergyHarvestModel,
        params: &CostParams,
        discount: f64,
        state_limit: usize,
    ) -> Result<Self> {
        cfg.validate("sensor")?;
        eh_model.validate("sensor.harvest")?;
        params.validate("cost")?;
        if !(discount > 0.0 && discount <= 1.0) {
            return Err(Error::invalid("discount", "must lie in (0, 1]"));
        }
        let n = Self::state_count(cfg);
        if n > state_limit {
            return Err(Error::StateSpaceTooLarge {
                states: n,
                limit: state_limit,
            });
        }

        let mut model = MdpModel {
            cfg: *cfg,
            eh_model: *eh_model,
            params: *params,
            discount,
            rows: vec![Vec::new(); 2 * n],
            costs: vec![[f64::INFINITY; 2]; n],
        };
        for s in 0..n {
            let st = model.state(s);
            for action in [false, true] {
                if !model.admissible(s, action) {
                    continue;
                }
                let (row, cost) = model.transition(st, action)?;
                model.rows[2 * s + usize::from(action)] = row;
                model.costs[s][usize::from(action)] = cost;
            }
        }
        Ok(model)
    }

    fn transition(&self, st: OracleState, action: bool) -> Result<(Vec<(usize, f64)>, f64)> {
        let cfg = &self.cfg;
        let transmitted = transmit_decision(action, st.battery);
        let aoi = aoi_step(st.aoi, transmitted, cfg.aoi_cap);
        let cost = slot_cost(
            &self.params,
            transmitted,
            st.request,
            age_penalty(aoi, cfg.tolerance, self.params.mu),
        );

        let v = st.eh_state.index();
        let lambda = self.eh_model.harvest_prob[v];
        let mut row: Vec<(usize, f64)> = Vec::with_capacity(8);
        for (arrival, p_e) in [(false, 1.0 - lambda), (true, lambda)] {
            let battery = battery_step(st.battery, arrival, transmitted, cfg.battery_capacity)?;
            for next_v in HarvestState::ALL {
                let p_v = self.eh_model.transition[v][next_v.index()];
                for (request, p_r) in [(false, 1.0 - cfg.request_prob), (true, cfg.request_prob)] {
                    let p = p_e * p_v * p_r;
                    if p == 0.0 {
                        continue;
                    }
                    let next = self.index(OracleState {
                        battery,
                        aoi,
                        eh_state: next_v,
                        request,
                    });
                    match row.iter_mut().find(|(j, _)| *j == next) {
                        Some(entry) => entry.1 += p,
                        None => row.push((next, p)),
                    }
                }
            }
        }
        row.sort_by_key(|(j, _)| *j);
        Ok((row, cost))
    }

    pub fn num_states(&self) -> usize {
        self.costs.len()
    }

    pub fn index(&self, st: OracleState) -> usize {
        let cap = self.cfg.aoi_cap as usize;
        ((st.battery as usize * cap + (st.aoi as usize - 1)) * 2 + st.eh_state.index()) * 2
            + usize::from(st.request)
    }

    pub fn state(&self, index: usize) -> OracleState {
        let cap = self.cfg.aoi_cap as usize;
        let request = index % 2 == 1;
        let rest = index / 2;
        let eh_state = HarvestState::from_index(rest % 2);
        let rest = rest / 2;
        OracleState {
            battery: (rest / cap) as u32,
            aoi: (rest % cap) as u32 + 1,
            eh_state,
            request,
        }
    }

    /// Transmitting is only an option on request slots.
    pub fn admissible(&self, state: usize, action: bool) -> bool {
        !action || state % 2 == 1
    }

    pub fn row(&self, state: usize, action: bool) -> &[(usize, f64)] {
        &self.rows[2 * state + usize::from(action)]
    }

    pub fn cost(&self, state: usize, action: bool) -> f64 {
        self.costs[state][usize::from(action)]
    }

    pub fn max_cost(&self) -> f64 {
        self.params
            .max_slot_cost(self.cfg.tolerance, self.cfg.aoi_cap)
    }

    /// Upper bound on any discounted value; requires `discount < 1`.
    pub fn value_bound(&self) -> f64 {
        self.max_cost() / (1.0 - self.discount)
    }

    /// Builds a stationary policy from a rule; idle states always get 0.
    pub fn policy_from_fn(&self, rule: impl Fn(OracleState) -> bool) -> Vec<bool> {
        (0..self.num_states())
            .map(|s| {
                let st = self.state(s);
                st.request && rule(st)
            })
            .collect()
    }

    fn check_policy(&self, policy: &[bool]) -> Result<()> {
        if policy.len() != self.num_states() {
            return Err(Error::ContractViolation(format!(
                "policy covers {} states, model has {}",
                policy.len(),
                self.num_states()
            )));
        }
        if let Some(s) = (0..policy.len()).find(|&s| !self.admissible(s, policy[s])) {
            return Err(Error::ContractViolation(format!(
                "policy transmits in idle state {:?}",
                self.state(s)
            )));
        }
        Ok(())
    }

    fn q_value(&self, s: usize, action: bool, v: &[f64]) -> f64 {
        let future: f64 = self.row(s, action).iter().map(|&(j, p)| p * v[j]).sum();
        self.cost(s, action) + self.discount * future
    }
}

#[derive(Debug, Clone)]
pub struct ValueFunction {
    pub values: Vec<f64>,
    /// `q[s][a]`; infinite for inadmissible actions.
    pub q: Vec<[f64; 2]>,
    pub policy: Vec<bool>,
    pub iterations: usize,
    pub converged: bool,
    /// Sup-norm change of the last sweep (value iteration) or Bellman
    /// residual of the returned values (exact evaluation).
    pub residual: f64,
}

/// One synchronous Bellman optimality backup. Returns the new values and the
/// action values they came from.
pub fn bellman_backup(mdp: &MdpModel, values: &[f64]) -> (Vec<f64>, Vec<[f64; 2]>) {
    let n = mdp.num_states();
    let mut q = vec![[f64::INFINITY; 2]; n];
    let mut next = vec![0.0; n];
    for s in 0..n {
        for action in [false, true] {
            if mdp.admissible(s, action) {
                q[s][usize::from(action)] = mdp.q_value(s, action, values);
            }
        }
        next[s] = q[s][0].min(q[s][1]);
    }
    (next, q)
}

fn greedy(q: &[[f64; 2]]) -> Vec<bool> {
    q.iter().map(|[q0, q1]| q1 < q0).collect()
}

/// Bellman residual `max_s |min_a q(s, a) - v(s)|` of `values`.
pub fn bellman_residual(mdp: &MdpModel, values: &[f64]) -> f64 {
    let (next, _) = bellman_backup(mdp, values);
    sup_distance(&next, values)
}

fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn value_iteration(mdp: &MdpModel, tol: f64, max_iters: usize) -> Result<ValueFunction> {
    value_iteration_from(mdp, vec![0.0; mdp.num_states()], tol, max_iters)
}

/// Value iteration from an arbitrary starting point. Stops once a sweep
/// changes no value by `tol` or more, leaving the result within
/// `tol * discount / (1 - discount)` of the fixed point.
pub fn value_iteration_from(
    mdp: &MdpModel,
    init: Vec<f64>,
    tol: f64,
    max_iters: usize,
) -> Result<ValueFunction> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::ContractViolation(
            "value iteration needs tol > 0".into(),
        ));
    }
    if mdp.discount >= 1.0 {
        return Err(Error::ContractViolation(
            "value iteration needs discount < 1".into(),
        ));
    }
    if init.len() != mdp.num_states() {
        return Err(Error::ContractViolation(
            "initial values do not match the model".into(),
        ));
    }
    let mut values = init;
    let mut iterations = 0;
    let mut change = f64::INFINITY;
    let mut q = Vec::new();
    while iterations < max_iters {
        let (next, next_q) = bellman_backup(mdp, &values);
        change = sup_distance(&next, &values);
        values = next;
        q = next_q;
        iterations += 1;
        if change < tol {
            break;
        }
    }
    if q.is_empty() {
        q = bellman_backup(mdp, &values).1;
    }
    Ok(ValueFunction {
        policy: greedy(&q),
        values,
        q,
        iterations,
        converged: change < tol,
        residual: change,
    })
}

/// Exact discounted value of a stationary deterministic policy.
pub fn evaluate_policy(mdp: &MdpModel, policy: &[bool]) -> Result<ValueFunction> {
    mdp.check_policy(policy)?;
    let n = mdp.num_states();
    let values = if n <= DIRECT_SOLVE_LIMIT && mdp.discount < 1.0 {
        solve_policy_values(mdp, policy)?
    } else {
        iterate_policy_values(mdp, policy, DEFAULT_TOLERANCE * 1e-1, DEFAULT_MAX_ITERS)
    };
    let q: Vec<[f64; 2]> = (0..n)
        .map(|s| {
            let mut qs = [f64::INFINITY; 2];
            for action in [false, true] {
                if mdp.admissible(s, action) {
                    qs[usize::from(action)] = mdp.q_value(s, action, &values);
                }
            }
            qs
        })
        .collect();
    let residual = (0..n)
        .map(|s| (q[s][usize::from(policy[s])] - values[s]).abs())
        .fold(0.0, f64::max);
    Ok(ValueFunction {
        values,
        q,
        policy: policy.to_vec(),
        iterations: 0,
        converged: true,
        residual,
    })
}

/// Solves `(I - discount * P_pi) v = c_pi` densely.
fn solve_policy_values(mdp: &MdpModel, policy: &[bool]) -> Result<Vec<f64>> {
    let n = mdp.num_states();
    let mut a = DMatrix::<f64>::identity(n, n);
    let mut c = DVector::<f64>::zeros(n);
    for s in 0..n {
        let action = policy[s];
        c[s] = mdp.cost(s, action);
        for &(j, p) in mdp.row(s, action) {
            a[(s, j)] -= mdp.discount * p;
        }
    }
    a.lu()
        .solve(&c)
        .map(|v| v.iter().copied().collect())
        .ok_or_else(|| Error::ContractViolation("policy evaluation system is singular".into()))
}

fn iterate_policy_values(mdp: &MdpModel, policy: &[bool], tol: f64, max_iters: usize) -> Vec<f64> {
    let n = mdp.num_states();
    let mut values = vec![0.0; n];
    for _ in 0..max_iters {
        let next: Vec<f64> = (0..n).map(|s| mdp.q_value(s, policy[s], &values)).collect();
        let change = sup_distance(&next, &values);
        values = next;
        if change < tol {
            break;
        }
    }
    values
}

/// Howard policy iteration with exact evaluation. A switch is made only on a
/// strict improvement larger than `1e-12`, so the loop cannot cycle between
/// tied policies.
pub fn policy_iteration(mdp: &MdpModel, max_iters: usize) -> Result<ValueFunction> {
    let mut policy = vec![false; mdp.num_states()];
    for iteration in 1..=max_iters {
        let vf = evaluate_policy(mdp, &policy)?;
        let mut stable = true;
        for (s, action) in policy.iter_mut().enumerate() {
            let current = vf.q[s][usize::from(*action)];
            let other = vf.q[s][usize::from(!*action)];
            if other < current - 1e-12 {
                *action = !*action;
                stable = false;
            }
        }
        if stable {
            return Ok(ValueFunction {
                iterations: iteration,
                ..vf
            });
        }
    }
    let vf = evaluate_policy(mdp, &policy)?;
    Ok(ValueFunction {
        iterations: max_iters,
        converged: false,
        ..vf
    })
}

#[derive(Debug, Clone)]
pub struct Enumeration {
    /// State-wise minimum of `v_pi` over every enumerated policy.
    pub best_values: Vec<f64>,
    pub policies_evaluated: u64,
    pub decision_states: usize,
}

/// States where the two actions have different effects: a request is pending
/// and the battery is non-empty.
pub fn decision_states(mdp: &MdpModel) -> Vec<usize> {
    (0..mdp.num_states())
        .filter(|&s| {
            let st = mdp.state(s);
            st.request && st.battery > 0
        })
        .collect()
}

/// Evaluates every deterministic stationary policy exactly. Policies that
/// differ only where the command is nullified by an empty battery are
/// equivalent and evaluated once.
pub fn enumerate_policies(mdp: &MdpModel, max_decision_states: usize) -> Result<Enumeration> {
    let decisions = decision_states(mdp);
    if decisions.len() > max_decision_states || decisions.len() >= 63 {
        return Err(Error::StateSpaceTooLarge {
            states: decisions.len(),
            limit: max_decision_states,
        });
    }
    let mut best = vec![f64::INFINITY; mdp.num_states()];
    let mut policy = vec![false; mdp.num_states()];
    let total = 1u64 << decisions.len();
    for mask in 0..total {
        for (bit, &s) in decisions.iter().enumerate() {
            policy[s] = mask >> bit & 1 == 1;
        }
        let values = solve_policy_values(mdp, &policy)?;
        for (b, v) in best.iter_mut().zip(values) {
            *b = b.min(v);
        }
    }
    Ok(Enumeration {
        best_values: best,
        policies_evaluated: total,
        decision_states: decisions.len(),
    })
}

/// Long-run time-average cost of a full-knowledge policy, estimated by
/// running the simulator for `horizon` slots.
pub fn average_cost_of_policy<R: Rng + ?Sized>(
    mdp: &MdpModel,
    policy: &[bool],
    horizon: u64,
    rng: &mut R,
) -> Result<f64> {
    mdp.check_policy(policy)?;
    if horizon == 0 {
        return Ok(0.0);
    }
    let mut state = SensorState::initial(&mdp.cfg, &mdp.eh_model, rng);
    let mut total = 0.0;
    for slot in 1..=horizon {
        let request = sample_request(&mdp.cfg, rng);
        let s = mdp.index(OracleState {
            battery: state.battery,
            aoi: state.aoi,
            eh_state: state.eh_state,
            request,
        });
        let out = env_step(
            &state,
            &mdp.cfg,
            &mdp.eh_model,
            &mdp.params,
            request,
            policy[s],
            slot,
            rng,
        )?;
        total += out.cost;
        state = out.next_state;
    }
    Ok(total / horizon as f64)
}

/// Action the full-knowledge optimum would take on a request slot when only
/// `(battery, aoi)` is known: the stationary-weighted argmin over the hidden
/// harvest state. Ties go to 0.
pub fn observed_greedy_action(mdp: &MdpModel, vf: &ValueFunction, battery: u32, aoi: u32) -> bool {
    let pi = mdp.eh_model.stationary();
    let mut q = [0.0; 2];
    for eh_state in HarvestState::ALL {
        let s = mdp.index(OracleState {
            battery,
            aoi,
            eh_state,
            request: true,
        });
        for (acc, value) in q.iter_mut().zip(vf.q[s]) {
            *acc += pi[eh_state.index()] * value;
        }
    }
    q[1] < q[0]
}

/// Largest model the command-line comparison accepts. The comparison
/// evaluates baselines with dense linear solves.
pub const COMPARISON_STATE_LIMIT: usize = 1_024;

/// Summary of an oracle comparison for one sensor.
#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub sensor_id: u64,
    pub states: usize,
    pub iterations: usize,
    pub converged: bool,
    pub residual: f64,
    /// Simulated long-run average costs on a common seed.
    pub optimal_avg_cost: f64,
    pub threshold_avg_cost: f64,
    pub greedy_avg_cost: f64,
    /// Whether the optimal values are at most the threshold policy's values
    /// in every state.
    pub threshold_dominated: bool,
}

/// Solves `mdp`, evaluates the threshold baseline exactly and simulates the
/// optimal, threshold and greedy policies for `horizon` slots each.
pub fn compare_with_baselines(
    mdp: &MdpModel,
    sensor_id: u64,
    horizon: u64,
    seed: u64,
) -> Result<(OracleReport, ValueFunction)> {
    let vf = value_iteration(mdp, DEFAULT_TOLERANCE, DEFAULT_MAX_ITERS)?;
    let tolerance = mdp.cfg.tolerance;
    let threshold = mdp.policy_from_fn(|st| f64::from(st.aoi) + 1.0 > tolerance);
    let greedy = mdp.policy_from_fn(|_| true);
    let exact_threshold = evaluate_policy(mdp, &threshold)?;
    let slack = DEFAULT_TOLERANCE * mdp.discount / (1.0 - mdp.discount);
    let threshold_dominated = vf
        .values
        .iter()
        .zip(&exact_threshold.values)
        .all(|(v, t)| *v <= t + slack);
    let simulate = |policy: &[bool]| {
        average_cost_of_policy(mdp, policy, horizon, &mut SimRng::seed_from_u64(seed))
    };
    let report = OracleReport {
        sensor_id,
        states: mdp.num_states(),
        iterations: vf.iterations,
        converged: vf.converged,
        residual: vf.residual,
        optimal_avg_cost: simulate(&vf.policy)?,
        threshold_avg_cost: simulate(&threshold)?,
        greedy_avg_cost: simulate(&greedy)?,
        threshold_dominated,
    };
    Ok((report, vf))
}

/// CSV dump: `battery,aoi,eh_state,request,value,action`.
pub fn write_value_csv<W: Write>(mdp: &MdpModel, vf: &ValueFunction, writer: W) -> csv::Result<()> {
    let mut out = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    out.write_record(["battery", "aoi", "eh_state", "request", "value", "action"])?;
    for s in 0..mdp.num_states() {
        let st = mdp.state(s);
        out.write_record([
            st.battery.to_string(),
            st.aoi.to_string(),
            (st.eh_state.index() + 1).to_string(),
            u8::from(st.request).to_string(),
            vf.values[s].to_string(),
            u8::from(vf.policy[s]).to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

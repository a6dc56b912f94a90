//! Slotted-time simulation and control of cache-assisted status updates from
//! energy-harvesting sensors.
//!
//! An edge node caches the latest measurement of every sensor. When a request
//! for a sensor's value arrives it either serves the cached copy or commands
//! the sensor to spend one unit of energy on a fresh status update. The crate
//! contains:
//!
//! - [`env`]: per-slot stochastic dynamics of one sensor (requests, energy
//!   harvesting, battery, age of information, cost),
//! - [`policies`]: the tabular Q-learning controller that only sees the
//!   battery level reported in the last update, its genie-aided variant, and
//!   the greedy / threshold / random baselines,
//! - [`oracle`]: the exact full-knowledge MDP, value iteration, exact policy
//!   evaluation and brute-force policy enumeration,
//! - [`experiment`]: multi-sensor episodes, multi-episode averaging and
//!   β-sweeps,
//! - [`config`] and [`output`]: the JSON configuration file and the CSV/JSON
//!   results bundle used by the `aoi-sim` binary.

pub mod config;
pub mod env;
pub mod error;
pub mod experiment;
pub mod oracle;
pub mod output;
pub mod policies;
pub mod seed;

pub use error::{Error, Result};

//! Deterministic seed derivation.
//!
//! Every random stream in a run is seeded from `(master_seed, episode,
//! sensor_id, stream)` through a SplitMix64 finalizer, so any sub-run can be
//! reconstructed on its own.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Independent random streams owned by one sensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Stream {
    Requests = 1,
    Harvest = 2,
    Exploration = 3,
    /// Draw of the sensor's tolerance; shared by all episodes.
    Tolerance = 4,
}

/// Episode index used for quantities materialized once per experiment.
pub const EXPERIMENT_SCOPE: u64 = u64::MAX;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master_seed: u64, episode: u64, sensor_id: u64, stream: Stream) -> u64 {
    [episode, sensor_id, stream as u64]
        .into_iter()
        .fold(splitmix64(master_seed), |acc, part| {
            splitmix64(acc ^ splitmix64(part))
        })
}

pub fn stream_rng(master_seed: u64, episode: u64, sensor_id: u64, stream: Stream) -> SimRng {
    SimRng::seed_from_u64(derive_seed(master_seed, episode, sensor_id, stream))
}

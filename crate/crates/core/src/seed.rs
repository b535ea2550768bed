//! Deterministic seed derivation.
//!
//! A trial's seed depends only on the master seed and the trial index, and
//! every agent-level draw comes from its own ChaCha stream keyed by
//! `(agent, purpose)`. Results therefore do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What an agent-level random stream is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Links = 0,
    Signal = 1,
    Kind = 2,
    Noise = 3,
}

const STATE_STREAM: u64 = u64::MAX;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for trial `index` under `master`.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ splitmix64(index.wrapping_add(0x5EED)))
}

/// Random stream for one agent's draws of one kind.
pub fn agent_rng(trial_seed: u64, agent: u32, purpose: Purpose) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
    rng.set_stream((u64::from(agent) << 2) | purpose as u64);
    rng
}

/// Random stream for the trial's state draw.
pub fn state_rng(trial_seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
    rng.set_stream(STATE_STREAM);
    rng
}

//! Seed derivation for reproducible simulation streams.
//!
//! Every consumer of randomness gets its own ChaCha8 stream keyed by the
//! master seed plus a path of indices (repetition, arm, trial, ...). The
//! key is a SHA-256 digest of the path, so streams never overlap and the
//! draws a repetition sees do not depend on how work is scheduled across
//! worker threads.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

const DOMAIN_EXPERIMENT: u8 = 1;
const DOMAIN_TRIAL: u8 = 2;

fn derive(master_seed: u64, domain: u8, path: &[u64]) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(b"heavytail.stream.v1");
    hasher.update([domain]);
    hasher.update(master_seed.to_le_bytes());
    for part in path {
        hasher.update(part.to_le_bytes());
    }
    let digest = hasher.finalize();
    let mut seed = [0u8; 32];
    seed.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(seed)
}

/// Reward stream for one arm within one repetition of an experiment.
pub fn experiment_stream(master_seed: u64, repetition: u64, arm: u64) -> ChaCha8Rng {
    derive(master_seed, DOMAIN_EXPERIMENT, &[repetition, arm])
}

/// Sample stream for one trial of a concentration run.
pub fn trial_stream(master_seed: u64, trial: u64) -> ChaCha8Rng {
    derive(master_seed, DOMAIN_TRIAL, &[trial])
}

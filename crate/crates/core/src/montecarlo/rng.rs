//! Counter-addressed random streams.
//!
//! Every trial gets its own ChaCha8 generator positioned at a fixed offset
//! of a keyed stream, so the randomness a trial sees depends only on
//! `(seed, phase, context, trial)` and never on which thread ran it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Name recorded in run manifests.
pub const RNG_ALGORITHM: &str =
    "ChaCha8 (seed_from_u64 key, stream = phase:context, word offset = trial << 32)";

/// Words reserved per trial. A trial of the largest supported scene uses a
/// few hundred thousand words at most.
const TRIAL_STRIDE_WORDS: u128 = 1 << 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    /// H0 trials used to set thresholds.
    Calibration = 1,
    /// Independent H0 trials used to check the false-alarm rate.
    Verification = 2,
    /// H1 trials, one context per SNR grid point.
    Detection = 3,
}

/// Generator for one trial.
pub fn trial_rng(seed: u64, phase: Phase, context: u32, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((phase as u64) << 32) | context as u64);
    rng.set_word_pos(trial as u128 * TRIAL_STRIDE_WORDS);
    rng
}

//! Seeded randomness.
//!
//! Every random draw in the crate goes through [`WorkbenchRng`], a ChaCha
//! stream cipher generator with 8 rounds. Its output is identical on every
//! platform, so a seed fully determines sampled estimates and initial angles.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type WorkbenchRng = ChaCha8Rng;

/// Name recorded in run metadata.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng (rand_chacha 0.3)";

pub fn rng_from_seed(seed: u64) -> WorkbenchRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Child seed for the `index`-th independent stream under `master`.
///
/// SplitMix64 finalizer over the pair, so neighbouring indices give
/// uncorrelated seeds and serial and parallel callers agree.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

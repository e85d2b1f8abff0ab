//! Seed derivation. Every random stream in an experiment is a pure function
//! of the master seed, the run index and a purpose tag.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type ExperimentRng = ChaCha8Rng;

/// Independent random streams used within one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Batches,
    TestSet,
    Folds,
    Projection,
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::Batches => 0x6261_7463_6865_7301,
            Purpose::TestSet => 0x7465_7374_7365_7402,
            Purpose::Folds => 0x666f_6c64_7300_0003,
            Purpose::Projection => 0x7072_6f6a_6563_7404,
        }
    }
}

/// SplitMix64 finalizer.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn run_seed(master: u64, run: usize) -> u64 {
    mix(mix(master) ^ (run as u64).wrapping_mul(0xd1b5_4a32_d192_ed03))
}

pub fn purpose_seed(seed: u64, purpose: Purpose) -> u64 {
    mix(seed ^ purpose.tag())
}

pub fn rng_for(seed: u64, purpose: Purpose) -> ExperimentRng {
    ExperimentRng::seed_from_u64(purpose_seed(seed, purpose))
}

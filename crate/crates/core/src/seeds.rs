//! Counter-based seed fan-out: every (point, repetition, group) triple maps to
//! an independent 64-bit seed, regardless of evaluation order.

use serde::{Deserialize, Serialize};

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSplitter {
    pub root: u64,
}

impl SeedSplitter {
    pub fn new(root: u64) -> Self {
        Self { root }
    }

    pub fn seed(&self, point: u64, repetition: u64, group: u64) -> u64 {
        let mut h = splitmix64(self.root);
        for k in [point, repetition, group] {
            h = splitmix64(h ^ splitmix64(k));
        }
        h
    }

    /// Seed for a whole grid point, used where a single stream suffices.
    pub fn point_seed(&self, point: u64) -> u64 {
        self.seed(point, u64::MAX, u64::MAX)
    }
}

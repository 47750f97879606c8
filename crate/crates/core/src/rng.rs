//! Seed lineage: a master seed plus a list of integer tags deterministically
//! identifies an independent child stream. Replications can then run on any
//! number of worker threads and still see exactly the same random numbers.

use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;

/// The RNG stream handed to all sampling operations. A single stream must
/// not be shared between threads; derive one per work item instead.
pub type RngStream = ChaCha8Rng;

/// Well-known purpose tags for deriving per-replication child streams.
pub mod purpose {
    pub const DATA: u64 = 0x01;
    pub const WEIGHTS: u64 = 0x02;
    pub const ESTIMATOR: u64 = 0x03;
}

/// Derives independent child streams from a master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedLineage {
    master: u64,
}

impl SeedLineage {
    pub fn new(master: u64) -> Self {
        Self { master }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    /// Child stream for the given tag path, e.g. `[table, cell, rep, purpose]`.
    pub fn stream(&self, tags: &[u64]) -> RngStream {
        let mut state = mix64(self.master ^ 0x6a09_e667_f3bc_c908);
        for &t in tags {
            state = mix64(state.wrapping_add(0x9e37_79b9_7f4a_7c15) ^ mix64(t));
        }
        let mut seed = [0u8; 32];
        for chunk in seed.chunks_exact_mut(8) {
            state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
            chunk.copy_from_slice(&mix64(state).to_le_bytes());
        }
        ChaCha8Rng::from_seed(seed)
    }

    /// Extends the lineage by a fixed prefix, e.g. to scope one experiment.
    pub fn child(&self, tag: u64) -> Self {
        Self {
            master: mix64(self.master.wrapping_add(0x9e37_79b9_7f4a_7c15) ^ mix64(tag)),
        }
    }
}

// splitmix64 finalizer
fn mix64(mut x: u64) -> u64 {
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

//! Max-k-cover solvers over sample universes: standard/lazy greedy, a
//! brute-force oracle, prefix truncation, and the bucketed streaming
//! aggregator.

mod brute;
mod greedy;
mod stream;

pub use brute::brute_force_max_cover;
pub use greedy::{greedy_with, lazy_greedy_max_cover, truncate_stream_order, truncated_len, GreedyMode};
pub use stream::{bucket_count, BucketState, StreamingSketch};

/// An ordered seed list with per-seed marginal coverage gains.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    /// Selection order.
    pub seeds: Vec<u32>,
    /// Coverage gained by each seed at its selection.
    pub marginals: Vec<u64>,
    /// Distinct samples covered; always the sum of `marginals`.
    pub coverage: u64,
    /// Size of the sample universe the coverage refers to.
    pub universe_size: u64,
}

impl Solution {
    pub fn empty(universe_size: u64) -> Solution {
        Solution { seeds: Vec::new(), marginals: Vec::new(), coverage: 0, universe_size }
    }

    pub fn len(&self) -> usize {
        self.seeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seeds.is_empty()
    }
}

/// Dense membership bitmap over sample ids `[0, universe)`.
#[derive(Debug, Clone)]
pub(crate) struct SampleBitmap {
    blocks: Vec<u64>,
    ones: u64,
}

impl SampleBitmap {
    pub fn new(universe: usize) -> SampleBitmap {
        SampleBitmap { blocks: vec![0; universe.div_ceil(64)], ones: 0 }
    }

    #[inline]
    pub fn contains(&self, id: u32) -> bool {
        let (block, bit) = (id as usize / 64, id as usize % 64);
        self.blocks[block] >> bit & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, id: u32) -> bool {
        let (block, bit) = (id as usize / 64, id as usize % 64);
        let mask = 1u64 << bit;
        if self.blocks[block] & mask == 0 {
            self.blocks[block] |= mask;
            self.ones += 1;
            true
        } else {
            false
        }
    }

    pub fn count(&self) -> u64 {
        self.ones
    }

    /// How many of `ids` are not yet present (the marginal gain).
    pub fn count_missing(&self, ids: &[u32]) -> u64 {
        ids.iter().filter(|&&id| !self.contains(id)).count() as u64
    }

    /// Insert all of `ids`; returns how many were new.
    pub fn insert_all(&mut self, ids: &[u32]) -> u64 {
        ids.iter().filter(|&&id| self.insert(id)).count() as u64
    }
}

//! One-pass bucketed streaming max-k-cover.
//!
//! `B` buckets hold geometric guesses of the optimal coverage between a lower
//! bound `l` and `k * l`. A streamed covering set joins every bucket whose
//! threshold `guess / 2k` its marginal gain clears, independently per bucket;
//! at the end the fullest bucket wins. Admissions in one bucket never look at
//! another, so disjoint bucket ranges can be driven by independent workers.

use crate::cover::{SampleBitmap, Solution};
use crate::error::{Error, Result};
use crate::sampling::CoveringSet;

/// Bucket count `B = max(1, ceil(log_{1+delta} k))`, so guesses span `[l, k*l]`.
pub fn bucket_count(k: usize, delta: f64) -> usize {
    if k <= 1 {
        return 1;
    }
    let b = ((k as f64).ln() / (1.0 + delta).ln() - 1e-9).ceil() as usize;
    b.max(1)
}

/// One threshold guess with its partial solution.
#[derive(Debug, Clone)]
pub struct BucketState {
    /// Coverage guess this bucket bets on: `l * (1+delta)^b`.
    pub guess: f64,
    covered: SampleBitmap,
    seeds: Vec<u32>,
    marginals: Vec<u64>,
    /// Messages whose seed was already admitted here and were skipped.
    pub duplicate_skips: u64,
    /// (bucket, message) applications, for exactly-once audits.
    pub applied: u64,
}

impl BucketState {
    fn new(guess: f64, universe_size: usize) -> BucketState {
        BucketState {
            guess,
            covered: SampleBitmap::new(universe_size),
            seeds: Vec::new(),
            marginals: Vec::new(),
            duplicate_skips: 0,
            applied: 0,
        }
    }

    pub fn covered_count(&self) -> u64 {
        self.covered.count()
    }

    pub fn seeds(&self) -> &[u32] {
        &self.seeds
    }

    /// Offer `(seed, covering)` to this bucket; true if admitted.
    pub fn offer(&mut self, k: usize, seed: u32, covering: &CoveringSet) -> bool {
        self.applied += 1;
        if self.seeds.len() >= k {
            return false;
        }
        if self.seeds.contains(&seed) {
            self.duplicate_skips += 1;
            return false;
        }
        let gain = self.covered.count_missing(&covering.samples);
        if gain == 0 {
            return false;
        }
        let threshold = self.guess / (2.0 * k as f64);
        if (gain as f64) < threshold {
            return false;
        }
        self.covered.insert_all(&covering.samples);
        self.seeds.push(seed);
        self.marginals.push(gain);
        true
    }
}

/// Receiver-side state of the streaming aggregator.
#[derive(Debug, Clone)]
pub struct StreamingSketch {
    k: usize,
    delta: f64,
    lower_bound: u64,
    universe_size: usize,
    buckets: Vec<BucketState>,
    processed: u64,
}

impl StreamingSketch {
    /// `B` buckets with guesses `lower_bound * (1+delta)^b`, all empty.
    pub fn create(k: usize, delta: f64, lower_bound: u64, universe_size: usize) -> Result<StreamingSketch> {
        Self::with_bucket_count(k, delta, lower_bound, universe_size, bucket_count(k, delta))
    }

    /// Same, with an explicit bucket count (CLI override).
    pub fn with_bucket_count(
        k: usize,
        delta: f64,
        lower_bound: u64,
        universe_size: usize,
        buckets: usize,
    ) -> Result<StreamingSketch> {
        if !(delta > 0.0 && delta < 0.5) {
            return Err(Error::Parameter(format!("delta {delta} must lie in (0, 1/2)")));
        }
        if lower_bound < 1 {
            return Err(Error::Parameter("lower bound must be at least 1".into()));
        }
        if buckets < 1 {
            return Err(Error::Parameter("bucket count must be at least 1".into()));
        }
        let buckets = (0..buckets)
            .map(|b| BucketState::new(lower_bound as f64 * (1.0 + delta).powi(b as i32), universe_size))
            .collect();
        Ok(StreamingSketch { k, delta, lower_bound, universe_size, buckets, processed: 0 })
    }

    pub fn bucket_len(&self) -> usize {
        self.buckets.len()
    }

    pub fn buckets(&self) -> &[BucketState] {
        &self.buckets
    }

    /// Disjoint mutable bucket ranges for concurrent workers.
    pub fn buckets_mut(&mut self) -> &mut [BucketState] {
        &mut self.buckets
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn lower_bound(&self) -> u64 {
        self.lower_bound
    }

    pub fn universe_size(&self) -> usize {
        self.universe_size
    }

    pub fn processed_count(&self) -> u64 {
        self.processed
    }

    /// Count a message as consumed (workers that apply buckets directly via
    /// [`StreamingSketch::buckets_mut`] keep this in sync afterwards).
    pub fn record_processed(&mut self, messages: u64) {
        self.processed += messages;
    }

    /// Offer to every bucket; returns the indices that admitted the seed.
    pub fn insert(&mut self, seed: u32, covering: &CoveringSet) -> Vec<usize> {
        self.processed += 1;
        let k = self.k;
        self.buckets
            .iter_mut()
            .enumerate()
            .filter_map(|(i, b)| b.offer(k, seed, covering).then_some(i))
            .collect()
    }

    /// The solution of the fullest bucket (ties: smallest bucket index).
    pub fn finalize(&self) -> Solution {
        let best = self
            .buckets
            .iter()
            .enumerate()
            .max_by(|(ia, a), (ib, b)| {
                a.covered_count().cmp(&b.covered_count()).then(ib.cmp(ia))
            })
            .map(|(_, b)| b);
        match best {
            Some(b) if b.covered_count() > 0 => Solution {
                seeds: b.seeds.clone(),
                marginals: b.marginals.clone(),
                coverage: b.covered_count(),
                universe_size: self.universe_size as u64,
            },
            _ => Solution::empty(self.universe_size as u64),
        }
    }
}

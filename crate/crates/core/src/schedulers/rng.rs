//! Seeded sources for the uniform draw β.
//!
//! β is a dyadic rational `bits / 2^64`, so comparing it with γ is an exact
//! integer test against a precomputed threshold.

use std::cell::RefCell;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::golden::GoldenNumber;
use crate::weight::Weight;

/// A stream of β draws, each given by its 64 fractional bits.
pub trait BetaSource {
    fn next_bits(&mut self) -> u64;
    fn draws(&self) -> u64;
}

/// ChaCha8 stream fully determined by a 64-bit seed. Per-trial sources use
/// the trial index as the ChaCha stream id, so trial `i` of a master seed is
/// the same no matter which thread runs it.
#[derive(Debug, Clone)]
pub struct RandomSource {
    rng: ChaCha8Rng,
    draws: u64,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        RandomSource { rng: ChaCha8Rng::seed_from_u64(seed), draws: 0 }
    }

    pub fn for_trial(master_seed: u64, trial: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(trial);
        RandomSource { rng, draws: 0 }
    }
}

impl BetaSource for RandomSource {
    fn next_bits(&mut self) -> u64 {
        self.draws += 1;
        self.rng.next_u64()
    }

    fn draws(&self) -> u64 {
        self.draws
    }
}

/// Replays fixed draws; panics when exhausted. For tests and traces.
#[derive(Debug, Clone, Default)]
pub struct ScriptedBeta {
    bits: Vec<u64>,
    next: usize,
}

impl ScriptedBeta {
    pub fn new(bits: Vec<u64>) -> Self {
        ScriptedBeta { bits, next: 0 }
    }

    /// Draws given as weights in `[0, 1)`, truncated to 64 fractional bits.
    pub fn from_weights(values: &[Weight]) -> Self {
        ScriptedBeta::new(values.iter().map(|&w| dyadic_bits(w)).collect())
    }
}

impl BetaSource for ScriptedBeta {
    fn next_bits(&mut self) -> u64 {
        let bits = *self.bits.get(self.next).expect("scripted draws exhausted");
        self.next += 1;
        bits
    }

    fn draws(&self) -> u64 {
        self.next as u64
    }
}

/// `floor(w * 2^64)` for `w` in `[0, 1)`; saturates at `u64::MAX`.
pub fn dyadic_bits(w: Weight) -> u64 {
    let (n, d) = (w.numer() as u128, w.denom() as u128);
    if n >= d {
        return u64::MAX;
    }
    // Long division, one bit at a time, avoids 192-bit intermediates.
    let (mut rem, mut bits) = (n, 0u64);
    for _ in 0..64 {
        rem <<= 1;
        bits <<= 1;
        if rem >= d {
            rem -= d;
            bits |= 1;
        }
    }
    bits
}

thread_local! {
    static LAST_THRESHOLD: RefCell<Option<(GoldenNumber, Option<u64>)>> = const { RefCell::new(None) };
}

/// Largest `k` with `k / 2^64 <= gamma`, or `None` when `gamma < 0`.
/// The last answer is remembered per thread, since trial loops ask for the
/// same γ many times.
pub fn dyadic_threshold(gamma: &GoldenNumber) -> Option<u64> {
    LAST_THRESHOLD.with(|cell| {
        if let Some((g, k)) = cell.borrow().as_ref() {
            if g == gamma {
                return *k;
            }
        }
        let k = search_threshold(gamma);
        *cell.borrow_mut() = Some((gamma.clone(), k));
        k
    })
}

fn search_threshold(gamma: &GoldenNumber) -> Option<u64> {
    if GoldenNumber::from_dyadic64(0) > *gamma {
        return None;
    }
    let (mut lo, mut hi) = (0u64, u64::MAX);
    while lo < hi {
        let mid = lo + (hi - lo) / 2 + 1;
        if GoldenNumber::from_dyadic64(mid) <= *gamma {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    Some(lo)
}

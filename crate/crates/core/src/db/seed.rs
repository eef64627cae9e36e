//! SplitMix64-based derivation backbone.
//!
//! Everything that has to agree bit-for-bit between the trusted authority and
//! the nodes (isotope selection, frame drawing, multiplier derivation) is
//! built on these three functions.

use crate::quasigroup::{Permutation, QuasigroupError, Symbol, MAX_ORDER};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// The SplitMix64 output finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds `parts` into one value. The state starts at 0; each part is added
/// together with the golden gamma and the sum is finalized, the finalized
/// value becoming the next state. An empty slice yields 0.
pub fn derive_seed(parts: &[u64]) -> u64 {
    parts.iter().fold(0u64, |state, &part| {
        mix64(state.wrapping_add(part).wrapping_add(GOLDEN_GAMMA))
    })
}

/// Plain SplitMix64 generator.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform draw from `0..bound`. Draws below `2^64 mod bound` are
    /// rejected so every residue is equally likely.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "empty range");
        let threshold = bound.wrapping_neg() % bound;
        loop {
            let x = self.next_u64();
            if x >= threshold {
                return x % bound;
            }
        }
    }

    /// Uniform draw from the inclusive range `lo..=hi`.
    pub fn in_range(&mut self, lo: u64, hi: u64) -> u64 {
        assert!(lo <= hi);
        match (hi - lo).checked_add(1) {
            Some(span) => lo + self.below(span),
            None => self.next_u64(),
        }
    }
}

/// Fisher–Yates shuffle of `1..=n` driven by a SplitMix64 stream on `seed`.
/// Position `i` (counting down from `n-1` to `1`, 0-indexed) swaps with a
/// uniform draw from `0..=i`.
pub fn permutation_from_seed(seed: u64, n: usize) -> Result<Permutation, QuasigroupError> {
    if n == 0 || n > MAX_ORDER {
        return Err(QuasigroupError::InvalidOrder(n));
    }
    let mut rng = SplitMix64::new(seed);
    let mut map: Vec<Symbol> = (1..=n as Symbol).collect();
    for i in (1..n).rev() {
        let j = rng.below(i as u64 + 1) as usize;
        map.swap(i, j);
    }
    Permutation::from_map(map)
}

//! Small deterministic PRNG and seeded hashing used across the toolkit.
//!
//! Everything that samples or hashes in this crate goes through these
//! primitives so that a recorded seed reproduces a run bit-for-bit on any
//! platform.

/// SplitMix64 generator. Fast, tiny state, good enough for sampling plans,
/// jittered optimizer starts, and synthetic fixtures. Not cryptographic.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        mix64(self.state)
    }

    /// Uniform f64 in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in [0, bound). `bound` must be nonzero.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        // Bias from the modulo is ~2^-64 per draw at our scales.
        self.next_u64() % bound
    }

    /// Uniform f64 in [lo, hi).
    pub fn next_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}

/// SplitMix64 finalizer; also usable as a standalone 64-bit mixer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// Seeded FNV-1a over a byte slice. The seed is folded into the offset basis
/// so distinct seeds produce unrelated hash families.
pub fn fnv1a64(bytes: &[u8], seed: u64) -> u64 {
    let mut h = FNV_OFFSET ^ mix64(seed);
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Hash of a sequence of string parts with an explicit unit separator, so
/// ("ab","c") and ("a","bc") hash differently.
pub fn fnv1a64_parts<'a>(parts: impl IntoIterator<Item = &'a str>, seed: u64) -> u64 {
    let mut h = FNV_OFFSET ^ mix64(seed);
    for part in parts {
        for &b in part.as_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(FNV_PRIME);
        }
        h ^= 0x1f;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn splitmix_is_deterministic() {
        let a: Vec<u64> = {
            let mut r = SplitMix64::new(7);
            (0..8).map(|_| r.next_u64()).collect()
        };
        let b: Vec<u64> = {
            let mut r = SplitMix64::new(7);
            (0..8).map(|_| r.next_u64()).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn next_f64_in_unit_interval() {
        let mut r = SplitMix64::new(123);
        for _ in 0..1000 {
            let x = r.next_f64();
            assert!((0.0..1.0).contains(&x));
        }
    }

    #[test]
    fn part_hash_separates_boundaries() {
        assert_ne!(
            fnv1a64_parts(["ab", "c"], 0),
            fnv1a64_parts(["a", "bc"], 0)
        );
    }

    #[test]
    fn seed_changes_hash_family() {
        assert_ne!(fnv1a64(b"text", 1), fnv1a64(b"text", 2));
    }
}

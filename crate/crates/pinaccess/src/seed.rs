//! Deterministic seed derivation.
//!
//! Every randomized step draws from a ChaCha8 stream whose seed is derived
//! from the global run seed and a textual tag (testcell id plus purpose).
//! Derivation uses FNV-1a and a splitmix64 finalizer, so sub-seeds do not
//! depend on enumeration order, platform, or std hasher internals.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf29ce484222325;
const FNV_PRIME: u64 = 0x100000001b3;

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Sub-seed for one tagged purpose under a global run seed.
pub fn sub_seed(global: u64, tag: &str) -> u64 {
    splitmix64(global ^ fnv1a64(tag.as_bytes()))
}

pub fn rng_for(global: u64, tag: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(sub_seed(global, tag))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sub_seed_is_stable() {
        // Frozen values guard against accidental algorithm changes, which
        // would silently break run reproducibility.
        assert_eq!(fnv1a64(b"scell_INV"), 0xf4f04c3742afbbfe);
        assert_eq!(sub_seed(7, "scell_INV"), sub_seed(7, "scell_INV"));
        assert_ne!(sub_seed(7, "scell_INV"), sub_seed(8, "scell_INV"));
        assert_ne!(sub_seed(7, "scell_INV"), sub_seed(7, "scell_IN"));
    }
}

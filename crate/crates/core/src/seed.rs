//! Deterministic seed derivation.
//!
//! FNV-1a is used instead of the std hasher so derived seeds are identical
//! across platforms and toolchain versions.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x1000_0000_01b3;

pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Derives a child seed from a base seed and any number of textual labels.
pub fn derive_seed(base: u64, labels: &[&str]) -> u64 {
    let mut buf = base.to_le_bytes().to_vec();
    for label in labels {
        buf.push(0x1f); // separator so ("ab","c") != ("a","bc")
        buf.extend_from_slice(label.as_bytes());
    }
    fnv1a(&buf)
}

/// The one RNG used everywhere; ChaCha streams are reproducible across platforms.
pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivation_is_stable() {
        // frozen: a change here breaks reproducibility of every logged run
        assert_eq!(derive_seed(0, &["weights"]), derive_seed(0, &["weights"]));
        assert_ne!(derive_seed(0, &["weights"]), derive_seed(0, &["train"]));
        assert_ne!(derive_seed(0, &["weights"]), derive_seed(1, &["weights"]));
        assert_ne!(derive_seed(0, &["ab", "c"]), derive_seed(0, &["a", "bc"]));
    }
}

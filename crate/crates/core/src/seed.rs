//! Seed derivation for nested deterministic randomness.

/// splitmix64 finalizer.
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from a base seed and a stream index. Distinct
/// indices give unrelated streams; the same pair always gives the same seed.
pub fn mix_seed(base: u64, index: u64) -> u64 {
    splitmix(base ^ splitmix(index.wrapping_add(0xA076_1D64_78BD_642F)))
}

/// Two-level variant for (repeat, fold)-style nesting.
pub fn mix_seed3(base: u64, a: u64, b: u64) -> u64 {
    mix_seed(mix_seed(base, a), b)
}

//! Deterministic seed derivation.
//!
//! Every stochastic component of the crate (data generation, weight
//! initialization, trial sampling) takes an explicit `u64` seed. Sub-seeds are
//! derived with a SplitMix64 chain so that independent streams never share
//! state and the mapping is stable across platforms and releases.

/// One SplitMix64 step: advances `state` and returns the next output word.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from `base` and an ordered list of tags.
///
/// Used, e.g., for per-trial seeds: `derive(base_seed, &[m as u64, t as u64])`.
/// The tags are folded in sequentially, so `derive(s, &[a, b])` differs from
/// `derive(s, &[b, a])`.
pub fn derive(base: u64, tags: &[u64]) -> u64 {
    let mut state = base ^ 0x6a09_e667_f3bc_c908;
    let mut out = splitmix64(&mut state);
    for &tag in tags {
        state ^= tag.wrapping_mul(0x9e37_79b9_7f4a_7c15);
        out = splitmix64(&mut state);
    }
    out
}

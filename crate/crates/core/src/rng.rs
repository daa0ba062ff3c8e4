//! Counter-based random streams.
//!
//! A [`Stream`] maps a 64-bit counter to a uniform draw without carrying any
//! mutable state, in the manner of SplittableRandom/SplitMix64: output `c` is
//! `mix64(seed + (c + 1) * gamma)` with a per-stream odd `gamma`. Replication
//! `i` of an experiment uses `Stream::new(master_seed, i)`, so replications
//! can be evaluated in any order or in parallel and still produce the same
//! totals.

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// Stafford's variant 13 of the MurmurHash3 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[inline]
fn mix_gamma(z: u64) -> u64 {
    let mut z = (z ^ (z >> 33)).wrapping_mul(0xff51_afd7_ed55_8ccd);
    z = (z ^ (z >> 33)).wrapping_mul(0xc4ce_b9fe_1a85_ec53);
    z = (z ^ (z >> 33)) | 1;
    // reject gammas with too few bit transitions, as SplittableRandom does
    if (z ^ (z >> 1)).count_ones() < 24 {
        z ^ 0xaaaa_aaaa_aaaa_aaaa
    } else {
        z
    }
}

/// Derives an independent 64-bit seed from a parent seed and a tag.
#[inline]
pub fn derive_seed(parent: u64, tag: u64) -> u64 {
    mix64(parent ^ mix64(tag.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// Hashes a short ASCII tag into a 64-bit value usable with [`derive_seed`].
pub const fn tag(name: &str) -> u64 {
    // FNV-1a
    let bytes = name.as_bytes();
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut i = 0;
    while i < bytes.len() {
        h ^= bytes[i] as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
        i += 1;
    }
    h
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stream {
    seed: u64,
    gamma: u64,
}

impl Stream {
    pub fn new(master_seed: u64, index: u64) -> Self {
        let base = derive_seed(master_seed, index);
        Stream {
            seed: mix64(base),
            gamma: mix_gamma(base.wrapping_add(GOLDEN_GAMMA)),
        }
    }

    #[inline]
    pub fn next_u64_at(&self, counter: u64) -> u64 {
        mix64(
            self.seed
                .wrapping_add(counter.wrapping_add(1).wrapping_mul(self.gamma)),
        )
    }

    /// Uniform draw in `[0, 1)` with 53 bits of precision.
    #[inline]
    pub fn uniform_at(&self, counter: u64) -> f64 {
        (self.next_u64_at(counter) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    pub fn bernoulli_at(&self, counter: u64, p: f64) -> bool {
        self.uniform_at(counter) < p
    }
}

//! Deterministic 64-bit random streams.
//!
//! Every random draw in this crate flows through [`SplitMix64`] so that
//! fixtures, samples, and simulations are reproducible bit for bit from a
//! seed — including by reimplementations in other languages. The generator
//! is fixed by its constants:
//!
//! * the state advances by `GAMMA = 0x9E3779B97F4A7C15` per draw, and
//! * the output is the advanced state passed through the finalizer
//!   `z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9`,
//!   `z = (z ^ (z >> 27)) * 0x94D049BB133111EB`,
//!   `z ^ (z >> 31)`.
//!
//! Independent substreams (one per replication, one per sample) are opened
//! in O(1) via [`substream_seed`].

/// Per-draw state increment (the 64-bit golden-ratio constant).
pub const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Output finalizer applied to the advanced state.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the independent substream `index` derived from `seed`.
///
/// Defined as `mix(mix(seed) + index * GAMMA)`, so any substream can be
/// opened without generating its predecessors.
pub fn substream_seed(seed: u64, index: u64) -> u64 {
    mix(mix(seed).wrapping_add(index.wrapping_mul(GAMMA)))
}

/// Counter-based splitmix-style generator with a 64-bit state.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GAMMA);
        mix(self.state)
    }

    /// Uniform draw on [0, 1) carrying 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        self.next_unit_numerator() as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Numerator `k` of the uniform draw `k / 2^53`; used where the draw
    /// must be compared against exact rational thresholds.
    pub fn next_unit_numerator(&mut self) -> u64 {
        self.next_u64() >> 11
    }
}

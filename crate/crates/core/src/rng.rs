//! Deterministic pseudo-random streams.
//!
//! Document splitting and synthetic-corpus generation must be byte-for-byte
//! reproducible across platforms, so both are driven by a splitmix64 stream
//! rather than a platform RNG.

/// A splitmix64 generator (Steele, Lea & Flood 2014).
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in `0..bound` by modulo reduction. `bound` must be > 0.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        self.next_u64() % bound
    }

    /// Uniform draw in the inclusive range `[lo, hi]`.
    pub fn next_in(&mut self, lo: u64, hi: u64) -> u64 {
        debug_assert!(lo <= hi);
        lo + self.next_below(hi - lo + 1)
    }

    /// Bernoulli draw with success probability `p`.
    pub fn chance(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Poisson draw via Knuth's product method; fine for small means.
    pub fn poisson(&mut self, mean: f64) -> u64 {
        if mean <= 0.0 {
            return 0;
        }
        let limit = (-mean).exp();
        let mut count = 0u64;
        let mut product = 1.0;
        loop {
            product *= self.next_f64();
            if product <= limit {
                return count;
            }
            count += 1;
        }
    }

    /// In-place Fisher-Yates shuffle: one swap per index, descending,
    /// using modulo reduction of the stream.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.next_below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}

/// One splitmix64 scramble of `seed`: decorrelates sub-seeds built by
/// XOR-ing indices into a master seed.
pub fn mix(seed: u64) -> u64 {
    SplitMix64::new(seed).next_u64()
}

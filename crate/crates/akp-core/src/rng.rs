//! Deterministic pseudo-random stream used everywhere randomness is needed,
//! so fixed-seed experiments replay bit-exactly on any platform.
//!
//! The generator is splitmix64: each call adds the Weyl constant
//! 0x9E3779B97F4A7C15 to the 64-bit state and scrambles the result with
//! `mix64`. Uniform f64 draws keep the top 53 bits of the output, giving a
//! value in [0, 1). Normal draws use Box-Muller and consume exactly two
//! uniform draws per call.

/// splitmix64 finalizer. Also used to derive child stream seeds.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Debug)]
pub struct Prng {
    state: u64,
}

impl Prng {
    pub fn new(seed: u64) -> Self {
        Prng { state: seed }
    }

    /// Independent child stream: the parent seed is folded with each tag
    /// word through `mix64`. Deterministic and collision-resistant enough
    /// for stream separation.
    pub fn derive(seed: u64, tags: &[u64]) -> Self {
        let mut s = mix64(seed ^ 0x6A09_E667_F3BC_C909);
        for &t in tags {
            s = mix64(s ^ t);
        }
        Prng { state: s }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        mix64(self.state)
    }

    /// Uniform in [0, 1) with 53-bit mantissa resolution.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        const DEN: f64 = (1u64 << 53) as f64;
        (self.next_u64() >> 11) as f64 / DEN
    }

    /// Uniform in [low, high).
    pub fn next_range(&mut self, low: f64, high: f64) -> f64 {
        low + (high - low) * self.next_f64()
    }

    /// Standard normal via Box-Muller. `u1` is shifted into (0, 1] so the
    /// logarithm is always finite.
    pub fn next_normal(&mut self) -> f64 {
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = (self.next_u64() % (i as u64 + 1)) as usize;
            items.swap(i, j);
        }
    }
}

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

/// Seeded deterministic generator.
///
/// The stream is xoshiro256** whose 256-bit state is expanded from the 64-bit
/// seed with SplitMix64 (the `seed_from_u64` rule of `rand_xoshiro`). Derived
/// values are defined on top of `next_u64` so other implementations can
/// reproduce them exactly:
///
/// * `next_uniform`: `(next_u64() >> 11) · 2⁻⁵³`, in `[0, 1)`.
/// * `next_below(n)`: Lemire's multiply-shift with rejection.
/// * `next_gaussian`: Box–Muller, `sqrt(-2 ln(1 - u₁)) · cos(2π u₂)`, two
///   uniforms per sample, nothing cached.
/// * `shuffle`: Fisher–Yates from the back, `j = next_below(i + 1)`.
#[derive(Clone, Debug)]
pub struct Rng {
    inner: Xoshiro256StarStar,
}

const STREAM_MIX: u64 = 0x9E37_79B9_7F4A_7C15;

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self { inner: Xoshiro256StarStar::seed_from_u64(seed) }
    }

    /// Independent stream for one purpose (splits, init, dropout...) of a run.
    /// Seeds the generator with `seed ^ (stream · 0x9E3779B97F4A7C15)`.
    pub fn stream(seed: u64, stream: u64) -> Self {
        Self::new(seed ^ stream.wrapping_mul(STREAM_MIX))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    #[inline]
    pub fn next_uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, n)`. `n` must be positive.
    pub fn next_below(&mut self, n: usize) -> usize {
        assert!(n > 0, "next_below(0)");
        let n = n as u64;
        let mut m = u128::from(self.next_u64()) * u128::from(n);
        if (m as u64) < n {
            let threshold = n.wrapping_neg() % n;
            while (m as u64) < threshold {
                m = u128::from(self.next_u64()) * u128::from(n);
            }
        }
        (m >> 64) as usize
    }

    pub fn next_gaussian(&mut self) -> f64 {
        let u1 = 1.0 - self.next_uniform();
        let u2 = self.next_uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.next_below(i + 1);
            items.swap(i, j);
        }
    }

    /// `0..n` in seeded random order.
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..n).collect();
        self.shuffle(&mut idx);
        idx
    }
}

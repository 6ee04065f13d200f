//! Seeded random streams with stable substream derivation.
//!
//! Every stochastic routine in this crate draws from a [`Stream`] keyed by a
//! master seed plus integer tags (purpose, replicate index, ...). Work split
//! across threads derives one substream per unit of work, so results are
//! identical for any worker count. Distribution sampling is implemented here
//! with a fixed draw discipline (one normal always consumes exactly two
//! uniforms) so the consumed stream positions never depend on sampled values.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Stream tags namespace the master seed by purpose.
pub mod tag {
    pub const DEPENDENCY: u64 = 0x01;
    pub const NULL_X: u64 = 0x02;
    pub const NULL_Y: u64 = 0x03;
    pub const PERMUTATION: u64 = 0x04;
    pub const POWER_TRIAL: u64 = 0x05;
    pub const SCREEN_FEATURE: u64 = 0x06;
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Collapses `(seed, tags...)` into a single substream key.
pub fn substream_key(seed: u64, tags: &[u64]) -> u64 {
    let mut state = seed;
    let mut key = splitmix64(&mut state);
    for &t in tags {
        state ^= t.wrapping_mul(0xff51_afd7_ed55_8ccd);
        key ^= splitmix64(&mut state);
    }
    key
}

/// A deterministic random stream.
pub struct Stream {
    core: ChaCha8Rng,
}

impl Stream {
    pub fn new(seed: u64, tags: &[u64]) -> Self {
        Stream {
            core: ChaCha8Rng::seed_from_u64(substream_key(seed, tags)),
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.core.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    #[inline]
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `(0, 1]`; safe as a logarithm argument.
    #[inline]
    pub fn unit_open_low(&mut self) -> f64 {
        1.0 - self.unit()
    }

    /// Uniform on `[a, b)`.
    #[inline]
    pub fn uniform(&mut self, a: f64, b: f64) -> f64 {
        a + (b - a) * self.unit()
    }

    /// Standard normal via Box-Muller. Consumes exactly two uniforms.
    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        let u1 = self.unit_open_low();
        let u2 = self.unit();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Bernoulli draw; consumes one uniform.
    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.unit() < p
    }

    /// Uniform integer in `[0, bound)`.
    #[inline]
    pub fn below(&mut self, bound: usize) -> usize {
        debug_assert!(bound > 0);
        (self.next_u64() % bound as u64) as usize
    }

    /// Fisher-Yates permutation of `0..n`.
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut pi: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = self.below(i + 1);
            pi.swap(i, j);
        }
        pi
    }
}

/// Runs `f(i)` for `i in 0..count` on up to `workers` threads and returns the
/// results in index order. `f` must depend only on its index (each unit of
/// work derives its own [`Stream`]), which makes the output independent of
/// the worker count and of scheduling.
pub fn run_indexed<T, F>(count: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let workers = workers.max(1).min(count.max(1));
    if workers <= 1 {
        return (0..count).map(f).collect();
    }

    let mut slots: Vec<Option<T>> = (0..count).map(|_| None).collect();
    let chunk = count.div_ceil(workers);
    std::thread::scope(|scope| {
        for (t, piece) in slots.chunks_mut(chunk).enumerate() {
            let f = &f;
            scope.spawn(move || {
                for (off, slot) in piece.iter_mut().enumerate() {
                    *slot = Some(f(t * chunk + off));
                }
            });
        }
    });
    slots
        .into_iter()
        .map(|s| s.expect("worker failed"))
        .collect()
}

//! Per-chunk random streams and the variate transforms built on them.

use std::f64::consts::TAU;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One ChaCha8 substream per chunk index, all derived from the same seed.
/// Draws depend only on `(seed, chunk)`, never on which thread runs them.
#[derive(Debug, Clone)]
pub struct ChunkRng {
    inner: ChaCha8Rng,
    spare: Option<f64>,
}

impl ChunkRng {
    pub fn new(seed: u64, chunk: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(chunk);
        ChunkRng { inner, spare: None }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `(0, 1]` with 53 random bits, so `ln U` is always finite.
    pub fn uniform_open0(&mut self) -> f64 {
        ((self.inner.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal by Box-Muller; the second variate of each pair is
    /// kept for the next call.
    pub fn std_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let r = (-2.0 * self.uniform_open0().ln()).sqrt();
        let (sin, cos) = (TAU * self.uniform_open0()).sin_cos();
        self.spare = Some(r * sin);
        r * cos
    }

    pub fn normal(&mut self, sigma: f64) -> f64 {
        sigma * self.std_normal()
    }

    /// Rayleigh with `E[β²] = Ω` by inversion, `β = √(-Ω ln U)`.
    pub fn rayleigh(&mut self, omega: f64) -> f64 {
        (-omega * self.uniform_open0().ln()).sqrt()
    }
}

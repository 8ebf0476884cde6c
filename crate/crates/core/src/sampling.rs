//! Seeded random streams and the samplers behind the Monte Carlo oracles.
//!
//! Every stream is a ChaCha8 generator (`rand_chacha`): a counter-based
//! cipher with 2^64 independent streams of period 2^68 each. A stream is
//! identified by `(seed, stream id)`; parallel work derives one stream per
//! work item so results do not depend on scheduling.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Open01};

use crate::error::{Error, Result};

/// A reproducible random stream.
#[derive(Debug, Clone)]
pub struct RngHandle {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

impl RngHandle {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        RngHandle { seed, stream, inner }
    }

    /// Stream keyed by a path of ids, e.g. `[batch_size, replicate]`.
    pub fn derive(seed: u64, path: &[u64]) -> Self {
        let mut h = 0x6a09_e667_f3bc_c909u64;
        for &id in path {
            h = splitmix64(h ^ id);
        }
        Self::with_stream(seed, h)
    }

    /// Child stream of this handle's seed.
    pub fn child(&self, path: &[u64]) -> Self {
        let mut full = Vec::with_capacity(path.len() + 1);
        full.push(self.stream);
        full.extend_from_slice(path);
        Self::derive(self.seed, &full)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngCore for RngHandle {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Beta(a, b) sampler built from two Gamma draws, `X/(X+Y)`.
#[derive(Debug, Clone)]
pub struct BetaSampler {
    x: Gamma<f64>,
    y: Gamma<f64>,
}

impl BetaSampler {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
            return Err(Error::domain(format!(
                "beta parameters must be positive and finite, got ({a}, {b})"
            )));
        }
        let x = Gamma::new(a, 1.0).map_err(|e| Error::domain(e.to_string()))?;
        let y = Gamma::new(b, 1.0).map_err(|e| Error::domain(e.to_string()))?;
        Ok(BetaSampler { x, y })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let x = self.x.sample(rng);
            let y = self.y.sample(rng);
            let v = x / (x + y);
            // both draws can underflow for tiny shapes
            if v > 0.0 && v < 1.0 {
                return v;
            }
        }
    }
}

/// One draw from Beta(a, b) on the open interval (0, 1).
pub fn sample_beta(a: f64, b: f64, rng: &mut RngHandle) -> Result<f64> {
    Ok(BetaSampler::new(a, b)?.sample(rng))
}

/// `n` i.i.d. U(0,1) draws sorted ascending; entry `k` (1-based) is the
/// `k`-th order statistic, distributed Beta(k, n+1−k).
pub fn sample_uniform_order_stats(n: usize, rng: &mut RngHandle) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| rng.sample(Open01)).collect();
    v.sort_by(f64::total_cmp);
    v
}

//! Seeded random streams.
//!
//! Every stochastic quantity in the crate is drawn from [`SimRng`], a ChaCha8
//! stream (`rand_chacha::ChaCha8Rng`) seeded from a single `u64`. Normal
//! deviates use the Box–Muller transform on two 53-bit uniforms, returning
//! the cosine branch first and caching the sine branch for the next call.
//! Replication seeds are derived from a master seed with [`split_seed`]
//! (SplitMix64 finalizer), so a `(master, stream)` pair always maps to the
//! same child stream on every platform.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function applied to `master ^ (stream + 1) * GOLDEN_GAMMA`.
pub fn split_seed(master: u64, stream: u64) -> u64 {
    let mut z = master ^ stream.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct SimRng {
    seed: u64,
    inner: ChaCha8Rng,
    spare: Option<f64>,
}

impl SimRng {
    pub fn seed_from(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Child stream `stream` of this generator's seed.
    pub fn child(&self, stream: u64) -> Self {
        Self::seed_from(split_seed(self.seed, stream))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform on [0, 1) with 53 bits of resolution.
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal deviate (Box–Muller).
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // 1 - U lies in (0, 1], keeping the logarithm finite.
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let angle = std::f64::consts::TAU * u2;
        self.spare = Some(r * angle.sin());
        r * angle.cos()
    }

    /// +1 or -1 with probability 1/2 each.
    pub fn sign(&mut self) -> f64 {
        if self.inner.next_u64() >> 63 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Uniform integer in `0..bound`.
    pub fn below(&mut self, bound: usize) -> usize {
        self.inner.gen_range(0..bound as u64) as usize
    }

    /// Uniformly random size-`k` subset of `0..p`, sorted ascending
    /// (partial Fisher–Yates shuffle).
    pub fn subset(&mut self, p: usize, k: usize) -> Vec<usize> {
        assert!(k <= p, "subset size {k} exceeds population {p}");
        let mut idx: Vec<usize> = (0..p).collect();
        for i in 0..k {
            let j = i + self.below(p - i);
            idx.swap(i, j);
        }
        idx.truncate(k);
        idx.sort_unstable();
        idx
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = SimRng::seed_from(42);
        let mut b = SimRng::seed_from(42);
        for _ in 0..100 {
            assert_eq!(a.normal().to_bits(), b.normal().to_bits());
        }
    }

    #[test]
    fn split_seed_separates_streams() {
        let seeds: Vec<u64> = (0..1000).map(|r| split_seed(7, r)).collect();
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), seeds.len());
        assert_ne!(split_seed(7, 0), split_seed(8, 0));
    }

    #[test]
    fn normal_moments() {
        let mut rng = SimRng::seed_from(1);
        let m = 200_000;
        let draws: Vec<f64> = (0..m).map(|_| rng.normal()).collect();
        let mean = draws.iter().sum::<f64>() / m as f64;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / m as f64;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.01, "var {var}");
    }

    #[test]
    fn subset_is_uniform_enough() {
        let mut rng = SimRng::seed_from(3);
        let mut counts = [0usize; 10];
        for _ in 0..20_000 {
            for j in rng.subset(10, 3) {
                counts[j] += 1;
            }
        }
        // Expected 6000 per index.
        for c in counts {
            assert!((c as f64 - 6000.0).abs() < 300.0, "{counts:?}");
        }
    }
}

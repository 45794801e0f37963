//! Seedable, splittable randomness with numbered substreams.
//!
//! Every randomized routine in this crate declares which substream it draws
//! from (bootstrap replicate `k` uses substream `k`, split-half repeat `k`
//! uses substream `k`, respondent `j` in synthetic data uses substream `j`).
//! Because substreams are independent counters of one keyed generator,
//! replicates can run in any order, or in parallel, and still produce
//! bit-identical output for a given seed.
//!
//! The generator is ChaCha12: the 64-bit seed expands to the cipher key and
//! the substream index becomes the stream nonce, so each substream is an
//! independent counter sequence. The derived draws (`index_below`, `shuffle`,
//! `unit_f64`, `normal`) are implemented here rather than borrowed from a
//! distributions crate, which pins the exact draw sequence as part of the
//! reproducibility contract:
//!
//! * `unit_f64`: top 53 bits of one `u64`, scaled by 2⁻⁵³.
//! * `index_below(n)`: Lemire's widening-multiply rejection method.
//! * `shuffle`: Fisher–Yates, descending index, `j = index_below(i + 1)`.
//! * `normal`: Marsaglia polar method, both values consumed in order.

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

use crate::math;

/// Identifier recorded in run manifests for the draw contract above.
pub const RNG_CONTRACT: &str = "chacha12-substreams-v1";

/// Factory for independent substreams of one seeded generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamRng {
    seed: u64,
}

impl StreamRng {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The `k`-th substream. Substreams with distinct `k` never overlap.
    pub fn stream(&self, k: u64) -> Stream {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(k);
        Stream { rng, spare: None }
    }
}

/// One substream; all draws below consume it in a documented order.
#[derive(Debug, Clone)]
pub struct Stream {
    rng: ChaCha12Rng,
    spare: Option<f64>,
}

impl Stream {
    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform draw in [0, 1) with 53-bit resolution.
    #[inline]
    pub fn unit_f64(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        (self.next_u64() >> 11) as f64 * SCALE
    }

    /// Uniform index in `0..n` (Lemire rejection; unbiased).
    pub fn index_below(&mut self, n: usize) -> usize {
        assert!(n > 0, "index_below requires n > 0");
        let n = n as u64;
        let mut x = self.next_u64();
        let mut m = (x as u128) * (n as u128);
        let mut lo = m as u64;
        if lo < n {
            let threshold = n.wrapping_neg() % n;
            while lo < threshold {
                x = self.next_u64();
                m = (x as u128) * (n as u128);
                lo = m as u64;
            }
        }
        (m >> 64) as usize
    }

    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.unit_f64() < p
    }

    /// Fisher–Yates shuffle, descending index order.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.index_below(i + 1);
            items.swap(i, j);
        }
    }

    /// Draws `k` distinct indices from `0..n` (partial Fisher–Yates); the
    /// result is sorted ascending.
    pub fn sample_indices(&mut self, n: usize, k: usize) -> alloc::vec::Vec<usize> {
        assert!(k <= n, "cannot sample {k} of {n}");
        let mut pool: alloc::vec::Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.index_below(n - i);
            pool.swap(i, j);
        }
        pool.truncate(k);
        pool.sort_unstable();
        pool
    }

    /// Standard normal draw (Marsaglia polar; the spare deviate is kept).
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.unit_f64() - 1.0;
            let v = 2.0 * self.unit_f64() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let f = math::sqrt(-2.0 * math::ln(s) / s);
                self.spare = Some(v * f);
                return u * f;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream_is_deterministic() {
        let a: Vec<u64> = {
            let mut s = StreamRng::new(7).stream(3);
            (0..32).map(|_| s.next_u64()).collect()
        };
        let b: Vec<u64> = {
            let mut s = StreamRng::new(7).stream(3);
            (0..32).map(|_| s.next_u64()).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn substreams_differ() {
        let mut s0 = StreamRng::new(7).stream(0);
        let mut s1 = StreamRng::new(7).stream(1);
        let a: Vec<u64> = (0..16).map(|_| s0.next_u64()).collect();
        let b: Vec<u64> = (0..16).map(|_| s1.next_u64()).collect();
        assert_ne!(a, b);
    }

    #[test]
    fn unit_f64_in_range() {
        let mut s = StreamRng::new(1).stream(0);
        for _ in 0..10_000 {
            let x = s.unit_f64();
            assert!((0.0..1.0).contains(&x));
        }
    }

    #[test]
    fn index_below_covers_all_residues() {
        let mut s = StreamRng::new(2).stream(0);
        let mut seen = [false; 7];
        for _ in 0..1_000 {
            seen[s.index_below(7)] = true;
        }
        assert!(seen.iter().all(|&b| b));
    }

    #[test]
    fn sample_indices_distinct_sorted() {
        let mut s = StreamRng::new(3).stream(9);
        let idx = s.sample_indices(50, 20);
        assert_eq!(idx.len(), 20);
        for w in idx.windows(2) {
            assert!(w[0] < w[1]);
        }
    }

    #[test]
    fn normal_moments_roughly_standard() {
        let mut s = StreamRng::new(4).stream(0);
        let n = 200_000;
        let (mut sum, mut sq) = (0.0, 0.0);
        for _ in 0..n {
            let z = s.normal();
            sum += z;
            sq += z * z;
        }
        let mean = sum / n as f64;
        let var = sq / n as f64 - mean * mean;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
    }
}

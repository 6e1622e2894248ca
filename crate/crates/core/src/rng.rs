//! Seeded, splittable random number generation.
//!
//! The generator is ChaCha8 keyed by a SplitMix64 expansion of a 64-bit seed,
//! with the ChaCha 64-bit stream counter used as the stream id. The same
//! (seed, stream) pair therefore produces the same byte sequence on every
//! platform, and distinct streams derived from one seed are independent.
//!
//! Gaussian variates use the Marsaglia polar method on top of 53-bit uniforms
//! (the spare deviate is cached), so the full sample sequence is a pure
//! function of (seed, stream) and the call sequence.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::vector::Vector;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Deterministic RNG state: one owner per run, cheap to split into
/// independent streams for parallel repetitions.
#[derive(Clone, Debug)]
pub struct RngState {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
    spare_normal: Option<f64>,
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut s = seed;
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut s).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(stream);
        RngState {
            seed,
            stream,
            rng,
            spare_normal: None,
        }
    }

    /// Fresh state on an independent stream derived from the same seed.
    pub fn stream(&self, stream: u64) -> Self {
        Self::with_stream(self.seed, stream)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform in [0, 1) with 53-bit resolution.
    pub fn uniform_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in [0, n).
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0);
        // Rejection against the largest multiple of n that fits in u64.
        let n64 = n as u64;
        let zone = u64::MAX - (u64::MAX % n64);
        loop {
            let x = self.next_u64();
            if x < zone {
                return (x % n64) as usize;
            }
        }
    }

    /// Standard normal deviate (Marsaglia polar method, spare cached).
    pub fn normal_f64(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.uniform_f64() - 1.0;
            let v = 2.0 * self.uniform_f64() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let m = (-2.0 * s.ln() / s).sqrt();
                self.spare_normal = Some(v * m);
                return u * m;
            }
        }
    }

    pub fn uniform<T: Real>(&mut self) -> T {
        T::from_f64_lossy(self.uniform_f64())
    }

    pub fn normal<T: Real>(&mut self) -> T {
        T::from_f64_lossy(self.normal_f64())
    }

    /// Vector of i.i.d. standard normals.
    pub fn normal_vector<T: Real>(&mut self, d: usize) -> Vector<T> {
        Vector::from_raw((0..d).map(|_| self.normal::<T>()).collect())
    }

    /// Rademacher vector: i.i.d. entries uniform on {-1, +1}.
    pub fn sign_vector<T: Real>(&mut self, d: usize) -> Vector<T> {
        Vector::from_raw(
            (0..d)
                .map(|_| {
                    if self.next_u64() & 1 == 1 {
                        T::one()
                    } else {
                        -T::one()
                    }
                })
                .collect(),
        )
    }
}

/// Uniform sample from the unit sphere S^{d-1}, by normalizing a vector of
/// i.i.d. standard normals (resampling in the measure-zero degenerate case).
pub fn sample_unit_sphere<T: Real>(rng: &mut RngState, d: usize) -> Result<Vector<T>> {
    if d == 0 {
        return Err(Error::InvalidDimension(
            "sphere dimension must be at least 1".into(),
        ));
    }
    let floor = T::from_f64_lossy(1e-150);
    loop {
        let g = rng.normal_vector::<T>(d);
        if let Some(u) = g.normalized(floor) {
            return Ok(u);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible_streams() {
        let mut a = RngState::with_stream(42, 7);
        let mut b = RngState::with_stream(42, 7);
        let xs: Vec<u64> = (0..32).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..32).map(|_| b.next_u64()).collect();
        assert_eq!(xs, ys);

        let mut c = RngState::with_stream(42, 8);
        let zs: Vec<u64> = (0..32).map(|_| c.next_u64()).collect();
        assert_ne!(xs, zs);
    }

    #[test]
    fn normals_have_sane_moments() {
        let mut rng = RngState::new(1);
        let n = 100_000;
        let (mut sum, mut sumsq) = (0.0, 0.0);
        for _ in 0..n {
            let z = rng.normal_f64();
            sum += z;
            sumsq += z * z;
        }
        let mean = sum / n as f64;
        let var = sumsq / n as f64 - mean * mean;
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((var - 1.0).abs() < 0.03, "var {var}");
    }

    #[test]
    fn sphere_dimension_one_is_plus_minus_one() {
        let mut rng = RngState::new(3);
        let mut seen = [false, false];
        for _ in 0..64 {
            let v: Vector<f64> = sample_unit_sphere(&mut rng, 1).unwrap();
            assert!((v[0].abs() - 1.0).abs() < 1e-12);
            seen[usize::from(v[0] > 0.0)] = true;
        }
        assert!(seen[0] && seen[1]);
    }

    #[test]
    fn sphere_unit_norm() {
        let mut rng = RngState::new(9);
        for _ in 0..100 {
            let v: Vector<f64> = sample_unit_sphere(&mut rng, 10).unwrap();
            assert!((v.norm() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn sphere_rejects_dimension_zero() {
        let mut rng = RngState::new(0);
        assert!(sample_unit_sphere::<f64>(&mut rng, 0).is_err());
    }

    #[test]
    fn sphere_coordinate_means_vanish() {
        // Each empirical coordinate mean of 1e5 samples within 4/sqrt(1e5).
        let mut rng = RngState::new(11);
        let d = 6;
        let n = 100_000;
        let mut sums = vec![0.0; d];
        for _ in 0..n {
            let v: Vector<f64> = sample_unit_sphere(&mut rng, d).unwrap();
            for (s, &x) in sums.iter_mut().zip(v.as_slice()) {
                *s += x;
            }
        }
        let bound = 4.0 / (n as f64).sqrt();
        for s in sums {
            assert!((s / n as f64).abs() < bound);
        }
    }

    #[test]
    fn below_is_unbiased_enough() {
        let mut rng = RngState::new(5);
        let mut counts = [0usize; 5];
        for _ in 0..10_000 {
            counts[rng.below(5)] += 1;
        }
        for c in counts {
            assert!((c as f64 - 2000.0).abs() < 300.0);
        }
    }
}

//! Seeded random variates with independent per-path substreams.
//!
//! A [`RandomStream`] is a ChaCha8 generator keyed by `(seed, domain,
//! path_index)`. Distinct channel families of one path (the three Poisson
//! families of a coupled pair) use distinct ChaCha stream ids under the same
//! key, so every sequence is a pure function of its key and never depends on
//! the order in which paths are executed.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{invalid_argument, Result};

/// Means below this use sequential-search inversion; above, PTRS rejection.
const INVERSION_LIMIT: f64 = 10.0;

/// Key material folded into every stream so that streams of this crate never
/// coincide with a plain ChaCha8 seeded from the same words.
const KEY_SALT: u64 = 0x6d6c_6d63_6374_6d63;

#[derive(Debug, Clone)]
pub struct RandomStream {
    rng: ChaCha8Rng,
    seed: u64,
    domain: u64,
    path_index: u64,
    draws: u64,
}

impl RandomStream {
    pub fn new(seed: u64, path_index: u64) -> Self {
        Self::keyed(seed, 0, path_index)
    }

    /// Stream for path `path_index` inside a logical `domain` (an estimator
    /// level, a pilot phase, ...).
    pub fn keyed(seed: u64, domain: u64, path_index: u64) -> Self {
        let mut key = [0u8; 32];
        key[0..8].copy_from_slice(&seed.to_le_bytes());
        key[8..16].copy_from_slice(&domain.to_le_bytes());
        key[16..24].copy_from_slice(&path_index.to_le_bytes());
        key[24..32].copy_from_slice(&KEY_SALT.to_le_bytes());
        RandomStream {
            rng: ChaCha8Rng::from_seed(key),
            seed,
            domain,
            path_index,
            draws: 0,
        }
    }

    /// Independent stream under the same key, distinguished by `family`.
    /// Family 0 is the stream returned by the constructors.
    pub fn family(&self, family: u64) -> Self {
        let mut s = Self::keyed(self.seed, self.domain, self.path_index);
        s.rng.set_stream(family);
        s
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn path_index(&self) -> u64 {
        self.path_index
    }

    /// Number of variates (uniform, exponential or Poisson) handed out.
    pub fn draws(&self) -> u64 {
        self.draws
    }

    #[inline]
    fn raw_uniform(&mut self) -> f64 {
        // 53 random bits centred in their cell: never 0, never 1.
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on the open interval (0, 1).
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.draws += 1;
        self.raw_uniform()
    }

    /// Unit-rate exponential, `ln(1/U)`.
    #[inline]
    pub fn unit_exponential(&mut self) -> f64 {
        self.draws += 1;
        -libm::log(self.raw_uniform())
    }

    /// Exact Poisson sample. A zero mean returns 0 without consuming
    /// randomness.
    pub fn poisson(&mut self, mean: f64) -> Result<u64> {
        if !(mean.is_finite() && mean >= 0.0) {
            return Err(invalid_argument("Poisson mean must be finite and >= 0"));
        }
        Ok(self.poisson_unchecked(mean))
    }

    #[inline]
    pub(crate) fn poisson_unchecked(&mut self, mean: f64) -> u64 {
        if mean == 0.0 {
            return 0;
        }
        self.draws += 1;
        if mean < INVERSION_LIMIT {
            self.poisson_inversion(mean)
        } else {
            self.poisson_ptrs(mean)
        }
    }

    fn poisson_inversion(&mut self, mean: f64) -> u64 {
        let u = self.raw_uniform();
        let mut k = 0u64;
        let mut p = libm::exp(-mean);
        let mut cdf = p;
        while u > cdf {
            k += 1;
            p *= mean / k as f64;
            if p == 0.0 {
                // Rounding left `cdf` a few ulps short of 1; the remaining
                // mass is below f64 resolution.
                break;
            }
            cdf += p;
        }
        k
    }

    /// Hörmann's transformed rejection with squeeze (PTRS), exact for
    /// `mean >= 10` with O(1) expected cost.
    fn poisson_ptrs(&mut self, mean: f64) -> u64 {
        let slam = libm::sqrt(mean);
        let loglam = libm::log(mean);
        let b = 0.931 + 2.53 * slam;
        let a = -0.059 + 0.02483 * b;
        let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        let vr = 0.9277 - 3.6224 / (b - 2.0);
        loop {
            let u = self.raw_uniform() - 0.5;
            let v = self.raw_uniform();
            let us = 0.5 - u.abs();
            let k = libm::floor((2.0 * a / us + b) * u + mean + 0.43);
            if us >= 0.07 && v <= vr {
                return k as u64;
            }
            if k < 0.0 || (us < 0.013 && v > us) {
                continue;
            }
            let lhs = libm::log(v) + libm::log(inv_alpha) - libm::log(a / (us * us) + b);
            let rhs = -mean + k * loglam - libm::lgamma(k + 1.0);
            if lhs <= rhs {
                return k as u64;
            }
        }
    }
}

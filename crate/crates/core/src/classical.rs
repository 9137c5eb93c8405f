//! Reference sequences: van der Corput (base 2), Kronecker rotations, and a
//! seeded i.i.d. uniform stream.

use std::str::FromStr;

use num_bigint::BigInt;
use rand::{RngCore, SeedableRng};
use rand_chacha::{ChaCha12Rng, ChaCha20Rng, ChaCha8Rng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::Rational;

/// The golden ratio `(1 + sqrt 5) / 2`.
pub const GOLDEN_RATIO: f64 = 1.618_033_988_749_895;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SequenceError {
    #[error("index must be at least 1")]
    ZeroIndex,
    #[error("rotation number must be positive and finite, got {0}")]
    BadAlpha(f64),
    #[error("unknown generator `{0}` (expected chacha8, chacha12 or chacha20)")]
    UnknownGenerator(String),
}

/// Binary radical inverse of `k`: the bits of `k` mirrored about the point.
pub fn van_der_corput(k: u64) -> Result<Rational, SequenceError> {
    if k == 0 {
        return Err(SequenceError::ZeroIndex);
    }
    let bits = 64 - k.leading_zeros();
    let mirrored = k.reverse_bits() >> (64 - bits);
    let den = BigInt::from(1u8) << bits as usize;
    Ok(Rational::from_parts(mirrored, den).expect("power of two"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KroneckerConfig {
    alpha: f64,
}

impl KroneckerConfig {
    pub fn new(alpha: f64) -> Result<Self, SequenceError> {
        if alpha.is_finite() && alpha > 0.0 {
            Ok(Self { alpha })
        } else {
            Err(SequenceError::BadAlpha(alpha))
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

impl Default for KroneckerConfig {
    fn default() -> Self {
        Self { alpha: GOLDEN_RATIO }
    }
}

/// `k * alpha mod 1`, evaluated naively in binary floats.
pub fn kronecker(k: u64, cfg: &KroneckerConfig) -> f64 {
    (k as f64 * cfg.alpha).fract()
}

/// Named, version-stable pseudo-random generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Generator {
    #[default]
    ChaCha8,
    ChaCha12,
    ChaCha20,
}

impl Generator {
    pub fn id(&self) -> &'static str {
        match self {
            Generator::ChaCha8 => "chacha8",
            Generator::ChaCha12 => "chacha12",
            Generator::ChaCha20 => "chacha20",
        }
    }
}

impl FromStr for Generator {
    type Err = SequenceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "chacha8" => Ok(Generator::ChaCha8),
            "chacha12" => Ok(Generator::ChaCha12),
            "chacha20" => Ok(Generator::ChaCha20),
            _ => Err(SequenceError::UnknownGenerator(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeededUniformConfig {
    pub seed: u64,
    pub generator: String,
}

impl SeededUniformConfig {
    pub fn new(seed: u64, generator: Generator) -> Self {
        Self {
            seed,
            generator: generator.id().to_string(),
        }
    }
}

/// `count` draws from `[0, 1)`, each the top 53 bits of one 64-bit output.
pub fn uniform_stream(count: usize, cfg: &SeededUniformConfig) -> Result<Vec<f64>, SequenceError> {
    fn draw(rng: &mut impl RngCore, count: usize) -> Vec<f64> {
        (0..count)
            .map(|_| (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64))
            .collect()
    }
    Ok(match cfg.generator.parse::<Generator>()? {
        Generator::ChaCha8 => draw(&mut ChaCha8Rng::seed_from_u64(cfg.seed), count),
        Generator::ChaCha12 => draw(&mut ChaCha12Rng::seed_from_u64(cfg.seed), count),
        Generator::ChaCha20 => draw(&mut ChaCha20Rng::seed_from_u64(cfg.seed), count),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::star_discrepancy;
    use crate::numeric::rational_from_parts;
    use std::collections::HashSet;

    #[test]
    fn vdc_values() {
        let q = |j, d| rational_from_parts(j, d).unwrap();
        assert_eq!(van_der_corput(1).unwrap(), q(1, 2));
        assert_eq!(van_der_corput(2).unwrap(), q(1, 4));
        assert_eq!(van_der_corput(3).unwrap(), q(3, 4));
        assert_eq!(van_der_corput(6).unwrap(), q(3, 8));
        assert_eq!(van_der_corput(0), Err(SequenceError::ZeroIndex));
        assert!(van_der_corput(u64::MAX).is_ok());
    }

    #[test]
    fn vdc_distinct() {
        let set: HashSet<_> = (1..=5000).map(|k| van_der_corput(k).unwrap()).collect();
        assert_eq!(set.len(), 5000);
    }

    #[test]
    fn vdc_dyadic_star_bound() {
        // observed maximum over m <= 12 is 1, far inside m/2 + 1
        for m in 0..=12u32 {
            let n = 1u64 << m;
            let mut pts: Vec<Rational> = (1..=n).map(|k| van_der_corput(k).unwrap()).collect();
            pts.sort();
            let d = star_discrepancy(&pts).unwrap().to_f64();
            assert!(d <= m as f64 / 2.0 + 1.0, "m = {m}: {d}");
            assert!(d <= 1.0);
        }
    }

    #[test]
    fn kronecker_values() {
        let phi = KroneckerConfig::default();
        assert_eq!(kronecker(1, &phi), GOLDEN_RATIO - 1.0);
        assert!((kronecker(1, &phi) - 0.618_033_988_749_894_9).abs() < 1e-15);
        assert_eq!(kronecker(1, &KroneckerConfig::new(1.0).unwrap()), 0.0);
        assert_eq!(kronecker(2, &KroneckerConfig::new(0.5).unwrap()), 0.0);
        assert!(KroneckerConfig::new(0.0).is_err());
        assert!(KroneckerConfig::new(f64::NAN).is_err());
    }

    #[test]
    fn kronecker_no_repeats() {
        let phi = KroneckerConfig::default();
        let set: HashSet<u64> = (1..=10_000).map(|k| kronecker(k, &phi).to_bits()).collect();
        assert_eq!(set.len(), 10_000);
    }

    #[test]
    fn uniform_determinism_and_range() {
        let cfg = SeededUniformConfig::new(7, Generator::ChaCha8);
        assert!(uniform_stream(0, &cfg).unwrap().is_empty());
        let a = uniform_stream(100, &cfg).unwrap();
        assert_eq!(a, uniform_stream(100, &cfg).unwrap());
        assert!(a.iter().all(|x| (0.0..1.0).contains(x)));
        let b = uniform_stream(100, &SeededUniformConfig::new(8, Generator::ChaCha8)).unwrap();
        assert_ne!(a, b);
        let bad = SeededUniformConfig {
            seed: 1,
            generator: "mt19937".into(),
        };
        assert!(matches!(uniform_stream(3, &bad), Err(SequenceError::UnknownGenerator(_))));
    }

    #[test]
    fn uniform_passes_ks() {
        for g in [Generator::ChaCha8, Generator::ChaCha12, Generator::ChaCha20] {
            let mut xs = uniform_stream(10_000, &SeededUniformConfig::new(2024, g)).unwrap();
            xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let n = xs.len() as f64;
            let d = xs
                .iter()
                .enumerate()
                .map(|(i, x)| f64::max((i as f64 + 1.0) / n - x, x - i as f64 / n))
                .fold(0.0, f64::max);
            // 1% critical value of the one-sample KS statistic
            assert!(d < 1.628 / n.sqrt(), "{g:?}: D = {d}");
        }
    }
}

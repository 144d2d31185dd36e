//! Reproducible sampling keyed by `(seed, stream, counter)`.
//!
//! Every logical draw sequence owns its own ChaCha stream, so work can be
//! sharded across threads without changing which values are produced.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{FpVector, PrimeField};

/// One independent, replayable random stream.
#[derive(Debug, Clone)]
pub struct SampleStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl SampleStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        SampleStream { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Position of the underlying block counter, in 32-bit words.
    pub fn counter(&self) -> u128 {
        self.rng.get_word_pos()
    }

    pub fn residue(&mut self, field: PrimeField) -> u32 {
        self.rng.random_range(0..field.modulus())
    }

    pub fn unit_f64(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn below(&mut self, bound: u64) -> u64 {
        self.rng.random_range(0..bound)
    }
}

/// A uniform vector of F_p^n drawn from `rng`.
pub fn sample_vector(n: usize, field: PrimeField, rng: &mut SampleStream) -> Result<FpVector> {
    if n == 0 {
        return Err(Error::Degenerate("vector length n must be at least 1"));
    }
    let entries = (0..n).map(|_| rng.residue(field)).collect();
    FpVector::from_residues(field, entries)
}

/// SplitMix64 finalizer; derives per-trial seeds from a master seed.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

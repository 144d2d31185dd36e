//! Additive characters of F_p.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{FpScalar, PrimeField};

/// The nontrivial additive character `a ↦ exp(2πi·g·a/p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Character {
    field: PrimeField,
    generator: u32,
    table: Vec<Complex64>,
}

impl Character {
    pub fn new(field: PrimeField, generator: u32) -> Result<Self> {
        let p = field.modulus();
        if generator == 0 || generator >= p {
            return Err(Error::InvalidParameter(format!(
                "character generator {generator} must lie in [1, {p})"
            )));
        }
        let table = (0..p)
            .map(|a| {
                let phase = ((generator as u64 * a as u64) % p as u64) as f64;
                Complex64::from_polar(1.0, 2.0 * PI * phase / p as f64)
            })
            .collect();
        Ok(Character {
            field,
            generator,
            table,
        })
    }

    /// The standard character `exp(2πi·a/p)`.
    pub fn standard(field: PrimeField) -> Self {
        Character::new(field, 1).expect("generator 1 is always valid")
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn generator(&self) -> u32 {
        self.generator
    }

    /// Value at a raw residue in `[0, p)`.
    #[inline]
    pub fn at(&self, a: u32) -> Complex64 {
        self.table[a as usize]
    }

    /// Weighted sum `Σ_a counts[a]·χ(a)` of a value histogram.
    pub fn histogram_sum(&self, counts: &[u64]) -> Complex64 {
        counts
            .iter()
            .zip(&self.table)
            .map(|(&c, &z)| z * c as f64)
            .sum()
    }
}

pub fn char_value(chi: &Character, a: FpScalar) -> Result<Complex64> {
    if a.field() != chi.field {
        return Err(Error::ModulusMismatch {
            left: chi.field.modulus(),
            right: a.modulus(),
        });
    }
    Ok(chi.at(a.value()))
}

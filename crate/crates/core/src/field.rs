//! Arithmetic in the prime field F_p and in F_p^n.
//!
//! Residues live in `u32`; the modulus is restricted to small primes so that
//! every product fits in `u64` without a reduction step in between.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported modulus.
pub const MAX_MODULUS: u32 = 1 << 16;

/// Trial-division primality test; moduli are tiny.
pub fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut q = 2u32;
    while q * q <= p {
        if p.is_multiple_of(q) {
            return false;
        }
        q += 1;
    }
    true
}

/// A validated prime modulus together with the raw residue operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct PrimeField {
    p: u32,
}

impl TryFrom<u32> for PrimeField {
    type Error = Error;
    fn try_from(p: u32) -> Result<Self> {
        PrimeField::new(p)
    }
}

impl From<PrimeField> for u32 {
    fn from(f: PrimeField) -> u32 {
        f.p
    }
}

impl PrimeField {
    pub fn new(p: u32) -> Result<Self> {
        if !(2..=MAX_MODULUS).contains(&p) {
            return Err(Error::ModulusOutOfRange(p));
        }
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(PrimeField { p })
    }

    #[inline]
    pub fn modulus(self) -> u32 {
        self.p
    }

    #[inline]
    pub fn reduce(self, a: u64) -> u32 {
        (a % self.p as u64) as u32
    }

    #[inline]
    pub fn add(self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }

    pub fn pow(self, mut base: u32, mut exp: u64) -> u32 {
        let mut acc = 1 % self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via Fermat's little theorem.
    pub fn inv(self, a: u32) -> Result<u32> {
        if a.is_multiple_of(self.p) {
            return Err(Error::NonInvertible(self.p));
        }
        Ok(self.pow(a, self.p as u64 - 2))
    }

    /// Reduce an arbitrary signed integer into `[0, p)`.
    pub fn from_i64(self, a: i64) -> u32 {
        a.rem_euclid(self.p as i64) as u32
    }

    pub fn scalar(self, value: u64) -> FpScalar {
        FpScalar {
            value: self.reduce(value),
            field: self,
        }
    }

    /// `p^e` as an exact integer, `None` on overflow.
    pub fn checked_power(self, e: u64) -> Option<u64> {
        let e = u32::try_from(e).ok()?;
        (self.p as u64).checked_pow(e)
    }
}

/// An element of F_p carrying its modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FpScalar {
    value: u32,
    field: PrimeField,
}

impl FpScalar {
    pub fn new(value: u64, p: u32) -> Result<Self> {
        Ok(PrimeField::new(p)?.scalar(value))
    }

    #[inline]
    pub fn value(self) -> u32 {
        self.value
    }

    #[inline]
    pub fn field(self) -> PrimeField {
        self.field
    }

    #[inline]
    pub fn modulus(self) -> u32 {
        self.field.p
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    fn check(self, other: FpScalar) -> Result<()> {
        if self.field != other.field {
            return Err(Error::ModulusMismatch {
                left: self.field.p,
                right: other.field.p,
            });
        }
        Ok(())
    }

    pub fn try_add(self, other: FpScalar) -> Result<FpScalar> {
        self.check(other)?;
        Ok(FpScalar {
            value: self.field.add(self.value, other.value),
            field: self.field,
        })
    }

    pub fn try_mul(self, other: FpScalar) -> Result<FpScalar> {
        self.check(other)?;
        Ok(FpScalar {
            value: self.field.mul(self.value, other.value),
            field: self.field,
        })
    }

    pub fn inv(self) -> Result<FpScalar> {
        Ok(FpScalar {
            value: self.field.inv(self.value)?,
            field: self.field,
        })
    }

    pub fn pow(self, exp: u64) -> FpScalar {
        FpScalar {
            value: self.field.pow(self.value, exp),
            field: self.field,
        }
    }
}

/// Inverse of a nonzero field element.
pub fn fp_inv(a: FpScalar) -> Result<FpScalar> {
    a.inv()
}

impl fmt::Display for FpScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.field.p)
    }
}

/// A vector in F_p^n.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FpVector {
    field: PrimeField,
    entries: Vec<u32>,
}

impl FpVector {
    /// Builds a vector from raw integers, reducing each modulo p.
    pub fn from_raw(field: PrimeField, raw: &[u64]) -> Self {
        FpVector {
            field,
            entries: raw.iter().map(|&a| field.reduce(a)).collect(),
        }
    }

    /// Takes ownership of entries already in `[0, p)`.
    pub fn from_residues(field: PrimeField, entries: Vec<u32>) -> Result<Self> {
        if let Some(&bad) = entries.iter().find(|&&a| a >= field.modulus()) {
            return Err(Error::InvalidParameter(format!(
                "residue {bad} not reduced modulo {}",
                field.modulus()
            )));
        }
        Ok(FpVector { field, entries })
    }

    pub fn zero(field: PrimeField, n: usize) -> Self {
        FpVector {
            field,
            entries: vec![0; n],
        }
    }

    /// The vector whose base-p digits (least significant first) spell `index`.
    pub fn from_index(field: PrimeField, n: usize, mut index: u64) -> Self {
        let p = field.modulus() as u64;
        let entries = (0..n)
            .map(|_| {
                let digit = (index % p) as u32;
                index /= p;
                digit
            })
            .collect();
        FpVector { field, entries }
    }

    /// Inverse of [`FpVector::from_index`].
    pub fn index(&self) -> u64 {
        let p = self.field.modulus() as u64;
        self.entries
            .iter()
            .rev()
            .fold(0u64, |acc, &a| acc * p + a as u64)
    }

    #[inline]
    pub fn field(&self) -> PrimeField {
        self.field
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    #[inline]
    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn get(&self, i: usize) -> FpScalar {
        FpScalar {
            value: self.entries[i],
            field: self.field,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&a| a == 0)
    }

    fn check(&self, other: &FpVector) -> Result<()> {
        if self.field != other.field {
            return Err(Error::ModulusMismatch {
                left: self.field.modulus(),
                right: other.field.modulus(),
            });
        }
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &FpVector) -> Result<FpVector> {
        self.check(other)?;
        let f = self.field;
        Ok(FpVector {
            field: f,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| f.add(a, b))
                .collect(),
        })
    }

    pub fn scale(&self, c: u32) -> FpVector {
        let f = self.field;
        FpVector {
            field: f,
            entries: self.entries.iter().map(|&a| f.mul(a, c)).collect(),
        }
    }

    /// `self + c * other`.
    pub fn try_axpy(&self, c: u32, other: &FpVector) -> Result<FpVector> {
        self.check(other)?;
        let f = self.field;
        Ok(FpVector {
            field: f,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| f.add(a, f.mul(c, b)))
                .collect(),
        })
    }

    pub fn try_dot(&self, other: &FpVector) -> Result<FpScalar> {
        self.check(other)?;
        Ok(self.field.scalar(dot(self.field, &self.entries, &other.entries) as u64))
    }

    pub fn into_entries(self) -> Vec<u32> {
        self.entries
    }
}

/// Raw inner product of two residue slices of equal length.
pub fn dot(field: PrimeField, a: &[u32], b: &[u32]) -> u32 {
    let p = field.modulus() as u64;
    let mut acc = 0u64;
    for (&x, &y) in a.iter().zip(b) {
        acc = (acc + x as u64 * y as u64) % p;
    }
    acc as u32
}

/// Iterates every vector of F_p^n in packed-index order.
pub fn all_vectors(field: PrimeField, n: usize) -> impl Iterator<Item = FpVector> {
    let total = field
        .checked_power(n as u64)
        .expect("vector space too large to enumerate");
    (0..total).map(move |i| FpVector::from_index(field, n, i))
}

impl std::ops::Neg for FpScalar {
    type Output = FpScalar;

    fn neg(self) -> FpScalar {
        FpScalar {
            value: self.field.neg(self.value),
            field: self.field,
        }
    }
}

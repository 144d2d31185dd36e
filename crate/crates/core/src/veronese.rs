//! The degree-d Veronese map and the symmetric tensor ↔ dual vector
//! correspondence `T(x, …, x) = ⟨v_T, φ_d(x)⟩`.
//!
//! Coordinates are indexed by exponent vectors of total degree `d`, ordered
//! lexicographically with the largest exponent vector first:
//! `x₁^d, x₁^{d-1}x₂, …, x_n^d`. This order is part of every file format.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FpVector, PrimeField};
use crate::linalg::{rank, FpMatrix};
use crate::tensor::{decode_index, SymmetricTensor, Tensor};

/// Version tag of the monomial order, embedded in reports.
pub const MONOMIAL_ORDER_TAG: &str = "grlex-v1";

/// Largest Veronese dimension materialized in memory.
pub const MAX_VERONESE_DIM: u64 = 1 << 22;

/// Exact `binom(n, k)`.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// `binom(n+d-1, d)`, the number of degree-d monomials in `n` variables.
pub fn veronese_dimension(n: usize, d: usize) -> BigUint {
    binomial((n + d) as u64 - 1, d as u64)
}

/// An exponent vector and its position in the monomial order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MonomialIndex {
    pub position: usize,
    pub exponents: Vec<u32>,
}

/// All degree-d monomials in `n` variables, in the canonical order.
#[derive(Debug, Clone)]
pub struct MonomialBasis {
    n: usize,
    d: usize,
    exponents: Vec<Vec<u32>>,
    lookup: HashMap<Vec<u32>, usize>,
}

impl MonomialBasis {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Degenerate("Veronese map needs n ≥ 1"));
        }
        if d == 0 {
            return Err(Error::Degenerate("Veronese map needs d ≥ 1"));
        }
        let dim = veronese_dimension(n, d);
        match dim.to_u64() {
            Some(v) if v <= MAX_VERONESE_DIM => {}
            _ => {
                return Err(Error::CapExceeded {
                    what: "Veronese dimension",
                    required: dim.to_string(),
                    cap: MAX_VERONESE_DIM,
                })
            }
        }
        let mut exponents = Vec::new();
        let mut current = vec![0u32; n];
        fill(&mut exponents, &mut current, 0, d as u32);
        let lookup = exponents
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();
        Ok(MonomialBasis {
            n,
            d,
            exponents,
            lookup,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    pub fn exponents(&self, position: usize) -> &[u32] {
        &self.exponents[position]
    }

    pub fn position(&self, exponents: &[u32]) -> Option<usize> {
        self.lookup.get(exponents).copied()
    }

    pub fn monomials(&self) -> impl Iterator<Item = MonomialIndex> + '_ {
        self.exponents.iter().enumerate().map(|(position, e)| MonomialIndex {
            position,
            exponents: e.clone(),
        })
    }

    /// Content (exponent vector) of an index tuple in `[n]^d`.
    fn content(&self, idx: &[usize]) -> usize {
        let mut e = vec![0u32; self.n];
        for &i in idx {
            e[i] += 1;
        }
        self.lookup[&e]
    }

    /// `φ_d(x)` on raw residues.
    pub fn map_raw(&self, field: PrimeField, x: &[u32]) -> Vec<u32> {
        let d = self.d;
        // powers[i][e] = x_i^e
        let powers: Vec<Vec<u32>> = x
            .iter()
            .map(|&xi| {
                let mut row = Vec::with_capacity(d + 1);
                let mut acc = 1 % field.modulus();
                for _ in 0..=d {
                    row.push(acc);
                    acc = field.mul(acc, xi);
                }
                row
            })
            .collect();
        self.exponents
            .iter()
            .map(|e| {
                e.iter()
                    .zip(&powers)
                    .fold(1 % field.modulus(), |acc, (&ei, pw)| field.mul(acc, pw[ei as usize]))
            })
            .collect()
    }

    /// `d! / Π e_i!` as an exact integer.
    pub fn multinomial(&self, position: usize) -> BigUint {
        let mut acc = factorial(self.d as u64);
        for &e in &self.exponents[position] {
            acc /= factorial(e as u64);
        }
        acc
    }
}

fn fill(out: &mut Vec<Vec<u32>>, current: &mut [u32], slot: usize, remaining: u32) {
    if slot == current.len() - 1 {
        current[slot] = remaining;
        out.push(current.to_vec());
        return;
    }
    for e in (0..=remaining).rev() {
        current[slot] = e;
        fill(out, current, slot + 1, remaining - e);
    }
    current[slot] = 0;
}

fn factorial(k: u64) -> BigUint {
    (1..=k).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

/// A vector in F_p^{binom(n+d-1,d)} under the canonical monomial order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VeroneseVector {
    pub entries: FpVector,
    pub degree: usize,
    pub ambient: usize,
}

pub fn veronese_map(x: &FpVector, d: usize) -> Result<VeroneseVector> {
    let basis = MonomialBasis::new(x.len(), d)?;
    veronese_map_with(&basis, x)
}

pub fn veronese_map_with(basis: &MonomialBasis, x: &FpVector) -> Result<VeroneseVector> {
    if x.len() != basis.n {
        return Err(Error::DimensionMismatch {
            expected: basis.n,
            got: x.len(),
        });
    }
    let entries = FpVector::from_residues(x.field(), basis.map_raw(x.field(), x.entries()))?;
    Ok(VeroneseVector {
        entries,
        degree: basis.d,
        ambient: basis.n,
    })
}

/// `v_T`: each monomial collects the coefficients of every index tuple with
/// that content.
pub fn symmetric_to_dual(t: &SymmetricTensor) -> Result<VeroneseVector> {
    let t = t.tensor();
    let basis = MonomialBasis::new(t.side(), t.order())?;
    Ok(symmetric_to_dual_with(&basis, t))
}

pub(crate) fn symmetric_to_dual_with(basis: &MonomialBasis, t: &Tensor) -> VeroneseVector {
    let f = t.field();
    let mut v = vec![0u32; basis.dim()];
    let mut idx = vec![0usize; t.order()];
    for (pos, &c) in t.coeffs().iter().enumerate() {
        if c == 0 {
            continue;
        }
        decode_index(pos, t.side(), &mut idx);
        let m = basis.content(&idx);
        v[m] = f.add(v[m], c);
    }
    VeroneseVector {
        entries: FpVector::from_residues(f, v).expect("reduced"),
        degree: t.order(),
        ambient: t.side(),
    }
}

/// Inverse of [`symmetric_to_dual`]; needs `p > d` so every multinomial
/// coefficient is a unit.
pub fn dual_to_symmetric(v: &VeroneseVector) -> Result<SymmetricTensor> {
    let basis = MonomialBasis::new(v.ambient, v.degree)?;
    dual_to_symmetric_with(&basis, v)
}

pub fn dual_to_symmetric_with(basis: &MonomialBasis, v: &VeroneseVector) -> Result<SymmetricTensor> {
    let f = v.entries.field();
    if f.modulus() as usize <= basis.d {
        return Err(Error::CharacteristicTooSmall {
            p: f.modulus(),
            d: basis.d,
        });
    }
    if v.entries.len() != basis.dim() || v.degree != basis.d || v.ambient != basis.n {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            got: v.entries.len(),
        });
    }
    let p = BigUint::from(f.modulus());
    let scaled: Vec<u32> = (0..basis.dim())
        .map(|m| {
            let multi = (basis.multinomial(m) % &p).to_u32().expect("residue fits");
            let inv = f.inv(multi).expect("p > d makes multinomials units");
            f.mul(v.entries.entries()[m], inv)
        })
        .collect();
    let mut t = Tensor::zero(f, basis.d, basis.n);
    let mut idx = vec![0usize; basis.d];
    let coeffs: Vec<u32> = (0..t.coeffs().len())
        .map(|pos| {
            decode_index(pos, basis.n, &mut idx);
            scaled[basis.content(&idx)]
        })
        .collect();
    t = Tensor::from_residues(f, basis.d, basis.n, coeffs)?;
    Ok(SymmetricTensor::new_unchecked(t))
}

/// Whether `{φ_d(s) : s ∈ S}` is linearly independent (as a list).
pub fn image_independence(s: &[FpVector], d: usize) -> Result<bool> {
    let Some(first) = s.first() else {
        return Ok(true);
    };
    let basis = MonomialBasis::new(first.len(), d)?;
    image_independence_with(&basis, s)
}

pub fn image_independence_with(basis: &MonomialBasis, s: &[FpVector]) -> Result<bool> {
    let Some(first) = s.first() else {
        return Ok(true);
    };
    if s.len() > basis.dim() {
        return Ok(false);
    }
    let images = s
        .iter()
        .map(|x| veronese_map_with(basis, x).map(|v| v.entries))
        .collect::<Result<Vec<_>>>()?;
    let m = FpMatrix::from_vectors(first.field(), basis.dim(), &images)?;
    Ok(rank(&m) == s.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::all_vectors;
    use crate::rng::SampleStream;
    use crate::tensor::diagonal_eval;

    fn fp(p: u32) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    #[test]
    fn monomial_order() {
        let b = MonomialBasis::new(2, 2).unwrap();
        let order: Vec<Vec<u32>> = b.monomials().map(|m| m.exponents).collect();
        assert_eq!(order, vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        let b = MonomialBasis::new(3, 2).unwrap();
        assert_eq!(b.exponents(0), &[2, 0, 0]);
        assert_eq!(b.exponents(1), &[1, 1, 0]);
        assert_eq!(b.exponents(5), &[0, 0, 2]);
        for (n, d) in [(1, 3), (3, 3), (4, 2), (5, 4), (2, 7)] {
            let b = MonomialBasis::new(n, d).unwrap();
            assert_eq!(BigUint::from(b.dim()), veronese_dimension(n, d));
            for m in b.monomials() {
                assert_eq!(m.exponents.iter().sum::<u32>(), d as u32);
                assert_eq!(b.position(&m.exponents), Some(m.position));
            }
            let seq: Vec<_> = b.monomials().map(|m| m.exponents).collect();
            assert!(seq.windows(2).all(|w| w[0] > w[1]));
        }
    }

    #[test]
    fn binomials_are_exact() {
        assert_eq!(binomial(10, 2), BigUint::from(45u32));
        assert_eq!(binomial(3, 5), BigUint::from(0u32));
        assert_eq!(binomial(100, 50).to_string(), "100891344545564193334812497256");
    }

    #[test]
    fn map_examples() {
        let f5 = fp(5);
        let v = veronese_map(&FpVector::from_raw(f5, &[1, 2]), 2).unwrap();
        assert_eq!(v.entries.entries(), &[1, 2, 4]);
        let z = veronese_map(&FpVector::zero(f5, 3), 3).unwrap();
        assert!(z.entries.is_zero());
        let f7 = fp(7);
        let v = veronese_map(&FpVector::from_raw(f7, &[2]), 3).unwrap();
        assert_eq!(v.entries.entries(), &[1]);
        assert!(veronese_map(&FpVector::zero(f7, 2), 0).is_err());
    }

    #[test]
    fn dual_examples() {
        let f5 = fp(5);
        let id = SymmetricTensor::new(Tensor::identity_matrix(f5, 2)).unwrap();
        let v = symmetric_to_dual(&id).unwrap();
        assert_eq!(v.entries.entries(), &[1, 0, 1]);
        assert_eq!(dual_to_symmetric(&v).unwrap(), id);

        let off = SymmetricTensor::new(Tensor::from_raw(f5, 2, 2, &[0, 1, 1, 0]).unwrap()).unwrap();
        assert_eq!(symmetric_to_dual(&off).unwrap().entries.entries(), &[0, 2, 0]);

        let zero = SymmetricTensor::new(Tensor::zero(f5, 3, 2)).unwrap();
        assert!(symmetric_to_dual(&zero).unwrap().entries.is_zero());

        let f2 = fp(2);
        let v = VeroneseVector {
            entries: FpVector::from_raw(f2, &[1, 0, 1]),
            degree: 2,
            ambient: 2,
        };
        assert_eq!(
            dual_to_symmetric(&v),
            Err(Error::CharacteristicTooSmall { p: 2, d: 2 })
        );
    }

    #[test]
    fn dual_round_trips() {
        let f5 = fp(5);
        let basis = MonomialBasis::new(3, 2).unwrap();
        let mut rng = SampleStream::new(3, 0);
        for _ in 0..200 {
            let t = SymmetricTensor::random(f5, 2, 3, &mut rng);
            let v = symmetric_to_dual_with(&basis, t.tensor());
            assert_eq!(dual_to_symmetric_with(&basis, &v).unwrap(), t);
            let w = VeroneseVector {
                entries: crate::rng::sample_vector(basis.dim(), f5, &mut rng).unwrap(),
                degree: 2,
                ambient: 3,
            };
            let back = dual_to_symmetric_with(&basis, &w).unwrap();
            assert!(back.tensor().is_symmetric());
            assert_eq!(symmetric_to_dual_with(&basis, back.tensor()), w);
        }
    }

    #[test]
    fn pairing_identity_exhaustive() {
        for p in [2u32, 3, 5] {
            let f = fp(p);
            let mut rng = SampleStream::new(p as u64, 17);
            for n in 1..=3usize {
                for d in 1..=3usize {
                    let basis = MonomialBasis::new(n, d).unwrap();
                    for _ in 0..5 {
                        let t = SymmetricTensor::random(f, d, n, &mut rng);
                        let v = symmetric_to_dual_with(&basis, t.tensor());
                        for x in all_vectors(f, n) {
                            let phi = veronese_map_with(&basis, &x).unwrap();
                            let lhs = v.entries.try_dot(&phi.entries).unwrap();
                            assert_eq!(lhs, diagonal_eval(t.tensor(), &x).unwrap());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn symmetric_space_dimension() {
        // One basis tensor per monomial; their coefficient vectors have full rank.
        let f = fp(7);
        for (n, d) in [(2, 2), (3, 2), (2, 3), (3, 3), (4, 2)] {
            let basis = MonomialBasis::new(n, d).unwrap();
            let tensors: Vec<FpVector> = (0..basis.dim())
                .map(|m| {
                    let mut e = vec![0u32; basis.dim()];
                    e[m] = 1;
                    let v = VeroneseVector {
                        entries: FpVector::from_residues(f, e).unwrap(),
                        degree: d,
                        ambient: n,
                    };
                    let t = dual_to_symmetric_with(&basis, &v).unwrap().into_tensor();
                    FpVector::from_residues(f, t.coeffs().to_vec()).unwrap()
                })
                .collect();
            let m = FpMatrix::from_vectors(f, n.pow(d as u32), &tensors).unwrap();
            assert_eq!(BigUint::from(rank(&m)), veronese_dimension(n, d));
        }
    }

    #[test]
    fn homogeneity() {
        for p in [2u32, 3, 5] {
            let f = fp(p);
            for d in 1..=3 {
                let basis = MonomialBasis::new(2, d).unwrap();
                for x in all_vectors(f, 2) {
                    let phi = basis.map_raw(f, x.entries());
                    for c in 0..p {
                        let scaled = basis.map_raw(f, x.scale(c).entries());
                        let cd = f.pow(c, d as u64);
                        let expected: Vec<u32> = phi.iter().map(|&a| f.mul(a, cd)).collect();
                        assert_eq!(scaled, expected);
                    }
                }
            }
        }
    }

    #[test]
    fn independence_examples() {
        let f5 = fp(5);
        let e = vec![FpVector::from_raw(f5, &[1, 0]), FpVector::from_raw(f5, &[0, 1])];
        assert!(image_independence(&e, 2).unwrap());
        let with_zero = vec![FpVector::from_raw(f5, &[1, 0]), FpVector::zero(f5, 2)];
        assert!(!image_independence(&with_zero, 2).unwrap());
        let repeated = vec![e[0].clone(), e[0].clone()];
        assert!(!image_independence(&repeated, 2).unwrap());
        // negation collides under even degree
        let neg = vec![FpVector::from_raw(f5, &[1, 2]), FpVector::from_raw(f5, &[4, 3])];
        assert!(!image_independence(&neg, 2).unwrap());
    }
}

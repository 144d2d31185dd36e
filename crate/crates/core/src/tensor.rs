//! Dense d-tensors over F_p^n: evaluation, bias and analytic rank.
//!
//! Coefficients are stored row-major over `(i_1, …, i_d)`, so the last
//! index varies fastest.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::character::Character;
use crate::error::{Error, Result};
use crate::field::{FpScalar, FpVector, PrimeField};
use crate::linalg::rank_of_buffer;
use crate::par;
use crate::rng::SampleStream;

/// Default bound on the number of points any single enumeration may visit.
pub const DEFAULT_CAP: u64 = 1 << 24;

pub(crate) fn checked_space(field: PrimeField, exponent: u64, cap: u64, what: &'static str) -> Result<u64> {
    match field.checked_power(exponent) {
        Some(size) if size <= cap => Ok(size),
        _ => Err(Error::CapExceeded {
            what,
            required: format!("{}^{}", field.modulus(), exponent),
            cap,
        }),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Tensor {
    field: PrimeField,
    order: usize,
    side: usize,
    coeffs: Vec<u32>,
}

impl Tensor {
    pub fn zero(field: PrimeField, order: usize, side: usize) -> Self {
        Tensor {
            field,
            order,
            side,
            coeffs: vec![0; side.pow(order as u32)],
        }
    }

    pub fn from_residues(field: PrimeField, order: usize, side: usize, coeffs: Vec<u32>) -> Result<Self> {
        if order == 0 || side == 0 {
            return Err(Error::Degenerate("tensor order and side must be positive"));
        }
        let expected = side.pow(order as u32);
        if coeffs.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: coeffs.len(),
            });
        }
        if let Some(&bad) = coeffs.iter().find(|&&c| c >= field.modulus()) {
            return Err(Error::InvalidParameter(format!(
                "coefficient {bad} not reduced modulo {}",
                field.modulus()
            )));
        }
        Ok(Tensor {
            field,
            order,
            side,
            coeffs,
        })
    }

    /// Builds a tensor from raw integers, reducing modulo p.
    pub fn from_raw(field: PrimeField, order: usize, side: usize, raw: &[u64]) -> Result<Self> {
        Tensor::from_residues(field, order, side, raw.iter().map(|&c| field.reduce(c)).collect())
    }

    /// Sum of unit tensors `e[idx]` over the listed (0-based) index tuples.
    pub fn from_units(field: PrimeField, order: usize, side: usize, units: &[&[usize]]) -> Result<Self> {
        let mut t = Tensor::zero(field, order, side);
        for idx in units {
            if idx.len() != order || idx.iter().any(|&i| i >= side) {
                return Err(Error::InvalidParameter(format!("bad unit index {idx:?}")));
            }
            let pos = t.position(idx);
            t.coeffs[pos] = field.add(t.coeffs[pos], 1);
        }
        Ok(t)
    }

    /// The `n × n` identity viewed as a 2-tensor.
    pub fn identity_matrix(field: PrimeField, side: usize) -> Self {
        let mut t = Tensor::zero(field, 2, side);
        for i in 0..side {
            t.coeffs[i * side + i] = 1;
        }
        t
    }

    pub fn random(field: PrimeField, order: usize, side: usize, rng: &mut SampleStream) -> Self {
        let coeffs = (0..side.pow(order as u32)).map(|_| rng.residue(field)).collect();
        Tensor {
            field,
            order,
            side,
            coeffs,
        }
    }

    /// Decodes the tensor whose coefficient `j` is base-p digit `j` of `index`.
    pub fn from_index(field: PrimeField, order: usize, side: usize, index: u64) -> Self {
        let len = side.pow(order as u32);
        let coeffs = FpVector::from_index(field, len, index).into_entries();
        Tensor {
            field,
            order,
            side,
            coeffs,
        }
    }

    /// Packed base-p index of the coefficient array (coefficient 0 least significant).
    pub fn index(&self) -> u64 {
        let p = self.field.modulus() as u64;
        self.coeffs.iter().rev().fold(0u64, |acc, &c| acc * p + c as u64)
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn modulus(&self) -> u32 {
        self.field.modulus()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn position(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.side + i)
    }

    pub fn get(&self, idx: &[usize]) -> u32 {
        self.coeffs[self.position(idx)]
    }

    pub fn try_add(&self, other: &Tensor) -> Result<Tensor> {
        self.check_same_shape(other)?;
        let f = self.field;
        Ok(Tensor {
            field: f,
            order: self.order,
            side: self.side,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| f.add(a, b))
                .collect(),
        })
    }

    pub fn scale(&self, c: u32) -> Tensor {
        let f = self.field;
        Tensor {
            coeffs: self.coeffs.iter().map(|&a| f.mul(a, c)).collect(),
            ..self.clone()
        }
    }

    fn check_same_shape(&self, other: &Tensor) -> Result<()> {
        if self.field != other.field {
            return Err(Error::ModulusMismatch {
                left: self.modulus(),
                right: other.modulus(),
            });
        }
        if self.order != other.order || self.side != other.side {
            return Err(Error::DimensionMismatch {
                expected: self.coeffs.len(),
                got: other.coeffs.len(),
            });
        }
        Ok(())
    }

    fn check_vector(&self, x: &FpVector) -> Result<()> {
        if x.field() != self.field {
            return Err(Error::ModulusMismatch {
                left: self.modulus(),
                right: x.field().modulus(),
            });
        }
        if x.len() != self.side {
            return Err(Error::DimensionMismatch {
                expected: self.side,
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn is_symmetric(&self) -> bool {
        let mut idx = vec![0usize; self.order];
        for pos in 0..self.coeffs.len() {
            decode_index(pos, self.side, &mut idx);
            let mut sorted = idx.clone();
            sorted.sort_unstable();
            if self.coeffs[self.position(&sorted)] != self.coeffs[pos] {
                return false;
            }
        }
        true
    }

    /// Mode-1 flattening viewed as a `n^a × n^{d-a}` matrix after permuting
    /// the indices in `left` to the front.
    pub fn flatten(&self, left: &[usize]) -> (usize, usize, Vec<u32>) {
        let right: Vec<usize> = (0..self.order).filter(|i| !left.contains(i)).collect();
        let rows = self.side.pow(left.len() as u32);
        let cols = self.side.pow(right.len() as u32);
        let mut data = vec![0u32; rows * cols];
        let mut idx = vec![0usize; self.order];
        for (pos, &c) in self.coeffs.iter().enumerate() {
            decode_index(pos, self.side, &mut idx);
            let r = left.iter().fold(0, |acc, &i| acc * self.side + idx[i]);
            let col = right.iter().fold(0, |acc, &i| acc * self.side + idx[i]);
            data[r * cols + col] = c;
        }
        (rows, cols, data)
    }
}

/// Writes the base-`side` digits of `pos` (most significant first) into `idx`.
pub(crate) fn decode_index(mut pos: usize, side: usize, idx: &mut [usize]) {
    for slot in idx.iter_mut().rev() {
        *slot = pos % side;
        pos /= side;
    }
}

/// Contracts the last index of a row-major block against `x`.
pub(crate) fn contract_last(field: PrimeField, coeffs: &[u32], x: &[u32]) -> Vec<u32> {
    let n = x.len();
    let p = field.modulus() as u64;
    coeffs
        .chunks_exact(n)
        .map(|row| {
            let mut acc = 0u64;
            for (&c, &xi) in row.iter().zip(x) {
                acc += c as u64 * xi as u64;
            }
            (acc % p) as u32
        })
        .collect()
}

/// Contracts the first index of a row-major block against `x`.
pub(crate) fn contract_first(field: PrimeField, coeffs: &[u32], x: &[u32]) -> Vec<u32> {
    let n = x.len();
    let stride = coeffs.len() / n;
    let p = field.modulus() as u64;
    let mut acc = vec![0u64; stride];
    for (i, &xi) in x.iter().enumerate() {
        if xi == 0 {
            continue;
        }
        for (a, &c) in acc.iter_mut().zip(&coeffs[i * stride..(i + 1) * stride]) {
            *a += xi as u64 * c as u64;
        }
    }
    acc.into_iter().map(|a| (a % p) as u32).collect()
}

/// A tensor invariant under every permutation of its indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymmetricTensor(Tensor);

impl SymmetricTensor {
    pub fn new(t: Tensor) -> Result<Self> {
        if !t.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        Ok(SymmetricTensor(t))
    }

    pub(crate) fn new_unchecked(t: Tensor) -> Self {
        SymmetricTensor(t)
    }

    pub fn random(field: PrimeField, order: usize, side: usize, rng: &mut SampleStream) -> Self {
        let mut t = Tensor::zero(field, order, side);
        let mut idx = vec![0usize; order];
        for pos in 0..t.coeffs.len() {
            decode_index(pos, side, &mut idx);
            if idx.windows(2).all(|w| w[0] <= w[1]) {
                t.coeffs[pos] = rng.residue(field);
            }
        }
        for pos in 0..t.coeffs.len() {
            decode_index(pos, side, &mut idx);
            idx.sort_unstable();
            t.coeffs[pos] = t.coeffs[t.position(&idx)];
        }
        SymmetricTensor(t)
    }

    pub fn tensor(&self) -> &Tensor {
        &self.0
    }

    pub fn into_tensor(self) -> Tensor {
        self.0
    }
}

impl AsRef<Tensor> for SymmetricTensor {
    fn as_ref(&self) -> &Tensor {
        &self.0
    }
}

/// `T(x_1, …, x_d)`.
pub fn eval(t: &Tensor, xs: &[&FpVector]) -> Result<FpScalar> {
    if xs.len() != t.order {
        return Err(Error::DimensionMismatch {
            expected: t.order,
            got: xs.len(),
        });
    }
    for x in xs {
        t.check_vector(x)?;
    }
    let mut block = t.coeffs.clone();
    for x in xs.iter().rev() {
        block = contract_last(t.field, &block, x.entries());
    }
    Ok(t.field.scalar(block[0] as u64))
}

/// `T(x, …, x)`.
pub fn diagonal_eval(t: &Tensor, x: &FpVector) -> Result<FpScalar> {
    t.check_vector(x)?;
    Ok(t.field.scalar(diagonal_raw(t, x.entries()) as u64))
}

pub(crate) fn diagonal_raw(t: &Tensor, x: &[u32]) -> u32 {
    let mut block = contract_last(t.field, &t.coeffs, x);
    for _ in 1..t.order {
        block = contract_last(t.field, &block, x);
    }
    block[0]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BiasKind {
    Multilinear,
    Diagonal,
}

/// Exact bias `numerator / p^denominator_exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExactBias {
    pub modulus: u32,
    pub numerator: u64,
    pub denominator_exponent: u32,
}

impl ExactBias {
    pub fn to_f64(self) -> f64 {
        self.numerator as f64 / (self.modulus as f64).powi(self.denominator_exponent as i32)
    }

    /// `-log_p(bias)`.
    pub fn analytic_rank(self) -> f64 {
        self.denominator_exponent as f64 - (self.numerator as f64).ln() / (self.modulus as f64).ln()
    }

    /// Exact test of `arank ≤ r`, i.e. `numerator · p^r ≥ p^E`.
    pub fn arank_at_most(self, r: u32) -> bool {
        let p = self.modulus as u128;
        let lhs = (self.numerator as u128).checked_mul(p.checked_pow(r).unwrap_or(u128::MAX));
        match lhs {
            Some(lhs) => lhs >= p.pow(self.denominator_exponent),
            None => true,
        }
    }

    /// `Some(r)` when the bias is exactly `p^{-r}`.
    pub fn integer_analytic_rank(self) -> Option<u32> {
        let p = self.modulus as u64;
        let mut num = self.numerator;
        let mut e = 0u32;
        while num > 1 && num.is_multiple_of(p) {
            num /= p;
            e += 1;
        }
        (num == 1 && e <= self.denominator_exponent).then(|| self.denominator_exponent - e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasValue {
    pub kind: BiasKind,
    pub exact: Option<ExactBias>,
    pub value: f64,
    pub re: f64,
    pub im: f64,
}

impl BiasValue {
    pub fn multilinear(exact: ExactBias) -> Self {
        let v = exact.to_f64();
        BiasValue {
            kind: BiasKind::Multilinear,
            exact: Some(exact),
            value: v,
            re: v,
            im: 0.0,
        }
    }

    pub fn diagonal(z: Complex64) -> Self {
        BiasValue {
            kind: BiasKind::Diagonal,
            exact: None,
            value: z.norm(),
            re: z.re,
            im: z.im,
        }
    }

    pub fn complex(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// Exact multilinear bias.
///
/// The average of `χ(T(x_1, …, x_d))` over the last argument is the indicator
/// that the induced linear form vanishes, so the bias is the fraction of
/// `(x_1, …, x_{d-1})` killing the form. The count is taken by fixing
/// `x_1 … x_{d-2}` and measuring the left kernel of the remaining matrix.
pub fn bias_multilinear(t: &Tensor, cap: u64) -> Result<BiasValue> {
    Ok(BiasValue::multilinear(exact_bias(t, cap)?))
}

pub fn exact_bias(t: &Tensor, cap: u64) -> Result<ExactBias> {
    if t.order < 2 {
        return Err(Error::InvalidParameter("bias requires order d ≥ 2".into()));
    }
    let f = t.field;
    let n = t.side;
    let exponent = (n * (t.order - 1)) as u64;
    checked_space(f, exponent, cap, "multilinear bias")?;
    let outer = f.checked_power((n * (t.order - 2)) as u64).expect("below cap");
    let p = f.modulus() as u64;
    let numerator = par::sum_u64(0..outer, |i| {
        let xs = FpVector::from_index(f, n * (t.order - 2), i);
        let mut block = t.coeffs.clone();
        for x in xs.entries().chunks_exact(n) {
            block = contract_first(f, &block, x);
        }
        let r = rank_of_buffer(f, n, n, &mut block);
        p.pow((n - r) as u32)
    });
    Ok(ExactBias {
        modulus: f.modulus(),
        numerator,
        denominator_exponent: exponent as u32,
    })
}

pub fn analytic_rank(t: &Tensor, cap: u64) -> Result<f64> {
    Ok(exact_bias(t, cap)?.analytic_rank())
}

/// Floating character-sum evaluation of the multilinear bias, enumerating all
/// `p^{nd}` argument tuples.
pub fn bias_by_character_sum(t: &Tensor, chi: &Character, cap: u64) -> Result<Complex64> {
    let f = t.field;
    let n = t.side;
    let total = checked_space(f, (n * t.order) as u64, cap, "character-sum bias")?;
    let hist = par::histogram(0..total, f.modulus() as usize, |i, acc| {
        let xs = FpVector::from_index(f, n * t.order, i);
        let mut block = t.coeffs.clone();
        for x in xs.entries().chunks_exact(n) {
            block = contract_first(f, &block, x);
        }
        acc[block[0] as usize] += 1;
    });
    Ok(chi.histogram_sum(&hist) / total as f64)
}

/// Integer histogram of `T(x, …, x)` over all `x ∈ F_p^n`.
pub fn diagonal_histogram(t: &Tensor, cap: u64) -> Result<Vec<u64>> {
    let f = t.field;
    let total = checked_space(f, t.side as u64, cap, "diagonal bias")?;
    Ok(par::histogram(0..total, f.modulus() as usize, |i, acc| {
        let x = FpVector::from_index(f, t.side, i);
        acc[diagonal_raw(t, x.entries()) as usize] += 1;
    }))
}

/// `E_x χ(T(x, …, x))`.
pub fn diagonal_bias(t: &Tensor, chi: &Character, cap: u64) -> Result<Complex64> {
    if chi.field() != t.field {
        return Err(Error::ModulusMismatch {
            left: t.modulus(),
            right: chi.field().modulus(),
        });
    }
    let hist = diagonal_histogram(t, cap)?;
    let total: u64 = hist.iter().sum();
    Ok(chi.histogram_sum(&hist) / total as f64)
}

/// Serialized form: modulus, side, order and row-major coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorRecord {
    pub p: u32,
    pub n: usize,
    pub d: usize,
    pub coeffs: Vec<u32>,
}

impl From<&Tensor> for TensorRecord {
    fn from(t: &Tensor) -> Self {
        TensorRecord {
            p: t.modulus(),
            n: t.side,
            d: t.order,
            coeffs: t.coeffs.clone(),
        }
    }
}

impl TryFrom<TensorRecord> for Tensor {
    type Error = Error;
    fn try_from(r: TensorRecord) -> Result<Tensor> {
        Tensor::from_residues(PrimeField::new(r.p)?, r.d, r.n, r.coeffs)
    }
}

impl Tensor {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&TensorRecord::from(self)).expect("record serializes")
    }

    pub fn from_json(s: &str) -> Result<Tensor> {
        let record: TensorRecord = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        Tensor::try_from(record)
    }

    /// `"p n d"` on the first line, coefficients space-separated on the second.
    pub fn to_text(&self) -> String {
        let coeffs: Vec<String> = self.coeffs.iter().map(u32::to_string).collect();
        format!("{} {} {}\n{}\n", self.modulus(), self.side, self.order, coeffs.join(" "))
    }

    pub fn from_text(s: &str) -> Result<Tensor> {
        let mut tokens = s.split_whitespace().map(|tok| {
            tok.parse::<u64>()
                .map_err(|e| Error::Parse(format!("{tok:?}: {e}")))
        });
        let mut header = || tokens.next().unwrap_or(Err(Error::Parse("truncated header".into())));
        let p = u32::try_from(header()?).map_err(|_| Error::Parse("modulus out of range".into()))?;
        let n = header()? as usize;
        let d = header()? as usize;
        let coeffs = tokens
            .map(|r| r.and_then(|c| u32::try_from(c).map_err(|_| Error::Parse(format!("coefficient {c}")))))
            .collect::<Result<Vec<u32>>>()?;
        Tensor::from_residues(PrimeField::new(p)?, d, n, coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::all_vectors;
    use proptest::prelude::*;

    fn fp(p: u32) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    #[test]
    fn eval_examples() {
        let f5 = fp(5);
        let t = Tensor::identity_matrix(f5, 2);
        let x = FpVector::from_raw(f5, &[1, 2]);
        let y = FpVector::from_raw(f5, &[3, 4]);
        assert_eq!(eval(&t, &[&x, &y]).unwrap().value(), 1);
        let z = FpVector::zero(f5, 2);
        assert_eq!(eval(&t, &[&x, &z]).unwrap().value(), 0);

        let f2 = fp(2);
        let t = Tensor::from_units(f2, 3, 2, &[&[0, 0, 0], &[1, 1, 1]]).unwrap();
        let ones = FpVector::from_raw(f2, &[1, 1]);
        assert_eq!(eval(&t, &[&ones, &ones, &ones]).unwrap().value(), 0);
    }

    #[test]
    fn eval_shape_errors() {
        let f5 = fp(5);
        let t = Tensor::identity_matrix(f5, 2);
        let x = FpVector::from_raw(f5, &[1, 2, 3]);
        assert!(eval(&t, &[&x, &x]).is_err());
        let y = FpVector::from_raw(fp(7), &[1, 2]);
        assert!(diagonal_eval(&t, &y).is_err());
        let ok = FpVector::from_raw(f5, &[1, 2]);
        assert!(eval(&t, &[&ok]).is_err());
    }

    #[test]
    fn diagonal_examples() {
        let f5 = fp(5);
        let t = Tensor::identity_matrix(f5, 2);
        assert_eq!(diagonal_eval(&t, &FpVector::from_raw(f5, &[1, 2])).unwrap().value(), 0);
        assert_eq!(diagonal_eval(&t, &FpVector::zero(f5, 2)).unwrap().value(), 0);
        let f7 = fp(7);
        let cube = Tensor::from_raw(f7, 3, 1, &[1]).unwrap();
        assert_eq!(diagonal_eval(&cube, &FpVector::from_raw(f7, &[2])).unwrap().value(), 1);
    }

    #[test]
    fn multilinearity_exhaustive_binary() {
        let f = fp(2);
        for d in 2..=3usize {
            let len = 2usize.pow(d as u32);
            for ti in 0..(1u64 << len) {
                let t = Tensor::from_index(f, d, 2, ti);
                let vs: Vec<FpVector> = all_vectors(f, 2).collect();
                for slot in 0..d {
                    for x in &vs {
                        for x2 in &vs {
                            let fixed = &vs[3];
                            let sum = x.try_add(x2).unwrap();
                            let args = |v: &FpVector| -> FpScalar {
                                let mut a: Vec<&FpVector> = vec![fixed; d];
                                a[slot] = v;
                                eval(&t, &a).unwrap()
                            };
                            assert_eq!(args(&sum), args(x).try_add(args(x2)).unwrap());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn bias_examples() {
        for p in [2u32, 3, 5, 7] {
            let f = fp(p);
            let zero = Tensor::zero(f, 3, 2);
            let b = exact_bias(&zero, DEFAULT_CAP).unwrap();
            assert_eq!(b.to_f64(), 1.0);
            assert_eq!(b.analytic_rank(), 0.0);
            let one = Tensor::from_raw(f, 2, 1, &[1]).unwrap();
            let b = exact_bias(&one, DEFAULT_CAP).unwrap();
            assert_eq!((b.numerator, b.denominator_exponent), (1, 1));
        }
        let f3 = fp(3);
        let mut t = Tensor::zero(f3, 2, 3);
        t = t.try_add(&Tensor::from_units(f3, 2, 3, &[&[0, 0], &[1, 1]]).unwrap()).unwrap();
        let b = exact_bias(&t, DEFAULT_CAP).unwrap();
        assert_eq!(b.integer_analytic_rank(), Some(2));
        assert_eq!(analytic_rank(&Tensor::identity_matrix(f3, 2), DEFAULT_CAP).unwrap(), 2.0);
    }

    #[test]
    fn bias_cap_is_enforced() {
        let f = fp(5);
        let t = Tensor::zero(f, 3, 4);
        let err = exact_bias(&t, 1000).unwrap_err();
        assert!(matches!(err, Error::CapExceeded { .. }), "{err}");
        assert!(exact_bias(&Tensor::zero(f, 1, 2), DEFAULT_CAP).is_err());
    }

    #[test]
    fn exact_rank_comparisons() {
        let b = ExactBias {
            modulus: 2,
            numerator: 5,
            denominator_exponent: 4,
        };
        assert!(b.arank_at_most(2));
        assert!(!b.arank_at_most(1));
        assert_eq!(b.integer_analytic_rank(), None);
        let b = ExactBias {
            modulus: 3,
            numerator: 9,
            denominator_exponent: 4,
        };
        assert_eq!(b.integer_analytic_rank(), Some(2));
        assert!(b.arank_at_most(2) && !b.arank_at_most(1));
    }

    #[test]
    fn gauss_sum_modulus() {
        let f = fp(5);
        let t = Tensor::from_raw(f, 2, 1, &[1]).unwrap();
        let chi = Character::standard(f);
        let z = diagonal_bias(&t, &chi, DEFAULT_CAP).unwrap();
        let direct: Complex64 = (0..5u32).map(|x| chi.at(x * x % 5)).sum::<Complex64>() / 5.0;
        assert!((z - direct).norm() < 1e-12);
        assert!((z.norm() - 5f64.powf(-0.5)).abs() < 1e-9);
        let zero = diagonal_bias(&Tensor::zero(f, 3, 2), &chi, DEFAULT_CAP).unwrap();
        assert!((zero - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn alternating_tensor_has_trivial_diagonal() {
        let f = fp(5);
        let t = Tensor::from_raw(f, 2, 2, &[0, 1, 4, 0]).unwrap();
        let chi = Character::standard(f);
        let z = diagonal_bias(&t, &chi, DEFAULT_CAP).unwrap();
        assert!((z - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn symmetry_detection() {
        let f = fp(3);
        assert!(SymmetricTensor::new(Tensor::identity_matrix(f, 3)).is_ok());
        let t = Tensor::from_raw(f, 2, 2, &[0, 1, 2, 0]).unwrap();
        assert_eq!(SymmetricTensor::new(t), Err(Error::NotSymmetric));
        let mut rng = SampleStream::new(5, 5);
        for _ in 0..20 {
            let s = SymmetricTensor::random(f, 3, 3, &mut rng);
            assert!(s.tensor().is_symmetric());
        }
    }

    #[test]
    fn text_and_json_formats() {
        let f = fp(3);
        let t = Tensor::from_raw(f, 2, 2, &[0, 1, 2, 1]).unwrap();
        assert_eq!(t.to_text(), "3 2 2\n0 1 2 1\n");
        assert_eq!(t.to_json(), r#"{"p":3,"n":2,"d":2,"coeffs":[0,1,2,1]}"#);
        assert!(Tensor::from_text("4 2 2\n0 1 2 1").is_err());
        assert!(Tensor::from_text("3 2 2\n0 1 2").is_err());
        assert!(Tensor::from_json(r#"{"p":3,"n":2,"d":2,"coeffs":[0,1,2,3]}"#).is_err());
    }

    proptest! {
        #[test]
        fn serialization_round_trips(p in prop::sample::select(vec![2u32, 3, 5, 7, 65521]),
                                     n in 1usize..4, d in 1usize..4, seed in any::<u64>()) {
            let f = fp(p);
            let t = Tensor::random(f, d, n, &mut SampleStream::new(seed, 0));
            prop_assert_eq!(Tensor::from_text(&t.to_text()).unwrap(), t.clone());
            prop_assert_eq!(Tensor::from_json(&t.to_json()).unwrap(), t);
        }

        #[test]
        fn bias_is_at_least_trivial_tuple(p in prop::sample::select(vec![2u32, 3, 5]),
                                          n in 1usize..4, d in 2usize..4, seed in any::<u64>()) {
            let f = fp(p);
            let t = Tensor::random(f, d, n, &mut SampleStream::new(seed, 1));
            let b = exact_bias(&t, DEFAULT_CAP).unwrap();
            prop_assert!(b.numerator >= 1);
            prop_assert!(b.to_f64() <= 1.0);
            prop_assert!(b.analytic_rank() >= -1e-12);
            prop_assert!(b.analytic_rank() <= (n * (d - 1)) as f64 + 1e-12);
        }
    }
}

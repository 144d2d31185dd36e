//! Exact linear algebra over F_p.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{dot, FpVector, PrimeField};

/// Dense row-major matrix over F_p.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FpMatrix {
    field: PrimeField,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl FpMatrix {
    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        FpMatrix {
            field,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: PrimeField, n: usize) -> Self {
        let mut m = FpMatrix::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    /// Builds a matrix from raw rows, reducing entries modulo p.
    pub fn from_rows(field: PrimeField, rows: &[Vec<u64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    got: row.len(),
                });
            }
            data.extend(row.iter().map(|&a| field.reduce(a)));
        }
        Ok(FpMatrix {
            field,
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn from_vectors(field: PrimeField, cols: usize, vectors: &[FpVector]) -> Result<Self> {
        let mut data = Vec::with_capacity(vectors.len() * cols);
        for v in vectors {
            if v.field() != field {
                return Err(Error::ModulusMismatch {
                    left: field.modulus(),
                    right: v.field().modulus(),
                });
            }
            if v.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    got: v.len(),
                });
            }
            data.extend_from_slice(v.entries());
        }
        Ok(FpMatrix {
            field,
            rows: vectors.len(),
            cols,
            data,
        })
    }

    /// Wraps row-major residues already in `[0, p)`.
    pub fn from_residues(field: PrimeField, rows: usize, cols: usize, data: Vec<u32>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(FpMatrix {
            field,
            rows,
            cols,
            data,
        })
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u32) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[u32] {
        &self.data
    }

    pub fn transpose(&self) -> FpMatrix {
        let mut t = FpMatrix::zeros(self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    /// Reduces in place to reduced row-echelon form and returns the pivot columns.
    pub fn rref_in_place(&mut self) -> Vec<usize> {
        let f = self.field;
        let mut pivots = Vec::new();
        let mut lead = 0;
        for c in 0..self.cols {
            if lead == self.rows {
                break;
            }
            let Some(pr) = (lead..self.rows).find(|&r| self.get(r, c) != 0) else {
                continue;
            };
            if pr != lead {
                for j in 0..self.cols {
                    self.data.swap(pr * self.cols + j, lead * self.cols + j);
                }
            }
            let inv = f.inv(self.get(lead, c)).expect("pivot is nonzero");
            for j in c..self.cols {
                let v = self.get(lead, j);
                self.set(lead, j, f.mul(v, inv));
            }
            for r in 0..self.rows {
                if r == lead {
                    continue;
                }
                let factor = self.get(r, c);
                if factor == 0 {
                    continue;
                }
                for j in c..self.cols {
                    let v = f.sub(self.get(r, j), f.mul(factor, self.get(lead, j)));
                    self.set(r, j, v);
                }
            }
            pivots.push(c);
            lead += 1;
        }
        pivots
    }

    pub fn rref(&self) -> (FpMatrix, Vec<usize>) {
        let mut m = self.clone();
        let pivots = m.rref_in_place();
        (m, pivots)
    }
}

/// Rank over F_p by Gaussian elimination.
pub fn rank(m: &FpMatrix) -> usize {
    m.rref().1.len()
}

/// Rank of a small row-major residue buffer, eliminating in place.
pub(crate) fn rank_of_buffer(field: PrimeField, rows: usize, cols: usize, data: &mut [u32]) -> usize {
    let mut lead = 0;
    for c in 0..cols {
        if lead == rows {
            break;
        }
        let Some(pr) = (lead..rows).find(|&r| data[r * cols + c] != 0) else {
            continue;
        };
        if pr != lead {
            for j in 0..cols {
                data.swap(pr * cols + j, lead * cols + j);
            }
        }
        let inv = field.inv(data[lead * cols + c]).expect("pivot is nonzero");
        for r in lead + 1..rows {
            let factor = field.mul(data[r * cols + c], inv);
            if factor == 0 {
                continue;
            }
            for j in c..cols {
                let v = field.sub(data[r * cols + j], field.mul(factor, data[lead * cols + j]));
                data[r * cols + j] = v;
            }
        }
        lead += 1;
    }
    lead
}

/// A vector `w` with `⟨w, v⟩ = 1` for every input `v`.
///
/// Free variables of the back-substitution are set to zero. With no inputs
/// the first standard basis vector of the ambient space is returned.
pub fn solve_all_ones(field: PrimeField, ambient: usize, vectors: &[FpVector]) -> Result<FpVector> {
    if ambient == 0 {
        return Err(Error::Degenerate("ambient dimension must be at least 1"));
    }
    if vectors.is_empty() {
        let mut e = vec![0; ambient];
        e[0] = 1;
        return FpVector::from_residues(field, e);
    }
    let rows = vectors.len();
    let cols = ambient + 1;
    let mut data = Vec::with_capacity(rows * cols);
    for v in vectors {
        if v.field() != field {
            return Err(Error::ModulusMismatch {
                left: field.modulus(),
                right: v.field().modulus(),
            });
        }
        if v.len() != ambient {
            return Err(Error::DimensionMismatch {
                expected: ambient,
                got: v.len(),
            });
        }
        data.extend_from_slice(v.entries());
        data.push(1);
    }
    let mut aug = FpMatrix::from_residues(field, rows, cols, data)?;
    let pivots = aug.rref_in_place();
    if pivots.len() < rows || pivots.contains(&ambient) {
        return Err(Error::DependentSet);
    }
    let mut w = vec![0u32; ambient];
    for (r, &c) in pivots.iter().enumerate() {
        w[c] = aug.get(r, ambient);
    }
    FpVector::from_residues(field, w)
}

/// A subspace of F_p^D stored by its canonical RREF basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SubspaceFp {
    field: PrimeField,
    ambient: usize,
    basis: Vec<Vec<u32>>,
    pivots: Vec<usize>,
}

impl SubspaceFp {
    pub fn zero(field: PrimeField, ambient: usize) -> Self {
        SubspaceFp {
            field,
            ambient,
            basis: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn full(field: PrimeField, ambient: usize) -> Self {
        SubspaceFp::span_of_matrix(&FpMatrix::identity(field, ambient))
    }

    pub fn span(field: PrimeField, ambient: usize, vectors: &[FpVector]) -> Result<Self> {
        Ok(SubspaceFp::span_of_matrix(&FpMatrix::from_vectors(
            field, ambient, vectors,
        )?))
    }

    pub fn span_of_matrix(m: &FpMatrix) -> Self {
        let (r, pivots) = m.rref();
        let basis = (0..pivots.len()).map(|i| r.row(i).to_vec()).collect();
        SubspaceFp {
            field: m.field(),
            ambient: m.cols(),
            basis,
            pivots,
        }
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<u32>] {
        &self.basis
    }

    pub fn basis_vectors(&self) -> Vec<FpVector> {
        self.basis
            .iter()
            .map(|b| FpVector::from_residues(self.field, b.clone()).expect("reduced"))
            .collect()
    }

    /// Residual of `v` after eliminating along the basis pivots.
    fn reduce(&self, v: &[u32]) -> Vec<u32> {
        let f = self.field;
        let mut w = v.to_vec();
        for (row, &c) in self.basis.iter().zip(&self.pivots) {
            let factor = w[c];
            if factor != 0 {
                for (x, &b) in w.iter_mut().zip(row) {
                    *x = f.sub(*x, f.mul(factor, b));
                }
            }
        }
        w
    }

    pub fn contains_residues(&self, v: &[u32]) -> bool {
        self.reduce(v).iter().all(|&a| a == 0)
    }

    /// Number of elements, `p^dim`, if it fits in `u64`.
    pub fn cardinality(&self) -> Option<u64> {
        self.field.checked_power(self.dim() as u64)
    }

    /// The element with coordinates `index` (base-p digits) in the stored basis.
    pub fn element(&self, index: u64) -> Vec<u32> {
        let f = self.field;
        let coeffs = FpVector::from_index(f, self.dim(), index);
        let mut out = vec![0u32; self.ambient];
        for (row, &c) in self.basis.iter().zip(coeffs.entries()) {
            if c != 0 {
                for (x, &b) in out.iter_mut().zip(row) {
                    *x = f.add(*x, f.mul(c, b));
                }
            }
        }
        out
    }

    /// Flattened basis, used for lexicographic tie-breaking.
    pub fn basis_key(&self) -> Vec<u32> {
        self.basis.iter().flatten().copied().collect()
    }
}

pub fn membership(v: &FpVector, u: &SubspaceFp) -> Result<bool> {
    if v.field() != u.field {
        return Err(Error::ModulusMismatch {
            left: u.field.modulus(),
            right: v.field().modulus(),
        });
    }
    if v.len() != u.ambient {
        return Err(Error::DimensionMismatch {
            expected: u.ambient,
            got: v.len(),
        });
    }
    Ok(u.contains_residues(v.entries()))
}

/// `U⊥` under the standard bilinear pairing.
pub fn orthogonal_complement(u: &SubspaceFp) -> SubspaceFp {
    let f = u.field;
    let d = u.ambient;
    let mut rows = Vec::new();
    for free in (0..d).filter(|c| !u.pivots.contains(c)) {
        let mut v = vec![0u32; d];
        v[free] = 1;
        for (row, &c) in u.basis.iter().zip(&u.pivots) {
            v[c] = f.neg(row[free]);
        }
        rows.extend(v);
    }
    let count = rows.len() / d.max(1);
    let m = FpMatrix::from_residues(f, count, d, rows).expect("consistent shape");
    SubspaceFp::span_of_matrix(&m)
}

/// Number of `k`-dimensional subspaces of F_p^D (Gaussian binomial), if it fits.
pub fn subspace_count(field: PrimeField, ambient: usize, k: usize) -> Option<u64> {
    if k > ambient {
        return Some(0);
    }
    let p = field.modulus() as u128;
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 0..k {
        num = num.checked_mul(p.checked_pow((ambient - i) as u32)?.checked_sub(1)?)?;
        den = den.checked_mul(p.checked_pow((i + 1) as u32)?.checked_sub(1)?)?;
    }
    u64::try_from(num / den).ok()
}

/// Every `k`-dimensional subspace of F_p^D, each exactly once, in RREF.
///
/// Pivot sets are visited in lexicographic order and free entries in
/// packed-index order, so the sequence is deterministic.
pub fn enumerate_subspaces(field: PrimeField, ambient: usize, k: usize) -> Vec<SubspaceFp> {
    let mut out = Vec::new();
    if k > ambient {
        return out;
    }
    let mut pivots: Vec<usize> = (0..k).collect();
    loop {
        // free slots: (row, col) with col > pivot[row] and col not a pivot
        let slots: Vec<(usize, usize)> = (0..k)
            .flat_map(|r| {
                let pv = &pivots;
                (pv[r] + 1..ambient)
                    .filter(move |c| !pv.contains(c))
                    .map(move |c| (r, c))
            })
            .collect();
        let total = field
            .checked_power(slots.len() as u64)
            .expect("subspace enumeration too large");
        for idx in 0..total {
            let digits = FpVector::from_index(field, slots.len(), idx);
            let mut basis = vec![vec![0u32; ambient]; k];
            for (r, &c) in pivots.iter().enumerate() {
                basis[r][c] = 1;
            }
            for (&(r, c), &v) in slots.iter().zip(digits.entries()) {
                basis[r][c] = v;
            }
            out.push(SubspaceFp {
                field,
                ambient,
                basis,
                pivots: pivots.clone(),
            });
        }
        // next combination
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if pivots[i] < ambient - k + i {
                pivots[i] += 1;
                for j in i + 1..k {
                    pivots[j] = pivots[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Raw inner product helper re-exported for callers holding residue slices.
pub fn pairing(field: PrimeField, a: &[u32], b: &[u32]) -> u32 {
    dot(field, a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::all_vectors;
    use crate::rng::SampleStream;

    fn fp(p: u32) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    fn vecs(f: PrimeField, rows: &[&[u64]]) -> Vec<FpVector> {
        rows.iter().map(|r| FpVector::from_raw(f, r)).collect()
    }

    #[test]
    fn rank_examples() {
        let f = fp(5);
        let m = FpMatrix::from_rows(f, &[vec![1, 2], vec![2, 4]]).unwrap();
        assert_eq!(rank(&m), 1);
        for p in [2, 3, 7] {
            assert_eq!(rank(&FpMatrix::identity(fp(p), 3)), 3);
        }
        assert_eq!(rank(&FpMatrix::zeros(f, 3, 4)), 0);
    }

    #[test]
    fn rank_of_transpose_exhaustive_binary() {
        let f = fp(2);
        for rows in 1..=3 {
            for cols in 1..=3 {
                for idx in 0..(1u64 << (rows * cols)) {
                    let v = FpVector::from_index(f, rows * cols, idx);
                    let m = FpMatrix::from_residues(f, rows, cols, v.into_entries()).unwrap();
                    let r = rank(&m);
                    assert_eq!(r, rank(&m.transpose()));
                    let mut buf = m.data().to_vec();
                    assert_eq!(r, rank_of_buffer(f, rows, cols, &mut buf));
                }
            }
        }
    }

    #[test]
    fn solve_all_ones_examples() {
        let f = fp(5);
        let input = vecs(f, &[&[1, 0, 0], &[0, 0, 1]]);
        let w = solve_all_ones(f, 3, &input).unwrap();
        assert_eq!(w.entries(), &[1, 0, 1]);
        for v in &input {
            assert_eq!(w.try_dot(v).unwrap().value(), 1);
        }

        let f3 = fp(3);
        let w = solve_all_ones(f3, 2, &vecs(f3, &[&[1, 1]])).unwrap();
        assert_eq!(w.entries(), &[1, 0]);

        let f2 = fp(2);
        assert_eq!(
            solve_all_ones(f2, 2, &vecs(f2, &[&[1, 0], &[1, 0]])),
            Err(Error::DependentSet)
        );

        let empty = solve_all_ones(f, 4, &[]).unwrap();
        assert!(!empty.is_zero());
    }

    #[test]
    fn solve_all_ones_random_square_systems() {
        let f = fp(7);
        let mut rng = SampleStream::new(11, 0);
        let mut solved = 0;
        for _ in 0..200 {
            let vs: Vec<FpVector> = (0..4)
                .map(|_| crate::rng::sample_vector(4, f, &mut rng).unwrap())
                .collect();
            match solve_all_ones(f, 4, &vs) {
                Ok(w) => {
                    solved += 1;
                    for v in &vs {
                        assert_eq!(w.try_dot(v).unwrap().value(), 1);
                    }
                }
                Err(Error::DependentSet) => {
                    let m = FpMatrix::from_vectors(f, 4, &vs).unwrap();
                    assert!(rank(&m) < 4);
                }
                Err(e) => panic!("{e}"),
            }
        }
        assert!(solved > 100);
    }

    #[test]
    fn membership_examples() {
        let f = fp(2);
        let u = SubspaceFp::span(f, 3, &vecs(f, &[&[1, 1, 0]])).unwrap();
        assert!(membership(&FpVector::from_raw(f, &[1, 1, 0]), &u).unwrap());
        assert!(!membership(&FpVector::from_raw(f, &[1, 0, 0]), &u).unwrap());
        assert!(membership(&FpVector::zero(f, 3), &u).unwrap());
        let z = SubspaceFp::zero(f, 3);
        assert!(membership(&FpVector::zero(f, 3), &z).unwrap());
        assert!(!membership(&FpVector::from_raw(f, &[0, 0, 1]), &z).unwrap());
        assert!(membership(&FpVector::zero(f, 2), &u).is_err());
    }

    #[test]
    fn complement_examples() {
        let f = fp(2);
        assert_eq!(orthogonal_complement(&SubspaceFp::full(f, 3)).dim(), 0);
        assert_eq!(orthogonal_complement(&SubspaceFp::zero(f, 3)).dim(), 3);
        let u = SubspaceFp::span(f, 3, &vecs(f, &[&[1, 0, 0]])).unwrap();
        let w = orthogonal_complement(&u);
        assert_eq!(w.dim(), 2);
        for a in u.basis() {
            for b in w.basis() {
                assert_eq!(pairing(f, a, b), 0);
            }
        }
    }

    #[test]
    fn double_complement_is_identity() {
        for p in [2, 3, 5] {
            let f = fp(p);
            let mut rng = SampleStream::new(p as u64, 9);
            for _ in 0..100 {
                let ambient = 1 + rng.below(6) as usize;
                let count = rng.below(ambient as u64 + 1) as usize;
                let vs: Vec<FpVector> = (0..count)
                    .map(|_| crate::rng::sample_vector(ambient, f, &mut rng).unwrap())
                    .collect();
                let u = SubspaceFp::span(f, ambient, &vs).unwrap();
                let perp = orthogonal_complement(&u);
                assert_eq!(u.dim() + perp.dim(), ambient);
                assert_eq!(orthogonal_complement(&perp), u);
            }
        }
    }

    #[test]
    fn subspace_enumeration_matches_gaussian_binomial() {
        for (p, d) in [(2u32, 3usize), (2, 4), (3, 3)] {
            let f = fp(p);
            for k in 0..=d {
                let all = enumerate_subspaces(f, d, k);
                assert_eq!(all.len() as u64, subspace_count(f, d, k).unwrap());
                let mut unique = all.clone();
                unique.sort_by_key(|s| s.basis_key());
                unique.dedup();
                assert_eq!(unique.len(), all.len());
                for s in &all {
                    assert_eq!(s.dim(), k);
                    assert_eq!(&SubspaceFp::span(f, d, &s.basis_vectors()).unwrap(), s);
                }
            }
        }
        assert_eq!(enumerate_subspaces(fp(2), 3, 1).len(), 7);
    }

    #[test]
    fn subspace_elements_are_members() {
        let f = fp(3);
        let u = SubspaceFp::span(f, 3, &vecs(f, &[&[1, 2, 0], &[0, 1, 1]])).unwrap();
        let mut members = 0;
        for v in all_vectors(f, 3) {
            if membership(&v, &u).unwrap() {
                members += 1;
            }
        }
        assert_eq!(members, u.cardinality().unwrap());
        for i in 0..u.cardinality().unwrap() {
            assert!(u.contains_residues(&u.element(i)));
        }
    }
}

//! Partition rank of small tensors.
//!
//! Exact values come from a breadth-first classification of the whole tensor
//! space: level `r` holds every tensor that is a sum of `r` partition-rank-1
//! tensors and no fewer. Each tensor remembers one predecessor, which yields
//! a certificate that is re-verified by reconstruction.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FpVector, PrimeField};
use crate::linalg::{rank, FpMatrix};
use crate::par;
use crate::tensor::{checked_space, decode_index, ExactBias, Tensor};

/// Tensor spaces larger than this are not classified exactly by default.
pub const PRANK_SPACE_CAP: u64 = 1 << 20;

/// A split of `[d]` into two nonempty parts; `left` always holds index 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PartitionSplit {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

impl PartitionSplit {
    pub fn new(d: usize, left: &[usize]) -> Result<Self> {
        let mut left = left.to_vec();
        left.sort_unstable();
        left.dedup();
        if left.is_empty() || left.len() >= d || left.iter().any(|&i| i >= d) {
            return Err(Error::InvalidParameter(format!(
                "{left:?} is not a proper nonempty subset of [{d}]"
            )));
        }
        let mut right: Vec<usize> = (0..d).filter(|i| !left.contains(i)).collect();
        if !left.contains(&0) {
            std::mem::swap(&mut left, &mut right);
        }
        Ok(PartitionSplit { left, right })
    }

    /// Every split of `[d]`, one per unordered pair, ordered by left arity then lexicographically.
    pub fn all(d: usize) -> Vec<PartitionSplit> {
        let mut out: Vec<PartitionSplit> = (1u64..(1 << d))
            .filter(|mask| mask & 1 == 1 && mask.count_ones() < d as u32)
            .map(|mask| {
                let left: Vec<usize> = (0..d).filter(|i| mask >> i & 1 == 1).collect();
                PartitionSplit::new(d, &left).expect("valid mask")
            })
            .collect();
        out.sort_by(|a, b| (a.left.len(), &a.left).cmp(&(b.left.len(), &b.left)));
        out
    }

    pub fn left_arity(&self) -> usize {
        self.left.len()
    }

    pub fn right_arity(&self) -> usize {
        self.right.len()
    }
}

/// `T_1(x_left) · T_2(x_right)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankOneTerm {
    pub split: PartitionSplit,
    /// Coefficients of the form on the left indices, row-major in `split.left` order.
    pub left: Vec<u32>,
    /// Coefficients of the form on the right indices, row-major in `split.right` order.
    pub right: Vec<u32>,
}

impl RankOneTerm {
    pub fn expand(&self, field: PrimeField, n: usize) -> Tensor {
        let d = self.split.left.len() + self.split.right.len();
        let mut idx = vec![0usize; d];
        let coeffs = (0..n.pow(d as u32))
            .map(|pos| {
                decode_index(pos, n, &mut idx);
                let l = self.split.left.iter().fold(0, |acc, &i| acc * n + idx[i]);
                let r = self.split.right.iter().fold(0, |acc, &i| acc * n + idx[i]);
                field.mul(self.left[l], self.right[r])
            })
            .collect();
        Tensor::from_residues(field, d, n, coeffs).expect("shape follows split")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RankCertificate {
    pub summands: Vec<RankOneTerm>,
}

impl RankCertificate {
    pub fn len(&self) -> usize {
        self.summands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.summands.is_empty()
    }

    pub fn reconstruct(&self, field: PrimeField, d: usize, n: usize) -> Tensor {
        self.summands
            .iter()
            .fold(Tensor::zero(field, d, n), |acc, term| {
                acc.try_add(&term.expand(field, n)).expect("same shape")
            })
    }

    pub fn verifies(&self, t: &Tensor) -> bool {
        self.summands.iter().all(|s| {
            s.split.left.len() + s.split.right.len() == t.order()
                && s.left.len() == t.side().pow(s.split.left.len() as u32)
                && s.right.len() == t.side().pow(s.split.right.len() as u32)
        }) && self.reconstruct(t.field(), t.order(), t.side()) == *t
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PrankOutcome {
    Exact {
        rank: usize,
        certificate: RankCertificate,
    },
    /// The tensor is not a sum of `r_max` or fewer rank-1 tensors.
    ExceedsMax { r_max: usize },
    /// Outside the exhaustive envelope; the certificate only bounds the rank from above.
    UpperBound {
        rank: usize,
        certificate: RankCertificate,
    },
}

impl PrankOutcome {
    pub fn exact(&self) -> Option<usize> {
        match self {
            PrankOutcome::Exact { rank, .. } => Some(*rank),
            _ => None,
        }
    }
}

/// Every tensor of partition rank exactly 1 in `(F_p^n)^{⊗d}`, deduplicated.
#[derive(Debug, Clone)]
pub struct RankOneCatalog {
    field: PrimeField,
    n: usize,
    d: usize,
    terms: Vec<RankOneTerm>,
    packed: Vec<u64>,
}

impl RankOneCatalog {
    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[RankOneTerm] {
        &self.terms
    }

    /// Packed indices of the catalogued tensors, in catalog order.
    pub fn packed(&self) -> &[u64] {
        &self.packed
    }

    pub fn tensors(&self) -> impl Iterator<Item = Tensor> + '_ {
        self.terms.iter().map(|t| t.expand(self.field, self.n))
    }
}

/// Enumerates the rank-1 tensors, each exactly once.
///
/// Candidates are generated per split with the left form normalized so its
/// first nonzero coefficient is 1; the same tensor arising from several
/// splits is kept only at its first occurrence.
pub fn prank1_enumerate(field: PrimeField, n: usize, d: usize, cap: u64) -> Result<RankOneCatalog> {
    if d < 2 || n == 0 {
        return Err(Error::InvalidParameter(format!(
            "partition rank needs d ≥ 2 and n ≥ 1 (got d={d}, n={n})"
        )));
    }
    let space = checked_space(field, n.pow(d as u32) as u64, cap, "tensor space")?;
    let mut seen = vec![false; space as usize];
    let mut terms = Vec::new();
    let mut packed = Vec::new();
    for split in PartitionSplit::all(d) {
        let left_len = n.pow(split.left_arity() as u32);
        let right_len = n.pow(split.right_arity() as u32);
        let left_forms: Vec<Vec<u32>> = (1..field.checked_power(left_len as u64).expect("below cap"))
            .map(|i| FpVector::from_index(field, left_len, i).into_entries())
            .filter(|v| v.iter().find(|&&c| c != 0) == Some(&1))
            .collect();
        let right_total = field.checked_power(right_len as u64).expect("below cap");
        for left in &left_forms {
            for j in 1..right_total {
                let right = FpVector::from_index(field, right_len, j).into_entries();
                let term = RankOneTerm {
                    split: split.clone(),
                    left: left.clone(),
                    right,
                };
                let index = term.expand(field, n).index();
                if !seen[index as usize] {
                    seen[index as usize] = true;
                    terms.push(term);
                    packed.push(index);
                }
            }
        }
    }
    Ok(RankOneCatalog {
        field,
        n,
        d,
        terms,
        packed,
    })
}

const UNVISITED: u8 = u8::MAX;

/// Exact partition rank of every tensor in a small space.
#[derive(Debug, Clone)]
pub struct PrankTable {
    catalog: RankOneCatalog,
    ranks: Vec<u8>,
    /// Catalog index of the last summand on the recorded shortest path.
    via: Vec<u32>,
    depth: usize,
    complete: bool,
}

impl PrankTable {
    /// Classifies the space up to partition rank `max_depth` (`None` = until every tensor is reached).
    pub fn build(field: PrimeField, n: usize, d: usize, max_depth: Option<usize>, cap: u64) -> Result<Self> {
        let catalog = prank1_enumerate(field, n, d, cap)?;
        let space = field.checked_power(n.pow(d as u32) as u64).expect("checked") as usize;
        let digits = n.pow(d as u32);
        let mut ranks = vec![UNVISITED; space];
        let mut via = vec![u32::MAX; space];
        ranks[0] = 0;
        let mut remaining = space - 1;
        let mut depth = 0usize;
        let limit = max_depth.unwrap_or(usize::MAX).min(UNVISITED as usize - 1);
        let rank_one_digits: Vec<Vec<u32>> = catalog
            .packed
            .iter()
            .map(|&i| FpVector::from_index(field, digits, i).into_entries())
            .collect();
        while remaining > 0 && depth < limit {
            let level = depth as u8;
            let snapshot = &ranks;
            let found: Vec<Option<u32>> = par::map_collect(0..space as u64, |u| {
                if snapshot[u as usize] != UNVISITED {
                    return None;
                }
                predecessor(field, u, digits, &catalog.packed, &rank_one_digits, snapshot, level)
            });
            let mut added = 0usize;
            for (u, hit) in found.into_iter().enumerate() {
                if let Some(r) = hit {
                    ranks[u] = level + 1;
                    via[u] = r;
                    added += 1;
                }
            }
            depth += 1;
            remaining -= added;
            if added == 0 {
                break;
            }
        }
        Ok(PrankTable {
            catalog,
            ranks,
            via,
            depth,
            complete: remaining == 0,
        })
    }

    pub fn catalog(&self) -> &RankOneCatalog {
        &self.catalog
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn space_size(&self) -> u64 {
        self.ranks.len() as u64
    }

    /// Exact rank of the tensor with packed index `index`, if it was reached.
    pub fn rank_of_index(&self, index: u64) -> Option<usize> {
        match self.ranks[index as usize] {
            UNVISITED => None,
            r => Some(r as usize),
        }
    }

    pub fn certificate_of_index(&self, mut index: u64) -> Option<RankCertificate> {
        self.rank_of_index(index)?;
        let f = self.catalog.field;
        let digits = self.catalog.n.pow(self.catalog.d as u32);
        let mut summands = Vec::new();
        while index != 0 {
            let r = self.via[index as usize] as usize;
            summands.push(self.catalog.terms[r].clone());
            index = packed_sub(f, index, self.catalog.packed[r], digits);
        }
        summands.reverse();
        Some(RankCertificate { summands })
    }

    /// `histogram[r]` = number of tensors of partition rank exactly `r`.
    pub fn histogram(&self) -> Vec<u64> {
        let mut h = vec![0u64; self.depth + 1];
        for &r in &self.ranks {
            if r != UNVISITED {
                h[r as usize] += 1;
            }
        }
        h
    }
}

fn predecessor(
    field: PrimeField,
    u: u64,
    digits: usize,
    packed: &[u64],
    rank_one_digits: &[Vec<u32>],
    ranks: &[u8],
    level: u8,
) -> Option<u32> {
    if field.modulus() == 2 {
        return packed
            .iter()
            .position(|&r| ranks[(u ^ r) as usize] == level)
            .map(|i| i as u32);
    }
    let ud = FpVector::from_index(field, digits, u).into_entries();
    let p = field.modulus() as u64;
    rank_one_digits
        .iter()
        .position(|rd| {
            let diff = ud
                .iter()
                .zip(rd)
                .rev()
                .fold(0u64, |acc, (&a, &b)| acc * p + field.sub(a, b) as u64);
            ranks[diff as usize] == level
        })
        .map(|i| i as u32)
}

fn packed_sub(field: PrimeField, a: u64, b: u64, digits: usize) -> u64 {
    if field.modulus() == 2 {
        return a ^ b;
    }
    let x = FpVector::from_index(field, digits, a);
    let y = FpVector::from_index(field, digits, b);
    let p = field.modulus() as u64;
    x.entries()
        .iter()
        .zip(y.entries())
        .rev()
        .fold(0u64, |acc, (&s, &t)| acc * p + field.sub(s, t) as u64)
}

/// Matrix rank, the exact partition rank of a 2-tensor.
pub fn matrix_prank_oracle(m: &FpMatrix) -> usize {
    rank(m)
}

/// Column-row factorization of a row-major matrix as rank-1 terms.
fn cr_certificate(field: PrimeField, rows: usize, cols: usize, data: &[u32], split: &PartitionSplit) -> RankCertificate {
    let m = FpMatrix::from_residues(field, rows, cols, data.to_vec()).expect("shape");
    let (r, pivots) = m.rref();
    let summands = pivots
        .iter()
        .enumerate()
        .map(|(k, &c)| RankOneTerm {
            split: split.clone(),
            left: (0..rows).map(|i| m.get(i, c)).collect(),
            right: r.row(k).to_vec(),
        })
        .collect();
    RankCertificate { summands }
}

/// Best flattening bound: `min` over splits of the flattening rank.
pub fn flattening_upper_bound(t: &Tensor) -> (usize, RankCertificate) {
    let mut best: Option<(usize, RankCertificate)> = None;
    for split in PartitionSplit::all(t.order()) {
        let (rows, cols, data) = t.flatten(&split.left);
        let cert = cr_certificate(t.field(), rows, cols, &data, &split);
        if best.as_ref().is_none_or(|(r, _)| cert.len() < *r) {
            best = Some((cert.len(), cert));
        }
    }
    best.expect("d ≥ 2 has at least one split")
}

/// Partition rank of `t`, searching up to `r_max` summands.
///
/// Order-2 tensors use matrix rank directly. Larger orders are classified
/// exhaustively when the space fits in `cap`; otherwise a flattening
/// certificate is returned as an upper bound.
pub fn partition_rank(t: &Tensor, r_max: usize, cap: u64) -> Result<PrankOutcome> {
    if t.order() < 2 {
        return Err(Error::InvalidParameter("partition rank needs d ≥ 2".into()));
    }
    if t.order() == 2 {
        let split = PartitionSplit::new(2, &[0])?;
        let n = t.side();
        let certificate = cr_certificate(t.field(), n, n, t.coeffs(), &split);
        let rank = certificate.len();
        return Ok(if rank > r_max {
            PrankOutcome::ExceedsMax { r_max }
        } else {
            PrankOutcome::Exact { rank, certificate }
        });
    }
    match PrankTable::build(t.field(), t.side(), t.order(), Some(r_max), cap) {
        Ok(table) => Ok(outcome_from_table(&table, t, r_max)),
        Err(Error::CapExceeded { .. }) => {
            let (rank, certificate) = flattening_upper_bound(t);
            Ok(PrankOutcome::UpperBound { rank, certificate })
        }
        Err(e) => Err(e),
    }
}

/// Looks a tensor up in a prebuilt table.
pub fn outcome_from_table(table: &PrankTable, t: &Tensor, r_max: usize) -> PrankOutcome {
    let index = t.index();
    match table.rank_of_index(index) {
        Some(rank) if rank <= r_max => PrankOutcome::Exact {
            rank,
            certificate: table.certificate_of_index(index).expect("reached"),
        },
        _ => PrankOutcome::ExceedsMax { r_max },
    }
}

/// Exact number of tensors of partition rank at most `r`, with the `2·n^{d-1}·r`
/// exponent of the counting bound `p^{2n^{d-1}r}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LowRankCount {
    pub p: u32,
    pub n: usize,
    pub d: usize,
    pub r: usize,
    pub count: u64,
    pub bound_exponent: u64,
    pub within_bound: bool,
}

pub fn count_low_prank(field: PrimeField, n: usize, d: usize, r: usize, cap: u64) -> Result<LowRankCount> {
    let bound_exponent = 2 * (n as u64).pow(d as u32 - 1) * r as u64;
    let count = if d == 2 {
        let space = checked_space(field, (n * n) as u64, cap, "matrix space")?;
        par::sum_u64(0..space, |i| {
            let t = Tensor::from_index(field, 2, n, i);
            let m = FpMatrix::from_residues(field, n, n, t.coeffs().to_vec()).expect("square");
            u64::from(rank(&m) <= r)
        })
    } else {
        let table = PrankTable::build(field, n, d, Some(r), cap)?;
        table.histogram().iter().take(r + 1).sum()
    };
    let bound = BigUint::from(field.modulus()).pow(bound_exponent as u32);
    Ok(LowRankCount {
        p: field.modulus(),
        n,
        d,
        r,
        count,
        bound_exponent,
        within_bound: BigUint::from(count) <= bound,
    })
}

/// Smallest `α` with `prank ≤ α · arank · (ln(1 + arank) + 1)` on the given data.
///
/// Zero tensors (rank 0 on both sides) impose no constraint.
pub fn measure_alpha<'a>(data: impl IntoIterator<Item = (usize, &'a ExactBias)>) -> f64 {
    data.into_iter()
        .filter(|(prank, _)| *prank > 0)
        .map(|(prank, bias)| {
            let a = bias.analytic_rank();
            prank as f64 / (a * ((1.0 + a).ln() + 1.0))
        })
        .fold(0.0, f64::max)
}

//! The witness construction: sample a difference set `S`, find a symmetric
//! tensor whose diagonal form equals 1 on every element of `S`, take its zero
//! set `A`, and check exhaustively that `A` has no proper k-AP with common
//! difference in `S`.
//!
//! Why it works: for `Q(x) = T(x, …, x)` of degree `d = k - 1`, the `d`-th
//! finite difference along `s` is `d!·Q(s)`, independent of the base point.
//! If `x, x+s, …, x+ds` all lie in `A` that difference is 0, so `Q(s) = 0`,
//! contradicting `Q(s) = 1` whenever `p > d`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FpScalar, FpVector, PrimeField};
use crate::linalg::solve_all_ones;
use crate::par;
use crate::rng::{sample_vector, SampleStream};
use crate::tensor::{checked_space, diagonal_raw, SymmetricTensor, Tensor, TensorRecord};
use crate::veronese::{
    dual_to_symmetric_with, image_independence_with, veronese_map_with, MonomialBasis, VeroneseVector,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DrawnDifference {
    pub draw_index: u64,
    pub vector: FpVector,
}

/// The sampled multiset of common differences, in draw order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DifferenceSet {
    pub seed: u64,
    pub p: u32,
    pub n: usize,
    pub elements: Vec<DrawnDifference>,
}

impl DifferenceSet {
    pub fn from_vectors(seed: u64, field: PrimeField, n: usize, vectors: Vec<FpVector>) -> Result<Self> {
        for v in &vectors {
            if v.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: v.len(),
                });
            }
            if v.field() != field {
                return Err(Error::ModulusMismatch {
                    left: field.modulus(),
                    right: v.field().modulus(),
                });
            }
        }
        Ok(DifferenceSet {
            seed,
            p: field.modulus(),
            n,
            elements: vectors
                .into_iter()
                .enumerate()
                .map(|(i, vector)| DrawnDifference {
                    draw_index: i as u64,
                    vector,
                })
                .collect(),
        })
    }

    pub fn field(&self) -> PrimeField {
        PrimeField::new(self.p).expect("validated at construction")
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn vectors(&self) -> Vec<FpVector> {
        self.elements.iter().map(|e| e.vector.clone()).collect()
    }
}

/// `s` independent uniform draws from F_p^n; draw `i` comes from stream `i` of `seed`.
pub fn sample_difference_set(field: PrimeField, n: usize, s: usize, seed: u64) -> Result<DifferenceSet> {
    if s == 0 {
        return Err(Error::Degenerate("difference set size s must be at least 1"));
    }
    let vectors = (0..s as u64)
        .map(|i| sample_vector(n, field, &mut SampleStream::new(seed, i)))
        .collect::<Result<Vec<_>>>()?;
    DifferenceSet::from_vectors(seed, field, n, vectors)
}

/// The dual vector `w` with `⟨w, φ_d(s)⟩ = 1` on `S` and its symmetric tensor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoundTensor {
    pub dual: VeroneseVector,
    pub tensor: SymmetricTensor,
}

pub fn find_tensor(set: &DifferenceSet, d: usize) -> Result<FoundTensor> {
    let field = set.field();
    if field.modulus() as usize <= d {
        return Err(Error::CharacteristicTooSmall {
            p: field.modulus(),
            d,
        });
    }
    let basis = MonomialBasis::new(set.n, d)?;
    find_tensor_with(&basis, set)
}

pub fn find_tensor_with(basis: &MonomialBasis, set: &DifferenceSet) -> Result<FoundTensor> {
    let field = set.field();
    let vectors = set.vectors();
    if !image_independence_with(basis, &vectors)? {
        return Err(Error::ResampleRequired);
    }
    let images = vectors
        .iter()
        .map(|x| veronese_map_with(basis, x).map(|v| v.entries))
        .collect::<Result<Vec<_>>>()?;
    let w = match solve_all_ones(field, basis.dim(), &images) {
        Err(Error::DependentSet) => return Err(Error::ResampleRequired),
        other => other?,
    };
    let dual = VeroneseVector {
        entries: w,
        degree: basis.degree(),
        ambient: basis.n(),
    };
    let tensor = dual_to_symmetric_with(basis, &dual)?;
    Ok(FoundTensor { dual, tensor })
}

/// The zero set `A = {x : T(x, …, x) = 0}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessSet {
    pub tensor: SymmetricTensor,
    /// Packed indices of the members, ascending.
    pub members: Vec<u64>,
    /// `p^n`.
    pub total: u64,
    membership: Vec<bool>,
}

impl WitnessSet {
    pub fn size(&self) -> u64 {
        self.members.len() as u64
    }

    pub fn contains_index(&self, index: u64) -> bool {
        self.membership[index as usize]
    }

    pub fn contains(&self, x: &FpVector) -> bool {
        self.contains_index(x.index())
    }

    /// Density `|A| / p^n` as an unreduced fraction.
    pub fn density(&self) -> (u64, u64) {
        (self.size(), self.total)
    }

    pub fn density_f64(&self) -> f64 {
        self.size() as f64 / self.total as f64
    }

    /// Builds a witness set from an arbitrary membership predicate (used for
    /// adversarial checks of the AP verifier).
    pub fn from_membership(tensor: SymmetricTensor, membership: Vec<bool>) -> Self {
        let members = membership
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i as u64))
            .collect();
        WitnessSet {
            tensor,
            members,
            total: membership.len() as u64,
            membership,
        }
    }
}

/// Enumerates `A` and checks the Chevalley–Warning facts when `n > d`:
/// `p` divides `|A|`, and `|A| ≥ p^{n-d}` since `0 ∈ A`.
pub fn build_witness(tensor: &SymmetricTensor, cap: u64) -> Result<WitnessSet> {
    let t = tensor.tensor();
    if t.is_zero() {
        return Err(Error::InvalidParameter("witness tensor must be nonzero".into()));
    }
    let f = t.field();
    let n = t.side();
    let d = t.order();
    let total = checked_space(f, n as u64, cap, "witness set")?;
    let membership: Vec<bool> = par::map_collect(0..total, |i| {
        diagonal_raw(t, FpVector::from_index(f, n, i).entries()) == 0
    });
    let witness = WitnessSet::from_membership(tensor.clone(), membership);
    let size = witness.size();
    if n > d {
        let p = f.modulus() as u64;
        let floor = p.pow((n - d) as u32);
        if !size.is_multiple_of(p) {
            return Err(Error::CheckFailed(format!(
                "|A| = {size} is not divisible by p = {p}"
            )));
        }
        if size < floor {
            return Err(Error::CheckFailed(format!("|A| = {size} below p^(n-d) = {floor}")));
        }
    }
    Ok(witness)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KapCounterexample {
    pub x: Vec<u32>,
    pub s: Vec<u32>,
    pub draw_index: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KapVerdict {
    pub ap_free: bool,
    pub counterexample: Option<KapCounterexample>,
}

/// Checks that no `x, x+s, …, x+(k-1)s` with `s ∈ S \ {0}` lies inside `A`.
///
/// The reported counterexample is the one with the smallest packed `x`, then
/// the earliest draw, regardless of how the search is sharded.
pub fn verify_no_kap(a: &WitnessSet, set: &DifferenceSet, k: usize, cap: u64) -> Result<KapVerdict> {
    let f = set.field();
    let t = a.tensor.tensor();
    if f != t.field() || set.n != t.side() {
        return Err(Error::InvalidParameter(
            "witness set and difference set live in different spaces".into(),
        ));
    }
    if (f.modulus() as usize) < k {
        return Err(Error::InvalidParameter(format!(
            "p = {} must be at least k = {k}",
            f.modulus()
        )));
    }
    let work = a.total.checked_mul(set.len() as u64);
    if work.is_none_or(|w| w > cap) {
        return Err(Error::CapExceeded {
            what: "AP verification",
            required: format!("{}·{}", a.total, set.len()),
            cap,
        });
    }
    let n = set.n;
    let steps: Vec<(u64, &FpVector)> = set
        .elements
        .iter()
        .filter(|e| !e.vector.is_zero())
        .map(|e| (e.draw_index, &e.vector))
        .collect();
    let hit = par::first_hit(0..a.total, |xi| {
        if !a.contains_index(xi) {
            return None;
        }
        let x = FpVector::from_index(f, n, xi);
        steps.iter().find_map(|&(draw, s)| {
            let mut point = x.clone();
            for _ in 1..k {
                point = point.try_add(s).expect("same space");
                if !a.contains(&point) {
                    return None;
                }
            }
            Some(KapCounterexample {
                x: x.entries().to_vec(),
                s: s.entries().to_vec(),
                draw_index: draw,
            })
        })
    });
    Ok(match hit {
        Some((_, cx)) => KapVerdict {
            ap_free: false,
            counterexample: Some(cx),
        },
        None => KapVerdict {
            ap_free: true,
            counterexample: None,
        },
    })
}

/// `Δ_s^d Q(x) = Σ_{j=0}^{d} binom(d,j)(-1)^{d-j} Q(x + js)` for `Q = T(·, …, ·)`.
pub fn finite_difference_check(t: &Tensor, x: &FpVector, s: &FpVector) -> Result<FpScalar> {
    let f = t.field();
    for v in [x, s] {
        if v.field() != f {
            return Err(Error::ModulusMismatch {
                left: f.modulus(),
                right: v.field().modulus(),
            });
        }
        if v.len() != t.side() {
            return Err(Error::DimensionMismatch {
                expected: t.side(),
                got: v.len(),
            });
        }
    }
    let d = t.order();
    let mut acc = 0u32;
    let mut point = x.clone();
    let mut binom = 1u64;
    for j in 0..=d {
        let q = diagonal_raw(t, point.entries());
        let c = f.reduce(binom);
        let term = f.mul(c, q);
        acc = if (d - j).is_multiple_of(2) {
            f.add(acc, term)
        } else {
            f.sub(acc, term)
        };
        point = point.try_add(s)?;
        binom = binom * (d - j) as u64 / (j + 1) as u64;
    }
    Ok(f.scalar(acc as u64))
}

/// Serialized outcome of one sample → solve → enumerate → verify run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineRecord {
    pub seed: u64,
    pub p: u32,
    pub n: usize,
    pub k: usize,
    pub differences: Vec<Vec<u32>>,
    pub independent: bool,
    pub dual: Option<Vec<u32>>,
    pub tensor: Option<TensorRecord>,
    pub witness_size: Option<u64>,
    /// `"|A|/p^n"`, unreduced.
    pub density: Option<String>,
    pub contains_zero: Option<bool>,
    pub ap_free: Option<bool>,
    pub counterexample: Option<KapCounterexample>,
}

pub fn run_pipeline(field: PrimeField, n: usize, k: usize, s: usize, seed: u64, cap: u64) -> Result<PipelineRecord> {
    if k < 3 {
        return Err(Error::InvalidParameter(format!("k = {k} must be at least 3")));
    }
    if (field.modulus() as usize) < k {
        return Err(Error::InvalidParameter(format!(
            "p = {} must be at least k = {k}",
            field.modulus()
        )));
    }
    let d = k - 1;
    let basis = MonomialBasis::new(n, d)?;
    let set = sample_difference_set(field, n, s, seed)?;
    let mut record = PipelineRecord {
        seed,
        p: field.modulus(),
        n,
        k,
        differences: set.elements.iter().map(|e| e.vector.entries().to_vec()).collect(),
        independent: false,
        dual: None,
        tensor: None,
        witness_size: None,
        density: None,
        contains_zero: None,
        ap_free: None,
        counterexample: None,
    };
    let found = match find_tensor_with(&basis, &set) {
        Ok(found) => found,
        Err(Error::ResampleRequired) => return Ok(record),
        Err(e) => return Err(e),
    };
    record.independent = true;
    record.dual = Some(found.dual.entries.entries().to_vec());
    record.tensor = Some(TensorRecord::from(found.tensor.tensor()));
    let witness = build_witness(&found.tensor, cap)?;
    let (num, den) = witness.density();
    record.witness_size = Some(num);
    record.density = Some(format!("{num}/{den}"));
    record.contains_zero = Some(witness.contains_index(0));
    let verdict = verify_no_kap(&witness, &set, k, cap)?;
    record.ap_free = Some(verdict.ap_free);
    record.counterexample = verdict.counterexample;
    Ok(record)
}

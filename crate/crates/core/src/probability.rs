//! Exact and sampled checks of the probabilistic statements behind the
//! construction: how often Veronese images are independent, the lower bound
//! through a maximally intersecting subspace, the character identity for
//! common zeros of a function space, and the split of the bias expectation
//! over a space of dual vectors.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::character::Character;
use crate::construction::sample_difference_set;
use crate::error::{Error, Result};
use crate::field::{dot, FpVector, PrimeField};
use crate::linalg::{enumerate_subspaces, orthogonal_complement, rank_of_buffer, subspace_count, SubspaceFp};
use crate::par;
use crate::rng::derive_seed;
use crate::tensor::{checked_space, exact_bias, Tensor};
use crate::veronese::{dual_to_symmetric_with, symmetric_to_dual_with, MonomialBasis, VeroneseVector};

/// `num / den` with both parts as exact integers.
pub fn fraction(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn fraction_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Images `φ_d(x)` of every `x ∈ F_p^n`, indexed by packed `x`.
pub fn veronese_images(field: PrimeField, basis: &MonomialBasis, cap: u64) -> Result<Vec<Vec<u32>>> {
    let total = checked_space(field, basis.n() as u64, cap, "vector space")?;
    Ok(par::map_collect(0..total, |i| {
        basis.map_raw(field, FpVector::from_index(field, basis.n(), i).entries())
    }))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndependenceTrialBatch {
    pub p: u32,
    pub n: usize,
    pub d: usize,
    pub s: usize,
    pub trials: u64,
    pub successes: u64,
    pub seed: Option<u64>,
    pub exact: bool,
}

impl IndependenceTrialBatch {
    pub fn estimate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }

    pub fn as_fraction(&self) -> BigRational {
        fraction(self.successes, self.trials)
    }

    /// Wilson score interval at 95%.
    pub fn wilson_interval(&self) -> (f64, f64) {
        wilson_interval(self.successes, self.trials, 1.959_963_984_540_054)
    }
}

pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = z / denom * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

fn images_independent(field: PrimeField, dim: usize, rows: &[&[u32]]) -> bool {
    if rows.len() > dim {
        return false;
    }
    let mut buf: Vec<u32> = rows.iter().flat_map(|r| r.iter().copied()).collect();
    rank_of_buffer(field, rows.len(), dim, &mut buf) == rows.len()
}

/// Exact probability that `s` uniform vectors have independent Veronese images,
/// by enumerating all `(p^n)^s` tuples.
pub fn independence_probability_exact(
    field: PrimeField,
    n: usize,
    d: usize,
    s: usize,
    cap: u64,
) -> Result<IndependenceTrialBatch> {
    if s == 0 {
        return Err(Error::Degenerate("s must be at least 1"));
    }
    let basis = MonomialBasis::new(n, d)?;
    let tuples = checked_space(field, (n * s) as u64, cap, "independence tuples")?;
    let successes = if s > basis.dim() {
        0
    } else {
        let images = veronese_images(field, &basis, cap)?;
        let points = images.len() as u64;
        par::sum_u64(0..tuples, |t| {
            let mut rest = t;
            let rows: Vec<&[u32]> = (0..s)
                .map(|_| {
                    let x = rest % points;
                    rest /= points;
                    images[x as usize].as_slice()
                })
                .collect();
            u64::from(images_independent(field, basis.dim(), &rows))
        })
    };
    Ok(IndependenceTrialBatch {
        p: field.modulus(),
        n,
        d,
        s,
        trials: tuples,
        successes,
        seed: None,
        exact: true,
    })
}

/// Monte Carlo estimate; trial `t` draws its `s` vectors exactly as the
/// end-to-end pipeline does for seed `derive_seed(seed, t)`.
pub fn independence_probability_monte_carlo(
    field: PrimeField,
    n: usize,
    d: usize,
    s: usize,
    trials: u64,
    seed: u64,
) -> Result<IndependenceTrialBatch> {
    if trials == 0 {
        return Err(Error::Degenerate("trials must be at least 1"));
    }
    let basis = MonomialBasis::new(n, d)?;
    sample_difference_set(field, n, s, 0)?;
    let successes = par::sum_u64(0..trials, |t| {
        let set = sample_difference_set(field, n, s, derive_seed(seed, t)).expect("validated");
        let images: Vec<Vec<u32>> = set
            .elements
            .iter()
            .map(|e| basis.map_raw(field, e.vector.entries()))
            .collect();
        let rows: Vec<&[u32]> = images.iter().map(Vec::as_slice).collect();
        u64::from(images_independent(field, basis.dim(), &rows))
    });
    Ok(IndependenceTrialBatch {
        p: field.modulus(),
        n,
        d,
        s,
        trials,
        successes,
        seed: Some(seed),
        exact: false,
    })
}

/// `(1 - max_U P_x[φ_d(x) ∈ U])^s` over `(s-1)`-dimensional subspaces `U`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndependenceLowerBound {
    pub p: u32,
    pub n: usize,
    pub d: usize,
    pub s: usize,
    /// `#{x : φ_d(x) ∈ U}` for the chosen maximizer.
    pub max_hits: u64,
    pub points: u64,
    /// RREF basis of the chosen maximizer (lexicographically least among ties).
    pub subspace: Vec<Vec<u32>>,
    pub subspaces_searched: u64,
    #[serde(with = "rational_string")]
    pub bound: BigRational,
}

pub fn independence_lower_bound(
    field: PrimeField,
    n: usize,
    d: usize,
    s: usize,
    cap: u64,
) -> Result<IndependenceLowerBound> {
    if s == 0 {
        return Err(Error::Degenerate("s must be at least 1"));
    }
    let basis = MonomialBasis::new(n, d)?;
    let images = veronese_images(field, &basis, cap)?;
    let points = images.len() as u64;
    let dim = basis.dim();
    let k = s - 1;
    let candidates = if k >= dim {
        vec![SubspaceFp::full(field, dim)]
    } else {
        let count = subspace_count(field, dim, k);
        let work = count.and_then(|c| c.checked_mul(points));
        if work.is_none_or(|w| w > cap) {
            return Err(Error::RegimeTooLarge(format!(
                "{} subspaces of dimension {k} in F_{}^{dim}",
                count.map_or("too many".into(), |c| c.to_string()),
                field.modulus()
            )));
        }
        enumerate_subspaces(field, dim, k)
    };
    let hits: Vec<u64> = par::map_collect(0..candidates.len() as u64, |i| {
        let u = &candidates[i as usize];
        images.iter().filter(|img| u.contains_residues(img)).count() as u64
    });
    let best = (0..candidates.len())
        .max_by(|&a, &b| {
            hits[a]
                .cmp(&hits[b])
                .then_with(|| candidates[b].basis_key().cmp(&candidates[a].basis_key()))
        })
        .expect("at least one candidate");
    let max_hits = hits[best];
    let miss = fraction(points - max_hits, points);
    let bound = num_traits::pow(miss, s);
    Ok(IndependenceLowerBound {
        p: field.modulus(),
        n,
        d,
        s,
        max_hits,
        points,
        subspace: candidates[best].basis().to_vec(),
        subspaces_searched: candidates.len() as u64,
        bound,
    })
}

/// Both sides of `P_x(V(x) = 0) = E_{v,x} χ(v(x))` for a space `V` of
/// functions on a finite domain, each function given by its value table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacterIdentity {
    #[serde(with = "rational_string")]
    pub lhs: BigRational,
    /// Exact right-hand side when every per-point histogram is either a point
    /// mass at 0 or uniform (the only shapes a linear image can take).
    #[serde(with = "rational_string_opt")]
    pub rhs_exact: Option<BigRational>,
    pub rhs_re: f64,
    pub rhs_im: f64,
    pub holds: bool,
}

pub fn character_identity_check(v: &SubspaceFp, chi: &Character) -> Result<CharacterIdentity> {
    let f = v.field();
    if chi.field() != f {
        return Err(Error::ModulusMismatch {
            left: f.modulus(),
            right: chi.field().modulus(),
        });
    }
    let domain = v.ambient();
    let size = v
        .cardinality()
        .ok_or_else(|| Error::InvalidParameter("function space too large".into()))?;
    let p = f.modulus() as usize;
    let elements: Vec<Vec<u32>> = (0..size).map(|i| v.element(i)).collect();
    let mut zeros = 0u64;
    let mut exact_zero_points = Some(0u64);
    let mut total = vec![0u64; p];
    for x in 0..domain {
        if v.basis().iter().all(|b| b[x] == 0) {
            zeros += 1;
        }
        let mut h = vec![0u64; p];
        for e in &elements {
            h[e[x] as usize] += 1;
        }
        let point_mass = h[0] == size;
        let uniform = h.iter().all(|&c| c * p as u64 == size);
        exact_zero_points = match exact_zero_points {
            Some(z) if point_mass => Some(z + 1),
            Some(z) if uniform => Some(z),
            _ => None,
        };
        total.iter_mut().zip(&h).for_each(|(t, c)| *t += c);
    }
    let lhs = fraction(zeros, domain as u64);
    let rhs_exact = exact_zero_points.map(|z| fraction(z * size, size * domain as u64));
    let rhs = chi.histogram_sum(&total) / (size as f64 * domain as f64);
    let holds = rhs_exact.as_ref() == Some(&lhs)
        && (rhs.re - fraction_to_f64(&lhs)).abs() < 1e-12
        && rhs.im.abs() < 1e-12;
    Ok(CharacterIdentity {
        lhs,
        rhs_exact,
        rhs_re: rhs.re,
        rhs_im: rhs.im,
        holds,
    })
}

/// The space of functions on F_p^m given by a subspace of linear forms,
/// as value tables over packed `x`.
pub fn linear_forms_as_functions(forms: &SubspaceFp, cap: u64) -> Result<SubspaceFp> {
    let f = forms.field();
    let m = forms.ambient();
    let domain = checked_space(f, m as u64, cap, "function domain")?;
    let tables: Vec<FpVector> = forms
        .basis()
        .iter()
        .map(|form| {
            let values = (0..domain)
                .map(|i| dot(f, form, FpVector::from_index(f, m, i).entries()))
                .collect();
            FpVector::from_residues(f, values).expect("reduced")
        })
        .collect();
    if tables.is_empty() {
        return Ok(SubspaceFp::zero(f, domain as usize));
    }
    SubspaceFp::span(f, domain as usize, &tables)
}

/// Three independent evaluations of `P_x[φ_d(x) ∈ U]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipChain {
    #[serde(with = "rational_string")]
    pub direct: BigRational,
    #[serde(with = "rational_string")]
    pub via_dual: BigRational,
    pub character_re: f64,
    pub character_im: f64,
}

impl MembershipChain {
    pub fn consistent(&self) -> bool {
        self.direct == self.via_dual
            && (self.character_re - fraction_to_f64(&self.direct)).abs() < 1e-12
            && self.character_im.abs() < 1e-12
    }
}

pub fn membership_chain(u: &SubspaceFp, basis: &MonomialBasis, chi: &Character, cap: u64) -> Result<MembershipChain> {
    let f = u.field();
    if u.ambient() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            got: u.ambient(),
        });
    }
    let images = veronese_images(f, basis, cap)?;
    let points = images.len() as u64;
    let perp = orthogonal_complement(u);
    let size = perp
        .cardinality()
        .ok_or_else(|| Error::InvalidParameter("U⊥ too large".into()))?;
    let direct = images.iter().filter(|img| u.contains_residues(img)).count() as u64;
    let via_dual = images
        .iter()
        .filter(|img| perp.basis().iter().all(|v| dot(f, v, img) == 0))
        .count() as u64;
    let duals: Vec<Vec<u32>> = (0..size).map(|i| perp.element(i)).collect();
    let mut hist = vec![0u64; f.modulus() as usize];
    for img in &images {
        for v in &duals {
            hist[dot(f, v, img) as usize] += 1;
        }
    }
    let avg = chi.histogram_sum(&hist) / (points as f64 * size as f64);
    Ok(MembershipChain {
        direct: fraction(direct, points),
        via_dual: fraction(via_dual, points),
        character_re: avg.re,
        character_im: avg.im,
    })
}

/// `E_{T ∈ U⊥} p^{-arank(T)/2^{d-1}}` split at the analytic-rank threshold `r0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasSplit {
    pub tensors: u64,
    pub dim_uperp: usize,
    pub expectation: f64,
    /// Contribution of tensors with `arank ≤ r0`.
    pub term_low: f64,
    /// Contribution of tensors with `arank > r0`.
    pub term_high: f64,
    /// `2·n^{d-1}·r - dim U⊥`.
    pub e1: f64,
    /// `-r0 / 2^{d-1}`.
    pub e2: f64,
    pub bound_holds: bool,
}

/// Enumerates the symmetric tensors `T` with `v_T ∈ U⊥`.
///
/// When `p > d` these are in bijection with `U⊥`. Otherwise the dual map has
/// a kernel and every symmetric tensor is scanned.
pub fn bias_split_expectation(
    uperp: &SubspaceFp,
    basis: &MonomialBasis,
    r0: f64,
    prank_budget: f64,
    cap: u64,
) -> Result<BiasSplit> {
    let f = uperp.field();
    let (n, d) = (basis.n(), basis.degree());
    if uperp.ambient() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            got: uperp.ambient(),
        });
    }
    let weight = 1.0 / (1u64 << (d - 1)) as f64;
    let characteristic_ok = f.modulus() as usize > d;
    let scan = if characteristic_ok {
        checked_space(f, uperp.dim() as u64, cap, "U⊥ enumeration")?
    } else {
        checked_space(f, basis.dim() as u64, cap, "symmetric tensor enumeration")?
    };
    checked_space(f, (n * (d - 1)) as u64, cap, "multilinear bias")?;
    let terms: Vec<Option<(f64, f64)>> = par::map_collect(0..scan, |i| {
        let tensor: Tensor = if characteristic_ok {
            let v = VeroneseVector {
                entries: FpVector::from_residues(f, uperp.element(i)).expect("reduced"),
                degree: d,
                ambient: n,
            };
            dual_to_symmetric_with(basis, &v).expect("p > d").into_tensor()
        } else {
            let t = symmetric_from_monomial_coeffs(f, basis, &FpVector::from_index(f, basis.dim(), i));
            if !uperp.contains_residues(symmetric_to_dual_with(basis, &t).entries.entries()) {
                return None;
            }
            t
        };
        let bias = exact_bias(&tensor, cap).expect("cap checked");
        Some((bias.analytic_rank(), bias.to_f64().powf(weight)))
    });
    let kept: Vec<(f64, f64)> = terms.into_iter().flatten().collect();
    let count = kept.len() as f64;
    let term_low: f64 = kept.iter().filter(|(a, _)| *a <= r0 + 1e-9).map(|(_, w)| w).sum::<f64>() / count;
    let term_high: f64 = kept.iter().filter(|(a, _)| *a > r0 + 1e-9).map(|(_, w)| w).sum::<f64>() / count;
    let expectation = kept.iter().map(|(_, w)| w).sum::<f64>() / count;
    let p = f.modulus() as f64;
    let e1 = 2.0 * (n as f64).powi(d as i32 - 1) * prank_budget - uperp.dim() as f64;
    let e2 = -r0 * weight;
    let bound_holds = expectation <= p.powf(e1) + p.powf(e2) + 1e-12;
    Ok(BiasSplit {
        tensors: kept.len() as u64,
        dim_uperp: uperp.dim(),
        expectation,
        term_low,
        term_high,
        e1,
        e2,
        bound_holds,
    })
}

/// The symmetric tensor carrying coefficient `c_e` on every index tuple of content `e`.
pub fn symmetric_from_monomial_coeffs(field: PrimeField, basis: &MonomialBasis, c: &FpVector) -> Tensor {
    let (n, d) = (basis.n(), basis.degree());
    let mut idx = vec![0usize; d];
    let mut e = vec![0u32; n];
    let coeffs = (0..n.pow(d as u32))
        .map(|pos| {
            crate::tensor::decode_index(pos, n, &mut idx);
            e.iter_mut().for_each(|x| *x = 0);
            for &i in &idx {
                e[i] += 1;
            }
            c.entries()[basis.position(&e).expect("content is a monomial")]
        })
        .collect();
    Tensor::from_residues(field, d, n, coeffs).expect("shape")
}

/// `a/b` string form used by reports.
pub mod rational_string {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{}/{}", q.numer(), q.denom()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub mod rational_string_opt {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
        match q {
            Some(q) => s.serialize_some(&format!("{}/{}", q.numer(), q.denom())),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigRational>, D::Error> {
        let s = Option::<String>::deserialize(d)?;
        s.map(|s| s.parse().map_err(serde::de::Error::custom)).transpose()
    }
}

/// `1` as a rational, for callers comparing against exact probabilities.
pub fn one() -> BigRational {
    BigRational::one()
}

pub fn zero() -> BigRational {
    BigRational::zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::all_vectors;
    use crate::linalg::FpMatrix;
    use crate::tensor::DEFAULT_CAP;

    fn fp(p: u32) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    #[test]
    fn exact_independence_examples() {
        let f = fp(2);
        let b = independence_probability_exact(f, 2, 2, 1, DEFAULT_CAP).unwrap();
        assert_eq!(b.as_fraction(), fraction(3, 4));
        let b = independence_probability_exact(f, 2, 2, 4, DEFAULT_CAP).unwrap();
        assert_eq!(b.successes, 0);
        assert!(independence_probability_exact(f, 2, 2, 0, DEFAULT_CAP).is_err());
        assert!(independence_probability_exact(fp(7), 4, 2, 5, 1000).is_err());
    }

    #[test]
    fn exact_independence_pairs_over_f2() {
        // oracle: over F_2, φ_2(x) = (x1, x1x2, x2); a pair is independent iff
        // both images are nonzero and distinct, i.e. x, y nonzero and x ≠ y.
        let f = fp(2);
        let b = independence_probability_exact(f, 2, 2, 2, DEFAULT_CAP).unwrap();
        assert_eq!(b.as_fraction(), fraction(6, 16));
    }

    #[test]
    fn monte_carlo_matches_exact() {
        let f = fp(2);
        for s in 1..=3 {
            let exact = independence_probability_exact(f, 2, 2, s, DEFAULT_CAP).unwrap();
            let mc = independence_probability_monte_carlo(f, 2, 2, s, 20_000, 5).unwrap();
            let p = exact.estimate();
            let sigma = (p * (1.0 - p) / mc.trials as f64).sqrt();
            assert!((mc.estimate() - p).abs() <= 3.0 * sigma.max(1e-12));
            let (lo, hi) = mc.wilson_interval();
            assert!(lo <= mc.estimate() && mc.estimate() <= hi);
        }
    }

    #[test]
    fn lower_bound_examples() {
        let f = fp(2);
        let one = independence_lower_bound(f, 2, 2, 1, DEFAULT_CAP).unwrap();
        assert_eq!(one.bound, fraction(3, 4));
        assert_eq!(one.max_hits, 1);
        let two = independence_lower_bound(f, 2, 2, 2, DEFAULT_CAP).unwrap();
        assert_eq!(two.subspaces_searched, 7);
        // best line through φ(F_2^2) = {0, (1,0,0), (1,1,1), (0,0,1)} hits 2 points
        assert_eq!(two.max_hits, 2);
        assert_eq!(two.bound, fraction(1, 4));
        let exact = independence_probability_exact(f, 2, 2, 2, DEFAULT_CAP).unwrap();
        assert!(two.bound <= exact.as_fraction());
        let many = independence_lower_bound(f, 2, 2, 5, DEFAULT_CAP).unwrap();
        assert_eq!(many.bound, zero());
        assert!(matches!(
            independence_lower_bound(fp(5), 3, 2, 4, 10_000),
            Err(Error::RegimeTooLarge(_))
        ));
    }

    #[test]
    fn lower_bound_never_exceeds_exact() {
        for (p, n, d) in [(2u32, 2usize, 2usize), (3, 2, 2), (2, 3, 2), (3, 1, 2)] {
            let f = fp(p);
            for s in 1..=3 {
                let exact = independence_probability_exact(f, n, d, s, DEFAULT_CAP).unwrap();
                let bound = independence_lower_bound(f, n, d, s, DEFAULT_CAP).unwrap();
                assert!(bound.bound <= exact.as_fraction(), "p={p} n={n} d={d} s={s}");
            }
        }
    }

    #[test]
    fn character_identity_examples() {
        let f2 = fp(2);
        let chi = Character::standard(f2);
        let zero = SubspaceFp::zero(f2, 4);
        let r = character_identity_check(&zero, &chi).unwrap();
        assert_eq!(r.lhs, one());
        assert!(r.holds);

        let x1 = SubspaceFp::span(f2, 2, &[FpVector::from_raw(f2, &[1, 0])]).unwrap();
        let v = linear_forms_as_functions(&x1, DEFAULT_CAP).unwrap();
        let r = character_identity_check(&v, &chi).unwrap();
        assert_eq!(r.lhs, fraction(1, 2));
        assert_eq!(r.rhs_exact, Some(fraction(1, 2)));
        assert!(r.holds);

        let f3 = fp(3);
        let forms = SubspaceFp::span(
            f3,
            3,
            &[FpVector::from_raw(f3, &[1, 2, 0]), FpVector::from_raw(f3, &[0, 1, 1])],
        )
        .unwrap();
        let v = linear_forms_as_functions(&forms, DEFAULT_CAP).unwrap();
        let r = character_identity_check(&v, &Character::standard(f3)).unwrap();
        assert_eq!(r.lhs, fraction(1, 9));
        assert!(r.holds);
    }

    #[test]
    fn character_identity_for_nonlinear_functions() {
        // V spanned by x ↦ x² on F_3: value table (0, 1, 1); zero only at x = 0.
        let f = fp(3);
        let v = SubspaceFp::span(f, 3, &[FpVector::from_raw(f, &[0, 1, 1])]).unwrap();
        let r = character_identity_check(&v, &Character::standard(f)).unwrap();
        assert_eq!(r.lhs, fraction(1, 3));
        assert!(r.holds);
    }

    #[test]
    fn membership_chain_agrees() {
        let f = fp(3);
        let basis = MonomialBasis::new(2, 2).unwrap();
        let chi = Character::standard(f);
        for k in 0..=3 {
            for u in enumerate_subspaces(f, 3, k).into_iter().step_by(3) {
                let chain = membership_chain(&u, &basis, &chi, DEFAULT_CAP).unwrap();
                assert!(chain.consistent(), "{chain:?}");
            }
        }
    }

    #[test]
    fn bias_split_examples() {
        let f = fp(2);
        let basis = MonomialBasis::new(2, 2).unwrap();
        let zero = SubspaceFp::zero(f, 3);
        let r = bias_split_expectation(&zero, &basis, 5.0, 5.0, DEFAULT_CAP).unwrap();
        // only the zero tensor (and its kernel-mates) survive; over F_2 the
        // alternating form [[0,1],[1,0]] also maps to v_T = 0
        assert_eq!(r.tensors, 2);

        let full = SubspaceFp::full(f, 3);
        let r = bias_split_expectation(&full, &basis, 1.0, 5.0, DEFAULT_CAP).unwrap();
        assert_eq!(r.tensors, 8);
        // oracle: symmetric [[a,b],[b,c]] over F_2, weight p^{-rank/2}
        let mut expected = 0.0;
        for i in 0..8u64 {
            let c = FpVector::from_index(f, 3, i);
            let (a, b, cc) = (c.entries()[0], c.entries()[1], c.entries()[2]);
            let m = FpMatrix::from_rows(f, &[vec![a as u64, b as u64], vec![b as u64, cc as u64]]).unwrap();
            expected += 2f64.powf(-(crate::linalg::rank(&m) as f64) / 2.0);
        }
        expected /= 8.0;
        assert!((r.expectation - expected).abs() < 1e-12);
        assert!(r.term_low + r.term_high >= r.expectation - 1e-12);
        assert!(r.bound_holds);
    }

    #[test]
    fn bias_split_over_odd_characteristic() {
        let f = fp(3);
        let basis = MonomialBasis::new(2, 2).unwrap();
        let zero = bias_split_expectation(&SubspaceFp::zero(f, 3), &basis, 2.0, 2.0, DEFAULT_CAP).unwrap();
        assert_eq!(zero.tensors, 1);
        assert_eq!(zero.expectation, 1.0);
        for u in enumerate_subspaces(f, 3, 2) {
            let r = bias_split_expectation(&u, &basis, 1.0, 2.0, DEFAULT_CAP).unwrap();
            assert_eq!(r.tensors, 9);
            assert!((r.term_low + r.term_high - r.expectation).abs() < 1e-12);
        }
    }

    #[test]
    fn veronese_images_cover_the_space() {
        let f = fp(3);
        let basis = MonomialBasis::new(2, 2).unwrap();
        let images = veronese_images(f, &basis, DEFAULT_CAP).unwrap();
        for (x, img) in all_vectors(f, 2).zip(&images) {
            assert_eq!(img, &basis.map_raw(f, x.entries()));
        }
    }
}

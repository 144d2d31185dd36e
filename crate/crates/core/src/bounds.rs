//! Threshold sizes and the exponents of the two-term bias bound, all kept in
//! log_p space with exact binomials.

use num_bigint::BigUint;
use num_traits::{FromPrimitive, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::is_prime;
use crate::veronese::binomial;

/// Relative slack used when snapping a real subtraction term to an integer.
pub const INTEGER_SNAP: f64 = 1e-9;

/// Choice of the slowly vanishing exponent `ε(n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum EpsilonModel {
    /// `log(log(1+x)+1)/log x` for `x > e`, and `1` below.
    #[default]
    Default,
    Zero,
    Constant(f64),
}

impl EpsilonModel {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            EpsilonModel::Default if x > std::f64::consts::E => ((1.0 + x).ln() + 1.0).ln() / x.ln(),
            EpsilonModel::Default => 1.0,
            EpsilonModel::Zero => 0.0,
            EpsilonModel::Constant(c) => c,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "default" => Ok(EpsilonModel::Default),
            "zero" | "0" => Ok(EpsilonModel::Zero),
            other => other
                .parse::<f64>()
                .map(EpsilonModel::Constant)
                .map_err(|_| Error::Parse(format!("epsilon model `{other}`"))),
        }
    }
}

/// `log_p n`, exact when `n` is a power of `p`.
pub fn log_p(p: u32, n: u64) -> f64 {
    if n == 0 {
        return f64::NEG_INFINITY;
    }
    let (mut m, mut j) = (n, 0u32);
    while m % p as u64 == 0 {
        m /= p as u64;
        j += 1;
    }
    if m == 1 {
        return j as f64;
    }
    (n as f64).ln() / (p as f64).ln()
}

/// `(d·2^{d-1}+1)·log_p n`.
pub fn r0_value(p: u32, n: u64, d: usize) -> f64 {
    let c = (d as f64) * 2f64.powi(d as i32 - 1) + 1.0;
    c * log_p(p, n)
}

fn check_prime(p: u32) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::NotPrime(p))
    }
}

/// `β·(log_p n)^{1+ε(n)}·n^{k-2}`.
pub fn subtraction_term(p: u32, n: u64, k: usize, beta: f64, eps: EpsilonModel) -> f64 {
    let l = log_p(p, n);
    beta * l.powf(1.0 + eps.eval(n as f64)) * (n as f64).powi(k as i32 - 2)
}

fn ceil_to_big(t: f64) -> Result<BigUint> {
    let nearest = t.round();
    let snapped = if (t - nearest).abs() <= INTEGER_SNAP * nearest.abs().max(1.0) {
        nearest
    } else {
        t.ceil()
    };
    BigUint::from_f64(snapped.max(0.0)).ok_or_else(|| Error::InvalidParameter(format!("subtraction term {t}")))
}

/// `max(0, floor(binom(n+k-2, k-1) - β·(log_p n)^{1+ε(n)}·n^{k-2}))`.
pub fn threshold_s(p: u32, n: u64, k: usize, beta: f64, eps: EpsilonModel) -> Result<BigUint> {
    check_prime(p)?;
    if n < 2 || k < 3 || (p as usize) < k {
        return Err(Error::InvalidParameter(format!(
            "threshold needs n ≥ 2 and p ≥ k ≥ 3 (p={p}, n={n}, k={k})"
        )));
    }
    if !beta.is_finite() || beta < 0.0 {
        return Err(Error::InvalidParameter(format!("beta = {beta}")));
    }
    let full = binomial(n + k as u64 - 2, k as u64 - 1);
    let cut = ceil_to_big(subtraction_term(p, n, k, beta, eps))?;
    Ok(if cut >= full { BigUint::zero() } else { full - cut })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub p: u32,
    pub n: u64,
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: EpsilonModel,
    pub r0: f64,
    /// `α·r0^{1+ε(n)}`.
    pub r: f64,
    #[serde(with = "big_string")]
    pub s_max: BigUint,
}

impl BoundParams {
    pub fn new(p: u32, n: u64, k: usize, alpha: f64, beta: f64, epsilon: EpsilonModel) -> Result<Self> {
        if alpha.is_nan() || alpha < 1.0 || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("alpha must be ≥ 1, got {alpha}")));
        }
        let s_max = threshold_s(p, n, k, beta, epsilon)?;
        let d = k - 1;
        let r0 = r0_value(p, n, d);
        let r = alpha * r0.powf(1.0 + epsilon.eval(n as f64));
        Ok(BoundParams {
            p,
            n,
            k,
            alpha,
            beta,
            epsilon,
            r0,
            r,
            s_max,
        })
    }

    pub fn d(&self) -> usize {
        self.k - 1
    }

    /// `binom(n+d-1, d) - (s - 1)`, the dimension of `U⊥` for `dim U = s - 1`.
    /// When the threshold clamps to 0 the formal value `⌈β·…⌉ + 1` is returned.
    pub fn dim_uperp(&self) -> BigUint {
        let full = binomial(self.n + self.d() as u64 - 1, self.d() as u64);
        if self.s_max.is_zero() {
            let cut = ceil_to_big(subtraction_term(self.p, self.n, self.k, self.beta, self.epsilon))
                .unwrap_or_default();
            cut + 1u32
        } else {
            full + 1u32 - &self.s_max
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermExponents {
    /// `2·n^{d-1}·r - dim U⊥`.
    pub e1: f64,
    /// `-r0 / 2^{d-1}`.
    pub e2: f64,
    /// `-n^{d-1}·(log_p n)^{1+ε(n)}`.
    pub e1_target: f64,
    /// `-d·log_p n`.
    pub e2_target: f64,
    pub e1_ok: bool,
    pub e2_ok: bool,
    /// `dim U⊥ = 0`, so the first term is at least 1.
    pub useless: bool,
}

pub fn term_exponents(p: u32, n: u64, d: usize, params: &BoundParams, dim_uperp: &BigUint) -> TermExponents {
    let nd1 = (n as f64).powi(d as i32 - 1);
    let dim = dim_uperp.to_f64().unwrap_or(f64::INFINITY);
    let e1 = 2.0 * nd1 * params.r - dim;
    let e2 = -params.r0 / 2f64.powi(d as i32 - 1);
    let l = log_p(p, n);
    let e1_target = -nd1 * l.powf(1.0 + params.epsilon.eval(n as f64));
    let e2_target = -(d as f64) * l;
    TermExponents {
        e1,
        e2,
        e1_target,
        e2_target,
        e1_ok: e1 <= e1_target,
        e2_ok: e2 < e2_target,
        useless: dim_uperp.is_zero(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaGrid {
    pub step: f64,
    pub max: f64,
}

impl Default for BetaGrid {
    fn default() -> Self {
        BetaGrid { step: 0.01, max: 10_000.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaCalibration {
    pub beta: f64,
    pub resolution: f64,
    pub n_min: u64,
    pub n_max: u64,
    /// Values of `n` at which the calibrated threshold clamps to 0.
    pub vacuous_n: Vec<u64>,
}

fn beta_suffices(p: u32, ns: &[u64], d: usize, alpha: f64, beta: f64, eps: EpsilonModel) -> Result<bool> {
    for &n in ns {
        let params = BoundParams::new(p, n, d + 1, alpha, beta, eps)?;
        if !term_exponents(p, n, d, &params, &params.dim_uperp()).e1_ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Smallest `β` on the grid `{0, step, 2·step, …, max}` making the first
/// exponent at most `-n^{d-1}(log_p n)^{1+ε(n)}` for every `n` in range.
pub fn calibrate_beta(
    p: u32,
    n_range: std::ops::RangeInclusive<u64>,
    d: usize,
    alpha: f64,
    eps: EpsilonModel,
    grid: BetaGrid,
) -> Result<BetaCalibration> {
    let ns: Vec<u64> = n_range.clone().collect();
    if ns.is_empty() {
        return Err(Error::InvalidParameter("empty n range".into()));
    }
    if grid.step.is_nan() || grid.step <= 0.0 || grid.max.is_nan() || grid.max < 0.0 {
        return Err(Error::InvalidParameter(format!("beta grid {grid:?}")));
    }
    let steps = (grid.max / grid.step).floor() as u64;
    let at = |i: u64| i as f64 * grid.step;
    if !beta_suffices(p, &ns, d, alpha, at(steps), eps)? {
        let worst = ns
            .iter()
            .map(|&n| {
                let params = BoundParams::new(p, n, d + 1, alpha, at(steps), eps).expect("validated");
                let e = term_exponents(p, n, d, &params, &params.dim_uperp());
                (n, e.e1 - e.e1_target)
            })
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty");
        return Err(Error::NoBetaOnGrid(format!(
            "beta = {} still fails; worst n = {} misses by {:.3}",
            at(steps),
            worst.0,
            worst.1
        )));
    }
    let (mut lo, mut hi) = (0u64, steps);
    if beta_suffices(p, &ns, d, alpha, 0.0, eps)? {
        hi = 0;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if beta_suffices(p, &ns, d, alpha, at(mid), eps)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let beta = at(hi);
    let vacuous_n = ns
        .iter()
        .copied()
        .filter(|&n| threshold_s(p, n, d + 1, beta, eps).is_ok_and(|s| s.is_zero()))
        .collect();
    Ok(BetaCalibration {
        beta,
        resolution: grid.step,
        n_min: *n_range.start(),
        n_max: *n_range.end(),
        vacuous_n,
    })
}

/// One line of the `bounds` table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsRow {
    pub n: u64,
    #[serde(with = "big_string")]
    pub s_max: BigUint,
    pub r0: f64,
    pub r: f64,
    #[serde(with = "big_string")]
    pub dim_uperp: BigUint,
    pub e1: f64,
    pub e2: f64,
    pub e1_ok: bool,
    pub e2_ok: bool,
    pub useless: bool,
}

pub fn bounds_row(p: u32, n: u64, k: usize, alpha: f64, beta: f64, eps: EpsilonModel) -> Result<BoundsRow> {
    let params = BoundParams::new(p, n, k, alpha, beta, eps)?;
    let dim = params.dim_uperp();
    let t = term_exponents(p, n, k - 1, &params, &dim);
    Ok(BoundsRow {
        n,
        s_max: params.s_max.clone(),
        r0: params.r0,
        r: params.r,
        dim_uperp: dim,
        e1: t.e1,
        e2: t.e2,
        e1_ok: t.e1_ok,
        e2_ok: t.e2_ok,
        useless: t.useless,
    })
}

pub mod big_string {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use proptest::prelude::*;

    #[test]
    fn threshold_examples() {
        assert_eq!(threshold_s(3, 9, 3, 0.0, EpsilonModel::Zero).unwrap(), BigUint::from(45u32));
        assert_eq!(threshold_s(3, 9, 3, 1.0, EpsilonModel::Zero).unwrap(), BigUint::from(27u32));
        assert_eq!(threshold_s(3, 9, 3, 1e9, EpsilonModel::Zero).unwrap(), BigUint::zero());
        assert!(threshold_s(2, 9, 3, 1.0, EpsilonModel::Zero).is_err());
        assert!(threshold_s(3, 1, 3, 1.0, EpsilonModel::Zero).is_err());
        assert!(threshold_s(4, 9, 3, 1.0, EpsilonModel::Zero).is_err());
    }

    #[test]
    fn threshold_uses_big_binomials() {
        let s = threshold_s(5, 1_000_000, 5, 0.0, EpsilonModel::Default).unwrap();
        assert_eq!(s, binomial(1_000_003, 4));
        assert!(s > BigUint::from(u64::MAX));
    }

    #[test]
    fn r0_examples() {
        assert_eq!(r0_value(3, 9, 2), 10.0);
        assert_eq!(r0_value(2, 2, 3), 13.0);
        assert_eq!(r0_value(5, 1, 3), 0.0);
    }

    #[test]
    fn epsilon_default_matches_the_rank_bound_shape() {
        for x in [3.0f64, 10.0, 1e3, 1e6] {
            let lhs = x.powf(1.0 + EpsilonModel::Default.eval(x));
            let rhs = x * ((1.0 + x).ln() + 1.0);
            assert!((lhs - rhs).abs() <= 1e-9 * rhs);
        }
        assert_eq!(EpsilonModel::Default.eval(2.0), 1.0);
        assert!(EpsilonModel::Default.eval(1e12) < EpsilonModel::Default.eval(1e3));
        assert_eq!(EpsilonModel::parse("zero").unwrap(), EpsilonModel::Zero);
        assert_eq!(EpsilonModel::parse("0.25").unwrap(), EpsilonModel::Constant(0.25));
        assert!(EpsilonModel::parse("x").is_err());
    }

    #[test]
    fn e2_exact_at_prime_powers() {
        for d in 2..=4usize {
            for p in [2u32, 3, 5, 7] {
                let mut n = p as u64;
                let mut j = 1i64;
                while n <= 1_000_000 {
                    let params = BoundParams {
                        p,
                        n,
                        k: d + 1,
                        alpha: 1.0,
                        beta: 0.0,
                        epsilon: EpsilonModel::Zero,
                        r0: r0_value(p, n, d),
                        r: r0_value(p, n, d),
                        s_max: BigUint::zero(),
                    };
                    let t = term_exponents(p, n, d, &params, &BigUint::from(1u32));
                    let c = d as i64 * (1i64 << (d - 1)) + 1;
                    let exact = BigRational::new((-c * j).into(), (1i64 << (d - 1)).into());
                    let approx = BigRational::from_float(t.e2).unwrap();
                    let rel = ((approx - &exact) / &exact).to_f64().unwrap().abs();
                    assert!(rel <= 1e-9, "d={d} p={p} n={n}");
                    n *= p as u64;
                    j += 1;
                }
            }
        }
    }

    #[test]
    fn useless_when_uperp_is_zero() {
        let params = BoundParams::new(3, 9, 3, 1.0, 1.0, EpsilonModel::Zero).unwrap();
        let t = term_exponents(3, 9, 2, &params, &BigUint::zero());
        assert!(t.useless);
        assert_eq!(t.e1, 2.0 * 9.0 * params.r);
        assert!(t.e1 >= 0.0);
    }

    #[test]
    fn calibration_examples() {
        let grid = BetaGrid::default();
        let c = calibrate_beta(3, 4..=64, 2, 1.0, EpsilonModel::Default, grid).unwrap();
        assert!(c.beta.is_finite() && c.beta > 0.0);
        for n in 4..=64 {
            let params = BoundParams::new(3, n, 3, 1.0, c.beta, EpsilonModel::Default).unwrap();
            assert!(term_exponents(3, n, 2, &params, &params.dim_uperp()).e1_ok);
        }
        let lower = c.beta - grid.step;
        assert!(!(4..=64).all(|n| {
            let params = BoundParams::new(3, n, 3, 1.0, lower, EpsilonModel::Default).unwrap();
            term_exponents(3, n, 2, &params, &params.dim_uperp()).e1_ok
        }));
        let doubled = calibrate_beta(3, 4..=64, 2, 2.0, EpsilonModel::Default, grid).unwrap();
        assert!(doubled.beta >= c.beta);
        #[allow(clippy::reversed_empty_ranges)]
        let empty = calibrate_beta(3, 10..=4, 2, 1.0, EpsilonModel::Default, grid);
        assert!(empty.is_err());
        let tiny = calibrate_beta(3, 4..=64, 2, 1.0, EpsilonModel::Default, BetaGrid { step: 0.5, max: 1.0 });
        assert!(matches!(tiny, Err(Error::NoBetaOnGrid(_))));
    }

    #[test]
    fn bounds_row_example() {
        let row = bounds_row(3, 9, 3, 1.0, 1.0, EpsilonModel::Zero).unwrap();
        assert_eq!(row.s_max, BigUint::from(27u32));
        assert_eq!(row.r0, 10.0);
        assert_eq!(row.dim_uperp, BigUint::from(19u32));
        assert_eq!(row.e1, 2.0 * 9.0 * 10.0 - 19.0);
        assert_eq!(row.e2, -5.0);
        assert!(row.e2_ok);
        let json = serde_json::to_string(&row).unwrap();
        assert!(json.contains("\"s_max\":\"27\""));
    }

    #[test]
    fn e2_witness_on_grid() {
        for d in 1..=4usize {
            for p in [2u32, 3, 5, 7] {
                for n in (2..=1_000_000u64).step_by(997).chain([2, 1_000_000]) {
                    let r0 = r0_value(p, n, d);
                    let e2 = -r0 / 2f64.powi(d as i32 - 1);
                    assert!(e2 < -(d as f64) * log_p(p, n), "d={d} p={p} n={n}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn threshold_monotone_in_beta(n in 2u64..5000, b1 in 0.0f64..50.0, db in 0.0f64..50.0, k in 3usize..6) {
            let p = 7;
            let s1 = threshold_s(p, n, k, b1, EpsilonModel::Default).unwrap();
            let s2 = threshold_s(p, n, k, b1 + db, EpsilonModel::Default).unwrap();
            prop_assert!(s2 <= s1);
            prop_assert!(s1 <= binomial(n + k as u64 - 2, k as u64 - 1));
        }

        #[test]
        fn threshold_is_the_floor(n in 2u64..2000, beta in 0.0f64..20.0) {
            let s = threshold_s(5, n, 3, beta, EpsilonModel::Default).unwrap();
            let full = binomial(n + 1, 2).to_f64().unwrap();
            let t = subtraction_term(5, n, 3, beta, EpsilonModel::Default);
            let expected = (full - t).floor().max(0.0);
            prop_assert!((s.to_f64().unwrap() - expected).abs() <= 1.0);
            prop_assert!(s.to_f64().unwrap() <= (full - t).max(0.0) + 1e-6);
        }
    }
}

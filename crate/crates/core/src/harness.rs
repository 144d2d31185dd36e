//! Experiment configuration, subcommand dispatch and report rendering shared
//! by the command-line front end and the acceptance suite.

use std::time::Instant;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::bounds::{bounds_row, calibrate_beta, r0_value, BetaGrid, EpsilonModel};
use crate::character::Character;
use crate::construction::{finite_difference_check, run_pipeline};
use crate::error::{Error, Result};
use crate::field::{all_vectors, FpVector, PrimeField};
use crate::linalg::{enumerate_subspaces, rank, FpMatrix};
use crate::par;
use crate::prank::{measure_alpha, PrankTable, PRANK_SPACE_CAP};
use crate::probability::{
    bias_split_expectation, character_identity_check, independence_lower_bound,
    independence_probability_exact, independence_probability_monte_carlo, linear_forms_as_functions,
    membership_chain,
};
use crate::rng::{derive_seed, SampleStream};
use crate::tensor::{checked_space, diagonal_bias, exact_bias, SymmetricTensor, Tensor, DEFAULT_CAP};
use crate::veronese::{MonomialBasis, MONOMIAL_ORDER_TAG};

pub const CSV_SCHEMA: &str = "kapfree-csv-v1";
pub const TOOL: &str = "kapfree";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Endtoend,
    RankAudit,
    Independence,
    Bounds,
    VerifyLemmas,
    Monomials,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Endtoend,
        Command::RankAudit,
        Command::Independence,
        Command::Bounds,
        Command::VerifyLemmas,
        Command::Monomials,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Endtoend => "endtoend",
            Command::RankAudit => "rank-audit",
            Command::Independence => "independence",
            Command::Bounds => "bounds",
            Command::VerifyLemmas => "verify-lemmas",
            Command::Monomials => "monomials",
        }
    }

    /// Fixed CSV header for the command's records.
    pub fn columns(self) -> &'static [&'static str] {
        match self {
            Command::Endtoend => &[
                "trial",
                "seed",
                "independent",
                "witness_size",
                "density",
                "contains_zero",
                "ap_free",
                "differences",
                "dual",
                "error",
            ],
            Command::RankAudit => &[
                "tensor_id",
                "prank",
                "arank",
                "bias_numerator",
                "bias_denominator_exponent",
                "arank_le_prank",
                "certificate_ok",
                "matrix_rank",
            ],
            Command::Independence => &[
                "p",
                "n",
                "d",
                "s",
                "mode",
                "successes",
                "trials",
                "probability",
                "estimate",
                "wilson_low",
                "wilson_high",
                "lower_bound",
                "lower_bound_value",
                "max_hits",
                "points",
            ],
            Command::Bounds => &[
                "n", "s_max", "r0", "r", "dim_uperp", "e1", "e2", "e1_ok", "e2_ok", "useless",
            ],
            Command::VerifyLemmas => &["check", "params", "instances", "holds", "detail"],
            Command::Monomials => &["position", "exponents", "monomial", "multinomial"],
        }
    }
}

impl std::fmt::Display for Command {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub p: u32,
    pub n: usize,
    pub k: usize,
    /// Tensor order; `k - 1` unless overridden.
    pub d: Option<usize>,
    pub s: Option<usize>,
    pub trials: u64,
    pub seed: u64,
    pub cap_enum: u64,
    pub alpha: f64,
    pub beta: Option<f64>,
    pub epsilon: EpsilonModel,
    /// Last `n` of the bounds table.
    pub n_max: Option<usize>,
    pub exact: bool,
    pub format: OutputFormat,
    #[serde(skip)]
    pub workers: usize,
}

impl ExperimentConfig {
    pub fn new(command: Command) -> Self {
        ExperimentConfig {
            command,
            p: 5,
            n: 3,
            k: 3,
            d: None,
            s: None,
            trials: 100,
            seed: 42,
            cap_enum: DEFAULT_CAP,
            alpha: 1.0,
            beta: None,
            epsilon: EpsilonModel::Default,
            n_max: None,
            exact: false,
            format: OutputFormat::Json,
            workers: 0,
        }
    }

    pub fn degree(&self) -> usize {
        self.d.unwrap_or(self.k.saturating_sub(1))
    }

    pub fn field(&self) -> Result<PrimeField> {
        PrimeField::new(self.p)
    }

    fn validate(&self) -> Result<()> {
        self.field()?;
        if self.k < 3 {
            return Err(config_error(format!("k = {} must be at least 3", self.k)));
        }
        if self.cap_enum == 0 {
            return Err(config_error("cap-enum must be positive".into()));
        }
        if self.degree() == 0 {
            return Err(config_error("d must be at least 1".into()));
        }
        if self.alpha.is_nan() || self.alpha < 1.0 {
            return Err(config_error(format!("alpha = {} must be at least 1", self.alpha)));
        }
        Ok(())
    }

    /// Hex SHA-256 over the canonical JSON of the configuration, prefixed git-style.
    pub fn input_hash(&self) -> String {
        let body = serde_json::to_string(self).expect("config serializes");
        let mut h = Sha256::new();
        h.update(format!("config {}\0", body.len()).as_bytes());
        h.update(body.as_bytes());
        hex::encode(h.finalize())
    }
}

fn config_error(msg: String) -> Error {
    Error::InvalidParameter(msg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub tool: String,
    pub version: String,
    pub command: Command,
    pub monomial_order: String,
    pub input_hash: String,
    pub config: ExperimentConfig,
    pub records: Vec<Map<String, Value>>,
    pub aggregates: Map<String, Value>,
    pub passed: bool,
    pub failures: Vec<String>,
    pub wall_time_ms: u64,
}

impl ExperimentReport {
    pub fn without_timing(&self) -> Self {
        ExperimentReport {
            wall_time_ms: 0,
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# {CSV_SCHEMA} command={} version={} monomial_order={} input_hash={} passed={}\n",
            self.command, self.version, self.monomial_order, self.input_hash, self.passed
        );
        let mut w = csv::Writer::from_writer(Vec::new());
        let columns = self.command.columns();
        w.write_record(columns).expect("in-memory write");
        for rec in &self.records {
            w.write_record(columns.iter().map(|c| cell(rec.get(*c))))
                .expect("in-memory write");
        }
        out.push_str(&String::from_utf8(w.into_inner().expect("flush")).expect("utf8"));
        for (k, v) in &self.aggregates {
            out.push_str(&format!("# aggregate {k}={}\n", cell(Some(v))));
        }
        for f in &self.failures {
            out.push_str(&format!("# failure {f}\n"));
        }
        out.push_str(&format!("# wall_time_ms={}\n", self.wall_time_ms));
        out
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => self.to_json(),
            OutputFormat::Csv => self.to_csv(),
        }
    }
}

fn cell(v: Option<&Value>) -> String {
    match v {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(other) => other.to_string(),
    }
}

struct Body {
    records: Vec<Map<String, Value>>,
    aggregates: Map<String, Value>,
    failures: Vec<String>,
}

fn object(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("records are built from json objects"),
    }
}

/// Runs one subcommand; `config.workers` sizes the thread pool (0 = default).
pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let start = Instant::now();
    let body = par::with_workers(config.workers, || match config.command {
        Command::Endtoend => cmd_endtoend(config),
        Command::RankAudit => cmd_rank_audit(config),
        Command::Independence => cmd_independence(config),
        Command::Bounds => cmd_bounds(config),
        Command::VerifyLemmas => cmd_verify_lemmas(config),
        Command::Monomials => cmd_monomials(config),
    })?;
    Ok(ExperimentReport {
        tool: TOOL.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: config.command,
        monomial_order: MONOMIAL_ORDER_TAG.into(),
        input_hash: config.input_hash(),
        config: config.clone(),
        passed: body.failures.is_empty(),
        records: body.records,
        aggregates: body.aggregates,
        failures: body.failures,
        wall_time_ms: start.elapsed().as_millis() as u64,
    })
}

fn require_s(config: &ExperimentConfig) -> Result<usize> {
    match config.s {
        None => Err(config_error("--s is required".into())),
        Some(0) => Err(config_error("s must be at least 1".into())),
        Some(s) => Ok(s),
    }
}

fn cmd_endtoend(config: &ExperimentConfig) -> Result<Body> {
    let f = config.field()?;
    let (n, k) = (config.n, config.k);
    let s = require_s(config)?;
    if (config.p as usize) < k {
        return Err(config_error(format!("p = {} must be at least k = {k}", config.p)));
    }
    if n == 0 {
        return Err(config_error("n must be at least 1".into()));
    }
    if config.trials == 0 {
        return Err(config_error("trials must be at least 1".into()));
    }
    let d = k - 1;
    checked_space(f, n as u64, config.cap_enum, "witness set")?;
    MonomialBasis::new(n, d)?;
    let mut records = Vec::new();
    let mut failures = Vec::new();
    let (mut independent, mut verified) = (0u64, 0u64);
    let mut densities = Vec::new();
    let floor = (n > d).then(|| (config.p as u64).pow((n - d) as u32));
    for trial in 0..config.trials {
        let seed = derive_seed(config.seed, trial);
        match run_pipeline(f, n, k, s, seed, config.cap_enum) {
            Ok(rec) => {
                if rec.independent {
                    independent += 1;
                    let size = rec.witness_size.expect("independent trials have a witness");
                    densities.push(size as f64 / (config.p as f64).powi(n as i32));
                    if rec.ap_free == Some(true) {
                        verified += 1;
                    } else {
                        failures.push(format!("trial {trial}: witness set contains a {k}-AP: {:?}", rec.counterexample));
                    }
                    if rec.contains_zero != Some(true) {
                        failures.push(format!("trial {trial}: 0 is not in the witness set"));
                    }
                    if let Some(fl) = floor {
                        if size < fl {
                            failures.push(format!("trial {trial}: |A| = {size} < p^(n-d) = {fl}"));
                        }
                    }
                }
                records.push(object(json!({
                    "trial": trial,
                    "seed": seed,
                    "independent": rec.independent,
                    "witness_size": rec.witness_size,
                    "density": rec.density,
                    "contains_zero": rec.contains_zero,
                    "ap_free": rec.ap_free,
                    "differences": rec.differences,
                    "dual": rec.dual,
                    "tensor": rec.tensor,
                    "counterexample": rec.counterexample,
                    "error": Value::Null,
                })));
            }
            Err(Error::CheckFailed(msg)) => {
                failures.push(format!("trial {trial}: {msg}"));
                records.push(object(json!({"trial": trial, "seed": seed, "error": msg})));
            }
            Err(e) => return Err(e),
        }
    }
    let mean = (!densities.is_empty()).then(|| densities.iter().sum::<f64>() / densities.len() as f64);
    let fold = |init: f64, g: fn(f64, f64) -> f64| (!densities.is_empty()).then(|| densities.iter().copied().fold(init, g));
    let aggregates = object(json!({
        "trials": config.trials,
        "independent_trials": independent,
        "independence_rate": independent as f64 / config.trials as f64,
        "verified_trials": verified,
        "verification_pass_rate": (independent > 0).then(|| verified as f64 / independent as f64),
        "density_min": fold(f64::INFINITY, f64::min),
        "density_mean": mean,
        "density_max": fold(f64::NEG_INFINITY, f64::max),
        "warning_floor": floor,
    }));
    Ok(Body {
        records,
        aggregates,
        failures,
    })
}

type AuditRow = (Map<String, Value>, Option<String>, usize, crate::tensor::ExactBias);

fn cmd_rank_audit(config: &ExperimentConfig) -> Result<Body> {
    let f = config.field()?;
    let (n, d) = (config.n, config.degree());
    if n == 0 {
        return Err(config_error("n must be at least 1 (empty regime)".into()));
    }
    if d < 2 {
        return Err(config_error("rank audit needs d ≥ 2".into()));
    }
    let cap = config.cap_enum.min(PRANK_SPACE_CAP);
    let table = PrankTable::build(f, n, d, None, cap)?;
    let space = table.space_size();
    let rows: Vec<Result<AuditRow>> =
        par::map_collect(0..space, |i| {
            let t = Tensor::from_index(f, d, n, i);
            let bias = exact_bias(&t, config.cap_enum)?;
            let prank = table.rank_of_index(i).expect("complete table");
            let cert_ok = table.certificate_of_index(i).is_some_and(|c| c.len() == prank && c.verifies(&t));
            let ordered = bias.arank_at_most(prank as u32);
            let matrix_rank = (d == 2).then(|| {
                rank(&FpMatrix::from_residues(f, n, n, t.coeffs().to_vec()).expect("square"))
            });
            let mut problem = None;
            if !ordered {
                problem = Some(format!("tensor {i}: arank {} > prank {prank}", bias.analytic_rank()));
            } else if !cert_ok {
                problem = Some(format!("tensor {i}: certificate does not reconstruct"));
            } else if let Some(mr) = matrix_rank {
                if bias.integer_analytic_rank() != Some(mr as u32) || prank != mr {
                    problem = Some(format!("tensor {i}: matrix rank {mr}, arank {}, prank {prank}", bias.analytic_rank()));
                }
            }
            let rec = object(json!({
                "tensor_id": i,
                "prank": prank,
                "arank": bias.analytic_rank(),
                "bias_numerator": bias.numerator,
                "bias_denominator_exponent": bias.denominator_exponent,
                "arank_le_prank": ordered,
                "certificate_ok": cert_ok,
                "matrix_rank": matrix_rank,
            }));
            Ok((rec, problem, prank, bias))
        });
    let rows: Vec<_> = rows.into_iter().collect::<Result<_>>()?;
    let failures: Vec<String> = rows.iter().filter_map(|r| r.1.clone()).collect();
    let ordered = rows.iter().filter(|r| r.3.arank_at_most(r.2 as u32)).count();
    let alpha = measure_alpha(rows.iter().map(|r| (r.2, &r.3)));
    let hist = table.histogram();
    let mut cumulative = 0u64;
    let mut counts = Vec::new();
    let mut failures = failures;
    for (r, c) in hist.iter().enumerate() {
        cumulative += c;
        let exponent = 2 * (n as u64).pow(d as u32 - 1) * r as u64;
        let within = BigUint::from(cumulative) <= BigUint::from(config.p).pow(exponent as u32);
        if !within {
            failures.push(format!("{cumulative} tensors of partition rank ≤ {r} exceed p^{exponent}"));
        }
        counts.push(json!({"r": r, "count": cumulative, "bound_exponent": exponent, "within_bound": within}));
    }
    if hist.first() != Some(&1) {
        failures.push("partition rank 0 is not attained by exactly one tensor".into());
    }
    let aggregates = object(json!({
        "p": config.p,
        "n": n,
        "d": d,
        "tensors": space,
        "arank_le_prank_violations": space as usize - ordered,
        "prank_histogram": hist,
        "low_prank_counts": counts,
        "measured_alpha": alpha,
        "catalog_size": table.catalog().len(),
    }));
    Ok(Body {
        records: rows.into_iter().map(|r| r.0).collect(),
        aggregates,
        failures,
    })
}

fn rational_text(q: &num_rational::BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

fn cmd_independence(config: &ExperimentConfig) -> Result<Body> {
    let f = config.field()?;
    let (n, d) = (config.n, config.degree());
    let s = require_s(config)?;
    if n == 0 {
        return Err(config_error("n must be at least 1".into()));
    }
    let batch = if config.exact {
        independence_probability_exact(f, n, d, s, config.cap_enum)?
    } else {
        if config.trials == 0 {
            return Err(config_error("trials must be at least 1".into()));
        }
        independence_probability_monte_carlo(f, n, d, s, config.trials, config.seed)?
    };
    let (lo, hi) = batch.wilson_interval();
    let bound = match independence_lower_bound(f, n, d, s, config.cap_enum) {
        Ok(b) => Some(b),
        Err(Error::RegimeTooLarge(_) | Error::CapExceeded { .. }) => None,
        Err(e) => return Err(e),
    };
    let mut failures = Vec::new();
    if let (true, Some(b)) = (config.exact, &bound) {
        if b.bound > batch.as_fraction() {
            failures.push(format!(
                "lower bound {} exceeds exact probability {}",
                rational_text(&b.bound),
                rational_text(&batch.as_fraction())
            ));
        }
    }
    let bound_value = bound.as_ref().map(|b| crate::probability::fraction_to_f64(&b.bound));
    let record = object(json!({
        "p": config.p,
        "n": n,
        "d": d,
        "s": s,
        "mode": if config.exact { "exact" } else { "monte-carlo" },
        "successes": batch.successes,
        "trials": batch.trials,
        "probability": config.exact.then(|| rational_text(&batch.as_fraction())),
        "estimate": batch.estimate(),
        "wilson_low": (!config.exact).then_some(lo),
        "wilson_high": (!config.exact).then_some(hi),
        "lower_bound": bound.as_ref().map(|b| rational_text(&b.bound)),
        "lower_bound_value": bound_value,
        "max_hits": bound.as_ref().map(|b| b.max_hits),
        "points": bound.as_ref().map(|b| b.points),
        "maximizer": bound.as_ref().map(|b| b.subspace.clone()),
        "subspaces_searched": bound.as_ref().map(|b| b.subspaces_searched),
    }));
    let aggregates = object(json!({
        "lower_bound_available": bound.is_some(),
        "lower_bound_below_upper_wilson": bound_value.map(|b| config.exact || b <= hi),
    }));
    Ok(Body {
        records: vec![record],
        aggregates,
        failures,
    })
}

fn cmd_bounds(config: &ExperimentConfig) -> Result<Body> {
    let (p, k) = (config.p, config.k);
    let first = config.n as u64;
    let last = config.n_max.map_or(first, |m| m as u64);
    if first < 2 || last < first {
        return Err(config_error(format!("bounds needs 2 ≤ n ≤ n-max (got {first}..{last})")));
    }
    if last - first + 1 > config.cap_enum {
        return Err(Error::CapExceeded {
            what: "bounds rows",
            required: (last - first + 1).to_string(),
            cap: config.cap_enum,
        });
    }
    let (beta, calibration) = match config.beta {
        Some(b) => (b, Value::Null),
        None => {
            let c = calibrate_beta(p, first..=last, k - 1, config.alpha, config.epsilon, BetaGrid::default())?;
            (c.beta, serde_json::to_value(&c).expect("serializes"))
        }
    };
    let rows: Vec<Result<_>> = par::map_collect(first..last + 1, |n| {
        bounds_row(p, n, k, config.alpha, beta, config.epsilon)
    });
    let rows: Vec<_> = rows.into_iter().collect::<Result<_>>()?;
    let mut failures = Vec::new();
    for row in &rows {
        if !row.e2_ok {
            failures.push(format!("n = {}: e2 = {} is not below -d·log_p n", row.n, row.e2));
        }
        let full = crate::veronese::binomial(row.n + k as u64 - 2, k as u64 - 1);
        if row.s_max > full {
            failures.push(format!("n = {}: s_max exceeds binom(n+k-2, k-1)", row.n));
        }
        if (row.r0 - r0_value(p, row.n, k - 1)).abs() > 0.0 {
            failures.push(format!("n = {}: r0 mismatch", row.n));
        }
    }
    let aggregates = object(json!({
        "beta": beta,
        "beta_calibration": calibration,
        "e1_ok_rows": rows.iter().filter(|r| r.e1_ok).count(),
        "e2_ok_rows": rows.iter().filter(|r| r.e2_ok).count(),
        "useless_rows": rows.iter().filter(|r| r.useless).count(),
        "rows": rows.len(),
    }));
    Ok(Body {
        records: rows
            .iter()
            .map(|r| object(serde_json::to_value(r).expect("serializes")))
            .collect(),
        aggregates,
        failures,
    })
}

struct Check {
    name: &'static str,
    params: String,
    instances: u64,
    holds: bool,
    detail: String,
}

fn check_character_identity() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (p, m) in [(2u32, 2usize), (3, 3)] {
        let f = PrimeField::new(p)?;
        let chi = Character::standard(f);
        let mut instances = 0;
        let mut bad = Vec::new();
        for dim in 0..=2.min(m) {
            for forms in enumerate_subspaces(f, m, dim) {
                let v = linear_forms_as_functions(&forms, DEFAULT_CAP)?;
                let r = character_identity_check(&v, &chi)?;
                instances += 1;
                if !r.holds {
                    bad.push(format!("{:?}", forms.basis()));
                }
            }
        }
        out.push(Check {
            name: "character-identity",
            params: format!("p={p} m={m} dim<=2"),
            instances,
            holds: bad.is_empty(),
            detail: if bad.is_empty() { "exact equality".into() } else { bad.join(";") },
        });
    }
    Ok(out)
}

fn check_membership_chain() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (p, n, d) in [(2u32, 2usize, 2usize), (3, 2, 2)] {
        let f = PrimeField::new(p)?;
        let basis = MonomialBasis::new(n, d)?;
        let chi = Character::standard(f);
        let mut instances = 0;
        let mut holds = true;
        for dim in 0..=basis.dim() {
            for u in enumerate_subspaces(f, basis.dim(), dim) {
                instances += 1;
                holds &= membership_chain(&u, &basis, &chi, DEFAULT_CAP)?.consistent();
            }
        }
        out.push(Check {
            name: "membership-via-characters",
            params: format!("p={p} n={n} d={d}"),
            instances,
            holds,
            detail: "P[φ(x)∈U] = P[⟨v,φ(x)⟩=0 ∀v∈U⊥] = E χ(⟨v,φ(x)⟩)".into(),
        });
    }
    Ok(out)
}

fn check_lower_bound() -> Result<Vec<Check>> {
    let f = PrimeField::new(2)?;
    let mut out = Vec::new();
    for s in 1..=3 {
        let exact = independence_probability_exact(f, 2, 2, s, DEFAULT_CAP)?;
        let lb = independence_lower_bound(f, 2, 2, s, DEFAULT_CAP)?;
        out.push(Check {
            name: "independence-lower-bound",
            params: format!("p=2 n=2 d=2 s={s}"),
            instances: lb.subspaces_searched,
            holds: lb.bound <= exact.as_fraction(),
            detail: format!("{} <= {}", rational_text(&lb.bound), rational_text(&exact.as_fraction())),
        });
    }
    Ok(out)
}

fn check_bias_split(alpha: f64, eps: EpsilonModel) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (p, n, d) in [(2u32, 2usize, 2usize), (3, 2, 2)] {
        let f = PrimeField::new(p)?;
        let basis = MonomialBasis::new(n, d)?;
        let r0 = r0_value(p, n as u64, d);
        let r = alpha * r0.powf(1.0 + eps.eval(n as f64));
        let mut instances = 0;
        let mut holds = true;
        for dim in 0..=basis.dim() {
            for uperp in enumerate_subspaces(f, basis.dim(), dim) {
                let split = bias_split_expectation(&uperp, &basis, r0, r, DEFAULT_CAP)?;
                instances += 1;
                holds &= split.bound_holds && (split.term_low + split.term_high - split.expectation).abs() < 1e-12;
            }
        }
        out.push(Check {
            name: "bias-split",
            params: format!("p={p} n={n} d={d}"),
            instances,
            holds,
            detail: format!("r0={r0} r={r}"),
        });
    }
    Ok(out)
}

fn check_finite_difference(seed: u64) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (p, d, n) in [(5u32, 2usize, 2usize), (7, 3, 2)] {
        let f = PrimeField::new(p)?;
        let factorial = (1..=d as u64).product::<u64>();
        let mut instances = 0;
        let mut holds = true;
        for j in 0..3 {
            let mut rng = SampleStream::new(derive_seed(seed, j), 0);
            let t = SymmetricTensor::random(f, d, n, &mut rng).into_tensor();
            let xs: Vec<FpVector> = all_vectors(f, n).collect();
            for x in &xs {
                for s in &xs {
                    let lhs = finite_difference_check(&t, x, s)?;
                    let rhs = f.mul(f.reduce(factorial), crate::tensor::diagonal_eval(&t, s)?.value());
                    instances += 1;
                    holds &= lhs.value() == rhs;
                }
            }
        }
        out.push(Check {
            name: "finite-difference",
            params: format!("p={p} d={d} n={n}"),
            instances,
            holds,
            detail: "Δ_s^d Q(x) = d!·Q(s)".into(),
        });
    }
    Ok(out)
}

fn check_diagonal_bound(seed: u64) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (p, n, d) in [(3u32, 2usize, 2usize), (5, 3, 2), (5, 2, 3), (7, 3, 3)] {
        let f = PrimeField::new(p)?;
        let chi = Character::standard(f);
        let mut holds = true;
        for j in 0..20 {
            let mut rng = SampleStream::new(derive_seed(seed, 1000 + j), 0);
            let t = SymmetricTensor::random(f, d, n, &mut rng).into_tensor();
            let bias = exact_bias(&t, DEFAULT_CAP)?;
            let lhs = diagonal_bias(&t, &chi, DEFAULT_CAP)?.norm();
            holds &= lhs <= bias.to_f64().powf(1.0 / (1u64 << (d - 1)) as f64) + 1e-9;
        }
        out.push(Check {
            name: "diagonal-bias-bound",
            params: format!("p={p} n={n} d={d} symmetric"),
            instances: 20,
            holds,
            detail: "|E χ(T(x,…,x))| ≤ p^{-arank/2^{d-1}} for symmetric T, p > d".into(),
        });
    }
    Ok(out)
}

fn cmd_verify_lemmas(config: &ExperimentConfig) -> Result<Body> {
    let mut checks = Vec::new();
    checks.extend(check_character_identity()?);
    checks.extend(check_membership_chain()?);
    checks.extend(check_lower_bound()?);
    checks.extend(check_bias_split(config.alpha, config.epsilon)?);
    checks.extend(check_finite_difference(config.seed)?);
    checks.extend(check_diagonal_bound(config.seed)?);
    let failures = checks
        .iter()
        .filter(|c| !c.holds)
        .map(|c| format!("{} ({}) failed: {}", c.name, c.params, c.detail))
        .collect();
    let aggregates = object(json!({
        "checks": checks.len(),
        "passed": checks.iter().filter(|c| c.holds).count(),
    }));
    Ok(Body {
        records: checks
            .into_iter()
            .map(|c| {
                object(json!({
                    "check": c.name,
                    "params": c.params,
                    "instances": c.instances,
                    "holds": c.holds,
                    "detail": c.detail,
                }))
            })
            .collect(),
        aggregates,
        failures,
    })
}

/// `x1^2*x3`, with `1` for the empty monomial.
pub fn monomial_text(exponents: &[u32]) -> String {
    let parts: Vec<String> = exponents
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(i, &e)| if e == 1 { format!("x{}", i + 1) } else { format!("x{}^{e}", i + 1) })
        .collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

fn cmd_monomials(config: &ExperimentConfig) -> Result<Body> {
    let (n, d) = (config.n, config.degree());
    if n == 0 {
        return Err(config_error("n must be at least 1".into()));
    }
    let dim = crate::veronese::veronese_dimension(n, d);
    if dim > BigUint::from(config.cap_enum) {
        return Err(Error::CapExceeded {
            what: "monomial table",
            required: dim.to_string(),
            cap: config.cap_enum,
        });
    }
    let basis = MonomialBasis::new(n, d)?;
    let records = basis
        .monomials()
        .map(|m| {
            object(json!({
                "position": m.position,
                "exponents": m.exponents,
                "monomial": monomial_text(&m.exponents),
                "multinomial": basis.multinomial(m.position).to_string(),
            }))
        })
        .collect();
    let aggregates = object(json!({"n": n, "d": d, "dimension": basis.dim(), "order": MONOMIAL_ORDER_TAG}));
    Ok(Body {
        records,
        aggregates,
        failures: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(command: Command) -> ExperimentConfig {
        ExperimentConfig::new(command)
    }

    #[test]
    fn endtoend_example() {
        let mut c = cfg(Command::Endtoend);
        c.s = Some(4);
        c.trials = 30;
        let r = run(&c).unwrap();
        assert!(r.passed, "{:?}", r.failures);
        assert_eq!(r.records.len(), 30);
        assert_eq!(r.aggregates["verification_pass_rate"], json!(1.0));
        c.p = 2;
        assert!(run(&c).is_err());
        c.p = 5;
        c.s = Some(0);
        assert!(run(&c).is_err());
    }

    #[test]
    fn rank_audit_examples() {
        let mut c = cfg(Command::RankAudit);
        c.p = 2;
        c.n = 2;
        c.d = Some(3);
        let r = run(&c).unwrap();
        assert!(r.passed, "{:?}", r.failures);
        assert_eq!(r.records.len(), 256);
        assert_eq!(r.aggregates["arank_le_prank_violations"], json!(0));

        c.p = 3;
        c.d = Some(2);
        let r = run(&c).unwrap();
        assert!(r.passed, "{:?}", r.failures);
        assert_eq!(r.records.len(), 81);
        assert!(r.records.iter().all(|rec| rec["matrix_rank"].as_f64() == rec["arank"].as_f64()));

        c.n = 0;
        assert!(run(&c).is_err());
    }

    #[test]
    fn independence_exact_example() {
        let mut c = cfg(Command::Independence);
        c.p = 2;
        c.n = 2;
        c.s = Some(2);
        c.exact = true;
        let r = run(&c).unwrap();
        assert!(r.passed);
        assert_eq!(r.records[0]["probability"], json!("3/8"));
        assert_eq!(r.records[0]["lower_bound"], json!("1/4"));
    }

    #[test]
    fn bounds_example() {
        let mut c = cfg(Command::Bounds);
        c.p = 3;
        c.n = 9;
        c.beta = Some(1.0);
        c.epsilon = EpsilonModel::Zero;
        let r = run(&c).unwrap();
        assert!(r.passed);
        assert_eq!(r.records[0]["s_max"], json!("27"));
        let csv = r.to_csv();
        assert!(csv.lines().nth(1).unwrap().starts_with("n,s_max,r0"));
        assert!(csv.lines().nth(2).unwrap().starts_with("9,27,10"));
    }

    #[test]
    fn bounds_calibrates_when_beta_missing() {
        let mut c = cfg(Command::Bounds);
        c.p = 3;
        c.n = 4;
        c.n_max = Some(64);
        let r = run(&c).unwrap();
        assert!(r.passed);
        assert_eq!(r.aggregates["e1_ok_rows"], json!(61));
    }

    #[test]
    fn verify_lemmas_passes() {
        let r = run(&cfg(Command::VerifyLemmas)).unwrap();
        assert!(r.passed, "{:?}", r.failures);
    }

    #[test]
    fn monomial_table() {
        let mut c = cfg(Command::Monomials);
        c.n = 2;
        c.d = Some(2);
        let r = run(&c).unwrap();
        let names: Vec<_> = r.records.iter().map(|m| m["monomial"].as_str().unwrap().to_string()).collect();
        assert_eq!(names, ["x1^2", "x1*x2", "x2^2"]);
        assert_eq!(r.records[1]["multinomial"], json!("2"));
    }

    #[test]
    fn reports_ignore_worker_count() {
        let mut c = cfg(Command::Endtoend);
        c.s = Some(5);
        c.trials = 10;
        c.workers = 1;
        let a = run(&c).unwrap().without_timing().to_json();
        c.workers = 3;
        let b = run(&c).unwrap().without_timing().to_json();
        assert_eq!(a, b);
    }

    #[test]
    fn input_hash_tracks_config() {
        let a = cfg(Command::Bounds);
        let mut b = a.clone();
        assert_eq!(a.input_hash(), b.input_hash());
        b.workers = 8;
        assert_eq!(a.input_hash(), b.input_hash());
        b.seed = 7;
        assert_ne!(a.input_hash(), b.input_hash());
        assert_eq!(a.input_hash().len(), 64);
    }
}

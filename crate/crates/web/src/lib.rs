//! wasm-bindgen exports for the static page in `www/`. Every export returns a
//! JSON string so the page stays framework-free and the same functions can be
//! tested natively.

use kapfree_core::bounds::EpsilonModel;
use kapfree_core::construction::{build_witness, find_tensor, sample_difference_set, verify_no_kap};
use kapfree_core::field::PrimeField;
use kapfree_core::harness::{self, Command, ExperimentConfig};
use kapfree_core::tensor::diagonal_eval;
use kapfree_core::field::FpVector;
use kapfree_core::Error;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

const GRID_CAP: u64 = 1 << 16;

fn error(msg: impl ToString) -> String {
    json!({"ok": false, "error": msg.to_string()}).to_string()
}

fn witness_grid_value(p: u32, k: usize, s: usize, seed: u64) -> Result<Value, Error> {
    let f = PrimeField::new(p)?;
    if k < 3 || (p as usize) < k {
        return Err(Error::InvalidParameter(format!("need p ≥ k ≥ 3 (p={p}, k={k})")));
    }
    if (p as u64) * (p as u64) > GRID_CAP {
        return Err(Error::InvalidParameter(format!("p = {p} is too large for the grid view")));
    }
    let set = sample_difference_set(f, 2, s, seed)?;
    let differences: Vec<Vec<u32>> = set.vectors().iter().map(|v| v.entries().to_vec()).collect();
    let found = match find_tensor(&set, k - 1) {
        Ok(found) => found,
        Err(Error::ResampleRequired) => {
            return Ok(json!({
                "ok": true, "p": p, "k": k, "seed": seed,
                "differences": differences, "independent": false,
            }))
        }
        Err(e) => return Err(e),
    };
    let witness = build_witness(&found.tensor, GRID_CAP)?;
    let verdict = verify_no_kap(&witness, &set, k, GRID_CAP)?;
    let t = found.tensor.tensor();
    let mut rows = Vec::with_capacity(p as usize);
    for y in 0..p {
        let mut row = Vec::with_capacity(p as usize);
        for x in 0..p {
            let v = FpVector::from_raw(f, &[x as u64, y as u64]);
            row.push(diagonal_eval(t, &v)?.value());
        }
        rows.push(row);
    }
    let (num, den) = witness.density();
    Ok(json!({
        "ok": true,
        "p": p,
        "k": k,
        "seed": seed,
        "differences": differences,
        "independent": true,
        "dual": found.dual.entries.entries(),
        "values": rows,
        "size": num,
        "total": den,
        "ap_free": verdict.ap_free,
        "counterexample": verdict.counterexample,
    }))
}

/// Zero set of `Q(x) = T(x, x, …)` on the `p × p` grid, `values[y][x] = Q(x, y)`.
#[wasm_bindgen]
pub fn witness_grid(p: u32, k: usize, s: usize, seed: u64) -> String {
    match witness_grid_value(p, k, s, seed) {
        Ok(v) => v.to_string(),
        Err(e) => error(e),
    }
}

fn report(cfg: &ExperimentConfig) -> String {
    match harness::run(cfg) {
        Ok(r) => {
            let mut v = serde_json::to_value(r.without_timing()).expect("report serializes");
            v["ok"] = json!(true);
            v.to_string()
        }
        Err(e) => error(e),
    }
}

/// Rows of the bounds table for `n_min..=n_max`; `beta < 0` means calibrate.
#[wasm_bindgen]
pub fn bounds_curve(p: u32, k: usize, n_min: usize, n_max: usize, alpha: f64, beta: f64, epsilon: &str) -> String {
    let mut cfg = ExperimentConfig::new(Command::Bounds);
    cfg.p = p;
    cfg.k = k;
    cfg.n = n_min;
    cfg.n_max = Some(n_max);
    cfg.alpha = alpha;
    cfg.beta = (beta >= 0.0).then_some(beta);
    cfg.epsilon = match EpsilonModel::parse(epsilon) {
        Ok(e) => e,
        Err(e) => return error(e),
    };
    cfg.cap_enum = 4096;
    report(&cfg)
}

/// Exact or sampled probability that `s` Veronese images are independent.
#[wasm_bindgen]
pub fn independence(p: u32, n: usize, k: usize, s: usize, trials: u64, seed: u64, exact: bool) -> String {
    let mut cfg = ExperimentConfig::new(Command::Independence);
    cfg.p = p;
    cfg.n = n;
    cfg.k = k;
    cfg.s = Some(s);
    cfg.trials = trials;
    cfg.seed = seed;
    cfg.exact = exact;
    cfg.cap_enum = 1 << 20;
    report(&cfg)
}

use std::process::Command;

use serde_json::Value;

fn kapfree(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_kapfree")).args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn json(args: &[&str]) -> (i32, Value) {
    let (code, out, _) = kapfree(args);
    (code, serde_json::from_str(&out).unwrap())
}

#[test]
fn bounds_row_with_zero_epsilon() {
    let (code, out, _) = kapfree(&["bounds", "--p", "3", "--k", "3", "--n", "9", "--beta", "1", "--epsilon", "zero", "--format", "csv"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert!(lines[0].starts_with("# kapfree-csv-v1 command=bounds"));
    assert_eq!(lines[1], "n,s_max,r0,r,dim_uperp,e1,e2,e1_ok,e2_ok,useless");
    assert!(lines[2].starts_with("9,27,"));
}

#[test]
fn exact_independence_prints_a_fraction() {
    let (code, v) = json(&["independence", "--p", "2", "--n", "2", "--k", "3", "--s", "2", "--exact"]);
    assert_eq!(code, 0);
    assert_eq!(v["records"][0]["probability"], "3/8");
    assert_eq!(v["monomial_order"], "grlex-v1");
}

#[test]
fn endtoend_example_and_config_errors() {
    let (code, v) = json(&["endtoend", "--p", "5", "--k", "3", "--n", "3", "--s", "4", "--trials", "100", "--seed", "42"]);
    assert_eq!(code, 0);
    assert_eq!(v["aggregates"]["verification_pass_rate"], 1.0);
    assert_eq!(v["records"].as_array().unwrap().len(), 100);

    let (code, _, err) = kapfree(&["endtoend", "--p", "2", "--k", "3", "--s", "2"]);
    assert_eq!(code, 2);
    let e: Value = serde_json::from_str(err.trim()).unwrap();
    assert_eq!(e["passed"], false);
    let (code, _, _) = kapfree(&["endtoend", "--p", "5", "--k", "3", "--s", "0"]);
    assert_eq!(code, 2);
}

#[test]
fn rank_audit_tables() {
    let (code, v) = json(&["rank-audit", "--p", "2", "--n", "2", "--d", "3"]);
    assert_eq!(code, 0);
    assert_eq!(v["records"].as_array().unwrap().len(), 256);
    assert_eq!(v["aggregates"]["arank_le_prank_violations"], 0);
    let (code, out, _) = kapfree(&["rank-audit", "--p", "3", "--n", "2", "--k", "3", "--format", "csv"]);
    assert_eq!(code, 0);
    assert!(out.lines().nth(1).unwrap().starts_with("tensor_id,prank,arank,bias_numerator,bias_denominator_exponent"));
    assert_eq!(out.lines().filter(|l| !l.starts_with('#')).count(), 82);
    let (code, _, _) = kapfree(&["rank-audit", "--p", "2", "--n", "0", "--d", "3"]);
    assert_eq!(code, 2);
}

#[test]
fn verify_lemmas_exit_zero() {
    let (code, v) = json(&["verify-lemmas"]);
    assert_eq!(code, 0);
    assert_eq!(v["passed"], true);
}

#[test]
fn monomial_table_and_out_file() {
    let dir = std::env::temp_dir().join(format!("kapfree-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("monomials.csv");
    let (code, out, _) = kapfree(&["monomials", "--n", "3", "--d", "2", "--format", "csv", "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "position,exponents,monomial,multinomial");
    assert_eq!(rows[1], "0,\"[2,0,0]\",x1^2,1");
    assert_eq!(rows.len(), 7);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn tensor_conversion_round_trip() {
    let dir = std::env::temp_dir().join(format!("kapfree-tensor-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let text = dir.join("t.txt");
    std::fs::write(&text, "5 2 2\n1 2 2 4\n").unwrap();
    let (code, out, _) = kapfree(&["convert-tensor", "--in", text.to_str().unwrap(), "--to", "json"]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), r#"{"p":5,"n":2,"d":2,"coeffs":[1,2,2,4]}"#);
    let js = dir.join("t.json");
    std::fs::write(&js, out).unwrap();
    let (code, back, _) = kapfree(&["convert-tensor", "--in", js.to_str().unwrap(), "--to", "text"]);
    assert_eq!(code, 0);
    assert_eq!(back, "5 2 2\n1 2 2 4\n");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn reports_match_across_worker_counts() {
    let strip = |mut v: Value| {
        v["wall_time_ms"] = Value::Null;
        v
    };
    let base = ["independence", "--p", "3", "--n", "2", "--s", "4", "--trials", "3000", "--seed", "9"];
    let (_, a) = json(&[&base[..], &["--workers", "1"]].concat());
    let (_, b) = json(&[&base[..], &["--workers", "3"]].concat());
    assert_eq!(strip(a), strip(b));
}

//! End-to-end runs of the `cleint` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

use cle_integrability::cli_io::read_histogram_csv;
use serde_json::Value;

fn cleint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cleint")).args(args).env_remove("CLEINT_THREADS").output().unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn tmp(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("cleint-{}-{name}", std::process::id()))
}

fn schema() -> Value {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../schema/cleint.schema.json");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Checks required keys and rejects keys the schema does not list.
fn conforms(v: &Value, def: &str) {
    let s = schema();
    let d = &s["$defs"][def];
    let props = d["properties"].as_object().unwrap();
    let obj = v.as_object().unwrap();
    for r in d["required"].as_array().unwrap() {
        assert!(obj.contains_key(r.as_str().unwrap()), "{def} lacks {r}: {v}");
    }
    for k in obj.keys() {
        assert!(props.contains_key(k), "{def} has undocumented key {k}");
    }
}

#[test]
fn documented_eval_examples() {
    let o = cleint(&["eval", "cle-three-point", "--kappa", "3", "--lambdas", "0,0,0"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    conforms(&v, "RunRecord");
    assert!((v["value"].as_f64().unwrap() - 1.0).abs() < 1e-10);

    let o = cleint(&["eval", "kw-mgf", "--kappa", "4", "--lambda", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("\"value\":\"inf\""));

    let v = json(&cleint(&["eval", "loop-soup-intensity", "--kappa", "4"]));
    assert_eq!(v["value"].as_f64(), Some(1.0));
    assert_eq!(v["params"]["kappa"], "4");
    assert!(v["tool_version"].as_str().unwrap().starts_with("cleint "));
}

#[test]
fn evaluator_errors_exit_one_with_error_name() {
    let o = cleint(&["eval", "dozz", "--gamma", "1", "--alphas", "0,1,1"]);
    assert_eq!(o.status.code(), Some(1));
    let v = json(&o);
    conforms(&v, "RunRecord");
    assert_eq!(v["error"]["kind"], "PoleHit");
    assert!(v.get("value").is_none());
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["eval", "no-such-formula"][..],
        &["eval", "kw-mgf", "--kappa", "4"],
        &["eval", "kw-mgf", "--kappa", "four", "--lambda", "0.1"],
        &["eval", "loop-soup-intensity", "--kappa", "4", "--lambda", "1"],
        &["verify", "everything"],
        &["mc", "cle", "three-point", "--kappa", "3.5", "--seed", "1"],
        &["frobnicate"],
    ] {
        let o = cleint(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn verify_suites() {
    for suite in ["identities", "shifts"] {
        let o = cleint(&["verify", suite]);
        assert_eq!(o.status.code(), Some(0), "{suite}");
        let v = json(&o);
        conforms(&v, "SuiteReport");
        assert_eq!(v["overall"], true);
        for c in v["checks"].as_array().unwrap() {
            conforms(c, "Check");
        }
    }
    let o = cleint(&["verify", "shifts", "--tol", "1e-15"]);
    assert_eq!(o.status.code(), Some(1));
    let v = json(&o);
    assert_eq!(v["overall"], false);
    assert!(v["checks"].as_array().unwrap().iter().any(|c| c["pass"] == false));
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAIL"));
}

fn without_runtime(o: &Output) -> Value {
    let mut v = json(o);
    v.as_object_mut().unwrap().remove("runtime_ms");
    v
}

#[test]
fn seeded_runs_are_reproducible() {
    let args = ["mc", "levy", "tau-ratio", "--a", "1", "--b", "1", "--n", "20000", "--seed", "7"];
    let a = cleint(&args);
    let b = cleint(&args);
    assert_eq!(without_runtime(&a), without_runtime(&b));
    let strip = |o: &Output| {
        let s = String::from_utf8(o.stdout.clone()).unwrap();
        let i = s.find("\"runtime_ms\":").unwrap();
        let j = i + s[i..].find(',').unwrap();
        format!("{}{}", &s[..i], &s[j..])
    };
    assert_eq!(strip(&a), strip(&b));
    let v = json(&a);
    conforms(&v, "RunRecord");
    assert_eq!(v["seed"], 7);
    assert_eq!(v["n"], 20000);
    let (x, se) = (v["value"].as_f64().unwrap(), v["stderr"].as_f64().unwrap());
    assert!((x - 0.5).abs() < 4.0 * se);

    // the reduction order is fixed, so the thread count does not matter
    let one = Command::new(env!("CARGO_BIN_EXE_cleint")).args(&args).env("CLEINT_THREADS", "1").output().unwrap();
    let three = cleint(&[&["--threads", "3"][..], &args[..]].concat());
    assert_eq!(json(&one)["value"], v["value"]);
    assert_eq!(json(&three)["value"], v["value"]);
}

#[test]
fn strict_mode_requires_a_seed() {
    let o = cleint(&["--strict", "mc", "levy", "tau-ratio", "--a", "1", "--b", "1", "--n", "100"]);
    assert_eq!(o.status.code(), Some(2));
    let o = cleint(&["mc", "levy", "tau-ratio", "--a", "1", "--b", "1", "--n", "100"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    // the drawn seed is echoed and reproduces the run
    let seed = v["seed"].as_u64().unwrap().to_string();
    assert_eq!(v["params"]["seed"], seed.as_str());
    let again = cleint(&["mc", "levy", "tau-ratio", "--a", "1", "--b", "1", "--n", "100", "--seed", &seed]);
    assert_eq!(json(&again)["value"], v["value"]);
}

#[test]
fn config_file_and_flag_precedence() {
    let path = tmp("cfg.txt");
    std::fs::write(&path, "# soup intensity\nkappa = 3\n").unwrap();
    let p = path.to_str().unwrap();
    let v = json(&cleint(&["--config", p, "eval", "loop-soup-intensity"]));
    assert_eq!(v["value"].as_f64(), Some(0.5));
    let v = json(&cleint(&["--config", p, "eval", "loop-soup-intensity", "--kappa", "4"]));
    assert_eq!(v["value"].as_f64(), Some(1.0));

    std::fs::write(&path, "").unwrap();
    let o = cleint(&["--config", p, "eval", "loop-soup-intensity", "--kappa", "3.5"]);
    assert_eq!(o.status.code(), Some(0));

    std::fs::write(&path, "kappa = 3\n\nkappa = 3.5\n").unwrap();
    let o = cleint(&["--config", p, "eval", "loop-soup-intensity"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains('1') && err.contains('3'), "{err}");

    std::fs::write(&path, "kappaa = 3\n").unwrap();
    assert_eq!(cleint(&["--config", p, "eval", "loop-soup-intensity"]).status.code(), Some(2));
    std::fs::remove_file(&path).ok();
}

#[test]
fn marked_jump_writes_histogram_csv() {
    let out = tmp("hist.csv");
    let o = cleint(&[
        "mc", "levy", "marked-jump", "--a", "1", "--beta", "1.7", "--eps", "1e-3", "--n", "2000", "--bins", "6",
        "--seed", "3", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    conforms(&v, "RunRecord");
    let rows = read_histogram_csv(&out).unwrap();
    let header = std::fs::read_to_string(&out).unwrap();
    assert!(header.starts_with("bin_lo,bin_hi,mass,target\n"));
    std::fs::remove_file(&out).ok();
    assert_eq!(rows.len(), 6);
    let total: f64 = rows.iter().map(|r| r.mass).sum();
    assert!((total - v["diagnostics"]["total_weight"].as_f64().unwrap()).abs() < 1e-12);
    // the law has infinite mass near 0; its integral over [0.1, 5] (mpmath)
    let binned: f64 = rows.iter().map(|r| r.target).sum();
    assert!((binned - 6.32637042286392).abs() < 1e-10, "{binned}");
}

#[test]
fn cle_outputs() {
    let snap = tmp("soup.rwls");
    let o = cleint(&["mc", "cle", "soup", "--kappa", "4", "--resolution", "32", "--seed", "5", "--out", snap.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let s = cle_integrability::cle_mc::LoopSoupSample::read_binary(std::fs::File::open(&snap).unwrap()).unwrap();
    std::fs::remove_file(&snap).ok();
    assert_eq!(s.loops.len() as f64, json(&o)["value"].as_f64().unwrap());
    assert_eq!((s.resolution, s.seed), (32, 5));

    let o = cleint(&["mc", "cle", "ssw", "--kappa", "4", "--lambda", "1", "--resolution", "32", "--n", "50", "--seed", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    conforms(&v, "RunRecord");
    assert!(v["diagnostics"]["unresolved"].as_f64().is_some());
    assert_eq!(v["params"]["resolution"], "32");
}

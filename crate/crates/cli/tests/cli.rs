use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn efc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_efc"))
        .args(args)
        .env_remove("EFC_OUTPUT_DIR")
        .output()
        .expect("failed to run efc")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn schema(name: &str) -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(format!("{name}.schema.json"));
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Enough of JSON Schema for the files in `schemas/`.
fn validate(value: &Value, schema: &Value, root: &Value) -> Result<(), String> {
    if let Some(r) = schema.get("$ref").and_then(Value::as_str) {
        let name = r.strip_prefix("#/$defs/").ok_or_else(|| format!("unsupported ref {r}"))?;
        return validate(value, &root["$defs"][name], root);
    }
    if let Some(options) = schema.get("oneOf").and_then(Value::as_array) {
        let matches = options.iter().filter(|s| validate(value, s, root).is_ok()).count();
        return if matches == 1 { Ok(()) } else { Err(format!("{value} matches {matches} oneOf branches")) };
    }
    if let Some(t) = schema.get("type") {
        let types: Vec<&str> = match t {
            Value::String(s) => vec![s.as_str()],
            Value::Array(a) => a.iter().filter_map(Value::as_str).collect(),
            _ => vec![],
        };
        let ok = types.iter().any(|t| match *t {
            "object" => value.is_object(),
            "array" => value.is_array(),
            "string" => value.is_string(),
            "integer" => value.is_i64() || value.is_u64(),
            "number" => value.is_number(),
            "boolean" => value.is_boolean(),
            "null" => value.is_null(),
            _ => false,
        });
        if !ok {
            return Err(format!("{value} is not of type {t}"));
        }
    }
    if let Some(options) = schema.get("enum").and_then(Value::as_array) {
        if !options.contains(value) {
            return Err(format!("{value} not in enum"));
        }
    }
    if let (Some(min), Some(v)) = (schema.get("minimum").and_then(Value::as_f64), value.as_f64()) {
        if v < min {
            return Err(format!("{v} below minimum {min}"));
        }
    }
    if let Some(obj) = value.as_object() {
        let props = schema.get("properties").and_then(Value::as_object);
        for key in schema.get("required").and_then(Value::as_array).into_iter().flatten() {
            let key = key.as_str().unwrap();
            if !obj.contains_key(key) {
                return Err(format!("missing required field {key}"));
            }
        }
        for (k, v) in obj {
            match props.and_then(|p| p.get(k)) {
                Some(s) => validate(v, s, root).map_err(|e| format!("{k}: {e}"))?,
                None if schema.get("additionalProperties") == Some(&Value::Bool(false)) => {
                    return Err(format!("unexpected field {k}"))
                }
                None => {}
            }
        }
    }
    if let (Some(items), Some(arr)) = (schema.get("items"), value.as_array()) {
        for v in arr {
            validate(v, items, root)?;
        }
    }
    Ok(())
}

fn assert_valid(value: &Value, name: &str) {
    let s = schema(name);
    validate(value, &s, &s).unwrap_or_else(|e| panic!("{name}: {e}\n{value:#}"));
}

#[test]
fn validator_rejects_bad_documents() {
    let s = schema("verify-db");
    let good: Value = serde_json::json!({
        "n": 2, "alpha": "1/2", "theta": "1/2", "pairs_checked": 1,
        "max_violation": "0", "exact": true, "stationary_residual": "0"
    });
    assert!(validate(&good, &s, &s).is_ok());
    let mut missing = good.clone();
    missing.as_object_mut().unwrap().remove("exact");
    assert!(validate(&missing, &s, &s).is_err());
    let mut extra = good.clone();
    extra["bogus"] = Value::Null;
    assert!(validate(&extra, &s, &s).is_err());
    let mut wrong = good;
    wrong["n"] = Value::String("2".into());
    assert!(validate(&wrong, &s, &s).is_err());
}

#[test]
fn verify_db_half_half() {
    let out = efc(&["verify-db", "--alpha", "1/2", "--theta", "1/2", "--n", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_valid(&v, "verify-db");
    assert_eq!(v["max_violation"], "0");
    assert_eq!(v["stationary_residual"], "0");
    assert_eq!(v["exact"], true);
    assert_eq!(v["alpha"], "1/2");
    assert!(v["pairs_checked"].as_u64().unwrap() > 0);
}

#[test]
fn verify_db_negative_theta() {
    let out = efc(&["verify-db", "--alpha", "1/2", "--theta", "-1/4", "--n", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["theta"], "-1/4");
    assert_eq!(v["max_violation"], "0");
}

#[test]
fn eppf_prints_exact_and_decimal() {
    let out = efc(&["eppf", "--alpha", "1/2", "--theta", "0", "--shape", "1,1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "1/2\t0.5\n");
    let out = efc(&["eppf", "--alpha", "1/2", "--theta", "1/2", "--shape", "2"]);
    assert!(stdout(&out).starts_with("1/3\t"));
}

#[test]
fn rates_csv_columns() {
    let out = efc(&["rates", "--alpha", "1/2", "--theta", "1/2", "--n", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("kind,args,rate_exact,rate_float"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert!(rows.iter().all(|r| r.len() == 4));
    // beta = 1: c(2,2) = 1/(beta+1), c(3,3) = 1/((beta+1)(beta+2))
    assert!(rows.iter().any(|r| r[0] == "coag" && r[1] == "l=2 k=2" && r[2] == "1/2"));
    assert!(rows.iter().any(|r| r[0] == "coag" && r[1] == "l=3 k=3" && r[2] == "1/6"));
    assert!(rows.iter().any(|r| r[0] == "split" && r[1] == "1+1" && r[2] == "1"));
    assert!(rows.iter().any(|r| r[0] == "split_total" && r[1] == "k=3" && r[2] == "4/3"));
}

#[test]
fn stationary_matches_pd() {
    let out = efc(&["stationary", "--alpha", "1/3", "--theta", "1/4", "--n", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_valid(&v, "stationary");
    assert_eq!(v["tv_to_pd"], "0");
    assert_eq!(v["method"], "exact-elimination");
    let states = v["states"].as_array().unwrap();
    assert_eq!(states.len(), 15);
    assert!(states.iter().all(|s| s["probability"] == s["pd_probability"]));
}

#[test]
fn sample_records_follow_schema_and_are_reproducible() {
    for kind in ["gem", "pd", "crp"] {
        let args = ["sample", kind, "--alpha", "1/2", "--theta", "1", "--n", "6", "--replicas", "5", "--seed", "7", "--trunc", "200"];
        let (a, b) = (efc(&args), efc(&args));
        assert_eq!(a.status.code(), Some(0), "{kind}");
        assert_eq!(a.stdout, b.stdout, "{kind} is not deterministic");
        let text = stdout(&a);
        assert_eq!(text.lines().count(), 5);
        for line in text.lines() {
            assert_valid(&serde_json::from_str(line).unwrap(), "sample");
        }
    }
    let out = efc(&["sample", "paintbox", "--alpha", "1/2", "--theta", "1", "--n", "4", "--replicas", "3", "--masses", "0.5,0.5"]);
    assert_eq!(out.status.code(), Some(0));
    for line in stdout(&out).lines() {
        let v: Value = serde_json::from_str(line).unwrap();
        assert_valid(&v, "sample");
        assert!(v["shape"].as_array().unwrap().len() <= 2);
    }
}

#[test]
fn simulate_is_deterministic_csv() {
    let args = ["simulate", "--alpha", "1/2", "--theta", "1/2", "--n", "3", "--t-end", "2", "--grid", "4", "--replicas", "500", "--seed", "3"];
    let (a, b) = (efc(&args), efc(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,tv,se"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0][0], 0.0);
    assert_eq!(rows[3][0], 2.0);
    // the start is a point mass on {1,2,3}
    assert!(rows[0][1] > 0.5);
}

#[test]
fn split_merge_summary() {
    let out = efc(&["split-merge", "--steps", "20000", "--burn-in", "2000", "--seed", "5", "--direct-replicas", "2000"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_valid(&v, "split-merge");
    assert_eq!(v["samples"], 18000);
    assert!(v["max_mass_error"].as_f64().unwrap() < 1e-9);
}

#[test]
fn output_file_and_env_dir() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("nested").join("db.json");
    let out = efc(&["verify-db", "--alpha", "1/2", "--theta", "2", "--n", "3", "--output", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    assert_eq!(v["theta"], "2");

    let out = Command::new(env!("CARGO_BIN_EXE_efc"))
        .args(["rates", "--alpha", "1/2", "--theta", "1/2", "--n", "2"])
        .env("EFC_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(std::fs::read_to_string(dir.path().join("rates.csv")).unwrap().starts_with("kind,"));
}

#[test]
fn usage_and_domain_errors_exit_one() {
    assert_eq!(efc(&[]).status.code(), Some(1));
    assert_eq!(efc(&["verify-db", "--alpha", "1/2"]).status.code(), Some(1));
    assert_eq!(efc(&["frobnicate"]).status.code(), Some(1));
    // outside the parameter domain
    assert_eq!(efc(&["verify-db", "--alpha", "1/2", "--theta", "-1/2", "--n", "3"]).status.code(), Some(1));
    assert_eq!(efc(&["eppf", "--alpha", "0.5", "--theta", "1", "--shape", "1"]).status.code(), Some(1));
    assert_eq!(efc(&["sample", "paintbox", "--alpha", "1/2", "--theta", "1"]).status.code(), Some(1));
    assert_eq!(efc(&["--help"]).status.code(), Some(0));
}

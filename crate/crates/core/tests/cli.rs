use std::process::Command;

use serde_json::Value;

fn run(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_ttspectra"))
        .args(args)
        .env_remove("TTSPECTRA_SEED")
        .output()
        .unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn check_pair_and_min_m() {
    let (c, s) = run(&["check-pair", "--gamma-sq", "7.5,5", "--theta-sq", "6,3.5,2,1", "--m", "2"]);
    assert_eq!(c, 0);
    let v = json(&s);
    assert_eq!(v["feasible"], true);
    assert_eq!(v["summands"].as_array().unwrap().len(), 2);

    let (c, s) = run(&["min-m", "--gamma-sq", "10,2,0.5", "--theta-sq", "4,3,2.5,2,1"]);
    assert_eq!(c, 0);
    assert_eq!(json(&s)["m"], 4);

    let (c, s) = run(&["check-pair", "--gamma-sq", "4", "--theta-sq", "1,1", "--m", "1"]);
    assert_eq!(c, 1);
    assert_eq!(json(&s)["feasible"], false);

    let (c, _) = run(&["check-pair", "--gamma-sq", "10,2,0.5", "--theta-sq", "4,3,2.5,2,1", "--m", "3"]);
    assert_eq!(c, 1);
}

#[test]
fn output_is_reproducible() {
    let args = ["construct-core", "--gamma-sq", "7.5,5", "--theta-sq", "6,3.5,2,1", "--n", "2", "--seed", "5"];
    let (c1, a) = run(&args);
    let (c2, b) = run(&args);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(a, b);
    assert_eq!(json(&a)["method"], "alternating");

    let with_env = Command::new(env!("CARGO_BIN_EXE_ttspectra"))
        .args(&args[..args.len() - 2])
        .env("TTSPECTRA_SEED", "5")
        .output()
        .unwrap();
    assert_eq!(String::from_utf8(with_env.stdout).unwrap(), a);
}

#[test]
fn files_and_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let pair = dir.path().join("pair.json");
    std::fs::write(&pair, r#"{"gamma_sq": [7.5, 5], "theta_sq": [6, 3.5, 2, 1]}"#).unwrap();
    let svg = dir.path().join("hive.svg");
    let (c, _) = run(&["render", "--input", pair.to_str().unwrap(), "--m", "2", "--out", svg.to_str().unwrap()]);
    assert_eq!(c, 0);
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<?xml") && text.contains("<svg"));

    let (c, s) = run(&["screen", "--input", pair.to_str().unwrap(), "--m", "2"]);
    assert_eq!(c, 0);
    assert_eq!(json(&s)["pass"], true);

    let tensor = dir.path().join("a.json");
    std::fs::write(&tensor, r#"{"dims": [2, 2], "data": [1, 0, 0, 2]}"#).unwrap();
    let (c, s) = run(&["spectrum", "--input", tensor.to_str().unwrap()]);
    assert_eq!(c, 0);
    let spec = dir.path().join("s.json");
    std::fs::write(&spec, &s).unwrap();
    let v = json(&s);
    assert!((v["entries"][0][0].as_f64().unwrap() - 2.0).abs() < 1e-12);

    let (c, s) = run(&["construct-tensor", "--input", spec.to_str().unwrap(), "--dims", "2,2"]);
    assert_eq!(c, 0);
    assert_eq!(json(&s)["dims"], serde_json::json!([2, 2]));

    let (c, s) = run(&["combine", "--left", spec.to_str().unwrap(), "--right", spec.to_str().unwrap()]);
    assert_eq!(c, 0);
    assert!((json(&s)["norm"].as_f64().unwrap() - 10f64.sqrt()).abs() < 1e-12);

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"norm": 1.7320508075688772, "entries": [[1, 1, 1]]}"#).unwrap();
    let (c, _) = run(&["construct-tensor", "--input", bad.to_str().unwrap(), "--dims", "2,2"]);
    assert_eq!(c, 1);
}

#[test]
fn sum_relation_and_brute_force() {
    let (c, _) = run(&["sum-relation", "--lambdas", "2,0;1,0", "--nu", "2,1"]);
    assert_eq!(c, 0);
    let (c, _) = run(&["sum-relation", "--lambdas", "2,0;1,0", "--nu", "1.5,1.5"]);
    assert_eq!(c, 1);

    let (c, s) = run(&["diag-brute", "--gamma-sq", "7.5,5", "--theta-sq", "6,3.5,2,1", "--n", "2"]);
    assert_eq!(c, 1);
    assert_eq!(json(&s)["feasible"], false);
    let (c, s) = run(&["diag-brute", "--gamma-sq", "1,1,1", "--theta-sq", "2,1", "--n", "2"]);
    assert_eq!(c, 0);
    assert_eq!(json(&s)["table"]["perms"].as_array().unwrap().len(), 2);
}

#[test]
fn usage_exits_two() {
    assert_eq!(run(&[]).0, 2);
    assert_eq!(run(&["min-m", "--gamma", "1"]).0, 2);
    assert_eq!(run(&["check-pair", "--gamma", "1,3", "--theta", "1,3", "--m", "2"]).0, 2);
}

use std::fs;

use crslab::cli::run_command_with;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("crslab").chain(args.iter().copied());
    let code = run_command_with(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

#[test]
fn generate_validate_lp() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.json");
    let p = path.to_str().unwrap();
    assert_eq!(
        run(&[
            "generate",
            "tightness",
            "--L",
            "2",
            "--eps",
            "0.1",
            "--output",
            p
        ])
        .0,
        0
    );
    let (code, _, err) = run(&["validate", "--instance", p]);
    assert_eq!(code, 0, "{err}");
    let (code, out, _) = run(&["lp", "--instance", p]);
    assert_eq!(code, 0);
    assert!(
        out.starts_with("status,optimal\nobjective,2.80000\nproduct_id,x\n"),
        "{out}"
    );
}

#[test]
fn validation_failure_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(
        &path,
        r#"{"L": 1, "items": [{"id": "a", "inventory": 1}],
            "products": [{"id": "p", "items": ["a"], "reward": 1, "active_prob": 0.8, "batch": 0},
                         {"id": "q", "items": ["a"], "reward": 1, "active_prob": 0.8, "batch": 1}],
            "batches": [["p"], ["q"]]}"#,
    )
    .unwrap();
    let (code, out, _) = run(&["validate", "--instance", path.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(out.contains("item_load,a,0.600000"), "{out}");
    fs::write(&path, "{not json").unwrap();
    assert_eq!(
        run(&["validate", "--instance", path.to_str().unwrap()]).0,
        1
    );
}

#[test]
fn verify_selectability_passes_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.json");
    let p = path.to_str().unwrap();
    run(&[
        "generate",
        "tightness",
        "--L",
        "2",
        "--eps",
        "0.1",
        "--output",
        p,
    ]);
    let args = [
        "verify",
        "selectability",
        "--instance",
        p,
        "--alpha",
        "0.3333",
        "--paths",
        "100000",
        "--seed",
        "3",
    ];
    let (code, out, err) = run(&args);
    assert_eq!(code, 0, "{err}");
    assert!(out.starts_with("product_id,x,ratio,ci_lo,ci_hi\n"));
    assert!(err.contains("PASS"));
    let again = run(&[
        "--threads",
        "1",
        "verify",
        "selectability",
        "--instance",
        p,
        "--alpha",
        "0.3333",
        "--paths",
        "100000",
        "--seed",
        "3",
    ]);
    assert_eq!(again.1, out);
    // above the achievable ratio, so the cap engages
    let (code, _, err) = run(&[
        "verify",
        "selectability",
        "--instance",
        p,
        "--alpha",
        "0.45",
        "--paths",
        "100000",
    ]);
    assert_eq!(code, 1, "{err}");
}

#[test]
fn seed_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let p = path.to_str().unwrap();
    std::env::set_var("CRSLAB_SEED", "17");
    let (c1, a, _) = run(&["generate", "random", "--L", "2"]);
    let (c2, b, _) = run(&["generate", "random", "--L", "2", "--seed", "17"]);
    std::env::remove_var("CRSLAB_SEED");
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(a, b);
    run(&[
        "generate", "random", "--L", "2", "--seed", "5", "--output", p,
    ]);
    let (code, out, _) = run(&[
        "simulate",
        "ocrs",
        "--instance",
        p,
        "--mode",
        "mc",
        "--eps",
        "0.2",
        "--trials",
        "2000",
        "--seed",
        "1",
    ]);
    assert_eq!(code, 0);
    assert!(out.starts_with("product_id,x,feas_prob,ratio,ci_lo,ci_hi,capped\n"));
}

#[test]
fn simulate_and_oracles() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ro.json");
    let p = path.to_str().unwrap();
    run(&["generate", "random-order", "--L", "2", "--output", p]);
    let (code, out, _) = run(&[
        "oracle",
        "offline",
        "--instance",
        p,
        "--paths",
        "20000",
        "--seed",
        "1",
    ]);
    assert_eq!(code, 0);
    assert!(out.starts_with("mean,half_width,lp,ratio\n"));
    assert_eq!(run(&["oracle", "dp", "--instance", p]).0, 0);
    let (code, out, _) = run(&[
        "oracle",
        "enumerate",
        "--instance",
        p,
        "--alpha",
        "baseline",
    ]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 7);
    for scheme in ["attenuate", "greedy"] {
        let (code, out, _) = run(&[
            "simulate",
            "rcrs",
            "--scheme",
            scheme,
            "--instance",
            p,
            "--paths",
            "5000",
        ]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().count(), 7);
    }
    // the plane instance has batches of two, which the recursive scheme rejects
    assert_eq!(
        run(&[
            "simulate",
            "rcrs",
            "--scheme",
            "recursive",
            "--instance",
            p,
            "--paths",
            "10"
        ])
        .0,
        1
    );
    let (code, out, _) = run(&["selection-function", "--L", "2", "--grid", "1000"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 1002);
    let (code, out, _) = run(&[
        "selection-function",
        "--L",
        "3",
        "--grid",
        "1000",
        "--out",
        "json",
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["L"], 3);
}

#[test]
fn reduce_and_run_online() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sys.json");
    fs::write(
        &path,
        r#"{"periods": 2,
            "products": [{"id": "j1", "items": ["a"], "reward": 1.0},
                         {"id": "j2", "items": ["a"], "reward": 2.0}],
            "inventories": {"a": 2},
            "actions": [[{"id": "null", "phi": {}}, {"id": "offer", "phi": {"j1": 0.7}}],
                        [{"id": "null", "phi": {}}, {"id": "offer", "phi": {"j2": 0.7}}]]}"#,
    )
    .unwrap();
    let p = path.to_str().unwrap();
    let (code, out, err) = run(&["reduce", "--system", p]);
    assert_eq!(code, 0, "{err}");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["dummies"], serde_json::json!([0, 1]));
    assert_eq!(v["mapping"].as_array().unwrap().len(), 3);
    assert_eq!(v["valid"], true);
    let (code, out, err) = run(&[
        "run-online",
        "--system",
        p,
        "--alpha",
        "auto",
        "--paths",
        "20000",
        "--seed",
        "4",
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(out.starts_with("copy_id,product_id,period,x,target,sale_freq,ci_lo,ci_hi\n"));
    assert_eq!(out.lines().count(), 4);
    assert!(err.contains("alpha_lp="));
}

#[test]
fn usage_errors() {
    assert_eq!(run(&["simulate", "ocrs", "--nope"]).0, 2);
    assert_eq!(run(&["frobnicate"]).0, 2);
    assert_eq!(run(&["guarantees", "--L", "3..2"]).0, 2);
    let (code, out, _) = run(&["guarantees", "--L", "2"]);
    assert_eq!(code, 0);
    assert!(out
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("2,0.333333,0.481481,0.666667,0.432332,0.333363,"));
}

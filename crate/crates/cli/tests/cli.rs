use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_graphlhv"))
        .args(args)
        .arg("--quiet")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn oracle_verdicts_and_expectations() {
    let out = run(&[
        "oracle",
        "--graph",
        "chain2",
        "--measurement",
        "YY",
        "--statevector",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema"], "graphlhv.report/1");
    assert_eq!(
        v["result"]["verdict"],
        serde_json::json!({"kind": "Deterministic", "value": 1})
    );
    assert_eq!(v["result"]["statevector"], v["result"]["verdict"]);
    assert_eq!(v["inputs"]["measurement"]["value"], "YY");
    assert_eq!(
        v["inputs"]["measurement"]["sha256"].as_str().unwrap().len(),
        64
    );

    let wrong = run(&[
        "oracle",
        "--graph",
        "chain:2",
        "--measurement",
        "YY",
        "--expect",
        "-1",
    ]);
    assert_eq!(wrong.status.code(), Some(1));
}

#[test]
fn usage_and_parse_errors_exit_2() {
    assert_eq!(
        run(&["oracle", "--graph", "ring:3", "--measurement", "XQX"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["oracle", "--graph", "ring:3", "--measurement", "XX"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["oracle", "--graph", "/no/such/file", "--measurement", "XX"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["oracle", "--measurement", "XX"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["chain", "verify", "--n", "8"]).status.code(), Some(2));
}

#[test]
fn graph_files() {
    let dir = tempfile::tempdir().unwrap();
    let json_path = dir.path().join("tri.json");
    std::fs::write(&json_path, r#"{"n": 3, "edges": [[1, 2], [2, 3], [1, 3]]}"#).unwrap();
    let out = run(&[
        "oracle",
        "--graph",
        json_path.to_str().unwrap(),
        "--measurement",
        "XZZ",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["result"]["verdict"]["value"], 1);

    let list_path = dir.path().join("tri.txt");
    std::fs::write(&list_path, "# triangle\n3\n1 2\n2 3\n1 3\n").unwrap();
    let out = run(&[
        "oracle",
        "--graph",
        list_path.to_str().unwrap(),
        "--measurement",
        "XZZ",
    ]);
    assert_eq!(json(&out)["result"]["verdict"]["value"], 1);

    std::fs::write(&list_path, "3\n1 2\n2 9\n").unwrap();
    assert_eq!(
        run(&[
            "oracle",
            "--graph",
            list_path.to_str().unwrap(),
            "--measurement",
            "XZZ"
        ])
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn lhv_exact_and_sampled() {
    let out = run(&[
        "lhv",
        "run",
        "--graph",
        "grid:2x3",
        "--measurement",
        "YYYYYY",
        "--subset",
        "1,2,3,5",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["result"]["oracle"]["value"], -1);
    assert_eq!(v["result"]["product"]["outcome"]["verdict"]["value"], 1);

    let args = [
        "lhv",
        "run",
        "--graph",
        "ring:30",
        "--measurement",
        &"X".repeat(30),
        "--samples",
        "200",
        "--seed",
        "7",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["result"]["product"]["outcome"]["seed"], 7);
    assert_eq!(v["result"]["product"]["outcome"]["samples"], 200);
}

#[test]
fn verify_sub_distinguishes_documented_failures() {
    let out = run(&[
        "verify-sub",
        "--graph",
        "grid2x3",
        "--measurement",
        "YYYYYY",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let subsets: Vec<&Value> = v["result"]["report"]["mismatches"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| &e["subset"])
        .collect();
    assert!(subsets.contains(&&serde_json::json!([1, 2, 3, 5])));
    assert!(v["result"]["documented_failure"].is_string());

    let ring = run(&[
        "verify-sub",
        "--graph",
        "ring:12",
        "--measurement",
        "YXYYYXYYYXYY",
        "--rule",
        "no-communication",
    ]);
    assert_eq!(ring.status.code(), Some(1));

    let star = run(&["verify-sub", "--graph", "star:5", "--measurement", "XYYZX"]);
    assert_eq!(star.status.code(), Some(0));
}

#[test]
fn nogo_commands() {
    let out = run(&["nogo", "ring", "--f", "1", "--d", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(
        v["result"]["solution"]["certificate"],
        serde_json::json!([0, 1, 2, 3, 4])
    );
    assert_eq!(v["result"]["equations"].as_array().unwrap().len(), 5);

    let padded = run(&["nogo", "ring", "--n", "36"]);
    assert_eq!(padded.status.code(), Some(0));
    assert_eq!(json(&padded)["result"]["d"], 5);

    let full = run(&["nogo", "ring", "--f", "1", "--d", "6"]);
    assert_eq!(full.status.code(), Some(0));
    assert_eq!(json(&full)["result"]["solution"]["status"], "consistent");

    let site = run(&[
        "nogo",
        "site-invariance",
        "--graph",
        "grid:2x3",
        "--measurement",
        "YYYYYY",
    ]);
    assert_eq!(site.status.code(), Some(0));
    assert_eq!(json(&site)["result"]["solution"]["status"], "inconsistent");
}

#[test]
fn chain_commands() {
    let out = run(&["chain", "decompose", "--measurement", "YXYIYYZZXZ"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["result"]["decomposition"]["sign"], -1);
    assert_eq!(
        v["result"]["decomposition"]["sentences"]
            .as_array()
            .unwrap()
            .len(),
        2
    );
    assert_eq!(
        v["result"]["decomposition"]["sentences"][0]["left"],
        "virtual"
    );
    assert_eq!(v["result"]["decomposition"]["sentences"][0]["right"], 7);

    let bad = run(&["chain", "decompose", "--measurement", "XZX"]);
    assert_eq!(bad.status.code(), Some(0));
    assert_eq!(json(&bad)["result"]["stabilizer"], false);

    let verify = run(&["chain", "verify", "--n", "4"]);
    assert_eq!(verify.status.code(), Some(0));
    let sampled = [
        "chain",
        "verify",
        "--n",
        "9",
        "--sample",
        "100",
        "--seed",
        "3",
        "--broadcast-y",
    ];
    let a = run(&sampled);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, run(&sampled).stdout);
}

#[test]
fn reproductions() {
    for fig in ["fig1", "fig2"] {
        assert_eq!(run(&["reproduce", fig]).status.code(), Some(0), "{fig}");
    }
    let seq = Command::new(env!("CARGO_BIN_EXE_graphlhv"))
        .args(["reproduce", "fig2", "--sequential", "--quiet"])
        .output()
        .unwrap();
    let par = run(&["reproduce", "fig2"]);
    let strip = |o: &Output| {
        let mut v = json(o);
        v["command"] = Value::Null;
        v["exec"] = Value::Null;
        v
    };
    assert_eq!(strip(&seq), strip(&par));
}

#[test]
fn version_flag() {
    let out = Command::new(env!("CARGO_BIN_EXE_graphlhv"))
        .arg("--version")
        .output()
        .unwrap();
    assert!(String::from_utf8_lossy(&out.stdout).contains(env!("CARGO_PKG_VERSION")));
}

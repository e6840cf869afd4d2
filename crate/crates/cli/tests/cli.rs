use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn asmplan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_asmplan"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let out = asmplan(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn orasp_plan_on_four_brick() {
    let plan = ok_json(&[
        "plan",
        "--preset",
        "4brick",
        "--reward",
        "completion",
        "--planner",
        "orasp",
    ]);
    assert_eq!(plan["total_reward"], -3.0);
    assert_eq!(plan["planner"], "orasp");
    let d: Vec<u64> = serde_json::from_value(plan["disassembly"].clone()).unwrap();
    let a: Vec<u64> = serde_json::from_value(plan["assembly"].clone()).unwrap();
    assert_eq!(d.iter().rev().copied().collect::<Vec<_>>(), a);
    assert_eq!(plan["per_step"].as_array().unwrap().len(), 3);
}

#[test]
fn planners_agree_through_the_cli() {
    let mut totals = Vec::new();
    for planner in ["vi", "dijkstra", "bellman-ford", "orasp", "oracle"] {
        let plan = ok_json(&[
            "plan",
            "--preset",
            "table",
            "--reward",
            "cubesat_fuel",
            "--planner",
            planner,
        ]);
        totals.push(plan["total_reward"].as_f64().unwrap());
    }
    for t in &totals {
        assert!((t - totals[0]).abs() <= 1e-9, "{totals:?}");
    }
}

#[test]
fn identical_arguments_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    for planner in ["dijkstra", "orasp"] {
        let mut bytes = Vec::new();
        for run in 0..2 {
            let out = dir.path().join(format!("{planner}{run}.json"));
            let st = asmplan(&[
                "plan",
                "--preset",
                "hubble",
                "--seed",
                "3",
                "--reward",
                "cubesat_fuel",
                "--planner",
                planner,
                "--no-runtime",
                "--out",
                path_str(&out),
            ]);
            assert!(st.status.success());
            bytes.push(std::fs::read(&out).unwrap());
        }
        assert_eq!(bytes[0], bytes[1], "{planner}");
    }
    let csv: Vec<Vec<u8>> = (0..2)
        .map(|_| {
            asmplan(&[
                "baseline",
                "--preset",
                "iss",
                "--samples",
                "20",
                "--seed",
                "7",
            ])
            .stdout
        })
        .collect();
    assert_eq!(csv[0], csv[1]);
}

#[test]
fn validate_accepts_plan_output_with_the_same_total() {
    let dir = tempfile::tempdir().unwrap();
    let plan_path = dir.path().join("plan.json");
    let out = asmplan(&[
        "plan",
        "--preset",
        "lattice",
        "--reward",
        "min_travel",
        "--out",
        path_str(&plan_path),
    ]);
    assert!(out.status.success());
    let plan: Value = serde_json::from_slice(&std::fs::read(&plan_path).unwrap()).unwrap();
    let report = ok_json(&[
        "validate",
        "--preset",
        "lattice",
        "--reward",
        "min_travel",
        "--sequence",
        path_str(&plan_path),
    ]);
    assert_eq!(report["valid"], true);
    assert_eq!(report["total_reward"], plan["total_reward"]);
}

#[test]
fn validate_reports_violations() {
    let dir = tempfile::tempdir().unwrap();
    let structure = dir.path().join("s.json");
    let mut doc: Value =
        serde_json::from_slice(&asmplan(&["gen", "--preset", "4brick"]).stdout).unwrap();
    doc["constraints"] = serde_json::json!({"precedence": [{"before": 1, "after": 0}]});
    std::fs::write(&structure, doc.to_string()).unwrap();

    let seq = dir.path().join("seq.json");
    std::fs::write(&seq, r#"{"disassembly": [0, 1, 2]}"#).unwrap();
    let out = asmplan(&[
        "validate",
        "--structure",
        path_str(&structure),
        "--sequence",
        path_str(&seq),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["valid"], false);
    assert_eq!(report["violation"]["reason"], "precedence");
    assert_eq!(report["violation"]["blocking"], 1);
    assert!(report["total_reward"].is_null());

    std::fs::write(&seq, r#"{"assembly": [0, 2, 1]}"#).unwrap();
    let ok = ok_json(&[
        "validate",
        "--structure",
        path_str(&structure),
        "--sequence",
        path_str(&seq),
        "--reward",
        "completion",
    ]);
    assert_eq!(ok["disassembly"], serde_json::json!([1, 2, 0]));
    assert_eq!(ok["total_reward"], -3.0);

    std::fs::write(&seq, r#"{"disassembly": [1, 2, 0], "assembly": [1, 2, 0]}"#).unwrap();
    let out = asmplan(&[
        "validate",
        "--structure",
        path_str(&structure),
        "--sequence",
        path_str(&seq),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn baseline_csv_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("b.csv");
    let report_path = dir.path().join("r.json");
    let out = asmplan(&[
        "baseline",
        "--preset",
        "table",
        "--samples",
        "100",
        "--seed",
        "7",
        "--reward",
        "cubesat_fuel",
        "--out",
        path_str(&csv_path),
        "--planner",
        "dijkstra",
        "--report",
        path_str(&report_path),
    ]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "sample,total");
    assert_eq!(rows.len(), 101);
    let report: Value = serde_json::from_slice(&std::fs::read(&report_path).unwrap()).unwrap();
    let opt = report["comparison"]["optimal_total"].as_f64().unwrap();
    for row in &rows[1..] {
        let total: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
        assert!(total <= opt + 1e-9);
    }
    assert!(report["comparison"]["baseline_max"].as_f64().unwrap() <= opt + 1e-9);
}

#[test]
fn stats_dump_and_replan() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("h.txt");
    let growth = dir.path().join("g.csv");
    let stats = ok_json(&[
        "stats",
        "--preset",
        "4brick",
        "--reward",
        "completion",
        "--dump",
        path_str(&dump),
        "--growth",
        path_str(&growth),
        "--growth-max",
        "5",
    ]);
    assert_eq!(stats["nodes"], 8);
    assert_eq!(stats["edges"], 12);
    let g = std::fs::read_to_string(&growth).unwrap();
    assert_eq!(g.lines().nth(3).unwrap(), "3,8,12,16");

    let plan = ok_json(&[
        "replan",
        "--preset",
        "4brick",
        "--reward",
        "completion",
        "--graph",
        path_str(&dump),
        "--block",
        "7:0",
        "--block",
        "7:2",
    ]);
    assert_eq!(plan["disassembly"][0], 1);
    assert_eq!(plan["total_reward"], -3.0);
    assert_eq!(plan["replan"]["blocked"], serde_json::json!(["7:0", "7:2"]));

    let all = asmplan(&[
        "replan",
        "--preset",
        "4brick",
        "--reward",
        "completion",
        "--block",
        "7:0",
        "--block",
        "7:1",
        "--block",
        "7:2",
    ]);
    assert_eq!(all.status.code(), Some(3));
    let err = String::from_utf8(all.stderr).unwrap();
    assert!(err.starts_with("error: infeasible: "), "{err}");
    assert_eq!(err.lines().count(), 1);

    let bad = asmplan(&["replan", "--preset", "4brick", "--block", "zz:0"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn export_env_and_gen() {
    let spec = ok_json(&[
        "export-env",
        "--preset",
        "hubble",
        "--reward",
        "cubesat_fuel",
        "--seed",
        "5",
    ]);
    assert_eq!(spec["conformance"].as_array().unwrap().len(), 32);
    assert_eq!(
        spec["structure"]["connections"].as_array().unwrap().len(),
        19
    );
    assert_eq!(spec["curriculum"]["k_start"], 2);

    let bad = asmplan(&["export-env", "--preset", "4brick", "--eps-end", "0"]);
    assert_eq!(bad.status.code(), Some(2));

    let g = ok_json(&["gen", "--preset", "2x3"]);
    assert_eq!(g["parts"].as_array().unwrap().len(), 6);
    assert_eq!(g["connections"].as_array().unwrap().len(), 7);
    let unknown = asmplan(&["gen", "--preset", "nope"]);
    assert_eq!(unknown.status.code(), Some(2));
}

#[test]
fn error_exit_codes() {
    let cap = asmplan(&["plan", "--preset", "jwst", "--planner", "dijkstra"]);
    assert_eq!(cap.status.code(), Some(4));
    assert!(String::from_utf8(cap.stderr)
        .unwrap()
        .starts_with("error: cap-exceeded: "));

    let io = asmplan(&["plan", "--structure", "/definitely/missing.json"]);
    assert_eq!(io.status.code(), Some(5));

    let usage = asmplan(&["plan", "--preset", "4brick", "--planner", "astar"]);
    assert_eq!(usage.status.code(), Some(2));

    let reward = asmplan(&["plan", "--preset", "4brick", "--reward", "fastest"]);
    assert_eq!(reward.status.code(), Some(2));
}

#[test]
fn reward_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let r = dir.path().join("reward.json");
    std::fs::write(&r, r#"{"kind": "completion", "shift": 0.5}"#).unwrap();
    let plan = ok_json(&["plan", "--preset", "4brick", "--reward", path_str(&r)]);
    assert_eq!(plan["total_reward"], -4.5);
}

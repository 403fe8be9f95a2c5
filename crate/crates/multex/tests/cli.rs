//! End-to-end tests of the command-line interface: exit codes, input
//! validation, and byte-level determinism of every output artifact.

use std::path::Path;
use std::process::{Command, Output};

const DECOUPLED: &str = r#"{"classes":2,"a":[0.2,0.6],"b":[[0.0,0.0],[0.0,0.0]],"rho":[1.0,1.0],"q":[0.5,0.5],"steps":50}"#;

fn multex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_multex"))
        .args(args)
        .env_remove("MULTEX_OUTDIR")
        .output()
        .expect("binary runs")
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("utf-8 stderr")
}

fn write_model(dir: &Path, text: &str) -> String {
    let path = dir.join("model.json");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut entries: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_str().unwrap().to_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    entries.sort_by(|x, y| x.0.cmp(&y.0));
    entries
}

#[test]
fn verify_oracle_reports_pass_in_text_and_json() {
    let text = multex(&[
        "verify-oracle",
        "--sizes",
        "2,2",
        "--alphabets",
        "2,2",
        "--trials",
        "25",
        "--seed",
        "7",
    ]);
    assert_eq!(exit_code(&text), 0, "{}", stderr(&text));
    assert!(stdout(&text).contains("result: PASS"));
    assert!(stdout(&text).contains("trials: 25"));

    let json = multex(&[
        "verify-oracle",
        "--sizes",
        "2,2",
        "--alphabets",
        "2,2",
        "--trials",
        "25",
        "--seed",
        "7",
        "--json",
    ]);
    assert_eq!(exit_code(&json), 0);
    let report: serde_json::Value = serde_json::from_str(&stdout(&json)).unwrap();
    assert_eq!(report["pass"], serde_json::json!(true));
    assert_eq!(report["seed"], serde_json::json!(7));
    assert_eq!(report["failures"], serde_json::json!(0));
    assert_eq!(report["counterexamples"], serde_json::json!([]));
}

#[test]
fn verify_oracle_zero_trials_is_a_vacuous_pass() {
    let output = multex(&[
        "verify-oracle",
        "--sizes",
        "2",
        "--alphabets",
        "2",
        "--trials",
        "0",
    ]);
    assert_eq!(exit_code(&output), 0);
    assert!(stdout(&output).contains("trials: 0"));
}

#[test]
fn verify_oracle_rejects_infeasible_shapes() {
    let output = multex(&[
        "verify-oracle",
        "--sizes",
        "30,30",
        "--alphabets",
        "10,10",
        "--trials",
        "1",
    ]);
    assert_eq!(exit_code(&output), 2);
    assert!(stderr(&output).contains("state space too large"));

    let capped = multex(&[
        "verify-oracle",
        "--sizes",
        "2,2",
        "--alphabets",
        "2,2",
        "--trials",
        "1",
        "--enum-cap",
        "10",
    ]);
    assert_eq!(exit_code(&capped), 2);
}

#[test]
fn tv_bound_tabulates_exact_rationals() {
    let wide = multex(&["tv-bound", "--max-n", "6", "--max-k", "3", "--alphabet", "3"]);
    assert_eq!(exit_code(&wide), 0, "{}", stderr(&wide));
    let table = stdout(&wide);
    assert!(table.starts_with("N,k,worst_tv,intermediate_bound,final_bound\n"));
    // Two distinct atoms at N=k=2 attain the bound exactly.
    assert!(table.contains("\n2,2,1,1,1\n"));
    // Three distinct atoms attain the intermediate bound at N=3, k=2.
    assert!(table.contains("\n3,2,2/3,2/3,2/3\n"));
    assert!(table.contains("\n6,3,22/45,8/9,1\n"));

    // On a binary alphabet the N=3, k=2 worst case is (a,a,b).
    let binary = multex(&["tv-bound", "--max-n", "3", "--max-k", "2", "--alphabet", "2"]);
    assert_eq!(exit_code(&binary), 0);
    assert!(stdout(&binary).contains("\n3,2,4/9,2/3,2/3\n"));
}

#[test]
fn tv_bound_writes_the_table_to_a_file_on_request() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("table.csv");
    let output = multex(&[
        "tv-bound",
        "--max-n",
        "4",
        "--max-k",
        "2",
        "--alphabet",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 0);
    assert!(stdout(&output).contains("all bounds hold: true"));
    let table = std::fs::read_to_string(&out).unwrap();
    assert!(table.contains("\n4,2,5/12,1/2,1/2\n"));
}

#[test]
fn tv_bound_rejects_inverted_ranges() {
    let output = multex(&["tv-bound", "--max-n", "2", "--max-k", "3", "--alphabet", "2"]);
    assert_eq!(exit_code(&output), 2);
    assert!(stderr(&output).contains("max-k"));
}

#[test]
fn simulate_is_byte_deterministic_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    let mut stdouts = Vec::new();
    for out in [&out_a, &out_b] {
        let output = multex(&[
            "simulate",
            "--n",
            "10,20",
            "--steps",
            "5",
            "--reps",
            "20",
            "--seed",
            "9",
            "--outdir",
            out.to_str().unwrap(),
        ]);
        assert_eq!(exit_code(&output), 0, "{}", stderr(&output));
        stdouts.push(stdout(&output));
    }
    assert_eq!(stdouts[0], stdouts[1]);
    let bytes_a = dir_bytes(&out_a);
    assert_eq!(bytes_a, dir_bytes(&out_b));
    let names: Vec<&str> = bytes_a.iter().map(|(name, _)| name.as_str()).collect();
    assert_eq!(
        names,
        vec![
            "run_config.json",
            "tagged_n10.csv",
            "tagged_n20.csv",
            "trajectories_n10.csv",
            "trajectories_n20.csv",
        ]
    );
}

#[test]
fn simulate_rejects_models_with_missing_fields_naming_them() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(
        dir.path(),
        r#"{"classes":2,"a":[0.2,0.6],"b":[[0.0,0.0],[0.0,0.0]],"q":[0.5,0.5],"steps":5}"#,
    );
    let output = multex(&[
        "simulate",
        "--model",
        &model,
        "--n",
        "10",
        "--reps",
        "2",
        "--outdir",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 2);
    assert!(stderr(&output).contains("rho"), "{}", stderr(&output));
}

#[test]
fn simulate_with_zero_steps_records_only_the_initial_condition() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(dir.path(), DECOUPLED);
    let out = dir.path().join("out");
    let output = multex(&[
        "simulate",
        "--model",
        &model,
        "--n",
        "10",
        "--steps",
        "0",
        "--reps",
        "3",
        "--seed",
        "2",
        "--outdir",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 0, "{}", stderr(&output));
    let table = std::fs::read_to_string(out.join("trajectories_n10.csv")).unwrap();
    let steps: std::collections::BTreeSet<&str> = table
        .lines()
        .skip(2)
        .map(|line| line.split(',').nth(1).unwrap())
        .collect();
    assert_eq!(steps.into_iter().collect::<Vec<_>>(), vec!["0"]);
}

#[test]
fn simulate_rejects_unsorted_size_lists() {
    let dir = tempfile::tempdir().unwrap();
    let output = multex(&[
        "simulate",
        "--n",
        "20,10",
        "--reps",
        "2",
        "--outdir",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 2);
    assert!(stderr(&output).contains("strictly increasing"));
}

#[test]
fn simulate_takes_the_output_directory_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("from_env");
    let output = Command::new(env!("CARGO_BIN_EXE_multex"))
        .args(["simulate", "--n", "10", "--steps", "2", "--reps", "2", "--seed", "3"])
        .env("MULTEX_OUTDIR", &out)
        .output()
        .expect("binary runs");
    assert_eq!(exit_code(&output), 0, "{}", stderr(&output));
    assert!(out.join("run_config.json").exists());
}

#[test]
fn simulate_seed_zero_draws_a_nonzero_seed_and_echoes_it() {
    let dir = tempfile::tempdir().unwrap();
    let mut seeds = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let output = multex(&[
            "simulate",
            "--n",
            "10",
            "--steps",
            "2",
            "--reps",
            "2",
            "--seed",
            "0",
            "--outdir",
            out.to_str().unwrap(),
        ]);
        assert_eq!(exit_code(&output), 0, "{}", stderr(&output));
        let config: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.join("run_config.json")).unwrap())
                .unwrap();
        seeds.push(config["seed"].as_u64().unwrap());
    }
    assert!(seeds.iter().all(|&seed| seed != 0));
    assert_ne!(seeds[0], seeds[1]);
}

#[test]
fn chaos_report_passes_on_an_independent_single_size_run() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(dir.path(), DECOUPLED);
    let out = dir.path().join("out");
    let simulate = multex(&[
        "simulate",
        "--model",
        &model,
        "--n",
        "50",
        "--reps",
        "100",
        "--seed",
        "4",
        "--outdir",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&simulate), 0, "{}", stderr(&simulate));
    let report = multex(&["chaos-report", "--indir", out.to_str().unwrap()]);
    assert_eq!(exit_code(&report), 0, "{}", stderr(&report));
    assert!(out.join("report.csv").exists());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["all_pass"], serde_json::json!(true));
    // A single-size run carries only the terminal-independence flag.
    assert_eq!(
        summary["flags"],
        serde_json::json!({ "terminal_independence": true })
    );
}

#[test]
fn chaos_report_passes_on_the_default_coupled_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let simulate = multex(&[
        "simulate",
        "--n",
        "10,100",
        "--reps",
        "60",
        "--seed",
        "1",
        "--outdir",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&simulate), 0, "{}", stderr(&simulate));
    let report = multex(&["chaos-report", "--indir", out.to_str().unwrap()]);
    assert_eq!(exit_code(&report), 0, "{}", stderr(&report));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["all_pass"], serde_json::json!(true));
    assert_eq!(summary["flags"]["no_covariance_growth"], serde_json::json!(true));
    assert_eq!(
        summary["flags"]["concentration_decreasing"],
        serde_json::json!(true)
    );
}

#[test]
fn chaos_report_rejects_directories_without_runs() {
    let dir = tempfile::tempdir().unwrap();
    let output = multex(&["chaos-report", "--indir", dir.path().to_str().unwrap()]);
    assert_eq!(exit_code(&output), 2);
    assert!(stderr(&output).contains("no trajectories"));
}

#[test]
fn chaos_report_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(dir.path(), DECOUPLED);
    let run = dir.path().join("run");
    let simulate = multex(&[
        "simulate",
        "--model",
        &model,
        "--n",
        "10,20",
        "--steps",
        "3",
        "--reps",
        "30",
        "--seed",
        "6",
        "--outdir",
        run.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&simulate), 0, "{}", stderr(&simulate));
    let mut stdouts = Vec::new();
    for name in ["report_a", "report_b"] {
        let out = dir.path().join(name);
        let report = multex(&[
            "chaos-report",
            "--indir",
            run.to_str().unwrap(),
            "--outdir",
            out.to_str().unwrap(),
        ]);
        assert_eq!(exit_code(&report), 0, "{}", stderr(&report));
        stdouts.push(stdout(&report));
    }
    assert_eq!(stdouts[0], stdouts[1]);
    assert_eq!(
        dir_bytes(&dir.path().join("report_a")),
        dir_bytes(&dir.path().join("report_b"))
    );
}

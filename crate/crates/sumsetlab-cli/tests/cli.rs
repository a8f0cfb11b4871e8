//! End-to-end checks of the binary: output shapes, JSON round-trips, and the
//! exit-code contract.

use std::process::{Command, Output};

use sumsetlab::verifier::{ScanReport, Verdict};

fn sumsetlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sumsetlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

#[test]
fn analyze_reports_pass_with_expected_numbers() {
    let out = sumsetlab(&["analyze", "--a", "0,1,2,3", "--b", "0,1,2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["main"]["r"], -1);
    assert_eq!(v["main"]["s"], 2);
    assert_eq!(v["main"]["threshold"]["num"], 15);
    assert_eq!(v["main"]["threshold"]["den"], 2);
    assert_eq!(v["verdict"], "PASS");
}

#[test]
fn analyze_small_b_is_vacuous_overall_ok() {
    let out = sumsetlab(&["analyze", "--a", "0", "--b", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["main"]["verdict"], "VACUOUS");
    assert!(v["main"]["note"].as_str().unwrap().contains("|B|"));
}

#[test]
fn malformed_literal_exits_one_with_location() {
    let out = sumsetlab(&["analyze", "--a", "0,,2", "--b", "0,1,2"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("byte 2"), "stderr: {err}");
}

#[test]
fn unknown_flag_exits_one() {
    let out = sumsetlab(&["analyze", "--a", "0,1", "--b", "0,1", "--bogus"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn mode_flag_mismatch_exits_one() {
    let out = sumsetlab(&["scan", "--mode", "kneser", "--x-max", "10"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("--x-max"), "stderr: {err}");
}

#[test]
fn scan_report_round_trips_and_exits_zero() {
    let out = sumsetlab(&["scan", "--mode", "main-theorem", "--max-diam", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let report: ScanReport = serde_json::from_slice(&out.stdout).expect("typed report parses");
    assert_eq!(report.counts.fail, 0);
    assert!(report.counts.pass > 0);
    // Progress goes to stderr.
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("scan:"), "stderr: {err}");
}

#[test]
fn scan_shards_are_deterministic_and_partition() {
    let full = stdout_json(&sumsetlab(&[
        "scan",
        "--mode",
        "classic-3k4",
        "--max-diam",
        "6",
    ]));
    let mut pass = 0u64;
    let mut vacuous = 0u64;
    for index in 0..3 {
        let shard = format!("{index}/3");
        let fst = sumsetlab(&[
            "scan", "--mode", "classic-3k4", "--max-diam", "6", "--shard", &shard,
        ]);
        let snd = sumsetlab(&[
            "scan", "--mode", "classic-3k4", "--max-diam", "6", "--shard", &shard,
        ]);
        let a = stdout_json(&fst);
        let b = stdout_json(&snd);
        assert_eq!(a["counts"], b["counts"], "shard {index} not deterministic");
        pass += a["counts"]["pass"].as_u64().unwrap();
        vacuous += a["counts"]["vacuous"].as_u64().unwrap();
    }
    assert_eq!(pass, full["counts"]["pass"].as_u64().unwrap());
    assert_eq!(vacuous, full["counts"]["vacuous"].as_u64().unwrap());
}

#[test]
fn scan_guard_violation_exits_one() {
    let out = sumsetlab(&["scan", "--mode", "main-theorem", "--max-diam", "30"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn family_d_reports_tight_cover() {
    let out = sumsetlab(&[
        "family", "d", "--size-b", "5", "--r", "1", "--size-a", "10",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["check"]["ok"], true);
    assert_eq!(v["instance"]["b"], serde_json::json!([0, 1, 2, 3, 6]));
}

#[test]
fn family_rejects_bad_params() {
    let out = sumsetlab(&["family", "c", "--size-b", "4", "--size-a", "6", "--s", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn modred_defaults_report_both_bounds() {
    let out = sumsetlab(&["modred", "--a", "0,1,2", "--b", "0,1,3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["layered_bound"], 6);
    assert_eq!(v["corollary"]["bound"], 6);
    assert_eq!(v["actual"], 6);
    assert_eq!(v["sound"], true);
}

#[test]
fn lift_reports_row_sizes_and_isomorphism() {
    let out = sumsetlab(&[
        "lift", "--a", "0,1,10", "--b", "0,1,11", "--n", "10", "--d", "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["a_rows"], serde_json::json!([2, 1]));
    assert_eq!(v["b_rows"], serde_json::json!([1, 2]));
    assert_eq!(v["coincidence_preserving"], true);
    assert_eq!(v["image_sum_size"], v["original_sum_size"]);
}

#[test]
fn lift_hypothesis_violation_exits_one() {
    let out = sumsetlab(&[
        "lift", "--a", "0,1,10", "--b", "0,1,11", "--n", "10", "--d", "3",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("lift hypothesis"), "stderr: {err}");
}

#[test]
fn bounds_s_emits_threshold_fields() {
    let out = sumsetlab(&["bounds", "s", "--a", "5", "--b", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["s"], 2);
    assert_eq!(v["threshold_num"], "21");
    assert_eq!(v["threshold_den"], "2");
}

#[test]
fn bounds_redcalc_oracle_agrees() {
    let out = sumsetlab(&["bounds", "redcalc", "--x", "5", "--y", "4", "--oracle"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["closed_form"], 11);
    assert_eq!(v["oracle_value"], 11);
    assert_eq!(v["oracle_argmin"], serde_json::json!([2, 2]));
    assert_eq!(v["agree"], true);
}

#[test]
fn set_input_from_file() {
    let dir = std::env::temp_dir().join("sumsetlab-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("a.set");
    std::fs::write(&path, "[0, 1, 2, 3]\n").unwrap();
    let out = sumsetlab(&[
        "analyze",
        "--a-file",
        path.to_str().unwrap(),
        "--b",
        "0,1,2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["verdict"], "PASS");
}

#[test]
fn giving_both_literal_and_file_is_a_usage_error() {
    let out = sumsetlab(&[
        "analyze", "--a", "0,1", "--a-file", "/tmp/x", "--b", "0,1",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn table_format_renders_counts() {
    let out = sumsetlab(&[
        "scan",
        "--mode",
        "redcalc",
        "--x-max",
        "10",
        "--y-max",
        "6",
        "--format",
        "table",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("pass"), "stdout: {text}");
}

#[test]
fn workers_flag_and_env_are_accepted() {
    let out = sumsetlab(&[
        "--workers", "1", "scan", "--mode", "main-theorem", "--max-diam", "5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let via_env = Command::new(env!("CARGO_BIN_EXE_sumsetlab"))
        .env("SUMSETLAB_WORKERS", "2")
        .args(["scan", "--mode", "main-theorem", "--max-diam", "5"])
        .output()
        .unwrap();
    assert_eq!(via_env.status.code(), Some(0));
    assert_eq!(
        stdout_json(&out)["counts"],
        stdout_json(&via_env)["counts"]
    );
}

#[test]
fn verdict_type_round_trips() {
    // The typed forms parse back from emitted JSON.
    let out = sumsetlab(&["analyze", "--a", "0,2,4,5,6", "--b", "0,2,4,5,6"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    let main: sumsetlab::verifier::Certificate =
        serde_json::from_value(v["main"].clone()).unwrap();
    assert_eq!(main.verdict, Verdict::Pass);
    let classic: sumsetlab::verifier::Certificate3k4 =
        serde_json::from_value(v["classic"].clone()).unwrap();
    assert_eq!(classic.r, 1);
}

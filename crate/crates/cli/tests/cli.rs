//! Black-box tests of the `driftbench` binary: exit codes, file outputs,
//! overrides, generation determinism and the worker-process path.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_driftbench"))
}

fn write_config(dir: &Path, extra: &str) -> std::path::PathBuf {
    let path = dir.join("bench.cfg");
    std::fs::write(
        &path,
        format!(
            "dataset.kind = synthetic\n\
             dataset.name = demo\n\
             dataset.n_samples = 1500\n\
             dataset.drift_points = 900\n\
             approach = IKS\n\
             repetitions = 1\n\
             seed = 5\n\
             {extra}"
        ),
    )
    .unwrap();
    path
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn run_happy_path_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "");
    let report = dir.path().join("results.md");
    let out = bin()
        .args(["run", "--config"])
        .arg(&config)
        .args(["--format", "markdown", "--out"])
        .arg(&report)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let text = std::fs::read_to_string(&report).unwrap();
    assert!(text.contains(
        "| Dataset | Approach | Accuracy | Detections | ReqLabels | R_Sum | R_DD | RRO | M_Peak |"
    ));
    assert!(text.contains("| demo | IKS |"));
}

#[test]
fn overrides_apply_and_echo_in_report_header() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "");
    let out = bin()
        .args(["run", "--config"])
        .arg(&config)
        .args([
            "--set",
            "approach=NULL",
            "--set",
            "detector.window=50",
            "--format",
            "markdown",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    // The effective configuration (after overrides) is embedded verbatim.
    assert!(text.contains("detector.window = 50"), "{text}");
    assert!(text.contains("approach = NULL"));
    assert!(text.contains("| demo | NULL |"));
}

#[test]
fn unknown_config_key_exits_2_naming_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "detector.windw = 7\n");
    let out = bin()
        .args(["run", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("detector.windw"), "{}", stderr(&out));
}

#[test]
fn bad_override_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "");
    let out = bin()
        .args(["run", "--config"])
        .arg(&config)
        .args(["--set", "nonsense.key=1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("nonsense.key"));
}

#[test]
fn missing_dataset_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bench.cfg");
    std::fs::write(
        &path,
        "dataset.kind = csv\n\
         dataset.path = /nonexistent/stream.csv\n\
         dataset.class_count = 2\n\
         approach = NULL\n",
    )
    .unwrap();
    let out = bin().args(["run", "--config"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn timeout_rows_are_results_not_failures() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "timeout_seconds = 0.001\n");
    let out = bin()
        .args(["run", "--config"])
        .arg(&config)
        .args(["--format", "markdown"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("timeout"));
}

#[test]
fn generate_writes_stream_and_sidecar_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out_path in [&a, &b] {
        let out = bin()
            .args([
                "generate",
                "--preset",
                "abrupt-gaussian",
                "--seed",
                "7",
                "--out",
            ])
            .arg(out_path)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", stderr(&out));
    }
    let stream_a = std::fs::read(&a).unwrap();
    let stream_b = std::fs::read(&b).unwrap();
    assert!(!stream_a.is_empty());
    assert_eq!(
        stream_a, stream_b,
        "same preset+seed must be byte-identical"
    );

    let sidecar = std::fs::read_to_string(dir.path().join("a.drifts")).unwrap();
    assert_eq!(sidecar.trim(), "1000");

    // A different seed changes the stream.
    let c = dir.path().join("c.csv");
    bin()
        .args([
            "generate",
            "--preset",
            "abrupt-gaussian",
            "--seed",
            "8",
            "--out",
        ])
        .arg(&c)
        .output()
        .unwrap();
    assert_ne!(std::fs::read(&c).unwrap(), stream_a);
}

#[test]
fn generate_unknown_preset_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["generate", "--preset", "nope", "--out"])
        .arg(dir.path().join("x.csv"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("abrupt-gaussian"));
}

#[test]
fn generated_stream_feeds_a_csv_run_with_oracle_truth() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("stream.csv");
    bin()
        .args([
            "generate",
            "--preset",
            "abrupt-gaussian",
            "--seed",
            "3",
            "--out",
        ])
        .arg(&csv)
        .output()
        .unwrap();
    let config = dir.path().join("bench.cfg");
    std::fs::write(
        &config,
        format!(
            "dataset.kind = csv\n\
             dataset.path = {}\n\
             dataset.class_count = 2\n\
             dataset.initial_labeled = 500\n\
             approach = ORACLE\n\
             repetitions = 1\n",
            csv.display()
        ),
    )
    .unwrap();
    let out = bin()
        .args(["run", "--config"])
        .arg(&config)
        .args(["--format", "csv"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    // The sidecar's annotation reaches the oracle: exactly one detection.
    let body: Vec<&str> = stdout(&out)
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.to_string().leak() as &str)
        .collect();
    let row = body
        .iter()
        .find(|l| l.starts_with("stream,ORACLE"))
        .expect("oracle row")
        .to_string();
    let detections: f64 = row.split(',').nth(3).unwrap().parse().unwrap();
    assert_eq!(detections, 1.0);
}

#[test]
fn records_file_round_trips_through_report_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "");
    let records = dir.path().join("records.json");
    let out = bin()
        .args(["run", "--config"])
        .arg(&config)
        .args(["--format", "json", "--records"])
        .arg(&records)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let direct = stdout(&out);

    let rerendered = bin()
        .args(["report", "--records"])
        .arg(&records)
        .args(["--format", "json"])
        .output()
        .unwrap();
    assert!(rerendered.status.success(), "{}", stderr(&rerendered));
    // Quality values survive the records round trip exactly.
    let a: serde_json::Value = serde_json::from_str(&direct).unwrap();
    let b: serde_json::Value = serde_json::from_str(&stdout(&rerendered)).unwrap();
    assert_eq!(a["rows"][0]["Accuracy"], b["rows"][0]["Accuracy"]);
    assert_eq!(a["rows"][0]["Detections"], b["rows"][0]["Detections"]);
}

#[test]
fn events_log_is_tab_separated() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "");
    let events = dir.path().join("events.tsv");
    let out = bin()
        .args(["run", "--config"])
        .arg(&config)
        .args(["--events"])
        .arg(&events)
        .args(["--out"])
        .arg(dir.path().join("r.md"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let text = std::fs::read_to_string(&events).unwrap();
    for line in text.lines().filter(|l| !l.starts_with('#')) {
        assert_eq!(line.split('\t').count(), 3, "bad line '{line}'");
    }
}

#[test]
fn parallel_processes_match_in_process_results() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "approach = IKS,NULL,BASELINE2\n");
    let mut outputs = Vec::new();
    for procs in ["1", "3"] {
        let out = bin()
            .args(["run", "--config"])
            .arg(&config)
            .args(["--parallel-processes", procs, "--format", "json"])
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", stderr(&out));
        let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
        let quality: Vec<(String, serde_json::Value, serde_json::Value)> = doc["rows"]
            .as_array()
            .unwrap()
            .iter()
            .map(|r| {
                (
                    r["Approach"].as_str().unwrap().to_string(),
                    r["Accuracy"].clone(),
                    r["Detections"].clone(),
                )
            })
            .collect();
        outputs.push(quality);
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn list_detectors_documents_keys_and_defaults() {
    let out = bin().arg("list-detectors").output().unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    for name in [
        "IKS",
        "STUDD",
        "SAND",
        "PINAGE",
        "BASELINE1",
        "BASELINE2",
        "ORACLE",
        "NULL",
    ] {
        assert!(text.contains(name), "missing {name}");
    }
    assert!(text.contains("detector.window"));
    assert!(text.contains("abrupt-gaussian"));
}

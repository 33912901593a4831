//! `driftbench`: runs drift-detector benchmark suites, generates synthetic
//! streams and renders result tables.
//!
//! Exit codes: 0 on success (timed-out runs are results, not failures),
//! 1 on internal invariant violations, 2 on configuration errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use driftbench::data::{generate_synthetic, write_stream_csv, PRESETS};
use driftbench::harness::{
    apply_overrides, build_configs, effective_echo, parse_flat, render_event_log, run_record,
    Approach, HarnessError, RunConfig, RunRecord,
};
use driftbench::report::{aggregate_all, emit, Format};

#[derive(Parser)]
#[command(
    name = "driftbench",
    version,
    about = "Benchmark unsupervised concept-drift detectors: detection quality and runtime overhead under one instrumented pipeline"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the suite described by a config file and emit the report.
    Run(RunArgs),
    /// Generate a synthetic stream CSV plus a drift annotation sidecar.
    Generate(GenerateArgs),
    /// Re-render a saved records file (from `run --records`) as a report.
    Report(ReportArgs),
    /// List the approaches with their config keys and defaults.
    ListDetectors,
    /// Internal worker for --parallel-processes.
    #[command(hide = true)]
    Worker(WorkerArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Flat key=value configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Override a config key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Report destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format: csv, json or markdown.
    #[arg(long, default_value = "markdown")]
    format: String,
    /// Shorthand for --set repetitions=N.
    #[arg(long)]
    repetitions: Option<usize>,
    /// Shorthand for --set seed=N.
    #[arg(long)]
    seed: Option<u64>,
    /// Shorthand for --set timeout_seconds=N.
    #[arg(long = "timeout-seconds")]
    timeout_seconds: Option<f64>,
    /// Run configurations in this many worker processes (suite-level
    /// parallelism; each timed run stays single-threaded in its own
    /// process).
    #[arg(long = "parallel-processes", default_value_t = 1)]
    parallel_processes: usize,
    /// Also write the raw per-repetition records as JSON.
    #[arg(long)]
    records: Option<PathBuf>,
    /// Also write the drift event log (tab-separated).
    #[arg(long)]
    events: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    /// Preset name; see `list-detectors` output for the catalog.
    #[arg(long)]
    preset: String,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output CSV path; the drift annotation sidecar lands next to it with
    /// the extension `drifts`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Records file written by `run --records`.
    #[arg(long)]
    records: PathBuf,
    #[arg(long, default_value = "markdown")]
    format: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct WorkerArgs {
    /// Canonical single-run config file.
    #[arg(long)]
    config: PathBuf,
    /// Where to write the RunRecord JSON.
    #[arg(long)]
    out: PathBuf,
}

/// On-disk shape of `run --records` output.
#[derive(Serialize, Deserialize)]
struct RecordsFile {
    config: String,
    records: Vec<RunRecord>,
}

const CONFIG_EXIT: u8 = 2;
const INTERNAL_EXIT: u8 = 1;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Generate(args) => cmd_generate(args),
        Command::Report(args) => cmd_report(args),
        Command::ListDetectors => cmd_list_detectors(),
        Command::Worker(args) => cmd_worker(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("driftbench: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        Self {
            code: CONFIG_EXIT,
            message: message.into(),
        }
    }

    fn internal(message: impl Into<String>) -> Self {
        Self {
            code: INTERNAL_EXIT,
            message: message.into(),
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            // Configuration and dataset problems are user-fixable inputs.
            HarnessError::Config(_) | HarnessError::Data(_) => CliError::config(e.to_string()),
            other => CliError::internal(other.to_string()),
        }
    }
}

fn write_or_print(path: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, content)
            .map_err(|e| CliError::internal(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    let format = Format::parse(&args.format).map_err(|e| CliError::config(e.to_string()))?;
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::config(format!("--config {}: {e}", args.config.display())))?;
    let mut map = parse_flat(&text).map_err(|e| CliError::config(e.to_string()))?;

    let mut overrides = args.set.clone();
    if let Some(r) = args.repetitions {
        overrides.push(format!("repetitions={r}"));
    }
    if let Some(s) = args.seed {
        overrides.push(format!("seed={s}"));
    }
    if let Some(t) = args.timeout_seconds {
        overrides.push(format!("timeout_seconds={t}"));
    }
    apply_overrides(&mut map, &overrides).map_err(|e| CliError::config(e.to_string()))?;
    let configs = build_configs(&map).map_err(|e| CliError::config(e.to_string()))?;
    let echo = effective_echo(&configs);

    let records = if args.parallel_processes > 1 {
        run_suite_in_processes(&configs, args.parallel_processes)?
    } else {
        let mut out = Vec::with_capacity(configs.len());
        for config in &configs {
            out.push(run_record(config).map_err(CliError::from)?);
        }
        out
    };

    if let Some(path) = &args.records {
        let file = RecordsFile {
            config: echo.clone(),
            records: records.clone(),
        };
        let json = serde_json::to_string_pretty(&file)
            .map_err(|e| CliError::internal(format!("records serialization: {e}")))?;
        std::fs::write(path, json)
            .map_err(|e| CliError::internal(format!("cannot write {}: {e}", path.display())))?;
    }
    if let Some(path) = &args.events {
        std::fs::write(path, render_event_log(&records))
            .map_err(|e| CliError::internal(format!("cannot write {}: {e}", path.display())))?;
    }

    let rows = aggregate_all(&records).map_err(|e| CliError::internal(e.to_string()))?;
    let doc = emit(&rows, format, &echo).map_err(|e| CliError::internal(e.to_string()))?;
    write_or_print(&args.out, &doc)?;
    Ok(())
}

/// Dispatches configurations to worker processes, N at a time, merging
/// results back in configuration order. Each worker is a fresh process so
/// peak-RSS readings and core pinning stay per-run.
fn run_suite_in_processes(
    configs: &[RunConfig],
    processes: usize,
) -> Result<Vec<RunRecord>, CliError> {
    let exe = std::env::current_exe()
        .map_err(|e| CliError::internal(format!("cannot locate own binary: {e}")))?;
    let dir = tempdir().map_err(|e| CliError::internal(format!("tempdir: {e}")))?;

    let jobs: Vec<(usize, PathBuf, PathBuf)> = configs
        .iter()
        .enumerate()
        .map(|(i, config)| {
            let config_path = dir.join(format!("run-{i}.cfg"));
            let out_path = dir.join(format!("run-{i}.json"));
            std::fs::write(&config_path, config.canonical_text())
                .map_err(|e| CliError::internal(format!("cannot stage config: {e}")))?;
            Ok((i, config_path, out_path))
        })
        .collect::<Result<_, CliError>>()?;

    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<RunRecord, CliError>>>> =
        Mutex::new((0..configs.len()).map(|_| None).collect());

    std::thread::scope(|scope| {
        for _ in 0..processes.min(jobs.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= jobs.len() {
                    break;
                }
                let (idx, config_path, out_path) = &jobs[i];
                let result = run_worker_process(&exe, config_path, out_path);
                results.lock().expect("no poisoned worker lock")[*idx] = Some(result);
            });
        }
    });

    let collected = results.into_inner().expect("worker threads joined");
    let cleanup = std::fs::remove_dir_all(&dir);
    drop(cleanup);
    collected
        .into_iter()
        .map(|slot| slot.expect("every job ran"))
        .collect()
}

fn run_worker_process(
    exe: &Path,
    config_path: &Path,
    out_path: &Path,
) -> Result<RunRecord, CliError> {
    let status = std::process::Command::new(exe)
        .arg("worker")
        .arg("--config")
        .arg(config_path)
        .arg("--out")
        .arg(out_path)
        .status()
        .map_err(|e| CliError::internal(format!("cannot spawn worker: {e}")))?;
    if !status.success() {
        return Err(CliError::internal(format!(
            "worker for {} exited with {status}",
            config_path.display()
        )));
    }
    let json = std::fs::read_to_string(out_path)
        .map_err(|e| CliError::internal(format!("worker output: {e}")))?;
    serde_json::from_str(&json).map_err(|e| CliError::internal(format!("worker output parse: {e}")))
}

fn tempdir() -> std::io::Result<PathBuf> {
    let dir = std::env::temp_dir().join(format!(
        "driftbench-{}-{:x}",
        std::process::id(),
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_nanos())
            .unwrap_or(0)
    ));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn cmd_worker(args: WorkerArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::config(format!("worker config: {e}")))?;
    let map = parse_flat(&text).map_err(|e| CliError::config(e.to_string()))?;
    let configs = build_configs(&map).map_err(|e| CliError::config(e.to_string()))?;
    let [config] = configs.as_slice() else {
        return Err(CliError::internal(
            "worker expects exactly one run configuration",
        ));
    };
    let record = run_record(config).map_err(CliError::from)?;
    let json = serde_json::to_string(&record)
        .map_err(|e| CliError::internal(format!("record serialization: {e}")))?;
    std::fs::write(&args.out, json)
        .map_err(|e| CliError::internal(format!("cannot write {}: {e}", args.out.display())))?;
    Ok(())
}

fn cmd_generate(args: GenerateArgs) -> Result<(), CliError> {
    let params = driftbench::data::preset(&args.preset, args.seed).ok_or_else(|| {
        CliError::config(format!(
            "--preset '{}' unknown; available: {}",
            args.preset,
            PRESETS.join(", ")
        ))
    })?;
    let initial_labeled = 500.min(params.n_samples / 2);
    let (samples, spec) = generate_synthetic::<f64>(&args.preset, initial_labeled, &params)
        .map_err(|e| CliError::internal(e.to_string()))?;
    write_stream_csv(&args.out, &samples, &spec.drift_truth)
        .map_err(|e| CliError::internal(e.to_string()))?;
    eprintln!(
        "wrote {} samples ({} features, {} classes) to {}{}",
        samples.len(),
        spec.dimensions,
        spec.class_count,
        args.out.display(),
        if spec.drift_truth.is_empty() {
            String::new()
        } else {
            format!(
                ", drift annotations in {}",
                args.out.with_extension("drifts").display()
            )
        }
    );
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<(), CliError> {
    let format = Format::parse(&args.format).map_err(|e| CliError::config(e.to_string()))?;
    let json = std::fs::read_to_string(&args.records)
        .map_err(|e| CliError::config(format!("--records {}: {e}", args.records.display())))?;
    let file: RecordsFile =
        serde_json::from_str(&json).map_err(|e| CliError::config(format!("records parse: {e}")))?;
    let rows = aggregate_all(&file.records).map_err(|e| CliError::internal(e.to_string()))?;
    let doc = emit(&rows, format, &file.config).map_err(|e| CliError::internal(e.to_string()))?;
    write_or_print(&args.out, &doc)?;
    Ok(())
}

fn cmd_list_detectors() -> Result<(), CliError> {
    for approach in Approach::ALL {
        let (role, keys): (&str, &[&str]) = match approach {
            Approach::Iks => (
                "two-window Kolmogorov-Smirnov test over one input feature; naive Bayes base model",
                &[
                    "detector.feature_index (0)   monitored input dimension",
                    "detector.window (100)        reference/detection window size",
                    "detector.alpha (0.001)       KS significance level",
                ],
            ),
            Approach::Studd => (
                "student model mimics the base model; error-distance detector over mimic errors",
                &[
                    "detector.warn_threshold (0.95)",
                    "detector.drift_threshold (0.90)",
                    "detector.min_errors (30)",
                ],
            ),
            Approach::Sand => (
                "k-means base model; change-point scan over confidence drops",
                &[
                    "detector.window (100)        confidence window size",
                    "detector.tau (0.25)          scan trigger threshold",
                    "detector.min_segment (10)    minimum split segment",
                    "detector.gain_threshold (auto = 2 ln n)",
                    "detector.kmeans_k (auto = max(classes, round(sqrt(n/2))))",
                ],
            ),
            Approach::Pinage => (
                "bagged ensemble; pseudo-error from locally-most-accurate member vs majority vote",
                &[
                    "detector.ensemble_size (10)",
                    "detector.k_neighbors (7)     validation neighbors for member selection",
                    "detector.warn_threshold (0.95)",
                    "detector.drift_threshold (0.90)",
                    "detector.min_errors (30)",
                ],
            ),
            Approach::Baseline1 => ("static model, no detection, no retraining", &[]),
            Approach::Baseline2 => (
                "no detection; periodic retraining on every full block of labels",
                &["handling.period (500)        samples per retraining block"],
            ),
            Approach::Oracle => (
                "fires exactly at annotated drift indices; collects the next window of labels",
                &["detector.window (100)        forward collection size"],
            ),
            Approach::Null => ("never fires; control for harness calibration", &[]),
        };
        println!("{}\n  {}", approach.as_str(), role);
        for key in keys {
            println!("    {key}");
        }
        println!(
            "  handling: {} (default){}",
            approach.default_handling(500).as_str(),
            match approach {
                Approach::Iks | Approach::Studd | Approach::Sand | Approach::Oracle =>
                    "; handling.label_scope: detection-window | since-last-drift",
                _ => "",
            }
        );
        println!();
    }
    println!("generator presets: {}", PRESETS.join(", "));
    Ok(())
}

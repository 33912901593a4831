//! Suite execution: repetitions and records.
//!
//! Each configuration runs `repetitions` times with the same seed, so the
//! quality metrics (accuracy, detections, requested labels) are identical
//! across repetitions while the timing metrics vary with the machine. The
//! drift event log is recorded from the first repetition.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::metrics::RunMetrics;

use super::config::RunConfig;
use super::pipeline::{run_pipeline, DriftEvent, HarnessError};

/// Everything the report needs about one configuration's runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub dataset: String,
    pub approach: String,
    pub fingerprint: String,
    pub reps: Vec<RunMetrics>,
    pub events: Vec<DriftEvent>,
}

/// Runs every configuration in order, `repetitions` times each.
pub fn run_suite(configs: &[RunConfig]) -> Result<Vec<RunRecord>, HarnessError> {
    configs.iter().map(run_record).collect()
}

/// Runs one configuration's repetitions. A timed-out repetition ends the
/// record early: the run is deterministic, so repeating it would only burn
/// the timeout again.
pub fn run_record(config: &RunConfig) -> Result<RunRecord, HarnessError> {
    let mut reps = Vec::with_capacity(config.repetitions);
    let mut events = Vec::new();
    for rep in 0..config.repetitions {
        let output = run_pipeline(config)?;
        if rep == 0 {
            events = output.events;
        }
        let timed_out = output.metrics.timed_out;
        reps.push(output.metrics);
        if timed_out {
            break;
        }
    }
    Ok(RunRecord {
        dataset: config.dataset.display_name(),
        approach: config.approach.as_str().to_string(),
        fingerprint: config.fingerprint(),
        reps,
        events,
    })
}

/// Renders the drift event logs as tab-separated text: one
/// `index<TAB>kind<TAB>labels_requested` line per event, with a `#` comment
/// line naming each (dataset, approach) section.
pub fn render_event_log(records: &[RunRecord]) -> String {
    let mut out = String::new();
    for r in records {
        let _ = writeln!(out, "# {} / {}", r.dataset, r.approach);
        for e in &r.events {
            out.push_str(&e.tsv_line());
            out.push('\n');
        }
    }
    out
}

//! Aggregation over repetitions and benchmark-table emission.
//!
//! Rows keep the result table's column order: Dataset, Approach, Accuracy,
//! Detections, ReqLabels, R_Sum, R_DD, RRO, M_Peak. Means are sample means
//! over the repetitions and stds are population standard deviations; the
//! aggregated RRO is recomputed from the mean runtimes rather than averaged
//! per run, so the reported ratio stays consistent with its definition.
//!
//! Three formats:
//! - `markdown`: human table; percentages with 0 decimals, runtimes in
//!   seconds (0 decimals above 10 s, else 1), RRO with 2 decimals; a
//!   non-zero std renders inline as `±`.
//! - `csv`: same rendering as bare numbers (percent numbers for Accuracy
//!   and ReqLabels), plus trailing `*_std` columns; `#` comment lines at
//!   the top carry the effective configuration.
//! - `json`: unrounded values in natural units (fractions, seconds,
//!   mebibytes) as `{mean, std}` objects, under a `rows` array.
//!
//! Timed-out rows render the sentinel text `timeout` in every metric cell.
//! Row order follows the record (configuration) order.

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::harness::RunRecord;
use crate::metrics::RunMetrics;

#[derive(Debug, Error, PartialEq)]
pub enum ReportError {
    #[error("record {dataset}/{approach} has no repetitions")]
    EmptyRecord { dataset: String, approach: String },
    #[error("record {dataset}/{approach} mixes timed-out and completed repetitions")]
    MixedTimeout { dataset: String, approach: String },
    #[error("unknown report format '{0}' (expected csv, json or markdown)")]
    UnknownFormat(String),
    #[error("report has no rows")]
    NoRows,
}

pub const COLUMNS: [&str; 9] = [
    "Dataset",
    "Approach",
    "Accuracy",
    "Detections",
    "ReqLabels",
    "R_Sum",
    "R_DD",
    "RRO",
    "M_Peak",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Markdown,
}

impl Format {
    pub fn parse(s: &str) -> Result<Self, ReportError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "markdown" | "md" => Ok(Format::Markdown),
            other => Err(ReportError::UnknownFormat(other.to_string())),
        }
    }
}

/// Mean and population standard deviation of one metric over repetitions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricStat {
    pub mean: f64,
    pub std: f64,
}

impl MetricStat {
    fn over(values: impl Iterator<Item = f64> + Clone) -> Self {
        let n = values.clone().count() as f64;
        let mean = values.clone().sum::<f64>() / n;
        let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Self {
            mean,
            std: var.sqrt(),
        }
    }
}

/// Aggregated metrics for one (dataset, approach) pair.
#[derive(Debug, Clone)]
pub struct ReportRow {
    pub dataset: String,
    pub approach: String,
    pub accuracy: MetricStat,
    pub detections: MetricStat,
    pub req_labels: MetricStat,
    pub r_sum: MetricStat,
    pub r_dd: MetricStat,
    pub rro: MetricStat,
    pub m_peak: Option<MetricStat>,
    pub timed_out: bool,
}

/// Aggregates one record. A uniformly timed-out record becomes a timeout
/// row; mixing timed-out and completed repetitions is inconsistent and
/// errors.
pub fn aggregate(record: &RunRecord) -> Result<ReportRow, ReportError> {
    if record.reps.is_empty() {
        return Err(ReportError::EmptyRecord {
            dataset: record.dataset.clone(),
            approach: record.approach.clone(),
        });
    }
    let timeouts = record.reps.iter().filter(|r| r.timed_out).count();
    if timeouts == record.reps.len() {
        let zero = MetricStat {
            mean: 0.0,
            std: 0.0,
        };
        return Ok(ReportRow {
            dataset: record.dataset.clone(),
            approach: record.approach.clone(),
            accuracy: zero,
            detections: zero,
            req_labels: zero,
            r_sum: zero,
            r_dd: zero,
            rro: zero,
            m_peak: None,
            timed_out: true,
        });
    }
    if timeouts > 0 {
        return Err(ReportError::MixedTimeout {
            dataset: record.dataset.clone(),
            approach: record.approach.clone(),
        });
    }

    let stat = |f: fn(&RunMetrics) -> f64| MetricStat::over(record.reps.iter().map(f));
    let r_sum = stat(|m| m.r_sum);
    let r_dd = stat(|m| m.r_dd);
    // Ratio of mean runtimes, not mean of per-run ratios.
    let rro_mean = r_sum.mean / (r_sum.mean - r_dd.mean);
    let rro_std = MetricStat::over(record.reps.iter().map(|m| m.rro)).std;
    let m_peak = if record.reps.iter().all(|m| m.m_peak_mib.is_some()) {
        Some(MetricStat::over(
            record.reps.iter().map(|m| m.m_peak_mib.unwrap_or(0.0)),
        ))
    } else {
        None
    };
    Ok(ReportRow {
        dataset: record.dataset.clone(),
        approach: record.approach.clone(),
        accuracy: stat(|m| m.accuracy),
        detections: stat(|m| m.detections as f64),
        req_labels: stat(|m| m.req_labels),
        r_sum,
        r_dd,
        rro: MetricStat {
            mean: rro_mean,
            std: rro_std,
        },
        m_peak,
        timed_out: false,
    })
}

pub fn aggregate_all(records: &[RunRecord]) -> Result<Vec<ReportRow>, ReportError> {
    records.iter().map(aggregate).collect()
}

fn fmt_pct(x: f64) -> String {
    format!("{:.0}", x * 100.0)
}

fn fmt_runtime(x: f64) -> String {
    if x > 10.0 {
        format!("{x:.0}")
    } else {
        format!("{x:.1}")
    }
}

fn fmt_detections(x: f64) -> String {
    if x.fract() == 0.0 {
        format!("{x:.0}")
    } else {
        format!("{x:.1}")
    }
}

fn fmt_rro(x: f64) -> String {
    format!("{x:.2}")
}

fn fmt_mib(x: f64) -> String {
    format!("{x:.0}")
}

struct RenderedRow {
    cells: [String; 7],
    stds: [String; 7],
}

fn render_row(row: &ReportRow) -> RenderedRow {
    if row.timed_out {
        return RenderedRow {
            cells: std::array::from_fn(|_| "timeout".to_string()),
            stds: std::array::from_fn(|_| String::new()),
        };
    }
    let (mp, mp_std) = match &row.m_peak {
        Some(s) => (fmt_mib(s.mean), fmt_mib(s.std)),
        None => ("n/a".to_string(), String::new()),
    };
    RenderedRow {
        cells: [
            fmt_pct(row.accuracy.mean),
            fmt_detections(row.detections.mean),
            fmt_pct(row.req_labels.mean),
            fmt_runtime(row.r_sum.mean),
            fmt_runtime(row.r_dd.mean),
            fmt_rro(row.rro.mean),
            mp,
        ],
        stds: [
            fmt_pct(row.accuracy.std),
            fmt_detections(row.detections.std),
            fmt_pct(row.req_labels.std),
            fmt_runtime(row.r_sum.std),
            fmt_runtime(row.r_dd.std),
            fmt_rro(row.rro.std),
            mp_std,
        ],
    }
}

/// Emits rows in the requested format with the effective configuration
/// embedded in the document header.
pub fn emit(rows: &[ReportRow], format: Format, config_echo: &str) -> Result<String, ReportError> {
    if rows.is_empty() {
        return Err(ReportError::NoRows);
    }
    Ok(match format {
        Format::Markdown => emit_markdown(rows, config_echo),
        Format::Csv => emit_csv(rows, config_echo),
        Format::Json => emit_json(rows, config_echo),
    })
}

fn emit_markdown(rows: &[ReportRow], config_echo: &str) -> String {
    let mut out = String::from("# Drift-detector benchmark\n\n");
    out.push_str("Aggregation: mean over repetitions, population std; RRO = mean R_Sum / (mean R_Sum - mean R_DD).\n");
    out.push_str("Effective configuration:\n\n```text\n");
    out.push_str(config_echo);
    if !config_echo.ends_with('\n') {
        out.push('\n');
    }
    out.push_str("```\n\n");
    out.push_str(&format!("| {} |\n", COLUMNS.join(" | ")));
    out.push_str(&format!("|{}\n", "---|".repeat(COLUMNS.len())));
    for row in rows {
        let r = render_row(row);
        let cell = |i: usize, unit: &str| -> String {
            if row.timed_out {
                return r.cells[i].clone();
            }
            let mut c = format!("{}{}", r.cells[i], unit);
            if !r.stds[i].is_empty()
                && r.stds[i] != "0"
                && r.stds[i] != "0.0"
                && r.stds[i] != "0.00"
            {
                c.push_str(&format!(" ±{}{}", r.stds[i], unit));
            }
            c
        };
        out.push_str(&format!(
            "| {} | {} | {} | {} | {} | {} | {} | {} | {} |\n",
            row.dataset,
            row.approach,
            cell(0, "%"),
            cell(1, ""),
            cell(2, "%"),
            cell(3, "s"),
            cell(4, "s"),
            cell(5, ""),
            cell(6, ""),
        ));
    }
    out
}

fn emit_csv(rows: &[ReportRow], config_echo: &str) -> String {
    let mut out = String::new();
    for line in config_echo.lines() {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = COLUMNS.iter().map(|c| c.to_string()).collect();
    for col in &COLUMNS[2..] {
        header.push(format!("{col}_std"));
    }
    writer.write_record(&header).expect("in-memory write");
    for row in rows {
        let r = render_row(row);
        let mut record: Vec<String> = vec![row.dataset.clone(), row.approach.clone()];
        record.extend(r.cells.iter().cloned());
        record.extend(r.stds.iter().cloned());
        writer.write_record(&record).expect("in-memory write");
    }
    out.push_str(
        &String::from_utf8(writer.into_inner().expect("in-memory flush"))
            .expect("csv output is UTF-8"),
    );
    out
}

fn emit_json(rows: &[ReportRow], config_echo: &str) -> String {
    fn stat(s: &MetricStat) -> Value {
        json!({ "mean": s.mean, "std": s.std })
    }
    let rows_json: Vec<Value> = rows
        .iter()
        .map(|row| {
            let mut obj = Map::new();
            obj.insert("Dataset".into(), json!(row.dataset));
            obj.insert("Approach".into(), json!(row.approach));
            if row.timed_out {
                for col in &COLUMNS[2..] {
                    obj.insert((*col).into(), json!("timeout"));
                }
            } else {
                obj.insert("Accuracy".into(), stat(&row.accuracy));
                obj.insert("Detections".into(), stat(&row.detections));
                obj.insert("ReqLabels".into(), stat(&row.req_labels));
                obj.insert("R_Sum".into(), stat(&row.r_sum));
                obj.insert("R_DD".into(), stat(&row.r_dd));
                obj.insert("RRO".into(), stat(&row.rro));
                obj.insert(
                    "M_Peak".into(),
                    row.m_peak.as_ref().map_or(Value::Null, stat),
                );
            }
            obj.insert("timed_out".into(), json!(row.timed_out));
            Value::Object(obj)
        })
        .collect();
    let doc = json!({
        "config": config_echo,
        "rows": rows_json,
    });
    serde_json::to_string_pretty(&doc).expect("report serializes")
}

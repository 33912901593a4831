//! Dataset ingestion and synthetic drift-stream generation.
//!
//! Real data arrives as CSV (UTF-8, comma-separated, optional single header
//! row, features as decimal literals, one label column). Synthetic streams
//! draw from class-conditional Gaussians whose means shift at configured
//! drift points, either abruptly or along a linear ramp, with the ground
//! truth recorded in the returned [`StreamSpec`]. Generation is a pure
//! function of the parameters and seed.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::stream::{FeatureVector, LabeledSample, Sample};
use crate::Real;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("csv parse failure: {0}")]
    Csv(#[from] csv::Error),
    #[error("empty stream: {path} has no data rows")]
    EmptyStream { path: PathBuf },
    #[error("row {row}: non-numeric feature '{value}' in column {column}")]
    NonNumericFeature {
        row: usize,
        column: usize,
        value: String,
    },
    #[error("row {row}: has {got} fields, expected {want}")]
    RaggedRow { row: usize, got: usize, want: usize },
    #[error("row {row}: label '{label}' exceeds declared class count {class_count}")]
    LabelOverflow {
        row: usize,
        label: String,
        class_count: usize,
    },
    #[error("label column {column} out of range for {width} fields")]
    LabelColumnOutOfRange { column: usize, width: usize },
    #[error("initial_labeled = {split} must be smaller than the stream length {len}")]
    SplitTooLarge { split: usize, len: usize },
    #[error("invalid synthetic parameters: {0}")]
    InvalidParams(String),
    #[error("drift annotation file {path}: {reason}")]
    BadAnnotation { path: PathBuf, reason: String },
}

/// Where a stream's samples come from.
#[derive(Debug, Clone)]
pub enum StreamSource {
    CsvFile(PathBuf),
    SyntheticAbrupt(SyntheticParams),
    SyntheticGradual(SyntheticParams),
}

/// A dataset plus the protocol facts the harness needs: dimensionality,
/// class count, how many leading samples are labeled for initial training,
/// and ground-truth drift positions (empty for real data, where the truth
/// is unknown).
#[derive(Debug, Clone)]
pub struct StreamSpec {
    pub name: String,
    pub source: StreamSource,
    pub dimensions: usize,
    pub class_count: usize,
    pub initial_labeled: usize,
    pub drift_truth: Vec<usize>,
}

/// Class-conditional Gaussian: one mean and standard deviation per feature.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianClass {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

/// One concept: a Gaussian per class.
#[derive(Debug, Clone, PartialEq)]
pub struct Concept {
    pub classes: Vec<GaussianClass>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticParams {
    pub n_samples: usize,
    pub dimensions: usize,
    pub class_count: usize,
    /// One concept per stream segment; `drift_points.len() + 1` entries.
    pub concepts: Vec<Concept>,
    /// Stream indices where the next concept takes over; strictly
    /// increasing, inside `(0, n_samples)`.
    pub drift_points: Vec<usize>,
    /// 0 for abrupt drift; otherwise the number of samples across which the
    /// probability of drawing from the next concept ramps linearly to 1.
    pub ramp_length: usize,
    pub rng_seed: u64,
}

impl SyntheticParams {
    pub fn validate(&self) -> Result<(), DataError> {
        let fail = |m: String| Err(DataError::InvalidParams(m));
        if self.n_samples == 0 || self.dimensions == 0 || self.class_count == 0 {
            return fail("n_samples, dimensions and class_count must be positive".into());
        }
        if self.concepts.len() != self.drift_points.len() + 1 {
            return fail(format!(
                "{} drift points require {} concepts, got {}",
                self.drift_points.len(),
                self.drift_points.len() + 1,
                self.concepts.len()
            ));
        }
        let mut prev: Option<usize> = None;
        for &dp in &self.drift_points {
            if dp == 0 || dp >= self.n_samples {
                return fail(format!("drift point {dp} outside (0, {})", self.n_samples));
            }
            if let Some(p) = prev {
                if dp <= p {
                    return fail("drift points must be strictly increasing".into());
                }
                if self.ramp_length >= dp - p {
                    return fail(format!(
                        "ramp_length {} not smaller than gap between drift points {p} and {dp}",
                        self.ramp_length
                    ));
                }
            }
            prev = Some(dp);
        }
        for (ci, concept) in self.concepts.iter().enumerate() {
            if concept.classes.len() != self.class_count {
                return fail(format!(
                    "concept {ci} has {} classes, expected {}",
                    concept.classes.len(),
                    self.class_count
                ));
            }
            for (li, class) in concept.classes.iter().enumerate() {
                if class.means.len() != self.dimensions || class.stds.len() != self.dimensions {
                    return fail(format!(
                        "concept {ci} class {li} parameter length != dimensions"
                    ));
                }
                if class.stds.iter().any(|s| !s.is_finite() || *s <= 0.0)
                    || class.means.iter().any(|m| !m.is_finite())
                {
                    return fail(format!("concept {ci} class {li} has invalid Gaussian"));
                }
            }
        }
        Ok(())
    }
}

/// Flat description of the default synthetic family: evenly spaced class
/// means that shift by `drift_shift` (every class, every feature) at each
/// drift point.
#[derive(Debug, Clone)]
pub struct GaussianStreamConfig {
    pub n_samples: usize,
    pub dimensions: usize,
    pub class_count: usize,
    pub drift_points: Vec<usize>,
    pub ramp_length: usize,
    pub class_separation: f64,
    pub drift_shift: f64,
    pub noise_std: f64,
    pub rng_seed: u64,
}

impl GaussianStreamConfig {
    pub fn into_params(self) -> SyntheticParams {
        let concept = |shift: f64| Concept {
            classes: (0..self.class_count)
                .map(|c| GaussianClass {
                    means: vec![c as f64 * self.class_separation + shift; self.dimensions],
                    stds: vec![self.noise_std; self.dimensions],
                })
                .collect(),
        };
        let concepts = (0..=self.drift_points.len())
            .map(|k| concept(k as f64 * self.drift_shift))
            .collect();
        SyntheticParams {
            n_samples: self.n_samples,
            dimensions: self.dimensions,
            class_count: self.class_count,
            concepts,
            drift_points: self.drift_points,
            ramp_length: self.ramp_length,
            rng_seed: self.rng_seed,
        }
    }
}

/// Named generator presets for the CLI.
pub const PRESETS: &[&str] = &["abrupt-gaussian", "gradual-gaussian", "stationary-gaussian"];

pub fn preset(name: &str, seed: u64) -> Option<SyntheticParams> {
    let base = GaussianStreamConfig {
        n_samples: 2000,
        dimensions: 5,
        class_count: 2,
        drift_points: vec![1000],
        ramp_length: 0,
        class_separation: 3.0,
        drift_shift: 3.0,
        noise_std: 1.0,
        rng_seed: seed,
    };
    match name {
        "abrupt-gaussian" => Some(base.into_params()),
        "gradual-gaussian" => Some(
            GaussianStreamConfig {
                ramp_length: 300,
                ..base
            }
            .into_params(),
        ),
        "stationary-gaussian" => Some(
            GaussianStreamConfig {
                drift_points: vec![],
                ..base
            }
            .into_params(),
        ),
        _ => None,
    }
}

/// Generates a stream from class-conditional Gaussians. Identical
/// parameters and seed produce a bit-identical stream. Inside a ramp the
/// probability of drawing from the incoming concept at offset `j` is
/// `(j + 1) / (ramp_length + 1)`.
pub fn generate_synthetic<F: Real>(
    name: &str,
    initial_labeled: usize,
    params: &SyntheticParams,
) -> Result<(Vec<LabeledSample<F>>, StreamSpec), DataError> {
    params.validate()?;
    if initial_labeled >= params.n_samples {
        return Err(DataError::SplitTooLarge {
            split: initial_labeled,
            len: params.n_samples,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    let mut samples = Vec::with_capacity(params.n_samples);
    for i in 0..params.n_samples {
        let passed = params.drift_points.partition_point(|dp| *dp <= i);
        let concept_idx = if passed > 0 && params.ramp_length > 0 {
            let offset = i - params.drift_points[passed - 1];
            if offset < params.ramp_length {
                let p_next = (offset + 1) as f64 / (params.ramp_length + 1) as f64;
                if rng.gen_bool(p_next) {
                    passed
                } else {
                    passed - 1
                }
            } else {
                passed
            }
        } else {
            passed
        };

        let label = rng.gen_range(0..params.class_count);
        let class = &params.concepts[concept_idx].classes[label];
        let mut values = Vec::with_capacity(params.dimensions);
        for j in 0..params.dimensions {
            let normal = Normal::new(class.means[j], class.stds[j])
                .expect("validated std is positive and finite");
            let v = normal.sample(&mut rng);
            values.push(F::from_f64(v).expect("f64 converts to F"));
        }
        samples.push(LabeledSample {
            sample: Sample {
                index: i,
                features: FeatureVector::new(values).expect("Gaussian draws are finite"),
            },
            label,
        });
    }

    let source = if params.ramp_length == 0 {
        StreamSource::SyntheticAbrupt(params.clone())
    } else {
        StreamSource::SyntheticGradual(params.clone())
    };
    let spec = StreamSpec {
        name: name.to_string(),
        source,
        dimensions: params.dimensions,
        class_count: params.class_count,
        initial_labeled,
        drift_truth: params.drift_points.clone(),
    };
    Ok((samples, spec))
}

/// How to read a CSV dataset.
#[derive(Debug, Clone)]
pub struct CsvSchema {
    /// Zero-based label column; `None` means the last column.
    pub label_column: Option<usize>,
    pub class_count: usize,
    pub initial_labeled: usize,
}

/// Loads a CSV dataset. The header row is auto-detected: the first row is a
/// header iff any field besides the label column fails to parse as a
/// number. Labels map to dense integers in first-appearance order. When a
/// sibling annotation file (same path with extension `drifts`, one index
/// per line) exists, it becomes the stream's drift truth.
pub fn load_csv<F: Real>(
    path: impl AsRef<Path>,
    schema: &CsvSchema,
) -> Result<(Vec<LabeledSample<F>>, StreamSpec), DataError> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => DataError::Io {
                path: path.to_path_buf(),
                source: std::io::Error::new(std::io::ErrorKind::NotFound, e.to_string()),
            },
            _ => DataError::Csv(e),
        })?;

    let mut samples: Vec<LabeledSample<F>> = Vec::new();
    let mut label_names: Vec<String> = Vec::new();
    let mut width: Option<usize> = None;
    let mut label_col: usize = 0;
    let mut first_row = true;

    for (row_idx, record) in reader.records().enumerate() {
        let record = record?;
        let row = row_idx + 1;
        if first_row {
            let w = record.len();
            if w < 2 {
                return Err(DataError::RaggedRow {
                    row,
                    got: w,
                    want: 2,
                });
            }
            let lc = schema.label_column.unwrap_or(w - 1);
            if lc >= w {
                return Err(DataError::LabelColumnOutOfRange {
                    column: lc,
                    width: w,
                });
            }
            width = Some(w);
            label_col = lc;
            first_row = false;
            let is_header = record
                .iter()
                .enumerate()
                .any(|(i, f)| i != lc && f.trim().parse::<f64>().is_err());
            if is_header {
                continue;
            }
        }

        let want = width.expect("width set on first row");
        if record.len() != want {
            return Err(DataError::RaggedRow {
                row,
                got: record.len(),
                want,
            });
        }

        let mut values = Vec::with_capacity(want - 1);
        for (col, field) in record.iter().enumerate() {
            if col == label_col {
                continue;
            }
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| DataError::NonNumericFeature {
                    row,
                    column: col,
                    value: field.to_string(),
                })?;
            if !v.is_finite() {
                return Err(DataError::NonNumericFeature {
                    row,
                    column: col,
                    value: field.to_string(),
                });
            }
            values.push(F::from_f64(v).expect("finite f64 converts to F"));
        }

        let label_text = record[label_col].trim().to_string();
        let label = match label_names.iter().position(|l| *l == label_text) {
            Some(i) => i,
            None => {
                if label_names.len() == schema.class_count {
                    return Err(DataError::LabelOverflow {
                        row,
                        label: label_text,
                        class_count: schema.class_count,
                    });
                }
                label_names.push(label_text);
                label_names.len() - 1
            }
        };

        samples.push(LabeledSample {
            sample: Sample {
                index: samples.len(),
                features: FeatureVector::new(values).expect("checked finite"),
            },
            label,
        });
    }

    if samples.is_empty() {
        return Err(DataError::EmptyStream {
            path: path.to_path_buf(),
        });
    }
    if schema.initial_labeled >= samples.len() {
        return Err(DataError::SplitTooLarge {
            split: schema.initial_labeled,
            len: samples.len(),
        });
    }

    let drift_truth = load_drift_annotations(&path.with_extension("drifts"))?;
    let dimensions = width.expect("at least one row") - 1;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string());
    let spec = StreamSpec {
        name,
        source: StreamSource::CsvFile(path.to_path_buf()),
        dimensions,
        class_count: schema.class_count,
        initial_labeled: schema.initial_labeled,
        drift_truth,
    };
    Ok((samples, spec))
}

fn load_drift_annotations(path: &Path) -> Result<Vec<usize>, DataError> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let text = std::fs::read_to_string(path).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let idx: usize = line.parse().map_err(|_| DataError::BadAnnotation {
            path: path.to_path_buf(),
            reason: format!("'{line}' is not a stream index"),
        })?;
        if let Some(&last) = out.last() {
            if idx <= last {
                return Err(DataError::BadAnnotation {
                    path: path.to_path_buf(),
                    reason: "indices must be strictly increasing".to_string(),
                });
            }
        }
        out.push(idx);
    }
    Ok(out)
}

/// Labeled training prefix and inference remainder of one stream.
pub type SplitStream<F> = (Vec<LabeledSample<F>>, Vec<LabeledSample<F>>);

/// Prefix/suffix split at `spec.initial_labeled` with no reordering. The
/// suffix keeps its labels; the harness reveals them only through its label
/// ledger.
pub fn split_initial<F: Real>(
    stream: Vec<LabeledSample<F>>,
    spec: &StreamSpec,
) -> Result<SplitStream<F>, DataError> {
    if spec.initial_labeled >= stream.len() {
        return Err(DataError::SplitTooLarge {
            split: spec.initial_labeled,
            len: stream.len(),
        });
    }
    let mut train = stream;
    let inference = train.split_off(spec.initial_labeled);
    Ok((train, inference))
}

/// Writes a stream as CSV (`f0..f{d-1},label` header, label last) plus a
/// drift annotation sidecar next to it when the truth is non-empty.
pub fn write_stream_csv<F: Real>(
    path: impl AsRef<Path>,
    samples: &[LabeledSample<F>],
    drift_truth: &[usize],
) -> Result<(), DataError> {
    let path = path.as_ref();
    let io_err = |source| DataError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dims = samples.first().map_or(0, |s| s.features().len());
    let mut text = String::new();
    for j in 0..dims {
        let _ = write!(text, "f{j},");
    }
    text.push_str("label\n");
    for s in samples {
        for v in s.features().values() {
            let _ = write!(text, "{v},");
        }
        let _ = writeln!(text, "{}", s.label);
    }
    std::fs::write(path, text).map_err(io_err)?;

    if !drift_truth.is_empty() {
        let sidecar = path.with_extension("drifts");
        let mut text = String::new();
        for dp in drift_truth {
            let _ = writeln!(text, "{dp}");
        }
        std::fs::write(&sidecar, text).map_err(|source| DataError::Io {
            path: sidecar.clone(),
            source,
        })?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detectors::{ks_critical, ks_statistic};
    use crate::stream::SlidingWindow;
    use std::io::Write;

    fn shift_config(seed: u64) -> GaussianStreamConfig {
        GaussianStreamConfig {
            n_samples: 1000,
            dimensions: 1,
            class_count: 1,
            drift_points: vec![500],
            ramp_length: 0,
            class_separation: 0.0,
            drift_shift: 3.0,
            noise_std: 1.0,
            rng_seed: seed,
        }
    }

    #[test]
    fn abrupt_shift_moves_the_sample_mean() {
        let params = shift_config(12).into_params();
        let (samples, spec) = generate_synthetic::<f64>("shift", 100, &params).unwrap();
        assert_eq!(spec.drift_truth, vec![500]);
        let mean = |r: std::ops::Range<usize>| {
            r.clone()
                .map(|i| samples[i].features().get(0).unwrap())
                .sum::<f64>()
                / r.len() as f64
        };
        let diff = mean(500..1000) - mean(0..500);
        assert!((diff - 3.0).abs() <= 0.2, "mean shift {diff}");
    }

    #[test]
    fn stationary_stream_passes_ks_test_in_most_seeds() {
        let mut ok = 0;
        for seed in 100..120u64 {
            let params = GaussianStreamConfig {
                drift_points: vec![],
                ..shift_config(seed)
            }
            .into_params();
            let (samples, _) = generate_synthetic::<f64>("flat", 100, &params).unwrap();
            let mut first = SlidingWindow::new(500).unwrap();
            let mut second = SlidingWindow::new(500).unwrap();
            for s in &samples[..500] {
                first.push(s.features().get(0).unwrap()).unwrap();
            }
            for s in &samples[500..] {
                second.push(s.features().get(0).unwrap()).unwrap();
            }
            let d = ks_statistic(&first, &second).unwrap();
            if d < ks_critical(0.05, 500, 500).unwrap() {
                ok += 1;
            }
        }
        assert!(ok >= 18, "stationary halves split only {ok}/20");
    }

    #[test]
    fn generation_is_bit_deterministic() {
        let params = preset("abrupt-gaussian", 7).unwrap();
        let (a, _) = generate_synthetic::<f64>("x", 500, &params).unwrap();
        let (b, _) = generate_synthetic::<f64>("x", 500, &params).unwrap();
        assert_eq!(a.len(), b.len());
        for (sa, sb) in a.iter().zip(&b) {
            assert_eq!(sa.label, sb.label);
            for (va, vb) in sa.features().values().iter().zip(sb.features().values()) {
                assert_eq!(va.to_bits(), vb.to_bits());
            }
        }
    }

    #[test]
    fn gradual_ramp_mixes_concepts() {
        let params = GaussianStreamConfig {
            n_samples: 4000,
            ramp_length: 1000,
            drift_points: vec![1500],
            drift_shift: 10.0,
            ..shift_config(3)
        }
        .into_params();
        let (samples, _) = generate_synthetic::<f64>("ramp", 100, &params).unwrap();
        let count_high = |r: std::ops::Range<usize>| {
            r.clone()
                .filter(|i| samples[*i].features().get(0).unwrap() > 5.0)
                .count() as f64
                / r.len() as f64
        };
        // Before the ramp: old concept. Early ramp: mostly old. Late ramp:
        // mostly new. After: new concept.
        assert!(count_high(0..1500) < 0.01);
        assert!(count_high(1500..1800) < 0.5);
        assert!(count_high(2200..2500) > 0.5);
        assert!(count_high(2500..4000) > 0.99);
    }

    #[test]
    fn invalid_params_rejected() {
        let mut params = shift_config(1).into_params();
        params.drift_points = vec![500, 400];
        params.concepts.push(params.concepts[0].clone());
        assert!(matches!(
            generate_synthetic::<f64>("bad", 10, &params),
            Err(DataError::InvalidParams(_))
        ));

        let mut ramp = GaussianStreamConfig {
            drift_points: vec![300, 400],
            ramp_length: 150,
            ..shift_config(1)
        }
        .into_params();
        ramp.ramp_length = 150;
        assert!(matches!(
            generate_synthetic::<f64>("bad", 10, &ramp),
            Err(DataError::InvalidParams(_))
        ));
    }

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(".csv").tempfile().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    fn schema(class_count: usize, initial: usize) -> CsvSchema {
        CsvSchema {
            label_column: None,
            class_count,
            initial_labeled: initial,
        }
    }

    #[test]
    fn loads_plain_csv_and_maps_labels_in_first_appearance_order() {
        let f = write_temp("1.0,2.0,b\n3.0,4.0,a\n5.0,6.0,b\n");
        let (samples, spec) = load_csv::<f64>(f.path(), &schema(2, 1)).unwrap();
        assert_eq!(samples.len(), 3);
        assert_eq!(spec.dimensions, 2);
        let labels: Vec<usize> = samples.iter().map(|s| s.label).collect();
        assert_eq!(labels, vec![0, 1, 0]);
        assert_eq!(samples[1].features().values(), &[3.0, 4.0]);
    }

    #[test]
    fn detects_and_skips_header_row() {
        let f = write_temp("sensor_a,sensor_b,label\n1.0,2.0,x\n3.0,4.0,y\n");
        let (samples, _) = load_csv::<f64>(f.path(), &schema(2, 1)).unwrap();
        assert_eq!(samples.len(), 2);
        assert_eq!(samples[0].index(), 0);
    }

    #[test]
    fn header_only_file_is_an_empty_stream() {
        let f = write_temp("a,b,label\n");
        let err = load_csv::<f64>(f.path(), &schema(2, 0)).unwrap_err();
        assert!(err.to_string().contains("empty stream"), "{err}");
    }

    #[test]
    fn missing_file_errors() {
        let err = load_csv::<f64>("/nonexistent/nope.csv", &schema(2, 0)).unwrap_err();
        assert!(matches!(err, DataError::Io { .. }));
    }

    #[test]
    fn ragged_row_errors() {
        let f = write_temp("1.0,2.0,a\n3.0,b\n");
        let err = load_csv::<f64>(f.path(), &schema(2, 0)).unwrap_err();
        assert!(matches!(
            err,
            DataError::RaggedRow {
                row: 2,
                got: 2,
                want: 3
            }
        ));
    }

    #[test]
    fn non_numeric_feature_errors() {
        let f = write_temp("1.0,2.0,a\noops,4.0,b\n");
        let err = load_csv::<f64>(f.path(), &schema(2, 0)).unwrap_err();
        assert!(matches!(
            err,
            DataError::NonNumericFeature {
                row: 2,
                column: 0,
                ..
            }
        ));
    }

    #[test]
    fn label_overflow_errors() {
        let f = write_temp("1.0,a\n2.0,b\n3.0,c\n");
        let err = load_csv::<f64>(f.path(), &schema(2, 0)).unwrap_err();
        assert!(matches!(err, DataError::LabelOverflow { row: 3, .. }));
    }

    #[test]
    fn csv_roundtrip_of_generated_stream_preserves_shape() {
        // Insects-shaped synthetic file: 5325 samples, 50 features, 5
        // classes; reload must preserve count, order and labels.
        let params = GaussianStreamConfig {
            n_samples: 5325,
            dimensions: 50,
            class_count: 5,
            drift_points: vec![2000],
            ramp_length: 0,
            class_separation: 2.0,
            drift_shift: 3.0,
            noise_std: 1.0,
            rng_seed: 44,
        }
        .into_params();
        let (samples, _) = generate_synthetic::<f64>("insects-like", 500, &params).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("insects_like.csv");
        write_stream_csv(&path, &samples, &[2000]).unwrap();

        let (reloaded, spec) = load_csv::<f64>(&path, &schema(5, 500)).unwrap();
        assert_eq!(reloaded.len(), 5325);
        assert_eq!(spec.dimensions, 50);
        assert_eq!(spec.class_count, 5);
        assert_eq!(spec.drift_truth, vec![2000]);
        assert_eq!(spec.initial_labeled, 500);
        // Loading remaps labels densely in first-appearance order.
        let mut mapping: Vec<Option<usize>> = vec![None; 5];
        let mut next = 0;
        for (a, b) in samples.iter().zip(&reloaded) {
            let expect = *mapping[a.label].get_or_insert_with(|| {
                next += 1;
                next - 1
            });
            assert_eq!(b.label, expect);
            for (va, vb) in a.features().values().iter().zip(b.features().values()) {
                assert_eq!(va, vb);
            }
        }

        let (train, inference) = split_initial(reloaded, &spec).unwrap();
        assert_eq!(train.len(), 500);
        assert_eq!(inference.len(), 4825);
    }

    #[test]
    fn split_rejects_full_stream() {
        let params = shift_config(1).into_params();
        let (samples, mut spec) = generate_synthetic::<f64>("s", 10, &params).unwrap();
        let ten: Vec<_> = samples.into_iter().take(10).collect();
        spec.initial_labeled = 10;
        assert!(matches!(
            split_initial(ten, &spec),
            Err(DataError::SplitTooLarge { split: 10, len: 10 })
        ));
    }

    #[test]
    fn presets_are_known() {
        for name in PRESETS {
            assert!(preset(name, 1).is_some());
        }
        assert!(preset("unknown", 1).is_none());
    }
}

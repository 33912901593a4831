//! End-to-end behavior of the instrumented pipeline across approaches.

use std::time::Duration;

use driftbench::data::GaussianStreamConfig;
use driftbench::detectors::{DriftDetector, Evidence, Observation};
use driftbench::harness::{
    render_event_log, run_components, run_pipeline, run_record, Approach, ApproachComponents,
    DatasetConfig, DetectorParams, EventKind, Handling, HarnessError, LabelRequestScope,
    LoopOptions, NbComponents, Prediction, RunConfig,
};
use driftbench::stream::{DetectorVerdict, FeatureVector};
use driftbench::{FeatureVectorF64, LabeledSampleF64};

fn synthetic_config(approach: Approach, drift_points: Vec<usize>, n: usize) -> RunConfig {
    RunConfig {
        dataset: DatasetConfig::Synthetic {
            name: "synthetic".into(),
            generator: GaussianStreamConfig {
                n_samples: n,
                dimensions: 5,
                class_count: 2,
                drift_points,
                ramp_length: 0,
                class_separation: 3.0,
                drift_shift: 3.0,
                noise_std: 1.0,
                rng_seed: 11,
            },
            initial_labeled: 500,
        },
        approach,
        detector: DetectorParams::default(),
        handling: approach.default_handling(500),
        label_scope: LabelRequestScope::DetectionWindow,
        repetitions: 1,
        seed: 11,
        timeout: Duration::from_secs(600),
        pin_core: false,
    }
}

#[test]
fn null_pipeline_is_baseline1() {
    let null = run_pipeline(&synthetic_config(Approach::Null, vec![1000], 2500)).unwrap();
    let base = run_pipeline(&synthetic_config(Approach::Baseline1, vec![1000], 2500)).unwrap();
    assert_eq!(null.metrics.accuracy, base.metrics.accuracy);
    assert_eq!(null.metrics.detections, 0);
    assert_eq!(null.metrics.req_labels, 0.0);
    assert_eq!(null.per_sample_correct, base.per_sample_correct);
}

#[test]
fn iks_pipeline_detects_and_recovers_on_drift_stream() {
    let out = run_pipeline(&synthetic_config(Approach::Iks, vec![1500], 3000)).unwrap();
    assert!(out.metrics.detections >= 1, "no detections");
    assert!(out.metrics.req_labels > 0.0);
    let drift_positions: Vec<usize> = out
        .events
        .iter()
        .filter(|e| e.kind == EventKind::Drift)
        .map(|e| e.index)
        .collect();
    assert!(
        drift_positions.iter().any(|p| (1500..1700).contains(p)),
        "drifts at {drift_positions:?}"
    );

    let baseline = run_pipeline(&synthetic_config(Approach::Baseline1, vec![1500], 3000)).unwrap();
    assert!(
        out.metrics.accuracy > baseline.metrics.accuracy + 0.05,
        "IKS {} vs baseline {}",
        out.metrics.accuracy,
        baseline.metrics.accuracy
    );
}

#[test]
fn since_last_drift_scope_requests_the_whole_span() {
    let mut config = synthetic_config(Approach::Iks, vec![1500], 3000);
    config.label_scope = LabelRequestScope::SinceLastDrift;
    let out = run_pipeline(&config).unwrap();
    let first_drift = out
        .events
        .iter()
        .find(|e| e.kind == EventKind::Drift)
        .expect("drift expected");
    // Everything from the start of the inference stream up to and including
    // the drift sample is requested at the first drift.
    assert_eq!(first_drift.labels_requested, first_drift.index - 500 + 1);
}

#[test]
fn sand_pipeline_runs_with_kmeans_base() {
    let out = run_pipeline(&synthetic_config(Approach::Sand, vec![1500], 3000)).unwrap();
    assert!(out.metrics.accuracy > 0.8);
    assert!(!out.metrics.timed_out);
}

#[test]
fn studd_pipeline_runs() {
    let out = run_pipeline(&synthetic_config(Approach::Studd, vec![1500], 3000)).unwrap();
    assert!(out.metrics.accuracy > 0.4);
    assert!(!out.metrics.timed_out);
}

#[test]
fn pinage_pipeline_never_requests_labels() {
    let out = run_pipeline(&synthetic_config(Approach::Pinage, vec![1500], 3000)).unwrap();
    assert_eq!(out.metrics.req_labels, 0.0);
}

#[test]
fn periodic_retraining_consumes_every_label_once() {
    // Insects-shaped: 5325 samples, 500 initial -> 4825 inference samples.
    let config = synthetic_config(Approach::Baseline2, vec![2000], 5325);
    let out = run_pipeline(&config).unwrap();
    assert_eq!(out.metrics.req_labels, 1.0);
    let retrains = out
        .events
        .iter()
        .filter(|e| e.kind == EventKind::Retrain)
        .count();
    assert_eq!(retrains, 9); // floor(4825 / 500)
    assert_eq!(out.metrics.detections, 0);
}

#[test]
fn oracle_collects_forward_and_retrains() {
    let out = run_pipeline(&synthetic_config(Approach::Oracle, vec![1000], 2500)).unwrap();
    assert_eq!(out.metrics.detections, 1);
    let retrain = out
        .events
        .iter()
        .find(|e| e.kind == EventKind::Retrain)
        .expect("oracle must retrain");
    // Collection spans [1000, 1100): retrain completes at the last sample.
    assert_eq!(retrain.index, 1099);
    assert_eq!(retrain.labels_requested, 100);
    let expected = 100.0 / 2000.0;
    assert!((out.metrics.req_labels - expected).abs() < 1e-12);
}

#[test]
fn timeout_marks_run_and_skips_quality_fields() {
    let mut config = synthetic_config(Approach::Iks, vec![], 5325);
    config.timeout = Duration::from_millis(1);
    let out = run_pipeline(&config).unwrap();
    assert!(out.metrics.timed_out);
    assert!(out.per_sample_correct.is_empty());
}

#[test]
fn repetitions_share_quality_and_vary_only_in_time() {
    let mut config = synthetic_config(Approach::Iks, vec![1500], 3000);
    config.repetitions = 3;
    let record = run_record(&config).unwrap();
    assert_eq!(record.reps.len(), 3);
    for rep in &record.reps[1..] {
        assert_eq!(rep.accuracy, record.reps[0].accuracy);
        assert_eq!(rep.detections, record.reps[0].detections);
        assert_eq!(rep.req_labels, record.reps[0].req_labels);
    }
}

#[test]
fn event_log_renders_three_tab_separated_fields() {
    let config = synthetic_config(Approach::Oracle, vec![1000], 2500);
    let record = run_record(&config).unwrap();
    let log = render_event_log(&[record]);
    let mut event_lines = 0;
    for line in log.lines() {
        if line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        assert_eq!(fields.len(), 3, "bad event line '{line}'");
        fields[0].parse::<usize>().unwrap();
        assert!(["warning", "drift", "retrain"].contains(&fields[1]));
        fields[2].parse::<usize>().unwrap();
        event_lines += 1;
    }
    assert!(event_lines >= 2); // the drift plus its retrain
}

/// Detector stub whose evidence window deliberately overlaps across drifts,
/// so the ledger's double-request guard must fire.
struct OverlappingEvidenceDetector {
    fire_at: Vec<usize>,
}

impl DriftDetector<f64> for OverlappingEvidenceDetector {
    fn observe(
        &mut self,
        obs: &Observation<'_, f64>,
    ) -> Result<DetectorVerdict, driftbench::detectors::DetectorError> {
        if self.fire_at.contains(&obs.index) {
            return Ok(DetectorVerdict::Drift {
                position: obs.index,
            });
        }
        Ok(DetectorVerdict::NoDrift)
    }

    fn drift_evidence(&self) -> Evidence {
        // Always claims the same span.
        Evidence::Window(500..505)
    }
}

struct StubComponents<D: DriftDetector<f64>> {
    inner: NbComponents<D>,
}

impl<D: DriftDetector<f64>> ApproachComponents for StubComponents<D> {
    fn predict(&self, x: &FeatureVectorF64) -> Result<Prediction, HarnessError> {
        self.inner.predict(x)
    }
    fn observe(&mut self, obs: &Observation<'_, f64>) -> Result<DetectorVerdict, HarnessError> {
        self.inner.observe(obs)
    }
    fn drift_evidence(&self) -> Evidence {
        self.inner.drift_evidence()
    }
    fn retrain(&mut self, labeled: &[LabeledSampleF64]) -> Result<(), HarnessError> {
        self.inner.retrain(labeled)
    }
}

#[test]
fn overlapping_label_requests_are_an_internal_error() {
    let config = synthetic_config(Approach::Null, vec![], 2000);
    let (samples, spec) = driftbench::harness::load_dataset(&config).unwrap();
    let (train, inference) = driftbench::data::split_initial(samples, &spec).unwrap();
    let model = driftbench::models::GaussianNb::fit(&train, 2).unwrap();
    let mut components = StubComponents {
        inner: NbComponents::new(
            model,
            OverlappingEvidenceDetector {
                fire_at: vec![600, 700],
            },
            2,
        ),
    };
    let err = run_components(
        &mut components,
        &inference,
        &LoopOptions {
            handling: Handling::ReplaceModelWithRequestedLabels,
            label_scope: LabelRequestScope::DetectionWindow,
            timeout: Duration::from_secs(60),
            pin_core: false,
        },
    )
    .unwrap_err();
    assert!(matches!(
        err,
        HarnessError::DoubleLabelRequest { index: 500 }
    ));
}

#[test]
fn prequential_feature_vectors_reject_wrong_dimensionality() {
    // A malformed query against the fitted model surfaces as a model error,
    // not a silent misprediction.
    let config = synthetic_config(Approach::Null, vec![], 2000);
    let (samples, spec) = driftbench::harness::load_dataset(&config).unwrap();
    let (train, _) = driftbench::data::split_initial(samples, &spec).unwrap();
    let model = driftbench::models::GaussianNb::fit(&train, 2).unwrap();
    let bad = FeatureVector::new(vec![0.0]).unwrap();
    assert!(model.predict(&bad).is_err());
}

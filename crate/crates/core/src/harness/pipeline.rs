//! The instrumented benchmark pipeline.
//!
//! One run: load and split the stream, train the base model untimed, then
//! walk the inference samples inside the `Total` timing scope. Each step
//! predicts with the base model (prequentially: the true label is only
//! used for accuracy accounting and never shown to the model), runs the
//! detector inside the `DetectorOnly` scope, and on a drift verdict invokes
//! the handling strategy inside `Total` but outside `DetectorOnly`.
//!
//! True labels leave the stream only through the label ledger, which counts
//! each inference sample at most once; requesting a label twice or outside
//! the stream is an internal error, not a metric.

use std::ops::Range;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{generate_synthetic, load_csv, split_initial, CsvSchema, DataError, StreamSpec};
use crate::detectors::{
    DetectorError, DriftDetector, Evidence, IksConfig, IksDetector, NullDetector, Observation,
    OracleDetector, PinageDetector, SandConfig, SandDetector, StuddDetector,
};
use crate::detectors::{EddmConfig, PinageConfig};
use crate::metrics::{
    req_labels_final, AccuracyState, MemoryProbe, MetricsError, RunMetrics, Scope, ScopedTimer,
};
use crate::models::{default_kmeans_k, Ensemble, GaussianNb, KMeansClassifier, ModelError};
use crate::stream::{DetectorVerdict, FeatureVector, StreamError};
use crate::{ClassLabel, FeatureVectorF64, GaussianNbF64, LabeledSampleF64};

use super::config::{Approach, DatasetConfig, Handling, LabelRequestScope, RunConfig};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] super::config::ConfigError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Detector(#[from] DetectorError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Stream(#[from] StreamError),
    #[error("label for sample {index} requested twice")]
    DoubleLabelRequest { index: usize },
    #[error("label request for sample {index} outside the inference stream")]
    LabelOutsideStream { index: usize },
    #[error("internal: {0}")]
    Internal(String),
}

/// Base-model output for one sample.
#[derive(Debug, Clone, Copy)]
pub struct Prediction {
    pub label: ClassLabel,
    pub confidence: f64,
}

/// The model/detector bundle one approach runs. The pipeline drives it;
/// implementations decide what "retrain" means for their models. Custom
/// implementations slot stub models or alternative learners into the same
/// instrumented loop.
pub trait ApproachComponents {
    fn predict(&self, x: &FeatureVectorF64) -> Result<Prediction, HarnessError>;

    /// Detector update; runs inside the `DetectorOnly` scope.
    fn observe(&mut self, obs: &Observation<'_, f64>) -> Result<DetectorVerdict, HarnessError>;

    /// Evidence span of the latest drift.
    fn drift_evidence(&self) -> Evidence;

    /// Replaces the base model(s) with a fresh fit on true-labeled samples.
    fn retrain(&mut self, labeled: &[LabeledSampleF64]) -> Result<(), HarnessError>;

    /// Retrains from internally buffered pseudo-labeled samples; returns how
    /// many samples were used (0 = nothing to retrain on).
    fn pseudo_retrain(&mut self) -> Result<usize, HarnessError> {
        Ok(0)
    }
}

/// Naive-Bayes base model plus any single-verdict detector: covers the
/// KS detector, the reference detectors and both baselines.
pub struct NbComponents<D: DriftDetector<f64>> {
    model: GaussianNbF64,
    detector: D,
    class_count: usize,
}

impl<D: DriftDetector<f64>> NbComponents<D> {
    pub fn new(model: GaussianNbF64, detector: D, class_count: usize) -> Self {
        Self {
            model,
            detector,
            class_count,
        }
    }
}

impl<D: DriftDetector<f64>> ApproachComponents for NbComponents<D> {
    fn predict(&self, x: &FeatureVectorF64) -> Result<Prediction, HarnessError> {
        let (label, confidence) = self.model.predict(x)?;
        Ok(Prediction { label, confidence })
    }

    fn observe(&mut self, obs: &Observation<'_, f64>) -> Result<DetectorVerdict, HarnessError> {
        Ok(self.detector.observe(obs)?)
    }

    fn drift_evidence(&self) -> Evidence {
        self.detector.drift_evidence()
    }

    fn retrain(&mut self, labeled: &[LabeledSampleF64]) -> Result<(), HarnessError> {
        self.model = GaussianNb::fit(labeled, self.class_count)?;
        Ok(())
    }
}

/// Teacher model plus the student mimic detector. Retraining replaces the
/// teacher from requested labels and rebuilds the student against it.
pub struct StuddComponents {
    teacher: GaussianNbF64,
    detector: StuddDetector<f64>,
    class_count: usize,
}

impl StuddComponents {
    pub fn new(
        train: &[LabeledSampleF64],
        class_count: usize,
        eddm: EddmConfig,
    ) -> Result<Self, HarnessError> {
        let teacher = GaussianNb::fit(train, class_count)?;
        let inputs: Vec<FeatureVector<f64>> = train.iter().map(|s| s.features().clone()).collect();
        let detector = StuddDetector::from_teacher(&teacher, &inputs, eddm)?;
        Ok(Self {
            teacher,
            detector,
            class_count,
        })
    }
}

impl ApproachComponents for StuddComponents {
    fn predict(&self, x: &FeatureVectorF64) -> Result<Prediction, HarnessError> {
        let (label, confidence) = self.teacher.predict(x)?;
        Ok(Prediction { label, confidence })
    }

    fn observe(&mut self, obs: &Observation<'_, f64>) -> Result<DetectorVerdict, HarnessError> {
        // obs.prediction is the teacher's prediction for this sample.
        Ok(self.detector.observe(obs)?)
    }

    fn drift_evidence(&self) -> Evidence {
        self.detector.drift_evidence()
    }

    fn retrain(&mut self, labeled: &[LabeledSampleF64]) -> Result<(), HarnessError> {
        self.teacher = GaussianNb::fit(labeled, self.class_count)?;
        let inputs: Vec<FeatureVector<f64>> =
            labeled.iter().map(|s| s.features().clone()).collect();
        self.detector.retrain_student(&self.teacher, &inputs)?;
        Ok(())
    }
}

/// k-means classifier plus the confidence-drop detector.
pub struct SandComponents {
    model: KMeansClassifier<f64>,
    detector: SandDetector<f64>,
    class_count: usize,
    kmeans_k: Option<usize>,
    seed: u64,
    retrain_count: u64,
}

impl SandComponents {
    pub fn new(
        train: &[LabeledSampleF64],
        class_count: usize,
        kmeans_k: Option<usize>,
        sand: SandConfig,
        seed: u64,
    ) -> Result<Self, HarnessError> {
        let k = kmeans_k.unwrap_or_else(|| default_kmeans_k(train.len(), class_count));
        let model = KMeansClassifier::fit(train, k, class_count, seed)?;
        Ok(Self {
            model,
            detector: SandDetector::new(sand),
            class_count,
            kmeans_k,
            seed,
            retrain_count: 0,
        })
    }
}

impl ApproachComponents for SandComponents {
    fn predict(&self, x: &FeatureVectorF64) -> Result<Prediction, HarnessError> {
        let (label, confidence) = self.model.predict(x)?;
        Ok(Prediction { label, confidence })
    }

    fn observe(&mut self, obs: &Observation<'_, f64>) -> Result<DetectorVerdict, HarnessError> {
        Ok(self.detector.observe(obs)?)
    }

    fn drift_evidence(&self) -> Evidence {
        self.detector.drift_evidence()
    }

    fn retrain(&mut self, labeled: &[LabeledSampleF64]) -> Result<(), HarnessError> {
        self.retrain_count += 1;
        let seed = self
            .seed
            .wrapping_add(self.retrain_count.wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let k = self
            .kmeans_k
            .unwrap_or_else(|| default_kmeans_k(labeled.len(), self.class_count))
            .min(labeled.len());
        self.model = KMeansClassifier::fit(labeled, k, self.class_count, seed)?;
        Ok(())
    }
}

/// Ensemble pseudo-error detector; the ensemble itself is the base model.
pub struct PinageComponents {
    detector: PinageDetector<f64>,
    seed: u64,
    retrain_count: u64,
}

impl PinageComponents {
    /// Splits the initial labeled set 70/30 into member-training and
    /// validation parts, then bags the members.
    pub fn new(
        train: &[LabeledSampleF64],
        class_count: usize,
        config: PinageConfig,
        seed: u64,
    ) -> Result<Self, HarnessError> {
        let split = (train.len() * 7) / 10;
        let (member_part, validation) = train.split_at(split.max(1).min(train.len() - 1));
        let ensemble = Ensemble::fit_bagged(
            member_part,
            validation.to_vec(),
            config.ensemble_size,
            class_count,
            config.k_neighbors,
            seed,
        )?;
        Ok(Self {
            detector: PinageDetector::new(ensemble, config.eddm),
            seed,
            retrain_count: 0,
        })
    }
}

impl ApproachComponents for PinageComponents {
    fn predict(&self, x: &FeatureVectorF64) -> Result<Prediction, HarnessError> {
        let (label, confidence) = self.detector.ensemble().majority_predict(x)?;
        Ok(Prediction { label, confidence })
    }

    fn observe(&mut self, obs: &Observation<'_, f64>) -> Result<DetectorVerdict, HarnessError> {
        let (_pseudo, verdict) = self.detector.update(obs)?;
        Ok(verdict)
    }

    fn drift_evidence(&self) -> Evidence {
        self.detector.drift_evidence()
    }

    fn retrain(&mut self, _labeled: &[LabeledSampleF64]) -> Result<(), HarnessError> {
        Err(HarnessError::Internal(
            "pseudo-label pipeline does not consume true labels".into(),
        ))
    }

    fn pseudo_retrain(&mut self) -> Result<usize, HarnessError> {
        let buffer = self.detector.take_warning_buffer();
        if buffer.is_empty() {
            return Ok(0);
        }
        self.retrain_count += 1;
        let seed = self
            .seed
            .wrapping_add(self.retrain_count.wrapping_mul(0x9e37_79b9_7f4a_7c15));
        self.detector
            .ensemble_mut()
            .retrain_members(&buffer, seed)?;
        Ok(buffer.len())
    }
}

/// Builds the components an approach runs with, training base models on the
/// initial labeled prefix (untimed).
pub fn build_components(
    config: &RunConfig,
    spec: &StreamSpec,
    train: &[LabeledSampleF64],
) -> Result<Box<dyn ApproachComponents>, HarnessError> {
    let d = &config.detector;
    let class_count = spec.class_count;
    let eddm = EddmConfig {
        warn_threshold: d.warn_threshold,
        drift_threshold: d.drift_threshold,
        min_errors: d.min_errors,
    };
    Ok(match config.approach {
        Approach::Iks => {
            let detector = IksDetector::new(IksConfig {
                feature_index: d.feature_index,
                window: d.window,
                alpha: d.alpha,
            })?;
            Box::new(NbComponents::new(
                GaussianNb::fit(train, class_count)?,
                detector,
                class_count,
            ))
        }
        Approach::Studd => Box::new(StuddComponents::new(train, class_count, eddm)?),
        Approach::Sand => Box::new(SandComponents::new(
            train,
            class_count,
            d.kmeans_k,
            SandConfig {
                window: d.window,
                tau: d.tau,
                min_segment: d.min_segment,
                gain_threshold: d.gain_threshold,
            },
            config.seed,
        )?),
        Approach::Pinage => Box::new(PinageComponents::new(
            train,
            class_count,
            PinageConfig {
                ensemble_size: d.ensemble_size,
                k_neighbors: d.k_neighbors,
                eddm,
            },
            config.seed,
        )?),
        Approach::Oracle => Box::new(NbComponents::new(
            GaussianNb::fit(train, class_count)?,
            OracleDetector::new(spec.drift_truth.clone(), d.window),
            class_count,
        )),
        Approach::Baseline1 | Approach::Baseline2 | Approach::Null => Box::new(NbComponents::new(
            GaussianNb::fit(train, class_count)?,
            NullDetector,
            class_count,
        )),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Warning,
    Drift,
    Retrain,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::Warning => "warning",
            EventKind::Drift => "drift",
            EventKind::Retrain => "retrain",
        }
    }
}

/// One drift-log entry. Every retrain execution logs a `Retrain` event;
/// `labels_requested` counts the true labels newly requested at the event
/// itself, so immediate backward-window requests sit on the `Drift` line
/// while deferred and periodic collections sit on their `Retrain` line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DriftEvent {
    pub index: usize,
    pub kind: EventKind,
    pub labels_requested: usize,
}

impl DriftEvent {
    /// Tab-separated rendering: `index<TAB>kind<TAB>labels_requested`.
    pub fn tsv_line(&self) -> String {
        format!(
            "{}\t{}\t{}",
            self.index,
            self.kind.as_str(),
            self.labels_requested
        )
    }
}

/// Everything a single run produces.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub metrics: RunMetrics,
    pub events: Vec<DriftEvent>,
    /// Prequential correctness per inference sample, in stream order.
    /// Empty when the run timed out.
    pub per_sample_correct: Vec<bool>,
}

/// Tracks which inference-stream labels have been revealed. Every label
/// may be requested at most once per run.
struct LabelLedger {
    base: usize,
    requested: Vec<bool>,
    count: usize,
}

impl LabelLedger {
    fn new(base: usize, len: usize) -> Self {
        Self {
            base,
            requested: vec![false; len],
            count: 0,
        }
    }

    fn is_requested(&self, index: usize) -> bool {
        index
            .checked_sub(self.base)
            .and_then(|i| self.requested.get(i).copied())
            .unwrap_or(false)
    }

    fn request(&mut self, index: usize) -> Result<(), HarnessError> {
        let slot = index
            .checked_sub(self.base)
            .and_then(|i| self.requested.get_mut(i))
            .ok_or(HarnessError::LabelOutsideStream { index })?;
        if *slot {
            return Err(HarnessError::DoubleLabelRequest { index });
        }
        *slot = true;
        self.count += 1;
        Ok(())
    }
}

/// Forward label collection started by a drift whose evidence lies ahead.
struct PendingCollection {
    remaining: usize,
    buffer: Vec<LabeledSampleF64>,
    newly_requested: usize,
}

/// Loop parameters independent of the model stack.
#[derive(Debug, Clone)]
pub struct LoopOptions {
    pub handling: Handling,
    pub label_scope: LabelRequestScope,
    pub timeout: std::time::Duration,
    pub pin_core: bool,
}

impl LoopOptions {
    pub fn from_config(config: &RunConfig) -> Self {
        Self {
            handling: config.handling,
            label_scope: config.label_scope,
            timeout: config.timeout,
            pin_core: config.pin_core,
        }
    }
}

/// Executes one configured run end to end.
pub fn run_pipeline(config: &RunConfig) -> Result<RunOutput, HarnessError> {
    let (samples, spec) = load_dataset(config)?;
    let (train, inference) = split_initial(samples, &spec)?;
    let mut components = build_components(config, &spec, &train)?;
    run_components(
        components.as_mut(),
        &inference,
        &LoopOptions::from_config(config),
    )
}

/// Loads the configured dataset (untimed).
pub fn load_dataset(
    config: &RunConfig,
) -> Result<(Vec<LabeledSampleF64>, StreamSpec), HarnessError> {
    match &config.dataset {
        DatasetConfig::Csv {
            name,
            path,
            label_column,
            class_count,
            initial_labeled,
        } => {
            let schema = CsvSchema {
                label_column: *label_column,
                class_count: *class_count,
                initial_labeled: *initial_labeled,
            };
            let (samples, mut spec) = load_csv(path, &schema)?;
            if let Some(name) = name {
                spec.name = name.clone();
            }
            Ok((samples, spec))
        }
        DatasetConfig::Synthetic {
            name,
            generator,
            initial_labeled,
        } => {
            let params = generator.clone().into_params();
            Ok(generate_synthetic(name, *initial_labeled, &params)?)
        }
    }
}

/// The instrumented stream loop over prepared components. Public so tests
/// can drive stub components through the exact timing and handling paths.
pub fn run_components(
    components: &mut dyn ApproachComponents,
    inference: &[LabeledSampleF64],
    options: &LoopOptions,
) -> Result<RunOutput, HarnessError> {
    if inference.is_empty() {
        return Err(HarnessError::Internal("empty inference stream".into()));
    }
    let _affinity = if options.pin_core {
        super::affinity::pin_to_current_core()
    } else {
        None
    };

    let base = inference[0].index();
    let mut ledger = LabelLedger::new(base, inference.len());
    let mut accuracy = AccuracyState::new();
    let mut correct = Vec::with_capacity(inference.len());
    let mut events: Vec<DriftEvent> = Vec::new();
    let mut detections = 0u64;
    let mut pending: Option<PendingCollection> = None;
    let mut periodic_buffer: Vec<LabeledSampleF64> = Vec::new();
    let mut since_last_drift = base;
    let mut timed_out = false;

    let probe = MemoryProbe::begin();
    let timer = ScopedTimer::new();
    {
        let _total = timer.open(Scope::Total)?;
        let deadline = Instant::now() + options.timeout;
        for sample in inference {
            if Instant::now() > deadline {
                timed_out = true;
                break;
            }
            let index = sample.index();

            // Prequential: predict before the label is visible anywhere.
            let prediction = components.predict(sample.features())?;
            accuracy.update(prediction.label, sample.label);
            correct.push(prediction.label == sample.label);

            let obs = Observation {
                index,
                features: sample.features(),
                prediction: prediction.label,
                confidence: prediction.confidence,
            };
            let verdict = timer.scoped(Scope::DetectorOnly, || components.observe(&obs))??;

            match verdict {
                DetectorVerdict::NoDrift => {}
                DetectorVerdict::Warning => {
                    events.push(DriftEvent {
                        index,
                        kind: EventKind::Warning,
                        labels_requested: 0,
                    });
                }
                DetectorVerdict::Drift { position } => {
                    detections += 1;
                    let outcome = handle_drift(
                        components,
                        options,
                        inference,
                        base,
                        index,
                        since_last_drift,
                        &mut ledger,
                        &mut pending,
                    )?;
                    // The drift event records the detector's claimed drift
                    // position, which may precede the emitting sample.
                    events.push(DriftEvent {
                        index: position,
                        kind: EventKind::Drift,
                        labels_requested: outcome.requested_now,
                    });
                    if outcome.retrained {
                        events.push(DriftEvent {
                            index,
                            kind: EventKind::Retrain,
                            labels_requested: 0,
                        });
                    }
                    since_last_drift = index + 1;
                }
            }

            // Deferred forward collection advances on every sample after
            // the drift that opened it.
            if let Some(p) = pending.as_mut() {
                if !ledger.is_requested(index) {
                    ledger.request(index)?;
                    p.newly_requested += 1;
                }
                p.buffer.push(sample.clone());
                p.remaining -= 1;
                if p.remaining == 0 {
                    let done = pending.take().expect("pending is set");
                    components.retrain(&done.buffer)?;
                    events.push(DriftEvent {
                        index,
                        kind: EventKind::Retrain,
                        labels_requested: done.newly_requested,
                    });
                }
            }

            // Periodic retraining fires on sample count, not verdicts, and
            // consumes every label once.
            if let Handling::PeriodicRetrain { period } = options.handling {
                ledger.request(index)?;
                periodic_buffer.push(sample.clone());
                if periodic_buffer.len() == period {
                    components.retrain(&periodic_buffer)?;
                    events.push(DriftEvent {
                        index,
                        kind: EventKind::Retrain,
                        labels_requested: period,
                    });
                    periodic_buffer.clear();
                }
            }
        }
    }
    timer.validate_balanced()?;

    if timed_out {
        return Ok(RunOutput {
            metrics: RunMetrics::timed_out(),
            events,
            per_sample_correct: Vec::new(),
        });
    }

    let metrics = RunMetrics::completed(
        timer.total_seconds(),
        timer.detector_seconds(),
        probe.peak_mib(),
        accuracy.value()?,
        detections,
        req_labels_final(ledger.count, inference.len())?,
    )?;
    Ok(RunOutput {
        metrics,
        events,
        per_sample_correct: correct,
    })
}

struct HandlingOutcome {
    /// Labels requested immediately (backward-window scopes).
    requested_now: usize,
    /// A retrain ran as part of this handling step.
    retrained: bool,
}

/// Applies the handling strategy to a fresh drift verdict. Runs inside
/// `Total`, outside `DetectorOnly`.
#[allow(clippy::too_many_arguments)]
fn handle_drift(
    components: &mut dyn ApproachComponents,
    options: &LoopOptions,
    inference: &[LabeledSampleF64],
    base: usize,
    index: usize,
    since_last_drift: usize,
    ledger: &mut LabelLedger,
    pending: &mut Option<PendingCollection>,
) -> Result<HandlingOutcome, HarnessError> {
    let nothing = HandlingOutcome {
        requested_now: 0,
        retrained: false,
    };
    match options.handling {
        Handling::None | Handling::PeriodicRetrain { .. } => Ok(nothing),
        Handling::RetrainWithPseudoLabels => {
            let used = components.pseudo_retrain()?;
            Ok(HandlingOutcome {
                requested_now: 0,
                retrained: used > 0,
            })
        }
        Handling::ReplaceModelWithRequestedLabels => {
            let plan = match options.label_scope {
                LabelRequestScope::SinceLastDrift => Evidence::Window(since_last_drift..index + 1),
                LabelRequestScope::DetectionWindow => match components.drift_evidence() {
                    Evidence::None => Evidence::Window(index..index + 1),
                    other => other,
                },
            };
            match plan {
                Evidence::Window(range) => {
                    let labeled = collect_window(inference, base, &range, ledger)?;
                    let requested = labeled.len();
                    components.retrain(&labeled)?;
                    Ok(HandlingOutcome {
                        requested_now: requested,
                        retrained: true,
                    })
                }
                Evidence::Upcoming(n) => {
                    // Collection starts at the drift sample itself (the
                    // first of the new concept); the loop's pending block
                    // feeds it this very step. A collection already in
                    // flight is superseded.
                    if n > 0 {
                        *pending = Some(PendingCollection {
                            remaining: n,
                            buffer: Vec::with_capacity(n),
                            newly_requested: 0,
                        });
                    }
                    Ok(nothing)
                }
                Evidence::None => Ok(nothing),
            }
        }
    }
}

fn collect_window(
    inference: &[LabeledSampleF64],
    base: usize,
    range: &Range<usize>,
    ledger: &mut LabelLedger,
) -> Result<Vec<LabeledSampleF64>, HarnessError> {
    let mut out = Vec::with_capacity(range.len());
    for index in range.clone() {
        let offset = index
            .checked_sub(base)
            .filter(|o| *o < inference.len())
            .ok_or(HarnessError::LabelOutsideStream { index })?;
        ledger.request(index)?;
        out.push(inference[offset].clone());
    }
    Ok(out)
}

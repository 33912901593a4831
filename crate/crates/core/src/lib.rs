//! Benchmark harness for unsupervised concept-drift detectors.
//!
//! The crate measures two sides of a drift detector at once: detection
//! quality (accuracy of the accompanying base model, detection counts,
//! requested labels) and computational cost (total pipeline runtime,
//! detector-only runtime, relative runtime overhead, peak memory). All
//! detectors run behind one streaming interface inside one instrumented
//! pipeline so the numbers are comparable across approaches.
//!
//! Layout:
//! - [`stream`]: samples, sliding windows with order statistics, verdicts
//! - [`data`]: CSV ingestion, synthetic drift-stream generation, splits
//! - [`models`]: incremental Gaussian naive Bayes, k-means classifier,
//!   ensembles with local-accuracy member selection
//! - [`detectors`]: the drift detectors plus null/oracle references
//! - [`metrics`]: scoped wall-clock timers, peak-RSS probe, counters
//! - [`harness`]: the instrumented prediction/detection/handling loop
//! - [`report`]: aggregation over repetitions and table emission
//!
//! Stream and model math is generic over the scalar type; the harness
//! itself runs the `f64` instantiations aliased below.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive};

pub mod data;
pub mod detectors;
pub mod harness;
pub mod metrics;
pub mod models;
pub mod report;
pub mod stream;

/// Scalar bound for stream values: any IEEE float with the conversions
/// the generators and model math need. Implemented by `f32` and `f64`.
pub trait Real: Float + FromPrimitive + Debug + Display + Default + Send + Sync + 'static {}

impl<T> Real for T where T: Float + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{}

/// Class labels are dense small integers assigned in first-appearance order.
pub type ClassLabel = usize;

// Double-precision instantiations used by the harness and the CLI.
pub type FeatureVectorF64 = stream::FeatureVector<f64>;
pub type SampleF64 = stream::Sample<f64>;
pub type LabeledSampleF64 = stream::LabeledSample<f64>;
pub type SlidingWindowF64 = stream::SlidingWindow<f64>;
pub type GaussianNbF64 = models::GaussianNb<f64>;
pub type KMeansClassifierF64 = models::KMeansClassifier<f64>;
pub type EnsembleF64 = models::Ensemble<f64>;

// Single-precision aliases for callers that stream f32 features.
pub type FeatureVectorF32 = stream::FeatureVector<f32>;
pub type SlidingWindowF32 = stream::SlidingWindow<f32>;

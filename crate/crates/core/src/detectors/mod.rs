//! Unsupervised drift detectors behind one streaming interface.
//!
//! Every detector consumes one [`Observation`] per stream sample (the raw
//! features plus the base model's prediction and confidence) and returns
//! exactly one [`DetectorVerdict`]. Detection paths hold no hidden
//! randomness: a detector's verdict sequence is a function of its
//! configuration and the observation sequence.
//!
//! After a `Drift` verdict each detector re-initializes its internal
//! statistics (window promotion for the KS detector, full state reset for
//! the error-distance detectors) so a repeated stationary stream warms up
//! like a fresh instance.

use std::ops::Range;

use thiserror::Error;

use crate::models::ModelError;
use crate::stream::{DetectorVerdict, FeatureVector, StreamError};
use crate::{ClassLabel, Real};

mod eddm;
mod iks;
mod pinage;
mod reference;
mod sand;
mod studd;

pub use eddm::{EddmConfig, EddmOutcome, EddmState};
pub use iks::{ks_critical, ks_statistic, IksConfig, IksDetector};
pub use pinage::{PinageConfig, PinageDetector};
pub use reference::{NullDetector, OracleDetector, SleepStubDetector};
pub use sand::{bdcp_scan, SandConfig, SandDetector};
pub use studd::StuddDetector;

#[derive(Debug, Error, PartialEq)]
pub enum DetectorError {
    #[error(transparent)]
    Stream(#[from] StreamError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("confidence {0} outside [0, 1]")]
    ConfidenceOutOfRange(f64),
    #[error("feature index {index} out of range for {dims} features")]
    FeatureIndexOutOfRange { index: usize, dims: usize },
    #[error("scan window of {len} is shorter than 2 * min_segment = {need}")]
    WindowTooShort { len: usize, need: usize },
    #[error("significance level must be in (0, 1), got {0}")]
    InvalidAlpha(f64),
    #[error("window sizes must be positive")]
    EmptySample,
    #[error("min_segment must be positive")]
    ZeroMinSegment,
}

/// One stream sample as the detectors see it: features plus the base
/// model's output for that sample.
#[derive(Debug, Clone)]
pub struct Observation<'a, F: Real> {
    pub index: usize,
    pub features: &'a FeatureVector<F>,
    pub prediction: ClassLabel,
    pub confidence: F,
}

/// The samples a detector considers evidence for its most recent drift.
/// Drift handling uses this to decide which labels to request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Evidence {
    /// The detector names no evidence span.
    None,
    /// Already-observed stream indices (half-open range).
    Window(Range<usize>),
    /// The next `n` samples after the drift position; labels are collected
    /// as those samples arrive.
    Upcoming(usize),
}

/// Streaming interface shared by the single-model detectors.
pub trait DriftDetector<F: Real> {
    fn observe(&mut self, obs: &Observation<'_, F>) -> Result<DetectorVerdict, DetectorError>;

    /// Evidence recorded at the most recent drift verdict.
    fn drift_evidence(&self) -> Evidence {
        Evidence::None
    }
}

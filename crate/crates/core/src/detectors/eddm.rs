//! Error-distance drift detection (EDDM-style).
//!
//! The detector tracks the number of steps between consecutive error events.
//! On each error it updates the running mean `p'` and standard deviation
//! `s'` of those distances and compares the level `p' + 2 s'` against its
//! recorded maximum: shrinking distances pull the ratio
//! `q = (p' + 2 s') / max` down, crossing the warning and drift thresholds.
//! Verdicts are suppressed until `min_errors` errors have been seen, and a
//! drift verdict resets the state to fresh warm-up.

use crate::stream::DetectorVerdict;

#[derive(Debug, Clone)]
pub struct EddmConfig {
    pub warn_threshold: f64,
    pub drift_threshold: f64,
    pub min_errors: u64,
}

impl Default for EddmConfig {
    fn default() -> Self {
        Self {
            warn_threshold: 0.95,
            drift_threshold: 0.90,
            min_errors: 30,
        }
    }
}

/// What an update call observed; wrappers that buffer samples during warning
/// zones need to distinguish an in-control error from a non-error step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EddmOutcome {
    /// No error at this step.
    NonError,
    /// Error observed, level within normal range (or still warming up).
    InControl,
    /// Error observed, `q` below the warning threshold.
    Warning,
    /// Error observed, `q` below the drift threshold; state has been reset.
    Drift,
}

#[derive(Debug, Clone)]
pub struct EddmState {
    config: EddmConfig,
    observed: u64,
    error_count: u64,
    last_error_at: Option<u64>,
    dist_count: u64,
    dist_mean: f64,
    dist_m2: f64,
    max_level: f64,
}

impl EddmState {
    pub fn new(config: EddmConfig) -> Self {
        Self {
            config,
            observed: 0,
            error_count: 0,
            last_error_at: None,
            dist_count: 0,
            dist_mean: 0.0,
            dist_m2: 0.0,
            max_level: 0.0,
        }
    }

    pub fn config(&self) -> &EddmConfig {
        &self.config
    }

    pub fn error_count(&self) -> u64 {
        self.error_count
    }

    /// Steps observed since construction; drift positions are reported in
    /// this 0-based coordinate.
    pub fn observed(&self) -> u64 {
        self.observed
    }

    fn reset(&mut self) {
        self.error_count = 0;
        self.last_error_at = None;
        self.dist_count = 0;
        self.dist_mean = 0.0;
        self.dist_m2 = 0.0;
        self.max_level = 0.0;
    }

    /// Advances one step and classifies it. Distances update only on error
    /// events; the first error after construction or reset anchors the
    /// distance chain without recording one.
    pub fn step(&mut self, is_error: bool) -> EddmOutcome {
        let idx = self.observed;
        self.observed += 1;
        if !is_error {
            return EddmOutcome::NonError;
        }
        self.error_count += 1;
        let prev = match self.last_error_at.replace(idx) {
            Some(prev) => prev,
            None => return EddmOutcome::InControl,
        };

        let distance = (idx - prev) as f64;
        self.dist_count += 1;
        let delta = distance - self.dist_mean;
        self.dist_mean += delta / self.dist_count as f64;
        self.dist_m2 += delta * (distance - self.dist_mean);
        let std = (self.dist_m2 / self.dist_count as f64).sqrt();
        let level = self.dist_mean + 2.0 * std;
        if level > self.max_level {
            self.max_level = level;
        }

        if self.error_count < self.config.min_errors {
            return EddmOutcome::InControl;
        }
        let q = level / self.max_level;
        if q < self.config.drift_threshold {
            self.reset();
            EddmOutcome::Drift
        } else if q < self.config.warn_threshold {
            EddmOutcome::Warning
        } else {
            EddmOutcome::InControl
        }
    }

    /// [`Self::step`] mapped onto the shared verdict type. Drift positions
    /// are in the detector's own step coordinates.
    pub fn update(&mut self, is_error: bool) -> DetectorVerdict {
        let pos = self.observed as usize;
        match self.step(is_error) {
            EddmOutcome::Drift => DetectorVerdict::Drift { position: pos },
            EddmOutcome::Warning => DetectorVerdict::Warning,
            EddmOutcome::NonError | EddmOutcome::InControl => DetectorVerdict::NoDrift,
        }
    }
}

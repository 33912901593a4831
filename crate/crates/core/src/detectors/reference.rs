//! Reference detectors for harness calibration.
//!
//! `NullDetector` never fires, `OracleDetector` fires exactly at annotated
//! ground-truth indices, and `SleepStubDetector` burns a fixed amount of
//! wall-clock time per sample so instrumentation scoping can be verified
//! against known costs.

use std::time::Duration;

use crate::stream::DetectorVerdict;
use crate::Real;

use super::{DetectorError, DriftDetector, Evidence, Observation};

/// Always `NoDrift`; pairing it with no handling reproduces a static model.
#[derive(Debug, Clone, Default)]
pub struct NullDetector;

impl<F: Real> DriftDetector<F> for NullDetector {
    fn observe(&mut self, _obs: &Observation<'_, F>) -> Result<DetectorVerdict, DetectorError> {
        Ok(DetectorVerdict::NoDrift)
    }
}

/// Fires exactly at the annotated drift indices. With an empty annotation
/// list it behaves as the null detector. Its drift evidence is the upcoming
/// window: at an annotated change point the new concept lies ahead, so
/// label-requesting handlers collect the next `forward_window` samples.
#[derive(Debug, Clone)]
pub struct OracleDetector {
    truth: Vec<usize>,
    forward_window: usize,
    drifted: bool,
}

impl OracleDetector {
    pub fn new(mut truth: Vec<usize>, forward_window: usize) -> Self {
        truth.sort_unstable();
        Self {
            truth,
            forward_window,
            drifted: false,
        }
    }
}

impl<F: Real> DriftDetector<F> for OracleDetector {
    fn observe(&mut self, obs: &Observation<'_, F>) -> Result<DetectorVerdict, DetectorError> {
        if self.truth.binary_search(&obs.index).is_ok() {
            self.drifted = true;
            return Ok(DetectorVerdict::Drift {
                position: obs.index,
            });
        }
        Ok(DetectorVerdict::NoDrift)
    }

    fn drift_evidence(&self) -> Evidence {
        if self.drifted {
            Evidence::Upcoming(self.forward_window)
        } else {
            Evidence::None
        }
    }
}

/// Sleeps a fixed duration per observed sample and fires at the configured
/// indices. Exists so timing tests can compare measured detector time
/// against a known cost.
#[derive(Debug, Clone)]
pub struct SleepStubDetector {
    per_sample: Duration,
    fire_at: Vec<usize>,
    drifted_at: Option<usize>,
}

impl SleepStubDetector {
    pub fn new(per_sample: Duration, mut fire_at: Vec<usize>) -> Self {
        fire_at.sort_unstable();
        Self {
            per_sample,
            fire_at,
            drifted_at: None,
        }
    }
}

impl<F: Real> DriftDetector<F> for SleepStubDetector {
    fn observe(&mut self, obs: &Observation<'_, F>) -> Result<DetectorVerdict, DetectorError> {
        if !self.per_sample.is_zero() {
            std::thread::sleep(self.per_sample);
        }
        if self.fire_at.binary_search(&obs.index).is_ok() {
            self.drifted_at = Some(obs.index);
            return Ok(DetectorVerdict::Drift {
                position: obs.index,
            });
        }
        Ok(DetectorVerdict::NoDrift)
    }

    fn drift_evidence(&self) -> Evidence {
        match self.drifted_at {
            Some(i) => Evidence::Window(i..i + 1),
            None => Evidence::None,
        }
    }
}

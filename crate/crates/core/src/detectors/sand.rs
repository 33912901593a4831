//! Confidence-drop drift detection (SAND-style).
//!
//! The detector keeps a FIFO window of base-model confidences. Scanning is
//! gated: the change-point scan only runs when the newest confidence falls
//! below the trigger threshold, which keeps the detector cheap while the
//! model is confident. The scan itself is a Gaussian mean-shift
//! log-likelihood-ratio segmentation with a drop-direction guard.

use std::collections::VecDeque;
use std::ops::Range;

use crate::stream::DetectorVerdict;
use crate::Real;

use super::{DetectorError, DriftDetector, Evidence, Observation};

/// Scans for the best split of `confidences` into two mean-level segments.
///
/// For each split position `k` in `[min_segment, n - min_segment]` the gain
/// is the log-likelihood improvement of modeling the two segments with their
/// own sample means instead of one shared mean, under a common variance
/// estimated over the whole window (floored at 1e-9):
///
/// `G(k) = (k (n-k) / n) * (mean_left - mean_right)^2 / (2 * var)`
///
/// The best split is returned only when its gain exceeds `gain_threshold`
/// and the right segment's mean is *below* the left's: confidences must
/// drop, rising confidence is not drift.
pub fn bdcp_scan<F: Real>(
    confidences: &[F],
    min_segment: usize,
    gain_threshold: f64,
) -> Result<Option<usize>, DetectorError> {
    if min_segment == 0 {
        return Err(DetectorError::ZeroMinSegment);
    }
    let n = confidences.len();
    if n < 2 * min_segment {
        return Err(DetectorError::WindowTooShort {
            len: n,
            need: 2 * min_segment,
        });
    }

    let values: Vec<f64> = confidences
        .iter()
        .map(|v| v.to_f64().unwrap_or(0.0))
        .collect();
    let total: f64 = values.iter().sum();
    let mean = total / n as f64;
    let var = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).max(1e-9);

    let mut prefix = 0.0f64;
    let mut best: Option<(usize, f64, f64, f64)> = None;
    for k in 1..n {
        prefix += values[k - 1];
        if k < min_segment || k > n - min_segment {
            continue;
        }
        let mean_left = prefix / k as f64;
        let mean_right = (total - prefix) / (n - k) as f64;
        let gain =
            (k as f64 * (n - k) as f64 / n as f64) * (mean_left - mean_right).powi(2) / (2.0 * var);
        if best.is_none_or(|(_, g, _, _)| gain > g) {
            best = Some((k, gain, mean_left, mean_right));
        }
    }

    Ok(best.and_then(|(k, gain, mean_left, mean_right)| {
        (gain > gain_threshold && mean_right < mean_left).then_some(k)
    }))
}

#[derive(Debug, Clone)]
pub struct SandConfig {
    /// Confidence window capacity.
    pub window: usize,
    /// Trigger threshold: the scan runs only when the newest confidence is
    /// below this value.
    pub tau: f64,
    /// Minimum segment length on either side of a split.
    pub min_segment: usize,
    /// Gain threshold for the scan; `None` uses the size-aware default
    /// `2 ln(n)` at scan time.
    pub gain_threshold: Option<f64>,
}

impl Default for SandConfig {
    fn default() -> Self {
        Self {
            window: 100,
            tau: 0.25,
            min_segment: 10,
            gain_threshold: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SandDetector<F: Real> {
    config: SandConfig,
    window: VecDeque<F>,
    scan_invocations: u64,
    last_evidence: Option<Range<usize>>,
}

impl<F: Real> SandDetector<F> {
    pub fn new(config: SandConfig) -> Self {
        let cap = config.window;
        Self {
            config,
            window: VecDeque::with_capacity(cap),
            scan_invocations: 0,
            last_evidence: None,
        }
    }

    pub fn config(&self) -> &SandConfig {
        &self.config
    }

    /// How many times the change-point scan actually ran. The gating
    /// invariant bounds this by the number of sub-threshold confidences.
    pub fn scan_invocations(&self) -> u64 {
        self.scan_invocations
    }
}

impl<F: Real> DriftDetector<F> for SandDetector<F> {
    fn observe(&mut self, obs: &Observation<'_, F>) -> Result<DetectorVerdict, DetectorError> {
        let conf = obs.confidence;
        if conf < F::zero() || conf > F::one() {
            return Err(DetectorError::ConfidenceOutOfRange(
                conf.to_f64().unwrap_or(f64::NAN),
            ));
        }
        if self.window.len() == self.config.window {
            self.window.pop_front();
        }
        self.window.push_back(conf);

        let len = self.window.len();
        if conf.to_f64().unwrap_or(1.0) >= self.config.tau || len < 2 * self.config.min_segment {
            return Ok(DetectorVerdict::NoDrift);
        }

        self.scan_invocations += 1;
        let values: Vec<F> = self.window.iter().copied().collect();
        let threshold = self
            .config
            .gain_threshold
            .unwrap_or_else(|| 2.0 * (len as f64).ln());
        if let Some(k) = bdcp_scan(&values, self.config.min_segment, threshold)? {
            // Window slot k is the first sample of the dropped segment;
            // map it back to stream coordinates.
            let change_pos = obs.index + 1 - len + k;
            self.last_evidence = Some(change_pos..obs.index + 1);
            self.window.clear();
            return Ok(DetectorVerdict::Drift {
                position: change_pos,
            });
        }
        Ok(DetectorVerdict::NoDrift)
    }

    fn drift_evidence(&self) -> Evidence {
        match &self.last_evidence {
            Some(r) => Evidence::Window(r.clone()),
            None => Evidence::None,
        }
    }
}

//! Kolmogorov–Smirnov drift detection over a single input feature.
//!
//! The detector fills a reference window with the first `w` observed values,
//! then slides a detection window over the rest of the stream. Once both
//! windows are full it compares their empirical distributions each step and
//! flags drift when the KS statistic exceeds the closed-form critical value.
//! On drift the detection window becomes the new reference.

use std::ops::Range;

use crate::stream::{DetectorVerdict, SlidingWindow};
use crate::Real;

use super::{DetectorError, DriftDetector, Evidence, Observation};

/// Two-sample KS statistic: the largest absolute ECDF difference, evaluated
/// at every value present in either window.
pub fn ks_statistic<F: Real>(
    reference: &SlidingWindow<F>,
    detection: &SlidingWindow<F>,
) -> Result<F, DetectorError> {
    if reference.is_empty() || detection.is_empty() {
        return Err(DetectorError::EmptySample);
    }
    let mut d = F::zero();
    for &v in reference.sorted().iter().chain(detection.sorted()) {
        let diff = (reference.ecdf(v)? - detection.ecdf(v)?).abs();
        if diff > d {
            d = diff;
        }
    }
    Ok(d)
}

/// Closed-form two-sample KS critical value
/// `c(alpha) * sqrt((n + m) / (n * m))` with
/// `c(alpha) = sqrt(-0.5 * ln(alpha / 2))`.
pub fn ks_critical(alpha: f64, n: usize, m: usize) -> Result<f64, DetectorError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(DetectorError::InvalidAlpha(alpha));
    }
    if n == 0 || m == 0 {
        return Err(DetectorError::EmptySample);
    }
    let c = (-0.5 * (alpha / 2.0).ln()).sqrt();
    let (n, m) = (n as f64, m as f64);
    Ok(c * ((n + m) / (n * m)).sqrt())
}

#[derive(Debug, Clone)]
pub struct IksConfig {
    /// Input dimension the detector monitors.
    pub feature_index: usize,
    /// Capacity shared by the reference and detection windows.
    pub window: usize,
    /// Significance level for the critical value.
    pub alpha: f64,
}

impl Default for IksConfig {
    fn default() -> Self {
        Self {
            feature_index: 0,
            window: 100,
            alpha: 0.001,
        }
    }
}

#[derive(Debug, Clone)]
pub struct IksDetector<F: Real> {
    config: IksConfig,
    reference: SlidingWindow<F>,
    detection: SlidingWindow<F>,
    threshold: f64,
    last_evidence: Option<Range<usize>>,
}

impl<F: Real> IksDetector<F> {
    pub fn new(config: IksConfig) -> Result<Self, DetectorError> {
        let threshold = ks_critical(config.alpha, config.window, config.window)?;
        Ok(Self {
            reference: SlidingWindow::new(config.window)?,
            detection: SlidingWindow::new(config.window)?,
            config,
            threshold,
            last_evidence: None,
        })
    }

    pub fn config(&self) -> &IksConfig {
        &self.config
    }

    /// Critical value the statistic is compared against.
    pub fn threshold(&self) -> f64 {
        self.threshold
    }
}

impl<F: Real> DriftDetector<F> for IksDetector<F> {
    fn observe(&mut self, obs: &Observation<'_, F>) -> Result<DetectorVerdict, DetectorError> {
        let x = obs.features.get(self.config.feature_index).ok_or(
            DetectorError::FeatureIndexOutOfRange {
                index: self.config.feature_index,
                dims: obs.features.len(),
            },
        )?;

        if !self.reference.is_full() {
            self.reference.push(x)?;
            return Ok(DetectorVerdict::NoDrift);
        }
        self.detection.push(x)?;
        if !self.detection.is_full() {
            return Ok(DetectorVerdict::NoDrift);
        }

        let d = ks_statistic(&self.reference, &self.detection)?;
        if d.to_f64().unwrap_or(0.0) > self.threshold {
            let w = self.config.window;
            self.last_evidence = Some(obs.index + 1 - w..obs.index + 1);
            // Promote the detection window to the new reference and start a
            // fresh detection phase.
            self.reference.reload_from(&self.detection);
            self.detection.clear();
            return Ok(DetectorVerdict::Drift {
                position: obs.index,
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

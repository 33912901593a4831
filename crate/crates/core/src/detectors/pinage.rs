//! Pseudo-error drift detection over an ensemble.
//!
//! Each sample is pseudo-labeled by the ensemble member that is locally most
//! accurate around it (DCS-LA over a labeled validation pool). Disagreement
//! between the ensemble's majority vote and that pseudo-label is the
//! pseudo-error fed into an [`EddmState`]; the whole chain uses no true
//! labels. Samples seen while the inner detector is in its warning zone are
//! buffered with their pseudo-labels so drift handling can retrain the
//! members without requesting anything.

use std::ops::Range;

use crate::models::Ensemble;
use crate::stream::{DetectorVerdict, LabeledSample, Sample};
use crate::{ClassLabel, Real};

use super::{DetectorError, EddmConfig, EddmOutcome, EddmState, Evidence, Observation};

#[derive(Debug, Clone)]
pub struct PinageConfig {
    pub ensemble_size: usize,
    pub k_neighbors: usize,
    pub eddm: EddmConfig,
}

impl Default for PinageConfig {
    fn default() -> Self {
        Self {
            ensemble_size: 10,
            k_neighbors: 7,
            eddm: EddmConfig::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PinageDetector<F: Real> {
    ensemble: Ensemble<F>,
    inner: EddmState,
    warning_open_at: Option<usize>,
    warning_buffer: Vec<LabeledSample<F>>,
    last_evidence: Option<Range<usize>>,
}

impl<F: Real> PinageDetector<F> {
    pub fn new(ensemble: Ensemble<F>, eddm: EddmConfig) -> Self {
        Self {
            ensemble,
            inner: EddmState::new(eddm),
            warning_open_at: None,
            warning_buffer: Vec::new(),
            last_evidence: None,
        }
    }

    pub fn ensemble(&self) -> &Ensemble<F> {
        &self.ensemble
    }

    pub fn ensemble_mut(&mut self) -> &mut Ensemble<F> {
        &mut self.ensemble
    }

    /// Pseudo-labeled samples buffered since the warning zone opened. Drift
    /// handling drains this; the drift verdict leaves it intact.
    pub fn take_warning_buffer(&mut self) -> Vec<LabeledSample<F>> {
        std::mem::take(&mut self.warning_buffer)
    }

    /// Processes one sample. `obs.prediction` carries the ensemble's
    /// majority vote (the pipeline's base-model prediction), so the vote is
    /// not recomputed inside the timed detector path.
    pub fn update(
        &mut self,
        obs: &Observation<'_, F>,
    ) -> Result<(ClassLabel, DetectorVerdict), DetectorError> {
        let selected = self.ensemble.dcsla_select(obs.features)?;
        let (pseudo_label, _) = self.ensemble.member_predict(selected, obs.features)?;
        let pseudo_error = obs.prediction != pseudo_label;

        let verdict = match self.inner.step(pseudo_error) {
            EddmOutcome::Drift => {
                let start = self.warning_open_at.take().unwrap_or(obs.index);
                self.last_evidence = Some(start..obs.index + 1);
                self.buffer_sample(obs, pseudo_label);
                DetectorVerdict::Drift {
                    position: obs.index,
                }
            }
            EddmOutcome::Warning => {
                self.warning_open_at.get_or_insert(obs.index);
                self.buffer_sample(obs, pseudo_label);
                DetectorVerdict::Warning
            }
            EddmOutcome::InControl => {
                // Back under control: the zone closes and its buffer drops.
                self.warning_open_at = None;
                self.warning_buffer.clear();
                DetectorVerdict::NoDrift
            }
            EddmOutcome::NonError => {
                if self.warning_open_at.is_some() {
                    self.buffer_sample(obs, pseudo_label);
                }
                DetectorVerdict::NoDrift
            }
        };
        Ok((pseudo_label, verdict))
    }

    fn buffer_sample(&mut self, obs: &Observation<'_, F>, pseudo_label: ClassLabel) {
        self.warning_buffer.push(LabeledSample {
            sample: Sample {
                index: obs.index,
                features: obs.features.clone(),
            },
            label: pseudo_label,
        });
    }

    pub fn drift_evidence(&self) -> Evidence {
        match &self.last_evidence {
            Some(r) => Evidence::Window(r.clone()),
            None => Evidence::None,
        }
    }
}

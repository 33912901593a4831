//! Stream element types and the sliding window shared by the detectors.
//!
//! A stream is a sequence of [`Sample`]s with strictly increasing indices.
//! Detectors that compare data distributions keep [`SlidingWindow`]s over a
//! single feature; the window maintains an incrementally sorted view of its
//! contents so empirical CDF queries do not rescan the buffer.

use std::collections::VecDeque;

use thiserror::Error;

use crate::{ClassLabel, Real};

#[derive(Debug, Error, PartialEq)]
pub enum StreamError {
    #[error("non-finite value rejected: {0}")]
    NonFinite(f64),
    #[error("operation on empty window")]
    EmptyWindow,
    #[error("feature vector has length {got}, stream dimensionality is {want}")]
    DimensionMismatch { got: usize, want: usize },
    #[error("window capacity must be positive")]
    ZeroCapacity,
}

/// One stream element's input features. Entries are finite by construction
/// of the loaders and generators; the window re-checks on push.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector<F: Real> {
    values: Vec<F>,
}

impl<F: Real> FeatureVector<F> {
    /// Wraps raw values, rejecting NaN and infinities.
    pub fn new(values: Vec<F>) -> Result<Self, StreamError> {
        for v in &values {
            if !v.is_finite() {
                return Err(StreamError::NonFinite(v.to_f64().unwrap_or(f64::NAN)));
            }
        }
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<F> {
        self.values.get(i).copied()
    }

    pub fn values(&self) -> &[F] {
        &self.values
    }

    /// Squared Euclidean distance to another vector of the same length.
    pub fn sq_dist(&self, other: &Self) -> F {
        debug_assert_eq!(self.len(), other.len());
        self.values
            .iter()
            .zip(&other.values)
            .fold(F::zero(), |acc, (a, b)| {
                let d = *a - *b;
                acc + d * d
            })
    }
}

/// A position-stamped feature vector. Indices increase by one within a stream.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample<F: Real> {
    pub index: usize,
    pub features: FeatureVector<F>,
}

/// A sample together with its ground-truth class.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample<F: Real> {
    pub sample: Sample<F>,
    pub label: ClassLabel,
}

impl<F: Real> LabeledSample<F> {
    pub fn features(&self) -> &FeatureVector<F> {
        &self.sample.features
    }

    pub fn index(&self) -> usize {
        self.sample.index
    }
}

/// Per-sample detector output. `Drift` carries the stream index the detector
/// assigns to the change; it never exceeds the index of the sample that
/// produced the verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectorVerdict {
    NoDrift,
    Warning,
    Drift { position: usize },
}

impl DetectorVerdict {
    pub fn is_drift(&self) -> bool {
        matches!(self, DetectorVerdict::Drift { .. })
    }
}

/// Fixed-capacity FIFO over scalars with an incrementally maintained sorted
/// view. Pushing at capacity evicts the oldest element. The sorted view is
/// kept by binary insertion, so ECDF queries are a binary search; results
/// equal a linear scan exactly.
#[derive(Debug, Clone)]
pub struct SlidingWindow<F: Real> {
    capacity: usize,
    fifo: VecDeque<F>,
    sorted: Vec<F>,
}

impl<F: Real> SlidingWindow<F> {
    pub fn new(capacity: usize) -> Result<Self, StreamError> {
        if capacity == 0 {
            return Err(StreamError::ZeroCapacity);
        }
        Ok(Self {
            capacity,
            fifo: VecDeque::with_capacity(capacity),
            sorted: Vec::with_capacity(capacity),
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.fifo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fifo.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.fifo.len() == self.capacity
    }

    /// Contents in push (FIFO) order, oldest first.
    pub fn iter(&self) -> impl Iterator<Item = F> + '_ {
        self.fifo.iter().copied()
    }

    /// Contents in ascending order.
    pub fn sorted(&self) -> &[F] {
        &self.sorted
    }

    /// Pushes a value, returning the evicted oldest element when full.
    pub fn push(&mut self, x: F) -> Result<Option<F>, StreamError> {
        if !x.is_finite() {
            return Err(StreamError::NonFinite(x.to_f64().unwrap_or(f64::NAN)));
        }
        let evicted = if self.fifo.len() == self.capacity {
            let old = self.fifo.pop_front().expect("full window is non-empty");
            let pos = self.sorted.partition_point(|v| {
                v.partial_cmp(&old).expect("finite") == std::cmp::Ordering::Less
            });
            debug_assert!(pos < self.sorted.len() && self.sorted[pos] == old);
            self.sorted.remove(pos);
            Some(old)
        } else {
            None
        };
        self.fifo.push_back(x);
        let pos = self
            .sorted
            .partition_point(|v| v.partial_cmp(&x).expect("finite") == std::cmp::Ordering::Less);
        self.sorted.insert(pos, x);
        Ok(evicted)
    }

    /// Empirical CDF at `x`: the fraction of contents `<= x` (weak
    /// inequality, duplicates all counted).
    pub fn ecdf(&self, x: F) -> Result<F, StreamError> {
        let n = self.count_le(x)?;
        let len = F::from_usize(self.len()).expect("window length fits in F");
        Ok(F::from_usize(n).expect("count fits in F") / len)
    }

    /// Number of contents `<= x`.
    pub fn count_le(&self, x: F) -> Result<usize, StreamError> {
        if self.is_empty() {
            return Err(StreamError::EmptyWindow);
        }
        Ok(self
            .sorted
            .partition_point(|v| v.partial_cmp(&x) != Some(std::cmp::Ordering::Greater)))
    }

    /// Replaces this window's contents with a copy of another window's, in
    /// FIFO order. Used by detectors that promote the detection window to
    /// the new reference on drift.
    pub fn reload_from(&mut self, other: &SlidingWindow<F>) {
        self.fifo.clear();
        self.sorted.clear();
        for v in other.iter() {
            // Values were validated on their original push.
            let _ = self.push(v);
        }
    }

    pub fn clear(&mut self) {
        self.fifo.clear();
        self.sorted.clear();
    }
}

//! Incremental base classifiers the detector pipelines run against.
//!
//! The supervised base model is a Gaussian naive Bayes with running-moment
//! updates, kept behind small structs so a tree-based learner can slot in
//! later. The confidence-driven pipeline uses a k-means classifier whose
//! confidence combines cluster purity with distance decay, and the
//! pseudo-error pipeline uses a bagged ensemble with dynamic member
//! selection by local accuracy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::stream::{FeatureVector, LabeledSample};
use crate::{ClassLabel, Real};

/// Floor applied to every variance estimate so constant features keep
/// densities finite.
pub const VARIANCE_FLOOR: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("predict called on a model with no training data")]
    Unfitted,
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("label {label} out of range for {class_count} classes")]
    LabelOutOfRange {
        label: ClassLabel,
        class_count: usize,
    },
    #[error("k = {k} exceeds training set size {n}")]
    KTooLarge { k: usize, n: usize },
    #[error("ensemble has no members")]
    EmptyEnsemble,
    #[error("validation pool of {pool} is smaller than k_neighbors = {k}")]
    InsufficientValidation { pool: usize, k: usize },
    #[error("feature vector has length {got}, model expects {want}")]
    DimensionMismatch { got: usize, want: usize },
}

#[derive(Debug, Clone)]
struct ClassMoments<F: Real> {
    count: u64,
    mean: Vec<F>,
    m2: Vec<F>,
}

impl<F: Real> ClassMoments<F> {
    fn new(dims: usize) -> Self {
        Self {
            count: 0,
            mean: vec![F::zero(); dims],
            m2: vec![F::zero(); dims],
        }
    }

    fn update(&mut self, x: &[F]) {
        self.count += 1;
        let n = F::from_u64(self.count).expect("count fits in F");
        for (j, &v) in x.iter().enumerate() {
            let delta = v - self.mean[j];
            self.mean[j] = self.mean[j] + delta / n;
            let delta2 = v - self.mean[j];
            self.m2[j] = self.m2[j] + delta * delta2;
        }
    }

    fn variance(&self, j: usize) -> F {
        let floor = F::from_f64(VARIANCE_FLOOR).expect("floor fits in F");
        if self.count == 0 {
            return floor;
        }
        let n = F::from_u64(self.count).expect("count fits in F");
        (self.m2[j] / n).max(floor)
    }
}

/// Gaussian naive Bayes over dense classes `0..class_count`, trained either
/// in one pass over a labeled set or sample-by-sample. Running means and
/// variances use Welford accumulators, so the incremental path matches a
/// batch refit over the union of the data.
#[derive(Debug, Clone)]
pub struct GaussianNb<F: Real> {
    dims: usize,
    classes: Vec<ClassMoments<F>>,
    total: u64,
}

impl<F: Real> GaussianNb<F> {
    pub fn new(dims: usize, class_count: usize) -> Self {
        Self {
            dims,
            classes: (0..class_count).map(|_| ClassMoments::new(dims)).collect(),
            total: 0,
        }
    }

    pub fn fit(samples: &[LabeledSample<F>], class_count: usize) -> Result<Self, ModelError> {
        let first = samples.first().ok_or(ModelError::EmptyTrainingSet)?;
        let mut model = Self::new(first.features().len(), class_count);
        for s in samples {
            model.partial_fit(s)?;
        }
        Ok(model)
    }

    pub fn partial_fit(&mut self, sample: &LabeledSample<F>) -> Result<(), ModelError> {
        if sample.label >= self.classes.len() {
            return Err(ModelError::LabelOutOfRange {
                label: sample.label,
                class_count: self.classes.len(),
            });
        }
        let x = sample.features().values();
        if x.len() != self.dims {
            return Err(ModelError::DimensionMismatch {
                got: x.len(),
                want: self.dims,
            });
        }
        self.classes[sample.label].update(x);
        self.total += 1;
        Ok(())
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn is_fitted(&self) -> bool {
        self.total > 0
    }

    pub fn class_sample_count(&self, class: ClassLabel) -> u64 {
        self.classes[class].count
    }

    pub fn class_mean(&self, class: ClassLabel, feature: usize) -> F {
        self.classes[class].mean[feature]
    }

    /// Population variance of a feature within a class, floored at
    /// [`VARIANCE_FLOOR`].
    pub fn class_variance(&self, class: ClassLabel, feature: usize) -> F {
        self.classes[class].variance(feature)
    }

    /// Normalized posterior over all classes. Classes without training data
    /// get probability zero.
    pub fn predict_posterior(&self, x: &FeatureVector<F>) -> Result<Vec<F>, ModelError> {
        if self.total == 0 {
            return Err(ModelError::Unfitted);
        }
        if x.len() != self.dims {
            return Err(ModelError::DimensionMismatch {
                got: x.len(),
                want: self.dims,
            });
        }
        let two_pi = F::from_f64(std::f64::consts::TAU).expect("tau fits in F");
        let total = F::from_u64(self.total).expect("total fits in F");
        let half = F::from_f64(0.5).expect("0.5 fits in F");

        let mut log_post: Vec<Option<F>> = Vec::with_capacity(self.classes.len());
        let mut max_lp: Option<F> = None;
        for cls in &self.classes {
            if cls.count == 0 {
                log_post.push(None);
                continue;
            }
            let prior = F::from_u64(cls.count).expect("count fits in F") / total;
            let mut lp = prior.ln();
            for (j, &v) in x.values().iter().enumerate() {
                let var = cls.variance(j);
                let diff = v - cls.mean[j];
                lp = lp - half * ((two_pi * var).ln() + diff * diff / var);
            }
            max_lp = Some(match max_lp {
                Some(m) => m.max(lp),
                None => lp,
            });
            log_post.push(Some(lp));
        }
        let max_lp = max_lp.ok_or(ModelError::Unfitted)?;

        let mut post: Vec<F> = log_post
            .iter()
            .map(|lp| match lp {
                Some(lp) => (*lp - max_lp).exp(),
                None => F::zero(),
            })
            .collect();
        let norm = post.iter().fold(F::zero(), |a, &b| a + b);
        for p in &mut post {
            *p = *p / norm;
        }
        Ok(post)
    }

    /// Argmax-posterior class and its normalized posterior as confidence.
    /// Ties resolve to the lowest class index.
    pub fn predict(&self, x: &FeatureVector<F>) -> Result<(ClassLabel, F), ModelError> {
        let post = self.predict_posterior(x)?;
        let mut best = 0;
        for (c, &p) in post.iter().enumerate() {
            if p > post[best] {
                best = c;
            }
        }
        Ok((best, post[best]))
    }
}

/// k-means classifier: Lloyd's algorithm from seeded k-means++ starts, with
/// per-cluster majority labels. Confidence is the nearest cluster's purity
/// scaled by `exp(-dist/radius)`, radius floored at 1e-9.
#[derive(Debug, Clone)]
pub struct KMeansClassifier<F: Real> {
    dims: usize,
    centroids: Vec<Vec<F>>,
    labels: Vec<ClassLabel>,
    purity: Vec<F>,
    radius: Vec<F>,
}

/// K heuristic used when a run does not pin K explicitly:
/// `max(class_count, round(sqrt(n/2)))`, capped at `n`.
pub fn default_kmeans_k(n_train: usize, class_count: usize) -> usize {
    let heuristic = ((n_train as f64) / 2.0).sqrt().round() as usize;
    class_count.max(heuristic).max(1).min(n_train.max(1))
}

impl<F: Real> KMeansClassifier<F> {
    pub fn fit(
        samples: &[LabeledSample<F>],
        k: usize,
        class_count: usize,
        seed: u64,
    ) -> Result<Self, ModelError> {
        let n = samples.len();
        if n == 0 {
            return Err(ModelError::EmptyTrainingSet);
        }
        if k == 0 || k > n {
            return Err(ModelError::KTooLarge { k, n });
        }
        let dims = samples[0].features().len();
        for s in samples {
            if s.label >= class_count {
                return Err(ModelError::LabelOutOfRange {
                    label: s.label,
                    class_count,
                });
            }
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut centroids = Self::plus_plus_init(samples, k, &mut rng);

        let tol = 1e-6;
        let mut assignment = vec![0usize; n];
        for _ in 0..100 {
            Self::assign(samples, &centroids, &mut assignment);
            Self::fix_empty_clusters(samples, &centroids, &mut assignment, k);
            let moved = Self::update_centroids(samples, &assignment, &mut centroids);
            if moved < tol {
                break;
            }
        }
        Self::assign(samples, &centroids, &mut assignment);
        Self::fix_empty_clusters(samples, &centroids, &mut assignment, k);
        // Centroids follow the final assignment so every reported radius is
        // measured against the centroid of its own members.
        Self::update_centroids(samples, &assignment, &mut centroids);

        let mut hist = vec![vec![0u64; class_count]; k];
        let mut sizes = vec![0u64; k];
        let mut dist_sum = vec![F::zero(); k];
        for (i, s) in samples.iter().enumerate() {
            let c = assignment[i];
            hist[c][s.label] += 1;
            sizes[c] += 1;
            dist_sum[c] = dist_sum[c] + sq_dist(s.features().values(), &centroids[c]).sqrt();
        }

        let mut labels = Vec::with_capacity(k);
        let mut purity = Vec::with_capacity(k);
        let mut radius = Vec::with_capacity(k);
        for c in 0..k {
            debug_assert!(sizes[c] > 0, "empty cluster survived re-seeding");
            let mut best = 0;
            for l in 0..class_count {
                if hist[c][l] > hist[c][best] {
                    best = l;
                }
            }
            labels.push(best);
            let size = F::from_u64(sizes[c]).expect("size fits in F");
            purity.push(F::from_u64(hist[c][best]).expect("count fits in F") / size);
            radius.push(dist_sum[c] / size);
        }

        Ok(Self {
            dims,
            centroids,
            labels,
            purity,
            radius,
        })
    }

    fn plus_plus_init(samples: &[LabeledSample<F>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<F>> {
        let n = samples.len();
        let mut centroids: Vec<Vec<F>> = Vec::with_capacity(k);
        centroids.push(samples[rng.gen_range(0..n)].features().values().to_vec());
        let mut d2 = vec![f64::INFINITY; n];
        while centroids.len() < k {
            let last = centroids.last().expect("at least one centroid");
            let mut total = 0.0;
            for (i, s) in samples.iter().enumerate() {
                let d = sq_dist(s.features().values(), last)
                    .to_f64()
                    .unwrap_or(f64::INFINITY);
                if d < d2[i] {
                    d2[i] = d;
                }
                total += d2[i];
            }
            let idx = if total > 0.0 {
                let mut r = rng.gen::<f64>() * total;
                let mut chosen = n - 1;
                for (i, &w) in d2.iter().enumerate() {
                    r -= w;
                    if r <= 0.0 {
                        chosen = i;
                        break;
                    }
                }
                chosen
            } else {
                rng.gen_range(0..n)
            };
            centroids.push(samples[idx].features().values().to_vec());
        }
        centroids
    }

    fn assign(samples: &[LabeledSample<F>], centroids: &[Vec<F>], out: &mut [usize]) {
        for (i, s) in samples.iter().enumerate() {
            out[i] = nearest(s.features().values(), centroids).0;
        }
    }

    /// Re-seeds each empty cluster from the point farthest from its current
    /// centroid, claiming that point for the cluster.
    fn fix_empty_clusters(
        samples: &[LabeledSample<F>],
        centroids: &[Vec<F>],
        assignment: &mut [usize],
        k: usize,
    ) {
        let mut sizes = vec![0usize; k];
        for &a in assignment.iter() {
            sizes[a] += 1;
        }
        let mut taken = vec![false; samples.len()];
        for c in 0..k {
            if sizes[c] > 0 {
                continue;
            }
            let mut far_idx = None;
            let mut far_d = F::neg_infinity();
            for (i, s) in samples.iter().enumerate() {
                if taken[i] || sizes[assignment[i]] <= 1 {
                    continue;
                }
                let d = sq_dist(s.features().values(), &centroids[assignment[i]]);
                if d > far_d {
                    far_d = d;
                    far_idx = Some(i);
                }
            }
            if let Some(i) = far_idx {
                sizes[assignment[i]] -= 1;
                assignment[i] = c;
                sizes[c] = 1;
                taken[i] = true;
            }
        }
    }

    /// Moves centroids to their members' means; returns the largest movement.
    fn update_centroids(
        samples: &[LabeledSample<F>],
        assignment: &[usize],
        centroids: &mut [Vec<F>],
    ) -> f64 {
        let k = centroids.len();
        let dims = centroids[0].len();
        let mut sums = vec![vec![F::zero(); dims]; k];
        let mut counts = vec![0u64; k];
        for (i, s) in samples.iter().enumerate() {
            let c = assignment[i];
            counts[c] += 1;
            for (j, &v) in s.features().values().iter().enumerate() {
                sums[c][j] = sums[c][j] + v;
            }
        }
        let mut max_move = 0.0f64;
        for c in 0..k {
            if counts[c] == 0 {
                continue;
            }
            let n = F::from_u64(counts[c]).expect("count fits in F");
            let mut d2 = F::zero();
            for j in 0..dims {
                let new = sums[c][j] / n;
                let delta = new - centroids[c][j];
                d2 = d2 + delta * delta;
                centroids[c][j] = new;
            }
            max_move = max_move.max(d2.sqrt().to_f64().unwrap_or(0.0));
        }
        max_move
    }

    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    pub fn cluster_purity(&self, cluster: usize) -> F {
        self.purity[cluster]
    }

    pub fn cluster_radius(&self, cluster: usize) -> F {
        self.radius[cluster]
    }

    /// Majority label of the nearest cluster and the distance-decayed purity
    /// confidence.
    pub fn predict(&self, x: &FeatureVector<F>) -> Result<(ClassLabel, F), ModelError> {
        if x.len() != self.dims {
            return Err(ModelError::DimensionMismatch {
                got: x.len(),
                want: self.dims,
            });
        }
        let (c, d2) = nearest(x.values(), &self.centroids);
        let dist = d2.sqrt();
        let floor = F::from_f64(VARIANCE_FLOOR).expect("floor fits in F");
        let radius = self.radius[c].max(floor);
        let conf = self.purity[c] * (-(dist / radius)).exp();
        Ok((self.labels[c], conf))
    }
}

fn sq_dist<F: Real>(a: &[F], b: &[F]) -> F {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(F::zero(), |acc, (x, y)| {
        let d = *x - *y;
        acc + d * d
    })
}

fn nearest<F: Real>(x: &[F], centroids: &[Vec<F>]) -> (usize, F) {
    let mut best = 0;
    let mut best_d = sq_dist(x, &centroids[0]);
    for (c, centroid) in centroids.iter().enumerate().skip(1) {
        let d = sq_dist(x, centroid);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    (best, best_d)
}

/// Bagged ensemble of naive Bayes members plus the labeled validation pool
/// that dynamic member selection consults.
#[derive(Debug, Clone)]
pub struct Ensemble<F: Real> {
    members: Vec<GaussianNb<F>>,
    validation: Vec<LabeledSample<F>>,
    k_neighbors: usize,
    class_count: usize,
}

impl<F: Real> Ensemble<F> {
    /// Builds `n_members` members, each fit on a seeded bootstrap resample of
    /// the training set.
    pub fn fit_bagged(
        train: &[LabeledSample<F>],
        validation: Vec<LabeledSample<F>>,
        n_members: usize,
        class_count: usize,
        k_neighbors: usize,
        seed: u64,
    ) -> Result<Self, ModelError> {
        if train.is_empty() {
            return Err(ModelError::EmptyTrainingSet);
        }
        if n_members == 0 {
            return Err(ModelError::EmptyEnsemble);
        }
        if validation.len() < k_neighbors {
            return Err(ModelError::InsufficientValidation {
                pool: validation.len(),
                k: k_neighbors,
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dims = train[0].features().len();
        let mut members = Vec::with_capacity(n_members);
        for _ in 0..n_members {
            let mut m = GaussianNb::new(dims, class_count);
            for _ in 0..train.len() {
                let pick = &train[rng.gen_range(0..train.len())];
                m.partial_fit(pick)?;
            }
            members.push(m);
        }
        Ok(Self {
            members,
            validation,
            k_neighbors,
            class_count,
        })
    }

    /// Assembles an ensemble from pre-built members; used by tests that need
    /// exact member behavior.
    pub fn from_members(
        members: Vec<GaussianNb<F>>,
        validation: Vec<LabeledSample<F>>,
        k_neighbors: usize,
        class_count: usize,
    ) -> Result<Self, ModelError> {
        if members.is_empty() {
            return Err(ModelError::EmptyEnsemble);
        }
        if validation.len() < k_neighbors {
            return Err(ModelError::InsufficientValidation {
                pool: validation.len(),
                k: k_neighbors,
            });
        }
        Ok(Self {
            members,
            validation,
            k_neighbors,
            class_count,
        })
    }

    pub fn members(&self) -> &[GaussianNb<F>] {
        &self.members
    }

    pub fn member_predict(
        &self,
        idx: usize,
        x: &FeatureVector<F>,
    ) -> Result<(ClassLabel, F), ModelError> {
        self.members[idx].predict(x)
    }

    pub fn k_neighbors(&self) -> usize {
        self.k_neighbors
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    /// Majority vote over members; confidence is the agreeing fraction.
    /// Vote ties resolve to the lowest label.
    pub fn majority_predict(&self, x: &FeatureVector<F>) -> Result<(ClassLabel, F), ModelError> {
        let mut votes = vec![0u32; self.class_count];
        for m in &self.members {
            let (label, _) = m.predict(x)?;
            votes[label] += 1;
        }
        let mut best = 0;
        for (c, &v) in votes.iter().enumerate() {
            if v > votes[best] {
                best = c;
            }
        }
        let frac = F::from_u32(votes[best]).expect("votes fit in F")
            / F::from_usize(self.members.len()).expect("member count fits in F");
        Ok((best, frac))
    }

    /// Replaces every member with a fresh fit on a seeded bootstrap of the
    /// given (possibly pseudo-labeled) samples. The validation pool is kept.
    pub fn retrain_members(
        &mut self,
        samples: &[LabeledSample<F>],
        seed: u64,
    ) -> Result<(), ModelError> {
        if samples.is_empty() {
            return Err(ModelError::EmptyTrainingSet);
        }
        let dims = samples[0].features().len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for m in &mut self.members {
            let mut fresh = GaussianNb::new(dims, self.class_count);
            for _ in 0..samples.len() {
                fresh.partial_fit(&samples[rng.gen_range(0..samples.len())])?;
            }
            *m = fresh;
        }
        Ok(())
    }

    /// Picks the member with the highest local accuracy over the
    /// `k_neighbors` validation samples nearest to `x` (Euclidean). Ties in
    /// distance resolve by validation index; ties in accuracy resolve to the
    /// lowest member index.
    pub fn dcsla_select(&self, x: &FeatureVector<F>) -> Result<usize, ModelError> {
        let mut order: Vec<(F, usize)> = self
            .validation
            .iter()
            .enumerate()
            .map(|(i, s)| (x.sq_dist(s.features()), i))
            .collect();
        order.sort_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .expect("finite distances")
                .then(a.1.cmp(&b.1))
        });
        let neighbors = &order[..self.k_neighbors];

        let mut best_member = 0;
        let mut best_correct = u32::MAX;
        for (m_idx, member) in self.members.iter().enumerate() {
            let mut correct = 0u32;
            for &(_, v_idx) in neighbors {
                let v = &self.validation[v_idx];
                let (pred, _) = member.predict(v.features())?;
                if pred == v.label {
                    correct += 1;
                }
            }
            if best_correct == u32::MAX || correct > best_correct {
                best_correct = correct;
                best_member = m_idx;
            }
        }
        Ok(best_member)
    }
}

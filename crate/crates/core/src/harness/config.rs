//! Flat key-value run configuration.
//!
//! A configuration file is plain text, one `key = value` per line, `#`
//! comments allowed. One file describes one dataset; `approach` may be a
//! comma-separated list, expanding into one run configuration per approach.
//! Unknown keys are rejected so typos surface as config errors, and the
//! fully resolved configuration (defaults filled in, overrides applied) can
//! be rendered back to the same format; that text is embedded in every
//! report header.
//!
//! Schema:
//!
//! ```text
//! dataset.kind             csv | synthetic                   (required)
//! dataset.name             display name (default: file stem / "synthetic")
//! dataset.path             csv path                          (csv only)
//! dataset.label_column     column index | last               (csv, default last)
//! dataset.class_count      int                               (csv required, synthetic default 2)
//! dataset.initial_labeled  int                               (default 500)
//! dataset.n_samples        int                               (synthetic, default 2000)
//! dataset.dimensions       int                               (synthetic, default 5)
//! dataset.drift_points     comma-separated indices           (synthetic, default none)
//! dataset.ramp_length      int, 0 = abrupt                   (synthetic, default 0)
//! dataset.class_separation float                             (synthetic, default 3.0)
//! dataset.drift_shift      float                             (synthetic, default 3.0)
//! dataset.noise_std        float                             (synthetic, default 1.0)
//! dataset.seed             int (default: run seed)           (synthetic)
//! approach                 IKS|STUDD|SAND|PINAGE|BASELINE1|BASELINE2|ORACLE|NULL (comma list)
//! detector.feature_index   int (default 0)
//! detector.window          int (default 100)
//! detector.alpha           float (default 0.001)
//! detector.tau             float (default 0.25)
//! detector.min_segment     int (default 10)
//! detector.gain_threshold  float | auto (default auto = 2 ln n)
//! detector.kmeans_k        int | auto (default auto)
//! detector.ensemble_size   int (default 10)
//! detector.k_neighbors     int (default 7)
//! detector.warn_threshold  float (default 0.95)
//! detector.drift_threshold float (default 0.90)
//! detector.min_errors      int (default 30)
//! handling.strategy        replace|pseudo|none|periodic (default per approach)
//! handling.period          int (default 500)
//! handling.label_scope     detection-window | since-last-drift (default detection-window)
//! repetitions              int (default 5)
//! seed                     int (default 42)
//! timeout_seconds          float (default 3600)
//! pin_core                 true | false (default true)
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Duration;

use thiserror::Error;

use crate::data::GaussianStreamConfig;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("config line {line}: expected 'key = value', got '{text}'")]
    BadLine { line: usize, text: String },
    #[error("unknown config key '{key}'")]
    UnknownKey { key: String },
    #[error("config key '{key}': {reason}")]
    BadValue { key: String, reason: String },
    #[error("missing required config key '{key}'")]
    MissingKey { key: String },
    #[error("config key 'handling.strategy': approach {approach} requires '{required}'")]
    HandlingPairing {
        approach: &'static str,
        required: &'static str,
    },
    #[error("override '{text}': expected KEY=VALUE")]
    BadOverride { text: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Approach {
    Iks,
    Studd,
    Sand,
    Pinage,
    Baseline1,
    Baseline2,
    Oracle,
    Null,
}

impl Approach {
    pub const ALL: [Approach; 8] = [
        Approach::Iks,
        Approach::Studd,
        Approach::Sand,
        Approach::Pinage,
        Approach::Baseline1,
        Approach::Baseline2,
        Approach::Oracle,
        Approach::Null,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Approach::Iks => "IKS",
            Approach::Studd => "STUDD",
            Approach::Sand => "SAND",
            Approach::Pinage => "PINAGE",
            Approach::Baseline1 => "BASELINE1",
            Approach::Baseline2 => "BASELINE2",
            Approach::Oracle => "ORACLE",
            Approach::Null => "NULL",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Approach::ALL
            .iter()
            .copied()
            .find(|a| a.as_str().eq_ignore_ascii_case(s.trim()))
    }

    /// The handling strategy the approach pairs with by default.
    pub fn default_handling(&self, period: usize) -> Handling {
        match self {
            Approach::Iks | Approach::Studd | Approach::Sand | Approach::Oracle => {
                Handling::ReplaceModelWithRequestedLabels
            }
            Approach::Pinage => Handling::RetrainWithPseudoLabels,
            Approach::Baseline1 | Approach::Null => Handling::None,
            Approach::Baseline2 => Handling::PeriodicRetrain { period },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Handling {
    ReplaceModelWithRequestedLabels,
    RetrainWithPseudoLabels,
    None,
    PeriodicRetrain { period: usize },
}

impl Handling {
    pub fn as_str(&self) -> &'static str {
        match self {
            Handling::ReplaceModelWithRequestedLabels => "replace",
            Handling::RetrainWithPseudoLabels => "pseudo",
            Handling::None => "none",
            Handling::PeriodicRetrain { .. } => "periodic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LabelRequestScope {
    #[default]
    DetectionWindow,
    SinceLastDrift,
}

impl LabelRequestScope {
    pub fn as_str(&self) -> &'static str {
        match self {
            LabelRequestScope::DetectionWindow => "detection-window",
            LabelRequestScope::SinceLastDrift => "since-last-drift",
        }
    }
}

/// Detector hyperparameters; every detector reads the subset it documents.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorParams {
    pub feature_index: usize,
    pub window: usize,
    pub alpha: f64,
    pub tau: f64,
    pub min_segment: usize,
    pub gain_threshold: Option<f64>,
    pub kmeans_k: Option<usize>,
    pub ensemble_size: usize,
    pub k_neighbors: usize,
    pub warn_threshold: f64,
    pub drift_threshold: f64,
    pub min_errors: u64,
}

impl Default for DetectorParams {
    fn default() -> Self {
        Self {
            feature_index: 0,
            window: 100,
            alpha: 0.001,
            tau: 0.25,
            min_segment: 10,
            gain_threshold: None,
            kmeans_k: None,
            ensemble_size: 10,
            k_neighbors: 7,
            warn_threshold: 0.95,
            drift_threshold: 0.90,
            min_errors: 30,
        }
    }
}

#[derive(Debug, Clone)]
pub enum DatasetConfig {
    Csv {
        name: Option<String>,
        path: PathBuf,
        label_column: Option<usize>,
        class_count: usize,
        initial_labeled: usize,
    },
    Synthetic {
        name: String,
        generator: GaussianStreamConfig,
        initial_labeled: usize,
    },
}

impl DatasetConfig {
    pub fn display_name(&self) -> String {
        match self {
            DatasetConfig::Csv { name, path, .. } => name.clone().unwrap_or_else(|| {
                path.file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "dataset".into())
            }),
            DatasetConfig::Synthetic { name, .. } => name.clone(),
        }
    }
}

/// One fully resolved (dataset, approach) run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub dataset: DatasetConfig,
    pub approach: Approach,
    pub detector: DetectorParams,
    pub handling: Handling,
    pub label_scope: LabelRequestScope,
    pub repetitions: usize,
    pub seed: u64,
    pub timeout: Duration,
    pub pin_core: bool,
}

impl RunConfig {
    /// Canonical flat rendering of this run; hashing it fingerprints the
    /// configuration.
    pub fn canonical_text(&self) -> String {
        let mut map = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            map.insert(k.to_string(), v);
        };
        match &self.dataset {
            DatasetConfig::Csv {
                name,
                path,
                label_column,
                class_count,
                initial_labeled,
            } => {
                put("dataset.kind", "csv".into());
                if let Some(n) = name {
                    put("dataset.name", n.clone());
                }
                put("dataset.path", path.display().to_string());
                put(
                    "dataset.label_column",
                    label_column.map_or("last".into(), |c| c.to_string()),
                );
                put("dataset.class_count", class_count.to_string());
                put("dataset.initial_labeled", initial_labeled.to_string());
            }
            DatasetConfig::Synthetic {
                name,
                generator,
                initial_labeled,
            } => {
                put("dataset.kind", "synthetic".into());
                put("dataset.name", name.clone());
                put("dataset.n_samples", generator.n_samples.to_string());
                put("dataset.dimensions", generator.dimensions.to_string());
                put("dataset.class_count", generator.class_count.to_string());
                put(
                    "dataset.drift_points",
                    generator
                        .drift_points
                        .iter()
                        .map(|d| d.to_string())
                        .collect::<Vec<_>>()
                        .join(","),
                );
                put("dataset.ramp_length", generator.ramp_length.to_string());
                put(
                    "dataset.class_separation",
                    generator.class_separation.to_string(),
                );
                put("dataset.drift_shift", generator.drift_shift.to_string());
                put("dataset.noise_std", generator.noise_std.to_string());
                put("dataset.seed", generator.rng_seed.to_string());
                put("dataset.initial_labeled", initial_labeled.to_string());
            }
        }
        put("approach", self.approach.as_str().into());
        let d = &self.detector;
        put("detector.feature_index", d.feature_index.to_string());
        put("detector.window", d.window.to_string());
        put("detector.alpha", d.alpha.to_string());
        put("detector.tau", d.tau.to_string());
        put("detector.min_segment", d.min_segment.to_string());
        put(
            "detector.gain_threshold",
            d.gain_threshold.map_or("auto".into(), |g| g.to_string()),
        );
        put(
            "detector.kmeans_k",
            d.kmeans_k.map_or("auto".into(), |k| k.to_string()),
        );
        put("detector.ensemble_size", d.ensemble_size.to_string());
        put("detector.k_neighbors", d.k_neighbors.to_string());
        put("detector.warn_threshold", d.warn_threshold.to_string());
        put("detector.drift_threshold", d.drift_threshold.to_string());
        put("detector.min_errors", d.min_errors.to_string());
        put("handling.strategy", self.handling.as_str().into());
        if let Handling::PeriodicRetrain { period } = self.handling {
            put("handling.period", period.to_string());
        }
        put("handling.label_scope", self.label_scope.as_str().into());
        put("repetitions", self.repetitions.to_string());
        put("seed", self.seed.to_string());
        put("timeout_seconds", self.timeout.as_secs_f64().to_string());
        put("pin_core", self.pin_core.to_string());

        let mut out = String::new();
        for (k, v) in &map {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    /// FNV-1a fingerprint of the canonical text.
    pub fn fingerprint(&self) -> String {
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        for b in self.canonical_text().bytes() {
            hash ^= b as u64;
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{hash:016x}")
    }
}

const KNOWN_KEYS: &[&str] = &[
    "dataset.kind",
    "dataset.name",
    "dataset.path",
    "dataset.label_column",
    "dataset.class_count",
    "dataset.initial_labeled",
    "dataset.n_samples",
    "dataset.dimensions",
    "dataset.drift_points",
    "dataset.ramp_length",
    "dataset.class_separation",
    "dataset.drift_shift",
    "dataset.noise_std",
    "dataset.seed",
    "approach",
    "detector.feature_index",
    "detector.window",
    "detector.alpha",
    "detector.tau",
    "detector.min_segment",
    "detector.gain_threshold",
    "detector.kmeans_k",
    "detector.ensemble_size",
    "detector.k_neighbors",
    "detector.warn_threshold",
    "detector.drift_threshold",
    "detector.min_errors",
    "handling.strategy",
    "handling.period",
    "handling.label_scope",
    "repetitions",
    "seed",
    "timeout_seconds",
    "pin_core",
];

/// Parses flat `key = value` text into a map, rejecting unknown keys.
pub fn parse_flat(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::BadLine {
                line: i + 1,
                text: raw.to_string(),
            });
        };
        let key = key.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey { key });
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

/// Applies `--set KEY=VALUE` overrides on top of a parsed map.
pub fn apply_overrides(
    map: &mut BTreeMap<String, String>,
    overrides: &[String],
) -> Result<(), ConfigError> {
    for text in overrides {
        let Some((key, value)) = text.split_once('=') else {
            return Err(ConfigError::BadOverride { text: text.clone() });
        };
        let key = key.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey { key });
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(())
}

fn get_parsed<T: std::str::FromStr>(
    map: &BTreeMap<String, String>,
    key: &str,
    default: T,
) -> Result<T, ConfigError> {
    match map.get(key) {
        None => Ok(default),
        Some(v) => v.parse().map_err(|_| ConfigError::BadValue {
            key: key.to_string(),
            reason: format!("cannot parse '{v}'"),
        }),
    }
}

fn require(map: &BTreeMap<String, String>, key: &str) -> Result<String, ConfigError> {
    map.get(key).cloned().ok_or(ConfigError::MissingKey {
        key: key.to_string(),
    })
}

/// Expands a parsed map into run configurations, one per listed approach.
pub fn build_configs(map: &BTreeMap<String, String>) -> Result<Vec<RunConfig>, ConfigError> {
    let seed: u64 = get_parsed(map, "seed", 42)?;
    let repetitions: usize = get_parsed(map, "repetitions", 5)?;
    if repetitions == 0 {
        return Err(ConfigError::BadValue {
            key: "repetitions".into(),
            reason: "must be positive".into(),
        });
    }
    let timeout_seconds: f64 = get_parsed(map, "timeout_seconds", 3600.0)?;
    let timeout_valid = timeout_seconds.is_finite() && timeout_seconds > 0.0;
    if !timeout_valid {
        return Err(ConfigError::BadValue {
            key: "timeout_seconds".into(),
            reason: "must be positive".into(),
        });
    }
    let pin_core: bool = get_parsed(map, "pin_core", true)?;
    let initial_labeled: usize = get_parsed(map, "dataset.initial_labeled", 500)?;

    let dataset = match require(map, "dataset.kind")?.as_str() {
        "csv" => {
            let label_column = match map.get("dataset.label_column").map(String::as_str) {
                None | Some("last") => None,
                Some(v) => Some(v.parse().map_err(|_| ConfigError::BadValue {
                    key: "dataset.label_column".into(),
                    reason: format!("expected column index or 'last', got '{v}'"),
                })?),
            };
            DatasetConfig::Csv {
                name: map.get("dataset.name").cloned(),
                path: PathBuf::from(require(map, "dataset.path")?),
                label_column,
                class_count: require(map, "dataset.class_count")?.parse().map_err(|_| {
                    ConfigError::BadValue {
                        key: "dataset.class_count".into(),
                        reason: "expected a positive integer".into(),
                    }
                })?,
                initial_labeled,
            }
        }
        "synthetic" => {
            let drift_points = match map.get("dataset.drift_points") {
                None => Vec::new(),
                Some(v) if v.trim().is_empty() => Vec::new(),
                Some(v) => v
                    .split(',')
                    .map(|p| {
                        p.trim().parse().map_err(|_| ConfigError::BadValue {
                            key: "dataset.drift_points".into(),
                            reason: format!("'{p}' is not a stream index"),
                        })
                    })
                    .collect::<Result<Vec<usize>, _>>()?,
            };
            DatasetConfig::Synthetic {
                name: map
                    .get("dataset.name")
                    .cloned()
                    .unwrap_or_else(|| "synthetic".into()),
                generator: GaussianStreamConfig {
                    n_samples: get_parsed(map, "dataset.n_samples", 2000)?,
                    dimensions: get_parsed(map, "dataset.dimensions", 5)?,
                    class_count: get_parsed(map, "dataset.class_count", 2)?,
                    drift_points,
                    ramp_length: get_parsed(map, "dataset.ramp_length", 0)?,
                    class_separation: get_parsed(map, "dataset.class_separation", 3.0)?,
                    drift_shift: get_parsed(map, "dataset.drift_shift", 3.0)?,
                    noise_std: get_parsed(map, "dataset.noise_std", 1.0)?,
                    rng_seed: get_parsed(map, "dataset.seed", seed)?,
                },
                initial_labeled,
            }
        }
        other => {
            return Err(ConfigError::BadValue {
                key: "dataset.kind".into(),
                reason: format!("expected 'csv' or 'synthetic', got '{other}'"),
            })
        }
    };

    let detector = DetectorParams {
        feature_index: get_parsed(map, "detector.feature_index", 0)?,
        window: get_parsed(map, "detector.window", 100)?,
        alpha: get_parsed(map, "detector.alpha", 0.001)?,
        tau: get_parsed(map, "detector.tau", 0.25)?,
        min_segment: get_parsed(map, "detector.min_segment", 10)?,
        gain_threshold: match map.get("detector.gain_threshold").map(String::as_str) {
            None | Some("auto") => None,
            Some(v) => Some(v.parse().map_err(|_| ConfigError::BadValue {
                key: "detector.gain_threshold".into(),
                reason: format!("expected a number or 'auto', got '{v}'"),
            })?),
        },
        kmeans_k: match map.get("detector.kmeans_k").map(String::as_str) {
            None | Some("auto") => None,
            Some(v) => Some(v.parse().map_err(|_| ConfigError::BadValue {
                key: "detector.kmeans_k".into(),
                reason: format!("expected an integer or 'auto', got '{v}'"),
            })?),
        },
        ensemble_size: get_parsed(map, "detector.ensemble_size", 10)?,
        k_neighbors: get_parsed(map, "detector.k_neighbors", 7)?,
        warn_threshold: get_parsed(map, "detector.warn_threshold", 0.95)?,
        drift_threshold: get_parsed(map, "detector.drift_threshold", 0.90)?,
        min_errors: get_parsed(map, "detector.min_errors", 30)?,
    };

    let period: usize = get_parsed(map, "handling.period", 500)?;
    let label_scope = match map.get("handling.label_scope").map(String::as_str) {
        None | Some("detection-window") => LabelRequestScope::DetectionWindow,
        Some("since-last-drift") => LabelRequestScope::SinceLastDrift,
        Some(v) => {
            return Err(ConfigError::BadValue {
                key: "handling.label_scope".into(),
                reason: format!("expected 'detection-window' or 'since-last-drift', got '{v}'"),
            })
        }
    };

    let approaches: Vec<Approach> = require(map, "approach")?
        .split(',')
        .map(|a| {
            Approach::parse(a).ok_or_else(|| ConfigError::BadValue {
                key: "approach".into(),
                reason: format!("unknown approach '{}'", a.trim()),
            })
        })
        .collect::<Result<_, _>>()?;
    if approaches.is_empty() {
        return Err(ConfigError::BadValue {
            key: "approach".into(),
            reason: "at least one approach required".into(),
        });
    }

    let mut configs = Vec::with_capacity(approaches.len());
    for approach in approaches {
        let handling = match map.get("handling.strategy").map(String::as_str) {
            None => approach.default_handling(period),
            Some("replace") => Handling::ReplaceModelWithRequestedLabels,
            Some("pseudo") => Handling::RetrainWithPseudoLabels,
            Some("none") => Handling::None,
            Some("periodic") => Handling::PeriodicRetrain { period },
            Some(v) => {
                return Err(ConfigError::BadValue {
                    key: "handling.strategy".into(),
                    reason: format!("unknown strategy '{v}'"),
                })
            }
        };
        validate_pairing(approach, handling)?;
        configs.push(RunConfig {
            dataset: dataset.clone(),
            approach,
            detector: detector.clone(),
            handling,
            label_scope,
            repetitions,
            seed,
            timeout: Duration::from_secs_f64(timeout_seconds),
            pin_core,
        });
    }
    Ok(configs)
}

/// Enforces the approach/handling pairings the protocol fixes: baselines
/// keep their defining strategies and the pseudo-label pipeline never
/// requests true labels.
pub fn validate_pairing(approach: Approach, handling: Handling) -> Result<(), ConfigError> {
    let ok = match approach {
        Approach::Baseline1 => matches!(handling, Handling::None),
        Approach::Baseline2 => matches!(handling, Handling::PeriodicRetrain { .. }),
        Approach::Pinage => matches!(handling, Handling::RetrainWithPseudoLabels),
        Approach::Iks | Approach::Studd | Approach::Sand | Approach::Oracle => matches!(
            handling,
            Handling::ReplaceModelWithRequestedLabels | Handling::None
        ),
        Approach::Null => matches!(handling, Handling::None),
    };
    if ok {
        Ok(())
    } else {
        let required = match approach {
            Approach::Baseline1 | Approach::Null => "none",
            Approach::Baseline2 => "periodic",
            Approach::Pinage => "pseudo",
            _ => "replace or none",
        };
        Err(ConfigError::HandlingPairing {
            approach: approach.as_str(),
            required,
        })
    }
}

/// Renders the effective (post-override, defaults resolved) configuration
/// of a set of runs built from one file: the shared keys once, plus the
/// approach list.
pub fn effective_echo(configs: &[RunConfig]) -> String {
    let mut out = String::new();
    for (i, c) in configs.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "# run {} ({})", i + 1, c.fingerprint());
        out.push_str(&c.canonical_text());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
# benchmark over a synthetic stream
dataset.kind = synthetic
dataset.drift_points = 1000
approach = IKS
seed = 7
";

    #[test]
    fn parses_minimal_synthetic_config() {
        let map = parse_flat(MINIMAL).unwrap();
        let configs = build_configs(&map).unwrap();
        assert_eq!(configs.len(), 1);
        let c = &configs[0];
        assert_eq!(c.approach, Approach::Iks);
        assert_eq!(c.seed, 7);
        assert_eq!(c.repetitions, 5);
        assert_eq!(c.handling, Handling::ReplaceModelWithRequestedLabels);
        match &c.dataset {
            DatasetConfig::Synthetic { generator, .. } => {
                assert_eq!(generator.drift_points, vec![1000]);
                assert_eq!(generator.rng_seed, 7);
            }
            _ => panic!("expected synthetic dataset"),
        }
    }

    #[test]
    fn approach_list_expands_to_multiple_configs() {
        let mut map = parse_flat(MINIMAL).unwrap();
        map.insert("approach".into(), "IKS, SAND,null".into());
        let configs = build_configs(&map).unwrap();
        let names: Vec<&str> = configs.iter().map(|c| c.approach.as_str()).collect();
        assert_eq!(names, vec!["IKS", "SAND", "NULL"]);
        assert_eq!(configs[2].handling, Handling::None);
    }

    #[test]
    fn unknown_key_is_rejected_by_name() {
        let err = parse_flat("detector.windw = 100\n").unwrap_err();
        assert_eq!(
            err,
            ConfigError::UnknownKey {
                key: "detector.windw".into()
            }
        );
    }

    #[test]
    fn overrides_replace_values_and_validate_keys() {
        let mut map = parse_flat(MINIMAL).unwrap();
        apply_overrides(
            &mut map,
            &["detector.window=50".into(), "approach=SAND".into()],
        )
        .unwrap();
        let configs = build_configs(&map).unwrap();
        assert_eq!(configs[0].detector.window, 50);
        assert_eq!(configs[0].approach, Approach::Sand);

        let err = apply_overrides(&mut map, &["nope=1".into()]).unwrap_err();
        assert_eq!(err, ConfigError::UnknownKey { key: "nope".into() });
    }

    #[test]
    fn pairing_violations_are_config_errors() {
        let mut map = parse_flat(MINIMAL).unwrap();
        map.insert("approach".into(), "BASELINE1".into());
        map.insert("handling.strategy".into(), "replace".into());
        assert!(matches!(
            build_configs(&map).unwrap_err(),
            ConfigError::HandlingPairing { .. }
        ));

        map.insert("approach".into(), "PINAGE".into());
        map.insert("handling.strategy".into(), "pseudo".into());
        assert!(build_configs(&map).is_ok());
    }

    #[test]
    fn csv_dataset_requires_path_and_classes() {
        let map = parse_flat("dataset.kind = csv\napproach = NULL\n").unwrap();
        assert_eq!(
            build_configs(&map).unwrap_err(),
            ConfigError::MissingKey {
                key: "dataset.path".into()
            }
        );
    }

    #[test]
    fn canonical_text_round_trips() {
        let map = parse_flat(MINIMAL).unwrap();
        let configs = build_configs(&map).unwrap();
        let text = configs[0].canonical_text();
        let reparsed = build_configs(&parse_flat(&text).unwrap()).unwrap();
        assert_eq!(reparsed.len(), 1);
        assert_eq!(reparsed[0].canonical_text(), text);
        assert_eq!(reparsed[0].fingerprint(), configs[0].fingerprint());
    }

    #[test]
    fn bad_line_reports_line_number() {
        let err = parse_flat("dataset.kind = synthetic\nnot a kv line\n").unwrap_err();
        assert_eq!(
            err,
            ConfigError::BadLine {
                line: 2,
                text: "not a kv line".into()
            }
        );
    }
}

//! The benchmark pipeline: configuration, the instrumented stream loop,
//! drift handling, repetitions and timeouts.

mod affinity;
mod config;
mod pipeline;
mod suite;

pub use config::{
    apply_overrides, build_configs, effective_echo, parse_flat, validate_pairing, Approach,
    ConfigError, DatasetConfig, DetectorParams, Handling, LabelRequestScope, RunConfig,
};
pub use pipeline::{
    build_components, load_dataset, run_components, run_pipeline, ApproachComponents, DriftEvent,
    EventKind, HarnessError, LoopOptions, NbComponents, PinageComponents, Prediction, RunOutput,
    SandComponents, StuddComponents,
};
pub use suite::{render_event_log, run_record, run_suite, RunRecord};

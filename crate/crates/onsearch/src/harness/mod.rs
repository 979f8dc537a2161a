//! Experiment harness: strict JSON configs, deterministic suites, and flat
//! report rows in CSV or JSON-lines form.

pub mod config;
pub mod report;
pub mod suites;

pub use config::{
    AgnosticDeltaConfig, DoubleBoundConfig, ExperimentConfig, ExperimentKind, LossCompareConfig,
    LowerboundDemoConfig, PadFrontierConfig, StandardSweepConfig,
};
pub use report::{emit_report, ReportFormat, ReportRow};
pub use suites::run_experiment;

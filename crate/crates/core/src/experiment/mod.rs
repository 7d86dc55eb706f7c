//! Experiment runner: JSON configs, named catalog entries and deterministic reports.

pub mod catalog;
pub mod config;
pub mod report;
pub mod runner;

pub use catalog::{entries, find, CatalogEntry};
pub use config::{Context, ExperimentConfig, HDesc, HomogeneousDesc, NDesc, Numeric, Pipeline, Tolerances};
pub use report::{
    diff_reports, emit_report, parse_report, ExitStatus, ReportDiff, ReportFormat, ResultBody, ResultItem, RunReport,
};
pub use runner::{oracle_deviation, random_preimage_tangent, run_catalog_entry, run_experiment, RunOptions};

//! Experiment orchestration: configuration documents, run manifests,
//! the computational cores behind the CLI subcommands, and the
//! verification suite that audits every advertised bound end to end.

pub mod checks;
pub mod commands;
pub mod config;
pub mod manifest;
pub mod runs;

pub use checks::{run_verify, CheckResult, Level, Verdict};
pub use config::{ExperimentConfig, Overrides};
pub use manifest::{manifest_path, OracleConstants, RunManifest};

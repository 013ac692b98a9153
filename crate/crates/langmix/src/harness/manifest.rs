//! Run manifests. Every command that produces output files writes a
//! manifest with status "incomplete" before computing anything, then
//! rewrites it as "complete" with the wall-clock time once the results
//! are on disk. A crashed run therefore leaves an incomplete manifest
//! behind as evidence.
//!
//! The manifest carries everything needed to reproduce the run
//! bit-exactly: the full config echo, the RNG algorithm id, the library
//! version, and the derived constants that parameterized the run.
//! Timestamps live only here, never in verdict files.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::model::GradientOracle;
use crate::rng::RNG_ALGO_ID;

#[derive(Debug, Clone, Serialize)]
pub struct OracleConstants {
    pub d: usize,
    pub data_dim: usize,
    pub a: f64,
    pub l1: f64,
    pub l2: f64,
    pub h_star: f64,
    pub a_tilde: f64,
    pub lambda_bar: f64,
}

impl OracleConstants {
    pub fn from_oracle(oracle: &dyn GradientOracle) -> Self {
        let a = oracle.a();
        let l1 = oracle.l1();
        Self {
            d: oracle.dim(),
            data_dim: oracle.data_dim(),
            a,
            l1,
            l2: oracle.l2(),
            h_star: oracle.h_star(),
            a_tilde: a * l1 / (a + l1),
            lambda_bar: 2.0 / (a + l1),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub status: String,
    pub command: String,
    pub rng_algo_id: String,
    pub library_version: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicas: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_constants: Option<OracleConstants>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stream_coeffs: Option<Vec<f64>>,
    /// Derived constants specific to the command (bounds, planner
    /// outputs, window choices), as free-form JSON.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub derived: Option<serde_json::Value>,
    pub config_echo: serde_json::Value,
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
}

impl RunManifest {
    pub fn begin(command: &str, seed: u64, config_echo: serde_json::Value) -> Self {
        Self {
            status: "incomplete".to_string(),
            command: command.to_string(),
            rng_algo_id: RNG_ALGO_ID.to_string(),
            library_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            lambda: None,
            steps: None,
            replicas: None,
            oracle_constants: None,
            stream_coeffs: None,
            derived: None,
            config_echo,
            outputs: Vec::new(),
            wall_clock_seconds: None,
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text)
            .map_err(|e| invalid(format!("cannot write manifest {}: {e}", path.display())))
    }

    /// Marks the run complete and records the elapsed wall clock.
    pub fn complete(&mut self, started: Instant) {
        self.status = "complete".to_string();
        self.wall_clock_seconds = Some(started.elapsed().as_secs_f64());
    }
}

/// Default manifest location for a result file: `<out>.manifest.json`.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_os_string();
    name.push(".manifest.json");
    PathBuf::from(name)
}

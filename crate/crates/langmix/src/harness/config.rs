//! Experiment configuration: a single versioned JSON document naming
//! the model, the data stream, and the sampler parameters.
//!
//! Precedence: command-line flags override config keys; config keys
//! override built-in defaults. Unknown keys are rejected so that typos
//! fail loudly instead of silently running the default.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, unsupported, Result};
use crate::model::{GradientOracle, IidOracle, QuadraticOracle};
use crate::samplers::{default_horizon, InitialLaw, SamplerConfig};
use crate::streams::{DecayCertificate, LinearProcessSpec};
use nalgebra::DMatrix;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Schema version; must equal [`CONFIG_VERSION`].
    pub version: u32,
    /// Master seed. Mandatory: every run must be reproducible.
    pub seed: u64,
    /// Optional experiment kind; when present it must match the
    /// subcommand the config is used with.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stream: Option<StreamBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampler: Option<SamplerBlock>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum OracleBlock {
    #[serde(rename = "quadratic")]
    Quadratic(QuadraticBlock),
    #[serde(rename = "iid-rho")]
    IidRho(IidRhoBlock),
}

/// Quadratic model S(θ−θ*) + B·x. Exactly one of `s` / `s_diag` picks
/// the curvature; `b` / `b_scale` pick the data matrix (default: the
/// d×d identity).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadraticBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_diag: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_star: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_scale: Option<f64>,
}

/// Data-dependent-curvature model s·(1+‖x‖)^ρ·(θ−θ*) + b·x.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IidRhoBlock {
    pub scale: f64,
    pub coupling: f64,
    pub rho: u32,
    pub theta_star: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum StreamBlock {
    #[serde(rename = "linear")]
    Linear(LinearStreamBlock),
    #[serde(rename = "iid-gaussian")]
    IidGaussian(IidGaussianBlock),
    #[serde(rename = "power-decay")]
    PowerDecay(PowerDecayBlock),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearStreamBlock {
    pub coeffs: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay: Option<DecayCertificate>,
    /// Separate seed for the data stream; defaults to the master seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IidGaussianBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Coefficients a_k = c·(1+k)^(−β) out to the built-in tail budget.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerDecayBlock {
    pub c: f64,
    pub beta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerBlock {
    pub lambda: f64,
    /// Default: three contraction times at this λ.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<u64>,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    #[serde(default = "default_stride")]
    pub record_every: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub moment_orders: Vec<u32>,
    /// Default: point mass at θ*.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialBlock>,
}

fn default_replicas() -> usize {
    1000
}

fn default_stride() -> u64 {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum InitialBlock {
    #[serde(rename = "point")]
    Point(PointBlock),
    #[serde(rename = "gaussian")]
    Gaussian(GaussianBlock),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointBlock {
    pub point: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianBlock {
    pub mean: Vec<f64>,
    pub sd: f64,
}

/// Oracle constructed from a config block. Holds the quadratic view
/// whenever one exists (the `quadratic` family always; `iid-rho` only
/// at ρ = 0, where the curvature stops depending on the data).
pub struct BuiltOracle {
    pub quad: Option<QuadraticOracle>,
    pub iid: Option<IidOracle>,
}

impl BuiltOracle {
    /// The uniform-Lipschitz view required by every sampler.
    pub fn sampler(&self) -> Result<&QuadraticOracle> {
        self.quad.as_ref().ok_or_else(|| {
            unsupported(
                "sampling requires a uniform Lipschitz constant; the iid-rho model \
                 with rho > 0 has data-dependent curvature and is only consumed by \
                 the independent-data planner",
            )
        })
    }

    pub fn gradient(&self) -> Result<&dyn GradientOracle> {
        Ok(self.sampler()? as &dyn GradientOracle)
    }
}

impl OracleBlock {
    pub fn build(&self) -> Result<BuiltOracle> {
        match self {
            OracleBlock::Quadratic(q) => Ok(BuiltOracle { quad: Some(q.build()?), iid: None }),
            OracleBlock::IidRho(b) => {
                let iid = IidOracle::new(b.scale, b.coupling, b.rho, b.theta_star.clone())?;
                let quad = iid.as_quadratic();
                Ok(BuiltOracle { quad, iid: Some(iid) })
            }
        }
    }
}

impl QuadraticBlock {
    pub fn build(&self) -> Result<QuadraticOracle> {
        let s = match (&self.s, &self.s_diag) {
            (Some(rows), None) => matrix_from_rows(rows, "oracle.s")?,
            (None, Some(diag)) => {
                if diag.is_empty() {
                    return Err(invalid("oracle.s_diag must be non-empty"));
                }
                DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(diag))
            }
            (None, None) => return Err(invalid("quadratic oracle needs `s` or `s_diag`")),
            (Some(_), Some(_)) => {
                return Err(invalid("give exactly one of oracle.s and oracle.s_diag"))
            }
        };
        let d = s.nrows();
        let theta_star = match &self.theta_star {
            Some(t) => {
                if t.len() != d {
                    return Err(invalid(format!(
                        "oracle.theta_star has length {}, curvature is {d}x{d}",
                        t.len()
                    )));
                }
                t.clone()
            }
            None => vec![0.0; d],
        };
        let b = match (&self.b, &self.b_scale) {
            (Some(rows), None) => {
                let m = matrix_from_rows(rows, "oracle.b")?;
                if m.nrows() != d {
                    return Err(invalid(format!(
                        "oracle.b has {} rows, curvature is {d}x{d}",
                        m.nrows()
                    )));
                }
                m
            }
            (None, Some(c)) => DMatrix::identity(d, d) * *c,
            (None, None) => DMatrix::identity(d, d),
            (Some(_), Some(_)) => {
                return Err(invalid("give at most one of oracle.b and oracle.b_scale"))
            }
        };
        QuadraticOracle::new(s, theta_star, b)
    }
}

fn matrix_from_rows(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    if rows.is_empty() {
        return Err(invalid(format!("{what} must be non-empty")));
    }
    let ncols = rows[0].len();
    if ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
        return Err(invalid(format!("{what} rows must share one non-zero length")));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(DMatrix::from_row_slice(rows.len(), ncols, &flat))
}

impl StreamBlock {
    pub fn build(&self) -> Result<LinearProcessSpec> {
        match self {
            StreamBlock::Linear(b) => match b.decay {
                Some(cert) => LinearProcessSpec::with_decay(b.coeffs.clone(), cert),
                None => LinearProcessSpec::new(b.coeffs.clone()),
            },
            StreamBlock::IidGaussian(_) => Ok(LinearProcessSpec::iid_gaussian()),
            StreamBlock::PowerDecay(b) => LinearProcessSpec::power_decay(b.c, b.beta),
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            StreamBlock::Linear(b) => b.seed,
            StreamBlock::IidGaussian(b) => b.seed,
            StreamBlock::PowerDecay(b) => b.seed,
        }
    }
}

impl InitialBlock {
    pub fn build(&self) -> Result<InitialLaw> {
        match self {
            InitialBlock::Point(p) => Ok(InitialLaw::at(p.point.clone())),
            InitialBlock::Gaussian(g) => {
                if !(g.sd >= 0.0) || !g.sd.is_finite() {
                    return Err(invalid("initial.sd must be finite and non-negative"));
                }
                Ok(InitialLaw::Gaussian { mean: g.mean.clone(), sd: g.sd })
            }
        }
    }
}

/// Flag-level overrides applied on top of the config document.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub lambda: Option<f64>,
    pub steps: Option<u64>,
    pub replicas: Option<usize>,
    pub record_every: Option<u64>,
    pub seed: Option<u64>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)
            .map_err(|e| invalid(format!("config parse error: {e}")))?;
        if cfg.version != CONFIG_VERSION {
            return Err(invalid(format!(
                "config version {} not supported (expected {CONFIG_VERSION})",
                cfg.version
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Enforces the optional `kind` tag against the invoked subcommand.
    pub fn check_kind(&self, command: &str) -> Result<()> {
        match &self.kind {
            Some(k) if k != command => Err(invalid(format!(
                "config declares kind \"{k}\" but was passed to `{command}`"
            ))),
            _ => Ok(()),
        }
    }

    pub fn require_oracle(&self) -> Result<BuiltOracle> {
        self.oracle
            .as_ref()
            .ok_or_else(|| invalid("config needs an `oracle` block for this command"))?
            .build()
    }

    pub fn require_stream(&self) -> Result<LinearProcessSpec> {
        self.stream
            .as_ref()
            .ok_or_else(|| invalid("config needs a `stream` block for this command"))?
            .build()
    }

    pub fn stream_seed(&self) -> Option<u64> {
        self.stream.as_ref().and_then(|s| s.seed())
    }

    /// Assembles the sampler configuration, applying flag overrides and
    /// filling defaults (horizon, θ* start) from the oracle.
    pub fn sampler_config(
        &self,
        oracle: &dyn GradientOracle,
        overrides: &Overrides,
    ) -> Result<SamplerConfig> {
        let block = self
            .sampler
            .as_ref()
            .ok_or_else(|| invalid("config needs a `sampler` block for this command"))?;
        let lambda = overrides.lambda.unwrap_or(block.lambda);
        let steps = overrides
            .steps
            .or(block.steps)
            .unwrap_or_else(|| default_horizon(oracle, lambda));
        let replicas = overrides.replicas.unwrap_or(block.replicas);
        let seed = overrides.seed.unwrap_or(self.seed);
        let initial = match &block.initial {
            Some(init) => init.build()?,
            None => InitialLaw::at(oracle.theta_star().to_vec()),
        };
        let mut cfg = SamplerConfig::new(lambda, steps, replicas, seed, initial)
            .with_record_every(overrides.record_every.unwrap_or(block.record_every))
            .with_moment_orders(block.moment_orders.clone());
        if let Some(s) = self.stream_seed() {
            cfg = cfg.with_stream_seed(s);
        }
        Ok(cfg)
    }

    /// The config as a JSON value, for manifest echoes.
    pub fn echo(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

//! Langevin iterations: the exact-drift chain (ULA), the noisy-drift
//! chain (SGLD), their synchronous coupling, and the block-restarted
//! auxiliary chain used to localize where the two drift apart.
//!
//! All Monte Carlo runs average over independent replicas. Replica r
//! derives its generators from (seed, purpose, r), and reductions are
//! performed in fixed block order, so every aggregate is bit-identical
//! across reruns and across thread counts.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{hypothesis, invalid, Error, Result};
use crate::metrics::GaussianLaw;
use crate::model::{GradientOracle, QuadraticOracle};
use crate::rng::{self, tag};
use crate::streams::{LinearProcessSpec, VectorStream};

/// Replica reductions accumulate within blocks of this size, then fold
/// the block partials in index order: the result never depends on how
/// rayon schedules the blocks.
const REDUCE_BLOCK: usize = 64;

/// Law of the starting point θ₀.
#[derive(Debug, Clone)]
pub enum InitialLaw {
    Point(Vec<f64>),
    Gaussian { mean: Vec<f64>, sd: f64 },
}

impl InitialLaw {
    pub fn at(point: Vec<f64>) -> Self {
        InitialLaw::Point(point)
    }

    pub fn dim(&self) -> usize {
        match self {
            InitialLaw::Point(p) => p.len(),
            InitialLaw::Gaussian { mean, .. } => mean.len(),
        }
    }

    fn validate(&self, d: usize) -> Result<()> {
        if self.dim() != d {
            return Err(invalid(format!(
                "initial law has dimension {}, model dimension is {d}",
                self.dim()
            )));
        }
        if let InitialLaw::Gaussian { sd, .. } = self {
            if !(*sd >= 0.0) || !sd.is_finite() {
                return Err(invalid("initial standard deviation must be finite and non-negative"));
            }
        }
        Ok(())
    }

    /// Draws θ₀ for the given derivation path.
    pub fn sample(&self, seed: u64, path: &[u64]) -> Vec<f64> {
        match self {
            InitialLaw::Point(p) => p.clone(),
            InitialLaw::Gaussian { mean, sd } => {
                let mut gen = rng::rng(seed, path);
                mean.iter().map(|m| m + sd * gen.sample::<f64, _>(StandardNormal)).collect()
            }
        }
    }

    /// E‖θ₀ − c‖² against a fixed center.
    pub fn mean_sq_to(&self, center: &[f64]) -> f64 {
        match self {
            InitialLaw::Point(p) => dist_sq(p, center),
            InitialLaw::Gaussian { mean, sd } => {
                dist_sq(mean, center) + sd * sd * mean.len() as f64
            }
        }
    }
}

/// E‖η₁ − η₂‖² for independent draws from two initial laws.
pub fn pair_mean_sq(a: &InitialLaw, b: &InitialLaw) -> f64 {
    let (ma, va) = match a {
        InitialLaw::Point(p) => (p.clone(), 0.0),
        InitialLaw::Gaussian { mean, sd } => (mean.clone(), sd * sd * mean.len() as f64),
    };
    match b {
        InitialLaw::Point(p) => dist_sq(&ma, p) + va,
        InitialLaw::Gaussian { mean, sd } => {
            dist_sq(&ma, mean) + va + sd * sd * mean.len() as f64
        }
    }
}

fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Common run parameters. `moment_orders` holds values of p for which
/// E‖θ_n − θ*‖^{2p} traces are recorded.
#[derive(Debug, Clone)]
pub struct SamplerConfig {
    pub lambda: f64,
    pub steps: u64,
    pub replicas: usize,
    pub record_every: u64,
    pub seed: u64,
    /// Separate seed for the data stream; defaults to `seed`.
    pub stream_seed: Option<u64>,
    pub initial: InitialLaw,
    pub moment_orders: Vec<u32>,
}

impl SamplerConfig {
    pub fn new(lambda: f64, steps: u64, replicas: usize, seed: u64, initial: InitialLaw) -> Self {
        Self {
            lambda,
            steps,
            replicas,
            record_every: 1,
            seed,
            stream_seed: None,
            initial,
            moment_orders: Vec::new(),
        }
    }

    pub fn with_stream_seed(mut self, seed: u64) -> Self {
        self.stream_seed = Some(seed);
        self
    }

    pub fn with_record_every(mut self, stride: u64) -> Self {
        self.record_every = stride;
        self
    }

    pub fn with_moment_orders(mut self, orders: Vec<u32>) -> Self {
        self.moment_orders = orders;
        self
    }

    fn validate(&self, oracle: &dyn GradientOracle) -> Result<()> {
        let lbar = lambda_bar(oracle);
        if !(self.lambda > 0.0) || self.lambda >= lbar {
            return Err(hypothesis(format!(
                "step size {} must lie in (0, {lbar}) = (0, 2/(a+L1)) for this model",
                self.lambda
            )));
        }
        if self.replicas == 0 {
            return Err(invalid("need at least one replica"));
        }
        if self.record_every == 0 {
            return Err(invalid("record stride must be at least 1"));
        }
        if self.moment_orders.iter().any(|&p| p == 0) {
            return Err(invalid("moment orders must be at least 1"));
        }
        self.initial.validate(oracle.dim())
    }
}

/// Stability threshold 2/(a+L1) of the model's constants.
pub fn lambda_bar(oracle: &dyn GradientOracle) -> f64 {
    2.0 / (oracle.a() + oracle.l1())
}

/// Default horizon 3·⌈ln(1/λ)/(ãλ)⌉: roughly three contraction times,
/// so both the transient and the stationary phase get sampled.
pub fn default_horizon(oracle: &dyn GradientOracle, lambda: f64) -> u64 {
    let a = oracle.a();
    let l1 = oracle.l1();
    let a_tilde = a * l1 / (a + l1);
    let t = (1.0 / (a_tilde * lambda)) * (1.0 / lambda).ln();
    3 * (t.ceil().max(1.0) as u64)
}

/// One exact-drift step θ − λ·h(θ) + √(2λ)·ξ.
pub fn ula_step(
    oracle: &dyn GradientOracle,
    theta: &[f64],
    lambda: f64,
    xi: &[f64],
) -> Result<Vec<f64>> {
    let d = oracle.dim();
    if theta.len() != d || xi.len() != d {
        return Err(invalid("theta and xi must match the model dimension"));
    }
    let mut drift = vec![0.0; d];
    if !oracle.mean_gradient(theta, &mut drift) {
        return Err(Error::Unsupported(
            "model has no closed-form mean field; use sgld_step with a data value".into(),
        ));
    }
    let scale = (2.0 * lambda).sqrt();
    Ok((0..d).map(|i| theta[i] - lambda * drift[i] + scale * xi[i]).collect())
}

/// One noisy-drift step θ − λ·H(θ, x) + √(2λ)·ξ.
pub fn sgld_step(
    oracle: &dyn GradientOracle,
    theta: &[f64],
    lambda: f64,
    x: &[f64],
    xi: &[f64],
) -> Result<Vec<f64>> {
    let d = oracle.dim();
    if theta.len() != d || xi.len() != d {
        return Err(invalid("theta and xi must match the model dimension"));
    }
    if x.len() != oracle.data_dim() {
        return Err(invalid("data value must match the model's data dimension"));
    }
    let mut drift = vec![0.0; d];
    oracle.gradient(theta, x, &mut drift);
    let scale = (2.0 * lambda).sqrt();
    Ok((0..d).map(|i| theta[i] - lambda * drift[i] + scale * xi[i]).collect())
}

fn recorded_steps(steps: u64, stride: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut n = 0u64;
    while n <= steps {
        out.push(n);
        match n.checked_add(stride) {
            Some(next) => n = next,
            None => break,
        }
    }
    if *out.last().expect("always records n=0") != steps {
        out.push(steps);
    }
    out
}

/// Runs `per_replica` for every replica index, accumulating `width`
/// statistics per replica into (sum, sum of squares) with a fixed
/// reduction order.
fn accumulate_replicas(
    replicas: usize,
    width: usize,
    per_replica: impl Fn(u64, &mut [f64]) + Sync,
) -> (Vec<f64>, Vec<f64>) {
    let blocks = replicas.div_ceil(REDUCE_BLOCK);
    let parts: Vec<(Vec<f64>, Vec<f64>)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let lo = b * REDUCE_BLOCK;
            let hi = ((b + 1) * REDUCE_BLOCK).min(replicas);
            let mut sum = vec![0.0; width];
            let mut sumsq = vec![0.0; width];
            let mut buf = vec![0.0; width];
            for r in lo..hi {
                buf.fill(0.0);
                per_replica(r as u64, &mut buf);
                for i in 0..width {
                    sum[i] += buf[i];
                    sumsq[i] += buf[i] * buf[i];
                }
            }
            (sum, sumsq)
        })
        .collect();
    let mut sum = vec![0.0; width];
    let mut sumsq = vec![0.0; width];
    for (s, q) in parts {
        for i in 0..width {
            sum[i] += s[i];
            sumsq[i] += q[i];
        }
    }
    (sum, sumsq)
}

fn mean_se(sum: f64, sumsq: f64, replicas: usize) -> (f64, f64) {
    let n = replicas as f64;
    let mean = sum / n;
    if replicas < 2 {
        return (mean, 0.0);
    }
    let var = ((sumsq - sum * sum / n) / (n - 1.0)).max(0.0);
    (mean, (var / n).sqrt())
}

/// Recorded statistics of a synchronously coupled (SGLD, ULA) pair:
/// same θ₀, same Langevin noise, the SGLD chain additionally consumes
/// the data stream.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CoupledRun {
    pub lambda: f64,
    pub replicas: usize,
    pub steps: Vec<u64>,
    /// E‖θ_n − θ̄_n‖² per recorded step.
    pub mean_sq: Vec<f64>,
    pub se: Vec<f64>,
    /// Running maximum of `mean_sq`; monotone by construction.
    pub sup_so_far: Vec<f64>,
    pub moment_orders: Vec<u32>,
    /// moments[k][i] = E‖θ_n − θ*‖^{2p_k} of the SGLD chain.
    pub moments: Vec<Vec<f64>>,
    pub moment_se: Vec<Vec<f64>>,
}

pub fn run_coupled(
    oracle: &dyn GradientOracle,
    spec: &LinearProcessSpec,
    config: &SamplerConfig,
) -> Result<CoupledRun> {
    config.validate(oracle)?;
    require_mean_field(oracle)?;
    let d = oracle.dim();
    let m = oracle.data_dim();
    let star = oracle.theta_star().to_vec();
    let rec = recorded_steps(config.steps, config.record_every);
    let orders = config.moment_orders.clone();
    let stats = 1 + orders.len();
    let width = rec.len() * stats;
    let scale = (2.0 * config.lambda).sqrt();
    let lambda = config.lambda;
    let seed = config.seed;
    let sseed = config.stream_seed.unwrap_or(seed);

    let (sum, sumsq) = accumulate_replicas(config.replicas, width, |r, out| {
        let mut stream = VectorStream::new(spec, m, sseed, r);
        let mut noise = rng::rng(seed, &[tag::LANGEVIN, r]);
        let theta0 = config.initial.sample(seed, &[tag::INITIAL, r]);
        let mut th = theta0.clone();
        let mut bar = theta0;
        let mut x = vec![0.0; m];
        let mut g = vec![0.0; d];
        let mut g_bar = vec![0.0; d];
        let mut rec_idx = 0usize;
        let mut next_rec = 0usize;
        for n in 0..=config.steps {
            if next_rec < rec.len() && rec[next_rec] == n {
                let base = rec_idx * stats;
                out[base] = dist_sq(&th, &bar);
                let dsq = dist_sq(&th, &star);
                for (k, &p) in orders.iter().enumerate() {
                    out[base + 1 + k] = dsq.powi(p as i32);
                }
                rec_idx += 1;
                next_rec += 1;
            }
            if n == config.steps {
                break;
            }
            // Both drifts are evaluated at the pre-step states; the
            // chains then share the same Gaussian increment.
            stream.next_into(&mut x);
            oracle.gradient(&th, &x, &mut g);
            oracle.mean_gradient(&bar, &mut g_bar);
            for i in 0..d {
                let xi: f64 = noise.sample(StandardNormal);
                th[i] += -lambda * g[i] + scale * xi;
                bar[i] += -lambda * g_bar[i] + scale * xi;
            }
        }
    });

    let mut run = CoupledRun {
        lambda,
        replicas: config.replicas,
        steps: rec.clone(),
        mean_sq: Vec::with_capacity(rec.len()),
        se: Vec::with_capacity(rec.len()),
        sup_so_far: Vec::with_capacity(rec.len()),
        moment_orders: orders.clone(),
        moments: vec![Vec::with_capacity(rec.len()); orders.len()],
        moment_se: vec![Vec::with_capacity(rec.len()); orders.len()],
    };
    let mut sup = 0.0f64;
    for i in 0..rec.len() {
        let base = i * stats;
        let (mean, se) = mean_se(sum[base], sumsq[base], config.replicas);
        sup = sup.max(mean);
        run.mean_sq.push(mean);
        run.se.push(se);
        run.sup_so_far.push(sup);
        for k in 0..orders.len() {
            let (mm, ss) = mean_se(sum[base + 1 + k], sumsq[base + 1 + k], config.replicas);
            run.moments[k].push(mm);
            run.moment_se[k].push(ss);
        }
    }
    Ok(run)
}

/// Moment traces of a single chain: values[k][i] = E‖θ_n − θ*‖^{2p_k}.
#[derive(Debug, Clone, serde::Serialize)]
pub struct MomentRun {
    pub lambda: f64,
    pub replicas: usize,
    pub steps: Vec<u64>,
    pub orders: Vec<u32>,
    pub moments: Vec<Vec<f64>>,
    pub se: Vec<Vec<f64>>,
    /// sup over recorded steps, per order.
    pub sup: Vec<f64>,
}

fn run_single_chain(
    oracle: &dyn GradientOracle,
    spec: Option<&LinearProcessSpec>,
    config: &SamplerConfig,
) -> Result<MomentRun> {
    config.validate(oracle)?;
    if config.moment_orders.is_empty() {
        return Err(invalid("need at least one moment order to record"));
    }
    if spec.is_none() {
        require_mean_field(oracle)?;
    }
    let d = oracle.dim();
    let m = oracle.data_dim();
    let star = oracle.theta_star().to_vec();
    let rec = recorded_steps(config.steps, config.record_every);
    let orders = config.moment_orders.clone();
    let stats = orders.len();
    let width = rec.len() * stats;
    let scale = (2.0 * config.lambda).sqrt();
    let lambda = config.lambda;
    let seed = config.seed;
    let sseed = config.stream_seed.unwrap_or(seed);

    let (sum, sumsq) = accumulate_replicas(config.replicas, width, |r, out| {
        let mut stream = spec.map(|s| VectorStream::new(s, m, sseed, r));
        let mut noise = rng::rng(seed, &[tag::LANGEVIN, r]);
        let mut th = config.initial.sample(seed, &[tag::INITIAL, r]);
        let mut x = vec![0.0; m];
        let mut g = vec![0.0; d];
        let mut rec_idx = 0usize;
        let mut next_rec = 0usize;
        for n in 0..=config.steps {
            if next_rec < rec.len() && rec[next_rec] == n {
                let dsq = dist_sq(&th, &star);
                let base = rec_idx * stats;
                for (k, &p) in orders.iter().enumerate() {
                    out[base + k] = dsq.powi(p as i32);
                }
                rec_idx += 1;
                next_rec += 1;
            }
            if n == config.steps {
                break;
            }
            match stream.as_mut() {
                Some(stream) => {
                    stream.next_into(&mut x);
                    oracle.gradient(&th, &x, &mut g);
                }
                None => {
                    oracle.mean_gradient(&th, &mut g);
                }
            }
            for i in 0..d {
                let xi: f64 = noise.sample(StandardNormal);
                th[i] += -lambda * g[i] + scale * xi;
            }
        }
    });

    let mut moments = vec![Vec::with_capacity(rec.len()); stats];
    let mut se = vec![Vec::with_capacity(rec.len()); stats];
    let mut sup = vec![0.0f64; stats];
    for i in 0..rec.len() {
        for k in 0..stats {
            let (mean, s) = mean_se(sum[i * stats + k], sumsq[i * stats + k], config.replicas);
            sup[k] = sup[k].max(mean);
            moments[k].push(mean);
            se[k].push(s);
        }
    }
    Ok(MomentRun {
        lambda,
        replicas: config.replicas,
        steps: rec,
        orders,
        moments,
        se,
        sup,
    })
}

/// Noisy-drift chain driven by the data stream.
pub fn run_sgld(
    oracle: &dyn GradientOracle,
    spec: &LinearProcessSpec,
    config: &SamplerConfig,
) -> Result<MomentRun> {
    run_single_chain(oracle, Some(spec), config)
}

/// Exact-drift chain; requires a closed-form mean field.
pub fn run_ula(oracle: &dyn GradientOracle, config: &SamplerConfig) -> Result<MomentRun> {
    run_single_chain(oracle, None, config)
}

/// Final iterate of each replica, as one row per replica in replica
/// order. With a data stream this runs SGLD, without one ULA. Feeds
/// empirical-distribution estimates (Wasserstein distances) that need
/// samples of Law(θ_N) rather than moments.
pub fn run_final_states(
    oracle: &dyn GradientOracle,
    spec: Option<&LinearProcessSpec>,
    config: &SamplerConfig,
) -> Result<Vec<Vec<f64>>> {
    config.validate(oracle)?;
    if spec.is_none() {
        require_mean_field(oracle)?;
    }
    let d = oracle.dim();
    let m = oracle.data_dim();
    let scale = (2.0 * config.lambda).sqrt();
    let lambda = config.lambda;
    let seed = config.seed;
    let sseed = config.stream_seed.unwrap_or(seed);

    (0..config.replicas as u64)
        .into_par_iter()
        .map(|r| {
            let mut stream = spec.map(|s| VectorStream::new(s, m, sseed, r));
            let mut noise = rng::rng(seed, &[tag::LANGEVIN, r]);
            let mut th = config.initial.sample(seed, &[tag::INITIAL, r]);
            let mut x = vec![0.0; m];
            let mut g = vec![0.0; d];
            for _ in 0..config.steps {
                match stream.as_mut() {
                    Some(s) => {
                        s.next_into(&mut x);
                        oracle.gradient(&th, &x, &mut g);
                    }
                    None => {
                        oracle.mean_gradient(&th, &mut g);
                    }
                }
                for i in 0..d {
                    let xi: f64 = noise.sample(StandardNormal);
                    th[i] += -lambda * g[i] + scale * xi;
                }
            }
            Ok(th)
        })
        .collect()
}

/// Two exact-drift chains with shared noise started from different
/// initial laws; records the mean-square gap, which should contract at
/// least as fast as e^{−2ãλn}.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ContractionRun {
    pub lambda: f64,
    pub replicas: usize,
    pub steps: Vec<u64>,
    pub mean_sq: Vec<f64>,
    pub se: Vec<f64>,
    /// Analytic E‖η₁ − η₂‖² of the two initial laws.
    pub initial_mean_sq: f64,
}

pub fn run_coupled_inits(
    oracle: &dyn GradientOracle,
    first: &InitialLaw,
    second: &InitialLaw,
    config: &SamplerConfig,
) -> Result<ContractionRun> {
    config.validate(oracle)?;
    require_mean_field(oracle)?;
    first.validate(oracle.dim())?;
    second.validate(oracle.dim())?;
    let d = oracle.dim();
    let rec = recorded_steps(config.steps, config.record_every);
    let width = rec.len();
    let scale = (2.0 * config.lambda).sqrt();
    let lambda = config.lambda;
    let seed = config.seed;

    let (sum, sumsq) = accumulate_replicas(config.replicas, width, |r, out| {
        let mut noise = rng::rng(seed, &[tag::LANGEVIN, r]);
        let mut th1 = first.sample(seed, &[tag::INITIAL, r, 0]);
        let mut th2 = second.sample(seed, &[tag::INITIAL, r, 1]);
        let mut g1 = vec![0.0; d];
        let mut g2 = vec![0.0; d];
        let mut rec_idx = 0usize;
        let mut next_rec = 0usize;
        for n in 0..=config.steps {
            if next_rec < rec.len() && rec[next_rec] == n {
                out[rec_idx] = dist_sq(&th1, &th2);
                rec_idx += 1;
                next_rec += 1;
            }
            if n == config.steps {
                break;
            }
            oracle.mean_gradient(&th1, &mut g1);
            oracle.mean_gradient(&th2, &mut g2);
            for i in 0..d {
                let xi: f64 = noise.sample(StandardNormal);
                th1[i] += -lambda * g1[i] + scale * xi;
                th2[i] += -lambda * g2[i] + scale * xi;
            }
        }
    });

    let mut mean_sq = Vec::with_capacity(width);
    let mut se = Vec::with_capacity(width);
    for i in 0..width {
        let (m, s) = mean_se(sum[i], sumsq[i], config.replicas);
        mean_sq.push(m);
        se.push(s);
    }
    Ok(ContractionRun {
        lambda,
        replicas: config.replicas,
        steps: rec,
        mean_sq,
        se,
        initial_mean_sq: pair_mean_sq(first, second),
    })
}

/// Gap decomposition of the coupled pair through the block-restarted
/// auxiliary chain z̄: on every block of T = ⌊1/λ⌋ steps, z̄ restarts
/// from the noisy chain's current state and then runs with the exact
/// drift and the shared noise.
#[derive(Debug, Clone, serde::Serialize)]
pub struct BlockRun {
    pub lambda: f64,
    /// Block length T = ⌊1/λ⌋.
    pub block_len: u64,
    pub replicas: usize,
    pub steps: Vec<u64>,
    /// E‖θ_n − z̄_n‖²; exactly 0 at block boundaries.
    pub gap_aux: Vec<f64>,
    pub gap_aux_se: Vec<f64>,
    /// E‖z̄_n − θ̄_n‖².
    pub gap_exact: Vec<f64>,
    pub gap_exact_se: Vec<f64>,
    /// E‖θ_n − θ̄_n‖², the quantity the two gaps decompose.
    pub total: Vec<f64>,
    pub total_se: Vec<f64>,
}

pub fn run_auxiliary_blocks(
    oracle: &dyn GradientOracle,
    spec: &LinearProcessSpec,
    config: &SamplerConfig,
) -> Result<BlockRun> {
    config.validate(oracle)?;
    require_mean_field(oracle)?;
    if config.lambda > 1.0 {
        return Err(hypothesis(format!(
            "block length floor(1/lambda) vanishes for lambda = {} > 1",
            config.lambda
        )));
    }
    let block_len = (1.0 / config.lambda).floor() as u64;
    let d = oracle.dim();
    let m = oracle.data_dim();
    let rec = recorded_steps(config.steps, config.record_every);
    let stats = 3usize;
    let width = rec.len() * stats;
    let scale = (2.0 * config.lambda).sqrt();
    let lambda = config.lambda;
    let seed = config.seed;
    let sseed = config.stream_seed.unwrap_or(seed);

    let (sum, sumsq) = accumulate_replicas(config.replicas, width, |r, out| {
        let mut stream = VectorStream::new(spec, m, sseed, r);
        let mut noise = rng::rng(seed, &[tag::LANGEVIN, r]);
        let theta0 = config.initial.sample(seed, &[tag::INITIAL, r]);
        let mut th = theta0.clone();
        let mut bar = theta0.clone();
        let mut aux = theta0;
        let mut x = vec![0.0; m];
        let mut g = vec![0.0; d];
        let mut g_bar = vec![0.0; d];
        let mut g_aux = vec![0.0; d];
        let mut rec_idx = 0usize;
        let mut next_rec = 0usize;
        for n in 0..=config.steps {
            if n % block_len == 0 {
                aux.copy_from_slice(&th);
            }
            if next_rec < rec.len() && rec[next_rec] == n {
                let base = rec_idx * stats;
                out[base] = dist_sq(&th, &aux);
                out[base + 1] = dist_sq(&aux, &bar);
                out[base + 2] = dist_sq(&th, &bar);
                rec_idx += 1;
                next_rec += 1;
            }
            if n == config.steps {
                break;
            }
            stream.next_into(&mut x);
            oracle.gradient(&th, &x, &mut g);
            oracle.mean_gradient(&bar, &mut g_bar);
            oracle.mean_gradient(&aux, &mut g_aux);
            for i in 0..d {
                let xi: f64 = noise.sample(StandardNormal);
                th[i] += -lambda * g[i] + scale * xi;
                bar[i] += -lambda * g_bar[i] + scale * xi;
                aux[i] += -lambda * g_aux[i] + scale * xi;
            }
        }
    });

    let n_rec = rec.len();
    let mut run = BlockRun {
        lambda,
        block_len,
        replicas: config.replicas,
        steps: rec,
        gap_aux: Vec::with_capacity(n_rec),
        gap_aux_se: Vec::with_capacity(n_rec),
        gap_exact: Vec::with_capacity(n_rec),
        gap_exact_se: Vec::with_capacity(n_rec),
        total: Vec::with_capacity(n_rec),
        total_se: Vec::with_capacity(n_rec),
    };
    for i in 0..n_rec {
        let base = i * stats;
        let (a, ase) = mean_se(sum[base], sumsq[base], config.replicas);
        let (b, bse) = mean_se(sum[base + 1], sumsq[base + 1], config.replicas);
        let (c, cse) = mean_se(sum[base + 2], sumsq[base + 2], config.replicas);
        run.gap_aux.push(a);
        run.gap_aux_se.push(ase);
        run.gap_exact.push(b);
        run.gap_exact_se.push(bse);
        run.total.push(c);
        run.total_se.push(cse);
    }
    Ok(run)
}

fn require_mean_field(oracle: &dyn GradientOracle) -> Result<()> {
    let mut probe = vec![0.0; oracle.dim()];
    if oracle.mean_gradient(oracle.theta_star(), &mut probe) {
        Ok(())
    } else {
        Err(Error::Unsupported(
            "this run needs a closed-form mean field, which the model does not provide".into(),
        ))
    }
}

/// Exact invariant law of the exact-drift chain for an affine model:
/// N(θ*, V) with V solving V = (I−λS)V(I−λS)ᵀ + 2λI. Per eigenvalue s
/// of S the stationary variance is 2λ/(1−(1−λs)²) = 2/(s(2−λs)).
pub fn stationary_ula_gaussian(oracle: &QuadraticOracle, lambda: f64) -> Result<GaussianLaw> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(invalid("step size must be positive and finite"));
    }
    let s_max = *oracle.eigenvalues().last().expect("model has dimension >= 1");
    if lambda * s_max >= 2.0 {
        return Err(hypothesis(format!(
            "chain diverges: lambda * s_max = {} >= 2",
            lambda * s_max
        )));
    }
    let var = |s: f64| 2.0 * lambda / (1.0 - (1.0 - lambda * s) * (1.0 - lambda * s));
    let mean = oracle.theta_star().to_vec();
    if oracle.is_diagonal() {
        let v: Vec<f64> = (0..oracle.dim()).map(|i| var(oracle.curvature()[(i, i)])).collect();
        return GaussianLaw::diag(mean, v);
    }
    let d = oracle.dim();
    let q = oracle.eigenvectors();
    let mut cov = nalgebra::DMatrix::zeros(d, d);
    for (k, &s) in oracle.eigenvalues().iter().enumerate() {
        let col = q.column(k);
        let vk = var(s);
        for i in 0..d {
            for j in 0..d {
                cov[(i, j)] += vk * col[i] * col[j];
            }
        }
    }
    GaussianLaw::full(mean, cov)
}

/// The sampling target N(θ*, S⁻¹) of an affine model.
pub fn target_gaussian(oracle: &QuadraticOracle) -> Result<GaussianLaw> {
    let mean = oracle.theta_star().to_vec();
    if oracle.is_diagonal() {
        let v: Vec<f64> = (0..oracle.dim()).map(|i| 1.0 / oracle.curvature()[(i, i)]).collect();
        return GaussianLaw::diag(mean, v);
    }
    let d = oracle.dim();
    let q = oracle.eigenvectors();
    let mut cov = nalgebra::DMatrix::zeros(d, d);
    for (k, &s) in oracle.eigenvalues().iter().enumerate() {
        let col = q.column(k);
        for i in 0..d {
            for j in 0..d {
                cov[(i, j)] += col[i] * col[j] / s;
            }
        }
    }
    GaussianLaw::full(mean, cov)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::w2_gaussian;
    use crate::streams::coupled_variance_exact;

    fn unit() -> QuadraticOracle {
        QuadraticOracle::unit()
    }

    fn point0(d: usize) -> InitialLaw {
        InitialLaw::at(vec![0.0; d])
    }

    #[test]
    fn step_hand_values() {
        let q = unit();
        // Drift step: h(θ)=θ, θ=1, λ=1, ξ=0 → 0.
        assert_eq!(ula_step(&q, &[1.0], 1.0, &[0.0]).unwrap(), vec![0.0]);
        // Fixed point of the drift.
        assert_eq!(ula_step(&q, &[0.0], 0.3, &[0.0]).unwrap(), vec![0.0]);
        // Pure noise: √(2·0.5)·1 = 1.
        assert_eq!(ula_step(&q, &[0.0], 0.5, &[1.0]).unwrap(), vec![1.0]);
        // Noisy drift: θ=1, x=0.5, λ=1 → 1 − 1.5 = −0.5.
        assert_eq!(sgld_step(&q, &[1.0], 1.0, &[0.5], &[0.0]).unwrap(), vec![-0.5]);
        assert_eq!(sgld_step(&q, &[0.0], 0.1, &[1.0], &[0.0]).unwrap(), vec![-0.1]);
        // Degenerate data x=0 collapses the noisy step onto the drift step.
        let a = sgld_step(&q, &[0.7], 0.2, &[0.0], &[0.3]).unwrap();
        let b = ula_step(&q, &[0.7], 0.2, &[0.3]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn step_size_guard() {
        let q = unit(); // λ̄ = 1
        let cfg = SamplerConfig::new(1.0, 10, 4, 1, point0(1));
        assert!(matches!(run_ula(&q, &cfg), Err(Error::Hypothesis(_))));
        let cfg = SamplerConfig::new(0.0, 10, 4, 1, point0(1));
        assert!(run_coupled(&q, &LinearProcessSpec::iid_gaussian(), &cfg).is_err());
    }

    #[test]
    fn coupled_decoupled_data_gives_zero_distance() {
        // H(θ, x) = θ ignores the data: the pair coincides forever.
        let q = QuadraticOracle::scalar(1.0, 0.0, 0.0).unwrap();
        let cfg = SamplerConfig::new(0.5, 40, 8, 3, point0(1)).with_record_every(10);
        let run = run_coupled(&q, &LinearProcessSpec::iid_gaussian(), &cfg).unwrap();
        assert!(run.mean_sq.iter().all(|&v| v == 0.0));
        assert!(run.sup_so_far.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn coupled_matches_exact_curve_iid() {
        let q = unit();
        let spec = LinearProcessSpec::iid_gaussian();
        let cfg = SamplerConfig::new(0.5, 60, 6000, 7, point0(1)).with_record_every(1);
        let run = run_coupled(&q, &spec, &cfg).unwrap();
        // One step: E(θ̄₁−θ₁)² = λ² exactly.
        let one = run.mean_sq[1];
        assert!((one - 0.25).abs() < 3.0 * run.se[1].max(1e-12), "{one}");
        // Large n: 1/3 limit.
        let last = *run.mean_sq.last().unwrap();
        let want = coupled_variance_exact(&spec, 0.5, 60).unwrap();
        assert!((want - 1.0 / 3.0).abs() < 1e-9);
        assert!((last - want).abs() < 3.0 * run.se.last().unwrap(), "{last} vs {want}");
        // Start: distance 0.
        assert_eq!(run.mean_sq[0], 0.0);
    }

    #[test]
    fn coupled_matches_exact_curve_dependent_stream() {
        let q = unit();
        let spec = LinearProcessSpec::new(vec![1.0, 0.5]).unwrap();
        let cfg = SamplerConfig::new(0.25, 40, 6000, 11, point0(1)).with_record_every(8);
        let run = run_coupled(&q, &spec, &cfg).unwrap();
        for (i, &n) in run.steps.iter().enumerate().skip(1) {
            let want = coupled_variance_exact(&spec, 0.25, n as usize).unwrap();
            assert!(
                (run.mean_sq[i] - want).abs() < 3.0 * run.se[i],
                "n={n}: {} vs {want} (se {})",
                run.mean_sq[i],
                run.se[i]
            );
        }
    }

    #[test]
    fn sgld_stationary_second_moment_matches_fixed_point() {
        // θ_{n+1} = (1−λ)θ_n − λX_{n+1} + √(2λ)ξ with Var X = 1:
        // stationary E θ² = (2 + λ·Var X)/(2 − λ).
        let q = unit();
        let spec = LinearProcessSpec::iid_gaussian();
        let lambda = 0.1;
        let cfg = SamplerConfig::new(lambda, 250, 20_000, 19, point0(1))
            .with_record_every(250)
            .with_moment_orders(vec![1]);
        let run = run_sgld(&q, &spec, &cfg).unwrap();
        let want = (2.0 + lambda) / (2.0 - lambda);
        let got = *run.moments[0].last().unwrap();
        let se = *run.se[0].last().unwrap();
        assert!((got - want).abs() < 3.0 * se, "{got} vs {want} (se {se})");
        // Trace starts at zero from the point mass at θ*.
        assert_eq!(run.moments[0][0], 0.0);
    }

    #[test]
    fn ula_stationary_variance_and_lyapunov_drift() {
        let q = unit();
        let lambda = 0.5;
        let cfg = SamplerConfig::new(lambda, 60, 20_000, 23, point0(1))
            .with_record_every(1)
            .with_moment_orders(vec![1]);
        let run = run_ula(&q, &cfg).unwrap();
        let want = 2.0 / (2.0 - lambda);
        let got = *run.moments[0].last().unwrap();
        let se = *run.se[0].last().unwrap();
        assert!((got - want).abs() < 3.0 * se, "{got} vs {want}");
        // One-step drift bound E V₁(θ_{n+1}) ≤ ρ_λ E V₁(θ_n) + λ C′(1)
        // with ρ_λ = 1 − 0.25 and C′(1) = 10 for this model, checked at
        // every consecutive recorded pair.
        let rho = 1.0 - 0.5 * lambda;
        for i in 1..run.steps.len() {
            let prev = run.moments[0][i - 1];
            let next = run.moments[0][i];
            let slack = 3.0 * (run.se[0][i] + run.se[0][i - 1]);
            assert!(next <= rho * prev + lambda * 10.0 + slack);
        }
    }

    #[test]
    fn contraction_of_shared_noise_chains() {
        // S = diag(1, 3): ã = 1·3/4 = 0.75, λ̄ = 0.5.
        let q = QuadraticOracle::diagonal(&[1.0, 3.0]).unwrap();
        let lambda = 0.25;
        let eta1 = InitialLaw::Gaussian { mean: vec![2.0, -1.0], sd: 0.5 };
        let eta2 = InitialLaw::Gaussian { mean: vec![-1.0, 0.5], sd: 0.3 };
        let cfg = SamplerConfig::new(lambda, 20, 4000, 31, point0(2)).with_record_every(4);
        let run = run_coupled_inits(&q, &eta1, &eta2, &cfg).unwrap();
        // Analytic initial mean-square: ‖Δmean‖² + (0.25+0.09)·2.
        let want0 = 9.0 + 2.25 + 0.68;
        assert!((run.initial_mean_sq - want0).abs() < 1e-12);
        assert!((run.mean_sq[0] - want0).abs() < 3.0 * run.se[0]);
        let a_tilde = 0.75;
        for (i, &n) in run.steps.iter().enumerate() {
            let bound = (-2.0 * a_tilde * lambda * n as f64).exp() * run.initial_mean_sq;
            assert!(
                run.mean_sq[i] <= bound + 3.0 * run.se[i],
                "n={n}: {} > {bound}",
                run.mean_sq[i]
            );
        }
        // The gap really does shrink.
        assert!(*run.mean_sq.last().unwrap() < 0.01 * run.initial_mean_sq);
    }

    #[test]
    fn auxiliary_blocks_vanish_at_boundaries_and_decompose() {
        let q = unit();
        let spec = LinearProcessSpec::iid_gaussian();
        let lambda = 0.1; // T = 10
        let cfg = SamplerConfig::new(lambda, 60, 4000, 37, point0(1)).with_record_every(5);
        let run = run_auxiliary_blocks(&q, &spec, &cfg).unwrap();
        assert_eq!(run.block_len, 10);
        for (i, &n) in run.steps.iter().enumerate() {
            if n % 10 == 0 {
                assert_eq!(run.gap_aux[i], 0.0, "boundary n={n}");
            }
            // Root mean-square triangle inequality of the decomposition,
            // compared on the squared scale with additive SE slack.
            let lhs = run.total[i];
            let r = run.gap_aux[i].sqrt() + run.gap_exact[i].sqrt();
            let slack = 3.0 * (run.total_se[i] + run.gap_aux_se[i] + run.gap_exact_se[i]);
            assert!(lhs <= r * r + slack, "n={n}: {lhs} vs {}", r * r);
        }
    }

    #[test]
    fn auxiliary_blocks_decoupled_data_all_zero() {
        let q = QuadraticOracle::scalar(1.0, 0.0, 0.0).unwrap();
        let cfg = SamplerConfig::new(0.4, 20, 8, 5, point0(1)).with_record_every(4);
        let run = run_auxiliary_blocks(&q, &LinearProcessSpec::iid_gaussian(), &cfg).unwrap();
        assert!(run.gap_aux.iter().all(|&v| v == 0.0));
        assert!(run.gap_exact.iter().all(|&v| v == 0.0));
        assert!(run.total.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn auxiliary_blocks_reject_lambda_above_one() {
        // S = 5 gives λ̄ = 0.4·... = 2/10; use S small so λ̄ > 1 but λ > 1.
        let q = QuadraticOracle::scalar(0.5, 0.0, 1.0).unwrap(); // λ̄ = 2
        let cfg = SamplerConfig::new(1.5, 10, 4, 5, point0(1));
        assert!(matches!(
            run_auxiliary_blocks(&q, &LinearProcessSpec::iid_gaussian(), &cfg),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn stationary_law_hand_values() {
        // S = I, d = 1, λ = 1: variance 2λ/(1−(1−λ)²) = 2.
        let q = unit();
        let law = stationary_ula_gaussian(&q, 1.0).unwrap();
        match &law.cov {
            crate::metrics::Cov::Diag(v) => assert!((v[0] - 2.0).abs() < 1e-14),
            _ => panic!("diagonal model yields a diagonal law"),
        }
        // λ → 0 recovers the target N(0, 1).
        let law = stationary_ula_gaussian(&q, 1e-4).unwrap();
        let target = target_gaussian(&q).unwrap();
        assert!(w2_gaussian(&law, &target).unwrap() < 1e-4);
        // S = diag(1, 2), λ = 0.1: variances 2/(1·1.9) and 2/(2·1.8).
        let q2 = QuadraticOracle::diagonal(&[1.0, 2.0]).unwrap();
        let law2 = stationary_ula_gaussian(&q2, 0.1).unwrap();
        match &law2.cov {
            crate::metrics::Cov::Diag(v) => {
                assert!((v[0] - 2.0 / 1.9).abs() < 1e-14);
                assert!((v[1] - 2.0 / 3.6).abs() < 1e-14);
            }
            _ => panic!("diagonal model yields a diagonal law"),
        }
    }

    #[test]
    fn stationary_law_rotated_model_matches_diagonal_distance() {
        // Rotating the curvature must not change distances to the target.
        let c = std::f64::consts::FRAC_1_SQRT_2;
        let r = nalgebra::DMatrix::from_row_slice(2, 2, &[c, -c, c, c]);
        let s_diag = nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&[
            1.0, 2.0,
        ]));
        let s_rot = &r * &s_diag * r.transpose();
        let q_rot = QuadraticOracle::new(s_rot, vec![0.0, 0.0], nalgebra::DMatrix::identity(2, 2))
            .unwrap();
        let q_diag = QuadraticOracle::diagonal(&[1.0, 2.0]).unwrap();
        let w_rot = w2_gaussian(
            &stationary_ula_gaussian(&q_rot, 0.2).unwrap(),
            &target_gaussian(&q_rot).unwrap(),
        )
        .unwrap();
        let w_diag = w2_gaussian(
            &stationary_ula_gaussian(&q_diag, 0.2).unwrap(),
            &target_gaussian(&q_diag).unwrap(),
        )
        .unwrap();
        assert!((w_rot - w_diag).abs() < 1e-10, "{w_rot} vs {w_diag}");
    }

    #[test]
    fn stationary_law_rejects_divergent_step() {
        let q = QuadraticOracle::diagonal(&[1.0, 4.0]).unwrap();
        assert!(matches!(
            stationary_ula_gaussian(&q, 0.5),
            Err(Error::Hypothesis(_))
        ));
        assert!(stationary_ula_gaussian(&q, 0.49).is_ok());
    }

    #[test]
    fn isotropic_bias_closed_form() {
        // For S = I the distance to target is √d(√(2/(2−λ)) − 1).
        let q = QuadraticOracle::diagonal(&[1.0, 1.0]).unwrap();
        let lambda = 0.1;
        let w = w2_gaussian(
            &stationary_ula_gaussian(&q, lambda).unwrap(),
            &target_gaussian(&q).unwrap(),
        )
        .unwrap();
        let want = 2f64.sqrt() * ((2.0 / (2.0 - lambda)).sqrt() - 1.0);
        assert!((w - want).abs() < 1e-12, "{w} vs {want}");
    }

    #[test]
    fn default_horizon_formula() {
        let q = unit(); // ã = 0.5
        let h = default_horizon(&q, 0.125);
        // 3·⌈ln 8/(0.5·0.125)⌉ = 3·⌈33.27⌉ = 102.
        assert_eq!(h, 102);
        assert!(default_horizon(&q, 0.9999) >= 3);
    }

    #[test]
    fn runs_are_bit_identical_across_thread_counts() {
        let q = unit();
        let spec = LinearProcessSpec::new(vec![1.0, 0.5]).unwrap();
        let cfg = SamplerConfig::new(0.3, 30, 130, 99, point0(1))
            .with_record_every(7)
            .with_moment_orders(vec![1, 2]);
        let pool1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let pool4 = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let r1 = pool1.install(|| run_coupled(&q, &spec, &cfg).unwrap());
        let r4 = pool4.install(|| run_coupled(&q, &spec, &cfg).unwrap());
        assert_eq!(r1.mean_sq, r4.mean_sq);
        assert_eq!(r1.se, r4.se);
        assert_eq!(r1.moments, r4.moments);
        // And a different seed really changes the numbers.
        let mut cfg2 = cfg.clone();
        cfg2.seed = 100;
        let other = run_coupled(&q, &spec, &cfg2).unwrap();
        assert_ne!(r1.mean_sq, other.mean_sq);
    }

    #[test]
    fn recorded_steps_cover_endpoints() {
        assert_eq!(recorded_steps(10, 4), vec![0, 4, 8, 10]);
        assert_eq!(recorded_steps(8, 4), vec![0, 4, 8]);
        assert_eq!(recorded_steps(0, 5), vec![0]);
        assert_eq!(recorded_steps(3, 10), vec![0, 3]);
    }

    #[test]
    fn final_states_agree_with_single_chain_moments() {
        // Same seed derivations as run_sgld, so the final-iterate rows
        // must reproduce the last recorded moment exactly.
        let q = QuadraticOracle::unit();
        let spec = LinearProcessSpec::iid_gaussian();
        let cfg = SamplerConfig::new(0.25, 30, 64, 9, InitialLaw::at(vec![2.0]))
            .with_moment_orders(vec![1]);
        let run = run_sgld(&q, &spec, &cfg).unwrap();
        let finals = run_final_states(&q, Some(&spec), &cfg).unwrap();
        assert_eq!(finals.len(), 64);
        let msq = finals.iter().map(|th| th[0] * th[0]).sum::<f64>() / 64.0;
        assert!((msq - run.moments[0].last().unwrap()).abs() < 1e-12);

        let again = run_final_states(&q, Some(&spec), &cfg).unwrap();
        assert_eq!(finals, again);
    }
}

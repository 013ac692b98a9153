//! Implementations behind the CLI subcommands: load a config, write the
//! manifest first, run, then write results and mark the manifest
//! complete. Floats serialize with 17 significant digits so CSV and
//! JSON outputs round-trip exactly.

use std::fs;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::constants::{
    plan_dependent, plan_iid, ChainInputs, ConstantChain, ConvexityConstants, DataMoments,
    DependentPlan, GrowthPair, IidPlan, IidPlanInputs, InitialMoments,
};
use crate::error::{invalid, Result};
use crate::metrics::{w2_assignment, w2_empirical_1d};
use crate::mixing::{profile_build, MixingProfile};
use crate::model::{GradientOracle, QuadraticOracle};
use crate::samplers::{run_coupled, run_sgld};
use crate::streams::{DecayCertificate, LinearProcessSpec};

use super::checks::{run_verify, Level};
use super::config::{ExperimentConfig, Overrides};
use super::manifest::{manifest_path, OracleConstants, RunManifest};
use super::runs::{
    bias_closed_points, execute_plan, moment_suite, rate_sweep, ula_bias_empirical,
    EmpiricalBias, PlanExecution,
};

/// 17 significant digits: enough for f64 round-trips.
fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)
        .map_err(|e| invalid(format!("cannot write {}: {e}", path.display())))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| invalid(format!("cannot parse {}: {e}", path.display())))
}

/// One trajectory table: `n,mean_sq_dist,se,sup_so_far` plus one
/// `moment_p{P}` column per extra order.
struct RunTable<'a> {
    steps: &'a [u64],
    mean_sq: &'a [f64],
    se: &'a [f64],
    sup: &'a [f64],
    moment_orders: &'a [u32],
    moments: &'a [Vec<f64>],
}

fn write_run_csv(path: &Path, t: &RunTable) -> Result<()> {
    let mut text = String::from("n,mean_sq_dist,se,sup_so_far");
    for p in t.moment_orders {
        let _ = write!(text, ",moment_p{p}");
    }
    text.push('\n');
    for (i, &n) in t.steps.iter().enumerate() {
        let _ = write!(
            text,
            "{n},{},{},{}",
            fmt_float(t.mean_sq[i]),
            fmt_float(t.se[i]),
            fmt_float(t.sup[i])
        );
        for col in t.moments {
            let _ = write!(text, ",{}", fmt_float(col[i]));
        }
        text.push('\n');
    }
    fs::write(path, text)
        .map_err(|e| invalid(format!("cannot write {}: {e}", path.display())))
}

/// Samples for the Wasserstein command: one point per row, d columns.
/// A single leading non-numeric row is tolerated as a header.
pub fn read_samples_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        let parsed: std::result::Result<Vec<f64>, _> =
            record.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(e) if idx == 0 => {
                // Header row; skip it.
                let _ = e;
            }
            Err(e) => {
                return Err(invalid(format!(
                    "{} row {}: non-numeric field ({e})",
                    path.display(),
                    idx + 1
                )))
            }
        }
    }
    if rows.is_empty() {
        return Err(invalid(format!("{} contains no sample rows", path.display())));
    }
    let d = rows[0].len();
    if d == 0 || rows.iter().any(|r| r.len() != d) {
        return Err(invalid(format!(
            "{}: every row must carry the same positive number of columns",
            path.display()
        )));
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------

/// `sample`: single-chain moment trajectory. The distance columns carry
/// E‖θ_n − θ*‖² (the order-1 moment); requested orders beyond 1 become
/// `moment_p{P}` columns.
pub fn cmd_sample(config_path: &Path, out: &Path, ov: &Overrides) -> Result<()> {
    let started = Instant::now();
    let config = ExperimentConfig::load(config_path)?;
    config.check_kind("sample")?;
    let built = config.require_oracle()?;
    let oracle = built.sampler()?;
    let spec = config.require_stream()?;
    let mut sampler = config.sampler_config(oracle, ov)?;

    // Order 1 is the distance column; make sure it is simulated.
    let mut orders = sampler.moment_orders.clone();
    if !orders.contains(&1) {
        orders.insert(0, 1);
    }
    sampler = sampler.with_moment_orders(orders.clone());

    let mut manifest = RunManifest::begin("sample", sampler.seed, config.echo());
    manifest.lambda = Some(sampler.lambda);
    manifest.steps = Some(sampler.steps);
    manifest.replicas = Some(sampler.replicas);
    manifest.oracle_constants = Some(OracleConstants::from_oracle(oracle));
    manifest.stream_coeffs = Some(spec.coeffs().to_vec());
    manifest.outputs = vec![out.display().to_string()];
    let mpath = manifest_path(out);
    manifest.write(&mpath)?;

    let run = run_sgld(oracle, &spec, &sampler)?;
    let one = orders.iter().position(|&p| p == 1).expect("order 1 was inserted");
    let mean_sq = &run.moments[one];
    let se = &run.se[one];
    let mut sup = Vec::with_capacity(mean_sq.len());
    let mut acc = f64::NEG_INFINITY;
    for &v in mean_sq {
        acc = acc.max(v);
        sup.push(acc);
    }
    let extra: Vec<usize> =
        (0..orders.len()).filter(|&k| orders[k] != 1).collect();
    let extra_orders: Vec<u32> = extra.iter().map(|&k| orders[k]).collect();
    let extra_moments: Vec<Vec<f64>> = extra.iter().map(|&k| run.moments[k].clone()).collect();
    write_run_csv(
        out,
        &RunTable {
            steps: &run.steps,
            mean_sq,
            se,
            sup: &sup,
            moment_orders: &extra_orders,
            moments: &extra_moments,
        },
    )?;

    manifest.complete(started);
    manifest.write(&mpath)?;
    println!(
        "sample: {} recorded steps to {} (final mean_sq_dist {})",
        run.steps.len(),
        out.display(),
        fmt_float(*mean_sq.last().expect("at least one recorded step"))
    );
    Ok(())
}

/// `couple`: shared-noise pair (SGLD vs exact-drift chain); the
/// distance columns carry E‖θ_n − θ̄_n‖².
pub fn cmd_couple(config_path: &Path, out: &Path, ov: &Overrides) -> Result<()> {
    let started = Instant::now();
    let config = ExperimentConfig::load(config_path)?;
    config.check_kind("couple")?;
    let built = config.require_oracle()?;
    let oracle = built.sampler()?;
    let spec = config.require_stream()?;
    let sampler = config.sampler_config(oracle, ov)?;

    let mut manifest = RunManifest::begin("couple", sampler.seed, config.echo());
    manifest.lambda = Some(sampler.lambda);
    manifest.steps = Some(sampler.steps);
    manifest.replicas = Some(sampler.replicas);
    manifest.oracle_constants = Some(OracleConstants::from_oracle(oracle));
    manifest.stream_coeffs = Some(spec.coeffs().to_vec());
    manifest.outputs = vec![out.display().to_string()];
    let mpath = manifest_path(out);
    manifest.write(&mpath)?;

    let run = run_coupled(oracle, &spec, &sampler)?;
    write_run_csv(
        out,
        &RunTable {
            steps: &run.steps,
            mean_sq: &run.mean_sq,
            se: &run.se,
            sup: &run.sup_so_far,
            moment_orders: &run.moment_orders,
            moments: &run.moments,
        },
    )?;

    manifest.complete(started);
    manifest.write(&mpath)?;
    println!(
        "couple: {} recorded steps to {} (final mean_sq_dist {})",
        run.steps.len(),
        out.display(),
        fmt_float(*run.mean_sq.last().expect("at least one recorded step"))
    );
    Ok(())
}

/// `rate-sweep`: stationary coupled distance over a λ grid with a
/// fitted log-log slope. Writes the JSON report to `out` and a
/// plot-ready CSV next to it.
pub fn cmd_rate_sweep(
    config_path: &Path,
    out: &Path,
    lambdas: Option<Vec<f64>>,
    ov: &Overrides,
) -> Result<()> {
    let started = Instant::now();
    let config = ExperimentConfig::load(config_path)?;
    config.check_kind("rate-sweep")?;
    let built = config.require_oracle()?;
    let oracle = built.sampler()?;
    let spec = config.require_stream()?;

    let grid: Vec<f64> = match lambdas {
        Some(l) => l,
        None => (4..=9).map(|k| 0.5f64.powi(k)).collect(),
    };
    let replicas = ov
        .replicas
        .or_else(|| config.sampler.as_ref().map(|s| s.replicas))
        .unwrap_or(1000);
    let steps_override = ov.steps.or_else(|| config.sampler.as_ref().and_then(|s| s.steps));
    let seed = ov.seed.unwrap_or(config.seed);

    let mut manifest = RunManifest::begin("rate-sweep", seed, config.echo());
    manifest.replicas = Some(replicas);
    manifest.oracle_constants = Some(OracleConstants::from_oracle(oracle));
    manifest.stream_coeffs = Some(spec.coeffs().to_vec());
    manifest.derived = Some(serde_json::json!({ "grid": grid }));
    manifest.outputs = vec![out.display().to_string()];
    let mpath = manifest_path(out);
    manifest.write(&mpath)?;

    let report = rate_sweep(oracle, &spec, &grid, replicas, seed, steps_override)?;
    for lambda in &report.skipped {
        eprintln!("warning: step size {lambda} >= 2/(a+L1); point skipped");
    }
    write_json(out, &report)?;

    let csv_path = sibling_with_extension(out, "csv");
    let mut text =
        String::from("lambda,steps,window_start,distance,se,sup_distance,mid_distance,mid_se,analytic_mid,plateau\n");
    for p in &report.points {
        let _ = writeln!(
            text,
            "{},{},{},{},{},{},{},{},{},{}",
            fmt_float(p.lambda),
            p.steps,
            p.window_start,
            fmt_float(p.distance),
            fmt_float(p.se),
            fmt_float(p.sup_distance),
            fmt_float(p.mid_distance),
            fmt_float(p.mid_se),
            p.analytic_mid.map(fmt_float).unwrap_or_default(),
            p.plateau
        );
    }
    fs::write(&csv_path, text)
        .map_err(|e| invalid(format!("cannot write {}: {e}", csv_path.display())))?;
    manifest.outputs.push(csv_path.display().to_string());

    manifest.complete(started);
    manifest.write(&mpath)?;
    match (report.fitted_slope, report.ci_low, report.ci_high) {
        (Some(s), Some(lo), Some(hi)) => println!(
            "rate-sweep: slope {s:.4} with 95% bootstrap interval [{lo:.4}, {hi:.4}] over {} points",
            report.points.len()
        ),
        _ => println!(
            "rate-sweep: {} points, no slope ({})",
            report.points.len(),
            if report.degenerate { "degenerate distances" } else { "fewer than two usable points" }
        ),
    }
    Ok(())
}

/// `moments`: the drift-inequality suite on the configured system.
pub fn cmd_moments(config_path: &Path, out: &Path, ov: &Overrides) -> Result<()> {
    let started = Instant::now();
    let config = ExperimentConfig::load(config_path)?;
    config.check_kind("moments")?;
    let built = config.require_oracle()?;
    let oracle = built.sampler()?;
    let spec = config.require_stream()?;
    let sampler = config.sampler_config(oracle, ov)?;

    let mut manifest = RunManifest::begin("moments", sampler.seed, config.echo());
    manifest.lambda = Some(sampler.lambda);
    manifest.steps = Some(sampler.steps);
    manifest.replicas = Some(sampler.replicas);
    manifest.oracle_constants = Some(OracleConstants::from_oracle(oracle));
    manifest.stream_coeffs = Some(spec.coeffs().to_vec());
    manifest.outputs = vec![out.display().to_string()];
    let mpath = manifest_path(out);
    manifest.write(&mpath)?;

    let report = moment_suite(
        oracle,
        &spec,
        sampler.lambda,
        sampler.steps,
        sampler.replicas,
        sampler.seed,
        sampler.initial.clone(),
    )?;
    write_json(out, &report)?;
    for check in &report.checks {
        let status = if check.skipped {
            "SKIP"
        } else if check.pass {
            "pass"
        } else {
            "FAIL"
        };
        println!("{status} {} (margin {:.3e}): {}", check.name, check.margin, check.detail);
    }
    println!(
        "moments: {} at lambda {} over {} steps",
        if report.all_pass { "all inequalities hold" } else { "FAILURES present" },
        report.lambda,
        report.steps
    );

    manifest.complete(started);
    manifest.write(&mpath)?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct BiasReportRow {
    pub lambda: f64,
    pub w2_closed: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w2_empirical: Option<f64>,
    pub c_sqrt_lambda: f64,
    /// Closed form ≤ c√λ.
    pub pass: bool,
    /// w2_closed/√λ; converges to a constant as λ → 0.
    pub closed_over_sqrt_lambda: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BiasReport {
    pub rows: Vec<BiasReportRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub empirical: Option<EmpiricalBias>,
    pub all_pass: bool,
}

/// `ula-bias`: closed-form stationary bias per λ, plus one long-run
/// empirical audit at the first λ when `empirical_steps` is given.
pub fn cmd_ula_bias(
    config_path: &Path,
    out: &Path,
    lambdas: Option<Vec<f64>>,
    empirical_steps: Option<u64>,
    ov: &Overrides,
) -> Result<()> {
    let started = Instant::now();
    let config = ExperimentConfig::load(config_path)?;
    config.check_kind("ula-bias")?;
    let built = config.require_oracle()?;
    let oracle = built.sampler()?;

    let grid: Vec<f64> = lambdas
        .or_else(|| {
            ov.lambda
                .or_else(|| config.sampler.as_ref().map(|s| s.lambda))
                .map(|l| vec![l])
        })
        .unwrap_or_else(|| vec![0.01, 0.1, 0.3]);
    let seed = ov.seed.unwrap_or(config.seed);

    let mut manifest = RunManifest::begin("ula-bias", seed, config.echo());
    manifest.oracle_constants = Some(OracleConstants::from_oracle(oracle));
    manifest.derived = Some(serde_json::json!({ "grid": grid }));
    manifest.outputs = vec![out.display().to_string()];
    let mpath = manifest_path(out);
    manifest.write(&mpath)?;

    let points = bias_closed_points(oracle, &grid)?;
    let empirical = match empirical_steps {
        Some(steps) => Some(ula_bias_empirical(oracle, grid[0], steps, seed)?),
        None => None,
    };
    let rows: Vec<BiasReportRow> = points
        .iter()
        .map(|p| BiasReportRow {
            lambda: p.lambda,
            w2_closed: p.w2_closed,
            w2_empirical: empirical
                .as_ref()
                .filter(|e| e.lambda == p.lambda)
                .map(|e| e.w2_empirical),
            c_sqrt_lambda: p.c_sqrt_lambda,
            pass: p.pass,
            closed_over_sqrt_lambda: p.closed_over_sqrt_lambda,
        })
        .collect();
    let all_pass = rows.iter().all(|r| r.pass);
    let report = BiasReport { rows, empirical, all_pass };
    write_json(out, &report)?;
    for r in &report.rows {
        println!(
            "lambda {}: closed {} vs c*sqrt(lambda) {} -> {}",
            r.lambda,
            fmt_float(r.w2_closed),
            fmt_float(r.c_sqrt_lambda),
            if r.pass { "pass" } else { "FAIL" }
        );
    }
    if let Some(e) = &report.empirical {
        println!(
            "empirical at lambda {}: {} (closed {}, |error| {})",
            e.lambda,
            fmt_float(e.w2_empirical),
            fmt_float(e.w2_closed),
            fmt_float(e.abs_error)
        );
    }

    manifest.complete(started);
    manifest.write(&mpath)?;
    Ok(())
}

/// Stream echo inside a saved mixing profile, enough to rebuild the
/// spec exactly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StreamEcho {
    pub coeffs: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay: Option<DecayCertificate>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileReport {
    pub stream: StreamEcho,
    /// Independent scalar copies per data vector.
    pub data_dim: usize,
    pub profile: MixingProfile,
}

impl ProfileReport {
    pub fn rebuild_spec(&self) -> Result<LinearProcessSpec> {
        match self.stream.decay {
            Some(cert) => LinearProcessSpec::with_decay(self.stream.coeffs.clone(), cert),
            None => LinearProcessSpec::new(self.stream.coeffs.clone()),
        }
    }
}

/// `mixing`: tabulated mixing coefficients of the configured stream
/// with a certified tail remainder.
pub fn cmd_mixing(config_path: &Path, out: &Path, tau_max: usize, r: f64, s: f64) -> Result<()> {
    let started = Instant::now();
    let config = ExperimentConfig::load(config_path)?;
    config.check_kind("mixing")?;
    let spec = config.require_stream()?;
    let data_dim = match &config.oracle {
        Some(block) => match block.build()?.quad {
            Some(q) => q.data_dim(),
            None => 1,
        },
        None => 1,
    };

    let mut manifest = RunManifest::begin("mixing", config.seed, config.echo());
    manifest.stream_coeffs = Some(spec.coeffs().to_vec());
    manifest.derived = Some(serde_json::json!({ "tau_max": tau_max, "r": r, "s": s }));
    manifest.outputs = vec![out.display().to_string()];
    let mpath = manifest_path(out);
    manifest.write(&mpath)?;

    let profile = profile_build(&spec, r, s, tau_max)?;
    let report = ProfileReport {
        stream: StreamEcho {
            coeffs: spec.coeffs().to_vec(),
            // The all-zero tail of an explicit list needs no certificate,
            // and an infinite decay exponent would not survive JSON.
            decay: spec.decay().filter(|c| c.beta.is_finite()),
        },
        data_dim,
        profile,
    };
    write_json(out, &report)?;
    println!(
        "mixing: gamma tabulated to tau_max {} (partial sum {}, tail {})",
        tau_max,
        fmt_float(report.profile.gamma_sum),
        report
            .profile
            .mixing_sum_upper
            .map(|u| fmt_float(u - report.profile.gamma_sum))
            .unwrap_or_else(|| "unbounded".to_string())
    );

    manifest.complete(started);
    manifest.write(&mpath)?;
    Ok(())
}

/// Inputs of the `constants` command, all flag-driven.
#[derive(Debug, Clone)]
pub struct ConstantsArgs {
    pub a: f64,
    pub l1: f64,
    pub l2: f64,
    pub d: usize,
    pub p: u32,
    pub h_star: f64,
    pub theta_star_norm: f64,
    /// Deterministic initial distance ‖θ₀ − θ*‖.
    pub init_dist: f64,
    pub kappa: f64,
    pub epsilon: f64,
    pub rho: u32,
    pub data_dim: usize,
    pub data_sd: f64,
    /// Saved output of `mixing`; replaces the default scaled
    /// independent stream in the chain's data moments.
    pub mixing: Option<PathBuf>,
}

/// Full constants report: the chain at the requested order plus both
/// planners, with every headline value surfaced under its short name.
#[derive(Debug, Clone, Serialize)]
pub struct ConstantsReport {
    #[serde(rename = "Cprime")]
    pub cprime_big: GrowthPair,
    #[serde(rename = "cprime")]
    pub cprime_small: f64,
    #[serde(rename = "Cdprime")]
    pub cdprime_big: GrowthPair,
    #[serde(rename = "cdprime")]
    pub cdprime_small: f64,
    #[serde(rename = "Cunder")]
    pub cunder: f64,
    #[serde(rename = "Cflat_stmt")]
    pub cflat_stmt: f64,
    #[serde(rename = "Cflat_proof")]
    pub cflat_proof: f64,
    #[serde(rename = "Cstar")]
    pub cstar: f64,
    #[serde(rename = "C0")]
    pub c0_rate: f64,
    #[serde(rename = "C0_proof")]
    pub c0_rate_proof: f64,
    pub c_hat: f64,
    /// Bias constant c(λ) at the dependent planner's λ.
    pub c: f64,
    pub c1_kappa: f64,
    pub c2_kappa: f64,
    pub lambda0: f64,
    #[serde(rename = "iid_C")]
    pub iid_big_c: f64,
    #[serde(rename = "c0")]
    pub c0_iid: f64,
    pub cbar: f64,
    #[serde(rename = "Cbar")]
    pub cbar_max: f64,
    pub c1: f64,
    pub c2: f64,
    pub chain: ConstantChain,
    pub dependent_plan: DependentPlan,
    pub iid_plan: IidPlan,
}

pub fn build_constants_report(args: &ConstantsArgs) -> Result<ConstantsReport> {
    let base = ConvexityConstants::new(args.a, args.l1, args.l2, args.d, args.h_star)?;
    let data = match &args.mixing {
        Some(path) => {
            let saved: ProfileReport = read_json(path)?;
            DataMoments::linear(saved.rebuild_spec()?, saved.data_dim)?
        }
        None => {
            DataMoments::linear(LinearProcessSpec::new(vec![args.data_sd])?, args.data_dim)?
        }
    };
    let initial = InitialMoments::Point { distance: args.init_dist };
    let inputs = ChainInputs::new(base, args.theta_star_norm, initial, data)?;
    let chain = crate::constants::compute_chain(args.p, &inputs)?;
    let dependent = plan_dependent(args.epsilon, args.kappa, &inputs)?;
    let iid_inputs = IidPlanInputs::gaussian_data(
        args.a,
        args.l1,
        args.l2,
        args.d,
        args.h_star,
        args.theta_star_norm,
        args.rho,
        args.data_dim,
        args.data_sd,
        args.init_dist * args.init_dist,
    )?;
    let iid = plan_iid(args.epsilon.min(0.5), &iid_inputs)?;
    Ok(ConstantsReport {
        cprime_big: chain.cprime_p,
        cprime_small: chain.cprime_p.small,
        cdprime_big: chain.cdprime_p,
        cdprime_small: chain.cdprime_p.small,
        cunder: chain.cunder_q,
        cflat_stmt: chain.cflat_stmt,
        cflat_proof: chain.cflat_proof,
        cstar: chain.cstar,
        c0_rate: chain.c0,
        c0_rate_proof: chain.c0_proof,
        c_hat: dependent.c_hat,
        c: dependent.c_at_lambda,
        c1_kappa: dependent.c1_kappa,
        c2_kappa: dependent.c2_kappa,
        lambda0: iid.lambda0,
        iid_big_c: iid.big_c,
        c0_iid: iid.c0,
        cbar: iid.cbar,
        cbar_max: iid.cbar_max,
        c1: iid.c1,
        c2: iid.c2,
        chain,
        dependent_plan: dependent,
        iid_plan: iid,
    })
}

/// `constants`: every named constant for the given convexity summary,
/// to a JSON report.
pub fn cmd_constants(args: &ConstantsArgs, out: &Path) -> Result<()> {
    let report = build_constants_report(args)?;
    write_json(out, &report)?;
    println!(
        "constants: order {} chain (C0 {}), dependent plan lambda {}, iid plan lambda {}",
        report.chain.p,
        fmt_float(report.c0_rate),
        fmt_float(report.dependent_plan.lambda),
        fmt_float(report.iid_plan.lambda)
    );
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct W2Report {
    pub method: String,
    pub dim: usize,
    pub count_a: usize,
    pub count_b: usize,
    pub w2: f64,
}

/// `w2`: distance between two sample files. Method defaults to the
/// exact quantile form in one dimension and the assignment solver
/// otherwise.
pub fn cmd_w2(a: &Path, b: &Path, method: Option<&str>, out: Option<&Path>) -> Result<W2Report> {
    let mu = read_samples_csv(a)?;
    let nu = read_samples_csv(b)?;
    if mu[0].len() != nu[0].len() {
        return Err(invalid(format!(
            "sample files have different dimensions: {} vs {}",
            mu[0].len(),
            nu[0].len()
        )));
    }
    let dim = mu[0].len();
    let method = match method {
        Some(m) => m.to_string(),
        None => if dim == 1 { "1d" } else { "assign" }.to_string(),
    };
    let w2 = match method.as_str() {
        "1d" => {
            if dim != 1 {
                return Err(invalid(format!(
                    "method 1d needs one column per row, files carry {dim}"
                )));
            }
            let xs: Vec<f64> = mu.iter().map(|r| r[0]).collect();
            let ys: Vec<f64> = nu.iter().map(|r| r[0]).collect();
            w2_empirical_1d(&xs, &ys)?
        }
        "assign" => w2_assignment(&mu, &nu)?,
        other => return Err(invalid(format!("unknown method \"{other}\" (1d|assign)"))),
    };
    let report = W2Report { method, dim, count_a: mu.len(), count_b: nu.len(), w2 };
    println!(
        "w2 = {} ({}, {} vs {} points in dimension {})",
        fmt_float(report.w2),
        report.method,
        report.count_a,
        report.count_b,
        report.dim
    );
    if let Some(path) = out {
        write_json(path, &report)?;
    }
    Ok(report)
}

/// Inputs of the `plan` command.
#[derive(Debug, Clone)]
pub struct PlanArgs {
    pub epsilon: f64,
    /// Dependent-data planner with this rate exponent.
    pub kappa: Option<f64>,
    /// Independent-data planner.
    pub iid: bool,
    pub constants: ConstantsArgs,
    pub execute: bool,
    pub replicas: usize,
    /// Optional config naming the system to execute on (quadratic d=1
    /// plus a stream); default is the scalar unit system with
    /// independent standard-normal data.
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PlanReport {
    pub epsilon: f64,
    pub mode: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dependent: Option<DependentPlan>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iid: Option<IidPlan>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub execution: Option<PlanExecution>,
}

/// `plan`: (λ, n) for an accuracy target, optionally executed. Returns
/// false when an execution ran and missed the target.
pub fn cmd_plan(args: &PlanArgs, out: &Path) -> Result<bool> {
    let started = Instant::now();
    if args.iid == args.kappa.is_some() {
        return Err(invalid("pick exactly one planner: --kappa <rate> or --iid"));
    }
    let c = &args.constants;
    let exec_config = match &args.config {
        Some(path) => Some(ExperimentConfig::load(path)?),
        None => None,
    };
    let seed = exec_config.as_ref().map(|cfg| cfg.seed).unwrap_or(42);
    let mut manifest = RunManifest::begin(
        "plan",
        seed,
        serde_json::json!({
            "epsilon": args.epsilon,
            "kappa": args.kappa,
            "iid": args.iid,
            "a": c.a, "l1": c.l1, "l2": c.l2, "d": c.d,
        }),
    );
    manifest.outputs = vec![out.display().to_string()];
    let mpath = manifest_path(out);
    manifest.write(&mpath)?;

    let report = if let Some(kappa) = args.kappa {
        let base = ConvexityConstants::new(c.a, c.l1, c.l2, c.d, c.h_star)?;
        let data = match &c.mixing {
            Some(path) => {
                let saved: ProfileReport = read_json(path)?;
                DataMoments::linear(saved.rebuild_spec()?, saved.data_dim)?
            }
            None => DataMoments::linear(LinearProcessSpec::new(vec![c.data_sd])?, c.data_dim)?,
        };
        let initial = InitialMoments::Point { distance: c.init_dist };
        let inputs = ChainInputs::new(base, c.theta_star_norm, initial, data)?;
        let plan = plan_dependent(args.epsilon, kappa, &inputs)?;
        PlanReport {
            epsilon: args.epsilon,
            mode: "dependent".to_string(),
            dependent: Some(plan),
            iid: None,
            execution: None,
        }
    } else {
        let inputs = IidPlanInputs::gaussian_data(
            c.a,
            c.l1,
            c.l2,
            c.d,
            c.h_star,
            c.theta_star_norm,
            c.rho,
            c.data_dim,
            c.data_sd,
            c.init_dist * c.init_dist,
        )?;
        let plan = plan_iid(args.epsilon, &inputs)?;
        PlanReport {
            epsilon: args.epsilon,
            mode: "iid".to_string(),
            dependent: None,
            iid: Some(plan),
            execution: None,
        }
    };

    let (lambda, n_min) = match (&report.dependent, &report.iid) {
        (Some(p), None) => (p.lambda, p.n_min),
        (None, Some(p)) => (p.lambda, p.n_min),
        _ => unreachable!("exactly one planner ran"),
    };
    println!(
        "plan ({}): lambda {} and horizon {}",
        report.mode,
        fmt_float(lambda),
        n_min.map(|n| n.to_string()).unwrap_or_else(|| "beyond u64".to_string())
    );

    let mut ok = true;
    let mut report = report;
    if args.execute {
        let n = n_min.ok_or_else(|| {
            invalid("planned horizon does not fit u64; execution impossible")
        })?;
        let exec = match &exec_config {
            Some(config) => {
                let built = config.require_oracle()?;
                let spec = config.require_stream()?;
                execute_plan(
                    built.sampler()?,
                    &spec,
                    args.epsilon,
                    lambda,
                    n,
                    args.replicas,
                    seed,
                )?
            }
            None => execute_plan(
                &QuadraticOracle::unit(),
                &LinearProcessSpec::iid_gaussian(),
                args.epsilon,
                lambda,
                n,
                args.replicas,
                seed,
            )?,
        };
        ok = exec.pass;
        println!(
            "executed: empirical W2 {} vs target {} -> {}",
            fmt_float(exec.w2_empirical),
            fmt_float(args.epsilon),
            if exec.pass { "pass" } else { "FAIL" }
        );
        report.execution = Some(exec);
    }
    write_json(out, &report)?;

    manifest.complete(started);
    manifest.write(&mpath)?;
    Ok(ok)
}

/// `verify`: the numbered check suite. Returns the all-pass flag; the
/// verdict JSON itself stays timestamp-free so reruns are
/// byte-identical, while the manifest carries the wall clock.
pub fn cmd_verify(level: Level, seed: u64, out: &Path) -> Result<bool> {
    let started = Instant::now();
    let mut manifest = RunManifest::begin(
        "verify",
        seed,
        serde_json::json!({ "level": level.label(), "seed": seed }),
    );
    manifest.outputs = vec![out.display().to_string()];
    let mpath = manifest_path(out);
    manifest.write(&mpath)?;

    let verdict = run_verify(level, seed);
    fs::write(out, verdict.to_json())
        .map_err(|e| invalid(format!("cannot write {}: {e}", out.display())))?;
    for check in &verdict.checks {
        println!(
            "{} check {:02} {} (margin {:.3e})",
            if check.pass { "pass" } else { "FAIL" },
            check.id,
            check.name,
            check.margin
        );
    }
    println!(
        "verify ({}): {}",
        verdict.level,
        if verdict.all_pass { "all checks pass" } else { "FAILURES present" }
    );

    manifest.derived = Some(serde_json::json!({
        "all_pass": verdict.all_pass,
        "checks_failed": verdict.checks.iter().filter(|c| !c.pass).count(),
    }));
    manifest.complete(started);
    manifest.write(&mpath)?;
    Ok(verdict.all_pass)
}

/// `report.json` -> `report.csv` alongside it.
fn sibling_with_extension(path: &Path, ext: &str) -> PathBuf {
    let mut p = path.to_path_buf();
    p.set_extension(ext);
    if p == path {
        // The input already had that extension; disambiguate.
        let mut name = path.as_os_str().to_os_string();
        name.push(".");
        name.push(ext);
        return PathBuf::from(name);
    }
    p
}

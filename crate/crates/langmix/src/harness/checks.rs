//! The verification suite: twelve numbered checks covering exact
//! analytic reproduction, inequality audits with Monte Carlo slack,
//! planner identities, and determinism. `run_verify` produces a
//! timestamp-free verdict whose JSON serialization is byte-identical
//! across reruns with the same seed.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::constants::{
    plan_dependent, plan_iid, ChainInputs, ConvexityConstants, DataMoments, IidPlanInputs,
    InitialMoments,
};
use crate::error::{invalid, Result};
use crate::metrics::{gaussian_norm_moment, multinomial_inequality_check};
use crate::mixing::{gamma_linear_analytic, gamma_mc_estimate, maximal_inequality_check};
use crate::model::QuadraticOracle;
use crate::rng::{self, tag, RNG_ALGO_ID};
use crate::samplers::{run_coupled, run_coupled_inits, InitialLaw, SamplerConfig};
use crate::streams::{coupled_variance_exact, LinearProcessSpec};

use super::runs::{
    bias_closed_points, execute_plan, moment_suite, rate_sweep, ula_bias_empirical,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Quick,
    Full,
}

impl Level {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "quick" => Ok(Level::Quick),
            "full" => Ok(Level::Full),
            other => Err(invalid(format!("unknown verify level \"{other}\" (quick|full)"))),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Level::Quick => "quick",
            Level::Full => "full",
        }
    }

    /// Picks the replica budget for this level.
    fn size(&self, quick: usize, full: usize) -> usize {
        match self {
            Level::Quick => quick,
            Level::Full => full,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub id: u32,
    pub name: String,
    pub pass: bool,
    /// Smallest relative slack observed across the check's assertions;
    /// negative when something failed.
    pub margin: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub rng_algo_id: String,
    pub library_version: String,
    pub level: String,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
    pub all_pass: bool,
}

impl Verdict {
    /// Canonical serialization; byte-identical for identical inputs.
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("verdict serializes");
        text.push('\n');
        text
    }
}

/// Accumulates sub-assertions into one pass/margin/detail triple.
struct Acc {
    pass: bool,
    margin: f64,
    notes: Vec<String>,
}

impl Acc {
    fn new() -> Self {
        Self { pass: true, margin: f64::INFINITY, notes: Vec::new() }
    }

    /// Records an assertion with a relative slack; slack < 0 is a failure.
    fn slack(&mut self, what: &str, slack: f64) {
        let slack = if slack.is_nan() { -1.0 } else { slack };
        if slack < self.margin {
            self.margin = slack;
        }
        if slack < 0.0 {
            self.pass = false;
            self.notes.push(format!("FAIL {what} (slack {slack:.3e})"));
        }
    }

    /// value must lie within three standard errors of target.
    fn within_3se(&mut self, what: &str, value: f64, target: f64, se: f64) {
        let diff = (value - target).abs();
        if se > 0.0 {
            let allowed = 3.0 * se;
            self.slack(
                &format!("{what}: |{value:.6e} - {target:.6e}| vs 3se {allowed:.3e}"),
                (allowed - diff) / allowed,
            );
        } else {
            // Exact path: no Monte Carlo error to hide behind.
            let scale = target.abs().max(1e-30);
            self.slack(
                &format!("{what}: exact |{value:.6e} - {target:.6e}|"),
                (1e-9 - diff / scale) / 1e-9,
            );
        }
    }

    /// value must not exceed bound.
    fn le(&mut self, what: &str, value: f64, bound: f64) {
        let scale = bound.abs().max(1e-300);
        self.slack(&format!("{what}: {value:.6e} <= {bound:.6e}"), (bound - value) / scale);
    }

    fn flag(&mut self, what: &str, ok: bool) {
        self.slack(what, if ok { 1.0 } else { -1.0 });
    }

    fn finish(self, id: u32, name: &str, summary: String) -> CheckResult {
        let margin = if self.margin == f64::INFINITY { 1.0 } else { self.margin };
        let detail = if self.notes.is_empty() {
            summary
        } else {
            format!("{summary}; {}", self.notes.join("; "))
        };
        CheckResult { id, name: name.to_string(), pass: self.pass, margin, detail }
    }
}

fn unit_system() -> (QuadraticOracle, LinearProcessSpec) {
    (QuadraticOracle::unit(), LinearProcessSpec::iid_gaussian())
}

/// Exact coupled variance of the scalar unit system with independent
/// standard-normal data: λ(1−(1−λ)^{2n})/(2−λ).
fn unit_variance(lambda: f64, n: u64) -> f64 {
    lambda * (1.0 - (1.0 - lambda).powf(2.0 * n as f64)) / (2.0 - lambda)
}

// ---------------------------------------------------------------------------

/// Check 1: the coupled chains reproduce the exact variance curve of
/// the scalar unit system at three step sizes.
pub fn check_01_exact_variance(level: Level, seed: u64) -> Result<CheckResult> {
    let (oracle, spec) = unit_system();
    let replicas = level.size(3000, 20_000);
    let n = 200u64;
    let mut acc = Acc::new();

    // The large-n limit at λ = 1/2 is exactly 1/3.
    acc.within_3se("limit value at lambda 1/2", unit_variance(0.5, n), 1.0 / 3.0, 0.0);

    let mut lines = Vec::new();
    for &lambda in &[0.5, 0.1, 0.02] {
        let config = SamplerConfig::new(lambda, n, replicas, seed, InitialLaw::at(vec![0.0]))
            .with_record_every(n);
        let run = run_coupled(&oracle, &spec, &config)?;
        let last = run.steps.len() - 1;
        let exact = unit_variance(lambda, n);
        acc.within_3se(
            &format!("coupled variance at lambda {lambda}"),
            run.mean_sq[last],
            exact,
            run.se[last],
        );
        lines.push(format!(
            "lambda {lambda}: mc {:.5e} exact {:.5e} se {:.1e}",
            run.mean_sq[last], exact, run.se[last]
        ));
    }
    Ok(acc.finish(
        1,
        "example-system-exact-variance",
        format!("{replicas} replicas, n={n}; {}", lines.join("; ")),
    ))
}

/// Check 2: for the power-decay stream the simulated coupled variance
/// matches the spectral-integral value, which in turn lands inside the
/// [m², M²] band around the independent-data closed form.
pub fn check_02_spectral_oracle(level: Level, seed: u64) -> Result<CheckResult> {
    let oracle = QuadraticOracle::unit();
    let spec = LinearProcessSpec::power_decay(1.0, 2.0)?;
    let replicas = level.size(1500, 20_000);
    let (lambda, n) = (0.1, 100u64);
    let mut acc = Acc::new();

    let exact = coupled_variance_exact(&spec, lambda, n as usize)?;
    let config = SamplerConfig::new(lambda, n, replicas, seed, InitialLaw::at(vec![0.0]))
        .with_record_every(n);
    let run = run_coupled(&oracle, &spec, &config)?;
    let last = run.steps.len() - 1;
    acc.within_3se("mc vs spectral integral", run.mean_sq[last], exact, run.se[last]);

    let bounds = spec.spectral_bounds(8192)?;
    let g = unit_variance(lambda, n);
    acc.le("lower spectral band", bounds.lower * bounds.lower * g, exact);
    acc.le("upper spectral band", exact, bounds.upper * bounds.upper * g);

    Ok(acc.finish(
        2,
        "spectral-integral-oracle",
        format!(
            "K={} coefficients; mc {:.5e}, exact {:.5e}, band [{:.5e}, {:.5e}]",
            spec.coeffs().len(),
            run.mean_sq[last],
            exact,
            bounds.lower * bounds.lower * g,
            bounds.upper * bounds.upper * g
        ),
    ))
}

/// Check 3: the log-log rate of the stationary coupled distance.
pub fn check_03_rate_recovery(level: Level, seed: u64) -> Result<CheckResult> {
    let (oracle, spec) = unit_system();
    let (replicas, lambdas): (usize, Vec<f64>) = match level {
        Level::Quick => (600, (4..=7).map(|k| 0.5f64.powi(k)).collect()),
        Level::Full => (2000, (4..=9).map(|k| 0.5f64.powi(k)).collect()),
    };
    let report = rate_sweep(&oracle, &spec, &lambdas, replicas, seed, None)?;
    let mut acc = Acc::new();
    acc.flag("sweep not degenerate", !report.degenerate);
    let slope = report.fitted_slope.unwrap_or(f64::NAN);
    let (lo, hi) = (report.ci_low.unwrap_or(f64::NAN), report.ci_high.unwrap_or(f64::NAN));
    acc.slack("slope above 0.45", (slope - 0.45) / 0.05);
    acc.slack("slope below 0.55", (0.55 - slope) / 0.05);
    acc.flag("95% bootstrap interval covers 1/2", lo <= 0.5 && 0.5 <= hi);
    for p in &report.points {
        acc.flag(&format!("plateau at lambda {}", p.lambda), p.plateau);
    }
    Ok(acc.finish(
        3,
        "rate-recovery",
        format!("slope {slope:.4} with interval [{lo:.4}, {hi:.4}], {replicas} replicas"),
    ))
}

/// Check 4: the order-4 coupling envelope C₀(4)·λ^{1/4} dominates the
/// observed sup distance at every tested step size, with room to spare.
pub fn check_04_envelope(level: Level, seed: u64) -> Result<CheckResult> {
    let oracle = QuadraticOracle::unit();
    let spec = LinearProcessSpec::new(vec![1.0, 0.5])?;
    let replicas = level.size(800, 2000);
    let lambdas = [0.25, 0.0625, 0.015625];

    let base = ConvexityConstants::new(1.0, 1.0, 1.0, 1, 0.0)?;
    let inputs = ChainInputs::new(
        base,
        0.0,
        InitialMoments::at_star(),
        DataMoments::linear(spec.clone(), 1)?,
    )?;
    let chain = crate::constants::compute_chain(4, &inputs)?;
    let c0 = chain.c0;

    let report = rate_sweep(&oracle, &spec, &lambdas, replicas, seed, None)?;
    let mut acc = Acc::new();
    let mut lines = vec![format!("C0(4) = {c0:.4e}")];
    for p in &report.points {
        let envelope = c0 * p.lambda.powf(0.25);
        acc.le(
            &format!("sup distance at lambda {}", p.lambda),
            p.sup_distance,
            envelope,
        );
        // The bound is advertised as loose: demand a factor of ten.
        acc.le(
            &format!("tenfold margin at lambda {}", p.lambda),
            10.0 * p.sup_distance,
            envelope,
        );
        lines.push(format!(
            "lambda {}: sup {:.4e} vs envelope {:.4e}",
            p.lambda, p.sup_distance, envelope
        ));
    }
    Ok(acc.finish(4, "coupling-envelope-order-4", lines.join("; ")))
}

/// Check 5: stationary bias of the exact-drift chain. Closed form at
/// d ∈ {1, 5}, the √λ bound, and a long-run empirical audit at d = 1.
pub fn check_05_ula_bias(level: Level, seed: u64) -> Result<CheckResult> {
    let mut acc = Acc::new();
    let lambdas = [0.01, 0.1, 0.3];
    for d in [1usize, 5] {
        let oracle = QuadraticOracle::diagonal(&vec![1.0; d])?;
        let points = bias_closed_points(&oracle, &lambdas)?;
        for pt in &points {
            // Identity-curvature closed form: √d(√(2/(2−λ)) − 1).
            let formula = (d as f64).sqrt() * ((2.0 / (2.0 - pt.lambda)).sqrt() - 1.0);
            acc.within_3se(
                &format!("closed form vs fixed-point algebra (d={d}, lambda {})", pt.lambda),
                pt.w2_closed,
                formula,
                0.0,
            );
            acc.le(
                &format!("sqrt-lambda bound (d={d}, lambda {})", pt.lambda),
                pt.w2_closed,
                pt.c_sqrt_lambda,
            );
        }
    }

    let steps = match level {
        Level::Quick => 200_000,
        Level::Full => 1_000_000,
    };
    let oracle = QuadraticOracle::unit();
    let emp = ula_bias_empirical(&oracle, 0.1, steps, seed)?;
    acc.le("empirical quantile distance within 0.02", emp.abs_error, 0.02);

    Ok(acc.finish(
        5,
        "stationary-bias",
        format!(
            "closed checks at d in {{1,5}}; empirical {:.5e} vs closed {:.5e} over {steps} steps",
            emp.w2_empirical, emp.w2_closed
        ),
    ))
}

/// Check 6: shared-noise contraction between chains started from
/// N(0,1) and N(5,1) stays under the e^{−2ãλn} envelope.
pub fn check_06_contraction(level: Level, seed: u64) -> Result<CheckResult> {
    let oracle = QuadraticOracle::unit();
    let replicas = level.size(2000, 10_000);
    let lambda = 0.25;
    let steps = 40u64;
    let first = InitialLaw::Gaussian { mean: vec![0.0], sd: 1.0 };
    let second = InitialLaw::Gaussian { mean: vec![5.0], sd: 1.0 };
    let config = SamplerConfig::new(lambda, steps, replicas, seed, first.clone());
    let run = run_coupled_inits(&oracle, &first, &second, &config)?;

    let a_tilde = 0.5;
    let mut acc = Acc::new();
    acc.within_3se("analytic initial distance", run.initial_mean_sq, 27.0, 0.0);
    for (i, &n) in run.steps.iter().enumerate() {
        let envelope = run.initial_mean_sq * (-2.0 * a_tilde * lambda * n as f64).exp();
        acc.le(
            &format!("contraction envelope at n={n}"),
            run.mean_sq[i],
            envelope + 3.0 * run.se[i],
        );
    }
    Ok(acc.finish(
        6,
        "contraction-envelope",
        format!(
            "{replicas} replicas, lambda {lambda}; final mean square {:.3e}",
            run.mean_sq.last().unwrap()
        ),
    ))
}

/// Check 7: the drift-inequality suites on the quadratic test family.
pub fn check_07_moment_drift(level: Level, seed: u64) -> Result<CheckResult> {
    let replicas = level.size(1500, 6000);
    let mut acc = Acc::new();

    let (unit, iid) = unit_system();
    let suite_a = moment_suite(&unit, &iid, 0.25, 40, replicas, seed, InitialLaw::at(vec![1.5]))?;

    let s = nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&[1.0, 3.0]));
    let anisotropic =
        QuadraticOracle::new(s, vec![0.5, -1.0], nalgebra::DMatrix::identity(2, 2))?;
    let two_tap = LinearProcessSpec::new(vec![1.0, 0.5])?;
    let suite_b = moment_suite(
        &anisotropic,
        &two_tap,
        0.1,
        40,
        replicas,
        seed,
        InitialLaw::at(vec![1.5, 0.0]),
    )?;

    let mut count = 0;
    for (label, suite) in [("unit/iid", &suite_a), ("anisotropic/two-tap", &suite_b)] {
        for check in &suite.checks {
            if check.skipped {
                continue;
            }
            count += 1;
            acc.slack(&format!("{label} {} ({})", check.name, check.detail), check.margin);
        }
    }
    // The independent-data branch must actually run in suite A.
    acc.flag(
        "independent-data branch exercised",
        suite_a.checks.iter().any(|c| c.name.starts_with("iid") && !c.skipped),
    );
    Ok(acc.finish(
        7,
        "moment-drift-suites",
        format!("{count} drift inequalities over two systems, {replicas} replicas"),
    ))
}

/// Check 8: closed-form norm moments stay under their envelope for all
/// d ≤ 10, r ≤ 6, and the multinomial moment inequality survives 10³
/// random draws (no Monte Carlo error: both sides are exact).
pub fn check_08_norm_moments(_level: Level, seed: u64) -> Result<CheckResult> {
    let mut acc = Acc::new();
    for d in 1..=10usize {
        for r in 1..=6u32 {
            let (exact, bound) = gaussian_norm_moment(d, r);
            acc.le(&format!("norm moment d={d} r={r}"), exact, bound);
        }
    }

    let mut g = rng::rng(seed, &[tag::PROBE]);
    for trial in 0..1000 {
        let dim = g.gen_range(1..=4usize);
        let p = g.gen_range(1..=4u32);
        let x: Vec<f64> = (0..dim).map(|_| g.gen_range(-2.0..2.0)).collect();
        let y: Vec<f64> = (0..dim).map(|_| g.gen_range(-2.0..2.0)).collect();
        let (lhs, rhs, pass) = multinomial_inequality_check(&x, &y, p)?;
        if !pass {
            acc.flag(
                &format!("multinomial trial {trial}: lhs {lhs:.6e} rhs {rhs:.6e}"),
                false,
            );
        }
    }
    acc.flag("all multinomial draws pass", true);
    Ok(acc.finish(8, "norm-moment-inequalities", "exhaustive d<=10, r<=6; 1000 draws".into()))
}

/// Check 9: the weighted running-maximum moment bound, on independent
/// streams with random weights and on a dependent two-tap stream.
pub fn check_09_maximal_inequality(level: Level, seed: u64) -> Result<CheckResult> {
    let replicas = level.size(2000, 10_000);
    let mut acc = Acc::new();
    let iid = LinearProcessSpec::iid_gaussian();
    for r in [3u32, 4] {
        for m in [16usize, 64] {
            let mut wg = rng::rng(seed, &[tag::WEIGHTS, r as u64, m as u64]);
            let weights: Vec<f64> = (0..m).map(|_| wg.sample::<f64, _>(StandardNormal)).collect();
            let report = maximal_inequality_check(&iid, r, &weights, replicas, seed)?;
            acc.slack(
                &format!("iid r={r} m={m}: lhs {:.4e} rhs {:.4e}", report.lhs, report.rhs),
                (report.rhs - report.lhs) / report.rhs,
            );
        }
    }
    let two_tap = LinearProcessSpec::new(vec![1.0, 0.5])?;
    let weights = vec![0.5; 32];
    let report = maximal_inequality_check(&two_tap, 4, &weights, replicas, seed)?;
    acc.slack(
        &format!("two-tap r=4: lhs {:.4e} rhs {:.4e}", report.lhs, report.rhs),
        (report.rhs - report.lhs) / report.rhs,
    );
    Ok(acc.finish(
        9,
        "running-maximum-bound",
        format!("{replicas} replicas per configuration"),
    ))
}

/// Check 10: Monte Carlo mixing coefficients against the analytic ones,
/// and exact vanishing for independent streams.
pub fn check_10_mixing_oracle(level: Level, seed: u64) -> Result<CheckResult> {
    let replicas = level.size(5000, 40_000);
    let spec = LinearProcessSpec::new(vec![1.0, 0.5, 0.25])?;
    let mut acc = Acc::new();
    for r in [2u32, 4] {
        for tau in 0..=8usize {
            let analytic = gamma_linear_analytic(&spec, tau, r)?;
            let mc = gamma_mc_estimate(&spec, tau, r as f64, replicas, seed)?;
            acc.within_3se(
                &format!("gamma r={r} tau={tau}"),
                mc.estimate,
                analytic,
                mc.std_error,
            );
        }
    }
    let iid = LinearProcessSpec::iid_gaussian();
    for tau in 1..=3usize {
        let mc = gamma_mc_estimate(&iid, tau, 2.0, replicas, seed)?;
        acc.flag(
            &format!("independent stream gamma(tau={tau}) identically zero"),
            mc.estimate == 0.0 && gamma_linear_analytic(&iid, tau, 2)? == 0.0,
        );
    }
    Ok(acc.finish(10, "mixing-oracle", format!("{replicas} replicas per coefficient")))
}

/// Check 11: planner identities on an ε grid, then executed plans on
/// the scalar unit system reaching the target accuracy.
pub fn check_11_planners(level: Level, seed: u64) -> Result<CheckResult> {
    let mut acc = Acc::new();

    // Dependent-data planner identities.
    let base = ConvexityConstants::new(1.0, 1.0, 1.0, 1, 0.0)?;
    let inputs = ChainInputs::new(
        base,
        0.0,
        InitialMoments::at_star(),
        DataMoments::linear(LinearProcessSpec::iid_gaussian(), 1)?,
    )?;
    let e_inv = (-1.0f64).exp();
    for &epsilon in &[e_inv, 0.3, 0.2, 0.1, 0.05] {
        for &kappa in &[0.5, 1.0, 2.0] {
            let plan = plan_dependent(epsilon, kappa, &inputs)?;
            let c = plan.c_tilde;
            acc.flag(
                &format!("order rule (p-1)kappa > 2 at eps {epsilon} kappa {kappa}"),
                (plan.p as f64 - 1.0) * kappa > 2.0,
            );
            acc.within_3se(
                &format!("step-size formula at eps {epsilon} kappa {kappa}"),
                plan.lambda_formula,
                (epsilon / (4.0 * c)).powf(2.0 + kappa),
                0.0,
            );
            acc.le(
                &format!("bias identity at eps {epsilon} kappa {kappa}"),
                2.0 * c * plan.lambda.powf(1.0 / (2.0 + kappa)),
                epsilon / 2.0 * (1.0 + 1e-12),
            );
            acc.le(
                &format!("contraction identity at eps {epsilon} kappa {kappa}"),
                (2.0 * c / epsilon).ln(),
                plan.n_min_float * plan.lambda * 1.0 * (1.0 + 1e-12),
            );
            acc.flag(
                &format!("budget flags at eps {epsilon} kappa {kappa}"),
                plan.bias_budget_ok && plan.contraction_ok,
            );
        }
    }

    // Independent-data planner identities and execution.
    let iid_inputs =
        IidPlanInputs::gaussian_data(1.0, 1.0, 1.0, 1, 0.0, 0.0, 0, 1, 1.0, 0.0)?;
    let replicas = level.size(800, 2000);
    let (oracle, spec) = unit_system();
    for &epsilon in &[0.3, 0.2] {
        let plan = plan_iid(epsilon, &iid_inputs)?;
        let cbar = plan.cbar_max;
        acc.within_3se(
            &format!("inverse constant at eps {epsilon}"),
            plan.c1 * 4.0 * cbar,
            1.0,
            0.0,
        );
        acc.within_3se(
            &format!("horizon constant at eps {epsilon}"),
            plan.c2 * plan.c1 * 1.0,
            (2.0 * cbar).ln() + 1.0,
            0.0,
        );
        acc.within_3se(
            &format!("step-size formula at eps {epsilon}"),
            plan.lambda_formula,
            plan.c1 * epsilon * epsilon,
            0.0,
        );
        let n = plan.n_min.ok_or_else(|| invalid("planned horizon does not fit u64"))?;
        acc.le(
            &format!("contraction identity at eps {epsilon}"),
            (2.0 * cbar / epsilon).ln(),
            n as f64 * plan.lambda * 1.0 * (1.0 + 1e-12),
        );

        let exec = execute_plan(&oracle, &spec, epsilon, plan.lambda, n, replicas, seed)?;
        acc.le(
            &format!(
                "executed accuracy at eps {epsilon} (lambda {:.3e}, n {n})",
                plan.lambda
            ),
            exec.w2_empirical,
            epsilon,
        );
    }

    Ok(acc.finish(
        11,
        "planners",
        format!("identity grid plus executions with {replicas} replicas"),
    ))
}

/// Check 12: a deterministic replay bundle. The same seed must produce
/// byte-identical serialized results; a different seed must not.
pub fn check_12_determinism(_level: Level, seed: u64) -> Result<CheckResult> {
    fn bundle(seed: u64) -> Result<String> {
        let (oracle, spec) = unit_system();
        let config = SamplerConfig::new(0.25, 20, 128, seed, InitialLaw::at(vec![0.0]))
            .with_moment_orders(vec![1]);
        let coupled = run_coupled(&oracle, &spec, &config)?;
        let two_tap = LinearProcessSpec::new(vec![1.0, 0.5])?;
        let gamma = gamma_mc_estimate(&two_tap, 1, 2.0, 500, seed)?;
        let sweep = rate_sweep(&oracle, &spec, &[0.25, 0.125], 100, seed, Some(40))?;
        Ok(format!(
            "{}\n{}\n{}",
            serde_json::to_string(&coupled)?,
            serde_json::to_string(&gamma)?,
            serde_json::to_string(&sweep)?
        ))
    }

    let first = bundle(seed)?;
    let second = bundle(seed)?;
    let other = bundle(seed.wrapping_add(1))?;
    let mut acc = Acc::new();
    acc.flag("identical seed replays identical bytes", first == second);
    acc.flag("different seed changes the results", first != other);
    Ok(acc.finish(
        12,
        "determinism-replay",
        format!("bundle of {} bytes replayed", first.len()),
    ))
}

// ---------------------------------------------------------------------------

type CheckFn = fn(Level, u64) -> Result<CheckResult>;

/// The numbered suite in order.
pub const CHECKS: [(u32, &str, CheckFn); 12] = [
    (1, "example-system-exact-variance", check_01_exact_variance),
    (2, "spectral-integral-oracle", check_02_spectral_oracle),
    (3, "rate-recovery", check_03_rate_recovery),
    (4, "coupling-envelope-order-4", check_04_envelope),
    (5, "stationary-bias", check_05_ula_bias),
    (6, "contraction-envelope", check_06_contraction),
    (7, "moment-drift-suites", check_07_moment_drift),
    (8, "norm-moment-inequalities", check_08_norm_moments),
    (9, "running-maximum-bound", check_09_maximal_inequality),
    (10, "mixing-oracle", check_10_mixing_oracle),
    (11, "planners", check_11_planners),
    (12, "determinism-replay", check_12_determinism),
];

/// Runs the whole suite. Check-level errors become failing entries
/// rather than aborting the verdict.
pub fn run_verify(level: Level, seed: u64) -> Verdict {
    let mut checks = Vec::with_capacity(CHECKS.len());
    for (id, name, f) in CHECKS {
        let result = match f(level, seed) {
            Ok(r) => r,
            Err(e) => CheckResult {
                id,
                name: name.to_string(),
                pass: false,
                margin: -1.0,
                detail: format!("check aborted: {e}"),
            },
        };
        checks.push(result);
    }
    let all_pass = checks.iter().all(|c| c.pass);
    Verdict {
        rng_algo_id: RNG_ALGO_ID.to_string(),
        library_version: env!("CARGO_PKG_VERSION").to_string(),
        level: level.label().to_string(),
        seed,
        checks,
        all_pass,
    }
}

//! Dependence profiles for the Gaussian linear-process streams.
//!
//! For a stream X_n = Σ_k a_k ε_{n−k} the prediction residual beyond a
//! horizon τ is Σ_{k≥τ} a_k ε_{n−k}, a centered Gaussian whose standard
//! deviation is the coefficient tail root σ(τ) = (Σ_{k≥τ} a_k²)^{1/2}.
//! The order-r mixing coefficient is therefore exactly
//!
//!   γ_r(τ) = (E|Z|^r)^{1/r} · σ(τ),  Z ~ N(0, 1),
//!
//! and everything in this module (profiles, sums, remainder bounds,
//! the maximal-inequality audit) is built from that identity.

use rand::Rng;
use rand_distr::StandardNormal;
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, unsupported, Result};
use crate::rng::{self, tag};
use crate::streams::{GaussianLinearStream, LinearProcessSpec};

/// E|Z|^r for Z ~ N(0,1) and any real order r ≥ 0:
/// 2^(r/2) Γ((r+1)/2) / √π. Equals (r−1)!! at even integers.
pub fn gaussian_abs_moment(r: f64) -> f64 {
    assert!(r >= 0.0, "moment order must be non-negative");
    (0.5 * r * std::f64::consts::LN_2 + ln_gamma((r + 1.0) / 2.0)
        - 0.5 * std::f64::consts::PI.ln())
    .exp()
}

/// (E|Z|^r)^{1/r}, the L^r norm of a standard normal.
pub fn gaussian_abs_moment_root(r: f64) -> f64 {
    assert!(r > 0.0, "moment order must be positive");
    gaussian_abs_moment(r).powf(1.0 / r)
}

/// Order-r mixing coefficient γ_r(τ) of the stream, any real r ≥ 1.
pub fn gamma_root(spec: &LinearProcessSpec, tau: usize, r: f64) -> Result<f64> {
    if !(r >= 1.0) {
        return Err(invalid(format!("mixing order must be at least 1, got {r}")));
    }
    Ok(gaussian_abs_moment_root(r) * spec.tail_variance(tau).sqrt())
}

/// γ_r(τ) under the even-integer-order contract used by the reports.
/// Odd or fractional orders are refused here; [`gamma_root`] serves the
/// general case.
pub fn gamma_linear_analytic(spec: &LinearProcessSpec, tau: usize, r: u32) -> Result<f64> {
    if r < 2 || r % 2 != 0 {
        return Err(unsupported(format!(
            "analytic mixing report is defined for even orders >= 2, got {r}"
        )));
    }
    gamma_root(spec, tau, r as f64)
}

/// Σ_{τ≥0} σ(τ) where σ(τ)² is the coefficient tail variance; the
/// order-independent part of every mixing sum.
pub fn sigma_tail_sum(spec: &LinearProcessSpec) -> f64 {
    let mut tail = 0.0;
    let mut acc = 0.0;
    for a in spec.coeffs().iter().rev() {
        tail += a * a;
        acc += tail.sqrt();
    }
    acc
}

/// Full mixing sum Γ_r = Σ_{τ≥0} γ_r(τ), exact because the stored
/// coefficient list is finite.
pub fn mixing_sum(spec: &LinearProcessSpec, r: f64) -> f64 {
    gaussian_abs_moment_root(r) * sigma_tail_sum(spec)
}

/// r-th absolute moment E|X_n|^r of the stationary stream.
pub fn stream_abs_moment(spec: &LinearProcessSpec, r: f64) -> f64 {
    gaussian_abs_moment(r) * spec.variance().powf(r / 2.0)
}

/// Mixing-sum power Γ_r^s, the dependence constant shaped the way the
/// convergence bounds consume it.
pub fn mixing_sum_power(spec: &LinearProcessSpec, r: f64, s: f64) -> f64 {
    mixing_sum(spec, r).powf(s)
}

/// Upper bound on the profile remainder Σ_{τ>tau_max} γ_r(τ).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", content = "value")]
pub enum RemainderBound {
    /// The remainder is exactly this (zero once tau_max passes the last
    /// stored coefficient).
    Exact(f64),
    /// Integral bound from the decay certificate:
    /// g_r · c/√(2β−1) · tau_max^((3−2β)/2) · 2/(2β−3).
    Certified(f64),
    /// No certificate and coefficients still remain beyond tau_max.
    Unbounded,
}

impl RemainderBound {
    pub fn upper(&self) -> Option<f64> {
        match self {
            RemainderBound::Exact(v) | RemainderBound::Certified(v) => Some(*v),
            RemainderBound::Unbounded => None,
        }
    }
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct MixingProfile {
    pub r: f64,
    pub s: f64,
    pub tau_max: usize,
    /// L^r norm of the stationary stream, (E|X|^r)^{1/r}.
    pub moment_root: f64,
    /// γ_r(0), ..., γ_r(tau_max).
    pub gamma: Vec<f64>,
    /// Partial sum Σ_{τ≤tau_max} γ_r(τ).
    pub gamma_sum: f64,
    pub remainder: RemainderBound,
    /// gamma_sum plus the remainder upper bound, when one exists.
    pub mixing_sum_upper: Option<f64>,
    /// E|X|^r itself.
    pub stream_moment: f64,
    /// (mixing_sum_upper)^s, when bounded.
    pub dependence_power: Option<f64>,
}

/// Tabulates γ_r out to tau_max and certifies what lies beyond.
pub fn profile_build(
    spec: &LinearProcessSpec,
    r: f64,
    s: f64,
    tau_max: usize,
) -> Result<MixingProfile> {
    if !(r >= 1.0) {
        return Err(invalid(format!("mixing order must be at least 1, got {r}")));
    }
    if !(s > 0.0) {
        return Err(invalid(format!("dependence exponent must be positive, got {s}")));
    }
    if tau_max < 1 {
        return Err(invalid("profile horizon tau_max must be at least 1"));
    }
    let g = gaussian_abs_moment_root(r);
    // Suffix sums of a_k² give every σ(τ)² in one pass.
    let coeffs = spec.coeffs();
    let mut sigma2 = vec![0.0; coeffs.len() + 1];
    for (k, a) in coeffs.iter().enumerate().rev() {
        sigma2[k] = sigma2[k + 1] + a * a;
    }
    let gamma: Vec<f64> = (0..=tau_max)
        .map(|t| g * sigma2.get(t).copied().unwrap_or(0.0).sqrt())
        .collect();
    let gamma_sum: f64 = gamma.iter().sum();
    let remainder = if tau_max >= spec.k_max() {
        RemainderBound::Exact(0.0)
    } else if let Some(cert) = spec.decay() {
        let (c, beta) = (cert.c, cert.beta);
        RemainderBound::Certified(
            g * c / (2.0 * beta - 1.0).sqrt()
                * (tau_max as f64).powf((3.0 - 2.0 * beta) / 2.0)
                * 2.0
                / (2.0 * beta - 3.0),
        )
    } else {
        RemainderBound::Unbounded
    };
    let mixing_sum_upper = remainder.upper().map(|u| gamma_sum + u);
    Ok(MixingProfile {
        r,
        s,
        tau_max,
        moment_root: g * sigma2[0].sqrt(),
        gamma,
        gamma_sum,
        remainder,
        mixing_sum_upper,
        stream_moment: gaussian_abs_moment(r) * sigma2[0].powf(r / 2.0),
        dependence_power: mixing_sum_upper.map(|u| u.powf(s)),
    })
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct GammaEstimate {
    pub estimate: f64,
    /// Bootstrap standard error of the estimate (200 resamples).
    pub std_error: f64,
    pub replicas: usize,
}

/// Monte Carlo estimate of γ_r(τ) that simulates the residual
/// definition innovation by innovation rather than reusing the closed
/// form, so it can audit [`gamma_root`].
pub fn gamma_mc_estimate(
    spec: &LinearProcessSpec,
    tau: usize,
    r: f64,
    replicas: usize,
    seed: u64,
) -> Result<GammaEstimate> {
    if !(r >= 1.0) {
        return Err(invalid(format!("mixing order must be at least 1, got {r}")));
    }
    if replicas < 2 {
        return Err(invalid("Monte Carlo estimate needs at least 2 replicas"));
    }
    let coeffs = spec.coeffs();
    if tau >= coeffs.len() {
        // Residual is identically zero past the last coefficient.
        return Ok(GammaEstimate { estimate: 0.0, std_error: 0.0, replicas });
    }
    let tail = &coeffs[tau..];
    let mut draw_rng = rng::rng(seed, &[tag::PROBE, tau as u64]);
    let powers: Vec<f64> = (0..replicas)
        .map(|_| {
            let resid: f64 = tail
                .iter()
                .map(|a| a * draw_rng.sample::<f64, _>(StandardNormal))
                .sum();
            resid.abs().powf(r)
        })
        .collect();
    let mean: f64 = powers.iter().sum::<f64>() / replicas as f64;
    let estimate = mean.powf(1.0 / r);

    const B: usize = 200;
    let mut boot_rng = rng::rng(seed, &[tag::BOOTSTRAP, tau as u64]);
    let mut boots = [0.0f64; B];
    for slot in boots.iter_mut() {
        let mut acc = 0.0;
        for _ in 0..replicas {
            acc += powers[boot_rng.gen_range(0..replicas)];
        }
        *slot = (acc / replicas as f64).powf(1.0 / r);
    }
    let bmean = boots.iter().sum::<f64>() / B as f64;
    let bvar = boots.iter().map(|b| (b - bmean) * (b - bmean)).sum::<f64>() / (B as f64 - 1.0);
    Ok(GammaEstimate { estimate, std_error: bvar.sqrt(), replicas })
}

/// Constant in the moment bound for weighted partial sums of a
/// centered dependent stream: √(r−1).
pub fn partial_sum_constant(r: f64) -> f64 {
    assert!(r >= 2.0, "partial-sum bound needs order >= 2");
    (r - 1.0).sqrt()
}

/// Constant in the bound for the running maximum of those partial
/// sums: √(r−1) / (2^(1/2) − 2^(1/r)). Finite only for r > 2.
pub fn maximal_partial_sum_constant(r: f64) -> f64 {
    assert!(r > 2.0, "maximal bound needs order > 2");
    (r - 1.0).sqrt() / (std::f64::consts::SQRT_2 - 2f64.powf(1.0 / r))
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct MaximalCheckReport {
    pub r: u32,
    pub replicas: usize,
    /// Monte Carlo estimate of E^{1/r} max_k |Σ_{i≤k} b_i X_i|^r.
    pub lhs: f64,
    pub lhs_se: f64,
    /// C′(r) · (Σ b_i²)^{1/2} · (M_r + Γ_r).
    pub rhs: f64,
    pub constant: f64,
    pub moment_root: f64,
    pub mixing_sum: f64,
    pub weight_norm: f64,
    /// lhs ≤ rhs within three standard errors.
    pub pass: bool,
}

/// Audits the running-maximum moment bound on simulated paths: the
/// weighted partial-sum maximum of the centered stream must stay below
/// C′(r)·‖b‖₂·(M_r + Γ_r).
pub fn maximal_inequality_check(
    spec: &LinearProcessSpec,
    r: u32,
    weights: &[f64],
    replicas: usize,
    seed: u64,
) -> Result<MaximalCheckReport> {
    if r < 3 {
        return Err(invalid("running-maximum audit needs order r >= 3"));
    }
    if weights.is_empty() {
        return Err(invalid("weight vector must be non-empty"));
    }
    if replicas < 2 {
        return Err(invalid("running-maximum audit needs at least 2 replicas"));
    }
    let rf = r as f64;
    let powers: Vec<f64> = (0..replicas as u64)
        .map(|rep| {
            let mut stream = GaussianLinearStream::new(spec, seed, &[tag::INNOVATIONS, rep]);
            let mut partial = 0.0f64;
            let mut peak = 0.0f64;
            for &b in weights {
                partial += b * stream.next_value();
                peak = peak.max(partial.abs());
            }
            peak.powi(r as i32)
        })
        .collect();
    let mean: f64 = powers.iter().sum::<f64>() / replicas as f64;
    let lhs = mean.powf(1.0 / rf);

    const B: usize = 200;
    let mut boot_rng = rng::rng(seed, &[tag::BOOTSTRAP]);
    let mut boots = [0.0f64; B];
    for slot in boots.iter_mut() {
        let mut acc = 0.0;
        for _ in 0..replicas {
            acc += powers[boot_rng.gen_range(0..replicas)];
        }
        *slot = (acc / replicas as f64).powf(1.0 / rf);
    }
    let bmean = boots.iter().sum::<f64>() / B as f64;
    let bvar = boots.iter().map(|b| (b - bmean) * (b - bmean)).sum::<f64>() / (B as f64 - 1.0);
    let lhs_se = bvar.sqrt();

    let constant = maximal_partial_sum_constant(rf);
    let moment_root = stream_abs_moment(spec, rf).powf(1.0 / rf);
    let gamma_total = mixing_sum(spec, rf);
    let weight_norm = weights.iter().map(|b| b * b).sum::<f64>().sqrt();
    let rhs = constant * weight_norm * (moment_root + gamma_total);
    Ok(MaximalCheckReport {
        r,
        replicas,
        lhs,
        lhs_se,
        rhs,
        constant,
        moment_root,
        mixing_sum: gamma_total,
        weight_norm,
        pass: lhs <= rhs + 3.0 * lhs_se,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normal_moments_hand_values() {
        let root_2_over_pi = (2.0 / std::f64::consts::PI).sqrt();
        assert!((gaussian_abs_moment(1.0) - root_2_over_pi).abs() < 1e-14);
        assert!((gaussian_abs_moment(2.0) - 1.0).abs() < 1e-14);
        assert!((gaussian_abs_moment(3.0) - 2.0 * root_2_over_pi).abs() < 1e-14);
        assert!((gaussian_abs_moment(4.0) - 3.0).abs() < 1e-13);
        assert!((gaussian_abs_moment(6.0) - 15.0).abs() < 1e-12);
    }

    #[test]
    fn gamma_two_tap_hand_values() {
        let spec = LinearProcessSpec::new(vec![1.0, 0.5]).unwrap();
        assert!((gamma_linear_analytic(&spec, 0, 2).unwrap() - 1.25f64.sqrt()).abs() < 1e-14);
        assert!((gamma_linear_analytic(&spec, 1, 2).unwrap() - 0.5).abs() < 1e-14);
        assert_eq!(gamma_linear_analytic(&spec, 2, 2).unwrap(), 0.0);
        // Order 4: the residual scales the same tails by (E Z^4)^{1/4} = 3^{1/4}.
        let g4 = 3f64.powf(0.25);
        assert!((gamma_linear_analytic(&spec, 1, 4).unwrap() - g4 * 0.5).abs() < 1e-14);
    }

    #[test]
    fn odd_orders_are_refused_by_report_but_served_generally() {
        let spec = LinearProcessSpec::new(vec![1.0, 0.5]).unwrap();
        assert!(gamma_linear_analytic(&spec, 1, 3).is_err());
        assert!(gamma_linear_analytic(&spec, 1, 1).is_err());
        let g3 = gamma_root(&spec, 1, 3.0).unwrap();
        let expect = (2.0 * (2.0 / std::f64::consts::PI).sqrt()).powf(1.0 / 3.0) * 0.5;
        assert!((g3 - expect).abs() < 1e-14);
    }

    #[test]
    fn mixing_sum_two_tap() {
        let spec = LinearProcessSpec::new(vec![1.0, 0.5]).unwrap();
        let want = 1.25f64.sqrt() + 0.5;
        assert!((mixing_sum(&spec, 2.0) - want).abs() < 1e-14);
        assert!((mixing_sum_power(&spec, 2.0, 2.0) - want * want).abs() < 1e-13);
    }

    #[test]
    fn profile_exact_when_horizon_covers_coefficients() {
        let spec = LinearProcessSpec::new(vec![1.0, 0.5, 0.25]).unwrap();
        let p = profile_build(&spec, 2.0, 1.0, 4).unwrap();
        assert_eq!(p.remainder, RemainderBound::Exact(0.0));
        assert_eq!(p.gamma.len(), 5);
        assert_eq!(p.gamma[3], 0.0);
        assert!((p.gamma_sum - mixing_sum(&spec, 2.0)).abs() < 1e-14);
        assert_eq!(p.mixing_sum_upper, Some(p.gamma_sum));
    }

    #[test]
    fn profile_certified_remainder_dominates_truth() {
        let spec = LinearProcessSpec::power_decay(1.0, 2.0).unwrap();
        let tau_max = 16;
        let p = profile_build(&spec, 2.0, 1.0, tau_max).unwrap();
        let exact_tail: f64 = (tau_max + 1..=spec.k_max())
            .map(|t| gamma_root(&spec, t, 2.0).unwrap())
            .sum();
        match p.remainder {
            RemainderBound::Certified(bound) => {
                assert!(bound >= exact_tail, "bound {bound} < exact {exact_tail}");
                assert!(bound < 2.0 * exact_tail + 1.0, "bound {bound} is uselessly loose");
            }
            other => panic!("expected certified remainder, got {other:?}"),
        }
    }

    #[test]
    fn profile_without_certificate_is_unbounded() {
        let spec = LinearProcessSpec::new(vec![1.0, 0.5, 0.25, 0.125]).unwrap();
        let p = profile_build(&spec, 2.0, 1.0, 2).unwrap();
        assert_eq!(p.remainder, RemainderBound::Unbounded);
        assert_eq!(p.mixing_sum_upper, None);
        assert_eq!(p.dependence_power, None);
    }

    #[test]
    fn mc_gamma_agrees_with_analytic() {
        let spec = LinearProcessSpec::new(vec![1.0, 0.5]).unwrap();
        let est = gamma_mc_estimate(&spec, 1, 2.0, 20_000, 7).unwrap();
        let truth = gamma_root(&spec, 1, 2.0).unwrap();
        assert!(
            (est.estimate - truth).abs() <= 3.0 * est.std_error,
            "estimate {} vs truth {} (se {})",
            est.estimate,
            truth,
            est.std_error
        );
        assert!(est.std_error > 0.0);
    }

    #[test]
    fn mc_gamma_beyond_support_is_exact_zero() {
        let spec = LinearProcessSpec::new(vec![1.0, 0.5]).unwrap();
        let est = gamma_mc_estimate(&spec, 5, 2.0, 100, 7).unwrap();
        assert_eq!(est.estimate, 0.0);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn running_maximum_constants_frozen() {
        assert!((partial_sum_constant(3.0) - std::f64::consts::SQRT_2).abs() < 1e-15);
        // √2 / (√2 − 2^(1/3)), checked against a high-precision evaluation.
        let c3 = maximal_partial_sum_constant(3.0);
        assert!((c3 - 9.165_795_148_8).abs() < 1e-9, "C'(3) = {c3}");
        assert!(c3 <= 10.0);
    }

    #[test]
    fn running_maximum_bound_holds_on_iid_paths() {
        let spec = LinearProcessSpec::iid_gaussian();
        let weights = vec![1.0; 64];
        let rep = maximal_inequality_check(&spec, 3, &weights, 4_000, 11).unwrap();
        assert!(rep.pass, "lhs {} vs rhs {}", rep.lhs, rep.rhs);
        // The bound should not be tight to within a factor of two here.
        assert!(rep.lhs < 0.5 * rep.rhs);
    }

    #[test]
    fn running_maximum_bound_holds_on_dependent_paths() {
        let spec = LinearProcessSpec::new(vec![1.0, 0.5, 0.25]).unwrap();
        let weights: Vec<f64> = (0..48).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let rep = maximal_inequality_check(&spec, 3, &weights, 4_000, 13).unwrap();
        assert!(rep.pass, "lhs {} vs rhs {}", rep.lhs, rep.rhs);
    }

    proptest! {
        #[test]
        fn gamma_scales_linearly_with_coefficients(
            coeffs in proptest::collection::vec(-1.0f64..1.0, 1..6),
            tau in 0usize..4,
        ) {
            prop_assume!(coeffs.iter().any(|c| c.abs() > 1e-3));
            let doubled: Vec<f64> = coeffs.iter().map(|c| 2.0 * c).collect();
            let spec = LinearProcessSpec::new(coeffs).unwrap();
            let spec2 = LinearProcessSpec::new(doubled).unwrap();
            let g = gamma_root(&spec, tau, 4.0).unwrap();
            let g2 = gamma_root(&spec2, tau, 4.0).unwrap();
            prop_assert!((g2 - 2.0 * g).abs() <= 1e-12 * (1.0 + g2.abs()));
        }

        #[test]
        fn gamma_is_monotone_in_horizon(
            coeffs in proptest::collection::vec(-1.0f64..1.0, 1..6),
            tau in 0usize..5,
        ) {
            let spec = LinearProcessSpec::new(coeffs).unwrap();
            let a = gamma_root(&spec, tau, 2.0).unwrap();
            let b = gamma_root(&spec, tau + 1, 2.0).unwrap();
            prop_assert!(b <= a + 1e-15);
        }
    }
}

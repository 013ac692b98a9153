//! Gradient models: a noisy gradient H(θ, x) evaluated at one data
//! point, its mean field h(θ) under the stationary data law, and the
//! structural constants (a, L1, L2, H*) the error analysis consumes.
//!
//! The convexity constant `a` is the strong monotonicity of H in θ,
//! uniform over data values; `l1`/`l2` are per-coordinate Lipschitz
//! constants in θ and in the data argument. `H*` is the residual
//! gradient magnitude at (θ*, 0) and is always recomputed from the
//! gradient itself, never accepted from a declaration.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::rng::{self, tag};
use crate::streams::{LinearProcessSpec, VectorStream};

/// Model interface used by the samplers and the constants chain.
///
/// Implementors promise, for all θ, θ', x, x':
///
/// * `⟨θ−θ', H(θ,x)−H(θ',x)⟩ ≥ a·‖θ−θ'‖²`
/// * `|Hᵢ(θ,x)−Hᵢ(θ',x')| ≤ l1ᵢ·‖θ−θ'‖ + l2ᵢ·‖x−x'‖`
///
/// and that `h(θ*) = 0` where h is the mean field.
pub trait GradientOracle: Sync {
    /// Parameter dimension d.
    fn dim(&self) -> usize;
    /// Data dimension m.
    fn data_dim(&self) -> usize;
    /// Minimizer of the associated potential; `h(θ*) = 0`.
    fn theta_star(&self) -> &[f64];
    /// Strong monotonicity constant `a`, uniform over data.
    fn a(&self) -> f64;
    /// Per-coordinate Lipschitz constants in θ.
    fn l1_coord(&self) -> &[f64];
    /// Per-coordinate Lipschitz constants in the data argument.
    fn l2_coord(&self) -> &[f64];
    /// Noisy gradient H(θ, x); writes `dim()` values into `out`.
    fn gradient(&self, theta: &[f64], x: &[f64], out: &mut [f64]);
    /// Mean field h(θ) when a closed form exists; returns false and
    /// leaves `out` untouched otherwise.
    fn mean_gradient(&self, theta: &[f64], out: &mut [f64]) -> bool;

    /// Total Lipschitz constant in θ: L1 = Σᵢ l1ᵢ.
    fn l1(&self) -> f64 {
        self.l1_coord().iter().sum()
    }
    /// Total Lipschitz constant in the data argument: L2 = Σᵢ l2ᵢ.
    fn l2(&self) -> f64 {
        self.l2_coord().iter().sum()
    }
    /// H* = Σᵢ |Hᵢ(θ*, 0)|, the constant term of the growth bound
    /// ‖H(θ,x)‖ ≤ L1‖θ−θ*‖ + L2‖x‖ + H*. Recomputed on every call.
    fn h_star(&self) -> f64 {
        let mut out = vec![0.0; self.dim()];
        let zero = vec![0.0; self.data_dim()];
        self.gradient(self.theta_star(), &zero, &mut out);
        out.iter().map(|v| v.abs()).sum()
    }
}

/// Affine model H(θ, x) = S(θ − θ*) + Bx with S symmetric positive
/// definite. Mean field h(θ) = S(θ − θ*) for centered data. Constants
/// are derived from the matrices: a is the smallest eigenvalue of S,
/// l1ᵢ/l2ᵢ are the row norms of S/B.
pub struct QuadraticOracle {
    s: DMatrix<f64>,
    b: DMatrix<f64>,
    theta_star: Vec<f64>,
    a: f64,
    s_eigenvalues: Vec<f64>,
    s_eigenvectors: DMatrix<f64>,
    l1_coord: Vec<f64>,
    l2_coord: Vec<f64>,
}

impl QuadraticOracle {
    /// `s` must be d×d, symmetric and positive definite; `b` is d×m.
    pub fn new(s: DMatrix<f64>, theta_star: Vec<f64>, b: DMatrix<f64>) -> Result<Self> {
        let d = theta_star.len();
        if s.nrows() != d || s.ncols() != d {
            return Err(invalid(format!(
                "curvature matrix must be {d}x{d}, got {}x{}",
                s.nrows(),
                s.ncols()
            )));
        }
        if b.nrows() != d {
            return Err(invalid(format!(
                "data matrix must have {d} rows, got {}",
                b.nrows()
            )));
        }
        let scale = s.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        for i in 0..d {
            for j in 0..i {
                if (s[(i, j)] - s[(j, i)]).abs() > 1e-12 * scale {
                    return Err(invalid("curvature matrix must be symmetric"));
                }
            }
        }
        let eig = nalgebra::SymmetricEigen::new(s.clone());
        let mut eigenvalues: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        let eigenvectors = eig.eigenvectors;
        // Keep eigenpairs sorted ascending so the smallest eigenvalue is first.
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&i, &j| eigenvalues[i].total_cmp(&eigenvalues[j]));
        eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let mut vecs = DMatrix::zeros(d, d);
        for (new_col, &old_col) in order.iter().enumerate() {
            vecs.set_column(new_col, &eigenvectors.column(old_col));
        }
        let a = eigenvalues[0];
        if a <= 0.0 {
            return Err(invalid(format!(
                "curvature matrix must be positive definite (smallest eigenvalue {a})"
            )));
        }
        let l1_coord: Vec<f64> = (0..d).map(|i| s.row(i).iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
        let l2_coord: Vec<f64> = (0..d).map(|i| b.row(i).iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
        Ok(Self {
            s,
            b,
            theta_star,
            a,
            s_eigenvalues: eigenvalues,
            s_eigenvectors: vecs,
            l1_coord,
            l2_coord,
        })
    }

    /// Scalar model H(θ, x) = s·(θ − θ*) + b·x.
    pub fn scalar(s: f64, theta_star: f64, b: f64) -> Result<Self> {
        Self::new(
            DMatrix::from_element(1, 1, s),
            vec![theta_star],
            DMatrix::from_element(1, 1, b),
        )
    }

    /// Diagonal model with θ* = 0 and B = I: H(θ, x) = diag(s)·θ + x.
    pub fn diagonal(s_diag: &[f64]) -> Result<Self> {
        let d = s_diag.len();
        Self::new(
            DMatrix::from_diagonal(&DVector::from_row_slice(s_diag)),
            vec![0.0; d],
            DMatrix::identity(d, d),
        )
    }

    /// The d = 1 workhorse H(θ, x) = θ + x (s = 1, θ* = 0, b = 1).
    pub fn unit() -> Self {
        Self::scalar(1.0, 0.0, 1.0).expect("unit model is valid")
    }

    /// Eigenvalues of S, ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.s_eigenvalues
    }

    /// Orthonormal eigenvectors of S, columns matching `eigenvalues()`.
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.s_eigenvectors
    }

    pub fn curvature(&self) -> &DMatrix<f64> {
        &self.s
    }

    pub fn data_matrix(&self) -> &DMatrix<f64> {
        &self.b
    }

    /// True if S and B are diagonal (up to exact zeros off the diagonal).
    pub fn is_diagonal(&self) -> bool {
        let off_zero = |m: &DMatrix<f64>| {
            (0..m.nrows()).all(|i| (0..m.ncols()).all(|j| i == j || m[(i, j)] == 0.0))
        };
        off_zero(&self.s) && (self.b.nrows() != self.b.ncols() || off_zero(&self.b))
    }
}

impl GradientOracle for QuadraticOracle {
    fn dim(&self) -> usize {
        self.theta_star.len()
    }

    fn data_dim(&self) -> usize {
        self.b.ncols()
    }

    fn theta_star(&self) -> &[f64] {
        &self.theta_star
    }

    fn a(&self) -> f64 {
        self.a
    }

    fn l1_coord(&self) -> &[f64] {
        &self.l1_coord
    }

    fn l2_coord(&self) -> &[f64] {
        &self.l2_coord
    }

    fn gradient(&self, theta: &[f64], x: &[f64], out: &mut [f64]) {
        let d = self.dim();
        for i in 0..d {
            let mut acc = 0.0;
            for j in 0..d {
                acc += self.s[(i, j)] * (theta[j] - self.theta_star[j]);
            }
            for (j, xv) in x.iter().enumerate() {
                acc += self.b[(i, j)] * xv;
            }
            out[i] = acc;
        }
    }

    fn mean_gradient(&self, theta: &[f64], out: &mut [f64]) -> bool {
        let d = self.dim();
        for i in 0..d {
            let mut acc = 0.0;
            for j in 0..d {
                acc += self.s[(i, j)] * (theta[j] - self.theta_star[j]);
            }
            out[i] = acc;
        }
        true
    }
}

/// Model for i.i.d. data with data-dependent curvature:
/// H(θ, x) = s·(1+‖x‖)^ρ·(θ − θ*) + b·x, with d = m.
///
/// For ρ = 0 this is the affine model s·I, b·I; `as_quadratic` exposes
/// that view so the samplers can run it. For ρ > 0 the θ-Lipschitz
/// constant grows like (1+‖x‖)^ρ, so the uniform [`GradientOracle`]
/// contract does not apply; the i.i.d. planner consumes this type
/// directly through averaged curvature and growth moments.
pub struct IidOracle {
    pub scale: f64,
    pub coupling: f64,
    pub rho: u32,
    pub theta_star: Vec<f64>,
}

impl IidOracle {
    pub fn new(scale: f64, coupling: f64, rho: u32, theta_star: Vec<f64>) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(invalid("curvature scale must be positive and finite"));
        }
        if !coupling.is_finite() {
            return Err(invalid("data coupling must be finite"));
        }
        if theta_star.is_empty() {
            return Err(invalid("theta_star must be non-empty"));
        }
        Ok(Self { scale, coupling, rho, theta_star })
    }

    pub fn dim(&self) -> usize {
        self.theta_star.len()
    }

    /// H(θ, x).
    pub fn gradient(&self, theta: &[f64], x: &[f64], out: &mut [f64]) {
        let norm_x = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let factor = self.scale * (1.0 + norm_x).powi(self.rho as i32);
        for i in 0..out.len() {
            out[i] = factor * (theta[i] - self.theta_star[i]) + self.coupling * x[i];
        }
    }

    /// Curvature multiplier s·(1+‖x‖)^ρ of the identity map at data x.
    pub fn curvature_factor(&self, x: &[f64]) -> f64 {
        let norm_x = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        self.scale * (1.0 + norm_x).powi(self.rho as i32)
    }

    /// Worst-case monotonicity constant (attained at x = 0): s.
    pub fn a_uniform(&self) -> f64 {
        self.scale
    }

    /// θ-Lipschitz coefficient in front of (1+‖x‖)^ρ: s.
    pub fn l1(&self) -> f64 {
        self.scale
    }

    /// Data-Lipschitz coefficient in front of (1+‖x‖+‖x'‖)^ρ·(1+‖θ‖):
    /// s·ρ·(1+‖θ*‖) + |b|.
    pub fn l2(&self) -> f64 {
        let star_norm = self.theta_star.iter().map(|v| v * v).sum::<f64>().sqrt();
        self.scale * self.rho as f64 * (1.0 + star_norm) + self.coupling.abs()
    }

    /// H(θ*, 0) is exactly zero for this family.
    pub fn h_star(&self) -> f64 {
        0.0
    }

    /// The ρ = 0 member as an affine model.
    pub fn as_quadratic(&self) -> Option<QuadraticOracle> {
        if self.rho != 0 {
            return None;
        }
        let d = self.dim();
        Some(
            QuadraticOracle::new(
                DMatrix::identity(d, d) * self.scale,
                self.theta_star.clone(),
                DMatrix::identity(d, d) * self.coupling,
            )
            .expect("rho=0 member is a valid affine model"),
        )
    }
}

/// Closed-form mean field h(θ). Errors when the model has none.
pub fn eval_h(oracle: &dyn GradientOracle, theta: &[f64]) -> Result<Vec<f64>> {
    if theta.len() != oracle.dim() {
        return Err(invalid(format!(
            "theta has length {}, model dimension is {}",
            theta.len(),
            oracle.dim()
        )));
    }
    let mut out = vec![0.0; oracle.dim()];
    if oracle.mean_gradient(theta, &mut out) {
        Ok(out)
    } else {
        Err(Error::Unsupported(
            "model has no closed-form mean field; use eval_h_mc with a data stream".into(),
        ))
    }
}

/// Monte Carlo estimate of h(θ) = E H(θ, X) under the stationary law of
/// the given stream. Returns the coordinate-wise estimate and its
/// standard error.
pub struct MeanFieldEstimate {
    pub estimate: Vec<f64>,
    pub std_error: Vec<f64>,
    pub samples: usize,
}

pub fn eval_h_mc(
    oracle: &dyn GradientOracle,
    spec: &LinearProcessSpec,
    theta: &[f64],
    samples: usize,
    seed: u64,
) -> Result<MeanFieldEstimate> {
    if theta.len() != oracle.dim() {
        return Err(invalid("theta length does not match model dimension"));
    }
    if samples < 2 {
        return Err(invalid("need at least 2 samples"));
    }
    let d = oracle.dim();
    let m = oracle.data_dim();
    let mut stream = VectorStream::new(spec, m, seed, 0);
    let mut x = vec![0.0; m];
    let mut g = vec![0.0; d];
    let mut sum = vec![0.0; d];
    let mut sumsq = vec![0.0; d];
    for _ in 0..samples {
        stream.next_into(&mut x);
        oracle.gradient(theta, &x, &mut g);
        for i in 0..d {
            sum[i] += g[i];
            sumsq[i] += g[i] * g[i];
        }
    }
    let n = samples as f64;
    let estimate: Vec<f64> = sum.iter().map(|s| s / n).collect();
    let std_error: Vec<f64> = (0..d)
        .map(|i| {
            let var = (sumsq[i] - sum[i] * sum[i] / n) / (n - 1.0);
            (var.max(0.0) / n).sqrt()
        })
        .collect();
    Ok(MeanFieldEstimate { estimate, std_error, samples })
}

/// Constants as declared, for checking against a model's actual
/// behaviour. Use [`DeclaredConstants::from_oracle`] to audit a model's
/// own derivation.
#[derive(Debug, Clone)]
pub struct DeclaredConstants {
    pub a: f64,
    pub l1_coord: Vec<f64>,
    pub l2_coord: Vec<f64>,
}

impl DeclaredConstants {
    pub fn from_oracle(oracle: &dyn GradientOracle) -> Self {
        Self {
            a: oracle.a(),
            l1_coord: oracle.l1_coord().to_vec(),
            l2_coord: oracle.l2_coord().to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    Monotonicity,
    LipschitzTheta { coord: usize },
    LipschitzData { coord: usize },
}

#[derive(Debug, Clone)]
pub struct Violation {
    pub kind: ViolationKind,
    /// How far past the declared bound the sampled pair landed.
    pub excess: f64,
    pub theta: Vec<f64>,
    pub theta_alt: Vec<f64>,
    pub x: Vec<f64>,
    pub x_alt: Vec<f64>,
}

#[derive(Debug)]
pub struct StructuralReport {
    pub trials: usize,
    pub violation_count: usize,
    /// First violations found, capped at 32.
    pub violations: Vec<Violation>,
}

impl StructuralReport {
    pub fn passed(&self) -> bool {
        self.violation_count == 0
    }
}

/// Samples (θ, θ', x, x') uniformly from [−radius, radius] boxes and
/// checks the declared monotonicity and Lipschitz constants against the
/// model's actual gradient values. A small relative slack absorbs
/// floating-point noise so exact-equality cases pass cleanly.
pub fn check_structural_constants(
    oracle: &dyn GradientOracle,
    declared: &DeclaredConstants,
    trials: usize,
    radius: f64,
    seed: u64,
) -> Result<StructuralReport> {
    if trials == 0 {
        return Err(invalid("need at least one trial"));
    }
    if !(radius > 0.0) {
        return Err(invalid("probe radius must be positive"));
    }
    let d = oracle.dim();
    let m = oracle.data_dim();
    if declared.l1_coord.len() != d || declared.l2_coord.len() != d {
        return Err(invalid("declared constants dimension mismatch"));
    }
    let mut gen = rng::rng(seed, &[tag::PROBE]);
    let mut draw = |len: usize, out: &mut Vec<f64>| {
        out.clear();
        out.extend((0..len).map(|_| gen.gen_range(-radius..=radius)));
    };
    let (mut th, mut th2, mut x, mut x2) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut g1 = vec![0.0; d];
    let mut g2 = vec![0.0; d];
    let mut g2_same_x = vec![0.0; d];
    let mut report = StructuralReport { trials, violation_count: 0, violations: Vec::new() };
    let record = |kind, excess, th: &[f64], th2: &[f64], x: &[f64], x2: &[f64], rep: &mut StructuralReport| {
        rep.violation_count += 1;
        if rep.violations.len() < 32 {
            rep.violations.push(Violation {
                kind,
                excess,
                theta: th.to_vec(),
                theta_alt: th2.to_vec(),
                x: x.to_vec(),
                x_alt: x2.to_vec(),
            });
        }
    };
    for _ in 0..trials {
        draw(d, &mut th);
        draw(d, &mut th2);
        draw(m, &mut x);
        draw(m, &mut x2);
        oracle.gradient(&th, &x, &mut g1);
        oracle.gradient(&th2, &x, &mut g2_same_x);
        oracle.gradient(&th2, &x2, &mut g2);

        let diff_sq: f64 = (0..d).map(|i| (th[i] - th2[i]) * (th[i] - th2[i])).sum();
        let inner: f64 = (0..d).map(|i| (th[i] - th2[i]) * (g1[i] - g2_same_x[i])).sum();
        let slack = 1e-10 * (1.0 + inner.abs() + declared.a * diff_sq);
        if inner + slack < declared.a * diff_sq {
            record(ViolationKind::Monotonicity, declared.a * diff_sq - inner, &th, &th2, &x, &x, &mut report);
        }

        let dist_theta = diff_sq.sqrt();
        let dist_x: f64 = (0..m).map(|i| (x[i] - x2[i]) * (x[i] - x2[i])).sum::<f64>().sqrt();
        for i in 0..d {
            // Same data point isolates the θ-Lipschitz constant.
            let lhs_theta = (g1[i] - g2_same_x[i]).abs();
            let bound_theta = declared.l1_coord[i] * dist_theta;
            let slack_t = 1e-10 * (1.0 + lhs_theta + bound_theta);
            if lhs_theta > bound_theta + slack_t {
                record(
                    ViolationKind::LipschitzTheta { coord: i },
                    lhs_theta - bound_theta,
                    &th,
                    &th2,
                    &x,
                    &x,
                    &mut report,
                );
            }
            // Joint move bounds the mixed difference.
            let lhs_joint = (g1[i] - g2[i]).abs();
            let bound_joint = declared.l1_coord[i] * dist_theta + declared.l2_coord[i] * dist_x;
            let slack_j = 1e-10 * (1.0 + lhs_joint + bound_joint);
            if lhs_joint > bound_joint + slack_j {
                record(
                    ViolationKind::LipschitzData { coord: i },
                    lhs_joint - bound_joint,
                    &th,
                    &th2,
                    &x,
                    &x2,
                    &mut report,
                );
            }
        }
    }
    Ok(report)
}

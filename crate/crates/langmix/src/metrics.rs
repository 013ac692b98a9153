//! Distances and moment bounds used to measure sampler output.
//!
//! Wasserstein-2 distances come in four exact flavors: sorted/quantile
//! coupling on the line, the closed form between Gaussians, optimal
//! assignment between equal-size point clouds, and the piecewise
//! quantile integral between a sample and a scalar Gaussian. No
//! approximate transport ships; every reported distance is exact up to
//! floating point.

use nalgebra::DMatrix;
use rayon::prelude::*;
use statrs::distribution::{Continuous, ContinuousCDF, Normal};
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Result};

/// W₂ between two empirical measures on the line, exact via the
/// monotone (sorted/quantile) coupling.
///
/// Equal sizes pair sorted atoms directly; unequal sizes integrate the
/// squared difference of the two step quantile functions over the
/// merged probability breakpoints.
pub fn w2_empirical_1d(mu: &[f64], nu: &[f64]) -> Result<f64> {
    if mu.is_empty() || nu.is_empty() {
        return Err(invalid("empirical measure must contain at least one point"));
    }
    let mut xs = mu.to_vec();
    let mut ys = nu.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (n, m) = (xs.len(), ys.len());
    if n == m {
        let sq = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            / n as f64;
        return Ok(sq.sqrt());
    }
    // Quantile functions are constant between breakpoints i/n and j/m;
    // sweep the merged partition.
    let (mut i, mut j) = (0usize, 0usize);
    let mut u = 0.0f64;
    let mut acc = 0.0f64;
    while i < n && j < m {
        let next_i = (i + 1) as f64 / n as f64;
        let next_j = (j + 1) as f64 / m as f64;
        let next = next_i.min(next_j);
        let diff = xs[i] - ys[j];
        acc += (next - u) * diff * diff;
        if next_i <= next + 1e-18 && next_i <= next_j {
            i += 1;
        }
        if next_j <= next_i {
            j += 1;
        }
        u = next;
    }
    Ok(acc.max(0.0).sqrt())
}

/// Covariance of a Gaussian law, kept diagonal when it is one so the
/// common isotropic comparisons stay exact and cheap.
#[derive(Debug, Clone)]
pub enum Cov {
    /// Per-coordinate variances.
    Diag(Vec<f64>),
    Full(DMatrix<f64>),
}

#[derive(Debug, Clone)]
pub struct GaussianLaw {
    pub mean: Vec<f64>,
    pub cov: Cov,
}

impl GaussianLaw {
    pub fn diag(mean: Vec<f64>, variances: Vec<f64>) -> Result<Self> {
        if mean.len() != variances.len() {
            return Err(invalid("mean and variance dimensions differ"));
        }
        if variances.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(invalid("variances must be finite and non-negative"));
        }
        Ok(Self { mean, cov: Cov::Diag(variances) })
    }

    pub fn scalar(mean: f64, variance: f64) -> Result<Self> {
        Self::diag(vec![mean], vec![variance])
    }

    pub fn full(mean: Vec<f64>, cov: DMatrix<f64>) -> Result<Self> {
        if cov.nrows() != cov.ncols() || cov.nrows() != mean.len() {
            return Err(invalid("covariance must be square and match the mean dimension"));
        }
        let scale = cov.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
        for i in 0..cov.nrows() {
            for j in 0..i {
                if (cov[(i, j)] - cov[(j, i)]).abs() > 1e-12 * scale {
                    return Err(invalid("covariance must be symmetric"));
                }
            }
        }
        Ok(Self { mean, cov: Cov::Full(cov) })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    fn cov_matrix(&self) -> DMatrix<f64> {
        match &self.cov {
            Cov::Diag(v) => DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(v)),
            Cov::Full(m) => m.clone(),
        }
    }
}

/// Eigenvalues of a symmetric matrix, clamped at zero; rejects
/// matrices that are negative beyond the 1e−12 PSD tolerance.
fn psd_eigen(m: &DMatrix<f64>, what: &str) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let sym = nalgebra::SymmetricEigen::new(m.clone());
    let scale = sym
        .eigenvalues
        .iter()
        .fold(0.0f64, |a, v| a.max(v.abs()))
        .max(1.0);
    let mut vals = Vec::with_capacity(sym.eigenvalues.len());
    for &v in sym.eigenvalues.iter() {
        if v < -1e-12 * scale {
            return Err(invalid(format!("{what} must be positive semidefinite")));
        }
        vals.push(v.max(0.0));
    }
    Ok((vals, sym.eigenvectors))
}

/// Exact W₂ between Gaussian laws:
/// W₂² = ‖μ₁−μ₂‖² + tr(Σ₁ + Σ₂ − 2(Σ₂^{1/2} Σ₁ Σ₂^{1/2})^{1/2}).
/// Two diagonal covariances reduce to Σᵢ (√v₁ᵢ − √v₂ᵢ)².
pub fn w2_gaussian(p: &GaussianLaw, q: &GaussianLaw) -> Result<f64> {
    if p.dim() != q.dim() {
        return Err(invalid("Gaussian laws live in different dimensions"));
    }
    let mean_sq: f64 = p
        .mean
        .iter()
        .zip(&q.mean)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let bures_sq = match (&p.cov, &q.cov) {
        (Cov::Diag(a), Cov::Diag(b)) => a
            .iter()
            .zip(b)
            .map(|(x, y)| {
                let d = x.sqrt() - y.sqrt();
                d * d
            })
            .sum::<f64>(),
        _ => {
            let c1 = p.cov_matrix();
            let c2 = q.cov_matrix();
            let (vals2, vecs2) = psd_eigen(&c2, "covariance")?;
            let sqrt_diag = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                vals2.len(),
                vals2.iter().map(|v| v.sqrt()),
            ));
            let sqrt2 = &vecs2 * sqrt_diag * vecs2.transpose();
            let mut inner = &sqrt2 * &c1 * &sqrt2;
            // Re-symmetrize before the second factorization.
            inner = (&inner + inner.transpose()) * 0.5;
            let (vals1, _) = psd_eigen(&c1, "covariance")?;
            let (cross_vals, _) = psd_eigen(&inner, "covariance cross term")?;
            let tr1: f64 = vals1.iter().sum();
            let tr2: f64 = vals2.iter().sum();
            let cross: f64 = cross_vals.iter().map(|v| v.sqrt()).sum();
            tr1 + tr2 - 2.0 * cross
        }
    };
    Ok((mean_sq + bures_sq).max(0.0).sqrt())
}

/// Largest point-cloud size the cubic assignment solver accepts.
pub const ASSIGNMENT_MAX: usize = 2048;

/// Exact W₂ between equal-size point clouds in ℝ^d: the minimum of
/// (1/n)Σ‖xᵢ − y_{σ(i)}‖² over permutations σ, found by a cubic-time
/// assignment solve on the squared-distance matrix.
pub fn w2_assignment(mu: &[Vec<f64>], nu: &[Vec<f64>]) -> Result<f64> {
    if mu.is_empty() || nu.is_empty() {
        return Err(invalid("empirical measure must contain at least one point"));
    }
    if mu.len() != nu.len() {
        return Err(invalid(format!(
            "assignment distance needs equal sample counts, got {} and {}; subsample the larger set",
            mu.len(),
            nu.len()
        )));
    }
    if mu.len() > ASSIGNMENT_MAX {
        return Err(invalid(format!(
            "assignment solver accepts at most {ASSIGNMENT_MAX} points, got {}; subsample the clouds",
            mu.len()
        )));
    }
    let d = mu[0].len();
    if mu.iter().chain(nu.iter()).any(|p| p.len() != d) {
        return Err(invalid("all points must share one dimension"));
    }
    let n = mu.len();
    let cost: Vec<Vec<f64>> = mu
        .par_iter()
        .map(|x| {
            nu.iter()
                .map(|y| x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum())
                .collect()
        })
        .collect();
    let total = assignment_min_cost(&cost);
    Ok((total / n as f64).max(0.0).sqrt())
}

/// Minimum-cost perfect matching on a square cost matrix, the
/// potential-based shortest-augmenting-path method in O(n³).
fn assignment_min_cost(cost: &[Vec<f64>]) -> f64 {
    let n = cost.len();
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut matched = vec![0usize; n + 1]; // column -> row, 1-indexed, 0 = free
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        matched[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched[j0] == 0 {
                break;
            }
        }
        while j0 != 0 {
            let j1 = way[j0];
            matched[j0] = matched[j1];
            j0 = j1;
        }
    }
    (1..=n).map(|j| cost[matched[j] - 1][j - 1]).sum()
}

/// Exact W₂ between an empirical measure on the line and N(mean, sd²),
/// by integrating the squared quantile gap slab by slab:
/// on u ∈ (i/n, (i+1)/n) the empirical quantile is the i-th order
/// statistic and the Gaussian one is mean + sd·Φ⁻¹(u).
pub fn w2_empirical_gaussian_1d(samples: &[f64], mean: f64, sd: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(invalid("empirical measure must contain at least one point"));
    }
    if !(sd >= 0.0) || !sd.is_finite() {
        return Err(invalid("standard deviation must be finite and non-negative"));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let nf = n as f64;
    // Gaussian pdf and z·pdf vanish at the infinite endpoints.
    let mut z_hi = f64::NEG_INFINITY;
    let mut pdf_hi = 0.0f64;
    let mut zpdf_hi = 0.0f64;
    let mut acc = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let (z_lo, pdf_lo, zpdf_lo) = (z_hi, pdf_hi, zpdf_hi);
        if i + 1 == n {
            z_hi = f64::INFINITY;
            pdf_hi = 0.0;
            zpdf_hi = 0.0;
        } else {
            z_hi = normal.inverse_cdf((i as f64 + 1.0) / nf);
            pdf_hi = normal.pdf(z_hi);
            zpdf_hi = z_hi * pdf_hi;
        }
        let _ = z_lo;
        let c = x - mean;
        // ∫ zφ over the slab = φ(z_lo) − φ(z_hi);
        // ∫ z²φ = ΔΦ + z_lo φ(z_lo) − z_hi φ(z_hi), with ΔΦ = 1/n exact.
        acc += c * c / nf - 2.0 * c * sd * (pdf_lo - pdf_hi) + sd * sd * (1.0 / nf + zpdf_lo - zpdf_hi);
    }
    Ok(acc.max(0.0).sqrt())
}

/// Even moments of a d-dimensional standard Gaussian: returns the exact
/// value E‖ξ‖^{2r} = Π_{j=0}^{r−1}(d + 2j) together with the coarse
/// envelope 2^{2r} d^r r^{3r/2} that the step-size analysis uses, and
/// asserts the envelope really dominates.
pub fn gaussian_norm_moment(d: usize, r: u32) -> (f64, f64) {
    assert!(d >= 1 && r >= 1, "dimension and order must be at least 1");
    let exact: f64 = (0..r).map(|j| d as f64 + 2.0 * j as f64).product();
    let rf = r as f64;
    let bound = 4f64.powi(r as i32) * (d as f64).powi(r as i32) * rf.powf(1.5 * rf);
    assert!(exact <= bound, "moment envelope failed: {exact} > {bound}");
    (exact, bound)
}

/// E‖ξ‖^s for real s ≥ 0: 2^{s/2} Γ((d+s)/2) / Γ(d/2).
pub fn gaussian_norm_moment_general(d: usize, s: f64) -> f64 {
    assert!(d >= 1 && s >= 0.0);
    let df = d as f64;
    (0.5 * s * std::f64::consts::LN_2 + ln_gamma((df + s) / 2.0) - ln_gamma(df / 2.0)).exp()
}

/// Both sides of the even-power cross-term bound: the multinomial
/// expansion of (‖x‖² + 2⟨x,y⟩ + ‖y‖²)^p with the (i = p−1) and (j = 1)
/// index slices removed is dominated by the binomial expansion of
/// (‖x‖ + ‖y‖)^{2p} with its k = 1 term removed.
pub fn multinomial_inequality_check(x: &[f64], y: &[f64], p: u32) -> Result<(f64, f64, bool)> {
    if p < 1 {
        return Err(invalid("exponent p must be at least 1"));
    }
    if x.len() != y.len() {
        return Err(invalid("vectors must share one dimension"));
    }
    let xx: f64 = x.iter().map(|a| a * a).sum();
    let yy: f64 = y.iter().map(|a| a * a).sum();
    let xy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let (nx, ny) = (xx.sqrt(), yy.sqrt());

    let fact: Vec<f64> = {
        let mut f = vec![1.0f64; (2 * p + 1) as usize];
        for k in 1..f.len() {
            f[k] = f[k - 1] * k as f64;
        }
        f
    };
    let mut lhs = 0.0f64;
    for i in 0..=p {
        for j in 0..=(p - i) {
            let k = p - i - j;
            if i == p - 1 || j == 1 {
                continue;
            }
            let coeff = fact[p as usize] / (fact[i as usize] * fact[j as usize] * fact[k as usize]);
            lhs += coeff * xx.powi(i as i32) * (2.0 * xy).powi(j as i32) * yy.powi(k as i32);
        }
    }
    let mut rhs = 0.0f64;
    for k in 0..=2 * p {
        if k == 1 {
            continue;
        }
        let coeff =
            fact[(2 * p) as usize] / (fact[k as usize] * fact[(2 * p - k) as usize]);
        rhs += coeff * nx.powi((2 * p - k) as i32) * ny.powi(k as i32);
    }
    let pass = lhs <= rhs * (1.0 + 1e-12) + 1e-300;
    Ok((lhs, rhs, pass))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn line_distance_point_masses() {
        assert_eq!(w2_empirical_1d(&[0.0], &[3.0]).unwrap(), 3.0);
        assert_eq!(w2_empirical_1d(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        // Sorted pairing 0→1, 2→3.
        assert!((w2_empirical_1d(&[0.0, 2.0], &[1.0, 3.0]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn line_distance_unequal_sizes() {
        // One atom at 0 vs atoms at 1 and 3: W₂² = 0.5·1 + 0.5·9 = 5.
        let d = w2_empirical_1d(&[0.0], &[1.0, 3.0]).unwrap();
        assert!((d - 5f64.sqrt()).abs() < 1e-14, "{d}");
        // Order of arguments must not matter.
        let d2 = w2_empirical_1d(&[1.0, 3.0], &[0.0]).unwrap();
        assert!((d - d2).abs() < 1e-14);
        // Duplicating every atom (same measures, common size 6) changes nothing.
        let a = w2_empirical_1d(&[0.0, 0.0, 1.0], &[0.5, 2.0]).unwrap();
        let b = w2_empirical_1d(&[0.0, 0.0, 0.0, 0.0, 1.0, 1.0], &[0.5, 0.5, 0.5, 2.0, 2.0, 2.0])
            .unwrap();
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        // Hand value for that pair: 0.5·0.25 + (1/6)·4 + (1/3)·1 = 1.125.
        assert!((a - 1.125f64.sqrt()).abs() < 1e-14, "{a}");
    }

    #[test]
    fn line_distance_rejects_empty() {
        assert!(w2_empirical_1d(&[], &[1.0]).is_err());
        assert!(w2_empirical_1d(&[1.0], &[]).is_err());
    }

    #[test]
    fn gaussian_distance_scalar_and_diag() {
        let a = GaussianLaw::scalar(0.0, 1.0).unwrap();
        let b = GaussianLaw::scalar(0.0, 4.0).unwrap();
        assert!((w2_gaussian(&a, &b).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(w2_gaussian(&a, &a).unwrap(), 0.0);
        // Isotropic pair in d=2 with variances 1 vs 2/1.9.
        let v = 2.0 / 1.9;
        let p = GaussianLaw::diag(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let q = GaussianLaw::diag(vec![0.0, 0.0], vec![v, v]).unwrap();
        let want = 2f64.sqrt() * (v.sqrt() - 1.0);
        let got = w2_gaussian(&p, &q).unwrap();
        assert!((got - want).abs() < 1e-14, "{got} vs {want}");
        assert!((got - 0.03674).abs() < 5e-6);
    }

    #[test]
    fn gaussian_distance_full_matches_diag() {
        let p_diag = GaussianLaw::diag(vec![1.0, -2.0], vec![1.0, 3.0]).unwrap();
        let q_diag = GaussianLaw::diag(vec![0.0, 0.5], vec![2.0, 0.5]).unwrap();
        let p_full = GaussianLaw::full(
            vec![1.0, -2.0],
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 3.0]),
        )
        .unwrap();
        let q_full = GaussianLaw::full(
            vec![0.0, 0.5],
            DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]),
        )
        .unwrap();
        let a = w2_gaussian(&p_diag, &q_diag).unwrap();
        let b = w2_gaussian(&p_full, &q_full).unwrap();
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }

    #[test]
    fn gaussian_distance_rotation_invariant_cross_terms() {
        // Rotate a diagonal covariance; the distance to an isotropic law
        // must not change.
        let theta = 0.7f64;
        let (s, c) = theta.sin_cos();
        let rot = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
        let diag = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]);
        let rotated = &rot * diag.clone() * rot.transpose();
        let p = GaussianLaw::full(vec![0.0, 0.0], rotated).unwrap();
        let p0 = GaussianLaw::full(vec![0.0, 0.0], diag).unwrap();
        let iso = GaussianLaw::diag(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let a = w2_gaussian(&p, &iso).unwrap();
        let b = w2_gaussian(&p0, &iso).unwrap();
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }

    #[test]
    fn gaussian_distance_rejects_negative_covariance() {
        let bad = GaussianLaw::full(
            vec![0.0, 0.0],
            DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]),
        )
        .unwrap();
        let iso = GaussianLaw::diag(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert!(w2_gaussian(&bad, &iso).is_err());
        assert!(GaussianLaw::diag(vec![0.0], vec![-1.0]).is_err());
    }

    #[test]
    fn assignment_hand_cases() {
        let mu = vec![vec![0.0, 0.0], vec![1.0, 0.0]];
        let nu = vec![vec![1.0, 0.0], vec![0.0, 0.0]];
        assert_eq!(w2_assignment(&mu, &nu).unwrap(), 0.0);
        let shifted: Vec<Vec<f64>> = mu.iter().map(|p| vec![p[0] + 2.0, p[1]]).collect();
        assert!((w2_assignment(&mu, &shifted).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn assignment_refuses_oversize_and_mismatch() {
        let a = vec![vec![0.0]; 3];
        let b = vec![vec![0.0]; 4];
        assert!(w2_assignment(&a, &b).is_err());
        let big = vec![vec![0.0]; ASSIGNMENT_MAX + 1];
        assert!(w2_assignment(&big, &big).is_err());
    }

    fn brute_force_w2(mu: &[Vec<f64>], nu: &[Vec<f64>]) -> f64 {
        fn perms(n: usize) -> Vec<Vec<usize>> {
            if n == 1 {
                return vec![vec![0]];
            }
            let mut out = Vec::new();
            for p in perms(n - 1) {
                for slot in 0..n {
                    let mut q: Vec<usize> = p.iter().map(|&v| if v >= slot { v + 1 } else { v }).collect();
                    q.push(slot);
                    out.push(q);
                }
            }
            out
        }
        let n = mu.len();
        let best = perms(n)
            .into_iter()
            .map(|p| {
                (0..n)
                    .map(|i| {
                        mu[i]
                            .iter()
                            .zip(&nu[p[i]])
                            .map(|(a, b)| (a - b) * (a - b))
                            .sum::<f64>()
                    })
                    .sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min);
        (best / n as f64).sqrt()
    }

    #[test]
    fn assignment_matches_brute_force() {
        let mut rng = crate::rng::rng(41, &[99]);
        for n in 1..=7usize {
            for d in [1usize, 2, 3] {
                let draw = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<Vec<f64>> {
                    (0..n)
                        .map(|_| (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
                        .collect()
                };
                let mu = draw(&mut rng);
                let nu = draw(&mut rng);
                let fast = w2_assignment(&mu, &nu).unwrap();
                let slow = brute_force_w2(&mu, &nu);
                assert!((fast - slow).abs() < 1e-10, "n={n} d={d}: {fast} vs {slow}");
            }
        }
    }

    #[test]
    fn assignment_agrees_with_sorted_coupling_on_line() {
        let mut rng = crate::rng::rng(42, &[98]);
        for n in [1usize, 2, 5, 33, 64] {
            let xs: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let ys: Vec<f64> = (0..n).map(|_| 0.5 + rng.sample::<f64, _>(StandardNormal)).collect();
            let cloud = |v: &[f64]| v.iter().map(|&x| vec![x]).collect::<Vec<_>>();
            let a = w2_assignment(&cloud(&xs), &cloud(&ys)).unwrap();
            let b = w2_empirical_1d(&xs, &ys).unwrap();
            assert!((a - b).abs() < 1e-12, "n={n}: {a} vs {b}");
        }
    }

    #[test]
    fn empirical_vs_gaussian_hand_values() {
        // Single atom at 0 against N(m, s²): W₂² = m² + s².
        let d = w2_empirical_gaussian_1d(&[0.0], 1.5, 2.0).unwrap();
        assert!((d - (1.5f64 * 1.5 + 4.0).sqrt()).abs() < 1e-12, "{d}");
        // Atoms at ±1 against N(0,1): W₂² = 2 − 4/√(2π).
        let d = w2_empirical_gaussian_1d(&[-1.0, 1.0], 0.0, 1.0).unwrap();
        let want = (2.0 - 4.0 / (2.0 * std::f64::consts::PI).sqrt()).sqrt();
        assert!((d - want).abs() < 1e-12, "{d} vs {want}");
    }

    #[test]
    fn empirical_vs_gaussian_shrinks_with_sample_size() {
        let mut rng = crate::rng::rng(7, &[55]);
        let xs: Vec<f64> = (0..100_000)
            .map(|_| 0.3 + 1.7 * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let d = w2_empirical_gaussian_1d(&xs, 0.3, 1.7).unwrap();
        assert!(d < 0.03, "distance {d} too large for 1e5 samples");
        // Against the wrong mean the gap must dominate.
        let off = w2_empirical_gaussian_1d(&xs, 1.3, 1.7).unwrap();
        assert!((off - 1.0).abs() < 0.05, "{off}");
    }

    #[test]
    fn two_sample_consistency_against_known_shift() {
        let mut rng = crate::rng::rng(8, &[56]);
        let xs: Vec<f64> = (0..10_000).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let ys: Vec<f64> = (0..10_000)
            .map(|_| 1.0 + rng.sample::<f64, _>(StandardNormal))
            .collect();
        let d = w2_empirical_1d(&xs, &ys).unwrap();
        assert!((d - 1.0).abs() < 0.03, "{d}");
    }

    #[test]
    fn norm_moment_hand_values() {
        assert_eq!(gaussian_norm_moment(1, 1), (1.0, 4.0));
        let (e, b) = gaussian_norm_moment(2, 2);
        assert_eq!(e, 8.0);
        assert_eq!(b, 512.0);
        assert_eq!(gaussian_norm_moment(3, 1).0, 3.0);
        assert_eq!(gaussian_norm_moment(3, 1).1, 12.0);
        // Gamma-function route agrees with the product form.
        for d in 1..=10usize {
            for r in 1..=6u32 {
                let (exact, _) = gaussian_norm_moment(d, r);
                let via_gamma = gaussian_norm_moment_general(d, 2.0 * r as f64);
                assert!(
                    (exact - via_gamma).abs() <= 1e-10 * exact,
                    "d={d} r={r}: {exact} vs {via_gamma}"
                );
            }
        }
    }

    #[test]
    fn norm_moment_matches_monte_carlo() {
        let mut rng = crate::rng::rng(12, &[77]);
        for (d, r) in [(2usize, 2u32), (5, 3)] {
            let n = 200_000;
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            for _ in 0..n {
                let sq: f64 = (0..d)
                    .map(|_| {
                        let z: f64 = rng.sample(StandardNormal);
                        z * z
                    })
                    .sum();
                let v = sq.powi(r as i32);
                sum += v;
                sumsq += v * v;
            }
            let mean = sum / n as f64;
            let se = ((sumsq / n as f64 - mean * mean) / n as f64).sqrt();
            let (exact, _) = gaussian_norm_moment(d, r);
            assert!(
                (mean - exact).abs() <= 3.0 * se,
                "d={d} r={r}: {mean} vs {exact} (se {se})"
            );
        }
    }

    #[test]
    fn cross_term_bound_hand_cases() {
        // y = 0: both sides collapse to ‖x‖^{2p}.
        let (lhs, rhs, pass) = multinomial_inequality_check(&[2.0, 1.0], &[0.0, 0.0], 3).unwrap();
        let norm_sq = 5.0f64;
        assert!((lhs - norm_sq.powi(3)).abs() < 1e-9);
        assert!((rhs - norm_sq.powi(3)).abs() < 1e-9);
        assert!(pass);
        // Anti-parallel vectors exercise negative cross terms.
        let (lhs, rhs, pass) = multinomial_inequality_check(&[1.0], &[-1.0], 2).unwrap();
        assert!(pass, "lhs {lhs} rhs {rhs}");
    }

    #[test]
    fn cross_term_bound_random_scan() {
        let mut rng = crate::rng::rng(13, &[78]);
        for trial in 0..1000 {
            let d = 1 + (trial % 4);
            let p = 1 + (trial % 4) as u32;
            let x: Vec<f64> = (0..d).map(|_| 3.0 * rng.sample::<f64, _>(StandardNormal)).collect();
            let y: Vec<f64> = (0..d).map(|_| 3.0 * rng.sample::<f64, _>(StandardNormal)).collect();
            let (lhs, rhs, pass) = multinomial_inequality_check(&x, &y, p).unwrap();
            assert!(pass, "trial {trial}: lhs {lhs} rhs {rhs}");
        }
    }

    proptest! {
        #[test]
        fn assignment_is_a_metric(
            pts in proptest::collection::vec(
                proptest::collection::vec(-5.0f64..5.0, 2),
                12,
            )
        ) {
            let a: Vec<Vec<f64>> = pts[0..4].to_vec();
            let b: Vec<Vec<f64>> = pts[4..8].to_vec();
            let c: Vec<Vec<f64>> = pts[8..12].to_vec();
            let dab = w2_assignment(&a, &b).unwrap();
            let dba = w2_assignment(&b, &a).unwrap();
            let dac = w2_assignment(&a, &c).unwrap();
            let dcb = w2_assignment(&c, &b).unwrap();
            prop_assert!((dab - dba).abs() < 1e-12);
            prop_assert!(dab <= dac + dcb + 1e-9);
            prop_assert!((w2_assignment(&a, &a).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn line_distance_translation_covariant(
            xs in proptest::collection::vec(-10.0f64..10.0, 1..20),
            ys in proptest::collection::vec(-10.0f64..10.0, 1..20),
            shift in -5.0f64..5.0,
        ) {
            let shifted: Vec<f64> = xs.iter().map(|x| x + shift).collect();
            let base = w2_empirical_1d(&xs, &ys).unwrap();
            let moved = w2_empirical_1d(&shifted, &ys).unwrap();
            // |W₂(μ+s, ν) − W₂(μ, ν)| ≤ |s|.
            prop_assert!((moved - base).abs() <= shift.abs() + 1e-9);
        }
    }
}

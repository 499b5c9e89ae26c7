//! Gaussian quadrature via the Golub-Welsch connection: nodes are the
//! eigenvalues of the Jacobi matrix of the orthogonal-polynomial recurrence,
//! weights come from the first components of its eigenvectors. The
//! tridiagonal eigensolver is the classic implicit-shift QL sweep, tracking
//! only the first eigenvector row, so everything is deterministic and free of
//! external solver dependencies.

use crate::error::{Error, Result};

/// Eigenvalues (ascending) and first components of the orthonormal
/// eigenvectors of the symmetric tridiagonal matrix with the given diagonal
/// and off-diagonal.
pub fn symmetric_tridiagonal_eigen(diag: &[f64], off: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = diag.len();
    assert_eq!(off.len(), n.saturating_sub(1));
    let mut d = diag.to_vec();
    let mut e = vec![0.0f64; n];
    e[..n - 1].copy_from_slice(off);
    let mut z0 = vec![0.0f64; n];
    z0[0] = 1.0;

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::Numerical("QL iteration did not converge".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0f64, 1.0f64);
            let mut p = 0.0f64;
            let mut degenerate = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    degenerate = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                f = z0[i + 1];
                z0[i + 1] = s * z0[i] + c * f;
                z0[i] = c * z0[i] - s * f;
            }
            if degenerate {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let vals = order.iter().map(|&i| d[i]).collect();
    let firsts = order.iter().map(|&i| z0[i]).collect();
    Ok((vals, firsts))
}

/// Gauss-Hermite rule for weight exp(-x^2) on the real line; weights sum to
/// sqrt(pi).
pub fn gauss_hermite(order: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    assert!(order >= 1);
    let diag = vec![0.0; order];
    let off: Vec<f64> = (1..order).map(|i| (i as f64 / 2.0).sqrt()).collect();
    let (nodes, firsts) = symmetric_tridiagonal_eigen(&diag, &off)?;
    let mu0 = std::f64::consts::PI.sqrt();
    let weights = firsts.iter().map(|z| mu0 * z * z).collect();
    Ok((nodes, weights))
}

/// Nodes and probability weights for expectations against a standard normal:
/// E f(Z) ~= sum_i p_i f(x_i), probabilities summing to 1.
pub fn normal_expectation_rule(order: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let diag = vec![0.0; order];
    let off: Vec<f64> = (1..order).map(|i| (i as f64 / 2.0).sqrt()).collect();
    let (nodes, firsts) = symmetric_tridiagonal_eigen(&diag, &off)?;
    let points = nodes.iter().map(|t| std::f64::consts::SQRT_2 * t).collect();
    let probs = firsts.iter().map(|z| z * z).collect();
    Ok((points, probs))
}

/// Generalized Gauss-Laguerre rule for weight x^alpha exp(-x) on (0, inf),
/// with the weights normalized to probabilities (divided by Gamma(alpha+1)),
/// i.e. an expectation rule for the Gamma(alpha+1, 1) density.
pub fn gamma_expectation_rule(order: usize, alpha: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    assert!(order >= 1);
    if alpha <= -1.0 {
        return Err(Error::Numerical(format!(
            "Laguerre parameter must exceed -1, got {}",
            alpha
        )));
    }
    let diag: Vec<f64> = (0..order).map(|i| 2.0 * i as f64 + alpha + 1.0).collect();
    let off: Vec<f64> = (1..order)
        .map(|i| ((i as f64) * (i as f64 + alpha)).sqrt())
        .collect();
    let (nodes, firsts) = symmetric_tridiagonal_eigen(&diag, &off)?;
    let probs = firsts.iter().map(|z| z * z).collect();
    Ok((nodes, probs))
}

/// Expectation rule for a chi-square with `dof` degrees of freedom (dof may
/// be fractional but must be positive): E f(X) ~= sum_i p_i f(x_i).
pub fn chi2_expectation_rule(order: usize, dof: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if dof <= 0.0 {
        return Err(Error::Numerical(format!("chi-square dof must be positive, got {}", dof)));
    }
    // X = 2T with T ~ Gamma(dof/2, 1).
    let (nodes, probs) = gamma_expectation_rule(order, dof / 2.0 - 1.0)?;
    Ok((nodes.iter().map(|t| 2.0 * t).collect(), probs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::gamma;

    #[test]
    fn hermite_moments_exact() {
        let (nodes, weights) = gauss_hermite(64).unwrap();
        let total: f64 = weights.iter().sum();
        assert!((total - std::f64::consts::PI.sqrt()).abs() < 1e-12);
        // Even moments of exp(-x^2): Gamma((k+1)/2).
        for k in [0usize, 2, 4, 8, 16] {
            let got: f64 = nodes
                .iter()
                .zip(&weights)
                .map(|(x, w)| w * x.powi(k as i32))
                .sum();
            let expect = gamma((k as f64 + 1.0) / 2.0);
            assert!(
                (got - expect).abs() / expect < 1e-10,
                "moment {}: {} vs {}",
                k,
                got,
                expect
            );
        }
        // Odd moments vanish by symmetry.
        let odd: f64 = nodes.iter().zip(&weights).map(|(x, w)| w * x.powi(7)).sum();
        assert!(odd.abs() < 1e-10);
    }

    #[test]
    fn hermite_transcendental() {
        let (nodes, weights) = gauss_hermite(64).unwrap();
        let got: f64 = nodes.iter().zip(&weights).map(|(x, w)| w * x.cos()).sum();
        let expect = std::f64::consts::PI.sqrt() * (-0.25f64).exp();
        assert!((got - expect).abs() < 1e-12);
    }

    #[test]
    fn normal_rule_probabilities() {
        let (points, probs) = normal_expectation_rule(64).unwrap();
        let total: f64 = probs.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        let m2: f64 = points.iter().zip(&probs).map(|(x, p)| p * x * x).sum();
        let m4: f64 = points.iter().zip(&probs).map(|(x, p)| p * x.powi(4)).sum();
        assert!((m2 - 1.0).abs() < 1e-10);
        assert!((m4 - 3.0).abs() < 1e-9);
    }

    #[test]
    fn laguerre_moments_exact() {
        for alpha in [0.0, 0.5, 2.0, 7.5] {
            let (nodes, probs) = gamma_expectation_rule(64, alpha).unwrap();
            let total: f64 = probs.iter().sum();
            assert!((total - 1.0).abs() < 1e-11, "alpha {}", alpha);
            // Gamma(alpha+1+k)/Gamma(alpha+1) moments.
            for k in [1usize, 2, 5] {
                let got: f64 = nodes
                    .iter()
                    .zip(&probs)
                    .map(|(x, p)| p * x.powi(k as i32))
                    .sum();
                let expect = gamma(alpha + 1.0 + k as f64) / gamma(alpha + 1.0);
                assert!(
                    (got - expect).abs() / expect < 1e-9,
                    "alpha {} k {}: {} vs {}",
                    alpha,
                    k,
                    got,
                    expect
                );
            }
        }
    }

    #[test]
    fn chi2_rule_moments() {
        for dof in [1.0f64, 2.0, 3.0, 8.0, 64.0, 255.0] {
            let (nodes, probs) = chi2_expectation_rule(64, dof).unwrap();
            let m1: f64 = nodes.iter().zip(&probs).map(|(x, p)| p * x).sum();
            let m2: f64 = nodes.iter().zip(&probs).map(|(x, p)| p * x * x).sum();
            assert!((m1 - dof).abs() / dof < 1e-10, "dof {}", dof);
            assert!(
                (m2 - dof * (dof + 2.0)).abs() / (dof * (dof + 2.0)) < 1e-9,
                "dof {}",
                dof
            );
        }
    }

    #[test]
    fn chi2_laplace_transform() {
        // E[(1+2t)^(-k/2)] is exp of the chi-square log-MGF at -t.
        let dof = 6.0;
        let t = 0.37;
        let (nodes, probs) = chi2_expectation_rule(64, dof).unwrap();
        let got: f64 = nodes
            .iter()
            .zip(&probs)
            .map(|(x, p)| p * (-t * x).exp())
            .sum();
        let expect = (1.0 + 2.0 * t).powf(-dof / 2.0);
        assert!((got - expect).abs() / expect < 1e-10);
    }
}

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::cg::conjugate_gradient;
use crate::sparse::{dot, norm2, CsrMatrix};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct EigenOptions {
    /// Stop when `‖Av − λMv‖/‖Mv‖ ≤ eig_tol`.
    pub eig_tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// Null-space candidates to project out.
    pub deflate: Vec<Vec<f64>>,
    /// Relative tolerance of the inner shifted solves.
    pub inner_tol: f64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            eig_tol: 1e-8,
            max_iter: 20_000,
            seed: 0,
            deflate: Vec::new(),
            inner_tol: 1e-12,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoercivityReport {
    /// Smallest generalized eigenvalue of `(A, M)`, clamped at zero.
    pub lambda_min: f64,
    pub iterations: usize,
    /// `‖Av − λMv‖/‖Mv‖`.
    pub residual: f64,
    pub converged: bool,
    /// The eigenvector estimate, `M`-normalized.
    pub vector: Vec<f64>,
    /// Shift `σ` used for the inner solves of `(A + σM)`.
    pub shift: f64,
}

fn m_dot(m: &[f64], a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).zip(m).map(|((a, b), m)| a * m * b).sum()
}

/// `M`-orthonormalizes the candidates by modified Gram–Schmidt, dropping
/// dependent ones.
fn orthonormal_basis(m: &[f64], candidates: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for c in candidates {
        let mut v = c.clone();
        let n0 = m_dot(m, &v, &v).sqrt();
        for q in &basis {
            let s = m_dot(m, q, &v);
            v.iter_mut().zip(q).for_each(|(v, q)| *v -= s * q);
        }
        let n = m_dot(m, &v, &v).sqrt();
        if n > 1e-10 * n0.max(f64::MIN_POSITIVE) {
            v.iter_mut().for_each(|x| *x /= n);
            basis.push(v);
        }
    }
    basis
}

fn project_out(m: &[f64], basis: &[Vec<f64>], v: &mut [f64]) {
    for q in basis {
        let s = m_dot(m, q, v);
        v.iter_mut().zip(q).for_each(|(v, q)| *v -= s * q);
    }
}

/// Smallest generalized eigenvalue of `(A, M)` by inverse power iteration on
/// `A + σM` with `σ = 1e−8·ρ(M⁻¹A)` and conjugate-gradient inner solves.
pub fn coercivity_estimate(a: &CsrMatrix, m: &[f64], opts: &EigenOptions) -> Result<CoercivityReport> {
    let n = a.n();
    if m.len() != n {
        return Err(Error::DofMismatch {
            expected: n,
            got: m.len(),
        });
    }
    if m.iter().any(|&w| !(w > 0.0)) {
        return Err(Error::InvalidParameter("mass matrix must be positive".into()));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("empty system".into()));
    }
    let sigma = 1e-8 * a.gershgorin_scaled(m).max(f64::MIN_POSITIVE);
    let shifted = |x: &[f64]| -> Vec<f64> {
        let mut y = a.matvec(x);
        y.iter_mut().zip(x).zip(m).for_each(|((y, x), m)| *y += sigma * m * x);
        y
    };
    let inv_diag: Vec<f64> = a.diag().iter().zip(m).map(|(d, m)| 1.0 / (d + sigma * m)).collect();
    let basis = orthonormal_basis(m, &opts.deflate);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    project_out(m, &basis, &mut v);
    let nv = m_dot(m, &v, &v).sqrt();
    if !(nv > 0.0) {
        return Err(Error::InvalidParameter("deflation space spans the whole system".into()));
    }
    v.iter_mut().for_each(|x| *x /= nv);

    let mut lambda = 0.0;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        let rhs: Vec<f64> = v.iter().zip(m).map(|(v, m)| v * m).collect();
        let scale = norm2(&rhs);
        let rhs_scaled: Vec<f64> = rhs.iter().map(|x| x / scale).collect();
        let solve = conjugate_gradient(
            shifted,
            &rhs_scaled,
            Some(&inv_diag),
            None,
            opts.inner_tol,
            10 * n + 100,
        )?;
        let mut w = solve.x;
        project_out(m, &basis, &mut w);
        let nw = m_dot(m, &w, &w).sqrt();
        if !(nw > 0.0) || !nw.is_finite() {
            return Err(Error::NonFinite("inverse iteration"));
        }
        w.iter_mut().for_each(|x| *x /= nw);
        v = w;
        iterations += 1;

        let av = a.matvec(&v);
        lambda = dot(&v, &av).max(0.0);
        let mv: Vec<f64> = v.iter().zip(m).map(|(v, m)| v * m).collect();
        let r: Vec<f64> = av.iter().zip(&mv).map(|(a, b)| a - lambda * b).collect();
        residual = norm2(&r) / norm2(&mv);
        if residual <= opts.eig_tol {
            converged = true;
            break;
        }
    }
    Ok(CoercivityReport {
        lambda_min: lambda,
        iterations,
        residual,
        converged,
        vector: v,
        shift: sigma,
    })
}

/// All generalized eigenpairs of `(A, M)` in ascending order, computed
/// densely from `M^{−1/2} A M^{−1/2}`. Eigenvectors are returned in the
/// original coordinates, `M`-orthonormal, one per column.
pub fn dense_generalized_eigen(a: &CsrMatrix, m: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = a.n();
    if n > 4000 {
        return Err(Error::DenseTooLarge(n));
    }
    let s: Vec<f64> = m.iter().map(|w| 1.0 / w.sqrt()).collect();
    let mut b = a.to_dense();
    for i in 0..n {
        for j in 0..n {
            b[(i, j)] *= s[i] * s[j];
        }
    }
    // exact symmetry for the symmetric solver
    for i in 0..n {
        for j in i + 1..n {
            let v = 0.5 * (b[(i, j)] + b[(j, i)]);
            b[(i, j)] = v;
            b[(j, i)] = v;
        }
    }
    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        for r in 0..n {
            vectors[(r, col)] = eig.eigenvectors[(r, i)] * s[r];
        }
    }
    Ok((values, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(v: &[f64]) -> CsrMatrix {
        CsrMatrix::from_triplets(v.len(), v.iter().enumerate().map(|(i, &x)| (i, i, x)).collect())
    }

    #[test]
    fn diagonal_system() {
        let a = diag(&[1.0, 2.0, 3.0]);
        let r = coercivity_estimate(&a, &[1.0; 3], &EigenOptions::default()).unwrap();
        assert!(r.converged);
        assert!((r.lambda_min - 1.0).abs() < 1e-10, "{}", r.lambda_min);
    }

    #[test]
    fn deflation_skips_known_modes() {
        let a = diag(&[0.0, 2.0, 3.0]);
        let opts = EigenOptions {
            deflate: vec![vec![1.0, 0.0, 0.0]],
            ..EigenOptions::default()
        };
        let r = coercivity_estimate(&a, &[1.0; 3], &opts).unwrap();
        assert!((r.lambda_min - 2.0).abs() < 1e-10);
    }

    #[test]
    fn singular_without_deflation_reports_near_zero() {
        let a = diag(&[0.0, 2.0, 3.0]);
        let r = coercivity_estimate(&a, &[1.0; 3], &EigenOptions::default()).unwrap();
        assert!(r.lambda_min <= 1e-12);
        assert!(r.vector[0].abs() > 0.99);
    }

    #[test]
    fn dense_matches_generalized_problem() {
        let a = CsrMatrix::from_triplets(2, vec![(0, 0, 2.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, 2.0)]);
        let m = [1.0, 4.0];
        let (vals, vecs) = dense_generalized_eigen(&a, &m).unwrap();
        for k in 0..2 {
            let v = vecs.column(k);
            let av = a.matvec(v.as_slice());
            for i in 0..2 {
                assert!((av[i] - vals[k] * m[i] * v[i]).abs() < 1e-12);
            }
        }
        assert!(vals[0] <= vals[1]);
    }
}

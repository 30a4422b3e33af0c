use std::time::Instant;

use super::{Precond, SolveOptions, SolveReport};
use crate::assembly::QuadraticSystem;
use crate::model::Field;
use crate::sparse::{dot, norm2};
use crate::{Error, Result};

/// Outcome of a raw conjugate-gradient run.
#[derive(Clone, Debug)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
    /// `½xᵀAx − bᵀx` after each iteration, starting with the initial guess.
    pub trace: Vec<f64>,
}

const TRUE_RESIDUAL_EVERY: usize = 50;

/// Solves `Ax = b` for a symmetric positive semidefinite operator given by
/// `apply`, optionally preconditioned by the inverse diagonal `inv_diag`.
/// Convergence is declared on the true residual `‖b − Ax‖/max(‖b‖, 1)`.
pub fn conjugate_gradient<F>(
    apply: F,
    b: &[f64],
    inv_diag: Option<&[f64]>,
    x0: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
) -> Result<CgOutcome>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = b.len();
    let scale = norm2(b).max(1.0);
    let mut x = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    let precondition = |r: &[f64]| -> Vec<f64> {
        match inv_diag {
            Some(d) => r.iter().zip(d).map(|(r, d)| r * d).collect(),
            None => r.to_vec(),
        }
    };
    let residual = |x: &[f64]| -> Vec<f64> {
        let ax = apply(x);
        b.iter().zip(&ax).map(|(b, a)| b - a).collect()
    };
    let mut r = residual(&x);
    let mut q = {
        let ax: Vec<f64> = b.iter().zip(&r).map(|(b, r)| b - r).collect();
        0.5 * dot(&x, &ax) - dot(b, &x)
    };
    let mut trace = vec![q];
    let mut z = precondition(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut iterations = 0;
    let mut rel = norm2(&r) / scale;
    loop {
        if !rel.is_finite() || !q.is_finite() {
            return Err(Error::NonFinite("conjugate gradient"));
        }
        if rel <= tol {
            let true_r = residual(&x);
            let true_rel = norm2(&true_r) / scale;
            if true_rel <= tol {
                return Ok(CgOutcome {
                    x,
                    iterations,
                    relative_residual: true_rel,
                    converged: true,
                    trace,
                });
            }
            r = true_r;
            z = precondition(&r);
            p = z.clone();
            rz = dot(&r, &z);
        }
        if iterations >= max_iter {
            break;
        }
        let ap = apply(&p);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) || !(rz > 0.0) {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        q -= 0.5 * alpha * rz;
        trace.push(q);
        iterations += 1;
        if iterations % TRUE_RESIDUAL_EVERY == 0 {
            r = residual(&x);
        }
        z = precondition(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        rel = norm2(&r) / scale;
    }
    let rel = norm2(&residual(&x)) / scale;
    Ok(CgOutcome {
        x,
        iterations,
        relative_residual: rel,
        converged: rel <= tol,
        trace,
    })
}

/// Minimizes `½uᵀAu − bᵀu + offset` by conjugate gradients.
pub fn minimize_quadratic(system: &QuadraticSystem, opts: &SolveOptions) -> Result<(Field, SolveReport)> {
    let start = Instant::now();
    let inv_diag: Option<Vec<f64>> = match opts.precond {
        Precond::None => None,
        Precond::Jacobi => Some(
            system
                .a
                .diag()
                .iter()
                .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
                .collect(),
        ),
    };
    if system.b.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("load vector"));
    }
    let out = conjugate_gradient(
        |x| system.a.matvec(x),
        &system.b,
        inv_diag.as_deref(),
        None,
        opts.tol,
        opts.max_iter,
    )?;
    let report = SolveReport {
        iterations: out.iterations,
        relative_residual: out.relative_residual,
        energy: system.energy(&out.x),
        wall_time: start.elapsed().as_secs_f64(),
        converged: out.converged,
        energy_trace: out.trace.iter().map(|q| q + system.offset).collect(),
        steps: Vec::new(),
    };
    let field = Field::new(out.x);
    if report.converged {
        Ok((field, report))
    } else {
        Err(Error::NotConverged {
            report: Box::new(report),
            field: Box::new(field),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Constraints, DofMap};
    use crate::sparse::CsrMatrix;
    use crate::{GridDomain, Label};

    fn system_from(a: CsrMatrix, b: Vec<f64>) -> QuadraticSystem {
        let n = b.len();
        let g = GridDomain::from_labels(1, &[(0.0, n as f64)], 1.0, &vec![Label::Nonlocal; n], 0).unwrap();
        QuadraticSystem {
            a,
            mass: vec![1.0; n],
            dofmap: DofMap::build(&g, 1, Constraints::default()),
            b,
            offset: 0.0,
        }
    }

    #[test]
    fn identity_system() {
        let a = CsrMatrix::from_triplets(3, (0..3).map(|i| (i, i, 1.0)).collect());
        let s = system_from(a, vec![1.0, 0.0, 0.0]);
        let (u, rep) = minimize_quadratic(&s, &SolveOptions::default()).unwrap();
        assert_eq!(u.values, vec![1.0, 0.0, 0.0]);
        assert!(rep.converged);
        assert_eq!(rep.energy, -0.5);
    }

    #[test]
    fn manufactured_solution_and_monotone_energy() {
        let n = 40;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0 + 0.01 * i as f64));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let a = CsrMatrix::from_triplets(n, t);
        let ustar: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let b = a.matvec(&ustar);
        let s = system_from(a, b);
        for precond in [Precond::None, Precond::Jacobi] {
            let opts = SolveOptions {
                precond,
                ..SolveOptions::default()
            };
            let (u, rep) = minimize_quadratic(&s, &opts).unwrap();
            for (x, y) in u.values.iter().zip(&ustar) {
                assert!((x - y).abs() < 1e-8);
            }
            assert!(rep.energy_trace.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn singular_system_reports_non_convergence() {
        let a = CsrMatrix::from_triplets(2, vec![(0, 0, 1.0)]);
        let s = system_from(a, vec![0.0, 1.0]);
        let opts = SolveOptions {
            max_iter: 10,
            ..SolveOptions::default()
        };
        assert!(matches!(minimize_quadratic(&s, &opts), Err(Error::NotConverged { .. })));
    }
}

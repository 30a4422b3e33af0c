//! Euler–Lagrange residuals, finite-difference gradient checks and null-space
//! characterization.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::assembly::QuadraticSystem;
use crate::geometry::{extract_gamma, GridDomain, Label};
use crate::model::{Field, Model, Node};
use crate::solvers::eigen::{coercivity_estimate, dense_generalized_eigen, EigenOptions};
use crate::sparse::{norm2, CsrMatrix};
use crate::{Error, Result};

/// A named check with its measured value and threshold.
#[derive(Clone, Debug, PartialEq)]
pub struct VerificationRecord {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl VerificationRecord {
    /// Passes when `value ≤ threshold`.
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        VerificationRecord {
            name: name.into(),
            value,
            threshold,
            pass: value <= threshold,
        }
    }

    /// Passes when `value ≥ threshold`.
    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        VerificationRecord {
            name: name.into(),
            value,
            threshold,
            pass: value >= threshold,
        }
    }
}

impl fmt::Display for VerificationRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} value={} threshold={} {}",
            self.name,
            self.value,
            self.threshold,
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

/// Largest relative mismatch between the analytic directional derivative
/// `∇E(u)·d` and the central difference `(E(u+h d) − E(u−h d))/2h` over
/// `probes` random unit directions, measured against `max(|∇E·d|, ‖∇E‖)`.
pub fn gradient_check<E, G>(energy: E, gradient: G, u: &[f64], probes: usize, h_fd: f64, seed: u64) -> f64
where
    E: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    let n = u.len();
    let g = gradient(u);
    let gnorm = norm2(&g);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..probes.max(1) {
        let mut d: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let nd = norm2(&d);
        if nd == 0.0 {
            continue;
        }
        d.iter_mut().for_each(|x| *x /= nd);
        let up: Vec<f64> = u.iter().zip(&d).map(|(u, d)| u + h_fd * d).collect();
        let um: Vec<f64> = u.iter().zip(&d).map(|(u, d)| u - h_fd * d).collect();
        let fd = (energy(&up) - energy(&um)) / (2.0 * h_fd);
        let an: f64 = g.iter().zip(&d).map(|(g, d)| g * d).sum();
        let scale = an.abs().max(gnorm);
        let err = (fd - an).abs();
        worst = worst.max(if scale > 0.0 { err / scale } else { err });
    }
    worst
}

/// [`gradient_check`] for `½uᵀAu − bᵀu + offset` with gradient `Au − b`.
pub fn gradient_check_quadratic(system: &QuadraticSystem, u: &[f64], probes: usize, h_fd: f64, seed: u64) -> f64 {
    gradient_check(|x| system.energy(x), |x| system.gradient(x), u, probes, h_fd, seed)
}

/// Maximum and L² norms of a residual restricted to one region.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RegionNorms {
    pub max: f64,
    pub l2: f64,
    pub count: usize,
}

impl RegionNorms {
    fn push(&mut self, v: f64, weight: f64) {
        self.max = self.max.max(v.abs());
        self.l2 += v * v * weight;
        self.count += 1;
    }

    fn finish(mut self) -> Self {
        self.l2 = self.l2.sqrt();
        self
    }
}

/// Residuals of the discrete Euler–Lagrange system.
#[derive(Clone, Debug, PartialEq)]
pub struct ElResidual {
    /// `‖Au − b‖/max(‖b‖, 1)`.
    pub weak_relative: f64,
    /// Rows of `Au − b` at local vertices.
    pub weak_local: RegionNorms,
    /// Rows of `Au − b` at nonlocal cells.
    pub weak_nonlocal: RegionNorms,
    /// `(Au − b)/h^N` at nonlocal cells: the pointwise nonlocal equation.
    pub strong_nonlocal: RegionNorms,
    /// Flux balance on Γ for the flux models (L² weighted by facet measure).
    pub gamma: Option<RegionNorms>,
    /// As `gamma`, restricted to facets farther than one horizon from the
    /// outer boundary, where the discrete solution is free of corner layers.
    pub gamma_interior: Option<RegionNorms>,
    /// Flux-balance magnitude per facet, in the order of [`extract_gamma`].
    pub gamma_facets: Vec<f64>,
}

/// Evaluates the weak residual `Au − b` per region and, for flux models, the
/// strong interface condition on every facet of Γ.
pub fn el_residual(grid: &GridDomain, model: &Model, system: &QuadraticSystem, u: &Field) -> Result<ElResidual> {
    u.check(&system.dofmap)?;
    let dofmap = &system.dofmap;
    let r = system.gradient(&u.values);
    let mut weak_local = RegionNorms::default();
    let mut weak_nonlocal = RegionNorms::default();
    let mut strong_nonlocal = RegionNorms::default();
    let vol = grid.cell_volume();
    for (k, node) in dofmap.nodes().iter().enumerate() {
        for i in 0..dofmap.block() {
            let v = r[dofmap.dof(k, i)];
            match node {
                Node::Vertex(_) => weak_local.push(v, 1.0),
                Node::Cell(_) => {
                    weak_nonlocal.push(v, 1.0);
                    strong_nonlocal.push(v / vol, vol);
                }
            }
        }
    }
    let (gamma, gamma_interior, gamma_facets) = if model.kind.is_flux() {
        let per = gamma_residual(grid, model, system, &u.values)?;
        let mut all = RegionNorms::default();
        let mut inner = RegionNorms::default();
        for &(r, measure, interior) in &per {
            all.push(r, measure);
            if interior {
                inner.push(r, measure);
            }
        }
        (
            Some(all.finish()),
            Some(inner.finish()),
            per.into_iter().map(|(r, _, _)| r).collect(),
        )
    } else {
        (None, None, Vec::new())
    };
    Ok(ElResidual {
        weak_relative: norm2(&r) / norm2(&system.b).max(1.0),
        weak_local: weak_local.finish(),
        weak_nonlocal: weak_nonlocal.finish(),
        strong_nonlocal: strong_nonlocal.finish(),
        gamma,
        gamma_interior,
        gamma_facets,
    })
}

fn gamma_residual(
    grid: &GridDomain,
    model: &Model,
    system: &QuadraticSystem,
    u: &[f64],
) -> Result<Vec<(f64, f64, bool)>> {
    let g = model
        .gkernel
        .ok_or_else(|| Error::InvalidParameter("flux model without surface kernel".into()))?;
    let dofmap = &system.dofmap;
    let dim = grid.dim();
    let block = dofmap.block();
    let h = grid.h();
    let vertex_value = |v: usize, i: usize| match dofmap.vertex_node(v) {
        Some(k) => u[dofmap.dof(k, i)],
        None => model.exterior.value(&grid.vertex_coords(v), dim, i),
    };
    let horizon = model.kernel.rho.max(g.rho);
    let bbox = grid.bbox();
    let mut out = Vec::new();
    for f in extract_gamma(grid).iter() {
        let interior = (0..dim).all(|d| f.center[d] - bbox[d].0 > horizon && bbox[d].1 - f.center[d] > horizon);
        // Q1 gradient of the owning cell at the facet center: grad[i][k] = ∂_k U_i
        let verts = grid.cell_vertices(f.cell);
        let mut grad = [[0.0; 2]; 2];
        for k in 0..dim {
            for (a, &v) in verts.iter().enumerate() {
                let mut w = if (a >> k) & 1 == 1 { 1.0 / h } else { -1.0 / h };
                for m in 0..dim {
                    if m == k {
                        continue;
                    }
                    let bit = (a >> m) & 1;
                    let t = if m == f.axis {
                        if f.side > 0 {
                            1.0
                        } else {
                            0.0
                        }
                    } else {
                        0.5
                    };
                    w *= if bit == 1 { t } else { 1.0 - t };
                }
                for i in 0..block {
                    grad[i][k] += w * vertex_value(v, i);
                }
            }
        }
        let trace: Vec<f64> = (0..block)
            .map(|i| f.vertices.iter().map(|&v| vertex_value(v, i)).sum::<f64>() / f.vertices.len() as f64)
            .collect();
        let mut flux = [0.0; 2];
        for c in grid.cells_with(Label::Nonlocal) {
            let z = grid.displacement(grid.cell_half_index(c), f.half_index);
            let gv = g.eval(&z[..dim]);
            if gv == 0.0 {
                continue;
            }
            let node = dofmap.cell_node(c).unwrap();
            let w = gv * grid.cell_volume();
            if model.kind.is_elastic() {
                let proj: f64 = (0..dim).map(|d| z[d] * (u[dofmap.dof(node, d)] - trace[d])).sum();
                for d in 0..dim {
                    flux[d] += w * z[d] * proj;
                }
            } else {
                flux[0] += w * (u[dofmap.dof(node, 0)] - trace[0]);
            }
        }
        let mut res2 = 0.0;
        if model.kind.is_elastic() {
            let (mu, lambda) = (model.elastic.mu, model.elastic.lambda);
            let div: f64 = (0..dim).map(|i| grad[i][i]).sum();
            for i in 0..dim {
                // (σ η)_i with σ = 2μ E(U) + λ div U I and η = side·e_axis
                let k = f.axis;
                let mut s = mu * (grad[i][k] + grad[k][i]);
                if i == k {
                    s += lambda * div;
                }
                let t = f.side as f64 * s - flux[i];
                res2 += t * t;
            }
        } else {
            let t = f.side as f64 * grad[0][f.axis] - flux[0];
            res2 = t * t;
        }
        out.push((res2.sqrt(), f.measure, interior));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct NullspaceReport {
    /// Number of generalized eigenvalues below the tolerance.
    pub dimension: usize,
    /// Whether the dimension equals the number of independent candidates and
    /// every candidate lies in the computed null space.
    pub matched: bool,
    /// Largest relative `M`-norm distance of a candidate from the null space.
    pub projection_residual: f64,
    /// The smallest eigenvalues found, ascending.
    pub smallest: Vec<f64>,
}

/// Counts eigenvalues of `(A, M)` below `tol` and checks that `expected`
/// spans the corresponding eigenspace. Dense for `n ≤ 4000`, deflated inverse
/// iteration otherwise.
pub fn nullspace_characterization(
    a: &CsrMatrix,
    m: &[f64],
    expected: &[Vec<f64>],
    tol: f64,
) -> Result<NullspaceReport> {
    let n = a.n();
    let (smallest, null): (Vec<f64>, Vec<Vec<f64>>) = if n <= 4000 {
        let (vals, vecs) = dense_generalized_eigen(a, m)?;
        let k = vals.iter().take_while(|&&v| v < tol).count();
        let vectors = (0..k).map(|c| vecs.column(c).iter().copied().collect()).collect();
        (vals.into_iter().take(k + 3).collect(), vectors)
    } else {
        let mut found: Vec<Vec<f64>> = Vec::new();
        let mut smallest = Vec::new();
        loop {
            let opts = EigenOptions {
                deflate: found.clone(),
                seed: found.len() as u64,
                ..EigenOptions::default()
            };
            let rep = coercivity_estimate(a, m, &opts)?;
            smallest.push(rep.lambda_min);
            if rep.lambda_min >= tol || found.len() >= n.min(64) {
                break;
            }
            found.push(rep.vector);
        }
        (smallest, found)
    };

    let mdot = |x: &[f64], y: &[f64]| -> f64 { x.iter().zip(y).zip(m).map(|((x, y), w)| x * w * y).sum() };
    // M-orthonormal basis of the computed null space
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in &null {
        let mut w = v.clone();
        for q in &basis {
            let s = mdot(q, &w);
            w.iter_mut().zip(q).for_each(|(w, q)| *w -= s * q);
        }
        let nw = mdot(&w, &w).sqrt();
        if nw > 0.0 {
            w.iter_mut().for_each(|x| *x /= nw);
            basis.push(w);
        }
    }
    let mut worst = 0.0f64;
    for e in expected {
        let ne = mdot(e, e).sqrt();
        if ne == 0.0 {
            continue;
        }
        let mut res = e.clone();
        for q in &basis {
            let s = mdot(q, e);
            res.iter_mut().zip(q).for_each(|(r, q)| *r -= s * q);
        }
        worst = worst.max(mdot(&res, &res).sqrt() / ne);
    }
    let independent = independent_count(expected, &mdot);
    let dimension = null.len();
    Ok(NullspaceReport {
        dimension,
        matched: dimension == independent && worst <= 1e-8,
        projection_residual: worst,
        smallest,
    })
}

fn independent_count(vs: &[Vec<f64>], mdot: &dyn Fn(&[f64], &[f64]) -> f64) -> usize {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vs {
        let n0 = mdot(v, v).sqrt();
        let mut w = v.clone();
        for q in &basis {
            let s = mdot(q, &w);
            w.iter_mut().zip(q).for_each(|(w, q)| *w -= s * q);
        }
        let nw = mdot(&w, &w).sqrt();
        if n0 > 0.0 && nw > 1e-10 * n0 {
            w.iter_mut().for_each(|x| *x /= nw);
            basis.push(w);
        }
    }
    basis.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_system_has_zero_gradient_error() {
        let e = gradient_check(|_| 0.0, |u| vec![0.0; u.len()], &[1.0, 2.0], 5, 1e-5, 0);
        assert_eq!(e, 0.0);
    }

    #[test]
    fn quadratic_gradient_matches_differences() {
        let e = gradient_check(
            |u| 0.5 * (3.0 * u[0] * u[0] + u[1] * u[1]) - u[0],
            |u| vec![3.0 * u[0] - 1.0, u[1]],
            &[0.3, -0.7],
            10,
            1e-5,
            1,
        );
        assert!(e < 1e-8, "{e}");
    }

    #[test]
    fn nullspace_of_diagonal() {
        let a = CsrMatrix::from_triplets(3, vec![(1, 1, 1.0), (2, 2, 2.0)]);
        let rep = nullspace_characterization(&a, &[1.0; 3], &[vec![1.0, 0.0, 0.0]], 1e-10).unwrap();
        assert_eq!(rep.dimension, 1);
        assert!(rep.matched);
        let rep = nullspace_characterization(&a, &[1.0; 3], &[vec![0.0, 1.0, 0.0]], 1e-10).unwrap();
        assert!(!rep.matched);
    }

    #[test]
    fn records_format() {
        let r = VerificationRecord::at_most("weak_residual", 1e-12, 1e-10);
        assert!(r.pass);
        assert_eq!(
            r.to_string(),
            "weak_residual value=0.000000000001 threshold=0.0000000001 PASS"
        );
    }
}

//! Vector models: linearized elasticity and bond-based interactions.

use rayon::prelude::*;

use super::element::elastic_stiffness;
use super::nonlocal::{gamma_terms, pair_terms, Projection};
use super::terms::{vertex_carrier, ElementTerm, Term};
use super::{collect, Contribution};
use crate::geometry::{FacetSet, GridDomain, Label};
use crate::kernels::{KernelSpec, SurfaceKernelSpec};
use crate::model::{DofMap, ElasticParams, NonlocalMode};
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

pub fn elastic_local_terms(grid: &GridDomain, dofmap: &DofMap, params: &ElasticParams) -> Result<Vec<Term>> {
    let local = grid.cells_with(Label::Local);
    if !local.is_empty() && dofmap.num_vertex_nodes() == 0 {
        return Err(Error::NoLocalDofs);
    }
    let dim = grid.dim();
    let k = elastic_stiffness(dim, grid.h(), params.mu, params.lambda);
    Ok(local
        .par_iter()
        .map(|&c| {
            Term::Element(ElementTerm {
                carriers: grid
                    .cell_vertices(c)
                    .iter()
                    .map(|&v| vertex_carrier(dofmap, v))
                    .collect(),
                block: dim,
                k: k.clone(),
            })
        })
        .collect())
}

/// Stiffness of `μ∫|E(U)|² + (λ/2)∫(div U)²` over Ω_ℓ.
pub fn assemble_elastic_local(grid: &GridDomain, dofmap: &DofMap, params: &ElasticParams) -> Result<CsrMatrix> {
    Ok(collect(&elastic_local_terms(grid, dofmap, params)?, grid, dofmap, None).a)
}

/// Bonds `J(x−y)|(x−y)·(U(y)−U(x))|²` over the index set of `mode`.
pub fn assemble_bond(
    grid: &GridDomain,
    dofmap: &DofMap,
    kernel: &KernelSpec,
    mode: NonlocalMode,
) -> Result<Contribution> {
    let terms = pair_terms(grid, dofmap, kernel, mode, Projection::Bond)?;
    Ok(collect(&terms, grid, dofmap, None))
}

/// Bonds between NONLOCAL cells and Γ facets.
pub fn assemble_bond_gamma(grid: &GridDomain, gamma: &FacetSet, dofmap: &DofMap, g: &SurfaceKernelSpec) -> CsrMatrix {
    collect(
        &gamma_terms(grid, gamma, dofmap, g, Projection::Bond),
        grid,
        dofmap,
        None,
    )
    .a
}

/// Rigid motions `Mx + p` sampled at a point set, one block vector each.
#[derive(Clone, Debug, PartialEq)]
pub struct RigidMotionBasis {
    pub dim: usize,
    /// Layout `point·dim + component`.
    pub vectors: Vec<Vec<f64>>,
}

impl RigidMotionBasis {
    /// Translations `e_k` followed by the rotations in each coordinate plane
    /// `(p, q)`, `p < q`; `dim(dim+1)/2` vectors in total.
    pub fn from_points(dim: usize, points: &[[f64; 3]]) -> Self {
        let n = points.len() * dim;
        let mut vectors = Vec::new();
        for k in 0..dim {
            let mut v = vec![0.0; n];
            for i in 0..points.len() {
                v[i * dim + k] = 1.0;
            }
            vectors.push(v);
        }
        for p in 0..dim {
            for q in p + 1..dim {
                let mut v = vec![0.0; n];
                for (i, x) in points.iter().enumerate() {
                    v[i * dim + p] = -x[q];
                    v[i * dim + q] = x[p];
                }
                vectors.push(v);
            }
        }
        RigidMotionBasis { dim, vectors }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// Rigid motions at the node coordinates of `dofmap`.
pub fn rigid_motion_basis(dofmap: &DofMap, grid: &GridDomain) -> RigidMotionBasis {
    let points: Vec<[f64; 3]> = (0..dofmap.num_nodes())
        .map(|k| {
            let x = dofmap.node_coords(grid, k);
            [x[0], x[1], 0.0]
        })
        .collect();
    RigidMotionBasis::from_points(grid.dim(), &points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_grid, extract_gamma};
    use crate::kernels::SurfaceKind;
    use crate::model::Constraints;

    #[test]
    fn basis_counts() {
        let pts = [[0.0, 0.0, 0.0], [1.0, 2.0, 3.0]];
        assert_eq!(RigidMotionBasis::from_points(1, &pts).len(), 1);
        assert_eq!(RigidMotionBasis::from_points(2, &pts).len(), 3);
        assert_eq!(RigidMotionBasis::from_points(3, &pts).len(), 6);
        let b = RigidMotionBasis::from_points(2, &pts);
        assert_eq!(b.vectors[2], vec![0.0, 0.0, -2.0, 1.0]);
    }

    #[test]
    fn transverse_bond_has_no_energy() {
        // two cells along x; difference purely in y
        let g = build_grid(2, &[(0.0, 1.0), (0.0, 0.5)], 0.5, |_| Label::Nonlocal, 2).unwrap();
        let d = DofMap::build(&g, 2, Constraints::NONE);
        let k = KernelSpec::top_hat(0.6, 1.0).unwrap();
        let c = assemble_bond(&g, &d, &k, NonlocalMode::Source).unwrap();
        let u = vec![0.0, 1.0, 0.0, -2.0];
        assert_eq!(c.a.quad_form(&u), 0.0);
    }

    #[test]
    fn single_pair_in_one_dimension() {
        let h = 0.5;
        let g = build_grid(1, &[(0.0, 1.0)], h, |_| Label::Nonlocal, 2).unwrap();
        let d = DofMap::build(&g, 1, Constraints::NONE);
        let k = KernelSpec::top_hat(1.0, 1.0).unwrap();
        let a = assemble_bond(&g, &d, &k, NonlocalMode::Source).unwrap().a;
        // energy d²(u2−u1)²h², A = 2d²h²·[[1,−1],[−1,1]]
        let v = 2.0 * h * h * h * h;
        assert_eq!(a.to_dense().as_slice(), &[v, -v, -v, v]);
    }

    #[test]
    fn bond_gamma_block() {
        // Ω_ℓ = (0,0.5)×(0,0.5), Ω_nℓ = (0.5,1)×(0,0.5) at h = 0.5: one facet at
        // x = 0.5 with center (0.5, 0.25); the cell center is (0.75, 0.25)
        let h = 0.5;
        let g = build_grid(
            2,
            &[(0.0, 1.0), (0.0, 0.5)],
            h,
            |x| if x[0] < 0.5 { Label::Local } else { Label::Nonlocal },
            1,
        )
        .unwrap();
        let d = DofMap::build(&g, 2, Constraints::NONE);
        let gamma = extract_gamma(&g);
        assert_eq!(gamma.len(), 1);
        let gk = SurfaceKernelSpec::new(SurfaceKind::TopHat, 0.3, 2.0).unwrap();
        let a = assemble_bond_gamma(&g, &gamma, &d, &gk);
        let cell = d.num_nodes() - 1;
        // weight ½·c·h·h² and projection z = (0.25, 0): A_xx = 2·w·z²
        let w = 0.5 * 2.0 * h * h * h;
        assert_eq!(a.get(d.dof(cell, 0), d.dof(cell, 0)), 2.0 * w * 0.0625);
        assert_eq!(a.get(d.dof(cell, 1), d.dof(cell, 1)), 0.0);
    }
}

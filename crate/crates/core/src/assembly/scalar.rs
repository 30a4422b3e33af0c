//! Scalar models: local Laplacian, nonlocal diffusion and surface coupling.

use rayon::prelude::*;

use super::element::scalar_stiffness;
use super::nonlocal::{gamma_terms, pair_terms, Projection};
use super::terms::{fixed_value, vertex_carrier, Carrier, ElementTerm, Term};
use super::{collect, model_terms, Contribution, QuadraticSystem};
use crate::geometry::{FacetSet, GridDomain, Label};
use crate::kernels::{Coefficient, KernelSpec, SurfaceKernelSpec};
use crate::model::{DofMap, FieldPreset, Model, NonlocalMode};
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

/// One element term per LOCAL cell with stiffness `a(center)·K_cell`.
pub fn local_terms(grid: &GridDomain, dofmap: &DofMap, coeff: &Coefficient) -> Result<Vec<Term>> {
    let local = grid.cells_with(Label::Local);
    if !local.is_empty() && dofmap.num_vertex_nodes() == 0 {
        return Err(Error::NoLocalDofs);
    }
    let dim = grid.dim();
    let h = grid.h();
    Ok(local
        .par_iter()
        .map(|&c| {
            let a = coeff.point(&grid.cell_center(c), Label::Local);
            Term::Element(ElementTerm {
                carriers: grid
                    .cell_vertices(c)
                    .iter()
                    .map(|&v| vertex_carrier(dofmap, v))
                    .collect(),
                block: 1,
                k: scalar_stiffness(dim, h, a),
            })
        })
        .collect())
}

/// Stiffness of `½∫_{Ω_ℓ} a|∇u|²`.
pub fn assemble_local_stiffness(grid: &GridDomain, dofmap: &DofMap, coeff: &Coefficient) -> Result<CsrMatrix> {
    Ok(collect(&local_terms(grid, dofmap, coeff)?, grid, dofmap, None).a)
}

/// Nonlocal diffusion over the index set of `mode`, with homogeneous data.
pub fn assemble_nonlocal(
    grid: &GridDomain,
    dofmap: &DofMap,
    kernel: &KernelSpec,
    mode: NonlocalMode,
) -> Result<Contribution> {
    let terms = pair_terms(grid, dofmap, kernel, mode, Projection::Scalar)?;
    Ok(collect(&terms, grid, dofmap, None))
}

/// Surface coupling `½ΣΣ G(z,x)(u(x)−u(z))²·|facet|·h^N`.
pub fn assemble_gamma_coupling(
    grid: &GridDomain,
    gamma: &FacetSet,
    dofmap: &DofMap,
    g: &SurfaceKernelSpec,
) -> CsrMatrix {
    collect(
        &gamma_terms(grid, gamma, dofmap, g, Projection::Scalar),
        grid,
        dofmap,
        None,
    )
    .a
}

/// `b = f(node)·(lumped measure)` per unknown.
pub fn assemble_load(grid: &GridDomain, dofmap: &DofMap, f: &FieldPreset) -> Vec<f64> {
    let mut b = vec![0.0; dofmap.len()];
    if f.is_zero() {
        return b;
    }
    for k in 0..dofmap.num_nodes() {
        let x = dofmap.node_coords(grid, k);
        let w = dofmap.node_weight(grid, k);
        for i in 0..dofmap.block() {
            b[dofmap.dof(k, i)] = f.value(&x, grid.dim(), i) * w;
        }
    }
    b
}

/// Load carried by eliminated vertices held at the datum; enters the offset.
pub fn eliminated_load(grid: &GridDomain, dofmap: &DofMap, f: &FieldPreset, g: &FieldPreset) -> f64 {
    if f.is_zero() || g.is_zero() {
        return 0.0;
    }
    let mut s = 0.0;
    for v in 0..grid.num_vertices() {
        if !dofmap.is_eliminated(v) {
            continue;
        }
        let x = grid.vertex_coords(v);
        let w = DofMap::vertex_weight(grid, v);
        for i in 0..dofmap.block() {
            s += f.value(&x, grid.dim(), i) * w * fixed_value(grid, g, Carrier::FixedVertex(v), i);
        }
    }
    -s
}

/// Adds the cross terms of every square against the exterior datum `g` to
/// `b` and the constant terms to the offset. The datum is extended by zero
/// inside Ω, so the unknowns keep their meaning.
pub fn apply_exterior_shift(
    grid: &GridDomain,
    model: &Model,
    system: &mut QuadraticSystem,
    g: &FieldPreset,
) -> Result<()> {
    if g.is_zero() {
        return Ok(());
    }
    for x in [grid.cell_center(0), grid.vertex_coords(0)] {
        for i in 0..system.dofmap.block() {
            if !g.value(&x, grid.dim(), i).is_finite() {
                return Err(Error::NonFinite("exterior datum"));
            }
        }
    }
    let terms = model_terms(grid, &system.dofmap, model)?;
    let shift = super::accumulate(&terms, grid, &system.dofmap, Some(g), false);
    for (b, s) in system.b.iter_mut().zip(&shift.b) {
        *b += s;
    }
    system.offset += shift.offset + eliminated_load(grid, &system.dofmap, &model.source, g);
    Ok(())
}

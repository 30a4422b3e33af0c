//! Assembly of `E(u) = ½uᵀAu − bᵀu + offset` for every model kind.
//!
//! Terms are generated per cell in parallel and merged in cell order, so the
//! assembled operators are bit-identical across thread counts.

pub mod elastic;
pub mod element;
pub mod nonlocal;
pub mod scalar;
pub mod terms;

pub use elastic::{assemble_bond, assemble_bond_gamma, assemble_elastic_local, rigid_motion_basis, RigidMotionBasis};
pub use scalar::{
    apply_exterior_shift, assemble_gamma_coupling, assemble_load, assemble_local_stiffness, assemble_nonlocal,
};

use crate::geometry::{extract_gamma, GridDomain};
use crate::model::{DofMap, FieldPreset, Model};
use crate::sparse::{dot, CsrMatrix};
use crate::Result;
use nonlocal::{gamma_terms, pair_terms, Projection};
use terms::{Accumulator, Term};

/// A piece of a quadratic energy.
#[derive(Clone, Debug, PartialEq)]
pub struct Contribution {
    pub a: CsrMatrix,
    pub b: Vec<f64>,
    pub offset: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticSystem {
    pub a: CsrMatrix,
    pub b: Vec<f64>,
    /// Diagonal of the lumped mass matrix.
    pub mass: Vec<f64>,
    pub dofmap: DofMap,
    pub offset: f64,
}

impl QuadraticSystem {
    pub fn n(&self) -> usize {
        self.b.len()
    }

    pub fn energy(&self, u: &[f64]) -> f64 {
        0.5 * self.a.quad_form(u) - dot(&self.b, u) + self.offset
    }

    /// `Au − b`.
    pub fn gradient(&self, u: &[f64]) -> Vec<f64> {
        let mut g = self.a.matvec(u);
        g.iter_mut().zip(&self.b).for_each(|(g, b)| *g -= b);
        g
    }
}

pub(crate) fn accumulate(
    terms: &[Term],
    grid: &GridDomain,
    dofmap: &DofMap,
    datum: Option<&FieldPreset>,
    matrix: bool,
) -> Accumulator {
    let mut acc = Accumulator::new(dofmap.len());
    for t in terms {
        acc.add(t, grid, dofmap, datum, matrix);
    }
    acc
}

pub(crate) fn collect(terms: &[Term], grid: &GridDomain, dofmap: &DofMap, datum: Option<&FieldPreset>) -> Contribution {
    let mut acc = accumulate(terms, grid, dofmap, datum, true);
    Contribution {
        a: acc.matrix(),
        b: acc.b,
        offset: acc.offset,
    }
}

/// All energy terms of `model` except the load.
pub fn model_terms(grid: &GridDomain, dofmap: &DofMap, model: &Model) -> Result<Vec<Term>> {
    model.validate()?;
    let kind = model.kind;
    let projection = if kind.is_elastic() {
        Projection::Bond
    } else {
        Projection::Scalar
    };
    let mut terms = if kind.is_elastic() {
        elastic::elastic_local_terms(grid, dofmap, &model.elastic)?
    } else {
        scalar::local_terms(grid, dofmap, &model.local_coeff)?
    };
    terms.extend(pair_terms(
        grid,
        dofmap,
        &model.kernel,
        kind.nonlocal_mode(),
        projection,
    )?);
    if kind.is_flux() {
        if let Some(g) = &model.gkernel {
            terms.extend(gamma_terms(grid, &extract_gamma(grid), dofmap, g, projection));
        }
    }
    Ok(terms)
}

/// Assembles the full system, including the load and the exterior datum.
pub fn assemble(grid: &GridDomain, model: &Model) -> Result<QuadraticSystem> {
    let dofmap = DofMap::build(grid, model.block(grid.dim()), model.constraints);
    let terms = model_terms(grid, &dofmap, model)?;
    let datum = (!model.exterior.is_zero()).then_some(&model.exterior);
    let c = collect(&terms, grid, &dofmap, datum);
    let mut b = assemble_load(grid, &dofmap, &model.source);
    b.iter_mut().zip(&c.b).for_each(|(b, s)| *b += s);
    let offset = c.offset + datum.map_or(0.0, |g| scalar::eliminated_load(grid, &dofmap, &model.source, g));
    if b.iter().any(|v| !v.is_finite()) || !offset.is_finite() {
        return Err(crate::Error::NonFinite("load vector"));
    }
    Ok(QuadraticSystem {
        mass: dofmap.lumped_mass(grid),
        a: c.a,
        b,
        dofmap,
        offset,
    })
}

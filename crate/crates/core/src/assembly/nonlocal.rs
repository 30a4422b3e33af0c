//! Pair enumeration for the volumetric and surface interaction terms.

use rayon::prelude::*;
use smallvec::SmallVec;

use super::terms::{vertex_carrier, Carrier, Entry, SquareTerm, Term};
use crate::geometry::{FacetSet, GridDomain, Label};
use crate::kernels::{eval_kernel, require_padding, KernelSpec, SurfaceKernelSpec};
use crate::model::{DofMap, NonlocalMode};
use crate::Result;

/// How a pair difference enters the square.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Projection {
    /// `(u(y) − u(x))²`.
    Scalar,
    /// `((y−x)·(U(y) − U(x)))²` over `dim` components.
    Bond,
}

pub type Stencil = SmallVec<[(Carrier, f64); 4]>;

/// The value of the field at a cell center as a combination of carriers:
/// the unknown of a NONLOCAL cell, the vertex average of a LOCAL cell, or the
/// datum at an EXTERIOR cell.
pub fn cell_stencil(grid: &GridDomain, dofmap: &DofMap, cell: usize) -> Stencil {
    match grid.label(cell) {
        Label::Nonlocal => {
            let k = dofmap.cell_node(cell).expect("every NONLOCAL cell carries a node");
            SmallVec::from_slice(&[(Carrier::Dof(k), 1.0)])
        }
        Label::Local => vertex_average(dofmap, &grid.cell_vertices(cell)),
        Label::Exterior => SmallVec::from_slice(&[(Carrier::FixedCell(cell), 1.0)]),
    }
}

pub fn vertex_average(dofmap: &DofMap, vertices: &[usize]) -> Stencil {
    let w = 1.0 / vertices.len() as f64;
    vertices.iter().map(|&v| (vertex_carrier(dofmap, v), w)).collect()
}

fn difference_term(weight: f64, plus: &Stencil, minus: &Stencil, z: &[f64], projection: Projection) -> Term {
    let mut entries = SmallVec::new();
    let mut push = |comp: usize, scale: f64| {
        for &(carrier, c) in plus {
            entries.push(Entry {
                carrier,
                comp,
                coef: scale * c,
            });
        }
        for &(carrier, c) in minus {
            entries.push(Entry {
                carrier,
                comp,
                coef: -scale * c,
            });
        }
    };
    match projection {
        Projection::Scalar => push(0, 1.0),
        Projection::Bond => {
            for (d, &zd) in z.iter().enumerate() {
                if zd != 0.0 {
                    push(d, zd);
                }
            }
        }
    }
    Term::Square(SquareTerm { weight, entries })
}

/// Whether `mode` has a nonzero pair factor involving the exterior.
pub fn reaches_exterior(mode: NonlocalMode) -> bool {
    mode != NonlocalMode::Interior
}

/// One square term per unordered pair of cells within the horizon whose
/// labels the mode couples, weighted by `factor·J·b·h^{2N}`.
pub fn pair_terms(
    grid: &GridDomain,
    dofmap: &DofMap,
    kernel: &KernelSpec,
    mode: NonlocalMode,
    projection: Projection,
) -> Result<Vec<Term>> {
    let exterior = dofmap.constraints().exterior;
    let primary = |l: Label| l == Label::Nonlocal || (mode == NonlocalMode::SourceFull && l == Label::Local);
    let cells: Vec<usize> = (0..grid.num_cells()).filter(|&c| primary(grid.label(c))).collect();
    if exterior && reaches_exterior(mode) && !cells.is_empty() {
        require_padding(grid, kernel.rho)?;
    }
    let dim = grid.dim();
    let vol2 = grid.cell_volume() * grid.cell_volume();
    let offsets = grid.offsets(grid.reach(kernel.rho));
    let per_cell: Vec<Vec<Term>> = cells
        .par_iter()
        .map(|&x| {
            let lx = grid.label(x);
            let hx = grid.cell_half_index(x);
            let cx = grid.cell_center(x);
            let sx = cell_stencil(grid, dofmap, x);
            let mut out = Vec::new();
            for off in &offsets {
                let Some(y) = grid.cell_offset(x, *off) else {
                    continue;
                };
                let ly = grid.label(y);
                if y == x || (primary(ly) && y < x) {
                    continue;
                }
                if !exterior && (lx == Label::Exterior || ly == Label::Exterior) {
                    continue;
                }
                let factor = mode.pair_factor(lx, ly);
                if factor == 0.0 {
                    continue;
                }
                let z = grid.displacement(grid.cell_half_index(y), hx);
                let j = eval_kernel(kernel, &z[..dim]);
                if j == 0.0 {
                    continue;
                }
                let b = kernel.coefficient.pair(&cx, lx, &grid.cell_center(y), ly);
                let sy = cell_stencil(grid, dofmap, y);
                out.push(difference_term(factor * j * b * vol2, &sy, &sx, &z[..dim], projection));
            }
            out
        })
        .collect();
    Ok(per_cell.into_iter().flatten().collect())
}

/// One square term per (facet, NONLOCAL cell) pair within the surface
/// horizon, weighted by `½·G·measure·h^N`; the facet value is the average of
/// its vertices.
pub fn gamma_terms(
    grid: &GridDomain,
    gamma: &FacetSet,
    dofmap: &DofMap,
    g: &SurfaceKernelSpec,
    projection: Projection,
) -> Vec<Term> {
    if g.c == 0.0 {
        return Vec::new();
    }
    let dim = grid.dim();
    let offsets = grid.offsets(grid.reach(g.rho + grid.h()));
    let per_facet: Vec<Vec<Term>> = gamma
        .facets
        .par_iter()
        .map(|f| {
            let sf = vertex_average(dofmap, &f.vertices);
            let mut out = Vec::new();
            for off in &offsets {
                let Some(y) = grid.cell_offset(f.cell, *off) else {
                    continue;
                };
                if grid.label(y) != Label::Nonlocal {
                    continue;
                }
                let z = grid.displacement(grid.cell_half_index(y), f.half_index);
                let gv = g.eval(&z[..dim]);
                if gv == 0.0 {
                    continue;
                }
                let sy = cell_stencil(grid, dofmap, y);
                out.push(difference_term(
                    0.5 * gv * f.measure * grid.cell_volume(),
                    &sy,
                    &sf,
                    &z[..dim],
                    projection,
                ));
            }
            out
        })
        .collect();
    per_facet.into_iter().flatten().collect()
}

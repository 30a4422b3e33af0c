//! Discretization, minimization and verification of coupled local/nonlocal
//! energies on uniform Cartesian grids.
//!
//! A domain is rasterized into cells tagged LOCAL, NONLOCAL or EXTERIOR. The
//! local region carries vertex-based multilinear elements (Laplacian or
//! linearized elasticity), the nonlocal region carries cell-centered unknowns
//! interacting through a truncated radial kernel, and the two are coupled either
//! volumetrically (source coupling) or through the interface facets (flux
//! coupling). Every quadratic model assembles to `E(u) = ½uᵀAu − bᵀu + offset`.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod assembly;
pub mod energy;
pub mod error;
pub mod geometry;
pub mod kernels;
pub mod model;
pub mod solvers;
pub mod sparse;
pub mod verify;

pub use error::{Error, Result};
pub use geometry::{GridDomain, Label};
pub use model::{Constraints, DofMap, Field, Model, ModelKind, NonlocalMode};

use thiserror::Error;

use crate::model::Field;
use crate::solvers::SolveReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid spacing must be positive, got {0}")]
    NonPositiveSpacing(f64),

    #[error("unsupported dimension {0} (grids are 1D or 2D)")]
    Dimension(usize),

    #[error("extent {extent} of axis {axis} is not a whole number of cells of size {h}")]
    NonConformingBox { axis: usize, extent: f64, h: f64 },

    #[error("domain has no LOCAL or NONLOCAL cells")]
    EmptyDomain,

    #[error("padding of {pad} layers at h = {h} does not cover kernel horizon {horizon}")]
    InsufficientPadding { pad: usize, h: f64, horizon: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("LOCAL region has no active vertex degrees of freedom")]
    NoLocalDofs,

    #[error("field of length {got} does not match dof map of size {expected}")]
    DofMismatch { expected: usize, got: usize },

    #[error(
        "solver stopped after {} iterations with relative residual {:e}",
        report.iterations,
        report.relative_residual
    )]
    NotConverged {
        report: Box<SolveReport>,
        field: Box<Field>,
    },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("dense eigensolve refused for n = {0} (limit 4000)")]
    DenseTooLarge(usize),

    #[error("mask: {0}")]
    Mask(String),
}

pub type Result<T> = std::result::Result<T, Error>;

//! Minimizers for the discrete energies and coercivity estimates.

pub mod cg;
pub mod eigen;
pub mod nonlinear;

pub use cg::{conjugate_gradient, minimize_quadratic, CgOutcome};
pub use eigen::{coercivity_estimate, dense_generalized_eigen, CoercivityReport, EigenOptions};
pub use nonlinear::minimize_nonlinear;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Precond {
    None,
    Jacobi,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub precond: Precond,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-10,
            max_iter: 20_000,
            precond: Precond::None,
        }
    }
}

/// One accepted line-search step of the nonlinear solver.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepRecord {
    pub alpha: f64,
    /// Directional derivative `g·d` at the start of the step.
    pub slope: f64,
    pub energy_before: f64,
    pub energy_after: f64,
    /// `E(u + αd) − E(u)`, evaluated without cancellation; always negative.
    pub change: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// `‖Au−b‖/max(‖b‖,1)` for quadratic solves; `‖g‖/max(‖g₀‖,1)` for the
    /// nonlinear solver.
    pub relative_residual: f64,
    pub energy: f64,
    /// Seconds.
    pub wall_time: f64,
    pub converged: bool,
    /// Energy after each iteration, starting at the initial guess.
    pub energy_trace: Vec<f64>,
    /// Accepted nonlinear steps; empty for quadratic solves.
    pub steps: Vec<StepRecord>,
}

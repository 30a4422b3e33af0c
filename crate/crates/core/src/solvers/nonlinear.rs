use std::time::Instant;

use super::{SolveOptions, SolveReport, StepRecord};
use crate::energy::EnergyEvaluator;
use crate::geometry::GridDomain;
use crate::model::{DofMap, Field, Model};
use crate::sparse::{dot, norm2};
use crate::{Error, Result};

/// Sufficient-decrease factor of the backtracking line search.
pub const ARMIJO: f64 = 1e-4;

const MIN_STEP: f64 = 1e-30;

/// Minimizes `E^{p,r}` with the exponents in `model.nonlinear` by
/// mass-preconditioned gradient descent. Each iteration tries a
/// Barzilai–Borwein step and halves it until the Armijo condition holds.
/// Stops when `‖g‖/max(‖g₀‖, 1) ≤ tol`.
pub fn minimize_nonlinear(grid: &GridDomain, model: &Model, opts: &SolveOptions) -> Result<(Field, SolveReport)> {
    let (p, r) = (model.nonlinear.p, model.nonlinear.r);
    if !(p > 1.0) || !(r > 1.0) || !p.is_finite() || !r.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "exponents must exceed 1, got p={p}, r={r}"
        )));
    }
    if model.kind.is_elastic() {
        return Err(Error::InvalidParameter(
            "the nonlinear solver handles scalar models only".into(),
        ));
    }
    model.validate()?;
    let start = Instant::now();
    let dofmap = DofMap::build(grid, 1, model.constraints);
    let eval = EnergyEvaluator::nonlinear(grid, model, &dofmap);
    let mass = dofmap.lumped_mass(grid);
    let n = dofmap.len();

    let mut u = vec![0.0; n];
    let mut e = eval.energy(&u);
    let mut g = eval.gradient(&u)?;
    let g0 = norm2(&g).max(1.0);
    let mut trace = vec![e];
    let mut steps = Vec::new();
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut alpha = 1.0;
    let mut iterations = 0;
    let mut rel = norm2(&g) / g0;

    while rel > opts.tol && iterations < opts.max_iter {
        if !e.is_finite() || !rel.is_finite() {
            return Err(Error::NonFinite("nonlinear descent"));
        }
        let d: Vec<f64> = g.iter().zip(&mass).map(|(g, m)| -g / m).collect();
        let slope = dot(&g, &d);
        if !(slope < 0.0) {
            break;
        }
        if let Some((du, dg)) = &prev {
            let s_ms: f64 = du.iter().zip(&mass).map(|(s, m)| s * m * s).sum();
            let s_y = dot(du, dg);
            if s_y > 0.0 && s_ms > 0.0 {
                alpha = s_ms / s_y;
            }
        }
        let mut accepted = None;
        while alpha > MIN_STEP {
            let change = eval.energy_change(&u, &d, alpha)?;
            if change.is_finite() && change <= ARMIJO * alpha * slope && change < 0.0 {
                let trial: Vec<f64> = u.iter().zip(&d).map(|(u, d)| u + alpha * d).collect();
                accepted = Some((trial, change));
                break;
            }
            alpha *= 0.5;
        }
        let Some((trial, change)) = accepted else {
            break;
        };
        let et = e + change;
        let gt = eval.gradient(&trial)?;
        steps.push(StepRecord {
            alpha,
            slope,
            energy_before: e,
            energy_after: et,
            change,
        });
        prev = Some((
            trial.iter().zip(&u).map(|(a, b)| a - b).collect(),
            gt.iter().zip(&g).map(|(a, b)| a - b).collect(),
        ));
        u = trial;
        e = et;
        g = gt;
        trace.push(e);
        iterations += 1;
        rel = norm2(&g) / g0;
    }

    let report = SolveReport {
        iterations,
        relative_residual: rel,
        energy: e,
        wall_time: start.elapsed().as_secs_f64(),
        converged: rel <= opts.tol,
        energy_trace: trace,
        steps,
    };
    let field = Field::new(u);
    if report.converged {
        Ok((field, report))
    } else {
        Err(Error::NotConverged {
            report: Box::new(report),
            field: Box::new(field),
        })
    }
}

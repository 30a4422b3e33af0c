//! Run orchestration: check, assemble, solve, verify, emit.

use std::fs;
use std::path::{Path, PathBuf};

use lnl_core::assembly::{assemble, QuadraticSystem};
use lnl_core::energy::EnergyEvaluator;
use lnl_core::geometry::{check_admissibility, check_generalized_admissibility, extract_gamma, AdmissibilityReport};
use lnl_core::kernels::Coefficient;
use lnl_core::model::{DofMap, Node, Profile};
use lnl_core::solvers::{
    coercivity_estimate, dense_generalized_eigen, minimize_nonlinear, minimize_quadratic, EigenOptions, SolveReport,
};
use lnl_core::verify::{el_residual, gradient_check, gradient_check_quadratic, VerificationRecord};
use lnl_core::{Field, GridDomain, Label, ModelKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{RawConfig, RunConfig};
use crate::error::CliError;
use crate::report::{fmt_f64, Report};

/// Flags shared by all subcommands.
#[derive(Clone, Debug)]
pub struct RunOptions {
    /// Fail with exit code 3 on inadmissible geometry.
    pub strict: bool,
    /// Output directory.
    pub out: PathBuf,
}

/// Finite-difference gradient-check threshold.
pub const GRADIENT_TOL: f64 = 1e-6;

/// Admissibility of the configured geometry for the configured model.
pub fn admissibility(cfg: &RunConfig, report: &mut Report) -> Result<bool, CliError> {
    let grid = &cfg.grid;
    let delta = cfg.model.kernel.delta();
    let gamma = extract_gamma(grid);
    let std = check_admissibility(grid, &gamma, delta, cfg.model.kind.coupling_mode())?;
    let gen = check_generalized_admissibility(grid, delta)?;
    let has_nonlocal = grid.labels().contains(&Label::Nonlocal);
    let c = cfg.model.constraints;
    let admissible = if has_nonlocal {
        std.admissible() || (gen.admissible() && (c.dirichlet || c.exterior))
    } else {
        std.local_connected
    };
    write_admissibility(report, &std, &gen, gamma.len(), admissible);
    Ok(admissible)
}

fn write_admissibility(r: &mut Report, s: &AdmissibilityReport, g: &AdmissibilityReport, facets: usize, ok: bool) {
    let mode = match s.mode {
        Some(lnl_core::geometry::CouplingMode::Flux) => "flux",
        _ => "source",
    };
    r.text("admissibility.mode", mode);
    r.number("admissibility.delta", s.delta);
    r.count("admissibility.local_components", s.local_components.len());
    r.count("admissibility.nonlocal_components", s.nl_components.len());
    r.count("admissibility.gamma_facets", facets);
    r.number("admissibility.dist_local_nonlocal", s.dist_local_nonlocal);
    r.number("admissibility.dist_gamma_nonlocal", s.dist_gamma_nonlocal);
    r.flag("admissibility.local_connected", s.passes.local_connected);
    r.flag("admissibility.nonlocal_connected", s.passes.nonlocal_connected);
    r.flag("admissibility.p1", s.passes.p1);
    r.flag("admissibility.p2", s.passes.p2);
    r.flag("admissibility.standard", s.admissible());
    r.flag("admissibility.generalized", g.admissible());
    r.flag("admissibility.admissible", ok);
}

fn header(cfg: &RunConfig, r: &mut Report) {
    r.text("model.kind", cfg.model.kind.name());
    r.count("grid.dim", cfg.grid.dim());
    r.number("grid.h", cfg.grid.h());
    r.count("grid.pad", cfg.grid.pad());
    for (label, name) in [
        (Label::Local, "local"),
        (Label::Nonlocal, "nonlocal"),
        (Label::Exterior, "exterior"),
    ] {
        r.count(&format!("grid.{name}_cells"), cfg.grid.cells_with(label).len());
    }
}

fn write_out(dir: &Path, name: &str, text: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), text)?;
    Ok(())
}

/// `check`: admissibility only.
pub fn check(cfg: &RunConfig, opts: &RunOptions) -> Result<Report, CliError> {
    let mut report = Report::new();
    header(cfg, &mut report);
    let ok = admissibility(cfg, &mut report)?;
    write_out(&opts.out, &cfg.report_path, &report.write())?;
    if opts.strict && !ok {
        return Err(CliError::Admissibility(
            "geometry violates the coupling hypotheses".into(),
        ));
    }
    Ok(report)
}

/// One row per unknown: `kind, coordinates, component, value`.
pub fn field_csv(grid: &GridDomain, dofmap: &DofMap, u: &Field) -> String {
    let dim = grid.dim();
    let mut out = String::from(if dim == 1 {
        "kind,x,comp,value\n"
    } else {
        "kind,x,y,comp,value\n"
    });
    for (k, node) in dofmap.nodes().iter().enumerate() {
        let kind = match node {
            Node::Vertex(_) => "vertex",
            Node::Cell(_) => "cell",
        };
        let x = dofmap.node_coords(grid, k);
        let coords: Vec<String> = x[..dim].iter().map(|&c| fmt_f64(c)).collect();
        for i in 0..dofmap.block() {
            out.push_str(&format!(
                "{kind},{},{i},{}\n",
                coords.join(","),
                fmt_f64(u.values[dofmap.dof(k, i)])
            ));
        }
    }
    out
}

fn solve_entries(r: &mut Report, s: &SolveReport) {
    r.count("solve.iterations", s.iterations);
    r.number("solve.relative_residual", s.relative_residual);
    r.number("solve.energy", s.energy);
    r.number("solve.wall_time", s.wall_time);
    r.flag("solve.converged", s.converged);
}

/// Maximum nodal error against `A·Πsin(k_d π x_d)/(a π² Σk_d²)`, the exact
/// solution of the pure local problem with a separable-sine load.
fn analytic_error(cfg: &RunConfig, dofmap: &DofMap, u: &Field) -> Result<f64, CliError> {
    let model = &cfg.model;
    let dim = cfg.grid.dim();
    let (Profile::SeparableSine { amplitude, freq }, Coefficient::Constant(a)) =
        (&model.source.profile, &model.local_coeff)
    else {
        return Err(CliError::Config(
            "verify.analytic needs source.kind = separable_sine and a constant local coefficient".into(),
        ));
    };
    if model.kind.is_elastic() || cfg.grid.labels().contains(&Label::Nonlocal) || !model.exterior.is_zero() {
        return Err(CliError::Config(
            "verify.analytic applies to scalar pure local problems with zero boundary data".into(),
        ));
    }
    let pi = std::f64::consts::PI;
    let k2: f64 = freq[..dim].iter().map(|k| k * k).sum();
    let scale = amplitude / (a * pi * pi * k2);
    let mut worst = 0.0f64;
    for k in 0..dofmap.num_nodes() {
        let x = dofmap.node_coords(&cfg.grid, k);
        let exact = scale * (0..dim).map(|d| (freq[d] * pi * x[d]).sin()).product::<f64>();
        worst = worst.max((u.values[k] - exact).abs());
    }
    Ok(worst)
}

fn random_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn coercivity(cfg: &RunConfig, sys: &QuadraticSystem, r: &mut Report) -> Result<(), CliError> {
    let opts = EigenOptions {
        eig_tol: cfg.eigen.tol,
        max_iter: cfg.eigen.max_iter,
        seed: cfg.seed,
        ..EigenOptions::default()
    };
    let est = coercivity_estimate(&sys.a, &sys.mass, &opts)?;
    r.number("coercivity.lambda_min", est.lambda_min);
    r.count("coercivity.iterations", est.iterations);
    r.number("coercivity.residual", est.residual);
    r.number("coercivity.shift", est.shift);
    r.record(VerificationRecord::at_most(
        "eigen_residual",
        est.residual,
        cfg.eigen.tol,
    ));
    if cfg.eigen.oracle {
        let (vals, _) = dense_generalized_eigen(&sys.a, &sys.mass)?;
        let dense = vals[0].max(0.0);
        r.number("coercivity.dense_lambda_min", dense);
        let gap = (est.lambda_min - dense).abs() / dense.max(est.shift);
        r.record(VerificationRecord::at_most("eigen_oracle_gap", gap, 1e-6));
    }
    Ok(())
}

/// `solve`: admissibility, assembly, minimization, verification and output.
pub fn solve(cfg: &RunConfig, opts: &RunOptions) -> Result<Report, CliError> {
    let mut report = Report::new();
    run_solve(cfg, opts, &mut report)?;
    Ok(report)
}

fn run_solve(cfg: &RunConfig, opts: &RunOptions, report: &mut Report) -> Result<(), CliError> {
    header(cfg, report);
    let admissible = admissibility(cfg, report)?;
    if opts.strict && !admissible {
        write_out(&opts.out, &cfg.report_path, &report.write())?;
        return Err(CliError::Admissibility(
            "geometry violates the coupling hypotheses".into(),
        ));
    }

    let grid = &cfg.grid;
    let model = &cfg.model;
    let sys = assemble(grid, model)?;
    report.count("system.n", sys.n());
    report.count("system.nnz", sys.a.nnz());
    report.number("system.asymmetry", sys.a.asymmetry_max());
    if cfg.eigen.compute {
        coercivity(cfg, &sys, report)?;
    }

    let nonlinear = model.kind == ModelKind::Nonlinear;
    let result = if nonlinear {
        minimize_nonlinear(grid, model, &cfg.solve)
    } else {
        minimize_quadratic(&sys, &cfg.solve)
    };
    let (u, solve_report) = match result {
        Ok(x) => x,
        Err(lnl_core::Error::NotConverged { report: s, field }) => {
            solve_entries(report, &s);
            write_out(&opts.out, &cfg.field_path, &field_csv(grid, &sys.dofmap, &field))?;
            write_out(&opts.out, &cfg.report_path, &report.write())?;
            return Err(CliError::NotConverged(format!(
                "{} iterations, relative residual {}",
                s.iterations,
                fmt_f64(s.relative_residual)
            )));
        }
        Err(e) => return Err(e.into()),
    };
    solve_entries(report, &solve_report);

    if nonlinear {
        report.record(VerificationRecord::at_most(
            "gradient_norm",
            solve_report.relative_residual,
            cfg.solve.tol,
        ));
    } else {
        let res = el_residual(grid, model, &sys, &u)?;
        report.number("verify.weak_local_max", res.weak_local.max);
        report.number("verify.weak_nonlocal_max", res.weak_nonlocal.max);
        report.number("verify.strong_nonlocal_max", res.strong_nonlocal.max);
        if let (Some(g), Some(gi)) = (res.gamma, res.gamma_interior) {
            report.number("verify.gamma_max", g.max);
            report.number("verify.gamma_l2", g.l2);
            report.number("verify.gamma_interior_max", gi.max);
        }
        report.record(VerificationRecord::at_most(
            "weak_residual",
            res.weak_relative,
            cfg.solve.tol,
        ));
    }

    if cfg.verify.gradient_probes > 0 {
        let probe = random_vector(sys.n(), cfg.seed);
        let err = if nonlinear {
            let eval = EnergyEvaluator::nonlinear(grid, model, &sys.dofmap);
            gradient_check(
                |x| eval.energy(x),
                |x| eval.gradient(x).expect("scalar model"),
                &probe,
                cfg.verify.gradient_probes,
                cfg.verify.fd_step,
                cfg.seed,
            )
        } else {
            gradient_check_quadratic(&sys, &probe, cfg.verify.gradient_probes, cfg.verify.fd_step, cfg.seed)
        };
        report.record(VerificationRecord::at_most("gradient_check", err, GRADIENT_TOL));
    }

    if cfg.verify.analytic {
        let err = analytic_error(cfg, &sys.dofmap, &u)?;
        let h = grid.h();
        report.record(VerificationRecord::at_most("analytic_max_error", err, 2.0 * h * h));
    }

    write_out(&opts.out, &cfg.field_path, &field_csv(grid, &sys.dofmap, &u))?;
    write_out(&opts.out, &cfg.report_path, &report.write())?;
    if !report.all_pass() {
        return Err(CliError::Verification(report.failures().join(", ")));
    }
    Ok(())
}

/// Header of the sweep summary.
pub const SUMMARY_HEADER: &str =
    "value,energy,lambda_min,weak_residual,gamma_interior_max,analytic_error,iterations,status";

/// `sweep`: one `solve` per value of `param`, each in its own subdirectory,
/// summarized in `summary.csv`. A member that is rejected, does not converge
/// or fails a check keeps its row with `status = exit<code>`; configuration
/// and I/O errors abort the sweep.
pub fn sweep(raw: &RawConfig, param: &str, values: &[String], opts: &RunOptions) -> Result<String, CliError> {
    let mut summary = format!("{SUMMARY_HEADER}\n");
    for (i, value) in values.iter().enumerate() {
        let mut member = raw.clone();
        member.set(param, value)?;
        let cfg = RunConfig::from_raw(&member)?;
        let member_opts = RunOptions {
            strict: opts.strict,
            out: opts.out.join(format!("run_{i:03}")),
        };
        let mut report = Report::new();
        let status = match run_solve(&cfg, &member_opts, &mut report) {
            Ok(()) => "ok".to_string(),
            Err(e @ (CliError::Config(_) | CliError::Io(_))) => return Err(e),
            Err(e) => format!("exit{}", e.code()),
        };
        let num = |k: &str| report.get(k).unwrap_or("").to_string();
        let rec = |k: &str| report.find_record(k).map_or(String::new(), |r| fmt_f64(r.value));
        summary.push_str(&format!(
            "{value},{},{},{},{},{},{},{status}\n",
            num("solve.energy"),
            num("coercivity.lambda_min"),
            rec("weak_residual"),
            num("verify.gamma_interior_max"),
            rec("analytic_max_error"),
            num("solve.iterations"),
        ));
    }
    write_out(&opts.out, "summary.csv", &summary)?;
    Ok(summary)
}

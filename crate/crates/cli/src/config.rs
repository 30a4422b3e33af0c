//! Flat `key = value` run configuration with a fixed schema.
//!
//! Lines are `key = value`; blank lines and lines starting with `#` are
//! ignored. Keys are dotted namespaces; any key outside [`KEYS`] is an error.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use lnl_core::geometry::{build_grid, parse_mask, Ball, Region, Shape};
use lnl_core::kernels::{default_pad, Coefficient, KernelKind, KernelSpec, SurfaceKernelSpec, SurfaceKind};
use lnl_core::model::{Constraints, ElasticParams, FieldPreset, Profile};
use lnl_core::solvers::{Precond, SolveOptions};
use lnl_core::{GridDomain, Label, Model, ModelKind};

use crate::error::CliError;

/// Every accepted key.
pub const KEYS: &[&str] = &[
    "dim",
    "domain",
    "h",
    "pad",
    "geometry.shape",
    "geometry.label",
    "geometry.axis",
    "geometry.at",
    "geometry.gap",
    "geometry.local_side",
    "geometry.fill",
    "geometry.boxes",
    "geometry.balls",
    "geometry.mask",
    "model.kind",
    "kernel.kind",
    "kernel.rho",
    "kernel.c",
    "kernel.s",
    "kernel.eps",
    "gkernel.kind",
    "gkernel.rho",
    "gkernel.c",
    "coeff.kind",
    "coeff.value",
    "coeff.local",
    "coeff.nonlocal",
    "coeff.exterior",
    "coeff.center",
    "coeff.base",
    "coeff.bump",
    "coeff.width",
    "local.kind",
    "local.value",
    "local.local",
    "local.nonlocal",
    "local.exterior",
    "local.center",
    "local.base",
    "local.bump",
    "local.width",
    "source.kind",
    "source.value",
    "source.center",
    "source.amplitude",
    "source.width",
    "source.freq",
    "source.slope",
    "source.intercept",
    "force.kind",
    "force.value",
    "force.center",
    "force.amplitude",
    "force.width",
    "force.freq",
    "force.slope",
    "force.intercept",
    "force.direction",
    "dirichlet.kind",
    "dirichlet.value",
    "dirichlet.center",
    "dirichlet.amplitude",
    "dirichlet.width",
    "dirichlet.freq",
    "dirichlet.slope",
    "dirichlet.intercept",
    "dirichlet.direction",
    "constraints.dirichlet",
    "constraints.exterior",
    "elastic.mu",
    "elastic.lambda",
    "solve.tol",
    "solve.max_iter",
    "solve.precond",
    "eig.compute",
    "eig.tol",
    "eig.max_iter",
    "eig.oracle",
    "nonlinear.p",
    "nonlinear.r",
    "verify.analytic",
    "verify.gradient_probes",
    "verify.fd_step",
    "seed",
    "output.field",
    "output.report",
];

/// Raw key/value pairs, validated against [`KEYS`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RawConfig {
    pub values: BTreeMap<String, String>,
    /// Directory that relative paths (the mask file) are resolved against.
    pub base: PathBuf,
}

impl RawConfig {
    pub fn parse(text: &str, base: &Path) -> Result<RawConfig, CliError> {
        let mut raw = RawConfig {
            values: BTreeMap::new(),
            base: base.to_path_buf(),
        };
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", n + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if raw.values.contains_key(k) {
                return Err(CliError::Config(format!("line {}: duplicate key {k}", n + 1)));
            }
            raw.set(k, v)?;
        }
        Ok(raw)
    }

    pub fn load(path: &Path) -> Result<RawConfig, CliError> {
        let text =
            fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        RawConfig::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Sets `key`, rejecting keys outside the schema.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        if !KEYS.contains(&key) {
            return Err(CliError::Config(format!("unknown key {key}")));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn required(&self, key: &str) -> Result<&str, CliError> {
        self.get(key)
            .ok_or_else(|| CliError::Config(format!("missing key {key}")))
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        self.get(key).map_or(Ok(default), |v| parse_f64(key, v))
    }

    fn f64_req(&self, key: &str) -> Result<f64, CliError> {
        parse_f64(key, self.required(key)?)
    }

    fn usize_or(&self, key: &str, default: usize) -> Result<usize, CliError> {
        self.get(key).map_or(Ok(default), |v| {
            v.parse()
                .map_err(|_| CliError::Config(format!("{key}: expected a nonnegative integer, got {v:?}")))
        })
    }

    fn bool_or(&self, key: &str, default: bool) -> Result<bool, CliError> {
        match self.get(key) {
            None => Ok(default),
            Some("true") => Ok(true),
            Some("false") => Ok(false),
            Some(v) => Err(CliError::Config(format!("{key}: expected true or false, got {v:?}"))),
        }
    }

    fn point_or(&self, key: &str, default: [f64; 2]) -> Result<[f64; 2], CliError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => {
                let xs = parse_list(key, v)?;
                if xs.is_empty() || xs.len() > 2 {
                    return Err(CliError::Config(format!("{key}: expected 1 or 2 numbers, got {v:?}")));
                }
                let mut p = [0.0; 2];
                p[..xs.len()].copy_from_slice(&xs);
                Ok(p)
            }
        }
    }

    fn has_prefix(&self, prefix: &str) -> bool {
        self.values.keys().any(|k| k.starts_with(prefix))
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64, CliError> {
    v.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| CliError::Config(format!("{key}: expected a finite number, got {v:?}")))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>, CliError> {
    v.split(',').map(|s| parse_f64(key, s.trim())).collect()
}

fn parse_label(key: &str, v: &str) -> Result<Label, CliError> {
    let mut chars = v.chars();
    match (chars.next().and_then(Label::from_char), chars.next()) {
        (Some(l), None) => Ok(l),
        _ => Err(CliError::Config(format!("{key}: expected one of L, N, E, got {v:?}"))),
    }
}

/// Verification settings.
#[derive(Clone, Debug, PartialEq)]
pub struct VerifyConfig {
    /// Compare with the separable-sine analytic solution of the pure local problem.
    pub analytic: bool,
    pub gradient_probes: usize,
    pub fd_step: f64,
}

/// Coercivity settings.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenConfig {
    pub compute: bool,
    pub tol: f64,
    pub max_iter: usize,
    /// Also run the dense oracle (n ≤ 4000) and report the relative gap.
    pub oracle: bool,
}

/// A fully validated run.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub grid: GridDomain,
    pub model: Model,
    pub solve: SolveOptions,
    pub eigen: EigenConfig,
    pub verify: VerifyConfig,
    pub seed: u64,
    pub field_path: String,
    pub report_path: String,
}

impl RunConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<RunConfig, CliError> {
        let kind_name = raw.required("model.kind")?;
        let kind = ModelKind::from_name(kind_name)
            .ok_or_else(|| CliError::Config(format!("model.kind: unknown model {kind_name:?}")))?;
        let dim = raw.usize_or("dim", 1)?;
        if dim != 1 && dim != 2 {
            return Err(CliError::Config(format!("dim: expected 1 or 2, got {dim}")));
        }
        let h = raw.f64_req("h")?;

        let kernel = parse_kernel(raw)?;
        let mut model = Model::new(kind, kernel.clone());
        if raw.has_prefix("gkernel.") {
            model = model.with_gkernel(parse_gkernel(raw)?);
        }
        model = model.with_local_coeff(parse_coefficient(raw, "local")?);
        let constraints = Constraints {
            dirichlet: raw.bool_or("constraints.dirichlet", true)?,
            exterior: raw.bool_or("constraints.exterior", true)?,
        };
        model = model.with_constraints(constraints);
        if kind.is_elastic() {
            if raw.has_prefix("source.") {
                return Err(CliError::Config(
                    "source.* applies to scalar models; use force.*".into(),
                ));
            }
            model = model.with_elastic(
                ElasticParams::new(raw.f64_or("elastic.mu", 1.0)?, raw.f64_or("elastic.lambda", 1.0)?)
                    .map_err(|e| CliError::Config(e.to_string()))?,
            );
            model = model.with_source(parse_preset(raw, "force", true)?);
        } else {
            if raw.has_prefix("force.") || raw.has_prefix("elastic.") {
                return Err(CliError::Config("force.* and elastic.* apply to elastic models".into()));
            }
            model = model.with_source(parse_preset(raw, "source", false)?);
        }
        model = model.with_exterior(parse_preset(raw, "dirichlet", kind.is_elastic())?);
        if kind == ModelKind::Nonlinear {
            model = model.with_nonlinear(raw.f64_or("nonlinear.p", 2.0)?, raw.f64_or("nonlinear.r", 2.0)?);
        } else if raw.has_prefix("nonlinear.") {
            return Err(CliError::Config("nonlinear.* applies to model.kind = nonlinear".into()));
        }
        model.validate().map_err(|e| CliError::Config(e.to_string()))?;

        let horizon = model.gkernel.map_or(kernel.rho, |g| g.rho.max(kernel.rho));
        let pad = raw.usize_or("pad", default_pad(horizon, h))?;
        let grid = parse_grid(raw, dim, h, pad)?;

        let precond = match raw.get("solve.precond").unwrap_or("none") {
            "none" => Precond::None,
            "jacobi" => Precond::Jacobi,
            v => {
                return Err(CliError::Config(format!(
                    "solve.precond: expected none or jacobi, got {v:?}"
                )))
            }
        };
        let solve = SolveOptions {
            tol: raw.f64_or("solve.tol", 1e-10)?,
            max_iter: raw.usize_or("solve.max_iter", 20_000)?,
            precond,
        };
        if solve.tol.is_nan() || solve.tol <= 0.0 {
            return Err(CliError::Config("solve.tol must be positive".into()));
        }
        let eigen = EigenConfig {
            compute: raw.bool_or("eig.compute", false)?,
            tol: raw.f64_or("eig.tol", 1e-8)?,
            max_iter: raw.usize_or("eig.max_iter", 20_000)?,
            oracle: raw.bool_or("eig.oracle", false)?,
        };
        let verify = VerifyConfig {
            analytic: raw.bool_or("verify.analytic", false)?,
            gradient_probes: raw.usize_or("verify.gradient_probes", 4)?,
            fd_step: raw.f64_or("verify.fd_step", 1e-5)?,
        };
        let seed = raw.usize_or("seed", 0)? as u64;
        Ok(RunConfig {
            grid,
            model,
            solve,
            eigen,
            verify,
            seed,
            field_path: raw.get("output.field").unwrap_or("field.csv").to_string(),
            report_path: raw.get("output.report").unwrap_or("report.txt").to_string(),
        })
    }
}

fn parse_kernel(raw: &RawConfig) -> Result<KernelSpec, CliError> {
    let kind = match raw.get("kernel.kind").unwrap_or("top_hat") {
        "top_hat" => KernelKind::TopHat,
        "trunc_gaussian" => KernelKind::TruncGaussian,
        "trunc_fractional" => KernelKind::TruncFractional {
            s: raw.f64_req("kernel.s")?,
            eps: raw.f64_or("kernel.eps", 1e-3)?,
        },
        v => return Err(CliError::Config(format!("kernel.kind: unknown kernel {v:?}"))),
    };
    let spec = KernelSpec::new(kind, raw.f64_req("kernel.rho")?, raw.f64_or("kernel.c", 1.0)?)
        .map_err(|e| CliError::Config(e.to_string()))?;
    spec.with_coefficient(parse_coefficient(raw, "coeff")?)
        .map_err(|e| CliError::Config(e.to_string()))
}

fn parse_gkernel(raw: &RawConfig) -> Result<SurfaceKernelSpec, CliError> {
    let kind = match raw.get("gkernel.kind").unwrap_or("top_hat") {
        "top_hat" => SurfaceKind::TopHat,
        "trunc_gaussian" => SurfaceKind::TruncGaussian,
        v => return Err(CliError::Config(format!("gkernel.kind: unknown kernel {v:?}"))),
    };
    SurfaceKernelSpec::new(kind, raw.f64_req("gkernel.rho")?, raw.f64_or("gkernel.c", 1.0)?)
        .map_err(|e| CliError::Config(e.to_string()))
}

fn parse_coefficient(raw: &RawConfig, prefix: &str) -> Result<Coefficient, CliError> {
    let key = |s: &str| format!("{prefix}.{s}");
    let c = match raw.get(&key("kind")).unwrap_or("constant") {
        "constant" => Coefficient::Constant(raw.f64_or(&key("value"), 1.0)?),
        "piecewise" => Coefficient::Piecewise {
            local: raw.f64_or(&key("local"), 1.0)?,
            nonlocal: raw.f64_or(&key("nonlocal"), 1.0)?,
            exterior: raw.f64_or(&key("exterior"), 1.0)?,
        },
        "radial" => Coefficient::Radial {
            center: raw.point_or(&key("center"), [0.0; 2])?,
            base: raw.f64_or(&key("base"), 1.0)?,
            bump: raw.f64_or(&key("bump"), 0.0)?,
            width: raw.f64_or(&key("width"), 1.0)?,
        },
        v => return Err(CliError::Config(format!("{prefix}.kind: unknown coefficient {v:?}"))),
    };
    c.validate().map_err(|e| CliError::Config(format!("{prefix}: {e}")))?;
    Ok(c)
}

fn parse_preset(raw: &RawConfig, prefix: &str, vector: bool) -> Result<FieldPreset, CliError> {
    let key = |s: &str| format!("{prefix}.{s}");
    let profile = match raw.get(&key("kind")).unwrap_or("zero") {
        "zero" => Profile::Zero,
        "constant" => Profile::Constant(raw.f64_req(&key("value"))?),
        "gaussian_bump" => Profile::GaussianBump {
            center: raw.point_or(&key("center"), [0.5, 0.5])?,
            amplitude: raw.f64_or(&key("amplitude"), 1.0)?,
            width: raw.f64_or(&key("width"), 0.25)?,
        },
        "separable_sine" => Profile::SeparableSine {
            amplitude: raw.f64_or(&key("amplitude"), 1.0)?,
            freq: raw.point_or(&key("freq"), [1.0, 1.0])?,
        },
        "linear" => Profile::Linear {
            slope: raw.point_or(&key("slope"), [0.0; 2])?,
            intercept: raw.f64_or(&key("intercept"), 0.0)?,
        },
        v => return Err(CliError::Config(format!("{prefix}.kind: unknown profile {v:?}"))),
    };
    if let Profile::GaussianBump { width, .. } = profile {
        if width.is_nan() || width <= 0.0 {
            return Err(CliError::Config(format!("{prefix}.width must be positive")));
        }
    }
    if vector {
        Ok(FieldPreset::vector(
            profile,
            raw.point_or(&key("direction"), [1.0, 0.0])?,
        ))
    } else if raw.get(&key("direction")).is_some() {
        Err(CliError::Config(format!(
            "{prefix}.direction applies to elastic models"
        )))
    } else {
        Ok(FieldPreset::scalar(profile))
    }
}

fn parse_domain(v: &str, dim: usize) -> Result<Vec<(f64, f64)>, CliError> {
    let axes: Vec<&str> = v.split(';').map(str::trim).collect();
    if axes.len() != dim {
        return Err(CliError::Config(format!(
            "domain: expected {dim} intervals separated by ';', got {v:?}"
        )));
    }
    axes.iter()
        .map(|a| match parse_list("domain", a)?.as_slice() {
            [lo, hi] if lo < hi => Ok((*lo, *hi)),
            _ => Err(CliError::Config(format!(
                "domain: expected lo,hi with lo < hi, got {a:?}"
            ))),
        })
        .collect()
}

fn parse_tagged(key: &str, v: &str) -> Result<Vec<(Label, Vec<f64>)>, CliError> {
    v.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let (tag, nums) = item
                .split_once(':')
                .ok_or_else(|| CliError::Config(format!("{key}: expected LABEL:numbers, got {item:?}")))?;
            Ok((parse_label(key, tag.trim())?, parse_list(key, nums)?))
        })
        .collect()
}

fn parse_grid(raw: &RawConfig, dim: usize, h: f64, pad: usize) -> Result<GridDomain, CliError> {
    let core = |e: lnl_core::Error| CliError::Config(e.to_string());
    let shape_name = raw.get("geometry.shape").unwrap_or("uniform");
    if shape_name == "mask" {
        let file = raw.base.join(raw.required("geometry.mask")?);
        let text = fs::read_to_string(&file)
            .map_err(|e| CliError::Config(format!("cannot read mask {}: {e}", file.display())))?;
        let mask = parse_mask(&text).map_err(core)?;
        if dim == 1 && mask.counts[1] != 1 {
            return Err(CliError::Config("a 1D mask must be a single line".into()));
        }
        let bbox = match raw.get("domain") {
            Some(v) => parse_domain(v, dim)?,
            None => (0..dim).map(|d| (0.0, mask.counts[d] as f64 * h)).collect(),
        };
        return GridDomain::from_labels(dim, &bbox, h, &mask.labels, pad).map_err(core);
    }
    let bbox = parse_domain(raw.required("domain")?, dim)?;
    let shape = match shape_name {
        "uniform" => Shape::Uniform(parse_label("geometry.label", raw.get("geometry.label").unwrap_or("N"))?),
        "halfspace" => Shape::HalfSpace {
            axis: raw.usize_or("geometry.axis", 0)?,
            at: raw.f64_req("geometry.at")?,
            gap: raw.f64_or("geometry.gap", 0.0)?,
            local_below: match raw.get("geometry.local_side").unwrap_or("below") {
                "below" => true,
                "above" => false,
                v => {
                    return Err(CliError::Config(format!(
                        "geometry.local_side: expected below or above, got {v:?}"
                    )))
                }
            },
        },
        "boxes" => Shape::Boxes {
            fill: parse_label("geometry.fill", raw.get("geometry.fill").unwrap_or("L"))?,
            boxes: parse_tagged("geometry.boxes", raw.required("geometry.boxes")?)?
                .into_iter()
                .map(|(label, xs)| {
                    if xs.len() != 2 * dim {
                        return Err(CliError::Config(format!(
                            "geometry.boxes: a box needs {} numbers",
                            2 * dim
                        )));
                    }
                    Ok(Region {
                        label,
                        bounds: xs.chunks(2).map(|c| (c[0], c[1])).collect(),
                    })
                })
                .collect::<Result<_, _>>()?,
        },
        "balls" => Shape::Balls {
            fill: parse_label("geometry.fill", raw.get("geometry.fill").unwrap_or("L"))?,
            balls: parse_tagged("geometry.balls", raw.required("geometry.balls")?)?
                .into_iter()
                .map(|(label, xs)| {
                    if xs.len() != dim + 1 {
                        return Err(CliError::Config(format!(
                            "geometry.balls: a ball needs {} numbers",
                            dim + 1
                        )));
                    }
                    Ok(Ball {
                        label,
                        center: xs[..dim].to_vec(),
                        radius: xs[dim],
                    })
                })
                .collect::<Result<_, _>>()?,
        },
        v => return Err(CliError::Config(format!("geometry.shape: unknown shape {v:?}"))),
    };
    shape.validate(dim).map_err(core)?;
    build_grid(dim, &bbox, h, |x| shape.label_at(x), pad).map_err(core)
}

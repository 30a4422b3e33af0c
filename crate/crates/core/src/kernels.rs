//! Volumetric kernels `J`, surface kernels `G` and the symmetric coefficient
//! presets that modulate them.

use crate::geometry::{GridDomain, Label, Point};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum KernelKind {
    /// `c·1{‖z‖≤ρ}`.
    TopHat,
    /// `c·exp(−‖z‖²/ρ²)·1{‖z‖≤ρ}`.
    TruncGaussian,
    /// `c/(‖z‖+ε)^(N+2s)·1{‖z‖≤ρ}`.
    TruncFractional { s: f64, eps: f64 },
}

/// Positive, bounded modulation `β(x)`; pairs use `b(x,y) = (β(x)+β(y))/2`.
#[derive(Clone, Debug, PartialEq)]
pub enum Coefficient {
    Constant(f64),
    /// One value per region label.
    Piecewise {
        local: f64,
        nonlocal: f64,
        exterior: f64,
    },
    /// `base + bump·exp(−‖x−center‖²/width²)`.
    Radial {
        center: Point,
        base: f64,
        bump: f64,
        width: f64,
    },
}

impl Default for Coefficient {
    fn default() -> Self {
        Coefficient::Constant(1.0)
    }
}

impl Coefficient {
    pub fn point(&self, x: &Point, label: Label) -> f64 {
        match self {
            Coefficient::Constant(v) => *v,
            Coefficient::Piecewise {
                local,
                nonlocal,
                exterior,
            } => match label {
                Label::Local => *local,
                Label::Nonlocal => *nonlocal,
                Label::Exterior => *exterior,
            },
            Coefficient::Radial {
                center,
                base,
                bump,
                width,
            } => {
                let r2 = (x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2);
                base + bump * (-r2 / (width * width)).exp()
            }
        }
    }

    pub fn pair(&self, x: &Point, lx: Label, y: &Point, ly: Label) -> f64 {
        0.5 * (self.point(x, lx) + self.point(y, ly))
    }

    /// `(b_min, b_max)` over all points.
    pub fn bounds(&self) -> (f64, f64) {
        match self {
            Coefficient::Constant(v) => (*v, *v),
            Coefficient::Piecewise {
                local,
                nonlocal,
                exterior,
            } => (local.min(*nonlocal).min(*exterior), local.max(*nonlocal).max(*exterior)),
            Coefficient::Radial { base, bump, .. } => (*base, base + bump),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.bounds();
        if let Coefficient::Radial { bump, width, .. } = self {
            if *bump < 0.0 || !(*width > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "radial coefficient needs bump ≥ 0 and width > 0, got {bump}, {width}"
                )));
            }
        }
        if !(lo > 0.0) || !hi.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "coefficient must be positive and bounded, got range [{lo}, {hi}]"
            )));
        }
        Ok(())
    }

    pub fn is_constant_one(&self) -> bool {
        matches!(self, Coefficient::Constant(v) if *v == 1.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KernelSpec {
    pub kind: KernelKind,
    /// Support radius ρ.
    pub rho: f64,
    /// Amplitude, used raw.
    pub c: f64,
    pub coefficient: Coefficient,
}

impl KernelSpec {
    pub fn new(kind: KernelKind, rho: f64, c: f64) -> Result<Self> {
        let spec = KernelSpec {
            kind,
            rho,
            c,
            coefficient: Coefficient::default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn top_hat(rho: f64, c: f64) -> Result<Self> {
        Self::new(KernelKind::TopHat, rho, c)
    }

    pub fn with_coefficient(mut self, coefficient: Coefficient) -> Result<Self> {
        coefficient.validate()?;
        self.coefficient = coefficient;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0) || !self.rho.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "kernel horizon must be positive, got {}",
                self.rho
            )));
        }
        if !(self.c > 0.0) || !self.c.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "kernel amplitude must be positive, got {}",
                self.c
            )));
        }
        if let KernelKind::TruncFractional { s, eps } = self.kind {
            if !(s > 0.0 && s < 1.0) || !(eps > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "fractional kernel needs s in (0,1) and eps > 0, got s={s}, eps={eps}"
                )));
            }
        }
        self.coefficient.validate()
    }

    /// Connectivity scale `δ = ρ/2`.
    pub fn delta(&self) -> f64 {
        0.5 * self.rho
    }

    /// Radial profile at distance `r` in dimension `dim`.
    pub fn profile(&self, r: f64, dim: usize) -> f64 {
        if r > self.rho {
            return 0.0;
        }
        match self.kind {
            KernelKind::TopHat => self.c,
            KernelKind::TruncGaussian => self.c * (-(r * r) / (self.rho * self.rho)).exp(),
            KernelKind::TruncFractional { s, eps } => self.c / (r + eps).powf(dim as f64 + 2.0 * s),
        }
    }
}

/// `J(z)`; the dimension is `z.len()`.
pub fn eval_kernel(spec: &KernelSpec, z: &[f64]) -> f64 {
    let r = z.iter().map(|t| t * t).sum::<f64>().sqrt();
    spec.profile(r, z.len())
}

/// Samples `J` on `r_k = 2δ·k/samples`, `k = 0..=samples`. Returns whether the
/// minimum is positive and the minimum itself.
pub fn check_j1(spec: &KernelSpec, delta: f64, samples: usize, dim: usize) -> Result<(bool, f64)> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    let samples = samples.max(1);
    let min = (0..=samples)
        .map(|k| spec.profile(2.0 * delta * k as f64 / samples as f64, dim))
        .fold(f64::INFINITY, f64::min);
    Ok((min > 0.0, min))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SurfaceKind {
    TopHat,
    TruncGaussian,
}

/// Surface coupling kernel `G(z, x)` between a facet center and a cell center.
/// A zero amplitude switches the coupling off.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceKernelSpec {
    pub kind: SurfaceKind,
    pub rho: f64,
    pub c: f64,
}

impl SurfaceKernelSpec {
    pub fn new(kind: SurfaceKind, rho: f64, c: f64) -> Result<Self> {
        if !(rho > 0.0) || !rho.is_finite() || !(c >= 0.0) || !c.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "surface kernel needs rho > 0 and c ≥ 0, got rho={rho}, c={c}"
            )));
        }
        Ok(SurfaceKernelSpec { kind, rho, c })
    }

    pub fn profile(&self, r: f64) -> f64 {
        if r > self.rho {
            return 0.0;
        }
        match self.kind {
            SurfaceKind::TopHat => self.c,
            SurfaceKind::TruncGaussian => self.c * (-(r * r) / (self.rho * self.rho)).exp(),
        }
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        self.profile(z.iter().map(|t| t * t).sum::<f64>().sqrt())
    }
}

/// Samples `G` on `[0, ρ_G]` and reports whether it stays positive there.
pub fn check_g1(spec: &SurfaceKernelSpec, samples: usize) -> (bool, f64) {
    let samples = samples.max(1);
    let min = (0..=samples)
        .map(|k| spec.profile(spec.rho * k as f64 / samples as f64))
        .fold(f64::INFINITY, f64::min);
    (min > 0.0, min)
}

/// Smallest padding that covers a horizon `rho` at spacing `h`.
pub fn default_pad(rho: f64, h: f64) -> usize {
    ((rho / h) * (1.0 - 1e-12)).ceil().max(0.0) as usize
}

/// Errors unless the padding layers cover the horizon.
pub fn require_padding(grid: &GridDomain, rho: f64) -> Result<()> {
    if (grid.pad() as f64) * grid.h() < rho * (1.0 - 1e-12) {
        return Err(Error::InsufficientPadding {
            pad: grid.pad(),
            h: grid.h(),
            horizon: rho,
        });
    }
    Ok(())
}

/// Midpoint value of `∫_{cells labeled region} J(x−y) dy` for `x` the center of
/// `cell`.
pub fn exterior_mass(spec: &KernelSpec, cell: usize, grid: &GridDomain, region: Label) -> Result<f64> {
    require_padding(grid, spec.rho)?;
    let dim = grid.dim();
    let hx = grid.cell_half_index(cell);
    let mut sum = 0.0;
    for off in grid.offsets(grid.reach(spec.rho)) {
        let Some(y) = grid.cell_offset(cell, off) else {
            continue;
        };
        if grid.label(y) != region {
            continue;
        }
        let z = grid.displacement(grid.cell_half_index(y), hx);
        sum += eval_kernel(spec, &z[..dim]);
    }
    Ok(sum * grid.cell_volume())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_grid;
    use proptest::prelude::*;

    #[test]
    fn top_hat_values() {
        let k = KernelSpec::top_hat(0.5, 1.0).unwrap();
        assert_eq!(eval_kernel(&k, &[0.25]), 1.0);
        assert_eq!(eval_kernel(&k, &[0.75]), 0.0);
        assert_eq!(eval_kernel(&k, &[0.5]), 1.0);
    }

    #[test]
    fn fractional_value() {
        let k = KernelSpec::new(KernelKind::TruncFractional { s: 0.5, eps: 0.1 }, 1.0, 1.0).unwrap();
        let v = eval_kernel(&k, &[0.1]);
        assert!((v - 25.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn j1_checks() {
        let k = KernelSpec::top_hat(1.0, 2.0).unwrap();
        assert_eq!(check_j1(&k, 0.5, 64, 1).unwrap(), (true, 2.0));
        assert!(!check_j1(&k, 0.6, 64, 1).unwrap().0);
        let g = KernelSpec::new(KernelKind::TruncGaussian, 1.0, 1.0).unwrap();
        let (holds, c) = check_j1(&g, 0.5, 64, 1).unwrap();
        assert!(holds);
        assert!((c - (-1.0f64).exp()).abs() < 1e-15);
        assert!(check_j1(&g, 0.0, 4, 1).is_err());
    }

    #[test]
    fn g1_checks() {
        let g = SurfaceKernelSpec::new(SurfaceKind::TruncGaussian, 0.4, 3.0).unwrap();
        let (holds, c) = check_g1(&g, 16);
        assert!(holds);
        assert!((c - 3.0 * (-1.0f64).exp()).abs() < 1e-14);
        let off = SurfaceKernelSpec::new(SurfaceKind::TopHat, 0.4, 0.0).unwrap();
        assert!(!check_g1(&off, 16).0);
    }

    #[test]
    fn rejects_invalid_specs() {
        assert!(KernelSpec::top_hat(0.0, 1.0).is_err());
        assert!(KernelSpec::top_hat(1.0, -1.0).is_err());
        assert!(KernelSpec::new(KernelKind::TruncFractional { s: 1.0, eps: 0.1 }, 1.0, 1.0).is_err());
        assert!(KernelSpec::top_hat(1.0, 1.0)
            .unwrap()
            .with_coefficient(Coefficient::Constant(0.0))
            .is_err());
    }

    fn unit_line(pad: usize) -> GridDomain {
        build_grid(1, &[(0.0, 1.0)], 0.1, |_| Label::Nonlocal, pad).unwrap()
    }

    #[test]
    fn exterior_mass_near_boundary() {
        let g = unit_line(3);
        let k = KernelSpec::top_hat(0.3, 1.0).unwrap();
        let x = g.cell_at([3 + 9, 0]);
        assert!((g.cell_center(x)[0] - 0.95).abs() < 1e-12);
        let m = exterior_mass(&k, x, &g, Label::Exterior).unwrap();
        assert!((m - 0.2).abs() < 1e-15, "{m}");
    }

    #[test]
    fn exterior_mass_far_from_boundary_is_zero() {
        let g = unit_line(3);
        let k = KernelSpec::top_hat(0.3, 1.0).unwrap();
        assert_eq!(
            exterior_mass(&k, g.cell_at([3 + 5, 0]), &g, Label::Exterior).unwrap(),
            0.0
        );
    }

    #[test]
    fn exterior_mass_requires_padding() {
        let g = unit_line(2);
        let k = KernelSpec::top_hat(0.3, 1.0).unwrap();
        assert!(matches!(
            exterior_mass(&k, 5, &g, Label::Exterior),
            Err(Error::InsufficientPadding { .. })
        ));
    }

    #[test]
    fn default_padding_covers_horizon() {
        assert_eq!(default_pad(0.3, 0.1), 3);
        assert_eq!(default_pad(0.25, 0.1), 3);
        assert_eq!(default_pad(0.2, 0.1), 2);
    }

    fn kernel_strategy() -> impl Strategy<Value = KernelSpec> {
        (0usize..3, 0.05f64..2.0, 0.1f64..10.0, 0.05f64..0.95, 0.01f64..0.5).prop_map(|(k, rho, c, s, eps)| {
            let kind = match k {
                0 => KernelKind::TopHat,
                1 => KernelKind::TruncGaussian,
                _ => KernelKind::TruncFractional { s, eps },
            };
            KernelSpec::new(kind, rho, c).unwrap()
        })
    }

    proptest! {
        #[test]
        fn kernels_are_even_and_nonnegative(
            spec in kernel_strategy(),
            z in prop::collection::vec(-3.0f64..3.0, 1..=2),
        ) {
            let mz: Vec<f64> = z.iter().map(|t| -t).collect();
            let a = eval_kernel(&spec, &z);
            prop_assert_eq!(a, eval_kernel(&spec, &mz));
            prop_assert!(a >= 0.0 && a.is_finite());
            let r = z.iter().map(|t| t * t).sum::<f64>().sqrt();
            if r > spec.rho {
                prop_assert_eq!(a, 0.0);
            } else {
                prop_assert!(a > 0.0);
            }
        }

        #[test]
        fn coefficients_are_symmetric_and_bounded(
            which in 0usize..3,
            vals in prop::collection::vec(0.1f64..5.0, 3),
            x in prop::array::uniform2(-2.0f64..2.0),
            y in prop::array::uniform2(-2.0f64..2.0),
            lx in 0usize..3,
            ly in 0usize..3,
        ) {
            let labels = [Label::Local, Label::Nonlocal, Label::Exterior];
            let coeff = match which {
                0 => Coefficient::Constant(vals[0]),
                1 => Coefficient::Piecewise { local: vals[0], nonlocal: vals[1], exterior: vals[2] },
                _ => Coefficient::Radial { center: [0.1, -0.2], base: vals[0], bump: vals[1], width: vals[2] },
            };
            coeff.validate().unwrap();
            let (lo, hi) = coeff.bounds();
            let b1 = coeff.pair(&x, labels[lx], &y, labels[ly]);
            let b2 = coeff.pair(&y, labels[ly], &x, labels[lx]);
            prop_assert_eq!(b1, b2);
            prop_assert!(b1 >= lo && b1 <= hi && lo > 0.0);
        }
    }
}

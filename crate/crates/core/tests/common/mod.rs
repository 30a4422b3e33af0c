//! Desk-scale configurations shared by the integration and acceptance tests.
#![allow(dead_code)]

use lnl_core::geometry::build_grid;
use lnl_core::kernels::{default_pad, KernelSpec, SurfaceKernelSpec, SurfaceKind};
use lnl_core::model::{FieldPreset, Profile};
use lnl_core::{GridDomain, Label, Model, ModelKind};

pub const RHO: f64 = 0.125;

/// Kernel amplitude giving a nonlocal stiffness comparable to the local one.
pub fn amplitude(dim: usize) -> f64 {
    RHO.powi(-(dim as i32) - 2)
}

pub fn kernel(dim: usize) -> KernelSpec {
    KernelSpec::top_hat(RHO, amplitude(dim)).unwrap()
}

/// `(0,1)`, LOCAL for `x < 0.5` and NONLOCAL otherwise, padded for `rho`.
pub fn split_1d(h: f64, rho: f64) -> GridDomain {
    build_grid(
        1,
        &[(0.0, 1.0)],
        h,
        |x| if x[0] < 0.5 { Label::Local } else { Label::Nonlocal },
        default_pad(rho, h),
    )
    .unwrap()
}

/// `(0,1)²`, LOCAL for `x < 0.5` and NONLOCAL otherwise, padded for `rho`.
pub fn split_2d(h: f64, rho: f64) -> GridDomain {
    build_grid(
        2,
        &[(0.0, 1.0), (0.0, 1.0)],
        h,
        |x| if x[0] < 0.5 { Label::Local } else { Label::Nonlocal },
        default_pad(rho, h),
    )
    .unwrap()
}

pub fn gkernel(dim: usize) -> SurfaceKernelSpec {
    SurfaceKernelSpec::new(SurfaceKind::TopHat, RHO, RHO.powi(-(dim as i32) - 1)).unwrap()
}

pub fn bump() -> FieldPreset {
    FieldPreset::scalar(Profile::GaussianBump {
        center: [0.4, 0.5],
        amplitude: 3.0,
        width: 0.3,
    })
}

pub fn elastic_force() -> FieldPreset {
    FieldPreset::vector(
        Profile::SeparableSine {
            amplitude: 2.0,
            freq: [1.0, 1.0],
        },
        [1.0, -0.5],
    )
}

/// A model of `kind` with a nonzero load and exterior datum; scalar kinds on a
/// 1D grid, elastic kinds on a 2D grid.
pub fn desk(kind: ModelKind) -> (GridDomain, Model) {
    let dim = if kind.is_elastic() { 2 } else { 1 };
    let mut model = Model::new(kind, kernel(dim));
    if kind.is_flux() {
        model = model.with_gkernel(gkernel(dim));
    }
    if kind.is_elastic() {
        let grid = split_2d(1.0 / 16.0, RHO);
        let model = model.with_source(elastic_force()).with_exterior(FieldPreset::vector(
            Profile::Linear {
                slope: [0.5, 0.25],
                intercept: 0.1,
            },
            [1.0, 1.0],
        ));
        (grid, model)
    } else {
        let grid = split_1d(1.0 / 32.0, RHO);
        let model = model
            .with_source(bump())
            .with_exterior(FieldPreset::scalar(Profile::Linear {
                slope: [0.5, 0.0],
                intercept: 0.2,
            }));
        (grid, model)
    }
}

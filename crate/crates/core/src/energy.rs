//! Direct evaluation of the discrete energies from their definitions.
//!
//! The local term is integrated with a tensor 2-point Gauss rule, nonlocal
//! terms are summed over ordered pairs of cells with the `1/r` prefactor, and
//! the surface term over (cell, facet) pairs. With `p = r = 2` this is the
//! same functional as the assembled quadratic form; for other exponents it is
//! the nonlinear energy `E^{p,r}`.

use rayon::prelude::*;
use smallvec::SmallVec;

use crate::geometry::{extract_gamma, FacetSet, GridDomain, Label, Point};
use crate::kernels::eval_kernel;
use crate::model::{DofMap, Model, NonlocalMode};
use crate::{Error, Result};

const GAUSS: [f64; 2] = [0.5 - 0.288_675_134_594_812_9, 0.5 + 0.288_675_134_594_812_9];

/// Whether the ordered pair `(x, y)` lies in the index set of `mode`.
fn in_index_set(mode: NonlocalMode, lx: Label, ly: Label) -> bool {
    use Label::*;
    match mode {
        NonlocalMode::Source => lx == Nonlocal,
        NonlocalMode::SourceFull => lx != Local && !(lx == Exterior && ly == Exterior),
        NonlocalMode::Flux => lx == Nonlocal && ly != Local,
        NonlocalMode::Interior => lx == Nonlocal && ly != Exterior,
    }
}

pub struct EnergyEvaluator<'a> {
    grid: &'a GridDomain,
    model: &'a Model,
    dofmap: &'a DofMap,
    gamma: FacetSet,
    p: f64,
    r: f64,
}

type Stencil = SmallVec<[(usize, f64); 4]>;

impl<'a> EnergyEvaluator<'a> {
    /// Evaluator of the quadratic energy (`p = r = 2`).
    pub fn quadratic(grid: &'a GridDomain, model: &'a Model, dofmap: &'a DofMap) -> Self {
        Self::with_exponents(grid, model, dofmap, 2.0, 2.0)
    }

    /// Evaluator of `E^{p,r}` with the exponents stored in the model.
    pub fn nonlinear(grid: &'a GridDomain, model: &'a Model, dofmap: &'a DofMap) -> Self {
        Self::with_exponents(grid, model, dofmap, model.nonlinear.p, model.nonlinear.r)
    }

    pub fn with_exponents(grid: &'a GridDomain, model: &'a Model, dofmap: &'a DofMap, p: f64, r: f64) -> Self {
        EnergyEvaluator {
            grid,
            model,
            dofmap,
            gamma: extract_gamma(grid),
            p,
            r,
        }
    }

    fn block(&self) -> usize {
        self.dofmap.block()
    }

    fn vertex_value(&self, u: &[f64], v: usize, comp: usize) -> f64 {
        match self.dofmap.vertex_node(v) {
            Some(k) => u[self.dofmap.dof(k, comp)],
            None => self
                .model
                .exterior
                .value(&self.grid.vertex_coords(v), self.grid.dim(), comp),
        }
    }

    fn cell_value(&self, u: &[f64], c: usize, comp: usize) -> f64 {
        match self.grid.label(c) {
            Label::Nonlocal => u[self.dofmap.dof(self.dofmap.cell_node(c).unwrap(), comp)],
            Label::Local => {
                let vs = self.grid.cell_vertices(c);
                vs.iter().map(|&v| self.vertex_value(u, v, comp)).sum::<f64>() / vs.len() as f64
            }
            Label::Exterior => self
                .model
                .exterior
                .value(&self.grid.cell_center(c), self.grid.dim(), comp),
        }
    }

    /// Unknowns that a cell value depends on, with coefficients (component 0).
    fn cell_stencil(&self, c: usize) -> Stencil {
        match self.grid.label(c) {
            Label::Nonlocal => SmallVec::from_slice(&[(self.dofmap.cell_node(c).unwrap(), 1.0)]),
            Label::Local => {
                let vs = self.grid.cell_vertices(c);
                let w = 1.0 / vs.len() as f64;
                vs.iter()
                    .filter_map(|&v| self.dofmap.vertex_node(v).map(|k| (k, w)))
                    .collect()
            }
            Label::Exterior => SmallVec::new(),
        }
    }

    /// Vertex values of a cell, `vals[a][comp]`.
    fn cell_vertex_values(&self, u: &[f64], c: usize) -> SmallVec<[[f64; 2]; 4]> {
        self.grid
            .cell_vertices(c)
            .iter()
            .map(|&v| {
                let mut x = [0.0; 2];
                for (i, xi) in x.iter_mut().enumerate().take(self.block()) {
                    *xi = self.vertex_value(u, v, i);
                }
                x
            })
            .collect()
    }

    /// Gauss points (local coordinates in `[0,1]^N`) and weights.
    fn gauss_points(&self) -> Vec<([f64; 2], f64)> {
        let dim = self.grid.dim();
        let vol = self.grid.cell_volume();
        let w = vol / (1usize << dim) as f64;
        if dim == 1 {
            GAUSS.iter().map(|&t| ([t, 0.0], w)).collect()
        } else {
            let mut out = Vec::new();
            for &ty in &GAUSS {
                for &tx in &GAUSS {
                    out.push(([tx, ty], w));
                }
            }
            out
        }
    }

    /// `∂_k φ_a` at local coordinates `t`.
    fn shape_gradient(&self, a: usize, t: &[f64; 2]) -> [f64; 2] {
        let dim = self.grid.dim();
        let h = self.grid.h();
        let mut g = [0.0; 2];
        for (k, gk) in g.iter_mut().enumerate().take(dim) {
            let mut p = 1.0;
            for m in 0..dim {
                let bit = (a >> m) & 1;
                p *= if m == k {
                    if bit == 1 {
                        1.0 / h
                    } else {
                        -1.0 / h
                    }
                } else if bit == 1 {
                    t[m]
                } else {
                    1.0 - t[m]
                };
            }
            *gk = p;
        }
        g
    }

    /// `∇U` at a Gauss point: `grad[i][k] = ∂_k U_i`.
    fn field_gradient(&self, vals: &[[f64; 2]], t: &[f64; 2]) -> [[f64; 2]; 2] {
        let mut grad = [[0.0; 2]; 2];
        for (a, va) in vals.iter().enumerate() {
            let ga = self.shape_gradient(a, t);
            for i in 0..self.block() {
                for k in 0..self.grid.dim() {
                    grad[i][k] += va[i] * ga[k];
                }
            }
        }
        grad
    }

    fn local_density(&self, grad: &[[f64; 2]; 2], coeff: f64) -> f64 {
        let dim = self.grid.dim();
        if self.model.kind.is_elastic() {
            let mut strain2 = 0.0;
            let mut div = 0.0;
            for i in 0..dim {
                div += grad[i][i];
                for j in 0..dim {
                    let e = 0.5 * (grad[i][j] + grad[j][i]);
                    strain2 += e * e;
                }
            }
            self.model.elastic.mu * strain2 + 0.5 * self.model.elastic.lambda * div * div
        } else {
            let n2: f64 = (0..dim).map(|k| grad[0][k] * grad[0][k]).sum();
            coeff * n2.powf(0.5 * self.p) / self.p
        }
    }

    fn local_energy(&self, u: &[f64]) -> f64 {
        let gauss = self.gauss_points();
        let per_cell: Vec<f64> = self
            .grid
            .cells_with(Label::Local)
            .par_iter()
            .map(|&c| {
                let coeff = self.model.local_coeff.point(&self.grid.cell_center(c), Label::Local);
                let vals = self.cell_vertex_values(u, c);
                gauss
                    .iter()
                    .map(|(t, w)| w * self.local_density(&self.field_gradient(&vals, t), coeff))
                    .sum::<f64>()
            })
            .collect();
        per_cell.iter().sum()
    }

    /// Projected (or scalar) difference `u(y) − u(x)` for a displacement `z`.
    fn difference(&self, u: &[f64], x: usize, y: usize, z: &Point) -> f64 {
        if self.model.kind.is_elastic() {
            (0..self.grid.dim())
                .map(|d| z[d] * (self.cell_value(u, y, d) - self.cell_value(u, x, d)))
                .sum()
        } else {
            self.cell_value(u, y, 0) - self.cell_value(u, x, 0)
        }
    }

    /// Ordered pairs `(x, y)` in the index set within the horizon, with
    /// weights `J·b·h^{2N}` and displacements `y − x`.
    fn ordered_pairs(&self, x: usize) -> Vec<(usize, f64, Point)> {
        let grid = self.grid;
        let mode = self.model.kind.nonlocal_mode();
        let kernel = &self.model.kernel;
        let exterior = self.dofmap.constraints().exterior;
        let lx = grid.label(x);
        let mut out = Vec::new();
        if !exterior && lx == Label::Exterior {
            return out;
        }
        let hx = grid.cell_half_index(x);
        let cx = grid.cell_center(x);
        let vol2 = grid.cell_volume() * grid.cell_volume();
        for off in grid.offsets(grid.reach(kernel.rho)) {
            let Some(y) = grid.cell_offset(x, off) else {
                continue;
            };
            let ly = grid.label(y);
            if y == x || !in_index_set(mode, lx, ly) || (!exterior && ly == Label::Exterior) {
                continue;
            }
            let z = grid.displacement(grid.cell_half_index(y), hx);
            let j = eval_kernel(kernel, &z[..grid.dim()]);
            if j == 0.0 {
                continue;
            }
            let b = kernel.coefficient.pair(&cx, lx, &grid.cell_center(y), ly);
            out.push((y, j * b * vol2, z));
        }
        out
    }

    fn nonlocal_energy(&self, u: &[f64]) -> f64 {
        let r = self.r;
        let per_cell: Vec<f64> = (0..self.grid.num_cells())
            .into_par_iter()
            .map(|x| {
                self.ordered_pairs(x)
                    .into_iter()
                    .map(|(y, w, z)| w * self.difference(u, x, y, &z).abs().powf(r))
                    .sum::<f64>()
            })
            .collect();
        per_cell.iter().sum::<f64>() / r
    }

    /// `(cell, facet index, weight G·|facet|·h^N, displacement cell − facet)`.
    fn gamma_pairs(&self) -> Vec<(usize, usize, f64, Point)> {
        let mut out = Vec::new();
        let Some(g) = self.model.gkernel.filter(|_| self.model.kind.is_flux()) else {
            return out;
        };
        let grid = self.grid;
        for c in grid.cells_with(Label::Nonlocal) {
            let hc = grid.cell_half_index(c);
            for (fi, f) in self.gamma.facets.iter().enumerate() {
                let z = grid.displacement(hc, f.half_index);
                let gv = g.eval(&z[..grid.dim()]);
                if gv != 0.0 {
                    out.push((c, fi, gv * f.measure * grid.cell_volume(), z));
                }
            }
        }
        out
    }

    fn facet_value(&self, u: &[f64], fi: usize, comp: usize) -> f64 {
        let vs = &self.gamma.facets[fi].vertices;
        vs.iter().map(|&v| self.vertex_value(u, v, comp)).sum::<f64>() / vs.len() as f64
    }

    fn gamma_energy(&self, u: &[f64]) -> f64 {
        let mut e = 0.0;
        for (c, fi, w, z) in self.gamma_pairs() {
            let d = if self.model.kind.is_elastic() {
                (0..self.grid.dim())
                    .map(|k| z[k] * (self.cell_value(u, c, k) - self.facet_value(u, fi, k)))
                    .sum::<f64>()
            } else {
                self.cell_value(u, c, 0) - self.facet_value(u, fi, 0)
            };
            e += w * d.abs().powf(self.r);
        }
        e / self.r
    }

    fn load_energy(&self, u: &[f64]) -> f64 {
        let grid = self.grid;
        let f = &self.model.source;
        let dim = grid.dim();
        let mut s = 0.0;
        for v in 0..grid.num_vertices() {
            if !self.dofmap.in_closure(v) {
                continue;
            }
            let x = grid.vertex_coords(v);
            let w = DofMap::vertex_weight(grid, v);
            for i in 0..self.block() {
                s += f.value(&x, dim, i) * w * self.vertex_value(u, v, i);
            }
        }
        for c in grid.cells_with(Label::Nonlocal) {
            let x = grid.cell_center(c);
            for i in 0..self.block() {
                s += f.value(&x, dim, i) * grid.cell_volume() * self.cell_value(u, c, i);
            }
        }
        -s
    }

    pub fn energy(&self, u: &[f64]) -> f64 {
        self.local_energy(u) + self.nonlocal_energy(u) + self.gamma_energy(u) + self.load_energy(u)
    }

    /// `E(u + αd) − E(u)` for scalar models, evaluated term by term so that
    /// changes far below the rounding level of `E` itself stay accurate.
    pub fn energy_change(&self, u: &[f64], d: &[f64], alpha: f64) -> Result<f64> {
        if self.model.kind.is_elastic() {
            return Err(Error::InvalidParameter(
                "energy changes of the direct evaluator are scalar only".into(),
            ));
        }
        let grid = self.grid;
        let dofmap = self.dofmap;
        let (p, r) = (self.p, self.r);
        let ad: Vec<f64> = d.iter().map(|x| alpha * x).collect();
        let stencil_value = |s: &Stencil| -> f64 { s.iter().map(|&(k, c)| c * ad[k]).sum() };

        let gauss = self.gauss_points();
        let zero_datum = |v: usize| dofmap.vertex_node(v).map_or(0.0, |k| ad[k]);
        let local: f64 = grid
            .cells_with(Label::Local)
            .par_iter()
            .map(|&c| {
                let coeff = self.model.local_coeff.point(&grid.cell_center(c), Label::Local);
                let vals = self.cell_vertex_values(u, c);
                let dvals: SmallVec<[[f64; 2]; 4]> =
                    grid.cell_vertices(c).iter().map(|&v| [zero_datum(v), 0.0]).collect();
                gauss
                    .iter()
                    .map(|(t, w)| {
                        let g = self.field_gradient(&vals, t);
                        let dg = self.field_gradient(&dvals, t);
                        let (mut n2, mut cross, mut d2) = (0.0, 0.0, 0.0);
                        for k in 0..grid.dim() {
                            n2 += g[0][k] * g[0][k];
                            cross += g[0][k] * dg[0][k];
                            d2 += dg[0][k] * dg[0][k];
                        }
                        w * coeff * power_change(n2, 2.0 * cross + d2, 0.5 * p) / p
                    })
                    .sum::<f64>()
            })
            .collect::<Vec<f64>>()
            .iter()
            .sum();

        let nonlocal: f64 = (0..grid.num_cells())
            .into_par_iter()
            .map(|x| {
                let sx = self.cell_stencil(x);
                self.ordered_pairs(x)
                    .into_iter()
                    .map(|(y, w, z)| {
                        let a = self.difference(u, x, y, &z);
                        let b = stencil_value(&self.cell_stencil(y)) - stencil_value(&sx);
                        w * abs_power_change(a, b, r)
                    })
                    .sum::<f64>()
            })
            .collect::<Vec<f64>>()
            .iter()
            .sum::<f64>()
            / r;

        let mut gamma = 0.0;
        for (c, fi, w, _) in self.gamma_pairs() {
            let a = self.cell_value(u, c, 0) - self.facet_value(u, fi, 0);
            let vs = &self.gamma.facets[fi].vertices;
            let trace = vs.iter().map(|&v| zero_datum(v)).sum::<f64>() / vs.len() as f64;
            let b = stencil_value(&self.cell_stencil(c)) - trace;
            gamma += w * abs_power_change(a, b, r);
        }
        gamma /= r;

        let f = &self.model.source;
        let load: f64 = (0..dofmap.num_nodes())
            .map(|k| f.value(&dofmap.node_coords(grid, k), grid.dim(), 0) * dofmap.node_weight(grid, k) * ad[k])
            .sum();
        Ok(local + nonlocal + gamma - load)
    }

    /// Gradient of the scalar energy with respect to the unknowns.
    pub fn gradient(&self, u: &[f64]) -> Result<Vec<f64>> {
        if self.model.kind.is_elastic() {
            return Err(Error::InvalidParameter(
                "analytic gradient of the direct evaluator is scalar only".into(),
            ));
        }
        let grid = self.grid;
        let dofmap = self.dofmap;
        let (p, r) = (self.p, self.r);
        let mut g = vec![0.0; dofmap.len()];

        let gauss = self.gauss_points();
        let local: Vec<Vec<(usize, f64)>> = grid
            .cells_with(Label::Local)
            .par_iter()
            .map(|&c| {
                let coeff = self.model.local_coeff.point(&grid.cell_center(c), Label::Local);
                let vals = self.cell_vertex_values(u, c);
                let vs = grid.cell_vertices(c);
                let mut out = Vec::new();
                for (t, w) in &gauss {
                    let grad = self.field_gradient(&vals, t);
                    let n2: f64 = (0..grid.dim()).map(|k| grad[0][k] * grad[0][k]).sum();
                    if n2 == 0.0 {
                        continue;
                    }
                    let s = coeff * n2.powf(0.5 * (p - 2.0));
                    for (a, &v) in vs.iter().enumerate() {
                        if let Some(k) = dofmap.vertex_node(v) {
                            let ga = self.shape_gradient(a, t);
                            let d: f64 = (0..grid.dim()).map(|m| grad[0][m] * ga[m]).sum();
                            out.push((k, w * s * d));
                        }
                    }
                }
                out
            })
            .collect();
        for (k, v) in local.into_iter().flatten() {
            g[k] += v;
        }

        let pairs: Vec<Vec<(usize, f64)>> = (0..grid.num_cells())
            .into_par_iter()
            .map(|x| {
                let mut out = Vec::new();
                for (y, w, z) in self.ordered_pairs(x) {
                    let d = self.difference(u, x, y, &z);
                    if d == 0.0 {
                        continue;
                    }
                    let s = w * d.abs().powf(r - 1.0) * d.signum();
                    for (k, c) in self.cell_stencil(y) {
                        out.push((k, s * c));
                    }
                    for (k, c) in self.cell_stencil(x) {
                        out.push((k, -s * c));
                    }
                }
                out
            })
            .collect();
        for (k, v) in pairs.into_iter().flatten() {
            g[k] += v;
        }

        for (c, fi, w, _) in self.gamma_pairs() {
            let d = self.cell_value(u, c, 0) - self.facet_value(u, fi, 0);
            if d == 0.0 {
                continue;
            }
            let s = w * d.abs().powf(r - 1.0) * d.signum();
            for (k, cf) in self.cell_stencil(c) {
                g[k] += s * cf;
            }
            let vs = &self.gamma.facets[fi].vertices;
            for &v in vs {
                if let Some(k) = dofmap.vertex_node(v) {
                    g[k] -= s / vs.len() as f64;
                }
            }
        }

        let f = &self.model.source;
        for k in 0..dofmap.num_nodes() {
            let x = dofmap.node_coords(grid, k);
            g[k] -= f.value(&x, grid.dim(), 0) * dofmap.node_weight(grid, k);
        }
        Ok(g)
    }
}

/// `(x + δ)^q − x^q` for `x ≥ 0`, `x + δ ≥ 0`, without cancellation.
fn power_change(x: f64, delta: f64, q: f64) -> f64 {
    let y = (x + delta).max(0.0);
    if x > 0.0 && y > 0.0 {
        x.powf(q) * (q * (delta / x).ln_1p()).exp_m1()
    } else {
        y.powf(q) - x.powf(q)
    }
}

/// `|a + b|^q − |a|^q` without cancellation.
fn abs_power_change(a: f64, b: f64, q: f64) -> f64 {
    if a != 0.0 && (a + b) * a > 0.0 {
        a.abs().powf(q) * (q * (b / a).ln_1p()).exp_m1()
    } else {
        (a + b).abs().powf(q) - a.abs().powf(q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_grid;
    use crate::kernels::KernelSpec;
    use crate::model::{Constraints, FieldPreset, ModelKind, Profile};

    #[test]
    fn index_sets() {
        use Label::*;
        assert!(in_index_set(NonlocalMode::Source, Nonlocal, Exterior));
        assert!(!in_index_set(NonlocalMode::Source, Exterior, Nonlocal));
        assert!(in_index_set(NonlocalMode::SourceFull, Exterior, Nonlocal));
        assert!(in_index_set(NonlocalMode::SourceFull, Exterior, Local));
        assert!(!in_index_set(NonlocalMode::SourceFull, Exterior, Exterior));
        assert!(!in_index_set(NonlocalMode::Flux, Nonlocal, Local));
        assert!(!in_index_set(NonlocalMode::Interior, Nonlocal, Exterior));
    }

    #[test]
    fn power_changes_match_direct_differences() {
        for (x, d, q) in [(2.0, 0.5, 1.5), (1.0, -0.25, 2.0), (0.0, 3.0, 2.5), (1.0, -1.0, 3.0)] {
            let direct = f64::powf(x + d, q) - f64::powf(x, q);
            assert!((power_change(x, d, q) - direct).abs() < 1e-12);
        }
        for (a, b, q) in [(2.0, 0.5, 1.5), (-1.0, 0.25, 2.0), (0.5, -1.5, 3.0), (0.0, -2.0, 4.0)] {
            let direct = f64::abs(a + b).powf(q) - f64::abs(a).powf(q);
            assert!((abs_power_change(a, b, q) - direct).abs() < 1e-12);
        }
        assert!((abs_power_change(1.0, 1e-20, 2.0) - 2e-20).abs() < 1e-34);
    }

    #[test]
    fn linear_local_field_energy() {
        // u = x on (0,1) without elimination: ½∫|u'|² = ½
        let g = build_grid(1, &[(0.0, 1.0)], 0.25, |_| Label::Local, 1).unwrap();
        let k = KernelSpec::top_hat(0.25, 1.0).unwrap();
        let model = Model::new(ModelKind::ScalarSource, k).with_constraints(Constraints::NONE);
        let d = DofMap::build(&g, 1, model.constraints);
        let u: Vec<f64> = (0..d.num_nodes()).map(|k| d.node_coords(&g, k)[0]).collect();
        let e = EnergyEvaluator::quadratic(&g, &model, &d).energy(&u);
        assert!((e - 0.5).abs() < 1e-14, "{e}");
    }

    #[test]
    fn p_laplacian_of_linear_field() {
        let g = build_grid(1, &[(0.0, 1.0)], 0.25, |_| Label::Local, 1).unwrap();
        let k = KernelSpec::top_hat(0.25, 1.0).unwrap();
        let model = Model::new(ModelKind::Nonlinear, k)
            .with_constraints(Constraints::NONE)
            .with_nonlinear(4.0, 2.0)
            .with_source(FieldPreset::scalar(Profile::Zero));
        let d = DofMap::build(&g, 1, model.constraints);
        let u: Vec<f64> = (0..d.num_nodes()).map(|k| 2.0 * d.node_coords(&g, k)[0]).collect();
        let e = EnergyEvaluator::nonlinear(&g, &model, &d).energy(&u);
        assert!((e - 16.0 / 4.0).abs() < 1e-12, "{e}");
    }
}

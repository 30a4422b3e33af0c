use super::components::{delta_connected_components, face_connected_components, set_distance};
use super::gamma::{extract_gamma, FacetSet};
use super::grid::{norm, GridDomain, Label};
use crate::{Error, Result};

/// How the local and nonlocal regions are coupled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CouplingMode {
    /// Volumetric coupling: needs `dist(Ω_ℓ, Ω_nℓ) < δ`.
    Source,
    /// Coupling through Γ: needs `dist(Γ, Ω_nℓ) < δ`.
    Flux,
}

/// Per-condition outcomes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Passes {
    /// Ω_ℓ is face-connected.
    pub local_connected: bool,
    /// Ω_nℓ has at most one δ-component.
    pub nonlocal_connected: bool,
    pub p1: bool,
    pub p2: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdmissibilityReport {
    pub delta: f64,
    /// `None` for the generalized check.
    pub mode: Option<CouplingMode>,
    pub local_connected: bool,
    pub local_components: Vec<Vec<usize>>,
    pub nl_components: Vec<Vec<usize>>,
    pub dist_local_nonlocal: f64,
    pub dist_gamma_nonlocal: f64,
    pub passes: Passes,
    pub generalized_graph_connected: bool,
    pub touches_exterior: bool,
}

impl AdmissibilityReport {
    /// Whether the hypotheses for the report's mode hold. The generalized
    /// report requires a connected component graph that touches the exterior.
    pub fn admissible(&self) -> bool {
        let p = &self.passes;
        match self.mode {
            Some(CouplingMode::Source) => p.local_connected && p.nonlocal_connected && p.p1,
            Some(CouplingMode::Flux) => p.local_connected && p.nonlocal_connected && p.p2,
            None => self.generalized_graph_connected && self.touches_exterior,
        }
    }
}

pub fn check_admissibility(
    grid: &GridDomain,
    gamma: &FacetSet,
    delta: f64,
    mode: CouplingMode,
) -> Result<AdmissibilityReport> {
    analyze(grid, gamma, delta, Some(mode))
}

/// Admissibility for several local components and several δ-components.
pub fn check_generalized_admissibility(grid: &GridDomain, delta: f64) -> Result<AdmissibilityReport> {
    analyze(grid, &extract_gamma(grid), delta, None)
}

fn analyze(grid: &GridDomain, gamma: &FacetSet, delta: f64, mode: Option<CouplingMode>) -> Result<AdmissibilityReport> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    let local = grid.cells_with(Label::Local);
    let nonlocal = grid.cells_with(Label::Nonlocal);
    let exterior = grid.cells_with(Label::Exterior);

    let local_components = face_connected_components(&local, grid);
    let nl_components = delta_connected_components(&nonlocal, grid, delta)?;
    let dist_local_nonlocal = set_distance(grid, &local, &nonlocal);
    let dist_gamma_nonlocal = gamma_distance(grid, gamma, &nonlocal);

    let passes = Passes {
        local_connected: local_components.len() == 1,
        nonlocal_connected: nl_components.len() <= 1,
        p1: dist_local_nonlocal < delta,
        p2: dist_gamma_nonlocal < delta,
    };

    let nodes: Vec<&Vec<usize>> = local_components.iter().chain(&nl_components).collect();
    let generalized_graph_connected = graph_connected(grid, &nodes, delta);
    let touches_exterior = local_components.iter().any(|c| on_boundary(grid, c))
        || nl_components
            .iter()
            .any(|c| on_boundary(grid, c) || set_distance(grid, c, &exterior) < delta);

    Ok(AdmissibilityReport {
        delta,
        mode,
        local_connected: passes.local_connected,
        local_components,
        nl_components,
        dist_local_nonlocal,
        dist_gamma_nonlocal,
        passes,
        generalized_graph_connected,
        touches_exterior,
    })
}

fn gamma_distance(grid: &GridDomain, gamma: &FacetSet, nonlocal: &[usize]) -> f64 {
    let mut best = f64::INFINITY;
    for f in gamma.iter() {
        for &c in nonlocal {
            best = best.min(norm(&grid.displacement(grid.cell_half_index(c), f.half_index)));
        }
    }
    best
}

/// A component has a face on ∂Ω if some face neighbor is EXTERIOR or off-grid.
fn on_boundary(grid: &GridDomain, cells: &[usize]) -> bool {
    cells.iter().any(|&c| {
        (0..grid.dim()).any(|axis| {
            [-1, 1].into_iter().any(|side| {
                grid.face_neighbor(c, axis, side)
                    .is_none_or(|o| grid.label(o) == Label::Exterior)
            })
        })
    })
}

fn graph_connected(grid: &GridDomain, nodes: &[&Vec<usize>], delta: f64) -> bool {
    if nodes.len() <= 1 {
        return !nodes.is_empty();
    }
    let mut seen = vec![false; nodes.len()];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(i) = stack.pop() {
        for j in 0..nodes.len() {
            if !seen[j] && set_distance(grid, nodes[i], nodes[j]) < delta {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_grid;

    fn line(h: f64, pad: usize, f: impl Fn(f64) -> Label) -> GridDomain {
        build_grid(1, &[(0.0, 1.0)], h, |x| f(x[0]), pad).unwrap()
    }

    #[test]
    fn split_interval_passes_everything() {
        let g = line(0.1, 3, |x| if x < 0.5 { Label::Local } else { Label::Nonlocal });
        let gamma = extract_gamma(&g);
        for mode in [CouplingMode::Source, CouplingMode::Flux] {
            let r = check_admissibility(&g, &gamma, 0.3, mode).unwrap();
            assert!(r.passes.local_connected && r.passes.nonlocal_connected);
            assert!(r.passes.p1 && r.passes.p2);
            assert!(r.admissible());
            assert!((r.dist_local_nonlocal - 0.1).abs() < 1e-12);
            assert!((r.dist_gamma_nonlocal - 0.05).abs() < 1e-12);
        }
    }

    #[test]
    fn gap_breaks_p1() {
        let g = line(0.05, 5, |x| {
            if x < 0.3 {
                Label::Local
            } else if x < 0.6 {
                Label::Exterior
            } else {
                Label::Nonlocal
            }
        });
        let r = check_admissibility(&g, &extract_gamma(&g), 0.25, CouplingMode::Source).unwrap();
        assert!(!r.passes.p1);
        assert!(!r.admissible());
    }

    #[test]
    fn two_nonlocal_pieces_within_delta_join() {
        let g = line(0.025, 10, |x| {
            if (0.5..0.7).contains(&x) || x >= 0.9 {
                Label::Nonlocal
            } else {
                Label::Local
            }
        });
        let r = check_admissibility(&g, &extract_gamma(&g), 0.25, CouplingMode::Source).unwrap();
        assert_eq!(r.nl_components.len(), 1);
        // local region is split into two pieces by the first nonlocal block
        assert!(!r.local_connected);
    }

    #[test]
    fn generalized_chain_is_connected() {
        let g = line(0.05, 4, |x| {
            if x < 0.3 {
                Label::Local
            } else if x < 0.6 {
                Label::Nonlocal
            } else {
                Label::Local
            }
        });
        let r = check_generalized_admissibility(&g, 0.2).unwrap();
        assert_eq!(r.local_components.len(), 2);
        assert!(r.generalized_graph_connected);
        assert!(r.touches_exterior);
        assert!(r.admissible());
    }

    #[test]
    fn separated_clusters_are_not_connected() {
        let g = line(0.05, 4, |x| {
            if x < 0.2 {
                Label::Local
            } else if x < 0.6 {
                Label::Exterior
            } else {
                Label::Nonlocal
            }
        });
        let r = check_generalized_admissibility(&g, 0.2).unwrap();
        assert!(!r.generalized_graph_connected);
    }

    #[test]
    fn reports_are_reproducible() {
        let g = line(0.1, 3, |x| if x < 0.5 { Label::Local } else { Label::Nonlocal });
        let a = check_generalized_admissibility(&g, 0.3).unwrap();
        let b = check_generalized_admissibility(&g, 0.3).unwrap();
        assert_eq!(a, b);
    }
}

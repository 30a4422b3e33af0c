//! Rasterized domains, δ-connectivity, the interface Γ and admissibility.

pub mod admissibility;
pub mod components;
pub mod gamma;
pub mod grid;
pub mod shapes;

pub use admissibility::{
    check_admissibility, check_generalized_admissibility, AdmissibilityReport, CouplingMode, Passes,
};
pub use components::{delta_connected_components, face_connected_components, set_distance};
pub use gamma::{extract_gamma, Facet, FacetSet};
pub use grid::{build_grid, norm, GridDomain, HalfIndex, Label, MultiIndex, Point, MAX_DIM};
pub use shapes::{parse_mask, write_mask, Ball, Mask, Region, Shape};

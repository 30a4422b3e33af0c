use smallvec::SmallVec;

use super::grid::{GridDomain, HalfIndex, Label, Point, MAX_DIM};

/// One face of the rasterized interface Γ between a LOCAL cell and a
/// NONLOCAL neighbor.
#[derive(Clone, Debug, PartialEq)]
pub struct Facet {
    /// The LOCAL cell owning the facet.
    pub cell: usize,
    pub axis: usize,
    /// +1 or −1: the outward normal is `side · e_axis`.
    pub side: i64,
    pub normal: Point,
    pub center: Point,
    pub half_index: HalfIndex,
    /// `h^(dim−1)`.
    pub measure: f64,
    /// Vertices spanning the facet (1 in 1D, 2 in 2D).
    pub vertices: SmallVec<[usize; 2]>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FacetSet {
    pub facets: Vec<Facet>,
}

impl FacetSet {
    pub fn len(&self) -> usize {
        self.facets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facets.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Facet> {
        self.facets.iter()
    }
}

/// Collects every LOCAL/NONLOCAL face inside Ω. Faces on ∂Ω are skipped.
pub fn extract_gamma(grid: &GridDomain) -> FacetSet {
    let dim = grid.dim();
    let h = grid.h();
    let mut facets = Vec::new();
    for cell in grid.cells_with(Label::Local) {
        let cverts = grid.cell_vertices(cell);
        for axis in 0..dim {
            for side in [-1i64, 1] {
                let Some(nb) = grid.face_neighbor(cell, axis, side) else {
                    continue;
                };
                if grid.label(nb) != Label::Nonlocal {
                    continue;
                }
                let bit = usize::from(side > 0);
                let vertices: SmallVec<[usize; 2]> = cverts
                    .iter()
                    .enumerate()
                    .filter(|(a, _)| (a >> axis) & 1 == bit)
                    .map(|(_, &v)| v)
                    .collect();
                let mut center = grid.cell_center(cell);
                center[axis] += side as f64 * 0.5 * h;
                let mut half_index = grid.cell_half_index(cell);
                half_index[axis] += side;
                let mut normal = [0.0; MAX_DIM];
                normal[axis] = side as f64;
                facets.push(Facet {
                    cell,
                    axis,
                    side,
                    normal,
                    center,
                    half_index,
                    measure: h.powi(dim as i32 - 1),
                    vertices,
                });
            }
        }
    }
    FacetSet { facets }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_grid;

    #[test]
    fn single_interface_point_in_1d() {
        let g = build_grid(
            1,
            &[(0.0, 1.0)],
            0.25,
            |x| if x[0] < 0.5 { Label::Local } else { Label::Nonlocal },
            1,
        )
        .unwrap();
        let gamma = extract_gamma(&g);
        assert_eq!(gamma.len(), 1);
        let f = &gamma.facets[0];
        assert_eq!(f.center[0], 0.5);
        assert_eq!(f.measure, 1.0);
        assert_eq!(f.normal[0], 1.0);
        assert_eq!(g.vertex_coords(f.vertices[0])[0], 0.5);
    }

    #[test]
    fn all_local_has_no_interface() {
        let g = build_grid(1, &[(0.0, 1.0)], 0.25, |_| Label::Local, 2).unwrap();
        assert!(extract_gamma(&g).is_empty());
    }

    #[test]
    fn square_split_in_half() {
        let h = 0.25;
        let g = build_grid(
            2,
            &[(0.0, 1.0), (0.0, 1.0)],
            h,
            |x| if x[0] < 0.5 { Label::Local } else { Label::Nonlocal },
            1,
        )
        .unwrap();
        let gamma = extract_gamma(&g);
        assert_eq!(gamma.len(), 4);
        for f in gamma.iter() {
            assert_eq!(f.measure, h);
            assert_eq!(f.center[0], 0.5);
            assert_eq!(f.vertices.len(), 2);
            for &v in &f.vertices {
                assert_eq!(g.vertex_coords(v)[0], 0.5);
            }
        }
    }

    #[test]
    fn faces_against_exterior_are_not_gamma() {
        let g = build_grid(
            1,
            &[(0.0, 1.0)],
            0.1,
            |x| {
                if x[0] < 0.3 {
                    Label::Local
                } else if x[0] < 0.6 {
                    Label::Exterior
                } else {
                    Label::Nonlocal
                }
            },
            1,
        )
        .unwrap();
        assert!(extract_gamma(&g).is_empty());
    }
}

use smallvec::SmallVec;

use crate::{Error, Result};

/// Largest supported grid dimension.
pub const MAX_DIM: usize = 2;

/// Coordinates of a point; entries past `dim` are zero.
pub type Point = [f64; MAX_DIM];

/// Multi-index into the padded cell or vertex lattice.
pub type MultiIndex = [usize; MAX_DIM];

/// Lattice position measured in half cells from the padded origin.
///
/// Cell centers sit at odd values, vertices at even values. Displacements
/// between lattice points are formed from these integers so that `J(x−y)`
/// and `J(y−x)` see bit-identical arguments.
pub type HalfIndex = [i64; MAX_DIM];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Local,
    Nonlocal,
    Exterior,
}

impl Label {
    pub fn as_char(self) -> char {
        match self {
            Label::Local => 'L',
            Label::Nonlocal => 'N',
            Label::Exterior => 'E',
        }
    }

    pub fn from_char(c: char) -> Option<Label> {
        match c {
            'L' => Some(Label::Local),
            'N' => Some(Label::Nonlocal),
            'E' => Some(Label::Exterior),
            _ => None,
        }
    }

    pub fn in_domain(self) -> bool {
        self != Label::Exterior
    }
}

/// Uniform Cartesian grid with per-cell labels and `pad` exterior layers
/// around the bounding box.
///
/// Cells and vertices are numbered row-major with the first axis fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct GridDomain {
    dim: usize,
    bbox: Vec<(f64, f64)>,
    h: f64,
    pad: usize,
    counts: [usize; MAX_DIM],
    shape: [usize; MAX_DIM],
    labels: Vec<Label>,
}

/// Builds a grid, labeling each interior cell center with `labeler`.
///
/// Cells in the padding are always EXTERIOR; the labeler is only consulted
/// inside the bounding box.
pub fn build_grid<F>(dim: usize, bbox: &[(f64, f64)], h: f64, labeler: F, pad: usize) -> Result<GridDomain>
where
    F: Fn(&[f64]) -> Label,
{
    let (counts, shape) = lattice_shape(dim, bbox, h, pad)?;
    let mut grid = GridDomain {
        dim,
        bbox: bbox.to_vec(),
        h,
        pad,
        counts,
        shape,
        labels: vec![Label::Exterior; shape[0] * shape[1]],
    };
    for cell in 0..grid.num_cells() {
        if grid.is_interior(cell) {
            let c = grid.cell_center(cell);
            grid.labels[cell] = labeler(&c[..dim]);
        }
    }
    grid.require_domain()?;
    Ok(grid)
}

impl GridDomain {
    /// Builds a grid from explicit interior labels given row-major over the
    /// bounding box (first axis fastest).
    pub fn from_labels(dim: usize, bbox: &[(f64, f64)], h: f64, interior: &[Label], pad: usize) -> Result<GridDomain> {
        let (counts, shape) = lattice_shape(dim, bbox, h, pad)?;
        if interior.len() != counts[0] * counts[1] {
            return Err(Error::Mask(format!(
                "expected {} labels for a {}x{} box, got {}",
                counts[0] * counts[1],
                counts[0],
                counts[1],
                interior.len()
            )));
        }
        let mut labels = vec![Label::Exterior; shape[0] * shape[1]];
        for j in 0..counts[1] {
            for i in 0..counts[0] {
                let jj = if dim == 2 { j + pad } else { 0 };
                labels[(i + pad) + shape[0] * jj] = interior[i + counts[0] * j];
            }
        }
        let grid = GridDomain {
            dim,
            bbox: bbox.to_vec(),
            h,
            pad,
            counts,
            shape,
            labels,
        };
        grid.require_domain()?;
        Ok(grid)
    }

    fn require_domain(&self) -> Result<()> {
        if self.labels.iter().any(|l| l.in_domain()) {
            Ok(())
        } else {
            Err(Error::EmptyDomain)
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn pad(&self) -> usize {
        self.pad
    }

    pub fn bbox(&self) -> &[(f64, f64)] {
        &self.bbox
    }

    /// Cells per axis inside the bounding box.
    pub fn interior_counts(&self) -> [usize; MAX_DIM] {
        self.counts
    }

    /// Cells per axis including padding (1 on unused axes).
    pub fn shape(&self) -> [usize; MAX_DIM] {
        self.shape
    }

    pub fn num_cells(&self) -> usize {
        self.shape[0] * self.shape[1]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn label(&self, cell: usize) -> Label {
        self.labels[cell]
    }

    /// `h^dim`.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    pub fn cells_with(&self, label: Label) -> Vec<usize> {
        (0..self.num_cells()).filter(|&c| self.labels[c] == label).collect()
    }

    pub fn cell_multi(&self, cell: usize) -> MultiIndex {
        [cell % self.shape[0], cell / self.shape[0]]
    }

    pub fn cell_at(&self, m: MultiIndex) -> usize {
        m[0] + self.shape[0] * m[1]
    }

    /// Cell at a signed offset from `cell`, if it lies in the padded grid.
    pub fn cell_offset(&self, cell: usize, off: [i64; MAX_DIM]) -> Option<usize> {
        let m = self.cell_multi(cell);
        let mut out = [0usize; MAX_DIM];
        for d in 0..MAX_DIM {
            let v = m[d] as i64 + off[d];
            if v < 0 || v >= self.shape[d] as i64 {
                return None;
            }
            out[d] = v as usize;
        }
        Some(self.cell_at(out))
    }

    pub fn is_interior(&self, cell: usize) -> bool {
        let m = self.cell_multi(cell);
        (0..self.dim).all(|d| m[d] >= self.pad && m[d] < self.pad + self.counts[d])
    }

    pub fn cell_center(&self, cell: usize) -> Point {
        let m = self.cell_multi(cell);
        let mut p = [0.0; MAX_DIM];
        for d in 0..self.dim {
            p[d] = self.bbox[d].0 + (m[d] as f64 - self.pad as f64 + 0.5) * self.h;
        }
        p
    }

    pub fn cell_half_index(&self, cell: usize) -> HalfIndex {
        let m = self.cell_multi(cell);
        let mut q = [0i64; MAX_DIM];
        for d in 0..self.dim {
            q[d] = 2 * m[d] as i64 + 1;
        }
        q
    }

    /// Vertices per axis of the padded lattice (1 on unused axes).
    pub fn vertex_shape(&self) -> [usize; MAX_DIM] {
        let mut s = [1; MAX_DIM];
        for d in 0..self.dim {
            s[d] = self.shape[d] + 1;
        }
        s
    }

    pub fn num_vertices(&self) -> usize {
        let s = self.vertex_shape();
        s[0] * s[1]
    }

    pub fn vertex_multi(&self, v: usize) -> MultiIndex {
        let s = self.vertex_shape();
        [v % s[0], v / s[0]]
    }

    pub fn vertex_at(&self, m: MultiIndex) -> usize {
        m[0] + self.vertex_shape()[0] * m[1]
    }

    pub fn vertex_coords(&self, v: usize) -> Point {
        let m = self.vertex_multi(v);
        let mut p = [0.0; MAX_DIM];
        for d in 0..self.dim {
            p[d] = self.bbox[d].0 + (m[d] as f64 - self.pad as f64) * self.h;
        }
        p
    }

    pub fn vertex_half_index(&self, v: usize) -> HalfIndex {
        let m = self.vertex_multi(v);
        let mut q = [0i64; MAX_DIM];
        for d in 0..self.dim {
            q[d] = 2 * m[d] as i64;
        }
        q
    }

    /// The `2^dim` vertices of a cell; bit `d` of the position in the list is
    /// the offset along axis `d`.
    pub fn cell_vertices(&self, cell: usize) -> SmallVec<[usize; 4]> {
        let m = self.cell_multi(cell);
        (0..1usize << self.dim)
            .map(|a| {
                let mut vm = [0usize; MAX_DIM];
                for d in 0..self.dim {
                    vm[d] = m[d] + ((a >> d) & 1);
                }
                self.vertex_at(vm)
            })
            .collect()
    }

    /// The `2^dim` cells sharing a vertex; `None` where the cell would lie
    /// outside the padded grid.
    pub fn vertex_cells(&self, v: usize) -> SmallVec<[Option<usize>; 4]> {
        let m = self.vertex_multi(v);
        (0..1usize << self.dim)
            .map(|a| {
                let mut cm = [0usize; MAX_DIM];
                for d in 0..self.dim {
                    let back = (a >> d) & 1;
                    if m[d] < back || m[d] - back >= self.shape[d] {
                        return None;
                    }
                    cm[d] = m[d] - back;
                }
                Some(self.cell_at(cm))
            })
            .collect()
    }

    /// Face neighbor across side `side` (±1) of axis `axis`.
    pub fn face_neighbor(&self, cell: usize, axis: usize, side: i64) -> Option<usize> {
        let mut off = [0i64; MAX_DIM];
        off[axis] = side;
        self.cell_offset(cell, off)
    }

    /// Displacement `a − b` between two lattice points.
    pub fn displacement(&self, a: HalfIndex, b: HalfIndex) -> Point {
        let mut z = [0.0; MAX_DIM];
        for d in 0..self.dim {
            z[d] = self.h * (a[d] - b[d]) as f64 * 0.5;
        }
        z
    }

    /// Largest cell offset per axis that can lie within `radius` of a cell.
    pub fn reach(&self, radius: f64) -> i64 {
        (radius / self.h).floor() as i64 + 1
    }

    /// All cell offsets in the `(2·reach+1)^dim` window, in row-major order.
    pub fn offsets(&self, reach: i64) -> Vec<[i64; MAX_DIM]> {
        let r1 = if self.dim >= 2 { reach } else { 0 };
        let mut out = Vec::new();
        for j in -r1..=r1 {
            for i in -reach..=reach {
                out.push([i, j]);
            }
        }
        out
    }
}

pub fn norm(z: &Point) -> f64 {
    (z[0] * z[0] + z[1] * z[1]).sqrt()
}

fn lattice_shape(dim: usize, bbox: &[(f64, f64)], h: f64, pad: usize) -> Result<([usize; MAX_DIM], [usize; MAX_DIM])> {
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::Dimension(dim));
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::NonPositiveSpacing(h));
    }
    if bbox.len() != dim {
        return Err(Error::InvalidParameter(format!(
            "bounding box has {} intervals for a {}D grid",
            bbox.len(),
            dim
        )));
    }
    let mut counts = [1; MAX_DIM];
    let mut shape = [1; MAX_DIM];
    for (d, &(lo, hi)) in bbox.iter().enumerate() {
        let extent = hi - lo;
        let n = (extent / h).round();
        if !(extent > 0.0) || n < 1.0 || (n * h - extent).abs() > 1e-9 * extent.max(h) {
            return Err(Error::NonConformingBox { axis: d, extent, h });
        }
        counts[d] = n as usize;
        shape[d] = counts[d] + 2 * pad;
    }
    Ok((counts, shape))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centers_in_1d() {
        let g = build_grid(1, &[(0.0, 1.0)], 0.25, |_| Label::Local, 0).unwrap();
        assert_eq!(g.num_cells(), 4);
        let centers: Vec<f64> = (0..4).map(|c| g.cell_center(c)[0]).collect();
        assert_eq!(centers, vec![0.125, 0.375, 0.625, 0.875]);
        assert_eq!(g.cells_with(Label::Local).len(), 4);
    }

    #[test]
    fn padding_adds_exterior_cells() {
        let g = build_grid(1, &[(0.0, 1.0)], 0.25, |_| Label::Local, 2).unwrap();
        assert_eq!(g.num_cells(), 8);
        assert_eq!(g.cells_with(Label::Local).len(), 4);
        assert_eq!(g.cells_with(Label::Exterior).len(), 4);
        assert_eq!(g.cell_center(0)[0], -0.375);
    }

    #[test]
    fn split_square() {
        let g = build_grid(
            2,
            &[(0.0, 1.0), (0.0, 1.0)],
            0.5,
            |x| if x[0] < 0.5 { Label::Local } else { Label::Nonlocal },
            0,
        )
        .unwrap();
        assert_eq!(g.cells_with(Label::Local).len(), 2);
        assert_eq!(g.cells_with(Label::Nonlocal).len(), 2);
    }

    #[test]
    fn rejects_bad_spacing_and_empty_domain() {
        assert!(matches!(
            build_grid(1, &[(0.0, 1.0)], 0.0, |_| Label::Local, 0),
            Err(Error::NonPositiveSpacing(_))
        ));
        assert!(matches!(
            build_grid(1, &[(0.0, 1.0)], -0.1, |_| Label::Local, 0),
            Err(Error::NonPositiveSpacing(_))
        ));
        assert!(matches!(
            build_grid(1, &[(0.0, 1.0)], 0.25, |_| Label::Exterior, 1),
            Err(Error::EmptyDomain)
        ));
        assert!(matches!(
            build_grid(1, &[(0.0, 1.0)], 0.3, |_| Label::Local, 0),
            Err(Error::NonConformingBox { .. })
        ));
    }

    #[test]
    fn vertex_cell_incidence() {
        let g = build_grid(2, &[(0.0, 1.0), (0.0, 1.0)], 0.5, |_| Label::Local, 1).unwrap();
        assert_eq!(g.shape(), [4, 4]);
        assert_eq!(g.num_vertices(), 25);
        let c = g.cell_at([1, 1]);
        let vs = g.cell_vertices(c);
        assert_eq!(vs.len(), 4);
        assert_eq!(g.vertex_coords(vs[0]), [0.0, 0.0]);
        assert_eq!(g.vertex_coords(vs[3]), [0.5, 0.5]);
        for &v in &vs {
            assert!(g.vertex_cells(v).contains(&Some(c)));
        }
        // corner vertex of the padded lattice touches a single cell
        let corner = g.vertex_cells(0);
        assert_eq!(corner.iter().filter(|c| c.is_some()).count(), 1);
    }

    #[test]
    fn displacement_is_antisymmetric() {
        let g = build_grid(2, &[(0.0, 1.0), (0.0, 1.0)], 0.1, |_| Label::Nonlocal, 3).unwrap();
        let a = g.cell_half_index(g.cell_at([2, 5]));
        let b = g.cell_half_index(g.cell_at([7, 1]));
        let z1 = g.displacement(a, b);
        let z2 = g.displacement(b, a);
        assert_eq!(z1[0], -z2[0]);
        assert_eq!(z1[1], -z2[1]);
        assert_eq!(norm(&z1), norm(&z2));
    }
}

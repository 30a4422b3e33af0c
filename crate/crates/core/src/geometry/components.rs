use super::grid::{norm, GridDomain, MAX_DIM};
use crate::{Error, Result};

/// Disjoint-set forest with path halving and union by size.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        true
    }

    /// Groups `0..n` by root. Groups are ordered by their smallest member and
    /// each group is sorted.
    pub fn groups(&mut self) -> Vec<Vec<usize>> {
        let n = self.parent.len();
        let mut slot = vec![usize::MAX; n];
        let mut out: Vec<Vec<usize>> = Vec::new();
        for i in 0..n {
            let r = self.find(i);
            if slot[r] == usize::MAX {
                slot[r] = out.len();
                out.push(Vec::new());
            }
            out[slot[r]].push(i);
        }
        out
    }
}

fn membership(grid: &GridDomain, cells: &[usize]) -> Vec<usize> {
    let mut pos = vec![usize::MAX; grid.num_cells()];
    for (k, &c) in cells.iter().enumerate() {
        pos[c] = k;
    }
    pos
}

fn map_groups(cells: &[usize], groups: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = groups
        .into_iter()
        .map(|g| {
            let mut v: Vec<usize> = g.into_iter().map(|k| cells[k]).collect();
            v.sort_unstable();
            v
        })
        .collect();
    out.sort_by_key(|g| g[0]);
    out
}

/// Partitions `cells` into chains whose consecutive center distances are
/// strictly below `delta`.
pub fn delta_connected_components(cells: &[usize], grid: &GridDomain, delta: f64) -> Result<Vec<Vec<usize>>> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    if cells.is_empty() {
        return Ok(Vec::new());
    }
    let pos = membership(grid, cells);
    let offsets = grid.offsets(grid.reach(delta));
    let mut uf = UnionFind::new(cells.len());
    for (k, &c) in cells.iter().enumerate() {
        let hc = grid.cell_half_index(c);
        for off in &offsets {
            let Some(o) = grid.cell_offset(c, *off) else {
                continue;
            };
            let j = pos[o];
            if j == usize::MAX || j <= k {
                continue;
            }
            if norm(&grid.displacement(grid.cell_half_index(o), hc)) < delta {
                uf.union(k, j);
            }
        }
    }
    Ok(map_groups(cells, uf.groups()))
}

/// Connected components of `cells` under face adjacency.
pub fn face_connected_components(cells: &[usize], grid: &GridDomain) -> Vec<Vec<usize>> {
    if cells.is_empty() {
        return Vec::new();
    }
    let pos = membership(grid, cells);
    let mut uf = UnionFind::new(cells.len());
    for (k, &c) in cells.iter().enumerate() {
        for axis in 0..grid.dim() {
            if let Some(o) = grid.face_neighbor(c, axis, 1) {
                if pos[o] != usize::MAX {
                    uf.union(k, pos[o]);
                }
            }
        }
    }
    map_groups(cells, uf.groups())
}

/// Cells of `set` with at least one Moore neighbor outside `set`; only these
/// can realize the distance to a disjoint set.
fn rim(grid: &GridDomain, set: &[usize], inside: &[bool]) -> Vec<usize> {
    let offsets = grid.offsets(1);
    set.iter()
        .copied()
        .filter(|&c| {
            offsets
                .iter()
                .any(|off| grid.cell_offset(c, *off).is_none_or(|o| !inside[o]))
        })
        .collect()
}

/// Minimum center-to-center distance between two cell sets; `INFINITY` if
/// either is empty and `0` if they intersect.
pub fn set_distance(grid: &GridDomain, a: &[usize], b: &[usize]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    let mut in_a = vec![false; grid.num_cells()];
    let mut in_b = vec![false; grid.num_cells()];
    a.iter().for_each(|&c| in_a[c] = true);
    b.iter().for_each(|&c| in_b[c] = true);
    if b.iter().any(|&c| in_a[c]) {
        return 0.0;
    }
    let ra = rim(grid, a, &in_a);
    let rb = rim(grid, b, &in_b);
    let hb: Vec<[i64; MAX_DIM]> = rb.iter().map(|&c| grid.cell_half_index(c)).collect();
    let mut best = f64::INFINITY;
    for &c in &ra {
        let hc = grid.cell_half_index(c);
        for q in &hb {
            best = best.min(norm(&grid.displacement(hc, *q)));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_grid, Label};

    fn line(lo: f64, hi: f64, h: f64) -> GridDomain {
        build_grid(1, &[(lo, hi)], h, |_| Label::Nonlocal, 0).unwrap()
    }

    #[test]
    fn adjacent_spacing_below_delta_is_one_component() {
        let g = line(0.0, 1.0, 0.25);
        let cells: Vec<usize> = (0..4).collect();
        assert_eq!(delta_connected_components(&cells, &g, 0.3).unwrap().len(), 1);
    }

    #[test]
    fn far_cells_split() {
        // centers 0.0, 0.2, ..., 1.0
        let g = line(-0.1, 1.1, 0.2);
        assert_eq!(g.cell_center(0)[0].abs(), 0.0);
        assert!((g.cell_center(5)[0] - 1.0).abs() < 1e-12);
        let comps = delta_connected_components(&[0, 5], &g, 0.5).unwrap();
        assert_eq!(comps, vec![vec![0], vec![5]]);
    }

    #[test]
    fn chain_joins_through_middle() {
        // centers 0.0, 0.4, 0.8 with delta 0.5
        let g = line(-0.1, 1.1, 0.2);
        let comps = delta_connected_components(&[0, 2, 4], &g, 0.5).unwrap();
        assert_eq!(comps, vec![vec![0, 2, 4]]);
    }

    #[test]
    fn ties_disconnect() {
        let g = line(0.0, 1.0, 0.25);
        let comps = delta_connected_components(&[0, 1], &g, 0.25).unwrap();
        assert_eq!(comps.len(), 2);
    }

    #[test]
    fn empty_input_and_bad_delta() {
        let g = line(0.0, 1.0, 0.25);
        assert!(delta_connected_components(&[], &g, 0.3).unwrap().is_empty());
        assert!(delta_connected_components(&[0], &g, 0.0).is_err());
    }

    #[test]
    fn distance_between_sets() {
        let g = line(0.0, 1.0, 0.1);
        let a: Vec<usize> = (0..3).collect();
        let b: Vec<usize> = (6..10).collect();
        assert!((set_distance(&g, &a, &b) - 0.4).abs() < 1e-12);
        assert_eq!(set_distance(&g, &a, &[]), f64::INFINITY);
        assert_eq!(set_distance(&g, &a, &[2, 7]), 0.0);
    }

    #[test]
    fn face_components_ignore_diagonals() {
        let g = build_grid(2, &[(0.0, 1.0), (0.0, 1.0)], 0.5, |_| Label::Local, 0).unwrap();
        let diag = [g.cell_at([0, 0]), g.cell_at([1, 1])];
        assert_eq!(face_connected_components(&diag, &g).len(), 2);
        let all: Vec<usize> = (0..4).collect();
        assert_eq!(face_connected_components(&all, &g).len(), 1);
    }
}

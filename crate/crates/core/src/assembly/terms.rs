//! Energy terms and their accumulation into `(A, b, offset)`.
//!
//! Every model is a sum of nonnegative terms of two shapes: a weighted square
//! of an affine form, `w·(Σ c_k·v_k)²`, or an element energy `½ vᵀKv` with `K`
//! symmetric positive semidefinite. Each `v_k` is either an unknown or a value
//! held at the exterior datum.

use smallvec::SmallVec;

use crate::geometry::GridDomain;
use crate::model::{DofMap, FieldPreset};
use crate::sparse::CsrMatrix;

/// Where a value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Carrier {
    /// Active node of the dof map.
    Dof(usize),
    /// LOCAL vertex eliminated on ∂Ω.
    FixedVertex(usize),
    /// EXTERIOR cell.
    FixedCell(usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Entry {
    pub carrier: Carrier,
    pub comp: usize,
    pub coef: f64,
}

/// `weight·(Σ coef·value)²`.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareTerm {
    pub weight: f64,
    pub entries: SmallVec<[Entry; 12]>,
}

/// `½ vᵀKv` over `carriers × components`, with `K` stored row-major and the
/// local index `slot·block + comp`.
#[derive(Clone, Debug, PartialEq)]
pub struct ElementTerm {
    pub carriers: SmallVec<[Carrier; 4]>,
    pub block: usize,
    pub k: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum Term {
    Square(SquareTerm),
    Element(ElementTerm),
}

/// Carrier of a LOCAL-closure vertex.
pub fn vertex_carrier(dofmap: &DofMap, v: usize) -> Carrier {
    match dofmap.vertex_node(v) {
        Some(k) => Carrier::Dof(k),
        None => Carrier::FixedVertex(v),
    }
}

/// Value of a fixed carrier under the exterior datum `g`.
pub fn fixed_value(grid: &GridDomain, g: &FieldPreset, carrier: Carrier, comp: usize) -> f64 {
    match carrier {
        Carrier::Dof(_) => 0.0,
        Carrier::FixedVertex(v) => g.value(&grid.vertex_coords(v), grid.dim(), comp),
        Carrier::FixedCell(c) => g.value(&grid.cell_center(c), grid.dim(), comp),
    }
}

/// Value of a carrier given the unknowns `u` and datum `g`.
pub fn carrier_value(
    grid: &GridDomain,
    dofmap: &DofMap,
    g: &FieldPreset,
    u: &[f64],
    carrier: Carrier,
    comp: usize,
) -> f64 {
    match carrier {
        Carrier::Dof(k) => u[dofmap.dof(k, comp)],
        _ => fixed_value(grid, g, carrier, comp),
    }
}

impl Term {
    /// Energy of the term at `u`.
    pub fn energy(&self, grid: &GridDomain, dofmap: &DofMap, g: &FieldPreset, u: &[f64]) -> f64 {
        match self {
            Term::Square(t) => {
                let s: f64 = t
                    .entries
                    .iter()
                    .map(|e| e.coef * carrier_value(grid, dofmap, g, u, e.carrier, e.comp))
                    .sum();
                t.weight * s * s
            }
            Term::Element(t) => {
                let v: Vec<f64> = t
                    .carriers
                    .iter()
                    .flat_map(|&c| (0..t.block).map(move |i| carrier_value(grid, dofmap, g, u, c, i)))
                    .collect();
                let m = v.len();
                let mut e = 0.0;
                for a in 0..m {
                    for b in 0..m {
                        e += v[a] * t.k[a * m + b] * v[b];
                    }
                }
                0.5 * e
            }
        }
    }
}

/// Running sums for `E(u) = ½uᵀAu − bᵀu + offset`.
#[derive(Clone, Debug)]
pub struct Accumulator {
    pub n: usize,
    pub triplets: Vec<(usize, usize, f64)>,
    pub b: Vec<f64>,
    pub offset: f64,
}

impl Accumulator {
    pub fn new(n: usize) -> Self {
        Accumulator {
            n,
            triplets: Vec::new(),
            b: vec![0.0; n],
            offset: 0.0,
        }
    }

    /// Adds a term. The matrix part is recorded when `matrix` is set; the
    /// load and offset parts are recorded when a datum is given.
    pub fn add(&mut self, term: &Term, grid: &GridDomain, dofmap: &DofMap, datum: Option<&FieldPreset>, matrix: bool) {
        match term {
            Term::Square(t) => {
                let mut free: SmallVec<[(usize, f64); 12]> = SmallVec::new();
                let mut c = 0.0;
                for e in &t.entries {
                    match e.carrier {
                        Carrier::Dof(k) => free.push((dofmap.dof(k, e.comp), e.coef)),
                        fixed => {
                            if let Some(g) = datum {
                                c += e.coef * fixed_value(grid, g, fixed, e.comp);
                            }
                        }
                    }
                }
                let w2 = 2.0 * t.weight;
                if matrix {
                    for &(i, ci) in &free {
                        for &(j, cj) in &free {
                            self.triplets.push((i, j, w2 * ci * cj));
                        }
                    }
                }
                if c != 0.0 {
                    for &(i, ci) in &free {
                        self.b[i] -= w2 * c * ci;
                    }
                    self.offset += t.weight * c * c;
                }
            }
            Term::Element(t) => {
                let m = t.carriers.len() * t.block;
                let mut dof: SmallVec<[Option<usize>; 8]> = SmallVec::new();
                let mut fixed: SmallVec<[f64; 8]> = SmallVec::new();
                for &car in &t.carriers {
                    for i in 0..t.block {
                        match car {
                            Carrier::Dof(k) => {
                                dof.push(Some(dofmap.dof(k, i)));
                                fixed.push(0.0);
                            }
                            _ => {
                                dof.push(None);
                                fixed.push(datum.map_or(0.0, |g| fixed_value(grid, g, car, i)));
                            }
                        }
                    }
                }
                for a in 0..m {
                    let Some(da) = dof[a] else { continue };
                    if matrix {
                        for b in 0..m {
                            if let Some(db) = dof[b] {
                                self.triplets.push((da, db, t.k[a * m + b]));
                            }
                        }
                    }
                    let mut s = 0.0;
                    for b in 0..m {
                        if dof[b].is_none() {
                            s += t.k[a * m + b] * fixed[b];
                        }
                    }
                    if s != 0.0 {
                        self.b[da] -= s;
                    }
                }
                let mut gkg = 0.0;
                for a in 0..m {
                    if dof[a].is_some() || fixed[a] == 0.0 {
                        continue;
                    }
                    for b in 0..m {
                        if dof[b].is_none() {
                            gkg += fixed[a] * t.k[a * m + b] * fixed[b];
                        }
                    }
                }
                self.offset += 0.5 * gkg;
            }
        }
    }

    pub fn matrix(&mut self) -> CsrMatrix {
        CsrMatrix::from_triplets(self.n, std::mem::take(&mut self.triplets))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_grid, Label};
    use crate::model::{Constraints, Profile};
    use smallvec::smallvec;

    #[test]
    fn square_term_expands_against_datum() {
        // one free cell next to one exterior cell
        let g = build_grid(1, &[(0.0, 0.5)], 0.5, |_| Label::Nonlocal, 1).unwrap();
        let d = DofMap::build(&g, 1, Constraints::default());
        let t = Term::Square(SquareTerm {
            weight: 3.0,
            entries: smallvec![
                Entry {
                    carrier: Carrier::Dof(0),
                    comp: 0,
                    coef: 1.0
                },
                Entry {
                    carrier: Carrier::FixedCell(0),
                    comp: 0,
                    coef: -1.0
                },
            ],
        });
        let datum = FieldPreset::scalar(Profile::Constant(2.0));
        let mut acc = Accumulator::new(1);
        acc.add(&t, &g, &d, Some(&datum), true);
        let a = acc.matrix();
        assert_eq!(a.get(0, 0), 6.0);
        assert_eq!(acc.b, vec![12.0]);
        assert_eq!(acc.offset, 12.0);
        for u in [-1.0, 0.0, 0.7, 5.0] {
            let direct = t.energy(&g, &d, &datum, &[u]);
            let quad = 0.5 * 6.0 * u * u - 12.0 * u + 12.0;
            assert!((direct - quad).abs() < 1e-12);
        }
    }
}

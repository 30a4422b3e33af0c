//! Built-in labelers and the raster mask format.
//!
//! A mask is a text grid of `L`, `N` and `E` characters, one row per line.
//! Line `k` holds the cells whose second index is `k` (row-major, lowest `y`
//! first); a 1D mask is a single line. Blank lines and lines starting with `#`
//! are ignored.

use super::grid::{Label, MAX_DIM};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Region {
    pub label: Label,
    /// Axis-aligned box, one interval per axis.
    pub bounds: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    pub label: Label,
    pub center: Vec<f64>,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    Uniform(Label),
    /// `x[axis] < at` is LOCAL and `x[axis] ≥ at + gap` NONLOCAL (swapped when
    /// `local_below` is false); the slab in between is EXTERIOR.
    HalfSpace {
        axis: usize,
        at: f64,
        gap: f64,
        local_below: bool,
    },
    /// Later boxes override earlier ones; uncovered cells get `fill`.
    Boxes {
        fill: Label,
        boxes: Vec<Region>,
    },
    /// Later balls override earlier ones; uncovered cells get `fill`.
    Balls {
        fill: Label,
        balls: Vec<Ball>,
    },
}

impl Shape {
    pub fn label_at(&self, x: &[f64]) -> Label {
        match self {
            Shape::Uniform(l) => *l,
            Shape::HalfSpace {
                axis,
                at,
                gap,
                local_below,
            } => {
                let (first, second) = if *local_below {
                    (Label::Local, Label::Nonlocal)
                } else {
                    (Label::Nonlocal, Label::Local)
                };
                let t = x[*axis];
                if t < *at {
                    first
                } else if t < at + gap {
                    Label::Exterior
                } else {
                    second
                }
            }
            Shape::Boxes { fill, boxes } => boxes
                .iter()
                .rev()
                .find(|b| b.bounds.iter().zip(x).all(|(&(lo, hi), &t)| t >= lo && t < hi))
                .map_or(*fill, |b| b.label),
            Shape::Balls { fill, balls } => balls
                .iter()
                .rev()
                .find(|b| {
                    let r2: f64 = b.center.iter().zip(x).map(|(c, t)| (t - c).powi(2)).sum();
                    r2 < b.radius * b.radius
                })
                .map_or(*fill, |b| b.label),
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        match self {
            Shape::HalfSpace { axis, gap, .. } => {
                if *axis >= dim {
                    return bad(format!("split axis {axis} out of range for {dim}D"));
                }
                if *gap < 0.0 {
                    return bad(format!("split gap must be nonnegative, got {gap}"));
                }
            }
            Shape::Boxes { boxes, .. } => {
                for b in boxes {
                    if b.bounds.len() != dim {
                        return bad(format!("box {:?} is not {dim}-dimensional", b.bounds));
                    }
                }
            }
            Shape::Balls { balls, .. } => {
                for b in balls {
                    if b.center.len() != dim || !(b.radius > 0.0) {
                        return bad(format!("invalid ball {:?} r={}", b.center, b.radius));
                    }
                }
            }
            Shape::Uniform(_) => {}
        }
        Ok(())
    }
}

/// Parsed mask: interior labels row-major plus the per-axis cell counts.
#[derive(Clone, Debug, PartialEq)]
pub struct Mask {
    pub counts: [usize; MAX_DIM],
    pub labels: Vec<Label>,
}

pub fn parse_mask(text: &str) -> Result<Mask> {
    let rows: Vec<&str> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect();
    if rows.is_empty() {
        return Err(Error::Mask("mask is empty".into()));
    }
    let width = rows[0].chars().count();
    let mut labels = Vec::with_capacity(width * rows.len());
    for (k, row) in rows.iter().enumerate() {
        if row.chars().count() != width {
            return Err(Error::Mask(format!(
                "row {k} has {} cells, expected {width}",
                row.chars().count()
            )));
        }
        for c in row.chars() {
            labels.push(Label::from_char(c).ok_or_else(|| Error::Mask(format!("unknown cell tag {c:?} in row {k}")))?);
        }
    }
    Ok(Mask {
        counts: [width, rows.len()],
        labels,
    })
}

pub fn write_mask(counts: [usize; MAX_DIM], labels: &[Label]) -> String {
    let mut out = String::new();
    for j in 0..counts[1] {
        for i in 0..counts[0] {
            out.push(labels[i + counts[0] * j].as_char());
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_space_with_gap() {
        let s = Shape::HalfSpace {
            axis: 0,
            at: 0.3,
            gap: 0.3,
            local_below: true,
        };
        assert_eq!(s.label_at(&[0.1]), Label::Local);
        assert_eq!(s.label_at(&[0.45]), Label::Exterior);
        assert_eq!(s.label_at(&[0.65]), Label::Nonlocal);
    }

    #[test]
    fn boxes_override_in_order() {
        let s = Shape::Boxes {
            fill: Label::Exterior,
            boxes: vec![
                Region {
                    label: Label::Local,
                    bounds: vec![(0.0, 1.0)],
                },
                Region {
                    label: Label::Nonlocal,
                    bounds: vec![(0.5, 0.7)],
                },
            ],
        };
        assert_eq!(s.label_at(&[0.2]), Label::Local);
        assert_eq!(s.label_at(&[0.6]), Label::Nonlocal);
        assert_eq!(s.label_at(&[1.2]), Label::Exterior);
    }

    #[test]
    fn mask_roundtrip() {
        let text = "LLNN\nLENN\n";
        let m = parse_mask(text).unwrap();
        assert_eq!(m.counts, [4, 2]);
        assert_eq!(m.labels[5], Label::Exterior);
        assert_eq!(write_mask(m.counts, &m.labels), text);
    }

    #[test]
    fn mask_errors() {
        assert!(parse_mask("LLX").is_err());
        assert!(parse_mask("LL\nL").is_err());
        assert!(parse_mask("\n# only a comment\n").is_err());
    }
}

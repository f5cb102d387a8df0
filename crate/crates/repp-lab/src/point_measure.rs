//! Point measures on a bounded time/mark window and the rectangle families
//! used for void-probability and intensity checks.
//!
//! Counting conventions follow the half-open rectangles of the theory:
//! time in `[a, b)`, marks in `(lo, hi]` per axis.

use std::io::{self, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("invalid rectangle family: {0}")]
    BadFamily(String),
    #[error("io: {0}")]
    Io(#[from] io::Error),
}

/// One atom: time plus zero or more marks.
#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub t: f64,
    pub marks: Vec<f64>,
}

/// A finite point measure on `[0, horizon) x mark-space`, atoms sorted by
/// time (ties by first mark).
#[derive(Clone, Debug, PartialEq)]
pub struct PointMeasure {
    atoms: Vec<Atom>,
    pub horizon: f64,
}

impl PointMeasure {
    pub fn new(horizon: f64, mut atoms: Vec<Atom>) -> Self {
        atoms.sort_by(|a, b| {
            a.t.partial_cmp(&b.t)
                .unwrap()
                .then_with(|| {
                    let ma = a.marks.first().copied().unwrap_or(0.0);
                    let mb = b.marks.first().copied().unwrap_or(0.0);
                    ma.partial_cmp(&mb).unwrap()
                })
        });
        PointMeasure { atoms, horizon }
    }

    pub fn empty(horizon: f64) -> Self {
        PointMeasure { atoms: Vec::new(), horizon }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Number of atoms with time in `[t_lo, t_hi)` and first mark at most
    /// `mark_cap` (atoms without marks always qualify).
    pub fn count_below(&self, t_lo: f64, t_hi: f64, mark_cap: f64) -> u64 {
        self.atoms
            .iter()
            .filter(|a| {
                a.t >= t_lo && a.t < t_hi && a.marks.first().map_or(true, |&m| m <= mark_cap)
            })
            .count() as u64
    }

    /// Counts per cell of a rectangle family.
    pub fn count_in(&self, fam: &RectangleFamily) -> Vec<u64> {
        fam.cells
            .iter()
            .map(|cell| self.atoms.iter().filter(|a| cell.contains(a)).count() as u64)
            .collect()
    }

    /// True when every cell of the family is empty.
    pub fn is_void_on(&self, fam: &RectangleFamily) -> bool {
        fam.cells.iter().all(|cell| !self.atoms.iter().any(|a| cell.contains(a)))
    }

    /// CSV rows `run_id,t,mark1[,mark2]`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, run_id: u64, w: &mut W) -> io::Result<()> {
        for a in &self.atoms {
            write!(w, "{run_id},{:.16e}", a.t)?;
            for m in &a.marks {
                write!(w, ",{m:.16e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Mark-space region of one rectangle cell.
#[derive(Clone, Debug, PartialEq)]
pub enum MarkRegion {
    /// Any mark (time-only cells, e.g. for 1-d processes).
    All,
    /// Union of disjoint bands `(lo, hi]` on the first mark.
    Bands(Vec<(f64, f64)>),
    /// Union of disjoint boxes, `(lo_i, hi_i]` per axis.
    Boxes(Vec<(Vec<f64>, Vec<f64>)>),
}

impl MarkRegion {
    pub fn contains(&self, marks: &[f64]) -> bool {
        match self {
            MarkRegion::All => true,
            MarkRegion::Bands(bands) => {
                let m = marks[0];
                bands.iter().any(|&(lo, hi)| m > lo && m <= hi)
            }
            MarkRegion::Boxes(boxes) => boxes.iter().any(|(lo, hi)| {
                lo.len() == marks.len()
                    && marks
                        .iter()
                        .zip(lo.iter().zip(hi))
                        .all(|(&m, (&l, &h))| m > l && m <= h)
            }),
        }
    }

    fn validate(&self) -> Result<(), MeasureError> {
        match self {
            MarkRegion::All => Ok(()),
            MarkRegion::Bands(bands) => {
                let mut sorted = bands.clone();
                sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
                for w in sorted.windows(2) {
                    if w[0].1 > w[1].0 {
                        return Err(MeasureError::BadFamily("bands overlap".into()));
                    }
                }
                if bands.iter().any(|&(lo, hi)| hi <= lo) {
                    return Err(MeasureError::BadFamily("empty band".into()));
                }
                Ok(())
            }
            MarkRegion::Boxes(boxes) => {
                for (lo, hi) in boxes {
                    if lo.len() != hi.len() || lo.iter().zip(hi).any(|(l, h)| h <= l) {
                        return Err(MeasureError::BadFamily("degenerate box".into()));
                    }
                }
                Ok(())
            }
        }
    }
}

/// One cell `J x A`: times `[t_lo, t_hi)`, marks in the region.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub t_lo: f64,
    pub t_hi: f64,
    pub region: MarkRegion,
}

impl Cell {
    pub fn contains(&self, a: &Atom) -> bool {
        a.t >= self.t_lo && a.t < self.t_hi && self.region.contains(&a.marks)
    }
}

/// A family of cells with ordered, disjoint time intervals.
#[derive(Clone, Debug, PartialEq)]
pub struct RectangleFamily {
    pub cells: Vec<Cell>,
}

impl RectangleFamily {
    pub fn new(cells: Vec<Cell>) -> Result<Self, MeasureError> {
        let mut last_hi = f64::NEG_INFINITY;
        for c in &cells {
            if c.t_hi <= c.t_lo {
                return Err(MeasureError::BadFamily("empty time interval".into()));
            }
            if c.t_lo < last_hi {
                return Err(MeasureError::BadFamily(
                    "time intervals must be ordered and disjoint".into(),
                ));
            }
            last_hi = c.t_hi;
            c.region.validate()?;
        }
        Ok(RectangleFamily { cells })
    }

    pub fn single_band(t_lo: f64, t_hi: f64, mark_lo: f64, mark_hi: f64) -> Self {
        RectangleFamily {
            cells: vec![Cell {
                t_lo,
                t_hi,
                region: MarkRegion::Bands(vec![(mark_lo, mark_hi)]),
            }],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pm(atoms: &[(f64, f64)]) -> PointMeasure {
        PointMeasure::new(
            1.0,
            atoms.iter().map(|&(t, m)| Atom { t, marks: vec![m] }).collect(),
        )
    }

    #[test]
    fn empty_measure_counts_zero() {
        let fam = RectangleFamily::single_band(0.0, 1.0, 0.0, 1.0);
        assert_eq!(PointMeasure::empty(1.0).count_in(&fam), vec![0]);
        assert!(PointMeasure::empty(1.0).is_void_on(&fam));
    }

    #[test]
    fn atom_inside_cell_is_counted() {
        let fam = RectangleFamily::single_band(0.0, 1.0, 0.5, 1.5);
        assert_eq!(pm(&[(0.5, 1.0)]).count_in(&fam), vec![1]);
    }

    #[test]
    fn boundary_conventions() {
        let fam = RectangleFamily::single_band(0.0, 1.0, 0.5, 1.5);
        // mark exactly at the lower band edge is excluded
        assert_eq!(pm(&[(0.5, 0.5)]).count_in(&fam), vec![0]);
        // mark exactly at the upper band edge is included
        assert_eq!(pm(&[(0.5, 1.5)]).count_in(&fam), vec![1]);
        // time at the upper cell edge is excluded
        assert_eq!(pm(&[(1.0, 1.0)]).count_in(&fam), vec![0]);
        // time at the lower cell edge is included
        assert_eq!(pm(&[(0.0, 1.0)]).count_in(&fam), vec![1]);
    }

    #[test]
    fn families_require_ordered_disjoint_times() {
        let bad = RectangleFamily::new(vec![
            Cell { t_lo: 0.0, t_hi: 0.6, region: MarkRegion::All },
            Cell { t_lo: 0.5, t_hi: 1.0, region: MarkRegion::All },
        ]);
        assert!(bad.is_err());
        let good = RectangleFamily::new(vec![
            Cell { t_lo: 0.0, t_hi: 0.5, region: MarkRegion::All },
            Cell { t_lo: 0.5, t_hi: 1.0, region: MarkRegion::All },
        ]);
        assert!(good.is_ok());
    }

    #[test]
    fn atoms_sort_on_construction() {
        let m = pm(&[(0.9, 1.0), (0.1, 2.0), (0.5, 0.5)]);
        let ts: Vec<f64> = m.atoms().iter().map(|a| a.t).collect();
        assert_eq!(ts, vec![0.1, 0.5, 0.9]);
    }

    #[test]
    fn csv_format_is_stable() {
        let m = pm(&[(0.5, 1.25)]);
        let mut buf = Vec::new();
        m.write_csv(3, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "3,5.0000000000000000e-1,1.2500000000000000e0\n"
        );
    }

    #[test]
    fn box_region_counts_vector_marks() {
        let fam = RectangleFamily {
            cells: vec![Cell {
                t_lo: 0.0,
                t_hi: 1.0,
                region: MarkRegion::Boxes(vec![(vec![0.0, -1.0], vec![1.0, 1.0])]),
            }],
        };
        let inside = PointMeasure::new(1.0, vec![Atom { t: 0.2, marks: vec![0.5, 0.0] }]);
        let outside = PointMeasure::new(1.0, vec![Atom { t: 0.2, marks: vec![1.5, 0.0] }]);
        assert_eq!(inside.count_in(&fam), vec![1]);
        assert_eq!(outside.count_in(&fam), vec![0]);
    }
}

//! Finite unions of half-open axis-aligned boxes in dimension `d >= 1`,
//! with exact rational corners.
//!
//! Set operations work by grid refinement: collect the corner coordinates of
//! all participating boxes per axis, cut space into elementary cells, and
//! classify each cell by testing its center. A cell never straddles a box
//! boundary, so center membership is exact. Box counts stay small here (tens
//! of transforms of a handful of boxes), which keeps the grids tiny.

use crate::interval::{rat, Rat};
use num::{Signed, ToPrimitive, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoxR {
    pub lo: Vec<Rat>,
    pub hi: Vec<Rat>,
}

impl BoxR {
    pub fn new(lo: Vec<Rat>, hi: Vec<Rat>) -> Self {
        assert_eq!(lo.len(), hi.len());
        BoxR { lo, hi }
    }

    pub fn from_f64(lo: &[f64], hi: &[f64]) -> Self {
        Self::new(
            lo.iter().copied().map(rat).collect(),
            hi.iter().copied().map(rat).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lo.iter().zip(&self.hi).any(|(a, b)| a >= b)
    }

    pub fn volume(&self) -> Rat {
        let mut v = Rat::from_integer(1.into());
        for (a, b) in self.lo.iter().zip(&self.hi) {
            if a >= b {
                return Rat::zero();
            }
            v *= b - a;
        }
        v
    }

    pub fn contains(&self, x: &[Rat]) -> bool {
        self.lo
            .iter()
            .zip(&self.hi)
            .zip(x)
            .all(|((a, b), xi)| a <= xi && xi < b)
    }
}

/// Union of half-open boxes; the list may contain overlaps, measure and set
/// operations account for them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoxUnion {
    dim: usize,
    boxes: Vec<BoxR>,
}

impl BoxUnion {
    pub fn empty(dim: usize) -> Self {
        BoxUnion { dim, boxes: Vec::new() }
    }

    pub fn new(dim: usize, boxes: Vec<BoxR>) -> Self {
        let boxes: Vec<BoxR> = boxes.into_iter().filter(|b| !b.is_empty()).collect();
        for b in &boxes {
            assert_eq!(b.dim(), dim);
        }
        BoxUnion { dim, boxes }
    }

    pub fn single(b: BoxR) -> Self {
        let dim = b.dim();
        Self::new(dim, vec![b])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn boxes(&self) -> &[BoxR] {
        &self.boxes
    }

    pub fn contains(&self, x: &[Rat]) -> bool {
        self.boxes.iter().any(|b| b.contains(x))
    }

    pub fn contains_f64(&self, x: &[f64]) -> bool {
        let xr: Vec<Rat> = x.iter().copied().map(rat).collect();
        self.contains(&xr)
    }

    pub fn bounding_box(&self) -> Option<BoxR> {
        let first = self.boxes.first()?;
        let mut lo = first.lo.clone();
        let mut hi = first.hi.clone();
        for b in &self.boxes[1..] {
            for k in 0..self.dim {
                if b.lo[k] < lo[k] {
                    lo[k] = b.lo[k].clone();
                }
                if b.hi[k] > hi[k] {
                    hi[k] = b.hi[k].clone();
                }
            }
        }
        Some(BoxR::new(lo, hi))
    }

    /// Image under the diagonal linear map `x -> (c_1 x_1, ..., c_d x_d)`
    /// with positive factors.
    pub fn scale_diag(&self, factors: &[Rat]) -> Self {
        assert_eq!(factors.len(), self.dim);
        assert!(factors.iter().all(|c| c.is_positive()));
        let boxes = self
            .boxes
            .iter()
            .map(|b| {
                BoxR::new(
                    b.lo.iter().zip(factors).map(|(a, c)| a * c).collect(),
                    b.hi.iter().zip(factors).map(|(a, c)| a * c).collect(),
                )
            })
            .collect();
        BoxUnion { dim: self.dim, boxes }
    }

    fn axis_cuts(&self, other: Option<&Self>, axis: usize) -> Vec<Rat> {
        let mut cuts: Vec<Rat> = Vec::new();
        for b in self.boxes.iter().chain(other.into_iter().flat_map(|o| o.boxes.iter())) {
            cuts.push(b.lo[axis].clone());
            cuts.push(b.hi[axis].clone());
        }
        cuts.sort();
        cuts.dedup();
        cuts
    }

    fn cells_where(
        &self,
        other: Option<&Self>,
        keep: impl Fn(bool, bool) -> bool,
    ) -> Vec<BoxR> {
        let grids: Vec<Vec<Rat>> = (0..self.dim).map(|k| self.axis_cuts(other, k)).collect();
        if grids.iter().any(|g| g.len() < 2) {
            return Vec::new();
        }
        let mut out = Vec::new();
        let mut idx = vec![0usize; self.dim];
        'outer: loop {
            let lo: Vec<Rat> = (0..self.dim).map(|k| grids[k][idx[k]].clone()).collect();
            let hi: Vec<Rat> = (0..self.dim).map(|k| grids[k][idx[k] + 1].clone()).collect();
            let center: Vec<Rat> = lo
                .iter()
                .zip(&hi)
                .map(|(a, b)| (a + b) / Rat::from_integer(2.into()))
                .collect();
            let in_self = self.contains(&center);
            let in_other = other.map(|o| o.contains(&center)).unwrap_or(false);
            if keep(in_self, in_other) {
                out.push(BoxR::new(lo, hi));
            }
            for k in 0..self.dim {
                idx[k] += 1;
                if idx[k] + 1 < grids[k].len() {
                    continue 'outer;
                }
                idx[k] = 0;
            }
            break;
        }
        out
    }

    /// Lebesgue measure of the union (overlaps counted once).
    pub fn measure(&self) -> Rat {
        if self.boxes.is_empty() {
            return Rat::zero();
        }
        if self.boxes.len() == 1 {
            return self.boxes[0].volume();
        }
        self.cells_where(None, |a, _| a)
            .iter()
            .map(|c| c.volume())
            .sum()
    }

    pub fn measure_f64(&self) -> f64 {
        self.measure().to_f64().unwrap()
    }

    pub fn difference(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        BoxUnion {
            dim: self.dim,
            boxes: self.cells_where(Some(other), |a, b| a && !b),
        }
    }

    pub fn intersect(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        BoxUnion {
            dim: self.dim,
            boxes: self.cells_where(Some(other), |a, b| a && b),
        }
    }

    pub fn union(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut boxes = self.boxes.clone();
        boxes.extend(other.boxes.iter().cloned());
        BoxUnion { dim: self.dim, boxes }
    }
}

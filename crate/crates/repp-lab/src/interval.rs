//! Finite unions of half-open intervals `[a, b)` with exact rational
//! endpoints.
//!
//! These sets carry the exceedance regions, the `A^(q)` constructions and the
//! outer-measure computations, so the arithmetic is exact: endpoints are
//! `BigRational` and every set operation (union, intersection, difference,
//! scaling, translation) is closed over the rationals. `f64` inputs are
//! converted exactly — every finite `f64` is a rational — so desk-scale
//! dyadic data loses nothing on the way in.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{FromPrimitive, Signed, ToPrimitive, Zero};
use std::fmt;

/// Exact rational scalar used for interval endpoints.
pub type Rat = BigRational;

/// Convert a finite `f64` to the exact rational it represents.
pub fn rat(x: f64) -> Rat {
    BigRational::from_f64(x).expect("finite f64")
}

/// Rational `p/q` from integer literals.
pub fn ratio(p: i64, q: i64) -> Rat {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// Sorted union of disjoint, non-empty, half-open intervals `[a, b)`.
///
/// Adjacent intervals (`b_i == a_{i+1}`) are merged on normalization, so the
/// representation is canonical: two unions are equal as sets iff their
/// component lists are equal.
#[derive(Clone, PartialEq, Eq)]
pub struct IntervalUnion {
    ivs: Vec<(Rat, Rat)>,
}

impl fmt::Debug for IntervalUnion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (a, b)) in self.ivs.iter().enumerate() {
            if i > 0 {
                write!(f, " ∪ ")?;
            }
            write!(f, "[{a}, {b})")?;
        }
        write!(f, "}}")
    }
}

impl IntervalUnion {
    pub fn empty() -> Self {
        IntervalUnion { ivs: Vec::new() }
    }

    /// Single interval `[a, b)`; empty if `a >= b`.
    pub fn interval(a: Rat, b: Rat) -> Self {
        if a < b {
            IntervalUnion { ivs: vec![(a, b)] }
        } else {
            Self::empty()
        }
    }

    /// Single interval from `f64` endpoints (converted exactly).
    pub fn interval_f64(a: f64, b: f64) -> Self {
        Self::interval(rat(a), rat(b))
    }

    /// Normalize an arbitrary list of intervals into canonical form.
    pub fn from_intervals(mut ivs: Vec<(Rat, Rat)>) -> Self {
        ivs.retain(|(a, b)| a < b);
        ivs.sort_by(|x, y| x.0.cmp(&y.0));
        let mut out: Vec<(Rat, Rat)> = Vec::with_capacity(ivs.len());
        for (a, b) in ivs {
            match out.last_mut() {
                Some((_, prev_b)) if a <= *prev_b => {
                    if b > *prev_b {
                        *prev_b = b;
                    }
                }
                _ => out.push((a, b)),
            }
        }
        IntervalUnion { ivs: out }
    }

    pub fn from_f64_pairs(pairs: &[(f64, f64)]) -> Self {
        Self::from_intervals(pairs.iter().map(|&(a, b)| (rat(a), rat(b))).collect())
    }

    /// Ball of radius `r` around `center` on the circle R/Z, reduced to
    /// subsets of `[0, 1)`. A radius >= 1/2 covers the whole circle.
    pub fn circle_ball(center: &Rat, r: &Rat) -> Self {
        if r <= &Rat::zero() {
            return Self::empty();
        }
        if *r >= ratio(1, 2) {
            return Self::interval(Rat::zero(), Rat::from_integer(1.into()));
        }
        let c = mod1(center);
        Self::from_intervals(vec![(&c - r, &c + r)]).reduce_mod1()
    }

    /// Reduce a union on R to the circle `[0, 1)` by wrapping pieces mod 1.
    /// Assumes each component has length <= 1.
    pub fn reduce_mod1(&self) -> Self {
        let one = Rat::from_integer(1.into());
        let mut pieces = Vec::new();
        for (a, b) in &self.ivs {
            if b - a >= one {
                return Self::interval(Rat::zero(), one);
            }
            let shift = a.floor();
            let (a, b) = (a - &shift, b - &shift);
            if b <= one {
                pieces.push((a, b));
            } else {
                pieces.push((a, one.clone()));
                pieces.push((Rat::zero(), b - &one));
            }
        }
        Self::from_intervals(pieces)
    }

    pub fn is_empty(&self) -> bool {
        self.ivs.is_empty()
    }

    pub fn num_components(&self) -> usize {
        self.ivs.len()
    }

    pub fn components(&self) -> &[(Rat, Rat)] {
        &self.ivs
    }

    pub fn components_f64(&self) -> Vec<(f64, f64)> {
        self.ivs
            .iter()
            .map(|(a, b)| (a.to_f64().unwrap(), b.to_f64().unwrap()))
            .collect()
    }

    pub fn measure(&self) -> Rat {
        let mut m = Rat::zero();
        for (a, b) in &self.ivs {
            m += b - a;
        }
        m
    }

    pub fn measure_f64(&self) -> f64 {
        self.measure().to_f64().unwrap()
    }

    pub fn inf(&self) -> Option<&Rat> {
        self.ivs.first().map(|(a, _)| a)
    }

    pub fn sup(&self) -> Option<&Rat> {
        self.ivs.last().map(|(_, b)| b)
    }

    pub fn contains(&self, x: &Rat) -> bool {
        // Binary search over sorted disjoint components.
        let mut lo = 0usize;
        let mut hi = self.ivs.len();
        while lo < hi {
            let mid = (lo + hi) / 2;
            let (a, b) = &self.ivs[mid];
            if x < a {
                hi = mid;
            } else if x >= b {
                lo = mid + 1;
            } else {
                return true;
            }
        }
        false
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut ivs = self.ivs.clone();
        ivs.extend(other.ivs.iter().cloned());
        Self::from_intervals(ivs)
    }

    pub fn intersect(&self, other: &Self) -> Self {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.ivs.len() && j < other.ivs.len() {
            let (a1, b1) = &self.ivs[i];
            let (a2, b2) = &other.ivs[j];
            let lo = if a1 > a2 { a1 } else { a2 };
            let hi = if b1 < b2 { b1 } else { b2 };
            if lo < hi {
                out.push((lo.clone(), hi.clone()));
            }
            if b1 < b2 {
                i += 1;
            } else {
                j += 1;
            }
        }
        IntervalUnion { ivs: out }
    }

    /// Set difference `self \ other`.
    pub fn difference(&self, other: &Self) -> Self {
        let mut out = Vec::new();
        let mut j = 0usize;
        for (a, b) in &self.ivs {
            let mut cur = a.clone();
            while j < other.ivs.len() && other.ivs[j].1 <= cur {
                j += 1;
            }
            let mut k = j;
            while k < other.ivs.len() && other.ivs[k].0 < *b {
                let (oa, ob) = &other.ivs[k];
                if *oa > cur {
                    out.push((cur.clone(), oa.clone()));
                }
                if ob >= b {
                    cur = b.clone();
                    break;
                }
                if *ob > cur {
                    cur = ob.clone();
                }
                k += 1;
            }
            if cur < *b {
                out.push((cur, b.clone()));
            }
        }
        IntervalUnion { ivs: out }
    }

    /// Complement within `[lo, hi)`.
    pub fn complement_in(&self, lo: Rat, hi: Rat) -> Self {
        Self::interval(lo, hi).difference(self)
    }

    /// Image under `x -> c x` for `c > 0`.
    pub fn scale(&self, c: &Rat) -> Self {
        assert!(c.is_positive(), "scale factor must be positive");
        IntervalUnion {
            ivs: self.ivs.iter().map(|(a, b)| (a * c, b * c)).collect(),
        }
    }

    /// Image under `x -> x + t`.
    pub fn translate(&self, t: &Rat) -> Self {
        IntervalUnion {
            ivs: self.ivs.iter().map(|(a, b)| (a + t, b + t)).collect(),
        }
    }

    /// Measure of `self ∩ [0, x)` for sets contained in `[0, 1)`, extended
    /// 1-periodically for `x` beyond `[0, 1]`: `F(x + 1) = F(x) + |self|`.
    ///
    /// This is the distribution function used to evaluate intersections with
    /// preimages of expanding full-branch maps without materializing them.
    pub fn periodic_cdf(&self, x: &Rat) -> Rat {
        let whole = x.floor();
        let frac = x - &whole;
        let mut m = self.measure() * &whole;
        for (a, b) in &self.ivs {
            if *a >= frac {
                break;
            }
            let hi = if *b < frac { b.clone() } else { frac.clone() };
            m += hi - a;
        }
        m
    }
}

/// Fractional part `x mod 1` as an exact rational in `[0, 1)`.
pub fn mod1(x: &Rat) -> Rat {
    x - x.floor()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn iu(pairs: &[(f64, f64)]) -> IntervalUnion {
        IntervalUnion::from_f64_pairs(pairs)
    }

    #[test]
    fn normalization_merges_overlaps_and_adjacency() {
        let u = iu(&[(0.5, 0.75), (0.0, 0.25), (0.25, 0.5)]);
        assert_eq!(u.num_components(), 1);
        assert_eq!(u.measure(), ratio(3, 4));
    }

    #[test]
    fn difference_carves_holes() {
        let a = IntervalUnion::interval(ratio(0, 1), ratio(1, 1));
        let b = IntervalUnion::from_intervals(vec![
            (ratio(1, 5), ratio(3, 10)),
            (ratio(1, 2), ratio(3, 5)),
        ]);
        let d = a.difference(&b);
        assert_eq!(
            d,
            IntervalUnion::from_intervals(vec![
                (ratio(0, 1), ratio(1, 5)),
                (ratio(3, 10), ratio(1, 2)),
                (ratio(3, 5), ratio(1, 1)),
            ])
        );
        assert_eq!(d.measure(), ratio(8, 10));
    }

    #[test]
    fn circle_ball_wraps_at_zero() {
        let b = IntervalUnion::circle_ball(&Rat::zero(), &ratio(1, 8));
        assert_eq!(b, iu(&[(0.0, 0.125), (0.875, 1.0)]));
        assert_eq!(b.measure(), ratio(1, 4));
    }

    #[test]
    fn circle_ball_without_wrap() {
        let b = IntervalUnion::circle_ball(&ratio(1, 2), &ratio(1, 8));
        assert_eq!(b, iu(&[(0.375, 0.625)]));
    }

    #[test]
    fn periodic_cdf_counts_wrapped_mass() {
        let u = iu(&[(0.25, 0.75)]);
        assert_eq!(u.periodic_cdf(&ratio(1, 2)), ratio(1, 4));
        assert_eq!(u.periodic_cdf(&ratio(5, 2)), ratio(5, 4));
        assert_eq!(u.periodic_cdf(&ratio(0, 1)), Rat::zero());
    }

    #[test]
    fn contains_respects_half_open_boundaries() {
        let u = iu(&[(0.25, 0.5)]);
        assert!(u.contains(&ratio(1, 4)));
        assert!(!u.contains(&ratio(1, 2)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn union_measure_is_subadditive_and_monotone(
            xs in proptest::collection::vec((0.0f64..1.0, 0.0f64..0.2), 1..6),
            ys in proptest::collection::vec((0.0f64..1.0, 0.0f64..0.2), 1..6),
        ) {
            let a = iu(&xs.iter().map(|&(a, w)| (a, a + w)).collect::<Vec<_>>());
            let b = iu(&ys.iter().map(|&(a, w)| (a, a + w)).collect::<Vec<_>>());
            let u = a.union(&b);
            prop_assert!(u.measure() <= a.measure() + b.measure());
            prop_assert!(u.measure() >= a.measure());
            // inclusion-exclusion is exact in rational arithmetic
            prop_assert_eq!(u.measure() + a.intersect(&b).measure(), a.measure() + b.measure());
        }

        #[test]
        fn difference_partitions_the_set(
            xs in proptest::collection::vec((0.0f64..1.0, 0.0f64..0.2), 1..6),
            ys in proptest::collection::vec((0.0f64..1.0, 0.0f64..0.2), 1..6),
        ) {
            let a = iu(&xs.iter().map(|&(a, w)| (a, a + w)).collect::<Vec<_>>());
            let b = iu(&ys.iter().map(|&(a, w)| (a, a + w)).collect::<Vec<_>>());
            let inter = a.intersect(&b);
            let diff = a.difference(&b);
            prop_assert_eq!(diff.measure() + inter.measure(), a.measure());
            prop_assert!(diff.intersect(&b).is_empty());
            prop_assert_eq!(diff.union(&inter), a);
        }
    }
}

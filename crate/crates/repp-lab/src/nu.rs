//! The clustering outer measure `ν` on finite interval and box unions.
//!
//! Four variants cover the limit processes in this crate:
//! plain Lebesgue (no clustering), the geometric contraction family
//! `ν(A) = |A \ ∪_{j>=1} λ^j A|`, the linear family
//! `ν(A) = |A \ ∪_{j>=1} M^j A|` for a contracting matrix `M`, and the
//! two-term mixture `ν(A) = w1 |A| + w2 |A \ cA|`.
//!
//! Everything with rational data is computed in exact set arithmetic. The
//! infinite unions stabilize on bounded sets with `inf A > 0`; when
//! `inf A = 0` the union is truncated once the geometric tail contributes
//! less than `1e-15 |A|` (the tail bound is twice the last term). A
//! rejection-sampling Monte-Carlo oracle provides an independent check.

use crate::boxes::BoxUnion;
use crate::empirical::aq_set;
use crate::interval::{ratio, IntervalUnion, Rat};
use crate::observables::ThresholdScheme;
use crate::rng::{run_rng, u01};
use crate::systems::SystemSpec;
use num::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NuError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

/// The contracting map family behind a linear-family `ν`.
#[derive(Clone, Debug, PartialEq)]
pub enum LinearMap {
    /// Diagonal contraction, exact arithmetic in any dimension.
    Diagonal(Vec<Rat>),
    /// General 2x2 contraction, evaluated by convex polygon clipping.
    General2([[f64; 2]; 2]),
}

impl LinearMap {
    pub fn dim(&self) -> usize {
        match self {
            LinearMap::Diagonal(d) => d.len(),
            LinearMap::General2(_) => 2,
        }
    }

    fn det_abs(&self) -> f64 {
        match self {
            LinearMap::Diagonal(d) => d.iter().map(|x| x.to_f64().unwrap().abs()).product(),
            LinearMap::General2(m) => (m[0][0] * m[1][1] - m[0][1] * m[1][0]).abs(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum OuterMeasureSpec {
    Lebesgue,
    /// `ν(A) = |A \ ∪_{j>=1} λ^j A|`, `λ in (0,1)`.
    ContractionGeometric { lambda: Rat },
    /// `ν(A) = |A \ ∪_{j>=1} M^j A|` for a contracting linear map `M`.
    LinearFamily(LinearMap),
    /// `ν(A) = w1 |A| + w2 |A \ scale·A|`.
    MixtureTwoTerm { w1: Rat, w2: Rat, scale: Rat },
}

impl OuterMeasureSpec {
    pub fn contraction(lambda: Rat) -> Result<Self, NuError> {
        if lambda <= Rat::zero() || lambda >= Rat::one() {
            return Err(NuError::Domain("lambda must lie in (0,1)".into()));
        }
        Ok(OuterMeasureSpec::ContractionGeometric { lambda })
    }

    pub fn linear(map: LinearMap) -> Result<Self, NuError> {
        if map.det_abs() >= 1.0 {
            return Err(NuError::Domain("|det M| must be < 1".into()));
        }
        Ok(OuterMeasureSpec::LinearFamily(map))
    }

    pub fn mixture(w1: Rat, w2: Rat, scale: Rat) -> Result<Self, NuError> {
        if !w1.is_positive() || !w2.is_positive() || !scale.is_positive() {
            return Err(NuError::Domain("weights and scale must be positive".into()));
        }
        Ok(OuterMeasureSpec::MixtureTwoTerm { w1, w2, scale })
    }
}

/// Set argument of `ν`.
#[derive(Clone, Debug)]
pub enum NuSet<'a> {
    Interval(&'a IntervalUnion),
    Boxes(&'a BoxUnion),
}

/// Value of `ν`: exact when the whole computation stayed rational.
#[derive(Clone, Debug, PartialEq)]
pub enum NuValue {
    Exact(Rat),
    Approx(f64),
}

impl NuValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            NuValue::Exact(r) => r.to_f64().unwrap(),
            NuValue::Approx(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<&Rat> {
        match self {
            NuValue::Exact(r) => Some(r),
            NuValue::Approx(_) => None,
        }
    }
}

/// Relative truncation threshold for non-stabilizing unions.
fn truncation_tol(total: &Rat) -> Rat {
    total * ratio(1, 1_000_000_000_000_000)
}

pub fn nu_eval(spec: &OuterMeasureSpec, set: &NuSet) -> Result<NuValue, NuError> {
    match (spec, set) {
        (OuterMeasureSpec::Lebesgue, NuSet::Interval(a)) => Ok(NuValue::Exact(a.measure())),
        (OuterMeasureSpec::Lebesgue, NuSet::Boxes(a)) => Ok(NuValue::Exact(a.measure())),
        (OuterMeasureSpec::ContractionGeometric { lambda }, NuSet::Interval(a)) => {
            Ok(NuValue::Exact(nu_contraction_interval(lambda, a)))
        }
        (OuterMeasureSpec::ContractionGeometric { lambda }, NuSet::Boxes(a)) => {
            let d = a.dim();
            let factors = vec![lambda.clone(); d];
            Ok(NuValue::Exact(nu_diag_boxes(&factors, a)))
        }
        (OuterMeasureSpec::LinearFamily(LinearMap::Diagonal(f)), NuSet::Interval(a)) => {
            if f.len() != 1 {
                return Err(NuError::Domain("interval sets need a 1-d map".into()));
            }
            let lam = f[0].abs();
            Ok(NuValue::Exact(nu_contraction_interval(&lam, a)))
        }
        (OuterMeasureSpec::LinearFamily(LinearMap::Diagonal(f)), NuSet::Boxes(a)) => {
            if f.len() != a.dim() {
                return Err(NuError::Domain("dimension mismatch".into()));
            }
            Ok(NuValue::Exact(nu_diag_boxes(f, a)))
        }
        (OuterMeasureSpec::LinearFamily(LinearMap::General2(m)), NuSet::Boxes(a)) => {
            if a.dim() != 2 {
                return Err(NuError::Unsupported(
                    "general matrices are supported in dimension 2 only".into(),
                ));
            }
            Ok(NuValue::Approx(nu_general2_boxes(*m, a)))
        }
        (OuterMeasureSpec::LinearFamily(LinearMap::General2(_)), NuSet::Interval(_)) => Err(
            NuError::Unsupported("interval sets need a 1-d (diagonal) map".into()),
        ),
        (OuterMeasureSpec::MixtureTwoTerm { w1, w2, scale }, NuSet::Interval(a)) => {
            let excluded = a.scale(scale);
            let kept = a.difference(&excluded);
            Ok(NuValue::Exact(w1 * a.measure() + w2 * kept.measure()))
        }
        (OuterMeasureSpec::MixtureTwoTerm { w1, w2, scale }, NuSet::Boxes(a)) => {
            let factors = vec![scale.clone(); a.dim()];
            let kept = a.difference(&a.scale_diag(&factors));
            Ok(NuValue::Exact(w1 * a.measure() + w2 * kept.measure()))
        }
    }
}

/// `|A \ ∪_{j>=1} λ^j A|` on interval unions, exact up to the documented
/// truncation when `inf A = 0`.
fn nu_contraction_interval(lambda: &Rat, a: &IntervalUnion) -> Rat {
    if a.is_empty() {
        return Rat::zero();
    }
    let total = a.measure();
    let tol = truncation_tol(&total) * (Rat::one() - lambda);
    let inf = a.inf().unwrap().clone();
    let sup = a.sup().unwrap().clone();
    let mut covered = IntervalUnion::empty(); // (∪ λ^j A) ∩ A
    let mut factor = lambda.clone();
    loop {
        let term = a.scale(&factor).intersect(a);
        covered = covered.union(&term);
        factor *= lambda;
        if inf.is_positive() && &factor * &sup <= inf {
            break; // all further transforms lie strictly below A
        }
        if &factor * &total < tol {
            break; // geometric tail below truncation threshold
        }
    }
    total - covered.measure()
}

/// Same for diagonal maps on box unions (positive factors with |Π λ_i| < 1).
fn nu_diag_boxes(factors: &[Rat], a: &BoxUnion) -> Rat {
    if a.is_empty() {
        return Rat::zero();
    }
    let abs: Vec<Rat> = factors.iter().map(|f| f.abs()).collect();
    let det: Rat = abs.iter().product();
    assert!(det < Rat::one(), "contraction required");
    let total = a.measure();
    let tol = truncation_tol(&total) * (Rat::one() - &det);
    let mut covered = BoxUnion::empty(a.dim());
    let mut current = a.scale_diag(&abs);
    let mut vol_factor = det.clone();
    loop {
        let term = current.intersect(a);
        if !term.is_empty() {
            covered = covered.union(&term);
        }
        if current.intersect(a).is_empty() && disjoint_forever(&current, a, &abs) {
            break;
        }
        if &vol_factor * &total < tol {
            break;
        }
        current = current.scale_diag(&abs);
        vol_factor *= &det;
    }
    total - covered.measure()
}

/// After scaling by contractions, once every coordinate of the transform's
/// bounding box lies strictly below the target's infimum (coordinatewise,
/// for sets with positive infima) no later transform can intersect.
fn disjoint_forever(current: &BoxUnion, a: &BoxUnion, _factors: &[Rat]) -> bool {
    let (Some(cb), Some(ab)) = (current.bounding_box(), a.bounding_box()) else {
        return true;
    };
    cb.hi
        .iter()
        .zip(&ab.lo)
        .all(|(chi, alo)| alo.is_positive() && chi <= alo)
}

// ---------------------------------------------------------------------------
// general 2x2 matrices: convex polygon clipping + inclusion-exclusion
// ---------------------------------------------------------------------------

type Poly = Vec<[f64; 2]>;

fn poly_area(p: &Poly) -> f64 {
    let mut s = 0.0;
    for i in 0..p.len() {
        let [x0, y0] = p[i];
        let [x1, y1] = p[(i + 1) % p.len()];
        s += x0 * y1 - x1 * y0;
    }
    s.abs() / 2.0
}

/// Clip a convex polygon by the half-plane `a·x + b·y <= c`.
fn clip_halfplane(p: &Poly, a: f64, b: f64, c: f64) -> Poly {
    let mut out = Vec::new();
    let n = p.len();
    for i in 0..n {
        let cur = p[i];
        let nxt = p[(i + 1) % n];
        let dc = a * cur[0] + b * cur[1] - c;
        let dn = a * nxt[0] + b * nxt[1] - c;
        if dc <= 0.0 {
            out.push(cur);
        }
        if (dc < 0.0 && dn > 0.0) || (dc > 0.0 && dn < 0.0) {
            let t = dc / (dc - dn);
            out.push([cur[0] + t * (nxt[0] - cur[0]), cur[1] + t * (nxt[1] - cur[1])]);
        }
    }
    out
}

/// Intersection of two convex polygons (ccw or cw, orientation-agnostic).
fn poly_intersect(p: &Poly, q: &Poly) -> Poly {
    let mut cur = p.clone();
    let n = q.len();
    // ensure q is traversed ccw for inward half-planes
    let mut q = q.clone();
    let signed: f64 = (0..n)
        .map(|i| {
            let [x0, y0] = q[i];
            let [x1, y1] = q[(i + 1) % n];
            x0 * y1 - x1 * y0
        })
        .sum();
    if signed < 0.0 {
        q.reverse();
    }
    for i in 0..n {
        if cur.is_empty() {
            return cur;
        }
        let [x0, y0] = q[i];
        let [x1, y1] = q[(i + 1) % n];
        // inside is to the left of (x0,y0)->(x1,y1): (x1-x0)(y-y0)-(y1-y0)(x-x0) >= 0
        let a = y1 - y0;
        let b = -(x1 - x0);
        let c = a * x0 + b * y0;
        cur = clip_halfplane(&cur, a, b, c);
    }
    cur
}

fn apply_mat(m: [[f64; 2]; 2], p: &Poly) -> Poly {
    p.iter()
        .map(|v| [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]])
        .collect()
}

fn intersect_lists(a: &[Poly], b: &[Poly]) -> Vec<Poly> {
    let mut out = Vec::new();
    for p in a {
        for q in b {
            let r = poly_intersect(p, q);
            if r.len() >= 3 && poly_area(&r) > 1e-18 {
                out.push(r);
            }
        }
    }
    out
}

/// Area of the union of polygon families, by inclusion-exclusion with
/// early pruning of empty intersections.
fn union_area(sets: &[Vec<Poly>]) -> f64 {
    fn rec(sets: &[Vec<Poly>], start: usize, current: &[Poly], sign: f64) -> f64 {
        let mut total = 0.0;
        for k in start..sets.len() {
            let inter = if current.is_empty() {
                sets[k].clone()
            } else {
                intersect_lists(current, &sets[k])
            };
            if inter.is_empty() {
                continue;
            }
            let area: f64 = inter.iter().map(poly_area).sum();
            total += sign * area + rec(sets, k + 1, &inter, -sign);
        }
        total
    }
    rec(sets, 0, &[], 1.0)
}

/// `|A \ ∪_{j>=1} M^j A|` for a general contracting 2x2 matrix on boxes.
fn nu_general2_boxes(m: [[f64; 2]; 2], a: &BoxUnion) -> f64 {
    let base: Vec<Poly> = a
        .boxes()
        .iter()
        .map(|b| {
            let lo: Vec<f64> = b.lo.iter().map(|x| x.to_f64().unwrap()).collect();
            let hi: Vec<f64> = b.hi.iter().map(|x| x.to_f64().unwrap()).collect();
            vec![[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]]
        })
        .collect();
    let total: f64 = base.iter().map(poly_area).sum();
    let det = (m[0][0] * m[1][1] - m[0][1] * m[1][0]).abs();
    // transforms intersected with A, until the volume tail is negligible
    let mut sets: Vec<Vec<Poly>> = Vec::new();
    let mut current = base.clone();
    let mut vol = total;
    loop {
        current = current.iter().map(|p| apply_mat(m, p)).collect();
        vol *= det;
        let inter = intersect_lists(&current, &base);
        if !inter.is_empty() {
            sets.push(inter);
        }
        if vol < 1e-15 * total {
            break;
        }
    }
    total - union_area(&sets)
}

// ---------------------------------------------------------------------------
// radial families: ν for mark-band sets of position processes
// ---------------------------------------------------------------------------

/// `ν(A) = |Ã \ ∪_{i>=1} DT^{-ip}(Ã)|` where `Ã = {v in R²: π|v|² in A}` is
/// the union of round annuli with area-coordinates in the band union `A`.
///
/// At angle `φ`, membership of `s = π r²` in the `i`-th excluded set is
/// `s · c_i(φ) in A` with `c_i(φ) = |DT^{ip} (cos φ, sin φ)|²`, so the kept
/// radial mass is an exact 1-d set computation per angle; the angular
/// integral uses the periodic trapezoid rule.
pub fn nu_radial_2d(dt_p: [[f64; 2]; 2], bands: &[(f64, f64)], n_angles: usize) -> f64 {
    assert!(n_angles >= 8);
    let sup = bands.iter().fold(0.0f64, |m, &(_, hi)| m.max(hi));
    if sup <= 0.0 {
        return 0.0;
    }
    let mut acc = 0.0;
    for k in 0..n_angles {
        let phi = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / n_angles as f64;
        let mut dir = [phi.cos(), phi.sin()];
        let mut kept: Vec<(f64, f64)> = bands.to_vec();
        loop {
            dir = [
                dt_p[0][0] * dir[0] + dt_p[0][1] * dir[1],
                dt_p[1][0] * dir[0] + dt_p[1][1] * dir[1],
            ];
            let c = dir[0] * dir[0] + dir[1] * dir[1];
            debug_assert!(c > 1.0, "DT^p must expand");
            // exclude s with s·c in A, i.e. s in A/c
            let scaled: Vec<(f64, f64)> = bands.iter().map(|&(lo, hi)| (lo / c, hi / c)).collect();
            kept = f64_set_difference(&kept, &scaled);
            if sup / c < 1e-15 * sup || kept.is_empty() {
                break;
            }
        }
        acc += kept.iter().map(|(lo, hi)| hi - lo).sum::<f64>();
    }
    acc / n_angles as f64
}

/// Difference of unions of 1-d intervals in plain f64 (both inputs are
/// unions of disjoint intervals, not necessarily sorted).
fn f64_set_difference(a: &[(f64, f64)], b: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut b = b.to_vec();
    b.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let mut out = Vec::new();
    for &(alo, ahi) in a {
        let mut cur = alo;
        for &(blo, bhi) in &b {
            if bhi <= cur {
                continue;
            }
            if blo >= ahi {
                break;
            }
            if blo > cur {
                out.push((cur, blo.min(ahi)));
            }
            cur = cur.max(bhi);
            if cur >= ahi {
                break;
            }
        }
        if cur < ahi {
            out.push((cur, ahi));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Monte-Carlo oracle
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
pub struct NuEstimate {
    pub value: f64,
    pub std_err: f64,
    pub samples: u64,
    /// volume of the sampling box; `box_volume / samples` is the absolute
    /// resolution of the estimator (meaningful when the empirical variance
    /// degenerates to zero)
    pub box_volume: f64,
}

impl NuEstimate {
    /// Standard error floored at the estimator's one-sample resolution.
    pub fn effective_std_err(&self) -> f64 {
        self.std_err.max(self.box_volume / self.samples as f64)
    }
}

/// Rejection estimate of `ν` by uniform sampling over the bounding box with
/// membership tests; the transform family is truncated at machine-negligible
/// scale. Independent of the exact evaluation path.
pub fn nu_monte_carlo(
    spec: &OuterMeasureSpec,
    set: &NuSet,
    samples: u64,
    seed: u64,
) -> Result<NuEstimate, NuError> {
    if samples < 10_000 {
        return Err(NuError::Domain("need at least 1e4 samples".into()));
    }
    let mut rng = run_rng(seed, 0);

    // bounding box and membership closure
    let (lo, hi, contains): (Vec<f64>, Vec<f64>, Box<dyn Fn(&[f64]) -> bool>) = match set {
        NuSet::Interval(a) => {
            if a.is_empty() {
                return Ok(NuEstimate { value: 0.0, std_err: 0.0, samples, box_volume: 0.0 });
            }
            let comps = a.components_f64();
            let lo = comps.first().unwrap().0;
            let hi = comps.last().unwrap().1;
            let c = comps.clone();
            (
                vec![lo],
                vec![hi],
                Box::new(move |x: &[f64]| c.iter().any(|&(a, b)| x[0] >= a && x[0] < b)),
            )
        }
        NuSet::Boxes(a) => {
            let Some(bb) = a.bounding_box() else {
                return Ok(NuEstimate { value: 0.0, std_err: 0.0, samples, box_volume: 0.0 });
            };
            let lo: Vec<f64> = bb.lo.iter().map(|x| x.to_f64().unwrap()).collect();
            let hi: Vec<f64> = bb.hi.iter().map(|x| x.to_f64().unwrap()).collect();
            let aa = (*a).clone();
            (lo, hi, Box::new(move |x: &[f64]| aa.contains_f64(x)))
        }
    };
    let dim = lo.len();
    let box_vol: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
    let sup_abs: f64 = hi.iter().chain(lo.iter()).fold(0.0f64, |m, &v| m.max(v.abs()));

    // weight of a sample point under the spec
    let weight = |x: &[f64]| -> f64 {
        if !contains(x) {
            return 0.0;
        }
        match spec {
            OuterMeasureSpec::Lebesgue => 1.0,
            OuterMeasureSpec::ContractionGeometric { lambda } => {
                let lam = lambda.to_f64().unwrap();
                let mut y = x.to_vec();
                loop {
                    for v in &mut y {
                        *v /= lam;
                    }
                    if y.iter().map(|v| v.abs()).fold(0.0f64, f64::max) > sup_abs + 1.0 {
                        return 1.0;
                    }
                    if contains(&y) {
                        return 0.0;
                    }
                }
            }
            OuterMeasureSpec::LinearFamily(map) => {
                let inv: Box<dyn Fn(&mut Vec<f64>)> = match map {
                    LinearMap::Diagonal(f) => {
                        let fs: Vec<f64> = f.iter().map(|v| v.to_f64().unwrap()).collect();
                        Box::new(move |y: &mut Vec<f64>| {
                            for (v, c) in y.iter_mut().zip(&fs) {
                                *v /= c;
                            }
                        })
                    }
                    LinearMap::General2(m) => {
                        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
                        let inv = [
                            [m[1][1] / det, -m[0][1] / det],
                            [-m[1][0] / det, m[0][0] / det],
                        ];
                        Box::new(move |y: &mut Vec<f64>| {
                            let (a, b) = (y[0], y[1]);
                            y[0] = inv[0][0] * a + inv[0][1] * b;
                            y[1] = inv[1][0] * a + inv[1][1] * b;
                        })
                    }
                };
                let mut y = x.to_vec();
                for _ in 0..2000 {
                    inv(&mut y);
                    if y.iter().map(|v| v.abs()).fold(0.0f64, f64::max) > 4.0 * (sup_abs + 1.0) {
                        return 1.0;
                    }
                    if contains(&y) {
                        return 0.0;
                    }
                }
                1.0
            }
            OuterMeasureSpec::MixtureTwoTerm { w1, w2, scale } => {
                let c = scale.to_f64().unwrap();
                let mut y = x.to_vec();
                for v in &mut y {
                    *v /= c;
                }
                let w1 = w1.to_f64().unwrap();
                let w2 = w2.to_f64().unwrap();
                if contains(&y) {
                    w1
                } else {
                    w1 + w2
                }
            }
        }
    };

    let mut sum = 0.0;
    let mut sumsq = 0.0;
    let mut x = vec![0.0; dim];
    for _ in 0..samples {
        for k in 0..dim {
            x[k] = lo[k] + (hi[k] - lo[k]) * u01(&mut rng);
        }
        let w = weight(&x);
        sum += w;
        sumsq += w * w;
    }
    let mean = sum / samples as f64;
    let var = (sumsq / samples as f64 - mean * mean).max(0.0);
    Ok(NuEstimate {
        value: box_vol * mean,
        std_err: box_vol * (var / samples as f64).sqrt(),
        samples,
        box_volume: box_vol,
    })
}

// ---------------------------------------------------------------------------
// empirical ν from exact interval arithmetic
// ---------------------------------------------------------------------------

/// `n |A^(q)_n|` for the exceedance band family of `a` (a union of τ-bands):
/// the exact finite-`n` quantity whose limit is `ν(a)`.
pub fn empirical_nu(
    system: &SystemSpec,
    ts: &ThresholdScheme,
    a: &IntervalUnion,
    q: u32,
) -> Result<Rat, NuError> {
    let mut a_n = IntervalUnion::empty();
    for (lo, hi) in a.components() {
        let outer = ts
            .exceedance_set_exact(hi)
            .map_err(|e| NuError::Domain(e.to_string()))?;
        let inner = ts
            .exceedance_set_exact(lo)
            .map_err(|e| NuError::Domain(e.to_string()))?;
        a_n = a_n.union(&outer.difference(&inner));
    }
    let aq = aq_set(system, &a_n, q).map_err(|e| NuError::Domain(e.to_string()))?;
    Ok(aq.measure() * Rat::from_integer(ts.n.into()))
}

//! Samplers for the limiting processes, with analytic void-probability and
//! intensity formulas to compare against.
//!
//! Every law is built from the same primitives: per-band Poisson arrivals in
//! time (exponential gaps by inverse CDF), uniform marks within the band,
//! and a deterministic vertical structure on top of each base point
//! (geometric stacks, linear-image stacks, or a single companion atom).
//! Windows are bounded, so every stack is finite and truncation is exact.

use crate::boxes::{BoxR, BoxUnion};
use crate::interval::{rat, ratio, IntervalUnion};
use crate::nu::{nu_eval, nu_radial_2d, LinearMap, NuSet, OuterMeasureSpec};
use crate::point_measure::{Atom, Cell, MarkRegion, PointMeasure, RectangleFamily};
use crate::rng::{exp_variate, geometric_variate, u01, uniform_left_open};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LimitError {
    #[error("inconsistent parameters: {0}")]
    Parameter(String),
    #[error("unsupported law/ν pairing: {0}")]
    Unsupported(String),
}

/// Time horizon and mark cap (or spatial radius) of the sampling window.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Window {
    pub horizon: f64,
    pub mark_cap: f64,
}

/// One of the limiting processes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum LimitLaw {
    /// Two-dimensional Poisson process with Lebesgue intensity.
    Poisson2D,
    /// Compound Poisson on the line: events at rate `θτ`, geometric
    /// multiplicities with mean `1/θ` stored as integer marks.
    CompoundPoisson1D { theta: f64, tau: f64 },
    /// Bases at rate `θ` per unit band, vertical stacks at mark ratios
    /// `α^d`; requires `θ = 1 - α^{-d}`.
    StackedGeometric { theta: f64, alpha: f64, d: u32 },
    /// Position-resolved Poisson process with Lebesgue intensity on the
    /// tangent window (no clustering).
    PoissonMultiD { d: u32 },
    /// Position-resolved process with stacks `DT^{ℓp} U`; requires
    /// `θ = 1 - 1/|det DT^p|`.
    StackedLinear { theta: f64, dt_p: [[f64; 2]; 2] },
    /// Magnitude projection of the stacked-linear process: stack marks
    /// `u · |DT^{ℓp} e(Θ)|²` with a uniform angle Θ.
    NDag { theta: f64, dt_p: [[f64; 2]; 2] },
    /// Eventually-aperiodic discontinuity: one companion atom at `β⁺ u`
    /// with probability `1/(2θ)`, `θ = 1 - (β⁺)^{-1}/2`.
    HatN { beta_plus: f64 },
    /// Two correlated maximal sites: rate `Θ = 23/33` per unit band,
    /// companion BELOW the base at `(3/10) u` with probability `3/23`.
    DoubleHatN,
}

impl LimitLaw {
    pub fn stacked_geometric(alpha: f64, d: u32) -> Self {
        LimitLaw::StackedGeometric {
            theta: 1.0 - alpha.powi(-(d as i32)),
            alpha,
            d,
        }
    }

    pub fn stacked_linear(dt_p: [[f64; 2]; 2]) -> Self {
        let det = (dt_p[0][0] * dt_p[1][1] - dt_p[0][1] * dt_p[1][0]).abs();
        LimitLaw::StackedLinear { theta: 1.0 - 1.0 / det, dt_p }
    }

    pub fn n_dag(dt_p: [[f64; 2]; 2]) -> Self {
        let det = (dt_p[0][0] * dt_p[1][1] - dt_p[0][1] * dt_p[1][0]).abs();
        LimitLaw::NDag { theta: 1.0 - 1.0 / det, dt_p }
    }

    pub fn validate(&self) -> Result<(), LimitError> {
        match self {
            LimitLaw::Poisson2D => Ok(()),
            LimitLaw::CompoundPoisson1D { theta, tau } => {
                if !(*theta > 0.0 && *theta <= 1.0) || *tau <= 0.0 {
                    return Err(LimitError::Parameter("need θ in (0,1], τ > 0".into()));
                }
                Ok(())
            }
            LimitLaw::StackedGeometric { theta, alpha, d } => {
                if *alpha <= 1.0 || *d == 0 {
                    return Err(LimitError::Parameter("need α > 1, d >= 1".into()));
                }
                let want = 1.0 - alpha.powi(-(*d as i32));
                if (theta - want).abs() > 1e-12 {
                    return Err(LimitError::Parameter(format!(
                        "θ = {theta} but 1 - α^-d = {want}"
                    )));
                }
                Ok(())
            }
            LimitLaw::PoissonMultiD { d } => {
                if *d == 0 || *d > 2 {
                    return Err(LimitError::Parameter("d must be 1 or 2".into()));
                }
                Ok(())
            }
            LimitLaw::StackedLinear { theta, dt_p } | LimitLaw::NDag { theta, dt_p } => {
                let det = (dt_p[0][0] * dt_p[1][1] - dt_p[0][1] * dt_p[1][0]).abs();
                if det <= 1.0 {
                    return Err(LimitError::Parameter("|det DT^p| must exceed 1".into()));
                }
                let want = 1.0 - 1.0 / det;
                if (theta - want).abs() > 1e-12 {
                    return Err(LimitError::Parameter(format!(
                        "θ = {theta} but 1 - 1/|det| = {want}"
                    )));
                }
                Ok(())
            }
            LimitLaw::HatN { beta_plus } => {
                if *beta_plus <= 1.0 {
                    return Err(LimitError::Parameter("β⁺ must exceed 1".into()));
                }
                Ok(())
            }
            LimitLaw::DoubleHatN => Ok(()),
        }
    }
}

/// Double-hat constants: event rate, companion probability, companion ratio.
pub const DOUBLE_HAT_THETA: f64 = 23.0 / 33.0;
pub const DOUBLE_HAT_PZ1: f64 = 3.0 / 23.0;
pub const DOUBLE_HAT_RATIO: f64 = 3.0 / 10.0;

/// Sample one realization of the law on the window. Deterministic in
/// `(law, window, rng state)`.
pub fn sample(law: &LimitLaw, window: &Window, rng: &mut ChaCha8Rng) -> Result<PointMeasure, LimitError> {
    law.validate()?;
    let mut atoms: Vec<Atom> = Vec::new();
    let h = window.horizon;
    if h <= 0.0 || window.mark_cap <= 0.0 {
        return Ok(PointMeasure::empty(h.max(0.0)));
    }
    match law {
        LimitLaw::Poisson2D => {
            for_each_band(window.mark_cap, |lo, hi| {
                let w = hi - lo;
                let mut t = 0.0;
                loop {
                    t += exp_variate(rng, w);
                    if t >= h {
                        break;
                    }
                    atoms.push(Atom { t, marks: vec![uniform_left_open(rng, lo, hi)] });
                }
            });
        }
        LimitLaw::CompoundPoisson1D { theta, tau } => {
            let mut t = 0.0;
            loop {
                t += exp_variate(rng, theta * tau);
                if t >= h {
                    break;
                }
                let mult = geometric_variate(rng, *theta);
                atoms.push(Atom { t, marks: vec![mult as f64] });
            }
        }
        LimitLaw::StackedGeometric { theta, alpha, d } => {
            let ratio = alpha.powi(*d as i32);
            for_each_band(window.mark_cap, |lo, hi| {
                let w = hi - lo;
                let mut t = 0.0;
                loop {
                    t += exp_variate(rng, theta * w);
                    if t >= h {
                        break;
                    }
                    let u = uniform_left_open(rng, lo, hi);
                    let mut m = u;
                    while m <= window.mark_cap {
                        atoms.push(Atom { t, marks: vec![m] });
                        m *= ratio;
                    }
                }
            });
        }
        LimitLaw::PoissonMultiD { d } => {
            sample_position_bands(*d, window, 1.0, rng, |t, pos, _rng, atoms| {
                atoms.push(Atom { t, marks: pos.to_vec() });
            }, &mut atoms);
        }
        LimitLaw::StackedLinear { theta, dt_p } => {
            let m = *dt_p;
            let cap = window.mark_cap;
            sample_position_bands(2, window, *theta, rng, move |t, pos, _rng, atoms| {
                let mut v = [pos[0], pos[1]];
                loop {
                    if (v[0] * v[0] + v[1] * v[1]).sqrt() > cap {
                        break;
                    }
                    atoms.push(Atom { t, marks: vec![v[0], v[1]] });
                    v = [
                        m[0][0] * v[0] + m[0][1] * v[1],
                        m[1][0] * v[0] + m[1][1] * v[1],
                    ];
                }
            }, &mut atoms);
        }
        LimitLaw::NDag { theta, dt_p } => {
            let m = *dt_p;
            for_each_band(window.mark_cap, |lo, hi| {
                let w = hi - lo;
                let mut t = 0.0;
                loop {
                    t += exp_variate(rng, theta * w);
                    if t >= h {
                        break;
                    }
                    let u = uniform_left_open(rng, lo, hi);
                    let angle = 2.0 * std::f64::consts::PI * u01(rng);
                    let mut dir = [angle.cos(), angle.sin()];
                    loop {
                        let c = dir[0] * dir[0] + dir[1] * dir[1];
                        let mark = u * c;
                        if mark > window.mark_cap {
                            break;
                        }
                        atoms.push(Atom { t, marks: vec![mark] });
                        dir = [
                            m[0][0] * dir[0] + m[0][1] * dir[1],
                            m[1][0] * dir[0] + m[1][1] * dir[1],
                        ];
                    }
                }
            });
        }
        LimitLaw::HatN { beta_plus } => {
            let theta = 1.0 - 0.5 / beta_plus;
            let p_z1 = 0.5 / theta;
            for_each_band(window.mark_cap, |lo, hi| {
                let w = hi - lo;
                let mut t = 0.0;
                loop {
                    t += exp_variate(rng, theta * w);
                    if t >= h {
                        break;
                    }
                    let u = uniform_left_open(rng, lo, hi);
                    let z1 = u01(rng) <= p_z1;
                    atoms.push(Atom { t, marks: vec![u] });
                    if z1 {
                        let companion = beta_plus * u;
                        if companion <= window.mark_cap {
                            atoms.push(Atom { t, marks: vec![companion] });
                        }
                    }
                }
            });
        }
        LimitLaw::DoubleHatN => {
            // companions sit BELOW their base, so bases must be drawn up to
            // (10/3)·cap to cover every atom visible in the window
            let base_cap = window.mark_cap / DOUBLE_HAT_RATIO;
            for_each_band(base_cap, |lo, hi| {
                let w = hi - lo;
                let mut t = 0.0;
                loop {
                    t += exp_variate(rng, DOUBLE_HAT_THETA * w);
                    if t >= h {
                        break;
                    }
                    let u = uniform_left_open(rng, lo, hi);
                    let z1 = u01(rng) <= DOUBLE_HAT_PZ1;
                    if u <= window.mark_cap {
                        atoms.push(Atom { t, marks: vec![u] });
                    }
                    if z1 {
                        let companion = DOUBLE_HAT_RATIO * u;
                        if companion <= window.mark_cap {
                            atoms.push(Atom { t, marks: vec![companion] });
                        }
                    }
                }
            });
        }
    }
    Ok(PointMeasure::new(h, atoms))
}

/// Split `(0, cap]` into unit bands `(i-1, i]` plus a final partial band and
/// visit each.
fn for_each_band(cap: f64, mut f: impl FnMut(f64, f64)) {
    let mut lo = 0.0;
    while lo < cap {
        let hi = (lo + 1.0).min(cap);
        f(lo, hi);
        lo = hi;
    }
}

/// Poisson bases over radial annulus bands of the tangent window, rate
/// `rate_factor · Leb(band)` per unit time, uniform positions.
fn sample_position_bands(
    d: u32,
    window: &Window,
    rate_factor: f64,
    rng: &mut ChaCha8Rng,
    mut emit: impl FnMut(f64, &[f64], &mut ChaCha8Rng, &mut Vec<Atom>),
    atoms: &mut Vec<Atom>,
) {
    let radius = window.mark_cap;
    let h = window.horizon;
    for_each_band(radius, |r_lo, r_hi| {
        let vol = match d {
            1 => 2.0 * (r_hi - r_lo),
            2 => std::f64::consts::PI * (r_hi * r_hi - r_lo * r_lo),
            _ => unreachable!(),
        };
        let mut t = 0.0;
        loop {
            t += exp_variate(rng, rate_factor * vol);
            if t >= h {
                break;
            }
            let pos: Vec<f64> = match d {
                1 => {
                    let r = uniform_left_open(rng, r_lo, r_hi);
                    if u01(rng) <= 0.5 {
                        vec![r]
                    } else {
                        vec![-r]
                    }
                }
                2 => {
                    let rr = r_lo * r_lo + (r_hi * r_hi - r_lo * r_lo) * u01(rng);
                    let r = rr.sqrt();
                    let angle = 2.0 * std::f64::consts::PI * u01(rng);
                    vec![r * angle.cos(), r * angle.sin()]
                }
                _ => unreachable!(),
            };
            emit(t, &pos, rng, atoms);
        }
    });
}

// ---------------------------------------------------------------------------
// analytic formulas
// ---------------------------------------------------------------------------

/// The outer measure governing the law's void probabilities, when it is one
/// of the `nu` module's variants.
pub fn outer_measure_spec(law: &LimitLaw) -> Option<OuterMeasureSpec> {
    match law {
        LimitLaw::Poisson2D | LimitLaw::PoissonMultiD { .. } => Some(OuterMeasureSpec::Lebesgue),
        LimitLaw::StackedGeometric { alpha, d, .. } => Some(OuterMeasureSpec::ContractionGeometric {
            lambda: rat(alpha.powi(-(*d as i32))),
        }),
        LimitLaw::StackedLinear { dt_p, .. } => {
            let inv = invert2(*dt_p);
            Some(OuterMeasureSpec::LinearFamily(as_linear_map(inv)))
        }
        LimitLaw::HatN { beta_plus } => Some(OuterMeasureSpec::MixtureTwoTerm {
            w1: ratio(1, 2),
            w2: ratio(1, 2),
            scale: rat(1.0 / beta_plus),
        }),
        LimitLaw::DoubleHatN => Some(OuterMeasureSpec::MixtureTwoTerm {
            w1: ratio(10, 11),
            w2: ratio(1, 11),
            scale: ratio(10, 3),
        }),
        LimitLaw::NDag { .. } | LimitLaw::CompoundPoisson1D { .. } => None,
    }
}

fn invert2(m: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [
        [m[1][1] / det, -m[0][1] / det],
        [-m[1][0] / det, m[0][0] / det],
    ]
}

fn as_linear_map(m: [[f64; 2]; 2]) -> LinearMap {
    if m[0][1] == 0.0 && m[1][0] == 0.0 {
        LinearMap::Diagonal(vec![rat(m[0][0]), rat(m[1][1])])
    } else {
        LinearMap::General2(m)
    }
}

/// Marks live on `[0, ∞)`: a counting band `(lo, hi]` with `lo < 0` denotes
/// the mark set `[0, hi)` in measure computations.
fn clip_bands(bands: &[(f64, f64)]) -> Vec<(f64, f64)> {
    bands
        .iter()
        .map(|&(lo, hi)| (lo.max(0.0), hi))
        .filter(|&(lo, hi)| hi > lo)
        .collect()
}

/// `ν(A)` of one cell's mark region under the law.
pub fn nu_of_region(law: &LimitLaw, region: &MarkRegion) -> Result<f64, LimitError> {
    match (law, region) {
        (LimitLaw::CompoundPoisson1D { theta, tau }, MarkRegion::All) => Ok(theta * tau),
        (LimitLaw::NDag { dt_p, .. }, MarkRegion::Bands(bands)) => {
            Ok(nu_radial_2d(*dt_p, &clip_bands(bands), 4096))
        }
        (_, MarkRegion::All) => Err(LimitError::Unsupported(
            "time-only cells are for the 1-d compound law".into(),
        )),
        (_, MarkRegion::Bands(bands)) => {
            let spec = outer_measure_spec(law)
                .ok_or_else(|| LimitError::Unsupported(format!("{law:?} with bands")))?;
            let a = IntervalUnion::from_f64_pairs(&clip_bands(bands));
            Ok(nu_eval(&spec, &NuSet::Interval(&a))
                .map_err(|e| LimitError::Unsupported(e.to_string()))?
                .to_f64())
        }
        (_, MarkRegion::Boxes(boxes)) => {
            let spec = outer_measure_spec(law)
                .ok_or_else(|| LimitError::Unsupported(format!("{law:?} with boxes")))?;
            let dim = boxes.first().map(|(lo, _)| lo.len()).unwrap_or(2);
            let bu = BoxUnion::new(
                dim,
                boxes.iter().map(|(lo, hi)| BoxR::from_f64(lo, hi)).collect(),
            );
            Ok(nu_eval(&spec, &NuSet::Boxes(&bu))
                .map_err(|e| LimitError::Unsupported(e.to_string()))?
                .to_f64())
        }
    }
}

/// `P(N(E) = 0) = Π_k exp(-ν(A_k) |J_k|)` over the family's cells.
pub fn analytic_void(law: &LimitLaw, fam: &RectangleFamily) -> Result<f64, LimitError> {
    let mut log_p = 0.0;
    for cell in &fam.cells {
        let nu = nu_of_region(law, &cell.region)?;
        log_p -= nu * (cell.t_hi - cell.t_lo);
    }
    Ok(log_p.exp())
}

/// `E N(E)`: Lebesgue intensity for all laws (the 1-d compound law carries
/// intensity τ per unit time).
pub fn expected_count(law: &LimitLaw, cell: &Cell) -> Result<f64, LimitError> {
    let time = cell.t_hi - cell.t_lo;
    let mark_mass = match (&cell.region, law) {
        (MarkRegion::All, LimitLaw::CompoundPoisson1D { tau, .. }) => *tau,
        (MarkRegion::All, _) => {
            return Err(LimitError::Unsupported(
                "time-only cells are for the 1-d compound law".into(),
            ))
        }
        (MarkRegion::Bands(bands), _) => clip_bands(bands).iter().map(|(lo, hi)| hi - lo).sum(),
        (MarkRegion::Boxes(boxes), _) => boxes
            .iter()
            .map(|(lo, hi)| lo.iter().zip(hi).map(|(l, h)| h - l).product::<f64>())
            .sum(),
    };
    Ok(time * mark_mass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::run_rng;

    fn window(h: f64, cap: f64) -> Window {
        Window { horizon: h, mark_cap: cap }
    }

    #[test]
    fn empty_window_empty_sample() {
        let mut rng = run_rng(1, 0);
        let pm = sample(&LimitLaw::Poisson2D, &window(0.0, 1.0), &mut rng).unwrap();
        assert!(pm.is_empty());
    }

    #[test]
    fn samplers_are_deterministic_in_seed() {
        for law in [
            LimitLaw::Poisson2D,
            LimitLaw::stacked_geometric(1.5, 1),
            LimitLaw::DoubleHatN,
        ] {
            let a = sample(&law, &window(5.0, 3.0), &mut run_rng(9, 4)).unwrap();
            let b = sample(&law, &window(5.0, 3.0), &mut run_rng(9, 4)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn poisson_unit_cell_count_is_poisson_one() {
        let mut rng = run_rng(2, 0);
        let m = 20_000;
        let mut total = 0u64;
        for _ in 0..m {
            let pm = sample(&LimitLaw::Poisson2D, &window(1.0, 1.0), &mut rng).unwrap();
            total += pm.len() as u64;
        }
        let mean = total as f64 / m as f64;
        let se = (1.0 / m as f64).sqrt();
        assert!((mean - 1.0).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn poisson_void_probability() {
        let mut rng = run_rng(3, 0);
        let m = 20_000;
        let fam = RectangleFamily::single_band(0.0, 0.8, 0.0, 1.5);
        let mut voids = 0u64;
        for _ in 0..m {
            let pm = sample(&LimitLaw::Poisson2D, &window(0.8, 1.5), &mut rng).unwrap();
            if pm.is_void_on(&fam) {
                voids += 1;
            }
        }
        let p = voids as f64 / m as f64;
        let expect = (-0.8f64 * 1.5).exp();
        let se = (expect * (1.0 - expect) / m as f64).sqrt();
        assert!((p - expect).abs() < 3.5 * se, "void {p} vs {expect}");
        assert!((analytic_void(&LimitLaw::Poisson2D, &fam).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn stacked_geometric_marks_have_exact_ratio() {
        let law = LimitLaw::stacked_geometric(1.5, 1);
        let mut rng = run_rng(4, 0);
        let mut seen_stack = 0;
        for _ in 0..200 {
            let pm = sample(&law, &window(10.0, 8.0), &mut rng).unwrap();
            let atoms = pm.atoms();
            for i in 1..atoms.len() {
                if atoms[i].t == atoms[i - 1].t {
                    let r = atoms[i].marks[0] / atoms[i - 1].marks[0];
                    assert!((r - 1.5).abs() < 1e-12, "stack ratio {r}");
                    seen_stack += 1;
                }
            }
        }
        assert!(seen_stack > 100, "found {seen_stack} stacked pairs");
    }

    #[test]
    fn stacked_geometric_void_matches_contraction_nu() {
        // P(void [0,t) x [0,τ)) = exp(-t θ τ) since ν([0,τ)) = θτ
        let law = LimitLaw::stacked_geometric(2.0, 1); // θ = 1/2
        let (t, tau) = (1.2, 1.8);
        let fam = RectangleFamily::single_band(0.0, t, -1.0, tau);
        let expect = (-t * 0.5 * tau as f64).exp();
        assert!((analytic_void(&law, &fam).unwrap() - expect).abs() < 1e-12);

        let mut rng = run_rng(5, 0);
        let m = 20_000;
        let mut voids = 0u64;
        for _ in 0..m {
            let pm = sample(&law, &window(t, 4.0), &mut rng).unwrap();
            if pm.is_void_on(&fam) {
                voids += 1;
            }
        }
        let p = voids as f64 / m as f64;
        let se = (expect * (1.0 - expect) / m as f64).sqrt();
        assert!((p - expect).abs() < 3.5 * se, "void {p} vs {expect}");
    }

    #[test]
    fn compound_poisson_multiplicities() {
        // θ = 1: all multiplicities 1
        let mut rng = run_rng(6, 0);
        let pm = sample(
            &LimitLaw::CompoundPoisson1D { theta: 1.0, tau: 5.0 },
            &window(50.0, 1.0),
            &mut rng,
        )
        .unwrap();
        assert!(pm.len() > 100);
        assert!(pm.atoms().iter().all(|a| a.marks[0] == 1.0));

        // mean multiplicity 1/θ
        let theta = 0.4;
        let pm = sample(
            &LimitLaw::CompoundPoisson1D { theta, tau: 5.0 },
            &window(2000.0, 1.0),
            &mut rng,
        )
        .unwrap();
        let mults: Vec<f64> = pm.atoms().iter().map(|a| a.marks[0]).collect();
        let mean = mults.iter().sum::<f64>() / mults.len() as f64;
        let var = (1.0 - theta) / (theta * theta);
        let se = (var / mults.len() as f64).sqrt();
        assert!((mean - 1.0 / theta).abs() < 3.5 * se, "mean mult {mean}");
    }

    #[test]
    fn stacked_linear_second_point_is_matrix_image() {
        let law = LimitLaw::stacked_linear([[2.0, 0.0], [0.0, 3.0]]);
        if let LimitLaw::StackedLinear { theta, .. } = law {
            assert!((theta - 5.0 / 6.0).abs() < 1e-15);
        }
        let mut rng = run_rng(7, 0);
        let mut stacked = 0;
        for _ in 0..500 {
            let pm = sample(&law, &window(5.0, 6.0), &mut rng).unwrap();
            let atoms = pm.atoms();
            for i in 1..atoms.len() {
                if atoms[i].t == atoms[i - 1].t {
                    // one of the equal-time pair is the image of the other
                    let (a, b) = (&atoms[i - 1].marks, &atoms[i].marks);
                    let fwd = (b[0] - 2.0 * a[0]).abs() < 1e-12 && (b[1] - 3.0 * a[1]).abs() < 1e-12;
                    let bwd = (a[0] - 2.0 * b[0]).abs() < 1e-12 && (a[1] - 3.0 * b[1]).abs() < 1e-12;
                    assert!(fwd || bwd, "stack pair {a:?} {b:?}");
                    stacked += 1;
                }
            }
        }
        assert!(stacked > 30, "found {stacked} stacked pairs");
    }

    #[test]
    fn ndag_base_mark_equals_u_and_reduces_to_geometric_when_isotropic() {
        // DT = diag(2,2): mark ratios are exactly 4
        let law = LimitLaw::n_dag([[2.0, 0.0], [0.0, 2.0]]);
        let mut rng = run_rng(8, 0);
        let mut pairs = 0;
        for _ in 0..300 {
            let pm = sample(&law, &window(5.0, 8.0), &mut rng).unwrap();
            let atoms = pm.atoms();
            for i in 1..atoms.len() {
                if atoms[i].t == atoms[i - 1].t {
                    let r = atoms[i].marks[0] / atoms[i - 1].marks[0];
                    assert!((r - 4.0).abs() < 1e-9, "ratio {r}");
                    pairs += 1;
                }
            }
        }
        assert!(pairs > 30);

        // DT = diag(2,3), angle 0 would give ℓ=1 mark 4u; check the formula
        // through the anisotropic ratio range [4, 9]
        let law = LimitLaw::n_dag([[2.0, 0.0], [0.0, 3.0]]);
        for _ in 0..300 {
            let pm = sample(&law, &window(5.0, 12.0), &mut rng).unwrap();
            let atoms = pm.atoms();
            for i in 1..atoms.len() {
                if atoms[i].t == atoms[i - 1].t && atoms[i - 1].marks[0] > 0.0 {
                    let r = atoms[i].marks[0] / atoms[i - 1].marks[0];
                    assert!(r >= 4.0 - 1e-9 && r <= 9.0 + 1e-9, "ratio {r}");
                }
            }
        }
    }

    #[test]
    fn double_hat_void_on_zero_based_band() {
        // A = [0,τ): A \ (10/3)A = ∅ so ν(A) = (10/11)τ
        let (t, tau) = (1.0, 1.1);
        let fam = RectangleFamily::single_band(0.0, t, -1.0, tau);
        let expect = (-(10.0 / 11.0) * tau * t as f64).exp();
        assert!((analytic_void(&LimitLaw::DoubleHatN, &fam).unwrap() - expect).abs() < 1e-12);

        let mut rng = run_rng(9, 0);
        let m = 30_000;
        let mut voids = 0u64;
        for _ in 0..m {
            let pm = sample(&LimitLaw::DoubleHatN, &window(t, tau), &mut rng).unwrap();
            if pm.is_void_on(&fam) {
                voids += 1;
            }
        }
        let p = voids as f64 / m as f64;
        let se = (expect * (1.0 - expect) / m as f64).sqrt();
        assert!((p - expect).abs() < 3.5 * se, "void {p} vs {expect}");
    }

    #[test]
    fn hat_void_uses_the_half_half_mixture() {
        let beta = 3.0;
        let law = LimitLaw::HatN { beta_plus: beta };
        // A = (1, 2]: (1/β)A = (1/3, 2/3]: disjoint, so ν = |A| = 1
        let fam = RectangleFamily::single_band(0.0, 1.0, 1.0, 2.0);
        let expect = (-1.0f64).exp();
        assert!((analytic_void(&law, &fam).unwrap() - expect).abs() < 1e-12);

        // A = (1, 3.5]: (1/3)A = (1/3, 7/6]: overlap (1, 7/6] of length 1/6;
        // ν = ½·2.5 + ½·(2.5 - 1/6)
        let fam2 = RectangleFamily::single_band(0.0, 1.0, 1.0, 3.5);
        let nu = 0.5 * 2.5 + 0.5 * (2.5 - 1.0 / 6.0);
        let expect2 = (-nu as f64).exp();
        assert!((analytic_void(&law, &fam2).unwrap() - expect2).abs() < 1e-12);

        let mut rng = run_rng(10, 0);
        let m = 30_000;
        let mut voids = 0u64;
        for _ in 0..m {
            let pm = sample(&law, &window(1.0, 3.5), &mut rng).unwrap();
            if pm.is_void_on(&fam2) {
                voids += 1;
            }
        }
        let p = voids as f64 / m as f64;
        let se = (expect2 * (1.0 - expect2) / m as f64).sqrt();
        assert!((p - expect2).abs() < 3.5 * se, "void {p} vs {expect2}");
    }

    #[test]
    fn analytic_void_multiplies_over_disjoint_cells() {
        let fam = RectangleFamily::new(vec![
            Cell { t_lo: 0.0, t_hi: 1.0, region: MarkRegion::Bands(vec![(0.0, 1.0)]) },
            Cell { t_lo: 2.0, t_hi: 3.0, region: MarkRegion::Bands(vec![(0.5, 2.0)]) },
        ])
        .unwrap();
        let v = analytic_void(&LimitLaw::Poisson2D, &fam).unwrap();
        assert!((v - (-1.0f64 - 1.5).exp()).abs() < 1e-12);
    }

    #[test]
    fn expected_count_is_lebesgue() {
        let cell = Cell { t_lo: 0.0, t_hi: 2.0, region: MarkRegion::Bands(vec![(1.0, 3.0)]) };
        for law in [
            LimitLaw::Poisson2D,
            LimitLaw::stacked_geometric(1.5, 1),
            LimitLaw::DoubleHatN,
            LimitLaw::HatN { beta_plus: 2.0 },
            LimitLaw::n_dag([[2.0, 0.0], [0.0, 3.0]]),
        ] {
            assert_eq!(expected_count(&law, &cell).unwrap(), 4.0);
        }
    }

    #[test]
    fn samples_are_simple() {
        // no duplicate (t, mark) pairs across a large batch of samples
        let mut rng = run_rng(11, 0);
        for law in [
            LimitLaw::Poisson2D,
            LimitLaw::stacked_geometric(1.5, 1),
            LimitLaw::DoubleHatN,
        ] {
            for _ in 0..2000 {
                let pm = sample(&law, &window(3.0, 3.0), &mut rng).unwrap();
                let atoms = pm.atoms();
                for i in 1..atoms.len() {
                    assert!(
                        !(atoms[i].t == atoms[i - 1].t && atoms[i].marks == atoms[i - 1].marks),
                        "duplicate atom under {law:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn inconsistent_parameters_are_rejected() {
        let bad = LimitLaw::StackedGeometric { theta: 0.4, alpha: 2.0, d: 1 };
        assert!(bad.validate().is_err());
        let bad2 = LimitLaw::StackedLinear { theta: 0.5, dt_p: [[2.0, 0.0], [0.0, 3.0]] };
        assert!(bad2.validate().is_err());
    }
}

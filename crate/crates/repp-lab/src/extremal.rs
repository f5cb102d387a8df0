//! Extremal-process paths, the path/record projections of point measures,
//! and the limiting record law.
//!
//! `h1` sends a time/mark point measure to the running infimum of marks,
//! `h2` to its first-passage inverse, `h3` counts the jumps of a step path,
//! and `h` extracts record atoms directly from the measure. The almost-sure
//! identities between these maps hold off stacked (equal-time) atoms, which
//! is exactly where record counting of clustered processes breaks down.

use crate::observables::ThresholdScheme;
use crate::point_measure::{Atom, PointMeasure};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExtremalError {
    #[error("domain error: {0}")]
    Domain(String),
}

/// A right-continuous step path on `[0, horizon)`.
///
/// `breaks` are (time, new value) pairs at strictly increasing times; the
/// path takes `initial` before the first break. For paths produced by `h1`
/// the initial value equals the first break value (the path is constant up
/// to the first atom), and jump extraction treats the segment before the
/// first break as lying at `+∞`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepPath {
    pub breaks: Vec<(f64, f64)>,
    pub initial: f64,
    pub horizon: f64,
}

impl StepPath {
    pub fn constant(value: f64, horizon: f64) -> Self {
        StepPath { breaks: Vec::new(), initial: value, horizon }
    }

    pub fn value_at(&self, t: f64) -> f64 {
        let mut v = self.initial;
        for &(bt, bv) in &self.breaks {
            if bt > t {
                break;
            }
            v = bv;
        }
        v
    }

    /// CSV rows `t,value` at the breakpoints.
    pub fn write_csv<W: std::io::Write>(&self, w: &mut W) -> std::io::Result<()> {
        for (t, v) in &self.breaks {
            writeln!(w, "{t:.16e},{v:.16e}")?;
        }
        Ok(())
    }
}

/// `h1 m(t) = inf{y_i : t_i <= t}`, with the boundary value extended to the
/// left of the first atom. The empty measure maps to the constant `+∞`.
pub fn h1_project(pm: &PointMeasure) -> StepPath {
    let mut breaks: Vec<(f64, f64)> = Vec::new();
    let mut run = f64::INFINITY;
    for a in pm.atoms() {
        let m = a.marks[0];
        if m < run {
            run = m;
            match breaks.last_mut() {
                Some((t, v)) if *t == a.t => *v = m,
                _ => breaks.push((a.t, m)),
            }
        }
    }
    let initial = breaks.first().map(|&(_, v)| v).unwrap_or(f64::INFINITY);
    StepPath { breaks, initial, horizon: pm.horizon }
}

/// `h2 m(y) = inf{t_i : y_i < y}` with the boundary value at and below the
/// smallest mark; the empty measure maps to the constant `horizon`.
///
/// The returned path lives on the mark axis: `breaks` are (mark, time)
/// pairs and `value_at(y)` is the first-passage time below level `y`.
pub fn h2_project(pm: &PointMeasure) -> StepPath {
    if pm.is_empty() {
        return StepPath::constant(pm.horizon, pm.horizon);
    }
    // sort atoms by mark; running minimum of times as the level grows
    let mut by_mark: Vec<(f64, f64)> = pm.atoms().iter().map(|a| (a.marks[0], a.t)).collect();
    by_mark.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.partial_cmp(&b.1).unwrap()));
    let mut breaks: Vec<(f64, f64)> = Vec::new();
    let mut run = f64::INFINITY;
    for &(m, t) in &by_mark {
        if t < run {
            run = t;
            match breaks.last_mut() {
                Some((bm, bv)) if *bm == m => *bv = t,
                _ => breaks.push((m, t)),
            }
        }
    }
    // h2(y) uses strict y_i < y: the value at level y equals the running
    // minimum strictly below y; at or below the smallest mark the boundary
    // value is the time of the minimal atom.
    let initial = breaks.first().map(|&(_, v)| v).unwrap_or(pm.horizon);
    StepPath { breaks, initial, horizon: pm.horizon }
}

/// First-passage evaluation of an `h2` path: `inf{t_i : y_i < y}` (strict).
pub fn h2_value(path: &StepPath, y: f64) -> f64 {
    let mut v = path.initial;
    for &(m, t) in &path.breaks {
        if m < y {
            v = t;
        } else {
            break;
        }
    }
    v
}

/// The extremal process `Z_n(t) = u_n^{-1}(M_{⌊nt⌋+1})` as a step path on
/// `[0, len/n)`, from an explicit mark series.
pub fn extremal_path(marks: &[f64], ts: &ThresholdScheme) -> StepPath {
    let n = ts.n;
    let horizon = marks.len() as f64 / n as f64;
    let mut breaks = Vec::new();
    let mut best = f64::NEG_INFINITY;
    for (j, &x) in marks.iter().enumerate() {
        if x > best {
            best = x;
            breaks.push((j as f64 / n as f64, ts.tau_of(x)));
        }
    }
    let initial = breaks.first().map(|&(_, v)| v).unwrap_or(f64::INFINITY);
    StepPath { breaks, initial, horizon }
}

/// Record times and values of a series, strict records, with the first
/// observation a record by convention.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RecordSeries {
    pub indices: Vec<u64>,
    pub raw_values: Vec<f64>,
}

pub fn record_times(marks: &[f64]) -> RecordSeries {
    let mut out = RecordSeries::default();
    let mut best = f64::NEG_INFINITY;
    for (j, &x) in marks.iter().enumerate() {
        if x > best {
            best = x;
            out.indices.push(j as u64);
            out.raw_values.push(x);
        }
    }
    out
}

/// The record time process `R_n` (atoms at `t_k/n`) and record value
/// process `W_n` (atoms at the normalized record values `u_n^{-1}(X_{t_k})`,
/// carried on the time axis of the returned measure).
pub fn record_pp(rs: &RecordSeries, ts: &ThresholdScheme) -> (PointMeasure, PointMeasure) {
    let n = ts.n;
    let r_atoms = rs
        .indices
        .iter()
        .map(|&j| Atom { t: j as f64 / n as f64, marks: vec![] })
        .collect();
    let mut w_atoms: Vec<Atom> = rs
        .raw_values
        .iter()
        .map(|&x| Atom { t: ts.tau_of(x), marks: vec![] })
        .collect();
    w_atoms.retain(|a| a.t.is_finite());
    (
        PointMeasure::new(1.0, r_atoms),
        PointMeasure::new(f64::INFINITY, w_atoms),
    )
}

/// `P(R(a,b) = k) = (a/b) (log(b/a))^k / k!` for the limiting record
/// process on `(0, ∞)`.
pub fn record_law_pmf(a: f64, b: f64, k: u32) -> Result<f64, ExtremalError> {
    if !(0.0 < a && a < b) {
        return Err(ExtremalError::Domain("need 0 < a < b".into()));
    }
    let lam = (b / a).ln();
    let mut term = a / b;
    for i in 1..=k {
        term *= lam / i as f64;
    }
    Ok(term)
}

/// Jump times of a step path: one atom per breakpoint where the value
/// strictly decreases, with the stretch before the first break treated as
/// `+∞` (so the first break is a jump).
pub fn h3_jumps(path: &StepPath) -> PointMeasure {
    let mut prev = f64::INFINITY;
    let mut atoms = Vec::new();
    for &(t, v) in &path.breaks {
        if v < prev {
            atoms.push(Atom { t, marks: vec![] });
        }
        prev = v;
    }
    PointMeasure::new(path.horizon, atoms)
}

/// The record projection `h`: keeps an atom when its mark lies strictly
/// below every other mark at times up to and including its own; at the
/// earliest time the comparison is closed (the minimal atom there is kept).
pub fn h_record_projection(pm: &PointMeasure) -> PointMeasure {
    let atoms = pm.atoms();
    if atoms.is_empty() {
        return PointMeasure::empty(pm.horizon);
    }
    let t_min = atoms[0].t;
    let mut out = Vec::new();
    let mut i = 0usize;
    let mut prior_min = f64::INFINITY;
    while i < atoms.len() {
        // group of equal-time atoms (already sorted by (t, mark))
        let mut j = i;
        while j < atoms.len() && atoms[j].t == atoms[i].t {
            j += 1;
        }
        let group = &atoms[i..j];
        let group_min = group[0].marks[0];
        if atoms[i].t == t_min {
            // closed convention: atoms achieving the group minimum are kept
            for a in group.iter().filter(|a| a.marks[0] == group_min) {
                out.push(Atom { t: a.t, marks: vec![] });
            }
        } else {
            // one atom survives if it lies strictly below the prior running
            // minimum and strictly below its equal-time companions
            for (k, a) in group.iter().enumerate() {
                let others_min = group
                    .iter()
                    .enumerate()
                    .filter(|&(l, _)| l != k)
                    .map(|(_, b)| b.marks[0])
                    .fold(f64::INFINITY, f64::min);
                if a.marks[0] < prior_min && a.marks[0] < others_min {
                    out.push(Atom { t: a.t, marks: vec![] });
                }
            }
        }
        prior_min = prior_min.min(group_min);
        i = j;
    }
    PointMeasure::new(pm.horizon, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::ObservableSpec;
    use crate::systems::ZetaCoord;
    use num::{BigRational, Zero};

    fn pm(atoms: &[(f64, f64)]) -> PointMeasure {
        PointMeasure::new(
            10.0,
            atoms.iter().map(|&(t, m)| Atom { t, marks: vec![m] }).collect(),
        )
    }

    #[test]
    fn h1_running_infimum() {
        let p = h1_project(&pm(&[(1.0, 2.0), (2.0, 1.0)]));
        assert_eq!(p.breaks, vec![(1.0, 2.0), (2.0, 1.0)]);
        assert_eq!(p.value_at(1.5), 2.0);
        assert_eq!(p.value_at(5.0), 1.0);
        // boundary: constant to the left of the first atom
        assert_eq!(p.value_at(0.5), 2.0);
    }

    #[test]
    fn h1_ignores_stacked_atoms_above() {
        let p = h1_project(&pm(&[(1.0, 2.0), (1.0, 4.0)]));
        assert_eq!(p.breaks, vec![(1.0, 2.0)]);
    }

    #[test]
    fn h2_first_passage() {
        let m = pm(&[(1.0, 2.0), (1.0, 4.0)]);
        let p = h2_project(&m);
        // below the smallest mark: boundary value = time of the minimal atom
        assert_eq!(h2_value(&p, 1.5), 1.0);
        // at level 3 the mark-2 atom qualifies
        assert_eq!(h2_value(&p, 3.0), 1.0);

        let m2 = pm(&[(1.0, 2.0), (2.0, 1.0)]);
        let p2 = h2_project(&m2);
        assert_eq!(h2_value(&p2, 1.5), 2.0); // only mark 1 < 1.5
        assert_eq!(h2_value(&p2, 3.0), 1.0);
        assert_eq!(h2_value(&p2, 0.5), 2.0); // boundary
    }

    #[test]
    fn h2_empty_measure_uses_horizon() {
        let p = h2_project(&PointMeasure::empty(7.0));
        assert_eq!(h2_value(&p, 1.0), 7.0);
    }

    #[test]
    fn records_of_small_series() {
        let r = record_times(&[1.0, 2.0, 3.0]);
        assert_eq!(r.indices, vec![0, 1, 2]);
        let r2 = record_times(&[3.0, 1.0, 2.0]);
        assert_eq!(r2.indices, vec![0]);
    }

    #[test]
    fn iid_record_count_matches_harmonic_numbers() {
        // classical: E #records of m iid uniforms = H_m
        use rand::Rng;
        let mut rng = crate::rng::run_rng(42, 0);
        let m = 200usize;
        let reps = 4000;
        let mut total = 0u64;
        for _ in 0..reps {
            let xs: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..1.0)).collect();
            total += record_times(&xs).indices.len() as u64;
        }
        let mean = total as f64 / reps as f64;
        let h_m: f64 = (1..=m).map(|k| 1.0 / k as f64).sum();
        // Var = H_m - H_m^(2) < H_m
        let se = (h_m / reps as f64).sqrt();
        assert!((mean - h_m).abs() < 3.5 * se, "mean {mean} vs H_m {h_m}");
    }

    #[test]
    fn record_pmf_values() {
        assert!((record_law_pmf(0.1, 1.0, 0).unwrap() - 0.1).abs() < 1e-15);
        // near-degenerate interval: all mass at k = 0
        assert!(record_law_pmf(0.999_999, 1.0, 0).unwrap() > 0.999_99);
        // normalization
        let total: f64 = (0..200).map(|k| record_law_pmf(0.05, 1.0, k).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(record_law_pmf(1.0, 0.5, 0).is_err());
    }

    #[test]
    fn h_discontinuity_examples() {
        // h(δ_{(1-2/n,2)} + δ_{(1,1)}) = δ_{1-2/n} + δ_1 for every n
        for n in [4.0, 100.0, 1e6] {
            let m = pm(&[(1.0 - 2.0 / n, 2.0), (1.0, 1.0)]);
            let h = h_record_projection(&m);
            let ts: Vec<f64> = h.atoms().iter().map(|a| a.t).collect();
            assert_eq!(ts, vec![1.0 - 2.0 / n, 1.0]);
        }
        // h(δ_{(1,2)} + δ_{(1,1)}) = δ_1: the stack collapses to one record
        let m = pm(&[(1.0, 2.0), (1.0, 1.0)]);
        let h = h_record_projection(&m);
        let ts: Vec<f64> = h.atoms().iter().map(|a| a.t).collect();
        assert_eq!(ts, vec![1.0]);
    }

    #[test]
    fn h3_of_h1_equals_h_without_ties() {
        use rand::Rng;
        let mut rng = crate::rng::run_rng(7, 0);
        for _ in 0..200 {
            let k = rng.random_range(1..12usize);
            let atoms: Vec<(f64, f64)> = (0..k)
                .map(|_| (rng.random_range(0.0..10.0), rng.random_range(0.0..5.0)))
                .collect();
            let m = pm(&atoms);
            let via_path = h3_jumps(&h1_project(&m));
            let direct = h_record_projection(&m);
            assert_eq!(via_path.atoms().len(), direct.atoms().len());
            for (a, b) in via_path.atoms().iter().zip(direct.atoms()) {
                assert_eq!(a.t, b.t);
            }
        }
    }

    #[test]
    fn h3_counts_path_jumps() {
        let p = StepPath {
            breaks: vec![(0.3, 5.0), (0.7, 2.0)],
            initial: 5.0,
            horizon: 1.0,
        };
        let jumps = h3_jumps(&p);
        let ts: Vec<f64> = jumps.atoms().iter().map(|a| a.t).collect();
        assert_eq!(ts, vec![0.3, 0.7]);
    }

    #[test]
    fn extremal_path_equals_h1_of_repp2_below_cap() {
        let ts = ThresholdScheme::lebesgue(
            32,
            ObservableSpec::g1(vec![ZetaCoord::Rational(BigRational::zero())]),
            1,
        );
        use rand::Rng;
        let mut rng = crate::rng::run_rng(5, 0);
        let marks: Vec<f64> = (0..64).map(|_| rng.random_range(0.0..12.0)).collect();
        let tau_cap = 1e9; // everything below the cap
        let repp = crate::empirical::build_repp2(&marks, &ts, tau_cap);
        let via_h1 = h1_project(&repp);
        let direct = extremal_path(&marks, &ts);
        assert_eq!(via_h1.breaks.len(), direct.breaks.len());
        for ((t1, v1), (t2, v2)) in via_h1.breaks.iter().zip(&direct.breaks) {
            assert_eq!(t1, t2);
            assert!((v1 - v2).abs() <= 1e-12 * v2.abs().max(1.0));
        }
        // monotone non-increasing values
        for w in direct.breaks.windows(2) {
            assert!(w[1].1 < w[0].1);
        }

        // constant series: constant path
        let flat = extremal_path(&[2.0, 2.0, 2.0], &ts);
        assert_eq!(flat.breaks.len(), 1);
    }

    #[test]
    fn record_pp_places_atoms_at_normalized_times() {
        let ts = ThresholdScheme::lebesgue(
            10,
            ObservableSpec::g1(vec![ZetaCoord::Rational(BigRational::zero())]),
            1,
        );
        let mut marks = vec![0.0; 10];
        marks[0] = 1.0;
        marks[5] = 2.0;
        let rs = record_times(&marks);
        let (r_n, w_n) = record_pp(&rs, &ts);
        let ts_r: Vec<f64> = r_n.atoms().iter().map(|a| a.t).collect();
        assert_eq!(ts_r, vec![0.0, 0.5]);
        assert_eq!(w_n.len(), 2);
    }
}

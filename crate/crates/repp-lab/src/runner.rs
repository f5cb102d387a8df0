//! Ensemble orchestration: parallel orbit scans, limit-law sampling, and the
//! aggregation batteries (extremal index, cluster laws, void grids, records)
//! shared by the command-line tool and the acceptance suite.
//!
//! Every ensemble member draws from ChaCha stream `run_id` under the master
//! seed, so results are independent of thread scheduling and reproducible
//! byte for byte.

use crate::empirical::{
    theta_aq_ratio, void_estimate_from_counts, ClusterSummary, EmpiricalError, Estimate,
    VoidEstimate,
};
use crate::limits::{analytic_void, expected_count, sample, LimitError, LimitLaw, Window};
use crate::observables::{GKind, ObservableSpec, ThresholdScheme};
use crate::point_measure::{Cell, MarkRegion, PointMeasure, RectangleFamily};
use crate::rng::run_rng;
use crate::stats::{compare_void, GofReport};
use crate::systems::{
    scan_circle, scan_torus, CircleScan, CircleTarget, ScanOutcome, SystemError, TorusScan,
    ZetaCoord,
};
use rayon::prelude::*;

// ---------------------------------------------------------------------------
// orbit ensembles
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct CircleEnsemble {
    pub base: u32,
    pub resolution: u32,
    pub targets: Vec<CircleTarget>,
    pub steps: u64,
    pub runs: u64,
    pub seed: u64,
    pub track_min: bool,
    pub track_records: bool,
}

pub fn run_circle_ensemble(cfg: &CircleEnsemble) -> Result<Vec<ScanOutcome>, SystemError> {
    let scan = CircleScan {
        base: cfg.base,
        resolution: cfg.resolution,
        targets: cfg.targets.clone(),
        steps: cfg.steps,
        track_min: cfg.track_min,
        track_records: cfg.track_records,
    };
    (0..cfg.runs)
        .into_par_iter()
        .map(|run| {
            let mut rng = run_rng(cfg.seed, run);
            scan_circle(&scan, &mut rng)
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct TorusEnsemble {
    pub bases: [u32; 2],
    pub resolution: u32,
    pub target: [ZetaCoord; 2],
    pub radius: f64,
    pub steps: u64,
    pub runs: u64,
    pub seed: u64,
    pub track_min: bool,
}

pub fn run_torus_ensemble(cfg: &TorusEnsemble) -> Result<Vec<ScanOutcome>, SystemError> {
    let scan = TorusScan {
        bases: cfg.bases,
        resolution: cfg.resolution,
        target: cfg.target.clone(),
        radius: cfg.radius,
        steps: cfg.steps,
        track_min: cfg.track_min,
    };
    (0..cfg.runs)
        .into_par_iter()
        .map(|run| {
            let mut rng = run_rng(cfg.seed, run);
            scan_torus(&scan, &mut rng)
        })
        .collect()
}

/// Scan targets (ball radii at frequency `tau_scan`, record weights equal
/// to the tent slopes) for an observable.
pub fn circle_scan_targets(ts: &ThresholdScheme, tau_scan: f64) -> Vec<CircleTarget> {
    match ts.obs.kind {
        GKind::TwoSite => ts
            .obs
            .sites()
            .iter()
            .enumerate()
            .map(|(i, (zeta, slope))| CircleTarget {
                zeta: zeta.clone(),
                radius: ts.site_radius_of_tau(i, tau_scan),
                weight: *slope as u64,
            })
            .collect(),
        _ => vec![CircleTarget {
            zeta: ts.obs.zeta[0].clone(),
            radius: ts.site_radius_of_tau(0, tau_scan),
            weight: 1,
        }],
    }
}

/// Mark `u_n^{-1}` of a weighted distance (`weight_t · dist_t`), which is
/// site-independent by construction of the weights.
pub fn mark_of_weighted(ts: &ThresholdScheme, weighted_dist: f64) -> f64 {
    match ts.obs.kind {
        GKind::TwoSite => ts.n as f64 * (11.0 / 50.0) * weighted_dist,
        _ => ts.mark_of_site_dist(0, weighted_dist),
    }
}

/// (orbit index, mark) pairs of one run at level `tau_level`, ascending.
pub fn hits_with_marks(out: &ScanOutcome, ts: &ThresholdScheme, tau_level: f64) -> Vec<(u64, f64)> {
    out.hits
        .iter()
        .filter_map(|h| {
            let mark = ts.mark_of_site_dist(h.target as usize, h.dist);
            (mark <= tau_level).then_some((h.j, mark))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// extremal-index battery
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct ThetaBattery {
    pub theta_aq: Estimate,
    pub theta_cluster: Estimate,
    pub clusters: ClusterSummary,
}

/// Pool the two θ estimators over an ensemble at exceedance level `tau`.
pub fn theta_battery(
    outs: &[ScanOutcome],
    ts: &ThresholdScheme,
    tau: f64,
    q: u64,
) -> ThetaBattery {
    let mut total_hits = 0u64;
    let mut total_enders = 0u64;
    let mut clusters = ClusterSummary::default();
    for out in outs {
        let hits = hits_with_marks(out, ts, tau);
        let aq = theta_aq_ratio(&hits, q);
        if !hits.is_empty() {
            // recover the ender count from the per-run ratio
            total_enders += (aq.value * hits.len() as f64).round() as u64;
            total_hits += hits.len() as u64;
        }
        clusters = clusters.merge(ClusterSummary::from_hits(&hits, q));
    }
    let p_aq = total_enders as f64 / total_hits.max(1) as f64;
    ThetaBattery {
        theta_aq: Estimate {
            value: p_aq,
            std_err: (p_aq * (1.0 - p_aq) / total_hits.max(1) as f64).sqrt(),
        },
        theta_cluster: clusters.theta_cluster_ratio(),
        clusters,
    }
}

/// Inter-cluster start gaps in normalized time, pooled across runs.
pub fn cluster_start_gaps(outs: &[ScanOutcome], ts: &ThresholdScheme, tau: f64, q: u64) -> Vec<f64> {
    let mut gaps = Vec::new();
    for out in outs {
        let hits = hits_with_marks(out, ts, tau);
        let summary = ClusterSummary::from_hits(&hits, q);
        for w in summary.starts.windows(2) {
            gaps.push((w[1] - w[0]) as f64 / ts.n as f64);
        }
    }
    gaps
}

// ---------------------------------------------------------------------------
// void batteries
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, Default)]
pub struct FamilyVoidCounts {
    /// runs with no exceedance-set entry in any cell
    pub plain: u64,
    /// runs with no cluster-core (`A^(q)`) entry in any cell
    pub core: u64,
    pub runs: u64,
}

/// Void counts of one rectangle family over an orbit ensemble, both for the
/// plain sets `A_{n,k}` and their cluster cores `A^(q)_{n,k}`.
pub fn orbit_void_counts(
    outs: &[ScanOutcome],
    ts: &ThresholdScheme,
    fam: &RectangleFamily,
    q: u64,
) -> FamilyVoidCounts {
    let n = ts.n as f64;
    let mut counts = FamilyVoidCounts { runs: outs.len() as u64, ..Default::default() };
    for out in outs {
        let mut plain_void = true;
        let mut core_void = true;
        for cell in &fam.cells {
            let bands = match &cell.region {
                MarkRegion::Bands(b) => b.clone(),
                MarkRegion::All => vec![(f64::NEG_INFINITY, f64::INFINITY)],
                MarkRegion::Boxes(_) => continue,
            };
            // all orbit entries of this cell's mark set, across the full run
            let in_bands: Vec<u64> = out
                .hits
                .iter()
                .filter_map(|h| {
                    let m = ts.mark_of_site_dist(h.target as usize, h.dist);
                    bands
                        .iter()
                        .any(|&(lo, hi)| m > lo && m <= hi)
                        .then_some(h.j)
                })
                .collect();
            for (idx, &j) in in_bands.iter().enumerate() {
                let t = j as f64 / n;
                let in_window = t >= cell.t_lo && t < cell.t_hi;
                if !in_window {
                    continue;
                }
                plain_void = false;
                // core entry: no same-set entry within the next q steps
                let is_core = in_bands.get(idx + 1).map_or(true, |&jn| jn - j > q);
                if is_core {
                    core_void = false;
                }
            }
            if !plain_void && !core_void {
                break;
            }
        }
        counts.plain += plain_void as u64;
        counts.core += core_void as u64;
    }
    counts
}

// ---------------------------------------------------------------------------
// extremal process and records
// ---------------------------------------------------------------------------

/// `Z_n(horizon)` per run: the normalized mark of the running minimum.
pub fn zn_final_values(outs: &[ScanOutcome], ts: &ThresholdScheme) -> Vec<f64> {
    outs.iter()
        .filter_map(|o| o.min_weighted.map(|(_, w)| mark_of_weighted(ts, w)))
        .collect()
}

/// Record counts per run on the open time window `(a, b)` (in normalized
/// time), from the scan's record events.
pub fn record_time_counts(outs: &[ScanOutcome], n: u64, a: f64, b: f64) -> Vec<u64> {
    outs.iter()
        .map(|o| {
            o.records
                .iter()
                .filter(|r| {
                    let t = r.j as f64 / n as f64;
                    t > a && t < b
                })
                .count() as u64
        })
        .collect()
}

/// Record-value counts per run on `(a, b)` in mark units.
pub fn record_value_counts(
    outs: &[ScanOutcome],
    ts: &ThresholdScheme,
    a: f64,
    b: f64,
) -> Vec<u64> {
    outs.iter()
        .map(|o| {
            o.records
                .iter()
                .filter(|r| {
                    let m = mark_of_weighted(ts, r.weighted_dist);
                    m > a && m < b
                })
                .count() as u64
        })
        .collect()
}

// ---------------------------------------------------------------------------
// limit-law ensembles and grids
// ---------------------------------------------------------------------------

pub fn limit_ensemble(
    law: &LimitLaw,
    window: &Window,
    runs: u64,
    seed: u64,
) -> Result<Vec<PointMeasure>, LimitError> {
    (0..runs)
        .into_par_iter()
        .map(|run| {
            let mut rng = run_rng(seed, run);
            sample(law, window, &mut rng)
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct VoidGridCheck {
    pub family: usize,
    pub estimate: VoidEstimate,
    pub analytic: f64,
    pub gof: GofReport,
}

/// Empirical void frequency of each family versus the analytic product
/// formula, z-tested at the (possibly Bonferroni-corrected) level.
pub fn law_void_grid(
    samples: &[PointMeasure],
    law: &LimitLaw,
    fams: &[RectangleFamily],
    level: f64,
) -> Result<Vec<VoidGridCheck>, LimitError> {
    fams.iter()
        .enumerate()
        .map(|(i, fam)| {
            let voids = samples.iter().filter(|pm| pm.is_void_on(fam)).count() as u64;
            let est = void_estimate_from_counts(voids, samples.len() as u64);
            let analytic = analytic_void(law, fam)?;
            let gof = compare_void(voids, samples.len() as u64, analytic, level)
                .expect("non-empty ensemble");
            Ok(VoidGridCheck { family: i, estimate: est, analytic, gof })
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct IntensityCheck {
    pub family: usize,
    pub cell: usize,
    pub mean: f64,
    pub expected: f64,
    pub std_err: f64,
    pub passed: bool,
}

/// Empirical mean counts per cell versus the Lebesgue intensity, within
/// `sigma_factor` Monte-Carlo standard errors. Counts of the 1-d compound
/// law are multiplicity-weighted (each atom carries its cluster size).
pub fn law_intensity_grid(
    samples: &[PointMeasure],
    law: &LimitLaw,
    fams: &[RectangleFamily],
    sigma_factor: f64,
) -> Result<Vec<IntensityCheck>, LimitError> {
    let multiplicity_weighted = matches!(law, LimitLaw::CompoundPoisson1D { .. });
    let m = samples.len() as f64;
    let mut out = Vec::new();
    for (fi, fam) in fams.iter().enumerate() {
        // per-cell counts across the ensemble
        let mut sums = vec![0.0f64; fam.cells.len()];
        let mut sumsq = vec![0.0f64; fam.cells.len()];
        for pm in samples {
            for (ci, cell) in fam.cells.iter().enumerate() {
                let c: f64 = pm
                    .atoms()
                    .iter()
                    .filter(|a| cell.contains(a))
                    .map(|a| if multiplicity_weighted { a.marks[0] } else { 1.0 })
                    .sum();
                sums[ci] += c;
                sumsq[ci] += c * c;
            }
        }
        for (ci, cell) in fam.cells.iter().enumerate() {
            let mean = sums[ci] / m;
            let var = (sumsq[ci] / m - mean * mean).max(0.0);
            let se = (var / m).sqrt();
            let expected = expected_count(law, cell)?;
            let passed = (mean - expected).abs() <= sigma_factor * se.max(1e-12);
            out.push(IntensityCheck { family: fi, cell: ci, mean, expected, std_err: se, passed });
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// standard grids
// ---------------------------------------------------------------------------

/// Twenty deterministic rectangle families (mixtures of mark bands and time
/// intervals) inside `[0, 1) x (0, tau_cap]`.
pub fn standard_band_families(tau_cap: f64) -> Vec<RectangleFamily> {
    let s = tau_cap / 4.0; // designed at cap 4, scaled otherwise
    let js: [(f64, f64); 5] = [(0.0, 1.0), (0.0, 0.5), (0.25, 0.75), (0.1, 0.9), (0.5, 1.0)];
    let bands: [&[(f64, f64)]; 8] = [
        &[(0.0, 1.0)],
        &[(0.0, 2.0)],
        &[(0.5, 1.5)],
        &[(1.0, 3.0)],
        &[(0.25, 0.75), (1.5, 2.5)],
        &[(0.0, 0.5)],
        &[(2.0, 4.0)],
        &[(0.1, 0.6), (1.0, 2.0)],
    ];
    let mut fams = Vec::with_capacity(20);
    for i in 0..14usize {
        let (t_lo, t_hi) = js[i % 5];
        let a: Vec<(f64, f64)> = bands[i % 8].iter().map(|&(lo, hi)| (lo * s, hi * s)).collect();
        fams.push(RectangleFamily {
            cells: vec![Cell { t_lo, t_hi, region: MarkRegion::Bands(a) }],
        });
    }
    // two-cell families with ordered disjoint time intervals
    for k in 0..6usize {
        let a1: Vec<(f64, f64)> = bands[k].iter().map(|&(lo, hi)| (lo * s, hi * s)).collect();
        let a2: Vec<(f64, f64)> = bands[(k + 3) % 8]
            .iter()
            .map(|&(lo, hi)| (lo * s, hi * s))
            .collect();
        fams.push(RectangleFamily {
            cells: vec![
                Cell { t_lo: 0.0, t_hi: 0.4, region: MarkRegion::Bands(a1) },
                Cell { t_lo: 0.5, t_hi: 0.9, region: MarkRegion::Bands(a2) },
            ],
        });
    }
    fams
}

/// Deterministic box families in the tangent window of radius 2 (for the
/// position-resolved laws).
pub fn standard_box_families() -> Vec<RectangleFamily> {
    let js: [(f64, f64); 4] = [(0.0, 1.0), (0.0, 0.5), (0.25, 0.75), (0.5, 1.0)];
    let boxes: [(Vec<f64>, Vec<f64>); 5] = [
        (vec![0.0, 0.0], vec![0.5, 0.5]),
        (vec![-0.5, -0.5], vec![0.5, 0.5]),
        (vec![0.25, -0.75], vec![1.25, 0.25]),
        (vec![-1.2, 0.1], vec![-0.2, 1.1]),
        (vec![0.1, 0.2], vec![0.9, 1.4]),
    ];
    let mut fams = Vec::new();
    for i in 0..20usize {
        let (t_lo, t_hi) = js[i % 4];
        let (lo, hi) = boxes[i % 5].clone();
        fams.push(RectangleFamily {
            cells: vec![Cell { t_lo, t_hi, region: MarkRegion::Boxes(vec![(lo, hi)]) }],
        });
    }
    fams
}

/// Time-only families for the one-dimensional compound law.
pub fn standard_time_families(horizon: f64) -> Vec<RectangleFamily> {
    let mut fams = Vec::new();
    for i in 0..20usize {
        let w = horizon * (0.1 + 0.04 * (i % 10) as f64);
        let lo = horizon * 0.05 * (i % 7) as f64;
        let hi = (lo + w).min(horizon);
        fams.push(RectangleFamily {
            cells: vec![Cell { t_lo: lo, t_hi: hi, region: MarkRegion::All }],
        });
    }
    fams
}

// ---------------------------------------------------------------------------
// observable-driven ensemble front end
// ---------------------------------------------------------------------------

/// Resolution, steps and targets for a circle-system run at scale `n`.
pub fn plan_circle_ensemble(
    system_base: u32,
    ts: &ThresholdScheme,
    horizon: f64,
    tau_scan: f64,
    runs: u64,
    seed: u64,
) -> CircleEnsemble {
    // resolve three decades below the finest scale in play
    let tau_min_resolved = 1e-3;
    let resolution = crate::systems::resolution_for(system_base, ts.n, horizon, tau_min_resolved);
    CircleEnsemble {
        base: system_base,
        resolution,
        targets: circle_scan_targets(ts, tau_scan),
        steps: (ts.n as f64 * horizon).round() as u64,
        runs,
        seed,
        track_min: false,
        track_records: false,
    }
}

/// Convenience wrapper tying together scan, θ battery and cluster summary
/// for a (system, observable) pair; the work-horse behind `simulate`.
pub struct SimulationOutcome {
    pub outs: Vec<ScanOutcome>,
    pub theta: ThetaBattery,
    pub q: u32,
}

pub fn simulate_circle(
    system_base: u32,
    obs: &ObservableSpec,
    n: u64,
    horizon: f64,
    tau_scan: f64,
    runs: u64,
    seed: u64,
    track_min: bool,
    track_records: bool,
) -> Result<SimulationOutcome, EmpiricalError> {
    let ts = ThresholdScheme::lebesgue(n, obs.clone(), 1);
    let sel = crate::empirical::choose_q(
        &crate::systems::SystemSpec::digit_shift(&[system_base])?,
        obs,
        0.0,
        tau_scan,
        400,
    )?;
    let mut plan = plan_circle_ensemble(system_base, &ts, horizon, tau_scan, runs, seed);
    plan.track_min = track_min;
    plan.track_records = track_records;
    let outs = run_circle_ensemble(&plan)?;
    let theta = theta_battery(&outs, &ts, tau_scan, sel.q as u64);
    Ok(SimulationOutcome { outs, theta, q: sel.q })
}

//! The acceptance battery: fifteen pinned desk-scale checks, each runnable
//! on its own (`compare --suite c07`) or all together (`--suite acceptance`).
//!
//! Every check fixes its seed, scale and tolerance here; nothing is
//! calibrated at run time. The integration test target asserts each
//! criterion individually.

use crate::cli;
use crate::empirical::{aq_set, choose_q, dprime_diagnostic};
use crate::extremal::{h_record_projection, record_law_pmf};
use crate::interval::{rat, ratio, IntervalUnion, Rat};
use crate::limits::{analytic_void, LimitLaw, Window};
use crate::nu::{empirical_nu, nu_eval, nu_monte_carlo, LinearMap, NuSet, OuterMeasureSpec};
use crate::observables::{ObservableSpec, ThresholdScheme};
use crate::point_measure::{Atom, PointMeasure};
use crate::rng::run_rng;
use crate::runner::{
    self, law_intensity_grid, law_void_grid, limit_ensemble, orbit_void_counts,
    record_time_counts, standard_band_families, standard_box_families, standard_time_families,
    theta_battery, zn_final_values,
};
use crate::stats::{chi_square_pmf, compare_void, geometric_fit, DEFAULT_LEVEL};
use crate::systems::{SystemSpec, ZetaCoord};
use num::{ToPrimitive, Zero};
use rand::RngCore;
use std::time::Instant;

#[derive(Clone, Debug)]
pub struct CriterionOutcome {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionOutcome {
    pub fn summary_line(&self) -> String {
        format!(
            "[{}] c{:02} {} ({:.1}s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.detail
        )
    }
}

pub const CRITERIA: [(u32, &str); 15] = [
    (1, "extremal index, doubling map at the fixed point"),
    (2, "extremal index, 3x mod 1 at the fixed point"),
    (3, "extremal index, product torus map at the origin"),
    (4, "geometric cluster sizes, doubling map"),
    (5, "void-probability grid, doubling map"),
    (6, "within-cluster stack ratio, doubling map"),
    (7, "sampler self-consistency for every limit law"),
    (8, "outer measure: exact vs Monte-Carlo vs empirical"),
    (9, "extremal-process one-point distribution"),
    (10, "record counts at a non-periodic point"),
    (11, "two-site battery (clustered records)"),
    (12, "short-return diagnostic ladder"),
    (13, "ball/annulus void proximity bound"),
    (14, "record-projection discontinuity examples"),
    (15, "byte-exact reproducibility of artifacts"),
];

pub fn run_suite(name: &str) -> Result<Vec<CriterionOutcome>, String> {
    if name == "acceptance" {
        return Ok((1..=15).map(run_criterion).collect());
    }
    if let Some(num) = name.strip_prefix('c') {
        let id: u32 = num.parse().map_err(|_| format!("unknown suite `{name}`"))?;
        if (1..=15).contains(&id) {
            return Ok(vec![run_criterion(id)]);
        }
    }
    Err(format!("unknown suite `{name}`; use `acceptance` or c01..c15"))
}

pub fn run_criterion(id: u32) -> CriterionOutcome {
    let start = Instant::now();
    let (passed, detail) = match id {
        1 => c01_theta_doubling(),
        2 => c02_theta_tripling(),
        3 => c03_theta_torus(),
        4 => c04_geometric_clusters(),
        5 => c05_void_grid(),
        6 => c06_stack_ratio(),
        7 => c07_sampler_self_consistency(),
        8 => c08_outer_measure(),
        9 => c09_extremal_fdd(),
        10 => c10_records_non_periodic(),
        11 => c11_two_site_battery(),
        12 => c12_dprime_ladder(),
        13 => c13_proximity_bound(),
        14 => c14_h_discontinuity(),
        15 => c15_reproducibility(),
        _ => (false, "unknown criterion".to_string()),
    };
    let name = CRITERIA
        .iter()
        .find(|(i, _)| *i == id)
        .map(|(_, n)| n.to_string())
        .unwrap_or_default();
    CriterionOutcome { id, name, passed, detail, seconds: start.elapsed().as_secs_f64() }
}

fn zeta_zero() -> Vec<ZetaCoord> {
    vec![ZetaCoord::Rational(Rat::zero())]
}

fn theta_window(battery: &runner::ThetaBattery, lo: f64, hi: f64) -> (bool, String) {
    let a = battery.theta_aq.value;
    let c = battery.theta_cluster.value;
    let pass = (lo..=hi).contains(&a) && (lo..=hi).contains(&c);
    (
        pass,
        format!(
            "θ̂_core = {a:.4} ± {:.4}, θ̂_cluster = {c:.4} ± {:.4}, window [{lo}, {hi}], {} exceedances",
            battery.theta_aq.std_err, battery.theta_cluster.std_err,
            battery.clusters.total_exceedances
        ),
    )
}

// criterion 1: doubling map, ζ = 0, n = 1e6, M = 2000 runs, θ ∈ [0.48, 0.52],
// both estimators, under 60 seconds
fn c01_theta_doubling() -> (bool, String) {
    let t0 = Instant::now();
    let obs = ObservableSpec::g1(zeta_zero());
    let sim = match runner::simulate_circle(2, &obs, 1_000_000, 1.0, 12.0, 2000, 0xA11CE, false, false)
    {
        Ok(s) => s,
        Err(e) => return (false, e.to_string()),
    };
    let elapsed = t0.elapsed().as_secs_f64();
    if sim.q != 1 {
        return (false, format!("selected q = {} (expected 1)", sim.q));
    }
    let (mut pass, mut detail) = theta_window(&sim.theta, 0.48, 0.52);
    detail.push_str(&format!("; runtime {elapsed:.1}s"));
    if elapsed >= 60.0 {
        pass = false;
        detail.push_str(" (over the 60 s budget)");
    }
    (pass, detail)
}

// criterion 2: 3x mod 1, θ ∈ [0.647, 0.687] (reference 2/3), same budget
fn c02_theta_tripling() -> (bool, String) {
    let obs = ObservableSpec::g1(zeta_zero());
    let sim = match runner::simulate_circle(3, &obs, 1_000_000, 1.0, 12.0, 2000, 0xB0B0, false, false) {
        Ok(s) => s,
        Err(e) => return (false, e.to_string()),
    };
    if sim.q != 1 {
        return (false, format!("selected q = {} (expected 1)", sim.q));
    }
    theta_window(&sim.theta, 0.647, 0.687)
}

// criterion 3: torus map (2x, 3y), ζ = (0,0), θ ∈ [0.81, 0.86] (ref 5/6)
fn c03_theta_torus() -> (bool, String) {
    let n = 1_000_000u64;
    let tau = 10.0;
    let radius = (tau / (std::f64::consts::PI * n as f64)).sqrt();
    let ens = runner::TorusEnsemble {
        bases: [2, 3],
        resolution: 30,
        target: [ZetaCoord::Rational(Rat::zero()), ZetaCoord::Rational(Rat::zero())],
        radius,
        steps: n,
        runs: 2000,
        seed: 0xC3C3,
        track_min: false,
    };
    let outs = match runner::run_torus_ensemble(&ens) {
        Ok(o) => o,
        Err(e) => return (false, e.to_string()),
    };
    // period of the origin is 1, so the cluster separation is q = 1
    let sel = choose_q(
        &SystemSpec::torus_2x3(),
        &ObservableSpec::g1(vec![
            ZetaCoord::Rational(Rat::zero()),
            ZetaCoord::Rational(Rat::zero()),
        ]),
        0.0,
        tau,
        400,
    );
    let q = match sel {
        Ok(s) => s.q as u64,
        Err(e) => return (false, e.to_string()),
    };
    let mut total_hits = 0u64;
    let mut enders = 0u64;
    let mut clusters = crate::empirical::ClusterSummary::default();
    for o in &outs {
        let hits: Vec<(u64, f64)> = o.hits.iter().map(|h| (h.j, h.dist)).collect();
        let aq = crate::empirical::theta_aq_ratio(&hits, q);
        if !hits.is_empty() {
            enders += (aq.value * hits.len() as f64).round() as u64;
            total_hits += hits.len() as u64;
        }
        clusters = clusters.merge(crate::empirical::ClusterSummary::from_hits(&hits, q));
    }
    let theta_aq = enders as f64 / total_hits.max(1) as f64;
    let theta_cl = clusters.theta_cluster_ratio().value;
    let pass = (0.81..=0.86).contains(&theta_aq) && (0.81..=0.86).contains(&theta_cl);
    (
        pass,
        format!("θ̂_core = {theta_aq:.4}, θ̂_cluster = {theta_cl:.4} (q = {q}, {total_hits} hits, ref 5/6)"),
    )
}

// criterion 4: doubling cluster sizes vs Geometric(1/2), χ² p > 0.01,
// at least 1e4 clusters
fn c04_geometric_clusters() -> (bool, String) {
    let obs = ObservableSpec::g1(zeta_zero());
    let sim = match runner::simulate_circle(2, &obs, 1_000_000, 1.0, 12.0, 2000, 0xD4D4, false, false)
    {
        Ok(s) => s,
        Err(e) => return (false, e.to_string()),
    };
    let clusters = &sim.theta.clusters;
    if clusters.num_clusters() < 10_000 {
        return (false, format!("only {} clusters", clusters.num_clusters()));
    }
    match geometric_fit(&clusters.sizes, 0.5, DEFAULT_LEVEL) {
        Ok(gof) => (
            gof.passed(),
            format!(
                "χ² = {:.2}, p = {:.4} over {} clusters",
                gof.statistic,
                gof.p_value,
                clusters.num_clusters()
            ),
        ),
        Err(e) => (false, e.to_string()),
    }
}

// criterion 5: 20-family void grid, doubling, n = 1e6, M = 5000, ν from the
// geometric contraction with λ = 1/2; at least 95% of families pass at the
// Bonferroni-corrected level
fn c05_void_grid() -> (bool, String) {
    let obs = ObservableSpec::g1(zeta_zero());
    let n = 1_000_000u64;
    let ts = ThresholdScheme::lebesgue(n, obs.clone(), 1);
    let plan = runner::plan_circle_ensemble(2, &ts, 1.0, 4.0, 5000, 0xE5E5);
    let outs = match runner::run_circle_ensemble(&plan) {
        Ok(o) => o,
        Err(e) => return (false, e.to_string()),
    };
    let law = LimitLaw::stacked_geometric(2.0, 1); // ν = contraction(1/2)
    let fams = standard_band_families(4.0);
    let level = DEFAULT_LEVEL / fams.len() as f64;
    let mut pass_count = 0usize;
    let mut worst = 1.0f64;
    for fam in &fams {
        let counts = orbit_void_counts(&outs, &ts, fam, 1);
        let analytic = match analytic_void(&law, fam) {
            Ok(v) => v,
            Err(e) => return (false, e.to_string()),
        };
        match compare_void(counts.plain, counts.runs, analytic, level) {
            Ok(gof) => {
                worst = worst.min(gof.p_value);
                pass_count += gof.passed() as usize;
            }
            Err(e) => return (false, e.to_string()),
        }
    }
    (
        pass_count * 100 >= fams.len() * 95,
        format!("{pass_count}/{} families pass (worst p = {worst:.5})", fams.len()),
    )
}

// criterion 6: consecutive within-cluster 2-d marks have ratio 2 with
// relative error < 1e-3 for cluster points at distance < 2^-20
fn c06_stack_ratio() -> (bool, String) {
    let obs = ObservableSpec::g1(zeta_zero());
    let n = 1_000_000u64;
    let ts = ThresholdScheme::lebesgue(n, obs.clone(), 1);
    let plan = runner::plan_circle_ensemble(2, &ts, 1.0, 12.0, 1000, 0xF6F6);
    let outs = match runner::run_circle_ensemble(&plan) {
        Ok(o) => o,
        Err(e) => return (false, e.to_string()),
    };
    let cut = 2f64.powi(-20);
    let mut pairs = 0u64;
    let mut worst_rel = 0.0f64;
    for o in &outs {
        for w in o.hits.windows(2) {
            if w[1].j == w[0].j + 1 && w[0].dist < cut && w[1].dist < cut {
                let m0 = ts.mark_of_site_dist(0, w[0].dist);
                let m1 = ts.mark_of_site_dist(0, w[1].dist);
                let rel = (m1 / m0 - 2.0).abs() / 2.0;
                worst_rel = worst_rel.max(rel);
                pairs += 1;
            }
        }
    }
    if pairs < 100 {
        return (false, format!("only {pairs} qualifying pairs"));
    }
    (
        worst_rel < 1e-3,
        format!("{pairs} pairs, worst relative error {worst_rel:.2e}"),
    )
}

// criterion 7: every limit law's sampler matches its analytic void
// probabilities and Lebesgue intensity on the standard grids, 1e5 samples,
// within 3σ
fn c07_sampler_self_consistency() -> (bool, String) {
    let runs = 100_000u64;
    let band_window = Window { horizon: 1.0, mark_cap: 4.0 };
    let space_window = Window { horizon: 1.0, mark_cap: 2.0 };
    let laws: Vec<(LimitLaw, Window, Vec<crate::point_measure::RectangleFamily>)> = vec![
        (LimitLaw::Poisson2D, band_window, standard_band_families(4.0)),
        (
            LimitLaw::CompoundPoisson1D { theta: 0.5, tau: 1.0 },
            Window { horizon: 1.0, mark_cap: 1.0 },
            standard_time_families(1.0),
        ),
        (LimitLaw::stacked_geometric(2.0, 1), band_window, standard_band_families(4.0)),
        (LimitLaw::stacked_geometric(1.5, 1), band_window, standard_band_families(4.0)),
        (LimitLaw::PoissonMultiD { d: 2 }, space_window, standard_box_families()),
        (
            LimitLaw::stacked_linear([[2.0, 0.0], [0.0, 3.0]]),
            space_window,
            standard_box_families(),
        ),
        (LimitLaw::n_dag([[2.0, 0.0], [0.0, 3.0]]), band_window, standard_band_families(4.0)),
        (LimitLaw::HatN { beta_plus: 3.0 }, band_window, standard_band_families(4.0)),
        (LimitLaw::DoubleHatN, band_window, standard_band_families(4.0)),
    ];
    let mut details = Vec::new();
    let mut all = true;
    for (i, (law, window, fams)) in laws.iter().enumerate() {
        let seed = if i == 0 { 0x710 } else { 0x700 + i as u64 };
        let samples = match limit_ensemble(law, window, runs, seed) {
            Ok(s) => s,
            Err(e) => return (false, format!("{law:?}: {e}")),
        };
        // criterion (A): void frequencies within 3σ (two-sided z at 0.0027)
        let grid = match law_void_grid(&samples, law, fams, 0.0027) {
            Ok(g) => g,
            Err(e) => return (false, format!("{law:?}: {e}")),
        };
        let void_fails = grid.iter().filter(|g| g.gof.reject).count();
        // criterion (B): mean counts within 3σ
        let intensity = match law_intensity_grid(&samples, law, fams, 3.0) {
            Ok(g) => g,
            Err(e) => return (false, format!("{law:?}: {e}")),
        };
        let mean_fails = intensity.iter().filter(|c| !c.passed).count();
        let ok = void_fails == 0 && mean_fails == 0;
        all &= ok;
        if !ok {
            details.push(format!("law {i} ({law:?}): {void_fails} void / {mean_fails} mean cells out"));
        }
    }
    if details.is_empty() {
        details.push(format!("9 laws x {} families x {runs} samples all within 3σ", 20));
    }
    (all, details.join("; "))
}

// criterion 8: nu_eval vs nu_monte_carlo on 100 random unions per variant
// (3σ), and the exact empirical ν at n = 2^20 within 1e-6 relative error
fn c08_outer_measure() -> (bool, String) {
    let specs: Vec<(&str, OuterMeasureSpec)> = vec![
        ("lebesgue", OuterMeasureSpec::Lebesgue),
        ("contraction", OuterMeasureSpec::contraction(ratio(1, 2)).unwrap()),
        (
            "linear",
            OuterMeasureSpec::linear(LinearMap::Diagonal(vec![ratio(2, 3)])).unwrap(),
        ),
        (
            "mixture",
            OuterMeasureSpec::mixture(ratio(10, 11), ratio(1, 11), ratio(10, 3)).unwrap(),
        ),
    ];
    let mut rng = run_rng(0x800, 0);
    let mut worst_z = 0.0f64;
    for (name, spec) in &specs {
        for trial in 0..100u64 {
            let mut pairs = Vec::new();
            let k = 1 + (rng.next_u64() % 3) as usize;
            for _ in 0..k {
                let a = crate::rng::u01(&mut rng) * 3.0;
                let w = 0.05 + crate::rng::u01(&mut rng) * 0.8;
                pairs.push((a, a + w));
            }
            let a = IntervalUnion::from_f64_pairs(&pairs);
            let exact = match nu_eval(spec, &NuSet::Interval(&a)) {
                Ok(v) => v.to_f64(),
                Err(e) => return (false, format!("{name}: {e}")),
            };
            let mc = match nu_monte_carlo(spec, &NuSet::Interval(&a), 10_000, 0x800 * 7919 + trial) {
                Ok(m) => m,
                Err(e) => return (false, format!("{name}: {e}")),
            };
            let z = (exact - mc.value).abs() / mc.effective_std_err();
            worst_z = worst_z.max(z);
            if z > 3.0 {
                return (false, format!("{name} union {trial}: |z| = {z:.2} > 3"));
            }
        }
    }

    // exact empirical ν on the doubling fixed-point family at n = 2^20,
    // with the memory depth q selected per band family
    let system = SystemSpec::doubling();
    let obs = ObservableSpec::g1(zeta_zero());
    let n = 1u64 << 20;
    let ts = ThresholdScheme::lebesgue(n, obs.clone(), 1);
    let contraction = OuterMeasureSpec::contraction(ratio(1, 2)).unwrap();
    for a in [
        IntervalUnion::interval(Rat::zero(), rat(1.0)),
        IntervalUnion::from_f64_pairs(&[(0.5, 1.0)]),
        IntervalUnion::from_f64_pairs(&[(0.25, 0.5), (2.0, 3.0)]),
    ] {
        let tau_min = a.inf().unwrap().to_f64().unwrap();
        let tau_max = a.sup().unwrap().to_f64().unwrap();
        let q = match choose_q(&system, &obs, tau_min, tau_max, 400) {
            Ok(sel) => sel.q,
            Err(e) => return (false, e.to_string()),
        };
        let emp = match empirical_nu(&system, &ts, &a, q) {
            Ok(v) => v.to_f64().unwrap(),
            Err(e) => return (false, e.to_string()),
        };
        let reference = nu_eval(&contraction, &NuSet::Interval(&a)).unwrap().to_f64();
        let rel = (emp - reference).abs() / reference;
        if rel >= 1e-6 {
            return (false, format!("empirical ν (q = {q}) rel err {rel:.2e} on {a:?}"));
        }
    }
    (true, format!("400 random unions within 3σ (worst |z| = {worst_z:.2}); empirical ν exact"))
}

// criterion 9: sup over a 50-point grid of |P(Z_n(1) >= y) - e^{-y/2}|
// below 0.01 at n = 1e6, M = 1e4
fn c09_extremal_fdd() -> (bool, String) {
    let obs = ObservableSpec::g1(zeta_zero());
    let n = 1_000_000u64;
    let ts = ThresholdScheme::lebesgue(n, obs.clone(), 1);
    let mut plan = runner::plan_circle_ensemble(2, &ts, 1.0, 0.0, 10_000, 0x99BB);
    plan.track_min = true;
    for t in &mut plan.targets {
        t.radius = 0.0; // only the running minimum is needed
    }
    let outs = match runner::run_circle_ensemble(&plan) {
        Ok(o) => o,
        Err(e) => return (false, e.to_string()),
    };
    let zs = zn_final_values(&outs, &ts);
    let m = zs.len() as f64;
    let mut sup = 0.0f64;
    let mut sup_y = 0.0;
    for i in 1..=50 {
        let y = 0.12 * i as f64;
        let p_hat = zs.iter().filter(|&&z| z >= y).count() as f64 / m;
        let d = (p_hat - (-y / 2.0).exp()).abs();
        if d > sup {
            sup = d;
            sup_y = y;
        }
    }
    (
        sup < 0.01,
        format!("sup |P̂ - e^(-y/2)| = {sup:.5} at y = {sup_y:.2} over 50 grid points, M = {}", zs.len()),
    )
}

/// Deterministic non-periodic target: an odd 40-bit dyadic (only 0 is
/// periodic among dyadics under the doubling map).
fn non_periodic_zeta() -> ZetaCoord {
    let numerator = (run_rng(0xC0FFEE, 0).next_u64() >> 24) | 1;
    ZetaCoord::Rational(Rat::new(numerator.into(), num::BigInt::from(1u64 << 40)))
}

// criterion 10: record counts on (0.05, 1) at a non-periodic point:
// mean within log(20) ± 0.1 and χ² against the limiting record pmf
fn c10_records_non_periodic() -> (bool, String) {
    let zeta = non_periodic_zeta();
    let n = 1_000_000u64;
    let ts = ThresholdScheme::lebesgue(n, ObservableSpec::g1(vec![zeta.clone()]), 1);
    let plan = runner::CircleEnsemble {
        base: 2,
        resolution: 61,
        targets: vec![crate::systems::CircleTarget { zeta, radius: 0.0, weight: 1 }],
        steps: n,
        runs: 10_000,
        seed: 0xAABB,
        track_min: false,
        track_records: true,
    };
    let outs = match runner::run_circle_ensemble(&plan) {
        Ok(o) => o,
        Err(e) => return (false, e.to_string()),
    };
    let (a, b) = (0.05, 1.0);
    let counts = record_time_counts(&outs, ts.n, a, b);
    let m = counts.len() as f64;
    let mean = counts.iter().sum::<u64>() as f64 / m;
    let target = (b / a as f64).ln();
    if (mean - target).abs() > 0.1 {
        return (false, format!("mean {mean:.4} vs log(20) = {target:.4}"));
    }
    let mut hist = vec![0u64; 1 + counts.iter().copied().max().unwrap_or(0) as usize];
    for &c in &counts {
        hist[c as usize] += 1;
    }
    match chi_square_pmf(
        &hist,
        0,
        |k| record_law_pmf(a, b, k).unwrap_or(0.0),
        DEFAULT_LEVEL,
        "record_counts",
        "limiting record pmf",
    ) {
        Ok(gof) => (
            gof.passed(),
            format!("mean {mean:.4} (log 20 = {target:.4}), χ² p = {:.4}", gof.p_value),
        ),
        Err(e) => (false, e.to_string()),
    }
}

// criterion 11: the two-site example: θ ∈ [0.89, 0.93], size-2 cluster
// fraction in [0.08, 0.12], void grid against the two-term mixture, and
// record counts exceeding the log-Poisson mean at 3σ
fn c11_two_site_battery() -> (bool, String) {
    let obs = ObservableSpec::two_site();
    let n = 1_000_000u64;
    let ts = ThresholdScheme {
        n,
        obs: obs.clone(),
        model: crate::observables::MeasureModel::AnalyticDensity { density: 1.0, dim: 1 },
    };
    let mut plan = runner::plan_circle_ensemble(3, &ts, 1.0, 12.0, 5000, 0xBB11);
    plan.track_records = true;
    let outs = match runner::run_circle_ensemble(&plan) {
        Ok(o) => o,
        Err(e) => return (false, e.to_string()),
    };

    // θ estimators at q = 1
    let battery = theta_battery(&outs, &ts, 12.0, 1);
    let t_aq = battery.theta_aq.value;
    let t_cl = battery.theta_cluster.value;
    if !(0.89..=0.93).contains(&t_aq) || !(0.89..=0.93).contains(&t_cl) {
        return (false, format!("θ̂ = ({t_aq:.4}, {t_cl:.4}) outside [0.89, 0.93]"));
    }

    // cluster size-2 fraction near 1/10
    let size2 = battery.clusters.sizes.iter().filter(|&&s| s == 2).count() as f64;
    let frac2 = size2 / battery.clusters.num_clusters() as f64;
    if !(0.08..=0.12).contains(&frac2) {
        return (false, format!("size-2 fraction {frac2:.4} outside [0.08, 0.12]"));
    }

    // void grid against ν(A) = (10/11)|A| + (1/11)|A \ (10/3)A|
    let fams = standard_band_families(4.0);
    let level = DEFAULT_LEVEL / fams.len() as f64;
    let mut pass_count = 0usize;
    for fam in &fams {
        let counts = orbit_void_counts(&outs, &ts, fam, 1);
        let analytic = match analytic_void(&LimitLaw::DoubleHatN, fam) {
            Ok(v) => v,
            Err(e) => return (false, e.to_string()),
        };
        match compare_void(counts.plain, counts.runs, analytic, level) {
            Ok(gof) => pass_count += gof.passed() as usize,
            Err(e) => return (false, e.to_string()),
        }
    }
    if pass_count * 100 < fams.len() * 95 {
        return (false, format!("void grid: only {pass_count}/{} families pass", fams.len()));
    }

    // record counts exceed the log-Poisson mean with 3σ significance
    let (a, b) = (0.05, 1.0);
    let counts = record_time_counts(&outs, n, a, b);
    let m = counts.len() as f64;
    let mean = counts.iter().sum::<u64>() as f64 / m;
    let var = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - mean;
            d * d
        })
        .sum::<f64>()
        / m;
    let se = (var / m).sqrt();
    let log_mean = (b / a as f64).ln();
    let excess_z = (mean - log_mean) / se;
    if excess_z <= 3.0 {
        return (false, format!("record mean {mean:.4} vs {log_mean:.4}: z = {excess_z:.2}"));
    }
    (
        true,
        format!(
            "θ̂ = ({t_aq:.4}, {t_cl:.4}), size-2 = {frac2:.4}, voids {pass_count}/20, record excess ratio {:.4} (z = {excess_z:.1})",
            mean / log_mean
        ),
    )
}

// criterion 12: the diagnostic sum decreases along n = 2^10..2^16 with
// q = 1 and stays bounded away from zero with q = 0
fn c12_dprime_ladder() -> (bool, String) {
    let sys = SystemSpec::doubling();
    let mut right = Vec::new();
    let mut wrong = Vec::new();
    for log_n in (10..=16).step_by(2) {
        let n = 1u64 << log_n;
        let k_n = n >> 5;
        let eps = Rat::new(1.into(), num::BigInt::from(2u64 * n)); // τ = 1
        let ball = IntervalUnion::circle_ball(&Rat::zero(), &eps);
        let aq = match aq_set(&sys, &ball, 1) {
            Ok(a) => a,
            Err(e) => return (false, e.to_string()),
        };
        match dprime_diagnostic(&sys, &aq, n, k_n) {
            Ok(v) => right.push(v.to_f64().unwrap()),
            Err(e) => return (false, e.to_string()),
        }
        match dprime_diagnostic(&sys, &ball, n, k_n) {
            Ok(v) => wrong.push(v.to_f64().unwrap()),
            Err(e) => return (false, e.to_string()),
        }
    }
    let decreasing = right.windows(2).all(|w| w[1] < w[0]) && right[0] < 0.05;
    let bounded = wrong.iter().all(|&v| v >= 0.4);
    (
        decreasing && bounded,
        format!("q=1 ladder {right:?} (decreasing); q=0 ladder {wrong:?} (bounded below 0.4)"),
    )
}

// criterion 13: on every grid family, |void(A^(q)) - void(A)| is controlled
// by q Σ|A_k| / n plus twice the Wilson interval width
fn c13_proximity_bound() -> (bool, String) {
    let obs = ObservableSpec::g1(zeta_zero());
    let n = 1_000_000u64;
    let ts = ThresholdScheme::lebesgue(n, obs.clone(), 1);
    let plan = runner::plan_circle_ensemble(2, &ts, 1.0, 4.0, 5000, 0xE5E5);
    let outs = match runner::run_circle_ensemble(&plan) {
        Ok(o) => o,
        Err(e) => return (false, e.to_string()),
    };
    let q = 1u64;
    let fams = standard_band_families(4.0);
    let mut worst_margin = f64::INFINITY;
    for fam in &fams {
        let counts = orbit_void_counts(&outs, &ts, fam, q);
        let est_plain = crate::empirical::void_estimate_from_counts(counts.plain, counts.runs);
        let est_core = crate::empirical::void_estimate_from_counts(counts.core, counts.runs);
        let diff = (est_core.p_hat - est_plain.p_hat).abs();
        // Σ_k |A_k| over the family's mark bands
        let mut tau_mass = 0.0;
        for cell in &fam.cells {
            if let crate::point_measure::MarkRegion::Bands(bands) = &cell.region {
                tau_mass += bands.iter().map(|(lo, hi)| hi - lo.max(0.0)).sum::<f64>();
            }
        }
        let ci_width = (est_plain.wilson_hi - est_plain.wilson_lo)
            .max(est_core.wilson_hi - est_core.wilson_lo);
        let bound = q as f64 * tau_mass / n as f64 + 2.0 * ci_width;
        worst_margin = worst_margin.min(bound - diff);
        if diff > bound {
            return (false, format!("family violates the bound: diff {diff:.5} > {bound:.5}"));
        }
    }
    (true, format!("all 20 families obey the bound (smallest margin {worst_margin:.5})"))
}

// criterion 14: the two record-projection counterexamples reproduce exactly
fn c14_h_discontinuity() -> (bool, String) {
    for n in [4u64, 64, 1 << 20] {
        let eps = 2.0 / n as f64;
        let m = PointMeasure::new(
            2.0,
            vec![
                Atom { t: 1.0 - eps, marks: vec![2.0] },
                Atom { t: 1.0, marks: vec![1.0] },
            ],
        );
        let h = h_record_projection(&m);
        let ts: Vec<f64> = h.atoms().iter().map(|a| a.t).collect();
        if ts != vec![1.0 - eps, 1.0] {
            return (false, format!("separated atoms gave {ts:?}"));
        }
    }
    let stacked = PointMeasure::new(
        2.0,
        vec![Atom { t: 1.0, marks: vec![2.0] }, Atom { t: 1.0, marks: vec![1.0] }],
    );
    let h = h_record_projection(&stacked);
    let ts: Vec<f64> = h.atoms().iter().map(|a| a.t).collect();
    if ts != vec![1.0] {
        return (false, format!("stacked atoms gave {ts:?}"));
    }
    (true, "both stacked-time examples reproduce exactly".to_string())
}

// criterion 15: rerunning the artifact-producing commands with the same
// seed yields byte-identical CSV and JSON outputs
fn c15_reproducibility() -> (bool, String) {
    let base = std::env::temp_dir().join(format!("repp-lab-c15-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&base);
    let cfg = cli::doubling_g1_config(10_000, 10, 42);
    let mut identical = true;
    let mut detail = Vec::new();
    for (tag, f) in [
        ("simulate", true),
        ("limit-sample", false),
    ] {
        let d1 = base.join(format!("{tag}-1"));
        let d2 = base.join(format!("{tag}-2"));
        let run = |d: &std::path::Path| -> Result<Vec<std::path::PathBuf>, String> {
            std::fs::create_dir_all(d).map_err(|e| e.to_string())?;
            let art = if f {
                cli::cmd_simulate(&cfg, d).map_err(|e| e.to_string())?
            } else {
                cli::cmd_limit_sample(None, 7, d).map_err(|e| e.to_string())?
            };
            let mut files = art.csv_paths;
            files.extend(art.svg_paths);
            files.push(art.report_path);
            Ok(files)
        };
        let (f1, f2) = match (run(&d1), run(&d2)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => return (false, e),
        };
        for (p1, p2) in f1.iter().zip(&f2) {
            let b1 = std::fs::read(p1).unwrap_or_default();
            let b2 = std::fs::read(p2).unwrap_or_default();
            if b1 != b2 {
                identical = false;
                detail.push(format!("{tag}: {} differs", p1.display()));
            }
        }
        detail.push(format!("{tag}: {} files compared", f1.len()));
    }
    let _ = std::fs::remove_dir_all(&base);
    (identical, detail.join("; "))
}

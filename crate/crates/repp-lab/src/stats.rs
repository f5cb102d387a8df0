//! Goodness-of-fit and comparison tests that turn ensembles into pass/fail
//! reports against analytic laws.
//!
//! Decisions are taken at the fixed level 0.01; callers doing many
//! simultaneous cells apply a Bonferroni correction through `level`.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("underpowered: {0}")]
    Underpowered(String),
    #[error("data error: {0}")]
    Data(String),
}

pub const DEFAULT_LEVEL: f64 = 0.01;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GofReport {
    pub test: String,
    pub statistic: f64,
    pub df: Option<u32>,
    pub p_value: f64,
    pub level: f64,
    pub reject: bool,
    pub sample_size: u64,
    pub reference: String,
}

impl GofReport {
    fn new(
        test: &str,
        statistic: f64,
        df: Option<u32>,
        p_value: f64,
        level: f64,
        sample_size: u64,
        reference: String,
    ) -> Self {
        GofReport {
            test: test.to_string(),
            statistic,
            df,
            p_value: p_value.clamp(0.0, 1.0),
            level,
            reject: p_value < level,
            sample_size,
            reference,
        }
    }

    pub fn passed(&self) -> bool {
        !self.reject
    }
}

/// χ² of observed counts for values `k = k0, k0+1, ...` against a pmf,
/// with right-tail merging so every expected cell count is at least 5.
pub fn chi_square_pmf(
    counts: &[u64],
    k0: u32,
    pmf: impl Fn(u32) -> f64,
    level: f64,
    name: &str,
    reference: &str,
) -> Result<GofReport, StatsError> {
    let n: u64 = counts.iter().sum();
    if n < 25 {
        return Err(StatsError::Underpowered(format!("{n} observations")));
    }
    let nf = n as f64;
    // expected per raw cell, plus everything beyond the histogram in a tail
    let mut cells: Vec<(f64, f64)> = Vec::new(); // (observed, expected)
    let mut tail_p = 1.0;
    for (i, &c) in counts.iter().enumerate() {
        let p = pmf(k0 + i as u32);
        tail_p -= p;
        cells.push((c as f64, nf * p));
    }
    cells.push((0.0, nf * tail_p.max(0.0)));
    // merge from the right until the expected count reaches 5
    let mut merged: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for &(o, e) in cells.iter().rev() {
        acc.0 += o;
        acc.1 += e;
        if acc.1 >= 5.0 {
            merged.push(acc);
            acc = (0.0, 0.0);
        }
    }
    if acc.1 > 0.0 {
        if let Some(last) = merged.last_mut() {
            last.0 += acc.0;
            last.1 += acc.1;
        } else {
            merged.push(acc);
        }
    }
    merged.reverse();
    if merged.len() < 2 {
        return Err(StatsError::Underpowered(
            "fewer than two cells after tail merging".into(),
        ));
    }
    let stat: f64 = merged
        .iter()
        .map(|&(o, e)| {
            let d = o - e;
            d * d / e
        })
        .sum();
    let df = (merged.len() - 1) as u32;
    let dist = ChiSquared::new(df as f64).expect("df >= 1");
    let p = 1.0 - dist.cdf(stat);
    Ok(GofReport::new(name, stat, Some(df), p, level, n, reference.into()))
}

fn poisson_pmf(mean: f64, k: u32) -> f64 {
    if mean == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let mut logp = -mean + k as f64 * mean.ln();
    for i in 1..=k {
        logp -= (i as f64).ln();
    }
    logp.exp()
}

/// χ² of a count histogram (indexed from 0) against Poisson(mean).
pub fn chi_square_poisson(
    counts: &[u64],
    mean: f64,
    level: f64,
) -> Result<GofReport, StatsError> {
    if mean == 0.0 {
        // degenerate: all mass at zero; pass iff no positive counts
        let n: u64 = counts.iter().sum();
        let bad: u64 = counts.iter().skip(1).sum();
        return Ok(GofReport::new(
            "chi_square_poisson",
            bad as f64,
            None,
            if bad == 0 { 1.0 } else { 0.0 },
            level,
            n,
            "Poisson(0)".into(),
        ));
    }
    chi_square_pmf(
        counts,
        0,
        |k| poisson_pmf(mean, k),
        level,
        "chi_square_poisson",
        &format!("Poisson({mean})"),
    )
}

/// χ² of cluster sizes (values >= 1) against Geometric(θ):
/// `P(size = k) = θ (1-θ)^(k-1)`.
pub fn geometric_fit(sizes: &[u32], theta: f64, level: f64) -> Result<GofReport, StatsError> {
    if !(0.0 < theta && theta <= 1.0) {
        return Err(StatsError::Data("θ must lie in (0, 1]".into()));
    }
    if theta == 1.0 {
        let bad = sizes.iter().filter(|&&s| s != 1).count();
        return Ok(GofReport::new(
            "geometric_fit",
            bad as f64,
            None,
            if bad == 0 { 1.0 } else { 0.0 },
            level,
            sizes.len() as u64,
            "Geometric(1)".into(),
        ));
    }
    let max = sizes.iter().copied().max().unwrap_or(1) as usize;
    let mut counts = vec![0u64; max];
    for &s in sizes {
        counts[(s - 1) as usize] += 1;
    }
    chi_square_pmf(
        &counts,
        1,
        |k| theta * (1.0 - theta).powi(k as i32 - 1),
        level,
        "geometric_fit",
        &format!("Geometric({theta})"),
    )
}

/// Asymptotic Kolmogorov tail `Q(λ) = 2 Σ (-1)^{k-1} e^{-2k²λ²}`.
fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda < 0.05 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k as f64) * (k as f64) * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample Kolmogorov-Smirnov test of inter-event gaps against
/// Exp(rate), with the Stephens small-sample correction.
pub fn ks_exponential(gaps: &[f64], rate: f64, level: f64) -> Result<GofReport, StatsError> {
    if gaps.len() < 100 {
        return Err(StatsError::Underpowered(format!("{} gaps", gaps.len())));
    }
    if gaps.iter().any(|&g| g <= 0.0) || rate <= 0.0 {
        return Err(StatsError::Data("gaps and rate must be positive".into()));
    }
    let mut u: Vec<f64> = gaps.iter().map(|&g| 1.0 - (-rate * g).exp()).collect();
    u.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = u.len() as f64;
    let mut d = 0f64;
    for (i, &x) in u.iter().enumerate() {
        d = d.max(x - i as f64 / n).max((i + 1) as f64 / n - x);
    }
    let lambda = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
    let p = kolmogorov_tail(lambda);
    Ok(GofReport::new(
        "ks_exponential",
        d,
        None,
        p,
        level,
        u.len() as u64,
        format!("Exp({rate})"),
    ))
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-z / std::f64::consts::SQRT_2)
}

fn binom_ln_pmf(n: u64, k: u64, p: f64) -> f64 {
    let mut ln = 0.0;
    for i in 1..=k {
        ln += ((n - k + i) as f64).ln() - (i as f64).ln();
    }
    ln + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln()
}

/// Two-sided comparison of an empirical void frequency (`voids` out of
/// `runs`) against an analytic probability: a z-test on the binomial
/// proportion, with an exact binomial fallback in degenerate corners.
pub fn compare_void(
    voids: u64,
    runs: u64,
    analytic: f64,
    level: f64,
) -> Result<GofReport, StatsError> {
    if runs == 0 {
        return Err(StatsError::Data("no runs".into()));
    }
    if !(0.0..=1.0).contains(&analytic) {
        return Err(StatsError::Data("analytic probability outside [0,1]".into()));
    }
    let n = runs as f64;
    let p_hat = voids as f64 / n;
    let spread = analytic * (1.0 - analytic);
    let (stat, p_value) = if spread * n < 10.0 {
        // exact binomial: two-sided by summing outcomes no more likely than
        // the observed one
        let obs_ln = binom_ln_pmf(runs, voids, analytic.clamp(1e-300, 1.0 - 1e-16));
        let mut p = 0.0;
        for k in 0..=runs {
            let l = binom_ln_pmf(runs, k, analytic.clamp(1e-300, 1.0 - 1e-16));
            if l <= obs_ln + 1e-12 {
                p += l.exp();
            }
        }
        (p_hat - analytic, p.min(1.0))
    } else {
        let z = (p_hat - analytic) / (spread / n).sqrt();
        (z, 2.0 * normal_cdf(-z.abs()))
    };
    Ok(GofReport::new(
        "compare_void",
        stat,
        None,
        p_value,
        level,
        runs,
        format!("void probability {analytic}"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{exp_variate, geometric_variate, run_rng, u01};

    #[test]
    fn poisson_null_passes_and_wrong_mean_rejects() {
        let mut rng = run_rng(1, 0);
        let draws = 100_000;
        let mut counts = vec![0u64; 30];
        for _ in 0..draws {
            // Poisson(2) by inversion on the cdf
            let mut u = u01(&mut rng);
            let mut k = 0u32;
            let mut p = (-2.0f64).exp();
            loop {
                if u <= p || k >= 60 {
                    break;
                }
                u -= p;
                p *= 2.0 / (k + 1) as f64;
                k += 1;
            }
            counts[(k as usize).min(29)] += 1;
        }
        let ok = chi_square_poisson(&counts, 2.0, 0.01).unwrap();
        assert!(ok.passed(), "p = {}", ok.p_value);
        let bad = chi_square_poisson(&counts, 3.0, 0.01).unwrap();
        assert!(bad.reject, "p = {}", bad.p_value);
    }

    #[test]
    fn degenerate_zero_mean_passes_on_zero_counts() {
        let r = chi_square_poisson(&[50, 0, 0], 0.0, 0.01).unwrap();
        assert!(r.passed());
    }

    #[test]
    fn geometric_null_passes_and_power_against_wrong_theta() {
        let mut rng = run_rng(2, 0);
        let sizes: Vec<u32> = (0..10_000).map(|_| geometric_variate(&mut rng, 0.5) as u32).collect();
        let ok = geometric_fit(&sizes, 0.5, 0.01).unwrap();
        assert!(ok.passed(), "p = {}", ok.p_value);
        let bad = geometric_fit(&sizes, 0.6, 0.01).unwrap();
        assert!(bad.reject, "p = {}", bad.p_value);

        // θ = 1 corner
        let ones = vec![1u32; 500];
        assert!(geometric_fit(&ones, 1.0, 0.01).unwrap().passed());
    }

    #[test]
    fn ks_exponential_null_and_power() {
        let mut rng = run_rng(3, 0);
        let gaps: Vec<f64> = (0..5000).map(|_| exp_variate(&mut rng, 1.0)).collect();
        let ok = ks_exponential(&gaps, 1.0, 0.01).unwrap();
        assert!(ok.passed(), "p = {}", ok.p_value);

        let unif: Vec<f64> = (0..5000).map(|_| u01(&mut rng)).collect();
        let bad = ks_exponential(&unif, 1.0, 0.01).unwrap();
        assert!(bad.reject);

        assert!(ks_exponential(&gaps[..50], 1.0, 0.01).is_err());
        assert!(ks_exponential(&[-1.0; 200], 1.0, 0.01).is_err());
    }

    #[test]
    fn compare_void_worked_examples() {
        // empirical 0.60 ± 0.01 vs analytic e^-1/2 ≈ 0.6065: pass
        let r = compare_void(6000, 10_000, (-0.5f64).exp(), 0.01).unwrap();
        assert!(r.passed(), "p = {}", r.p_value);

        // empirical 0.5 vs 0.6065 with 1e4 runs: reject
        let r2 = compare_void(5000, 10_000, (-0.5f64).exp(), 0.01).unwrap();
        assert!(r2.reject);

        // analytic 1 with all voids: exact-binomial corner, pass
        let r3 = compare_void(10, 10, 1.0, 0.01).unwrap();
        assert!(r3.passed());
        // analytic 1 with a non-void run: impossible under the null
        let r4 = compare_void(9, 10, 1.0, 0.01).unwrap();
        assert!(r4.reject);
    }

    #[test]
    fn calibration_rejection_rate_near_level() {
        // under the null, rejection at level 0.01 should happen for roughly
        // 1% of repetitions
        let mut rejections = 0u32;
        let reps = 1000;
        for rep in 0..reps {
            let mut rng = run_rng(1000 + rep as u64, 0);
            let draws = 2000;
            let mut counts = vec![0u64; 20];
            for _ in 0..draws {
                let mut u = u01(&mut rng);
                let mut k = 0u32;
                let mut p = (-2.0f64).exp();
                loop {
                    if u <= p || k >= 40 {
                        break;
                    }
                    u -= p;
                    p *= 2.0 / (k + 1) as f64;
                    k += 1;
                }
                counts[(k as usize).min(19)] += 1;
            }
            if chi_square_poisson(&counts, 2.0, 0.01).unwrap().reject {
                rejections += 1;
            }
        }
        let rate = rejections as f64 / reps as f64;
        assert!(
            (0.002..=0.025).contains(&rate),
            "rejection rate {rate} far from the nominal 1%"
        );
    }

    #[test]
    fn reports_serialize_losslessly() {
        let r = compare_void(55, 100, 0.5, 0.01).unwrap();
        let json = serde_json::to_string(&r).unwrap();
        let back: GofReport = serde_json::from_str(&json).unwrap();
        assert_eq!(r.p_value, back.p_value);
        assert_eq!(r.test, back.test);
    }
}

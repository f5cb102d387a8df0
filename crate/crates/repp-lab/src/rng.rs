//! Seeding and reproducible variate generation.
//!
//! Every stochastic component of the crate draws from a [`ChaCha8Rng`] keyed
//! by a 64-bit master seed. Ensemble members use the ChaCha stream feature:
//! run `i` draws from `seed_from_u64(master).set_stream(i)`, so runs are
//! independent, reproducible and insensitive to thread scheduling.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// RNG for ensemble member `run_id` under a master seed.
pub fn run_rng(master_seed: u64, run_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(run_id);
    rng
}

/// Uniform variate on (0, 1], from the top 53 bits of one `u64` draw.
///
/// The map is `u = (x >> 11 + 1) * 2^-53`, which never returns 0, so it is
/// safe to take logarithms. The bit-level definition is part of the
/// reproducibility contract.
#[inline]
pub fn u01(rng: &mut impl RngCore) -> f64 {
    (((rng.next_u64() >> 11) + 1) as f64) * (1.0 / (1u64 << 53) as f64)
}

/// Exponential variate with the given rate, by inverse CDF.
#[inline]
pub fn exp_variate(rng: &mut impl RngCore, rate: f64) -> f64 {
    debug_assert!(rate > 0.0);
    -u01(rng).ln() / rate
}

/// Uniform variate on the half-open interval (lo, hi].
#[inline]
pub fn uniform_left_open(rng: &mut impl RngCore, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * u01(rng)
}

/// Geometric variate on {1, 2, ...} with success probability `theta`.
///
/// `P(D = k) = theta (1-theta)^(k-1)`; sampled by inversion so a single
/// uniform draw is consumed.
#[inline]
pub fn geometric_variate(rng: &mut impl RngCore, theta: f64) -> u64 {
    debug_assert!(theta > 0.0 && theta <= 1.0);
    if theta >= 1.0 {
        return 1;
    }
    let u = u01(rng);
    (u.ln() / (1.0 - theta).ln()).ceil().max(1.0) as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn u01_is_in_unit_interval_and_reproducible() {
        let mut a = run_rng(7, 3);
        let mut b = run_rng(7, 3);
        for _ in 0..1000 {
            let x = u01(&mut a);
            assert!(x > 0.0 && x <= 1.0);
            assert_eq!(x, u01(&mut b));
        }
    }

    #[test]
    fn distinct_streams_differ() {
        let mut a = run_rng(7, 0);
        let mut b = run_rng(7, 1);
        assert_ne!(a.next_u64(), b.next_u64());
    }

    #[test]
    fn geometric_theta_one_is_constant() {
        let mut rng = run_rng(1, 0);
        for _ in 0..100 {
            assert_eq!(geometric_variate(&mut rng, 1.0), 1);
        }
    }

    #[test]
    fn exponential_mean_matches_rate() {
        let mut rng = run_rng(11, 0);
        let n = 100_000;
        let mean = (0..n).map(|_| exp_variate(&mut rng, 2.0)).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.01, "mean {mean}");
    }
}

//! Tight orbit-scanning kernels for digit-shift maps.
//!
//! The general [`DigitStreamOrbit`] engine is flexible but pays for it per
//! step; ensemble runs at `n = 10^6` across thousands of runs need a leaner
//! loop. These scanners keep the digit window in a `u64` (enough for every
//! desk-scale resolution), compare distances in integer window units, and
//! report only the rare events: ball entries (hits), the running minimum,
//! and record times of the observable. The digit-splitting arithmetic is
//! monomorphized over the base so the radix divisions compile to shifts and
//! multiplies. Digit consumption order matches [`DigitSource`], so a scan
//! and an engine built from the same seed see the same orbit.
//!
//! [`DigitSource`]: super::digits::DigitSource

use rand::RngCore;
use rand_chacha::ChaCha8Rng;

use super::digits::{zeta_fixed_point, ZetaCoord};
use super::SystemError;
use num::ToPrimitive;

/// One ball entry: orbit index, which target, circle distance (and the
/// signed per-coordinate offsets for position-resolved point processes).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hit {
    pub j: u64,
    pub target: u8,
    pub dist: f64,
    pub offset: [f64; 2],
}

/// A record event: a new strict minimum of the weighted distance
/// `min_t w_t dist_t` at orbit index `j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RecordEvent {
    pub j: u64,
    /// value of `min_t w_t dist_t` at the record (circle units)
    pub weighted_dist: f64,
    pub target: u8,
}

#[derive(Clone, Debug, Default)]
pub struct ScanOutcome {
    pub hits: Vec<Hit>,
    /// minimum over the scan of `min_t w_t dist_t`, with achieving index
    pub min_weighted: Option<(u64, f64)>,
    pub records: Vec<RecordEvent>,
    pub steps: u64,
}

/// Target of a circle scan.
#[derive(Clone, Debug)]
pub struct CircleTarget {
    pub zeta: ZetaCoord,
    /// report a hit when `dist < radius`
    pub radius: f64,
    /// weight of this target in the record functional `min_t w_t dist_t`
    pub weight: u64,
}

#[derive(Clone, Debug)]
pub struct CircleScan {
    pub base: u32,
    pub resolution: u32,
    pub targets: Vec<CircleTarget>,
    pub steps: u64,
    pub track_min: bool,
    pub track_records: bool,
}

#[derive(Clone, Copy)]
struct FixedTarget {
    z: u64,
    radius_units: u64,
    weight: u64,
}

/// Buffered iid digit source specialized on the base. Mirrors
/// [`super::digits::DigitSource`] word for word.
struct FastDigits<const BASE: u64> {
    per_word: u32,
    threshold: u64,
    buf: u64,
    remaining: u32,
}

impl<const BASE: u64> FastDigits<BASE> {
    fn new() -> Self {
        let mut per_word = 0u32;
        let mut pow: u128 = 1;
        while pow * BASE as u128 <= u64::MAX as u128 + 1 {
            pow *= BASE as u128;
            per_word += 1;
        }
        let threshold = if pow == u64::MAX as u128 + 1 {
            u64::MAX
        } else {
            pow as u64 - 1
        };
        FastDigits { per_word, threshold, buf: 0, remaining: 0 }
    }

    #[inline(always)]
    fn next(&mut self, rng: &mut ChaCha8Rng) -> u64 {
        if self.remaining == 0 {
            self.refill(rng);
        }
        let d = self.buf % BASE;
        self.buf /= BASE;
        self.remaining -= 1;
        d
    }

    #[inline(never)]
    fn refill(&mut self, rng: &mut ChaCha8Rng) {
        loop {
            let x = rng.next_u64();
            if x <= self.threshold {
                self.buf = x;
                self.remaining = self.per_word;
                return;
            }
        }
    }
}

#[inline(always)]
fn push_digit<const BASE: u64>(y: u64, modulus: u64, d: u64) -> u64 {
    if BASE == 2 {
        ((y << 1) | d) & (modulus - 1)
    } else {
        let mut v = y * BASE + d;
        while v >= modulus {
            v -= modulus;
        }
        v
    }
}

#[inline(always)]
fn signed_units(y: u64, z: u64, modulus: u64) -> i64 {
    // (y - z) mod modulus, mapped to [-modulus/2, modulus/2)
    let d = if y >= z { y - z } else { y + (modulus - z) };
    if 2 * d >= modulus {
        d as i64 - modulus as i64
    } else {
        d as i64
    }
}

fn check_u64_window(base: u32, resolution: u32) -> Result<u64, SystemError> {
    let bits = (resolution as f64 + 1.0) * (base as f64).log2();
    if bits > 63.0 {
        return Err(SystemError::Resolution {
            requested: resolution,
            cap: (63.0 / (base as f64).log2()) as u32 - 1,
        });
    }
    Ok((base as u64).pow(resolution))
}

/// Scan a circle digit-shift orbit. The resolution must satisfy
/// `base^(resolution+1) <= 2^63`; [`super::resolution_for`] stays well under
/// that at desk scale.
pub fn scan_circle(cfg: &CircleScan, rng: &mut ChaCha8Rng) -> Result<ScanOutcome, SystemError> {
    if cfg.targets.is_empty() || cfg.targets.len() > 2 {
        return Err(SystemError::Domain(
            "circle scan supports 1 or 2 targets".into(),
        ));
    }
    let modulus = check_u64_window(cfg.base, cfg.resolution)?;
    let targets: Vec<FixedTarget> = cfg
        .targets
        .iter()
        .map(|t| FixedTarget {
            z: zeta_fixed_point(&t.zeta, cfg.base, cfg.resolution)
                .to_u64()
                .expect("fits"),
            radius_units: ((t.radius * modulus as f64).ceil() as u64).min(modulus / 2),
            weight: t.weight,
        })
        .collect();
    for t in &targets {
        if (t.weight as u128) * (modulus as u128) >= 1 << 63 {
            return Err(SystemError::Domain(
                "record weight too large for this resolution".into(),
            ));
        }
    }
    match cfg.base {
        2 => scan_circle_impl::<2>(cfg, modulus, &targets, rng),
        3 => scan_circle_impl::<3>(cfg, modulus, &targets, rng),
        5 => scan_circle_impl::<5>(cfg, modulus, &targets, rng),
        10 => scan_circle_impl::<10>(cfg, modulus, &targets, rng),
        b => Err(SystemError::Unsupported(format!(
            "no scan kernel for base {b}; use the general orbit engine"
        ))),
    }
}

fn scan_circle_impl<const BASE: u64>(
    cfg: &CircleScan,
    modulus: u64,
    targets: &[FixedTarget],
    rng: &mut ChaCha8Rng,
) -> Result<ScanOutcome, SystemError> {
    let mut out = ScanOutcome {
        steps: cfg.steps,
        ..Default::default()
    };
    let mut src = FastDigits::<BASE>::new();
    let mut y: u64 = 0;
    for _ in 0..cfg.resolution {
        y = push_digit::<BASE>(y, modulus, src.next(rng));
    }

    let mut best: u64 = u64::MAX;
    let mut best_j: u64 = 0;
    let track_extrema = cfg.track_min || cfg.track_records;
    let inv_m = 1.0 / modulus as f64;

    macro_rules! body {
        ($nt:literal) => {{
            for j in 0..cfg.steps {
                if j > 0 {
                    y = push_digit::<BASE>(y, modulus, src.next(rng));
                }
                let mut weighted_best: u64 = u64::MAX;
                let mut weighted_target: u8 = 0;
                for t in 0..$nt {
                    let ft = &targets[t];
                    let delta = if y >= ft.z { y - ft.z } else { ft.z - y };
                    let dist_units = delta.min(modulus - delta);
                    if dist_units < ft.radius_units {
                        out.hits.push(Hit {
                            j,
                            target: t as u8,
                            dist: dist_units as f64 * inv_m,
                            offset: [signed_units(y, ft.z, modulus) as f64 * inv_m, 0.0],
                        });
                    }
                    if track_extrema {
                        let w = if $nt == 1 { dist_units } else { dist_units * ft.weight };
                        if w < weighted_best {
                            weighted_best = w;
                            weighted_target = t as u8;
                        }
                    }
                }
                if track_extrema && weighted_best < best {
                    best = weighted_best;
                    best_j = j;
                    if cfg.track_records {
                        out.records.push(RecordEvent {
                            j,
                            weighted_dist: weighted_best as f64 * inv_m,
                            target: weighted_target,
                        });
                    }
                }
            }
        }};
    }
    match targets.len() {
        1 => body!(1),
        _ => body!(2),
    }

    if cfg.track_min && best != u64::MAX {
        out.min_weighted = Some((best_j, best as f64 * inv_m));
    }
    Ok(out)
}

/// Scan over a product torus orbit (two coordinates), reporting entries of
/// the Euclidean ball of the given radius around the target.
#[derive(Clone, Debug)]
pub struct TorusScan {
    pub bases: [u32; 2],
    pub resolution: u32,
    pub target: [ZetaCoord; 2],
    pub radius: f64,
    pub steps: u64,
    pub track_min: bool,
}

pub fn scan_torus(cfg: &TorusScan, rng: &mut ChaCha8Rng) -> Result<ScanOutcome, SystemError> {
    let m0 = check_u64_window(cfg.bases[0], cfg.resolution)?;
    let m1 = check_u64_window(cfg.bases[1], cfg.resolution)?;
    match (cfg.bases[0], cfg.bases[1]) {
        (2, 3) => scan_torus_impl::<2, 3>(cfg, m0, m1, rng),
        (2, 2) => scan_torus_impl::<2, 2>(cfg, m0, m1, rng),
        (3, 3) => scan_torus_impl::<3, 3>(cfg, m0, m1, rng),
        (a, b) => Err(SystemError::Unsupported(format!(
            "no torus scan kernel for bases ({a}, {b})"
        ))),
    }
}

fn scan_torus_impl<const B0: u64, const B1: u64>(
    cfg: &TorusScan,
    m0: u64,
    m1: u64,
    rng: &mut ChaCha8Rng,
) -> Result<ScanOutcome, SystemError> {
    let z0 = zeta_fixed_point(&cfg.target[0], cfg.bases[0], cfg.resolution)
        .to_u64()
        .expect("fits");
    let z1 = zeta_fixed_point(&cfg.target[1], cfg.bases[1], cfg.resolution)
        .to_u64()
        .expect("fits");
    // box prefilter in integer units
    let r0 = ((cfg.radius * m0 as f64).ceil() as u64).min(m0 / 2);
    let r1 = ((cfg.radius * m1 as f64).ceil() as u64).min(m1 / 2);
    let r2 = cfg.radius * cfg.radius;
    let inv_m0 = 1.0 / m0 as f64;
    let inv_m1 = 1.0 / m1 as f64;

    let mut src0 = FastDigits::<B0>::new();
    let mut src1 = FastDigits::<B1>::new();
    let (mut y0, mut y1) = (0u64, 0u64);
    for _ in 0..cfg.resolution {
        y0 = push_digit::<B0>(y0, m0, src0.next(rng));
        y1 = push_digit::<B1>(y1, m1, src1.next(rng));
    }

    let mut out = ScanOutcome {
        steps: cfg.steps,
        ..Default::default()
    };
    let mut best = f64::INFINITY;
    let mut best_j = 0u64;
    for j in 0..cfg.steps {
        if j > 0 {
            y0 = push_digit::<B0>(y0, m0, src0.next(rng));
            y1 = push_digit::<B1>(y1, m1, src1.next(rng));
        }
        let d0 = {
            let delta = if y0 >= z0 { y0 - z0 } else { z0 - y0 };
            delta.min(m0 - delta)
        };
        let d1 = {
            let delta = if y1 >= z1 { y1 - z1 } else { z1 - y1 };
            delta.min(m1 - delta)
        };
        let near = d0 < r0 && d1 < r1;
        if near || cfg.track_min {
            let dx = d0 as f64 * inv_m0;
            let dy = d1 as f64 * inv_m1;
            let dd = dx * dx + dy * dy;
            if near && dd < r2 {
                out.hits.push(Hit {
                    j,
                    target: 0,
                    dist: dd.sqrt(),
                    offset: [
                        signed_units(y0, z0, m0) as f64 * inv_m0,
                        signed_units(y1, z1, m1) as f64 * inv_m1,
                    ],
                });
            }
            if cfg.track_min && dd < best {
                best = dd;
                best_j = j;
            }
        }
    }
    if cfg.track_min {
        out.min_weighted = Some((best_j, best.sqrt()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::{ratio, Rat};
    use crate::rng::run_rng;
    use crate::systems::digits::{DigitSource, DigitStreamOrbit};
    use num::Zero;

    #[test]
    fn fast_digits_match_general_source() {
        let mut fast = FastDigits::<3>::new();
        let mut gen = DigitSource::new(3);
        let mut r1 = run_rng(9, 2);
        let mut r2 = run_rng(9, 2);
        for _ in 0..10_000 {
            assert_eq!(fast.next(&mut r1), gen.next_digit(&mut r2));
        }
    }

    #[test]
    fn scan_agrees_with_general_engine() {
        let zeta = ZetaCoord::Rational(Rat::zero());
        let cfg = CircleScan {
            base: 2,
            resolution: 40,
            targets: vec![CircleTarget {
                zeta: zeta.clone(),
                radius: 0.01,
                weight: 1,
            }],
            steps: 5000,
            track_min: true,
            track_records: true,
        };

        let mut orbit = DigitStreamOrbit::new(&[2], &[vec![zeta]], 40, 17).unwrap();
        let mut hits = Vec::new();
        let mut min_d = f64::INFINITY;
        let mut records = Vec::new();
        for j in 0..5000u64 {
            let s = if j == 0 {
                orbit.distance_to(0)
            } else {
                orbit.step_distance()
            };
            if s.dist < 0.01 {
                hits.push((j, s.dist));
            }
            if s.dist < min_d {
                min_d = s.dist;
                records.push(j);
            }
        }
        // the engine with seed 17 consumes rng stream (17, run 0)
        let mut rng0 = run_rng(17, 0);
        let scan0 = scan_circle(&cfg, &mut rng0).unwrap();
        assert_eq!(scan0.hits.len(), hits.len());
        for (h, (j, d)) in scan0.hits.iter().zip(&hits) {
            assert_eq!(h.j, *j);
            assert!((h.dist - d).abs() < 1e-15);
        }
        assert_eq!(
            scan0.records.iter().map(|r| r.j).collect::<Vec<_>>(),
            records
        );
        assert!((scan0.min_weighted.unwrap().1 - min_d).abs() < 1e-15);
    }

    #[test]
    fn doubling_step_doubles_small_distances_exactly() {
        let cfg = CircleScan {
            base: 2,
            resolution: 50,
            targets: vec![CircleTarget {
                zeta: ZetaCoord::Rational(Rat::zero()),
                radius: 2f64.powi(-8),
                weight: 1,
            }],
            steps: 200_000,
            track_min: false,
            track_records: false,
        };
        let mut rng = run_rng(3, 1);
        let scan = scan_circle(&cfg, &mut rng).unwrap();
        assert!(scan.hits.len() > 100);
        // The true distance doubles exactly while below 1/4; the window
        // quantizes at 2^-50, so the observed pair differs by at most one
        // unit from exact doubling.
        let unit = 2f64.powi(-50);
        let mut checked = 0;
        for w in scan.hits.windows(2) {
            if w[1].j == w[0].j + 1 && w[0].dist < 2f64.powi(-10) {
                assert!(
                    (w[1].dist - 2.0 * w[0].dist).abs() <= unit,
                    "linearity near 0: {} -> {}",
                    w[0].dist,
                    w[1].dist
                );
                checked += 1;
            }
        }
        assert!(checked > 10, "found {checked} consecutive pairs");
    }

    #[test]
    fn hit_frequency_matches_ball_measure() {
        // Lebesgue invariance: hits of a radius-r ball occur with frequency 2r.
        let r = 0.001;
        let cfg = CircleScan {
            base: 3,
            resolution: 30,
            targets: vec![CircleTarget {
                zeta: ZetaCoord::PiTimes(ratio(1, 16)),
                radius: r,
                weight: 1,
            }],
            steps: 2_000_000,
            track_min: false,
            track_records: false,
        };
        let mut rng = run_rng(23, 0);
        let scan = scan_circle(&cfg, &mut rng).unwrap();
        let expect = 2.0 * r * cfg.steps as f64;
        let sd = expect.sqrt();
        assert!(
            (scan.hits.len() as f64 - expect).abs() < 4.0 * sd,
            "hits {} vs expected {expect}",
            scan.hits.len()
        );
    }

    #[test]
    fn torus_hits_are_euclidean_ball_entries() {
        let cfg = TorusScan {
            bases: [2, 3],
            resolution: 30,
            target: [
                ZetaCoord::Rational(Rat::zero()),
                ZetaCoord::Rational(Rat::zero()),
            ],
            radius: 0.01,
            steps: 2_000_000,
            track_min: true,
        };
        let mut rng = run_rng(5, 0);
        let scan = scan_torus(&cfg, &mut rng).unwrap();
        let expect = std::f64::consts::PI * 0.01 * 0.01 * cfg.steps as f64;
        let sd = expect.sqrt();
        assert!(
            (scan.hits.len() as f64 - expect).abs() < 4.0 * sd,
            "hits {} vs expected {expect}",
            scan.hits.len()
        );
        for h in &scan.hits {
            assert!(h.dist < 0.01);
            let (dx, dy) = (h.offset[0], h.offset[1]);
            assert!(((dx * dx + dy * dy).sqrt() - h.dist).abs() < 1e-12);
        }
        assert!(scan.min_weighted.unwrap().1 <= 0.01);
    }
}

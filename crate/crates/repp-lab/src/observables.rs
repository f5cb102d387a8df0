//! Observables `φ = g(dist(·, ζ))`, threshold calibration `u_n(τ)` and its
//! inverse, and ball-measure models.
//!
//! Levels are calibrated so that `n μ(X_0 > u_n(τ)) = τ` under the measure
//! model: exactly, in rational arithmetic, for Lebesgue-invariant systems;
//! via a Birkhoff visit-frequency table otherwise.

use crate::interval::{rat, ratio, IntervalUnion, Rat};
use crate::systems::{SystemSpec, ZetaCoord};
use num::Zero;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ObservableError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("state error: {0}")]
    State(String),
}

/// The shape of `g` in `φ(x) = g(dist(x, ζ))`.
#[derive(Clone, Debug, PartialEq)]
pub enum GKind {
    /// `g(y) = -log y` (exponential tail)
    G1,
    /// `g(y) = y^(-1/a)` (heavy tail), `a > 0`
    G2 { a: f64 },
    /// `g(y) = c - y^(1/a)` (bounded tail), `a, c > 0`
    G3 { a: f64, c: f64 },
    /// Two tent functions on the same orbit:
    /// `φ(x) = max{0, 1 - 100 |x - π/16|} + max{0, 1 - 10 |x - 3π/16|}`.
    /// The supports are disjoint, so `sup φ = 1`, attained at both sites.
    TwoSite,
}

/// Tent slopes at the two sites of the two-site observable.
pub const TWO_SITE_SLOPES: [f64; 2] = [100.0, 10.0];

#[derive(Clone, Debug, PartialEq)]
pub struct ObservableSpec {
    pub zeta: Vec<ZetaCoord>,
    pub kind: GKind,
}

impl ObservableSpec {
    pub fn new(zeta: Vec<ZetaCoord>, kind: GKind) -> Result<Self, ObservableError> {
        match kind {
            GKind::G2 { a } if a <= 0.0 => {
                return Err(ObservableError::Domain("g2 requires a > 0".into()))
            }
            GKind::G3 { a, c } if a <= 0.0 || c <= 0.0 => {
                return Err(ObservableError::Domain("g3 requires a, c > 0".into()))
            }
            _ => {}
        }
        Ok(ObservableSpec { zeta, kind })
    }

    pub fn g1(zeta: Vec<ZetaCoord>) -> Self {
        ObservableSpec { zeta, kind: GKind::G1 }
    }

    /// The two-site observable of the `3x mod 1` example; the stored `zeta`
    /// is the primary site `π/16`, the secondary site `3π/16` is implied.
    pub fn two_site() -> Self {
        ObservableSpec {
            zeta: vec![ZetaCoord::PiTimes(ratio(1, 16))],
            kind: GKind::TwoSite,
        }
    }

    /// Sites and tent slopes: one `(ζ, slope)` pair per maximal point.
    pub fn sites(&self) -> Vec<(ZetaCoord, f64)> {
        match self.kind {
            GKind::TwoSite => vec![
                (ZetaCoord::PiTimes(ratio(1, 16)), TWO_SITE_SLOPES[0]),
                (ZetaCoord::PiTimes(ratio(3, 16)), TWO_SITE_SLOPES[1]),
            ],
            _ => vec![(self.zeta[0].clone(), f64::NAN)],
        }
    }

    pub fn sup_value(&self) -> f64 {
        match self.kind {
            GKind::G1 | GKind::G2 { .. } => f64::INFINITY,
            GKind::G3 { c, .. } => c,
            GKind::TwoSite => 1.0,
        }
    }

    /// `g(y)` for distance `y >= 0`.
    pub fn g(&self, y: f64) -> f64 {
        match self.kind {
            GKind::G1 => -y.ln(),
            GKind::G2 { a } => y.powf(-1.0 / a),
            GKind::G3 { a, c } => c - y.powf(1.0 / a),
            GKind::TwoSite => unreachable!("two-site observable has no single g"),
        }
    }

    /// `g^{-1}(u)`: the ball radius whose boundary sits at level `u`.
    pub fn g_inverse(&self, u: f64) -> f64 {
        match self.kind {
            GKind::G1 => (-u).exp(),
            GKind::G2 { a } => u.powf(-a),
            GKind::G3 { a, c } => {
                if u >= c {
                    0.0
                } else {
                    (c - u).powf(a)
                }
            }
            GKind::TwoSite => unreachable!("two-site observable has no single g"),
        }
    }

    /// Evaluate `φ` at a phase-space point (circle coordinates).
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        match self.kind {
            GKind::TwoSite => {
                let mut v = 0.0;
                for (site, slope) in self.sites() {
                    let d = circle_dist(x[0], site.approx_f64());
                    v += (1.0 - slope * d).max(0.0);
                }
                v
            }
            _ => {
                let dd: f64 = x
                    .iter()
                    .zip(&self.zeta)
                    .map(|(&xi, zi)| {
                        let d = circle_dist(xi, zi.approx_f64());
                        d * d
                    })
                    .sum();
                self.g(dd.sqrt())
            }
        }
    }

    /// Exact exceedance region `{φ > u}` on the circle (1-d observables).
    /// Levels at or above `sup φ` give the empty set.
    pub fn exceedance_set(&self, u: f64) -> IntervalUnion {
        match self.kind {
            GKind::TwoSite => {
                if u >= 1.0 {
                    return IntervalUnion::empty();
                }
                let excess = rat(1.0) - rat(u);
                self.two_site_balls(&excess)
            }
            _ => {
                let r = self.g_inverse(u);
                if r <= 0.0 {
                    return IntervalUnion::empty();
                }
                let center = zeta_rational_1d(&self.zeta[0]);
                IntervalUnion::circle_ball(&center, &rat(r))
            }
        }
    }

    /// The union `V_1(u) ∪ V_2(u)` for `1 - u = excess`: balls of radii
    /// `excess/100` and `excess/10` around the two sites, exact.
    fn two_site_balls(&self, excess: &Rat) -> IntervalUnion {
        let mut out = IntervalUnion::empty();
        for (site, slope) in self.sites() {
            let center = zeta_rational_1d(&site);
            let r = excess / rat(slope);
            out = out.union(&IntervalUnion::circle_ball(&center, &r));
        }
        out
    }
}

/// Circle distance `min(|x-z| mod 1, 1 - |x-z| mod 1)`.
pub fn circle_dist(x: f64, z: f64) -> f64 {
    let d = (x - z).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Rational stand-in for a zeta coordinate: exact for rationals, a 192-bit
/// fixed-point truncation for `π`-multiples (set arithmetic around an
/// irrational site is relative to this dyadic center).
pub fn zeta_rational_1d(z: &ZetaCoord) -> Rat {
    match z {
        ZetaCoord::Rational(r) => r.clone(),
        ZetaCoord::PiTimes(_) => {
            let fx = crate::systems::digits::zeta_fixed_point(z, 2, 192);
            Rat::new(fx.into(), num::BigInt::from(2).pow(192))
        }
    }
}

/// Empirical ball-measure table `r -> μ(B_r(ζ))` from a calibration orbit.
#[derive(Clone, Debug)]
pub struct MeasureTable {
    pub radii: Vec<f64>,
    pub mu: Vec<f64>,
    pub std_err: Vec<f64>,
    pub orbit_len: usize,
}

impl MeasureTable {
    /// Interpolated measure at radius `r`; the flag is true when the radius
    /// falls below the smallest resolved entry and the value had to be
    /// extrapolated from a widened radius.
    pub fn value_at(&self, r: f64) -> (f64, bool) {
        if self.radii.is_empty() {
            return (f64::NAN, true);
        }
        if r <= self.radii[0] {
            let widened = self.mu[0] <= 0.0 || r < self.radii[0];
            // linear-through-origin extrapolation below the first knot
            return (self.mu[0] * r / self.radii[0], widened);
        }
        match self.radii.binary_search_by(|x| x.partial_cmp(&r).unwrap()) {
            Ok(i) => (self.mu[i], false),
            Err(i) => {
                if i >= self.radii.len() {
                    (*self.mu.last().unwrap(), false)
                } else {
                    let (r0, r1) = (self.radii[i - 1], self.radii[i]);
                    let (m0, m1) = (self.mu[i - 1], self.mu[i]);
                    (m0 + (m1 - m0) * (r - r0) / (r1 - r0), false)
                }
            }
        }
    }

    /// Radius with `μ(B_r) = m`, by inverse interpolation.
    pub fn inverse(&self, m: f64) -> f64 {
        if self.mu.is_empty() {
            return f64::NAN;
        }
        if m <= self.mu[0] {
            return self.radii[0] * m / self.mu[0].max(f64::MIN_POSITIVE);
        }
        for i in 1..self.mu.len() {
            if self.mu[i] >= m {
                let (m0, m1) = (self.mu[i - 1], self.mu[i]);
                let (r0, r1) = (self.radii[i - 1], self.radii[i]);
                if m1 == m0 {
                    return r1;
                }
                return r0 + (r1 - r0) * (m - m0) / (m1 - m0);
            }
        }
        *self.radii.last().unwrap()
    }
}

/// Estimate `r -> μ(B_r(ζ))` from orbit visit frequencies, with binomial
/// standard errors. The orbit is floating point with dithering.
pub fn calibrate_birkhoff(
    spec: &SystemSpec,
    zeta: f64,
    orbit_len: usize,
    seed: u64,
) -> Result<MeasureTable, ObservableError> {
    if orbit_len < 100_000 {
        return Err(ObservableError::Domain(
            "calibration orbits need at least 1e5 iterates".into(),
        ));
    }
    let x0 = crate::rng::u01(&mut crate::rng::run_rng(seed, 1));
    let orbit = spec
        .iterate_float(x0 * (1.0 - 1e-12), orbit_len, true, seed)
        .map_err(|e| ObservableError::Domain(e.to_string()))?;
    // log-spaced radii from ~30/m up to 1/4
    let mut radii = Vec::new();
    let mut r = 30.0 / orbit_len as f64;
    while r < 0.25 {
        radii.push(r);
        r *= 1.25;
    }
    radii.push(0.25);
    let mut counts = vec![0u64; radii.len()];
    for &x in &orbit {
        let d = circle_dist(x, zeta);
        // first radius >= d: that ball and every larger one contain the point
        let idx = radii.partition_point(|&rr| rr < d);
        if idx < counts.len() {
            counts[idx] += 1;
        }
    }
    // cumulative: μ̂(B_r) is monotone in r by construction
    let mut acc = 0u64;
    let m = orbit_len as f64;
    let mut mu = Vec::with_capacity(radii.len());
    let mut se = Vec::with_capacity(radii.len());
    for &c in &counts {
        acc += c;
        let p = acc as f64 / m;
        mu.push(p);
        se.push((p * (1.0 - p) / m).sqrt());
    }
    Ok(MeasureTable { radii, mu, std_err: se, orbit_len })
}

/// Measure model backing a threshold scheme.
#[derive(Clone, Debug)]
pub enum MeasureModel {
    /// `μ(B_ε(ζ)) = density · vol_d(ε)` with the invariant density at `ζ`
    /// (`vol_1(ε) = 2ε`, `vol_2(ε) = π ε²`).
    AnalyticDensity { density: f64, dim: u32 },
    /// Interpolation in a Birkhoff calibration table.
    BirkhoffEmpirical(MeasureTable),
}

/// The calibrated level function `u_n(τ)` and its inverse for one `(system,
/// observable, n)` triple.
#[derive(Clone, Debug)]
pub struct ThresholdScheme {
    pub n: u64,
    pub obs: ObservableSpec,
    pub model: MeasureModel,
}

impl ThresholdScheme {
    /// Lebesgue-invariant analytic model (density 1).
    pub fn lebesgue(n: u64, obs: ObservableSpec, dim: u32) -> Self {
        ThresholdScheme {
            n,
            obs,
            model: MeasureModel::AnalyticDensity { density: 1.0, dim },
        }
    }

    fn ball_measure(&self, r: f64) -> f64 {
        match &self.model {
            MeasureModel::AnalyticDensity { density, dim } => match dim {
                1 => density * 2.0 * r,
                2 => density * std::f64::consts::PI * r * r,
                d => panic!("unsupported dimension {d}"),
            },
            MeasureModel::BirkhoffEmpirical(t) => t.value_at(r).0,
        }
    }

    fn ball_radius(&self, measure: f64) -> f64 {
        match &self.model {
            MeasureModel::AnalyticDensity { density, dim } => match dim {
                1 => measure / (2.0 * density),
                2 => (measure / (density * std::f64::consts::PI)).sqrt(),
                d => panic!("unsupported dimension {d}"),
            },
            MeasureModel::BirkhoffEmpirical(t) => t.inverse(measure),
        }
    }

    /// The level `u_n(τ)` with `n μ(X_0 > u) = τ` under the model.
    pub fn threshold(&self, tau: f64) -> Result<f64, ObservableError> {
        if tau <= 0.0 {
            return Err(ObservableError::Domain("tau must be positive".into()));
        }
        let target = tau / self.n as f64;
        match self.obs.kind {
            GKind::TwoSite => {
                // |{X_0 > u}| = 2(1-u)/100 + 2(1-u)/10 = (11/50)(1-u)
                Ok(1.0 - target * 50.0 / 11.0)
            }
            _ => Ok(self.obs.g(self.ball_radius(target))),
        }
    }

    /// The inverse `u_n^{-1}(z) = n μ(B_{g^{-1}(z)}(ζ))`: the asymptotic
    /// exceedance frequency of a threshold placed at `z`.
    pub fn tau_of(&self, z: f64) -> f64 {
        match self.obs.kind {
            GKind::TwoSite => self.n as f64 * (11.0 / 50.0) * (1.0 - z).max(0.0),
            _ => self.n as f64 * self.ball_measure(self.obs.g_inverse(z)),
        }
    }

    /// Ball radius of the exceedance region at frequency `τ` (single-site
    /// observables).
    pub fn radius_of_tau(&self, tau: f64) -> f64 {
        match self.obs.kind {
            GKind::TwoSite => panic!("two-site regions are per-site; use site_radius_of_tau"),
            _ => self.ball_radius(tau / self.n as f64),
        }
    }

    /// Per-site ball radius of `{X_0 > u_n(τ)}`.
    pub fn site_radius_of_tau(&self, site: usize, tau: f64) -> f64 {
        match self.obs.kind {
            GKind::TwoSite => {
                let excess = tau * (50.0 / 11.0) / self.n as f64;
                excess / TWO_SITE_SLOPES[site]
            }
            _ => {
                assert_eq!(site, 0);
                self.radius_of_tau(tau)
            }
        }
    }

    /// The mark `u_n^{-1}(φ)` of an orbit point at distance `dist` from the
    /// given site: `n μ(B_dist(ζ))` in the single-site case.
    pub fn mark_of_site_dist(&self, site: usize, dist: f64) -> f64 {
        match self.obs.kind {
            GKind::TwoSite => {
                // φ = 1 - slope·d, so u_n^{-1}(φ) = n (11/50) slope d
                self.n as f64 * (11.0 / 50.0) * TWO_SITE_SLOPES[site] * dist
            }
            _ => {
                assert_eq!(site, 0);
                self.n as f64 * self.ball_measure(dist)
            }
        }
    }

    /// Exact exceedance region `{X_0 > u_n(τ)}` for rational `τ`, available
    /// for rational-density 1-d models and the two-site observable.
    pub fn exceedance_set_exact(&self, tau: &Rat) -> Result<IntervalUnion, ObservableError> {
        if tau <= &Rat::zero() {
            return Ok(IntervalUnion::empty());
        }
        let n = Rat::from_integer(self.n.into());
        match (&self.obs.kind, &self.model) {
            (GKind::TwoSite, _) => {
                let excess = tau * ratio(50, 11) / &n;
                Ok(self.obs.two_site_balls(&excess))
            }
            (_, MeasureModel::AnalyticDensity { density, dim: 1 }) => {
                let density = rat(*density);
                let r = tau / (&n * ratio(2, 1) * density);
                let center = zeta_rational_1d(&self.obs.zeta[0]);
                Ok(IntervalUnion::circle_ball(&center, &r))
            }
            _ => Err(ObservableError::State(
                "exact exceedance sets need a 1-d analytic rational model".into(),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::One;

    fn pi16() -> f64 {
        std::f64::consts::PI / 16.0
    }

    #[test]
    fn g1_at_distance_e_inverse_is_one() {
        let obs = ObservableSpec::g1(vec![ZetaCoord::Rational(Rat::zero())]);
        let x = (-1.0f64).exp();
        assert!((obs.evaluate(&[x]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_site_values_at_the_sites() {
        // Each tent peaks at value 1 on its own site and vanishes on the
        // other (the sites are π/8 apart, far outside both supports).
        let obs = ObservableSpec::two_site();
        assert!((obs.evaluate(&[pi16()]) - 1.0).abs() < 1e-12);
        assert!((obs.evaluate(&[3.0 * pi16()]) - 1.0).abs() < 1e-12);
        // 0.9 is farther than both tent supports from either site
        assert_eq!(obs.evaluate(&[0.9]), 0.0);
    }

    #[test]
    fn g2_exceedance_ball() {
        let obs = ObservableSpec::new(vec![ZetaCoord::Rational(Rat::zero())], GKind::G2 { a: 1.0 })
            .unwrap();
        let s = obs.exceedance_set(10.0);
        assert!((s.measure_f64() - 0.2).abs() < 1e-15, "ball radius 0.1 around 0");
    }

    #[test]
    fn two_site_exceedance_radii_and_ratio() {
        let obs = ObservableSpec::two_site();
        let s = obs.exceedance_set(0.99);
        // radii 1e-4 and 1e-3; total measure 2(1e-4 + 1e-3)
        assert!((s.measure_f64() - 2.0 * 0.0011).abs() < 1e-12);
        assert_eq!(s.num_components(), 2);

        // |V1|/|{X0 > u}| = 1/11 exactly, for any u close to 1
        for u in [0.9, 0.99, 0.9999] {
            let excess = rat(1.0) - rat(u);
            let v1 = IntervalUnion::circle_ball(
                &zeta_rational_1d(&ZetaCoord::PiTimes(ratio(1, 16))),
                &(&excess / rat(100.0)),
            );
            let whole = obs.exceedance_set(u);
            assert_eq!(v1.measure() / whole.measure(), ratio(1, 11));
        }
    }

    #[test]
    fn exceedance_sets_match_pointwise_evaluation() {
        use rand::Rng;
        let mut rng = crate::rng::run_rng(2, 0);
        let specs = vec![
            ObservableSpec::g1(vec![ZetaCoord::Rational(ratio(3, 10))]),
            ObservableSpec::new(vec![ZetaCoord::Rational(ratio(3, 10))], GKind::G2 { a: 2.0 })
                .unwrap(),
            ObservableSpec::new(
                vec![ZetaCoord::Rational(ratio(3, 10))],
                GKind::G3 { a: 1.0, c: 2.0 },
            )
            .unwrap(),
            ObservableSpec::two_site(),
        ];
        for obs in specs {
            let u = match obs.kind {
                GKind::G1 => 3.0,
                GKind::G2 { .. } => 25.0,
                GKind::G3 { .. } => 1.9,
                GKind::TwoSite => 0.97,
            };
            let set = obs.exceedance_set(u);
            for _ in 0..2000 {
                let x: f64 = rng.random_range(0.0..1.0);
                let val = obs.evaluate(&[x]);
                // skip points numerically on the region boundary: the set
                // uses an exact rational center, evaluate uses f64
                if (val - u).abs() < 1e-9 {
                    continue;
                }
                assert_eq!(set.contains(&rat(x)), val > u, "x = {x}, φ = {val}, u = {u}");
            }
        }
    }

    #[test]
    fn lebesgue_g1_threshold_closed_form() {
        let n = 100_000;
        let ts =
            ThresholdScheme::lebesgue(n, ObservableSpec::g1(vec![ZetaCoord::Rational(Rat::zero())]), 1);
        for tau in [0.1, 1.0, 10.0] {
            let u = ts.threshold(tau).unwrap();
            let expect = -(tau / (2.0 * n as f64)).ln();
            assert!((u - expect).abs() < 1e-12);
            let back = ts.tau_of(u);
            assert!((back - tau).abs() < 1e-10 * tau.max(1.0), "round trip at τ = {tau}");
        }
    }

    #[test]
    fn two_site_threshold_closed_form() {
        let n = 100_000;
        let ts = ThresholdScheme {
            n,
            obs: ObservableSpec::two_site(),
            model: MeasureModel::AnalyticDensity { density: 1.0, dim: 1 },
        };
        let tau = 2.0;
        let u = ts.threshold(tau).unwrap();
        let expect = 1.0 - (100.0 / 11.0) * tau / (2.0 * n as f64);
        assert!((u - expect).abs() < 1e-12);
        let z = 0.999_99;
        assert!((ts.tau_of(z) - 2.0 * n as f64 * (11.0 / 100.0) * (1.0 - z)).abs() < 1e-9);
    }

    #[test]
    fn threshold_is_strictly_decreasing_in_tau() {
        let ts = ThresholdScheme::lebesgue(
            1_000_000,
            ObservableSpec::g1(vec![ZetaCoord::Rational(Rat::zero())]),
            1,
        );
        let mut last = f64::INFINITY;
        for i in 1..60 {
            let u = ts.threshold(i as f64 * 0.25).unwrap();
            assert!(u < last);
            last = u;
        }
    }

    #[test]
    fn exact_exceedance_measure_solves_the_level_equation() {
        // n · |{X0 > u_n(τ)}| = τ exactly in rational arithmetic
        let n = 1_000_000u64;
        let ts =
            ThresholdScheme::lebesgue(n, ObservableSpec::g1(vec![ZetaCoord::Rational(Rat::zero())]), 1);
        for tau in [ratio(1, 10), Rat::one(), ratio(10, 1)] {
            let set = ts.exceedance_set_exact(&tau).unwrap();
            assert_eq!(set.measure() * Rat::from_integer(n.into()), tau);
        }
        let two = ThresholdScheme {
            n,
            obs: ObservableSpec::two_site(),
            model: MeasureModel::AnalyticDensity { density: 1.0, dim: 1 },
        };
        for tau in [ratio(1, 10), Rat::one(), ratio(10, 1)] {
            let set = two.exceedance_set_exact(&tau).unwrap();
            assert_eq!(set.measure() * Rat::from_integer(n.into()), tau);
        }
    }

    #[test]
    fn birkhoff_table_on_doubling_matches_lebesgue() {
        let spec = SystemSpec::doubling_affine();
        let table = calibrate_birkhoff(&spec, 0.3, 200_000, 11).unwrap();
        let (mu, widened) = table.value_at(0.05);
        assert!(!widened);
        let se = (0.1f64 * 0.9 / 200_000.0).sqrt();
        assert!((mu - 0.1).abs() < 4.0 * se, "μ̂(B_0.05) = {mu}");
        for w in table.mu.windows(2) {
            assert!(w[1] >= w[0], "table must be monotone in r");
        }
    }

    #[test]
    fn calibration_rejects_short_orbits() {
        let spec = SystemSpec::doubling_affine();
        assert!(calibrate_birkhoff(&spec, 0.3, 10_000, 1).is_err());
    }
}

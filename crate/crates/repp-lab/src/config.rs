//! Flat INI-style configuration blocks.
//!
//! ```text
//! # comment
//! [system]
//! kind = digit_shift        # digit_shift | piecewise_affine | intermittent
//! bases = 2                 # comma list for product maps, e.g. 2,3
//!
//! [observable]
//! g = g1                    # g1 | g2 | g3 | two_site
//! zeta = 0                  # rational "p/q", "pi/16"-style, or comma list
//! a = 1.0                   # g2, g3
//! c = 2.0                   # g3
//!
//! [run]
//! n = 1000000               # comma list for ladders
//! ensemble = 2000
//! seed = 42
//! horizon = 1.0
//! tau_max = 10.0
//!
//! [law]                     # optional: reference law for comparisons
//! kind = stacked_geometric  # poisson2d | compound1d | stacked_geometric |
//!                           # poisson_multi | stacked_linear | ndag | hat | double_hat
//! alpha = 2.0
//! d = 1
//! ```
//!
//! Parse errors carry 1-based line numbers.

use crate::interval::{rat, Rat};
use crate::limits::LimitLaw;
use crate::observables::{GKind, ObservableSpec};
use crate::systems::{SystemSpec, ZetaCoord};
use num::BigInt;
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("section [{0}] missing")]
    MissingSection(String),
    #[error("[{section}] {key}: {msg}")]
    BadValue {
        section: String,
        key: String,
        msg: String,
    },
}

/// Sections of `key = value` entries with source line numbers.
#[derive(Clone, Debug, Default)]
pub struct RawConfig {
    sections: BTreeMap<String, BTreeMap<String, (String, usize)>>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut out = RawConfig::default();
        let mut current = String::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            let stripped = raw_line.split('#').next().unwrap_or("").trim();
            if stripped.is_empty() {
                continue;
            }
            if let Some(name) = stripped.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or(ConfigError::Parse {
                    line,
                    msg: "unterminated section header".into(),
                })?;
                current = name.trim().to_string();
                out.sections.entry(current.clone()).or_default();
                continue;
            }
            let (k, v) = stripped.split_once('=').ok_or(ConfigError::Parse {
                line,
                msg: format!("expected `key = value`, got `{stripped}`"),
            })?;
            if current.is_empty() {
                return Err(ConfigError::Parse {
                    line,
                    msg: "key before any [section]".into(),
                });
            }
            out.sections
                .get_mut(&current)
                .unwrap()
                .insert(k.trim().to_string(), (v.trim().to_string(), line));
        }
        Ok(out)
    }

    pub fn section(&self, name: &str) -> Option<&BTreeMap<String, (String, usize)>> {
        self.sections.get(name)
    }

    pub fn get<'a>(&'a self, section: &str, key: &str) -> Option<&'a str> {
        self.sections
            .get(section)
            .and_then(|s| s.get(key))
            .map(|(v, _)| v.as_str())
    }

    fn require(&self, section: &str, key: &str) -> Result<&str, ConfigError> {
        self.get(section, key).ok_or_else(|| ConfigError::BadValue {
            section: section.into(),
            key: key.into(),
            msg: "missing".into(),
        })
    }

    fn parse_value<T: FromStr>(&self, section: &str, key: &str) -> Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        let v = self.require(section, key)?;
        v.parse().map_err(|e| ConfigError::BadValue {
            section: section.into(),
            key: key.into(),
            msg: format!("{e}"),
        })
    }

    fn parse_or<T: FromStr>(&self, section: &str, key: &str, default: T) -> Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(section, key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|e| ConfigError::BadValue {
                section: section.into(),
                key: key.into(),
                msg: format!("{e}"),
            }),
        }
    }
}

/// One zeta coordinate: `p/q`, a decimal, or `pi/16`-style `k pi/q` forms.
pub fn parse_zeta_coord(s: &str) -> Result<ZetaCoord, String> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix("pi/") {
        let q: i64 = rest.parse().map_err(|_| format!("bad pi fraction `{s}`"))?;
        return Ok(ZetaCoord::PiTimes(crate::interval::ratio(1, q)));
    }
    if let Some((num, rest)) = s.split_once("pi/") {
        let p: i64 = num.trim().parse().map_err(|_| format!("bad pi multiple `{s}`"))?;
        let q: i64 = rest.parse().map_err(|_| format!("bad pi fraction `{s}`"))?;
        return Ok(ZetaCoord::PiTimes(crate::interval::ratio(p, q)));
    }
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| format!("bad rational `{s}`"))?;
        let q = BigInt::from_str(q.trim()).map_err(|_| format!("bad rational `{s}`"))?;
        return Ok(ZetaCoord::Rational(Rat::new(p, q)));
    }
    let x: f64 = s.parse().map_err(|_| format!("bad number `{s}`"))?;
    Ok(ZetaCoord::Rational(rat(x)))
}

fn zeta_coord_to_string(z: &ZetaCoord) -> String {
    match z {
        ZetaCoord::Rational(r) => format!("{}/{}", r.numer(), r.denom()),
        ZetaCoord::PiTimes(r) => format!("{}pi/{}", r.numer(), r.denom()),
    }
}

/// A full experiment configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub system: SystemSpec,
    pub observable: ObservableSpec,
    pub n_ladder: Vec<u64>,
    pub ensemble: u64,
    pub seed: Option<u64>,
    pub horizon: f64,
    pub tau_max: f64,
    pub law: Option<LimitLaw>,
    pub out_dir: Option<PathBuf>,
    /// original text, hashed into artifacts
    pub source: String,
}

impl RunConfig {
    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        let raw = RawConfig::parse(text)?;
        let system = parse_system(&raw)?;
        let observable = parse_observable(&raw, system.dimension())?;
        raw.section("run")
            .ok_or_else(|| ConfigError::MissingSection("run".into()))?;
        let n_ladder: Vec<u64> = raw
            .require("run", "n")?
            .split(',')
            .map(|p| {
                p.trim().parse::<u64>().map_err(|e| ConfigError::BadValue {
                    section: "run".into(),
                    key: "n".into(),
                    msg: e.to_string(),
                })
            })
            .collect::<Result<_, _>>()?;
        let ensemble = raw.parse_or("run", "ensemble", 100u64)?;
        let seed = match raw.get("run", "seed") {
            None => None,
            Some(v) => Some(v.parse::<u64>().map_err(|e| ConfigError::BadValue {
                section: "run".into(),
                key: "seed".into(),
                msg: e.to_string(),
            })?),
        };
        let horizon = raw.parse_or("run", "horizon", 1.0f64)?;
        let tau_max = raw.parse_or("run", "tau_max", 10.0f64)?;
        let out_dir = raw.get("run", "out").map(PathBuf::from);
        let law = match raw.section("law") {
            None => None,
            Some(_) => Some(parse_law(&raw)?),
        };
        Ok(RunConfig {
            system,
            observable,
            n_ladder,
            ensemble,
            seed,
            horizon,
            tau_max,
            law,
            out_dir,
            source: text.to_string(),
        })
    }

    /// Canonical key-value rendering (system and observable blocks use the
    /// documented grammar).
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&system_to_text(&self.system));
        s.push_str(&observable_to_text(&self.observable));
        s.push_str("[run]\n");
        let ns: Vec<String> = self.n_ladder.iter().map(|n| n.to_string()).collect();
        s.push_str(&format!("n = {}\n", ns.join(",")));
        s.push_str(&format!("ensemble = {}\n", self.ensemble));
        if let Some(seed) = self.seed {
            s.push_str(&format!("seed = {seed}\n"));
        }
        s.push_str(&format!("horizon = {}\n", self.horizon));
        s.push_str(&format!("tau_max = {}\n", self.tau_max));
        s
    }
}

fn parse_system(raw: &RawConfig) -> Result<SystemSpec, ConfigError> {
    raw.section("system")
        .ok_or_else(|| ConfigError::MissingSection("system".into()))?;
    let kind = raw.require("system", "kind")?;
    let bad = |key: &str, msg: String| ConfigError::BadValue {
        section: "system".into(),
        key: key.into(),
        msg,
    };
    match kind {
        "digit_shift" => {
            let bases: Vec<u32> = raw
                .require("system", "bases")?
                .split(',')
                .map(|p| p.trim().parse::<u32>().map_err(|e| bad("bases", e.to_string())))
                .collect::<Result<_, _>>()?;
            SystemSpec::digit_shift(&bases).map_err(|e| bad("bases", e.to_string()))
        }
        "intermittent" => {
            let gamma: f64 = raw.parse_value("system", "gamma")?;
            SystemSpec::intermittent(gamma).map_err(|e| bad("gamma", e.to_string()))
        }
        "piecewise_affine" => {
            // branches = lo:hi:slope:offset;lo:hi:slope:offset;...
            let txt = raw.require("system", "branches")?;
            let mut branches = Vec::new();
            for part in txt.split(';') {
                let nums: Vec<f64> = part
                    .split(':')
                    .map(|p| p.trim().parse::<f64>().map_err(|e| bad("branches", e.to_string())))
                    .collect::<Result<_, _>>()?;
                if nums.len() != 4 {
                    return Err(bad("branches", "expected lo:hi:slope:offset".into()));
                }
                branches.push(crate::systems::AffineBranch::from_f64(
                    nums[0], nums[1], nums[2], nums[3],
                ));
            }
            SystemSpec::piecewise_affine(branches, crate::systems::MeasureKind::EmpiricalBirkhoff)
                .map_err(|e| bad("branches", e.to_string()))
        }
        other => Err(bad("kind", format!("unknown system kind `{other}`"))),
    }
}

fn system_to_text(spec: &SystemSpec) -> String {
    use crate::systems::MapKind;
    use num::ToPrimitive;
    let mut s = String::from("[system]\n");
    match &spec.kind {
        MapKind::DigitShift { bases } => {
            s.push_str("kind = digit_shift\n");
            let b: Vec<String> = bases.iter().map(|x| x.to_string()).collect();
            s.push_str(&format!("bases = {}\n", b.join(",")));
        }
        MapKind::PiecewiseAffine { branches } => {
            s.push_str("kind = piecewise_affine\n");
            let parts: Vec<String> = branches
                .iter()
                .map(|b| {
                    format!(
                        "{}:{}:{}:{}",
                        b.lo.to_f64().unwrap(),
                        b.hi.to_f64().unwrap(),
                        b.slope.to_f64().unwrap(),
                        b.offset.to_f64().unwrap()
                    )
                })
                .collect();
            s.push_str(&format!("branches = {}\n", parts.join(";")));
        }
        MapKind::Intermittent { gamma } => {
            s.push_str("kind = intermittent\n");
            s.push_str(&format!("gamma = {gamma}\n"));
        }
    }
    s
}

fn parse_observable(raw: &RawConfig, dim: usize) -> Result<ObservableSpec, ConfigError> {
    raw.section("observable")
        .ok_or_else(|| ConfigError::MissingSection("observable".into()))?;
    let bad = |key: &str, msg: String| ConfigError::BadValue {
        section: "observable".into(),
        key: key.into(),
        msg,
    };
    let g = raw.require("observable", "g")?;
    if g == "two_site" {
        return Ok(ObservableSpec::two_site());
    }
    let zeta: Vec<ZetaCoord> = raw
        .require("observable", "zeta")?
        .split(',')
        .map(|p| parse_zeta_coord(p).map_err(|e| bad("zeta", e)))
        .collect::<Result<_, _>>()?;
    if zeta.len() != dim {
        return Err(bad("zeta", format!("expected {dim} coordinates")));
    }
    let kind = match g {
        "g1" => GKind::G1,
        "g2" => GKind::G2 { a: raw.parse_value("observable", "a")? },
        "g3" => GKind::G3 {
            a: raw.parse_value("observable", "a")?,
            c: raw.parse_value("observable", "c")?,
        },
        other => return Err(bad("g", format!("unknown observable kind `{other}`"))),
    };
    ObservableSpec::new(zeta, kind).map_err(|e| bad("g", e.to_string()))
}

fn observable_to_text(obs: &ObservableSpec) -> String {
    let mut s = String::from("[observable]\n");
    match obs.kind {
        GKind::TwoSite => {
            s.push_str("g = two_site\n");
            return s;
        }
        GKind::G1 => s.push_str("g = g1\n"),
        GKind::G2 { a } => s.push_str(&format!("g = g2\na = {a}\n")),
        GKind::G3 { a, c } => s.push_str(&format!("g = g3\na = {a}\nc = {c}\n")),
    }
    let zs: Vec<String> = obs.zeta.iter().map(zeta_coord_to_string).collect();
    s.push_str(&format!("zeta = {}\n", zs.join(",")));
    s
}

fn parse_law(raw: &RawConfig) -> Result<LimitLaw, ConfigError> {
    let bad = |key: &str, msg: String| ConfigError::BadValue {
        section: "law".into(),
        key: key.into(),
        msg,
    };
    let kind = raw.require("law", "kind")?;
    let law = match kind {
        "poisson2d" => LimitLaw::Poisson2D,
        "compound1d" => LimitLaw::CompoundPoisson1D {
            theta: raw.parse_value("law", "theta")?,
            tau: raw.parse_value("law", "tau")?,
        },
        "stacked_geometric" => LimitLaw::stacked_geometric(
            raw.parse_value("law", "alpha")?,
            raw.parse_value("law", "d")?,
        ),
        "poisson_multi" => LimitLaw::PoissonMultiD { d: raw.parse_value("law", "d")? },
        "stacked_linear" => {
            let m = parse_matrix(raw).map_err(|e| bad("matrix", e))?;
            LimitLaw::stacked_linear(m)
        }
        "ndag" => {
            let m = parse_matrix(raw).map_err(|e| bad("matrix", e))?;
            LimitLaw::n_dag(m)
        }
        "hat" => LimitLaw::HatN { beta_plus: raw.parse_value("law", "beta_plus")? },
        "double_hat" => LimitLaw::DoubleHatN,
        other => return Err(bad("kind", format!("unknown law `{other}`"))),
    };
    law.validate().map_err(|e| bad("kind", e.to_string()))?;
    Ok(law)
}

fn parse_matrix(raw: &RawConfig) -> Result<[[f64; 2]; 2], String> {
    let txt = raw
        .get("law", "matrix")
        .ok_or_else(|| "missing matrix = a,b;c,d".to_string())?;
    let rows: Vec<&str> = txt.split(';').collect();
    if rows.len() != 2 {
        return Err("matrix needs two rows `a,b;c,d`".into());
    }
    let mut m = [[0.0; 2]; 2];
    for (i, row) in rows.iter().enumerate() {
        let cols: Vec<&str> = row.split(',').collect();
        if cols.len() != 2 {
            return Err("matrix rows need two entries".into());
        }
        for (j, c) in cols.iter().enumerate() {
            m[i][j] = c.trim().parse().map_err(|_| format!("bad entry `{c}`"))?;
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
[system]
kind = digit_shift
bases = 2

[observable]
g = g1
zeta = 0

[run]
n = 10000
ensemble = 10
seed = 42
";

    #[test]
    fn minimal_config_parses() {
        let cfg = RunConfig::from_text(MINIMAL).unwrap();
        assert_eq!(cfg.system, SystemSpec::doubling());
        assert_eq!(cfg.n_ladder, vec![10_000]);
        assert_eq!(cfg.ensemble, 10);
        assert_eq!(cfg.seed, Some(42));
        assert_eq!(cfg.tau_max, 10.0);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad = "[system\nkind = digit_shift\n";
        match RawConfig::parse(bad) {
            Err(ConfigError::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("{other:?}"),
        }
        let bad2 = "[system]\nkind digit_shift\n";
        match RawConfig::parse(bad2) {
            Err(ConfigError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zeta_grammar() {
        assert_eq!(
            parse_zeta_coord("pi/16").unwrap(),
            ZetaCoord::PiTimes(crate::interval::ratio(1, 16))
        );
        assert_eq!(
            parse_zeta_coord("3pi/16").unwrap(),
            ZetaCoord::PiTimes(crate::interval::ratio(3, 16))
        );
        assert_eq!(
            parse_zeta_coord("1/3").unwrap(),
            ZetaCoord::Rational(crate::interval::ratio(1, 3))
        );
        assert!(parse_zeta_coord("x").is_err());
    }

    #[test]
    fn law_block_round_trip() {
        let text = format!("{MINIMAL}\n[law]\nkind = stacked_geometric\nalpha = 2.0\nd = 1\n");
        let cfg = RunConfig::from_text(&text).unwrap();
        assert_eq!(cfg.law, Some(LimitLaw::stacked_geometric(2.0, 1)));
    }

    #[test]
    fn inconsistent_law_is_rejected() {
        let text = format!("{MINIMAL}\n[law]\nkind = hat\nbeta_plus = 0.5\n");
        assert!(RunConfig::from_text(&text).is_err());
    }

    #[test]
    fn torus_config() {
        let text = "\
[system]
kind = digit_shift
bases = 2,3

[observable]
g = g1
zeta = 0,0

[run]
n = 1000
seed = 7
";
        let cfg = RunConfig::from_text(text).unwrap();
        assert_eq!(cfg.system, SystemSpec::torus_2x3());
        assert_eq!(cfg.observable.zeta.len(), 2);
    }

    #[test]
    fn canonical_text_round_trips() {
        let cfg = RunConfig::from_text(MINIMAL).unwrap();
        let text = cfg.to_text();
        let cfg2 = RunConfig::from_text(&text).unwrap();
        assert_eq!(cfg.system, cfg2.system);
        assert_eq!(cfg.observable, cfg2.observable);
        assert_eq!(cfg.seed, cfg2.seed);
    }

    #[test]
    fn two_site_config() {
        let text = "\
[system]
kind = digit_shift
bases = 3

[observable]
g = two_site

[run]
n = 1000
seed = 1
";
        let cfg = RunConfig::from_text(text).unwrap();
        assert_eq!(cfg.observable, ObservableSpec::two_site());
    }
}

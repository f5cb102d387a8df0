//! Versioned JSON run reports (`report_v1`).

use crate::empirical::VoidEstimate;
use crate::stats::GofReport;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const SCHEMA: &str = "report_v1";

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ReportItem {
    Scalar {
        name: String,
        value: f64,
    },
    Estimate {
        name: String,
        value: f64,
        std_err: f64,
    },
    Gof {
        name: String,
        report: GofReport,
    },
    Void {
        name: String,
        p_hat: f64,
        wilson_lo: f64,
        wilson_hi: f64,
        analytic: f64,
        runs: u64,
        passed: bool,
    },
    Check {
        name: String,
        passed: bool,
        detail: String,
    },
}

impl ReportItem {
    pub fn passed(&self) -> bool {
        match self {
            ReportItem::Scalar { .. } | ReportItem::Estimate { .. } => true,
            ReportItem::Gof { report, .. } => report.passed(),
            ReportItem::Void { passed, .. } | ReportItem::Check { passed, .. } => *passed,
        }
    }

    pub fn void(name: &str, est: &VoidEstimate, analytic: f64, passed: bool) -> Self {
        ReportItem::Void {
            name: name.to_string(),
            p_hat: est.p_hat,
            wilson_lo: est.wilson_lo,
            wilson_hi: est.wilson_hi,
            analytic,
            runs: est.runs,
            passed,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: String,
    pub tool: String,
    pub version: String,
    pub config_sha256: String,
    pub seed: u64,
    pub items: Vec<ReportItem>,
    pub artifacts: Vec<String>,
    pub passed: bool,
}

impl RunReport {
    pub fn new(config_text: &str, seed: u64) -> Self {
        RunReport {
            schema: SCHEMA.to_string(),
            tool: "repp-lab".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_sha256: sha256_hex(config_text.as_bytes()),
            seed,
            items: Vec::new(),
            artifacts: Vec::new(),
            passed: true,
        }
    }

    pub fn push(&mut self, item: ReportItem) {
        self.passed &= item.passed();
        self.items.push(item);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let out = h.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_round_trips_and_tracks_failures() {
        let mut r = RunReport::new("config text", 7);
        r.push(ReportItem::Scalar { name: "theta".into(), value: 0.5 });
        assert!(r.passed);
        r.push(ReportItem::Check {
            name: "bound".into(),
            passed: false,
            detail: "exceeded".into(),
        });
        assert!(!r.passed);
        let back = RunReport::from_json(&r.to_json()).unwrap();
        assert_eq!(back.items.len(), 2);
        assert!(!back.passed);
        assert_eq!(back.config_sha256.len(), 64);
    }

    #[test]
    fn identical_configs_hash_identically() {
        assert_eq!(
            RunReport::new("abc", 0).config_sha256,
            RunReport::new("abc", 1).config_sha256
        );
        assert_ne!(
            RunReport::new("abc", 0).config_sha256,
            RunReport::new("abd", 0).config_sha256
        );
    }
}

//! Statistical verification suites: invariance, exchangeability, canonical
//! form round-trips, bound sweeps, and the pushforward correspondence, each
//! seeded and reproducible, with in-tree negative controls (statistical
//! tests that cannot fail are not tests).

mod report;
pub mod stats;
mod suites;

pub use report::{CaseReport, SuiteReport};
pub use suites::{count_unseparated_pairs, enumerate_signatures, run_suite};

use serde::{Deserialize, Serialize};

use crate::ensemble::Signature;
use crate::error::{Error, Result};
use crate::field::FieldSpec;

/// Which verification suite to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SuiteKind {
    Canonical,
    Charfn,
    Orbital,
    GlMat,
    Correspondence,
    Invariance,
    Exchangeability,
}

impl SuiteKind {
    pub fn parse(name: &str) -> Option<SuiteKind> {
        match name {
            "canonical" => Some(SuiteKind::Canonical),
            "charfn" => Some(SuiteKind::Charfn),
            "orbital" => Some(SuiteKind::Orbital),
            "glmat" => Some(SuiteKind::GlMat),
            "correspondence" => Some(SuiteKind::Correspondence),
            "invariance" => Some(SuiteKind::Invariance),
            "exchangeability" => Some(SuiteKind::Exchangeability),
            _ => None,
        }
    }
}

fn default_trials() -> u64 {
    100_000
}
fn default_samples() -> u64 {
    10_000
}
fn default_streams() -> u64 {
    16
}
fn default_corner() -> usize {
    4
}
fn default_exponent_lo() -> i64 {
    -1
}
fn default_exponent_hi() -> i64 {
    2
}
fn default_scales() -> Vec<i64> {
    vec![0, 1]
}
fn default_matrices() -> u64 {
    100
}
fn default_congruence_checks() -> u64 {
    5
}
fn default_significance() -> f64 {
    0.01
}
fn default_true() -> bool {
    true
}

/// Grid and budget configuration for one suite run. Empty grid vectors mean
/// the suite's default grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub field: FieldSpec,
    pub suite: SuiteKind,
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default = "default_samples")]
    pub samples: u64,
    #[serde(default = "default_streams")]
    pub streams: u64,
    #[serde(default = "default_corner")]
    pub corner: usize,
    #[serde(default)]
    pub signatures: Vec<Signature>,
    #[serde(default)]
    pub ells: Vec<i64>,
    #[serde(default)]
    pub block_counts: Vec<usize>,
    #[serde(default = "default_exponent_lo")]
    pub exponent_lo: i64,
    #[serde(default = "default_exponent_hi")]
    pub exponent_hi: i64,
    #[serde(default = "default_scales")]
    pub scales: Vec<i64>,
    #[serde(default = "default_matrices")]
    pub matrices_per_case: u64,
    #[serde(default = "default_congruence_checks")]
    pub congruence_checks: u64,
    #[serde(default = "default_significance")]
    pub significance: f64,
    #[serde(default = "default_true")]
    pub include_controls: bool,
}

impl ExperimentConfig {
    pub fn new(field: FieldSpec, suite: SuiteKind, seed: u64) -> Self {
        ExperimentConfig {
            field,
            suite,
            seed,
            trials: default_trials(),
            samples: default_samples(),
            streams: default_streams(),
            corner: default_corner(),
            signatures: Vec::new(),
            ells: Vec::new(),
            block_counts: Vec::new(),
            exponent_lo: default_exponent_lo(),
            exponent_hi: default_exponent_hi(),
            scales: default_scales(),
            matrices_per_case: default_matrices(),
            congruence_checks: default_congruence_checks(),
            significance: default_significance(),
            include_controls: default_true(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 1_000 {
            return Err(Error::InvalidArgument(format!(
                "trial count {} below the floor of 1000",
                self.trials
            )));
        }
        if self.samples < 1_000 {
            return Err(Error::InvalidArgument(format!(
                "sample count {} below the floor of 1000",
                self.samples
            )));
        }
        if self.exponent_lo > self.exponent_hi {
            return Err(Error::InvalidArgument("empty exponent range".into()));
        }
        let prec = self.field.precision as i64;
        if self.exponent_lo.abs() > prec || self.exponent_hi.abs() > prec {
            return Err(Error::InvalidArgument(format!(
                "exponent range [{}, {}] escapes the precision window {}",
                self.exponent_lo, self.exponent_hi, prec
            )));
        }
        if !(self.significance > 0.0 && self.significance < 1.0) {
            return Err(Error::InvalidArgument("significance must be in (0, 1)".into()));
        }
        if self.corner < 2 || !self.corner.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "corner {} must be even and at least 2",
                self.corner
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_and_validation() {
        let spec = FieldSpec::padic(3, 24).unwrap();
        let cfg = ExperimentConfig::new(spec, SuiteKind::Orbital, 7);
        assert!(cfg.validate().is_ok());
        let mut bad = cfg.clone();
        bad.trials = 10;
        assert!(bad.validate().is_err());
        let mut bad = cfg.clone();
        bad.exponent_hi = 40;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn config_json_round_trip_with_defaults() {
        let json = r#"{
            "field": {"kind": "padic", "p": 3, "prec": 24},
            "suite": "orbital",
            "seed": 7
        }"#;
        let cfg: ExperimentConfig = serde_json::from_str(json).unwrap();
        assert_eq!(cfg.trials, 100_000);
        assert_eq!(cfg.streams, 16);
        assert_eq!(cfg.suite, SuiteKind::Orbital);
        assert!(cfg.validate().is_ok());
    }
}

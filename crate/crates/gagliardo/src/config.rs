//! Run configuration shared by the command-line front end and the report
//! writers.
//!
//! One JSON document describes a run. The same document, re-serialized in
//! canonical form, is hashed and echoed into every output file so that any
//! artifact can be traced back to the exact inputs that produced it.
//! Execution details that do not affect the numbers (thread count, output
//! directory) deliberately live outside this document: two runs of the
//! same configuration must produce byte-identical artifacts.

use crate::constants::{FracParams, OMEGA_N_CONVENTION};
use crate::error::{Error, Result};
use crate::experiments::Placement;
use crate::geometry::Domain;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

/// Named conventions the numbers depend on. Recorded rather than assumed
/// so a reader of an artifact can reproduce constants without guessing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Conventions {
    /// Which measure the symbol omega_n denotes in the sharp-constant
    /// formula. Only the convention recorded in the constants module is
    /// accepted.
    pub omega_n: String,
}

impl Default for Conventions {
    fn default() -> Self {
        Conventions {
            omega_n: OMEGA_N_CONVENTION.to_string(),
        }
    }
}

/// Everything a command needs, minus execution details.
///
/// All fields are optional in the JSON document; each command checks for
/// the ones it requires and reports the missing field by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// The command this configuration was run with; stamped by the front
    /// end so the echo in each artifact is self-contained.
    pub command: Option<String>,
    pub domain: Option<Domain>,
    pub params: Option<FracParams>,
    /// Grid spacing. Commands that sweep over epsilon default to the
    /// smallest epsilon over 16 when absent.
    pub grid_h: Option<f64>,
    /// Bump radii for the sweep, largest first after normalization.
    pub epsilons: Vec<f64>,
    pub placement: Placement,
    /// When set, the sweep command exits with status 2 unless at least
    /// one epsilon is flagged.
    pub expect_reversal: bool,
    pub seed: u64,
    /// Path of the input grid function for commands that read one.
    pub input: Option<String>,
    /// Hull override for full-space energies; defaults per command.
    pub hull: Option<Domain>,
    /// Direction count for quadrature-backed kernels in n >= 2.
    pub directions: Option<usize>,
    /// Interior sample points for the pointwise-bound command.
    pub sample_points: usize,
    /// Iteration budget for the descent command.
    pub iterations: usize,
    /// Initial step for the descent command.
    pub step: f64,
    pub conventions: Conventions,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: None,
            domain: None,
            params: None,
            grid_h: None,
            epsilons: vec![0.2, 0.1, 0.05, 0.025],
            placement: Placement::Boundary,
            expect_reversal: false,
            seed: 0,
            input: None,
            hull: None,
            directions: None,
            sample_points: 50,
            iterations: 200,
            step: 0.1,
            conventions: Conventions::default(),
        }
    }
}

impl RunConfig {
    /// Parse a JSON document and check the cross-field invariants.
    pub fn from_json_str(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Read and parse a configuration file.
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)?;
        RunConfig::from_json_str(&text)
    }

    /// Cross-field invariants common to all commands.
    pub fn validate(&self) -> Result<()> {
        if let Some(p) = &self.params {
            p.validate()?;
        }
        if let Some(d) = &self.domain {
            d.validate()?;
            if let Some(p) = &self.params {
                if d.dim() != p.n {
                    return Err(Error::InvalidInput(format!(
                        "domain dimension {} does not match params n = {}",
                        d.dim(),
                        p.n
                    )));
                }
            }
        }
        if let Some(h) = self.grid_h {
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "grid_h must be a positive number, got {h}"
                )));
            }
        }
        for &e in &self.epsilons {
            if !(e > 0.0 && e < 0.5) {
                return Err(Error::InvalidInput(format!(
                    "epsilons must lie in (0, 1/2), got {e}"
                )));
            }
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::InvalidInput(format!(
                "step must be a positive number, got {}",
                self.step
            )));
        }
        if self.conventions.omega_n != OMEGA_N_CONVENTION {
            return Err(Error::InvalidInput(format!(
                "unknown omega_n convention {:?}; this build implements {:?}",
                self.conventions.omega_n, OMEGA_N_CONVENTION
            )));
        }
        Ok(())
    }

    /// Accessors for fields a command cannot run without.
    pub fn require_domain(&self) -> Result<&Domain> {
        self.domain
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("configuration is missing \"domain\"".into()))
    }

    pub fn require_params(&self) -> Result<&FracParams> {
        self.params
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("configuration is missing \"params\"".into()))
    }

    pub fn require_input(&self) -> Result<&str> {
        self.input
            .as_deref()
            .ok_or_else(|| Error::InvalidInput("configuration is missing \"input\"".into()))
    }

    /// Canonical serialization: fixed field order, shortest round-trip
    /// floats. Hash input and audit echo are both derived from this.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("configuration serialization cannot fail")
    }

    /// First 16 hex digits of the SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical_json().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_the_documented_sweep() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.epsilons, vec![0.2, 0.1, 0.05, 0.025]);
        assert_eq!(cfg.placement, Placement::Boundary);
        assert_eq!(cfg.sample_points, 50);
        assert!(!cfg.expect_reversal);
        cfg.validate().unwrap();
    }

    #[test]
    fn parse_rejects_unknown_fields_and_bad_values() {
        assert!(RunConfig::from_json_str("{\"no_such_field\": 1}").is_err());
        assert!(RunConfig::from_json_str("{\"epsilons\": [0.7]}").is_err());
        assert!(RunConfig::from_json_str("{\"step\": -1.0}").is_err());
        let mismatched = r#"{
            "domain": {"shape": "interval", "a": -1.0, "b": 1.0},
            "params": {"n": 2, "sigma": 0.6, "p": 2.0}
        }"#;
        assert!(RunConfig::from_json_str(mismatched).is_err());
        let wrong_convention = r#"{"conventions": {"omega_n": "unit-ball-volume"}}"#;
        assert!(RunConfig::from_json_str(wrong_convention).is_err());
    }

    #[test]
    fn parse_round_trips_a_full_document() {
        let text = r#"{
            "command": "counterexample",
            "domain": {"shape": "interval", "a": -1.0, "b": 1.0},
            "params": {"n": 1, "sigma": 0.6, "p": 2.0},
            "epsilons": [0.2, 0.1],
            "placement": {"mode": "explicit", "point": [0.5]},
            "expect_reversal": true,
            "seed": 7
        }"#;
        let cfg = RunConfig::from_json_str(text).unwrap();
        assert_eq!(cfg.command.as_deref(), Some("counterexample"));
        assert_eq!(cfg.placement, Placement::Explicit { point: vec![0.5] });
        assert!(cfg.expect_reversal);
        let again = RunConfig::from_json_str(&cfg.canonical_json()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = RunConfig::default();
        let b = RunConfig::default();
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 16);
        let mut c = RunConfig::default();
        c.seed = 1;
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn missing_required_fields_are_named() {
        let cfg = RunConfig::default();
        let msg = format!("{}", cfg.require_domain().unwrap_err());
        assert!(msg.contains("domain"), "message: {msg}");
        let msg = format!("{}", cfg.require_input().unwrap_err());
        assert!(msg.contains("input"), "message: {msg}");
    }
}

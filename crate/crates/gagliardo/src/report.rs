//! Artifact writers: CSV and JSON renderings of run results.
//!
//! Every artifact embeds the configuration hash, the library version and
//! the omega_n convention, so a stray file on disk can always be traced
//! back to the run that produced it. All floats print with the shortest
//! representation that round-trips, and row order is the deterministic
//! order of the underlying reports, so identical configurations produce
//! byte-identical files regardless of thread count.

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::experiments::{DescentReport, RatioSuite, SweepReport};
use crate::seminorm::EnergyResult;
use serde::Serialize;
use std::path::Path;

/// Version of the artifact layouts in this module. Bumped when a column
/// or field changes meaning, not when new ones are appended.
pub const SCHEMA_VERSION: u32 = 1;

/// Library version baked into artifacts.
pub fn library_version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}

/// The stamp lines shared by every CSV artifact.
fn stamp(cfg: &RunConfig) -> String {
    format!(
        "# config_hash={}\n# version={}\n# omega_n_convention={}\n",
        cfg.hash(),
        library_version(),
        cfg.conventions.omega_n
    )
}

/// Stamp lines in the form the profile writer expects.
pub fn stamp_comments(cfg: &RunConfig) -> Vec<String> {
    vec![
        format!("config_hash={}", cfg.hash()),
        format!("version={}", library_version()),
        format!("omega_n_convention={}", cfg.conventions.omega_n),
    ]
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    version: &'a str,
    config_hash: String,
    config: &'a RunConfig,
    report: &'a T,
}

/// JSON artifact: metadata envelope around any serializable report.
pub fn json_artifact<T: Serialize>(cfg: &RunConfig, report: &T) -> Result<String> {
    let envelope = Envelope {
        schema_version: SCHEMA_VERSION,
        version: library_version(),
        config_hash: cfg.hash(),
        config: cfg,
        report,
    };
    let mut text = serde_json::to_string_pretty(&envelope)?;
    text.push('\n');
    Ok(text)
}

/// Sweep CSV: one row per epsilon, largest first. Slope fits and
/// warnings live in the JSON artifact only.
pub fn sweep_csv(cfg: &RunConfig, report: &SweepReport) -> String {
    let mut out = stamp(cfg);
    out.push_str(
        "epsilon,h,lhs,lhs_error,rhs,rhs_error,cross_domain,cross_domain_error,\
         cross_symmetrized,cross_symmetrized_error,flagged,flag_scale\n",
    );
    for r in &report.records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.epsilon,
            r.h,
            r.lhs,
            r.lhs_error,
            r.rhs,
            r.rhs_error,
            r.cross_domain,
            r.cross_domain_error,
            r.cross_symmetrized,
            r.cross_symmetrized_error,
            r.flagged,
            r.flag_scale
        ));
    }
    out
}

/// Ratio-suite CSV: one row per case, in corpus order.
pub fn ratio_csv(cfg: &RunConfig, suite: &RatioSuite) -> String {
    let mut out = stamp(cfg);
    out.push_str("case,ratio\n");
    for (i, r) in suite.ratios.iter().enumerate() {
        out.push_str(&format!("{i},{r}\n"));
    }
    out
}

/// One evaluated pointwise bound.
#[derive(Debug, Clone, Serialize)]
pub struct HardySample {
    pub point: Vec<f64>,
    /// Tail kernel over the full complement.
    pub lhs: f64,
    /// First-exit overestimate.
    pub rhs: f64,
}

/// Pointwise-bound CSV: one row per sample point, one column per
/// coordinate.
pub fn hardy_csv(cfg: &RunConfig, samples: &[HardySample]) -> Result<String> {
    let n = samples
        .first()
        .map(|s| s.point.len())
        .ok_or_else(|| Error::InvalidInput("no sample points to report".into()))?;
    let mut out = stamp(cfg);
    for axis in 0..n {
        out.push_str(&format!("x{axis},"));
    }
    out.push_str("lhs,rhs\n");
    for s in samples {
        if s.point.len() != n {
            return Err(Error::InvalidInput(
                "sample points mix dimensions in one report".into(),
            ));
        }
        for c in &s.point {
            out.push_str(&format!("{c},"));
        }
        out.push_str(&format!("{},{}\n", s.lhs, s.rhs));
    }
    Ok(out)
}

/// Descent CSV: accepted quotient per accepted step, step 0 being the
/// starting quotient.
pub fn descent_csv(cfg: &RunConfig, report: &DescentReport) -> String {
    let mut out = stamp(cfg);
    out.push_str("step,quotient\n");
    for (i, q) in report.trace.iter().enumerate() {
        out.push_str(&format!("{i},{q}\n"));
    }
    out
}

/// Serializable slice of a descent run. The final iterate itself ships
/// as a grid-function file, not through JSON.
#[derive(Debug, Clone, Serialize)]
pub struct DescentSummary {
    pub trace: Vec<f64>,
    pub final_quotient: f64,
    pub final_step: f64,
    pub halvings: u32,
    /// Full-space sharp constant under the recorded convention, for
    /// comparison against the final quotient.
    pub fullspace_constant: f64,
}

impl DescentSummary {
    pub fn new(report: &DescentReport, fullspace_constant: f64) -> DescentSummary {
        DescentSummary {
            trace: report.trace.clone(),
            final_quotient: *report
                .trace
                .last()
                .expect("descent trace always holds the starting quotient"),
            final_step: report.final_step,
            halvings: report.halvings,
            fullspace_constant,
        }
    }
}

/// Energy result stripped of its timing, which varies between otherwise
/// identical runs. Artifacts must depend on the configuration alone.
pub fn energy_for_artifact(result: &EnergyResult) -> EnergyResult {
    let mut copy = result.clone();
    copy.timing_seconds = None;
    copy
}

/// Write text, creating parent directories as needed.
pub fn write_text(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, content)?;
    Ok(())
}

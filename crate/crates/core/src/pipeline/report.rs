//! Audit report: canonical JSON with a fixed key order.
//!
//! Keys appear in declaration order and unknown keys are rejected on load, so
//! `parse -> emit` reproduces the file byte for byte. The JSON Schema in
//! `schema/report.schema.json` describes the same layout for external tools.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::error::{Error, Result};
use crate::stats::{FailureBand, MinEntropyEstimate, TestResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

impl Default for ToolInfo {
    fn default() -> Self {
        ToolInfo {
            name: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameRecord {
    pub frame_index: u64,
    /// Occupied urns `n_f`.
    pub occupied: u64,
    /// Urn count `N`.
    pub urns: u64,
    pub bits_emitted: u64,
    pub duplicates_collapsed: u64,
    pub spots_off_mask: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Aggregate {
    pub frame_count: u64,
    pub total_bits: u64,
    pub bytes_written: u64,
    pub withheld_bits: u64,
    /// The withheld trailing bits, as `0`/`1` characters.
    pub withheld_pattern: String,
    pub mean_bits_per_frame: f64,
    pub zero_length_frames: u64,
    pub duplicates_collapsed: u64,
    pub spots_off_mask: u64,
    /// Mean occupancy `q = sum n_f / sum N`.
    pub occupancy: f64,
    /// `h2(q)`, the per-urn efficiency ceiling.
    pub binary_entropy: f64,
    /// Achieved `sum bits / sum N`.
    pub efficiency: f64,
}

/// Failure counts of one test family over fixed-length blocks of the stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyCalibration {
    pub name: String,
    pub trials: u64,
    pub failures_99: u64,
    pub failures_999: u64,
    pub band_99: FailureBand,
    pub band_999: FailureBand,
    /// Kolmogorov-Smirnov p-value of the block p-values against uniform.
    pub ks_p_value: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Calibration {
    pub block_bits: u64,
    pub blocks: u64,
    pub families: Vec<FamilyCalibration>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntropySummary {
    pub empirical_min_entropy: f64,
    pub expected: MinEntropyEstimate,
    /// Empirical value within three expected sigma of the model.
    pub compatible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditReport {
    pub tool: ToolInfo,
    pub config: RunConfig,
    pub frames: Vec<FrameRecord>,
    pub aggregate: Aggregate,
    pub tests: Vec<TestResult>,
    pub calibration: Option<Calibration>,
    pub entropy: Option<EntropySummary>,
    pub warnings: Vec<String>,
}

impl AuditReport {
    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self).map_err(|e| Error::Report(e.to_string()))?;
        text.push('\n');
        Ok(text)
    }

    /// Parses and validates a report: structure first, then internal consistency.
    pub fn from_json(text: &str) -> Result<Self> {
        let report: AuditReport = serde_json::from_str(text).map_err(|e| Error::Report(e.to_string()))?;
        report.check_consistency()?;
        Ok(report)
    }

    /// Aggregates must agree with a recomputation from the per-frame records.
    pub fn check_consistency(&self) -> Result<()> {
        let a = &self.aggregate;
        let fail = |m: String| Err(Error::Report(m));
        if a.frame_count != self.frames.len() as u64 {
            return fail(format!(
                "frame_count {} but {} frame records",
                a.frame_count,
                self.frames.len()
            ));
        }
        let bits: u64 = self.frames.iter().map(|f| f.bits_emitted).sum();
        if a.total_bits != bits {
            return fail(format!("total_bits {} but frames sum to {bits}", a.total_bits));
        }
        if a.bytes_written * 8 + a.withheld_bits != a.total_bits {
            return fail("bytes_written * 8 + withheld_bits != total_bits".into());
        }
        if a.withheld_bits >= 8 || a.withheld_pattern.len() as u64 != a.withheld_bits {
            return fail("withheld bits must be a partial byte matching its pattern".into());
        }
        let zero = self.frames.iter().filter(|f| f.bits_emitted == 0).count() as u64;
        if a.zero_length_frames != zero {
            return fail(format!(
                "zero_length_frames {} but {zero} records",
                a.zero_length_frames
            ));
        }
        if self.frames.windows(2).any(|w| w[0].frame_index >= w[1].frame_index) {
            return fail("frame records must be ordered by frame_index".into());
        }
        Ok(())
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        AuditReport::from_json(&text)
    }
}

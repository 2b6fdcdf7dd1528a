//! Serialized audit artifacts: canonical JSON reports, before/after
//! comparisons, and the SVG renderers in [`svg`].
//!
//! Reports are emitted in a canonical form — alphabetically sorted keys,
//! fixed field names, disparity values already quantized to six decimals —
//! so that re-running a pipeline on identical inputs produces byte-identical
//! files that diff cleanly in CI.

pub mod svg;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::disparity::{
    build_sunburst, disparity_table, tally_histogram, DisparityRecord, SunburstNode, Tier,
    TierHistogram,
};
use crate::error::{Error, Result};
use crate::subgroups::{coverage_report, CoverageReport, Pattern};

/// Version stamped into every report's metadata block.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance block carried by every audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub tool_version: String,
    /// Caller-supplied identifier of the reference dataset (usually a path).
    pub real_id: String,
    /// Identifier of the dataset under audit.
    pub synthetic_id: String,
    pub real_rows: usize,
    pub synthetic_rows: usize,
    /// Attribute set of the disparity table, histogram, and coverage report.
    pub attributes: Vec<String>,
    /// Ring order of the sunburst, innermost first.
    pub ring_order: Vec<String>,
    /// Coverage threshold.
    pub tau: usize,
    /// Resolved-configuration echo (flag name → value as given).
    pub config: BTreeMap<String, String>,
}

/// A complete audit of one synthetic dataset against its reference.
///
/// Self-consistent by construction: `tier_histogram` is the tally of
/// `disparity_table`, and sunburst nodes at full depth agree with the table
/// when the ring order equals the attribute set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub metadata: ReportMetadata,
    pub disparity_table: Vec<DisparityRecord>,
    pub tier_histogram: TierHistogram,
    pub sunburst: SunburstNode,
    /// Coverage of the audited (synthetic) dataset at `tau`.
    pub coverage: CoverageReport,
}

/// Everything that shapes an audit besides the two datasets.
#[derive(Debug, Clone)]
pub struct AuditOptions {
    pub real_id: String,
    pub synthetic_id: String,
    /// Attributes for the table, histogram, and coverage; `None` means the
    /// schema's protected columns.
    pub attributes: Option<Vec<String>>,
    /// Sunburst ring order; `None` means [`svg::default_ring_order`].
    pub ring_order: Option<Vec<String>>,
    pub tau: usize,
    pub config: BTreeMap<String, String>,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions {
            real_id: "real".into(),
            synthetic_id: "synthetic".into(),
            attributes: None,
            ring_order: None,
            tau: 150,
            config: BTreeMap::new(),
        }
    }
}

/// Builds the full audit of `synthetic` against `real`.
pub fn build_audit(
    real: &Dataset,
    synthetic: &Dataset,
    options: &AuditOptions,
) -> Result<AuditReport> {
    let attributes = match &options.attributes {
        Some(a) => a.clone(),
        None => real.schema.protected_columns(),
    };
    if attributes.is_empty() {
        return Err(Error::InvalidConfig(
            "no audit attributes: none given and the schema marks no protected columns".into(),
        ));
    }
    let ring_order = match &options.ring_order {
        Some(r) => r.clone(),
        None => svg::default_ring_order(&real.schema),
    };
    let table = disparity_table(real, synthetic, &attributes)?;
    let tier_histogram = tally_histogram(&table);
    let sunburst = build_sunburst(real, synthetic, &ring_order)?;
    let coverage = coverage_report(synthetic, options.tau, &attributes)?;
    Ok(AuditReport {
        metadata: ReportMetadata {
            tool_version: TOOL_VERSION.into(),
            real_id: options.real_id.clone(),
            synthetic_id: options.synthetic_id.clone(),
            real_rows: real.len(),
            synthetic_rows: synthetic.len(),
            attributes,
            ring_order,
            tau: options.tau,
            config: options.config.clone(),
        },
        disparity_table: table,
        tier_histogram,
        sunburst,
        coverage,
    })
}

/// Canonical JSON for any serializable value: keys sorted alphabetically,
/// pretty-printed, trailing newline. `serde_json`'s value map is ordered,
/// so routing through [`serde_json::Value`] sorts object keys.
pub fn canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value)?;
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

/// Writes the canonical JSON form of `report` to `path`.
pub fn emit_audit_json(report: &AuditReport, path: &Path) -> Result<()> {
    fs::write(path, canonical_json(report)?)?;
    Ok(())
}

/// Parses a report previously produced by [`emit_audit_json`].
pub fn parse_audit_json(text: &str) -> Result<AuditReport> {
    Ok(serde_json::from_str(text)?)
}

pub fn load_audit_json(path: &Path) -> Result<AuditReport> {
    parse_audit_json(&fs::read_to_string(path)?)
}

/// One tier's before/after counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TierDelta {
    pub tier: Tier,
    pub before: usize,
    pub after: usize,
    /// `after - before`.
    pub delta: i64,
}

/// One subgroup whose tier changed between the two audits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TierTransition {
    pub pattern: Pattern,
    pub before: Tier,
    pub after: Tier,
}

/// Before/after movement between two audits over the same attribute set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub attributes: Vec<String>,
    pub before: TierHistogram,
    pub after: TierHistogram,
    /// All seven tiers in declaration order.
    pub deltas: Vec<TierDelta>,
    /// Subgroups whose tier changed, in table order.
    pub transitions: Vec<TierTransition>,
}

/// Diffs two audits subgroup-by-subgroup.
pub fn compare_reports(before: &AuditReport, after: &AuditReport) -> Result<ComparisonReport> {
    if before.metadata.attributes != after.metadata.attributes {
        return Err(Error::AttributeSetMismatch {
            before: before.metadata.attributes.clone(),
            after: after.metadata.attributes.clone(),
        });
    }
    if before.disparity_table.len() != after.disparity_table.len() {
        return Err(Error::MalformedReport(format!(
            "tables cover {} vs {} subgroups over the same attributes",
            before.disparity_table.len(),
            after.disparity_table.len()
        )));
    }
    let mut transitions = Vec::new();
    for (b, a) in before.disparity_table.iter().zip(&after.disparity_table) {
        if b.pattern != a.pattern {
            return Err(Error::MalformedReport(
                "tables do not enumerate the same subgroups in the same order".into(),
            ));
        }
        if b.tier != a.tier {
            transitions.push(TierTransition {
                pattern: b.pattern.clone(),
                before: b.tier,
                after: a.tier,
            });
        }
    }
    let deltas = Tier::ALL
        .iter()
        .map(|&tier| {
            let nb = before.tier_histogram.get(tier);
            let na = after.tier_histogram.get(tier);
            TierDelta {
                tier,
                before: nb,
                after: na,
                delta: na as i64 - nb as i64,
            }
        })
        .collect();
    Ok(ComparisonReport {
        attributes: before.metadata.attributes.clone(),
        before: before.tier_histogram.clone(),
        after: after.tier_histogram.clone(),
        deltas,
        transitions,
    })
}

/// Writes the canonical JSON form of a comparison to `path`.
pub fn emit_comparison_json(report: &ComparisonReport, path: &Path) -> Result<()> {
    fs::write(path, canonical_json(report)?)?;
    Ok(())
}

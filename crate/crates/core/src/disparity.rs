//! Logarithmic disparity between synthetic and real subgroup proportions.
//!
//! For a subgroup with synthetic proportion `p_s` and real proportion `p_r`,
//! the disparity is `ln(p_s / p_r)`: 0 means parity, positive means the
//! subgroup is overrepresented in the synthetic data, negative means
//! underrepresented, and the magnitude is symmetric in both directions.
//! Values are bucketed into five tiers with cutoffs at the log-ratios of
//! 0.9 and 0.8 (a subgroup at 90% or 112.5% of its real share sits exactly
//! on the adequate boundary), plus two sentinel tiers for subgroups absent
//! from one side.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::subgroups::{full_combinations, Pattern};

/// Outcome of the log-disparity computation. The ratio is undefined when a
/// side is zero, and which side matters downstream, so both cases carry
/// their own marker rather than collapsing into a NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LogDisparity {
    Defined(f64),
    AbsentInReal,
    AbsentInSynthetic,
}

/// Representation tier of one subgroup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    HighlyOver,
    Over,
    Adequate,
    Under,
    HighlyUnder,
    AbsentInReal,
    AbsentInSynthetic,
}

impl Tier {
    pub const ALL: [Tier; 7] = [
        Tier::HighlyOver,
        Tier::Over,
        Tier::Adequate,
        Tier::Under,
        Tier::HighlyUnder,
        Tier::AbsentInReal,
        Tier::AbsentInSynthetic,
    ];

    /// Fill color used by the SVG renderers.
    pub fn color(self) -> &'static str {
        match self {
            Tier::HighlyOver => "#1f3b99",
            Tier::Over => "#3b6fd4",
            Tier::Adequate => "#2a9d8f",
            Tier::Under => "#f4a261",
            Tier::HighlyUnder => "#e76f51",
            Tier::AbsentInReal | Tier::AbsentInSynthetic => "#9e9e9e",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Tier::HighlyOver => "highly overrepresented",
            Tier::Over => "overrepresented",
            Tier::Adequate => "adequately represented",
            Tier::Under => "underrepresented",
            Tier::HighlyUnder => "highly underrepresented",
            Tier::AbsentInReal => "absent in real",
            Tier::AbsentInSynthetic => "absent in synthetic",
        }
    }
}

/// `ln(p_synthetic / p_real)`, or an absence marker when a side is zero.
pub fn log_disparity(p_synthetic: f64, p_real: f64) -> Result<LogDisparity> {
    for p in [p_synthetic, p_real] {
        if !(0.0..=1.0).contains(&p) || !p.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "proportion {p} outside [0, 1]"
            )));
        }
    }
    Ok(if p_real == 0.0 {
        LogDisparity::AbsentInReal
    } else if p_synthetic == 0.0 {
        LogDisparity::AbsentInSynthetic
    } else {
        LogDisparity::Defined((p_synthetic / p_real).ln())
    })
}

/// Tier cutoffs for a defined value expressed in log base `base`.
/// `hi` is -log(0.8), `lo` is -log(0.9); both are positive.
fn classify_defined(v: f64, hi: f64, lo: f64) -> Tier {
    if v > hi {
        Tier::HighlyOver
    } else if v > lo {
        Tier::Over
    } else if v >= -lo {
        // Both band edges close toward the milder tier: exactly ±log(0.9)
        // is still adequate.
        Tier::Adequate
    } else if v >= -hi {
        Tier::Under
    } else {
        Tier::HighlyUnder
    }
}

/// Assigns the representation tier for a natural-log disparity value.
pub fn classify_tier(value: LogDisparity) -> Tier {
    match value {
        LogDisparity::AbsentInReal => Tier::AbsentInReal,
        LogDisparity::AbsentInSynthetic => Tier::AbsentInSynthetic,
        LogDisparity::Defined(v) => classify_defined(v, -(0.8f64.ln()), -(0.9f64.ln())),
    }
}

/// Same classification for a disparity expressed in an arbitrary log base.
/// Tier membership depends only on the underlying ratio, so this agrees
/// with [`classify_tier`] for any base > 1; it exists so that invariance
/// can be asserted directly.
pub fn classify_tier_in_base(value: f64, base: f64) -> Tier {
    let scale = base.ln();
    classify_defined(value, -(0.8f64.ln()) / scale, -(0.9f64.ln()) / scale)
}

/// One subgroup's proportions, disparity value, and tier. `value` is `None`
/// exactly for the two absence tiers, and is quantized to six decimals so
/// that serialized reports are stable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisparityRecord {
    pub pattern: Pattern,
    pub p_synthetic: f64,
    pub p_real: f64,
    pub value: Option<f64>,
    pub tier: Tier,
}

/// Six-decimal quantization used for reported disparity values.
pub fn quantize(v: f64) -> f64 {
    let q = (v * 1e6).round() / 1e6;
    if q == 0.0 {
        0.0
    } else {
        q
    }
}

fn make_record(pattern: Pattern, p_synthetic: f64, p_real: f64) -> Result<DisparityRecord> {
    let (value, tier) = match log_disparity(p_synthetic, p_real)? {
        LogDisparity::Defined(v) => {
            let q = quantize(v);
            (Some(q), classify_tier(LogDisparity::Defined(q)))
        }
        marker => (None, classify_tier(marker)),
    };
    Ok(DisparityRecord {
        pattern,
        p_synthetic,
        p_real,
        value,
        tier,
    })
}

/// Disparity of every full combination of `attributes`, including
/// combinations absent from either dataset. Rows are ordered by schema
/// column order, then value order.
pub fn disparity_table(
    real: &Dataset,
    synthetic: &Dataset,
    attributes: &[String],
) -> Result<Vec<DisparityRecord>> {
    if real.is_empty() {
        return Err(Error::EmptyDataset("real dataset has no rows"));
    }
    if synthetic.is_empty() {
        return Err(Error::EmptyDataset("synthetic dataset has no rows"));
    }
    if real.schema != synthetic.schema {
        return Err(Error::InvalidConfig(
            "real and synthetic datasets use different schemas".into(),
        ));
    }
    let combos = full_combinations(&real.schema, attributes)?;
    let real_counts = pattern_counts(real, &combos)?;
    let synth_counts = pattern_counts(synthetic, &combos)?;
    combos
        .into_iter()
        .zip(real_counts.into_iter().zip(synth_counts))
        .map(|(pattern, (cr, cs))| {
            make_record(
                pattern,
                cs as f64 / synthetic.len() as f64,
                cr as f64 / real.len() as f64,
            )
        })
        .collect()
}

fn pattern_counts(d: &Dataset, patterns: &[Pattern]) -> Result<Vec<usize>> {
    let resolved: Vec<Vec<(usize, String)>> = patterns
        .iter()
        .map(|p| p.resolve(&d.schema))
        .collect::<Result<_>>()?;
    let mut counts = vec![0usize; patterns.len()];
    for row in d.rows() {
        for (i, checks) in resolved.iter().enumerate() {
            if checks.iter().all(|&(c, ref v)| &row[c] == v) {
                counts[i] += 1;
            }
        }
    }
    Ok(counts)
}

/// Tier counts across a disparity table.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TierHistogram {
    pub highly_over: usize,
    pub over: usize,
    pub adequate: usize,
    pub under: usize,
    pub highly_under: usize,
    pub absent_in_real: usize,
    pub absent_in_synthetic: usize,
}

impl TierHistogram {
    pub fn get(&self, tier: Tier) -> usize {
        match tier {
            Tier::HighlyOver => self.highly_over,
            Tier::Over => self.over,
            Tier::Adequate => self.adequate,
            Tier::Under => self.under,
            Tier::HighlyUnder => self.highly_under,
            Tier::AbsentInReal => self.absent_in_real,
            Tier::AbsentInSynthetic => self.absent_in_synthetic,
        }
    }

    pub fn total(&self) -> usize {
        Tier::ALL.iter().map(|&t| self.get(t)).sum()
    }

    /// Count of subgroups in the extreme tiers (both highly-* tiers plus
    /// both absence tiers).
    pub fn extreme(&self) -> usize {
        self.highly_over + self.highly_under + self.absent_in_real + self.absent_in_synthetic
    }
}

pub fn tally_histogram(records: &[DisparityRecord]) -> TierHistogram {
    let mut h = TierHistogram::default();
    for r in records {
        match r.tier {
            Tier::HighlyOver => h.highly_over += 1,
            Tier::Over => h.over += 1,
            Tier::Adequate => h.adequate += 1,
            Tier::Under => h.under += 1,
            Tier::HighlyUnder => h.highly_under += 1,
            Tier::AbsentInReal => h.absent_in_real += 1,
            Tier::AbsentInSynthetic => h.absent_in_synthetic += 1,
        }
    }
    h
}

/// One node of the sunburst hierarchy. Angles are in degrees; the root
/// spans the full circle and each ring partitions its parent's span in
/// proportion to *real*-data counts, so sector area reflects the real
/// cohort while color reflects the synthetic data's disparity tier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SunburstNode {
    pub record: DisparityRecord,
    pub depth: usize,
    pub start_angle: f64,
    pub extent: f64,
    pub children: Vec<SunburstNode>,
}

/// Builds the sunburst hierarchy for `ring_order` (inner ring first).
pub fn build_sunburst(
    real: &Dataset,
    synthetic: &Dataset,
    ring_order: &[String],
) -> Result<SunburstNode> {
    if real.is_empty() {
        return Err(Error::EmptyDataset("real dataset has no rows"));
    }
    if synthetic.is_empty() {
        return Err(Error::EmptyDataset("synthetic dataset has no rows"));
    }
    if real.schema != synthetic.schema {
        return Err(Error::InvalidConfig(
            "real and synthetic datasets use different schemas".into(),
        ));
    }
    let mut ring_idx = Vec::with_capacity(ring_order.len());
    for name in ring_order {
        let idx = real.schema.column_index(name)?;
        if ring_idx.contains(&idx) {
            return Err(Error::InvalidConfig(format!(
                "ring order lists column {name:?} twice"
            )));
        }
        ring_idx.push(idx);
    }

    let real_rows: Vec<usize> = (0..real.len()).collect();
    let synth_rows: Vec<usize> = (0..synthetic.len()).collect();
    build_node(
        real,
        synthetic,
        ring_order,
        &ring_idx,
        Pattern::wildcard(),
        real_rows,
        synth_rows,
        0,
        0.0,
        360.0,
    )
}

#[allow(clippy::too_many_arguments)]
fn build_node(
    real: &Dataset,
    synthetic: &Dataset,
    ring_order: &[String],
    ring_idx: &[usize],
    pattern: Pattern,
    real_rows: Vec<usize>,
    synth_rows: Vec<usize>,
    depth: usize,
    start_angle: f64,
    extent: f64,
) -> Result<SunburstNode> {
    let record = make_record(
        pattern.clone(),
        synth_rows.len() as f64 / synthetic.len() as f64,
        real_rows.len() as f64 / real.len() as f64,
    )?;
    let mut children = Vec::new();
    if depth < ring_order.len() {
        let col = ring_idx[depth];
        let col_name = &ring_order[depth];
        let mut cursor = start_angle;
        for value in &real.schema.columns[col].allowed_values {
            let child_real: Vec<usize> = real_rows
                .iter()
                .copied()
                .filter(|&i| real.rows()[i][col] == *value)
                .collect();
            let child_synth: Vec<usize> = synth_rows
                .iter()
                .copied()
                .filter(|&i| synthetic.rows()[i][col] == *value)
                .collect();
            // Angular share is absolute: real rows in the cell over all
            // real rows. Per-ring extents therefore sum to exactly 360
            // even past empty parents.
            let child_extent = 360.0 * child_real.len() as f64 / real.len() as f64;
            children.push(build_node(
                real,
                synthetic,
                ring_order,
                ring_idx,
                pattern.bind(col_name, value),
                child_real,
                child_synth,
                depth + 1,
                cursor,
                child_extent,
            )?);
            cursor += child_extent;
        }
    }
    Ok(SunburstNode {
        record,
        depth,
        start_angle,
        extent,
        children,
    })
}

/// Nodes grouped by depth: index 0 is the root, 1 the innermost ring, ...
pub fn sunburst_rings(root: &SunburstNode) -> Vec<Vec<&SunburstNode>> {
    let mut rings: Vec<Vec<&SunburstNode>> = Vec::new();
    let mut level = vec![root];
    while !level.is_empty() {
        let next: Vec<&SunburstNode> = level.iter().flat_map(|n| n.children.iter()).collect();
        rings.push(level);
        level = next;
    }
    rings
}

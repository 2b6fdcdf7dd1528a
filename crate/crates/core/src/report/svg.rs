//! Standalone SVG 1.1 renderers for sunburst diagrams and tier histograms.
//!
//! Output is deterministic: coordinates are formatted to three decimals and
//! every run over the same tree yields identical bytes. Each sector and bar
//! carries a `<title>` annotation (subgroup path, proportions, disparity),
//! and the document embeds a caller-supplied `<desc>` echo of the resolved
//! configuration.

use std::fs;
use std::path::Path;

use crate::dataset::Schema;
use crate::disparity::{sunburst_rings, SunburstNode, Tier, TierHistogram};
use crate::error::Result;

/// Hub radius of the sunburst, in user units.
const HUB_RADIUS: f64 = 52.0;
/// Thickness of each ring.
const RING_THICKNESS: f64 = 48.0;
/// Outer margin around the diagram.
const MARGIN: f64 = 16.0;
/// Sectors narrower than this many degrees are dropped from the rendering
/// (they have no real rows behind them; the tree still carries the record).
const MIN_EXTENT: f64 = 1e-9;

/// The default ring order: mortality, race, age, gender, filtered to the
/// columns the schema actually has; falls back to the protected columns
/// when none of the preferred names exist.
pub fn default_ring_order(schema: &Schema) -> Vec<String> {
    const PREFERRED: [&str; 4] = ["mortality", "race", "age", "gender"];
    let names = schema.column_names();
    let order: Vec<String> = PREFERRED
        .iter()
        .filter(|&&p| names.iter().any(|n| n == p))
        .map(|&p| p.to_string())
        .collect();
    if order.is_empty() {
        schema.protected_columns()
    } else {
        order
    }
}

fn escape_xml(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

/// Point on the circle of radius `r` around (`cx`, `cy`) at `deg` degrees,
/// measured clockwise from twelve o'clock.
fn polar(cx: f64, cy: f64, r: f64, deg: f64) -> (f64, f64) {
    let rad = deg.to_radians();
    (cx + r * rad.sin(), cy - r * rad.cos())
}

fn node_title(node: &SunburstNode) -> String {
    let r = &node.record;
    let label = if r.pattern.is_empty() {
        "all rows".to_string()
    } else {
        r.pattern
            .bindings()
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    let value = match r.value {
        Some(v) => format!("{v:+.6}"),
        None => "undefined".to_string(),
    };
    format!(
        "{label} — p_real {:.6}, p_synthetic {:.6}, disparity {value} ({})",
        r.p_real,
        r.p_synthetic,
        r.tier.label()
    )
}

/// Annular sector between radii `r0 < r1` spanning `extent` degrees from
/// `start`; full circles are drawn as an even-odd annulus because a single
/// arc cannot close on itself.
fn sector_path(cx: f64, cy: f64, r0: f64, r1: f64, start: f64, extent: f64) -> String {
    if extent >= 360.0 - MIN_EXTENT {
        let (top_o, bot_o) = ((cx, cy - r1), (cx, cy + r1));
        let (top_i, bot_i) = ((cx, cy - r0), (cx, cy + r0));
        return format!(
            "M {:.3} {:.3} A {r1:.3} {r1:.3} 0 1 1 {:.3} {:.3} A {r1:.3} {r1:.3} 0 1 1 {:.3} {:.3} Z \
             M {:.3} {:.3} A {r0:.3} {r0:.3} 0 1 0 {:.3} {:.3} A {r0:.3} {r0:.3} 0 1 0 {:.3} {:.3} Z",
            top_o.0, top_o.1, bot_o.0, bot_o.1, top_o.0, top_o.1,
            top_i.0, top_i.1, bot_i.0, bot_i.1, top_i.0, top_i.1,
        );
    }
    let end = start + extent;
    let large = i32::from(extent > 180.0);
    let (x0, y0) = polar(cx, cy, r1, start);
    let (x1, y1) = polar(cx, cy, r1, end);
    let (x2, y2) = polar(cx, cy, r0, end);
    let (x3, y3) = polar(cx, cy, r0, start);
    format!(
        "M {x0:.3} {y0:.3} A {r1:.3} {r1:.3} 0 {large} 1 {x1:.3} {y1:.3} \
         L {x2:.3} {y2:.3} A {r0:.3} {r0:.3} 0 {large} 0 {x3:.3} {y3:.3} Z"
    )
}

/// Renders the sunburst tree as a standalone SVG document.
pub fn sunburst_svg(root: &SunburstNode, desc: &str) -> String {
    let rings = sunburst_rings(root);
    let depth = rings.len().saturating_sub(1);
    let size = 2.0 * (HUB_RADIUS + RING_THICKNESS * depth as f64 + MARGIN);
    let (cx, cy) = (size / 2.0, size / 2.0);

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" \
         viewBox=\"0 0 {size:.3} {size:.3}\" width=\"{size:.3}\" height=\"{size:.3}\">\n"
    ));
    out.push_str(&format!("  <desc>{}</desc>\n", escape_xml(desc)));
    out.push_str(&format!(
        "  <circle cx=\"{cx:.3}\" cy=\"{cy:.3}\" r=\"{:.3}\" fill=\"{}\" \
         stroke=\"#ffffff\" stroke-width=\"1\"><title>{}</title></circle>\n",
        HUB_RADIUS - 2.0,
        root.record.tier.color(),
        escape_xml(&node_title(root)),
    ));
    for ring in rings.iter().skip(1) {
        for node in ring {
            if node.extent <= MIN_EXTENT {
                continue;
            }
            let r0 = HUB_RADIUS + RING_THICKNESS * (node.depth - 1) as f64;
            let r1 = HUB_RADIUS + RING_THICKNESS * node.depth as f64 - 2.0;
            out.push_str(&format!(
                "  <path d=\"{}\" fill=\"{}\" fill-rule=\"evenodd\" \
                 stroke=\"#ffffff\" stroke-width=\"1\"><title>{}</title></path>\n",
                sector_path(cx, cy, r0, r1, node.start_angle, node.extent),
                node.record.tier.color(),
                escape_xml(&node_title(node)),
            ));
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Writes [`sunburst_svg`] output to `path`.
pub fn render_sunburst_svg(root: &SunburstNode, desc: &str, path: &Path) -> Result<()> {
    fs::write(path, sunburst_svg(root, desc))?;
    Ok(())
}

const BAR_SLOT: f64 = 78.0;
const BAR_WIDTH: f64 = 56.0;
const PLOT_HEIGHT: f64 = 220.0;
const PLOT_TOP: f64 = 34.0;
const PLOT_LEFT: f64 = 18.0;
const LABEL_BAND: f64 = 40.0;

fn short_tier_label(tier: Tier) -> &'static str {
    match tier {
        Tier::HighlyOver => "highly over",
        Tier::Over => "over",
        Tier::Adequate => "adequate",
        Tier::Under => "under",
        Tier::HighlyUnder => "highly under",
        Tier::AbsentInReal => "absent-real",
        Tier::AbsentInSynthetic => "absent-synth",
    }
}

/// Renders the tier histogram as a bar chart, one bar per tier.
pub fn histogram_svg(histogram: &TierHistogram, desc: &str) -> String {
    let width = PLOT_LEFT * 2.0 + BAR_SLOT * Tier::ALL.len() as f64;
    let height = PLOT_TOP + PLOT_HEIGHT + LABEL_BAND;
    let baseline = PLOT_TOP + PLOT_HEIGHT;
    let max = Tier::ALL
        .iter()
        .map(|&t| histogram.get(t))
        .max()
        .unwrap_or(0)
        .max(1) as f64;

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" \
         viewBox=\"0 0 {width:.3} {height:.3}\" width=\"{width:.3}\" height=\"{height:.3}\">\n"
    ));
    out.push_str(&format!("  <desc>{}</desc>\n", escape_xml(desc)));
    for (i, &tier) in Tier::ALL.iter().enumerate() {
        let count = histogram.get(tier);
        let bar_h = PLOT_HEIGHT * count as f64 / max;
        let x = PLOT_LEFT + BAR_SLOT * i as f64 + (BAR_SLOT - BAR_WIDTH) / 2.0;
        let center = x + BAR_WIDTH / 2.0;
        out.push_str(&format!(
            "  <rect x=\"{x:.3}\" y=\"{:.3}\" width=\"{BAR_WIDTH:.3}\" height=\"{bar_h:.3}\" \
             fill=\"{}\"><title>{}: {count}</title></rect>\n",
            baseline - bar_h,
            tier.color(),
            escape_xml(tier.label()),
        ));
        out.push_str(&format!(
            "  <text x=\"{center:.3}\" y=\"{:.3}\" text-anchor=\"middle\" \
             font-family=\"sans-serif\" font-size=\"12\">{count}</text>\n",
            baseline - bar_h - 6.0,
        ));
        out.push_str(&format!(
            "  <text x=\"{center:.3}\" y=\"{:.3}\" text-anchor=\"middle\" \
             font-family=\"sans-serif\" font-size=\"10\">{}</text>\n",
            baseline + 16.0,
            short_tier_label(tier),
        ));
    }
    out.push_str(&format!(
        "  <line x1=\"{PLOT_LEFT:.3}\" y1=\"{baseline:.3}\" x2=\"{:.3}\" y2=\"{baseline:.3}\" \
         stroke=\"#444444\" stroke-width=\"1\"/>\n",
        width - PLOT_LEFT,
    ));
    out.push_str("</svg>\n");
    out
}

/// Writes [`histogram_svg`] output to `path`.
pub fn render_histogram_svg(histogram: &TierHistogram, desc: &str, path: &Path) -> Result<()> {
    fs::write(path, histogram_svg(histogram, desc))?;
    Ok(())
}

//! Labeled SVG scatter maps of finished 2-D embeddings.
//!
//! The renderer only ever sees an [`Embedding`]; color groups and labels are
//! display metadata and cannot feed back into coordinates.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use trademap::{Embedding, Error};

const DEFAULT_COLOR: &str = "#4d4d4d";
const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
    "#bcbd22", "#7f7f7f",
];
const MARKER_RADIUS: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LabelMode {
    #[default]
    Code,
    FullName,
    None,
}

impl FromStr for LabelMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "code" => Ok(Self::Code),
            "full-name" => Ok(Self::FullName),
            "none" => Ok(Self::None),
            other => Err(format!(
                "unknown label mode `{other}` (code, full-name, none)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub width: f64,
    pub height: f64,
    pub label_mode: LabelMode,
    /// `code → color group`; countries without a group get the default color.
    pub color_groups: BTreeMap<String, String>,
    /// Share of width/height left blank on every side.
    pub margin_fraction: f64,
}

impl Default for PlotSpec {
    fn default() -> Self {
        Self {
            width: 800.0,
            height: 800.0,
            label_mode: LabelMode::Code,
            color_groups: BTreeMap::new(),
            margin_fraction: 0.05,
        }
    }
}

/// Affine data → pixel map with equal scale on both axes (y points up).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Viewport {
    scale: f64,
    x0: f64,
    y0: f64,
    px0: f64,
    py0: f64,
}

impl Viewport {
    /// Fits the bounding box of `emb` into the margin-inset canvas, centered.
    pub fn fit(emb: &Embedding, spec: &PlotSpec) -> Viewport {
        let (mut xmin, mut xmax, mut ymin, mut ymax) = (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        );
        for i in 0..emb.len() {
            let p = emb.point(i);
            xmin = xmin.min(p[0]);
            xmax = xmax.max(p[0]);
            ymin = ymin.min(p[1]);
            ymax = ymax.max(p[1]);
        }
        if emb.is_empty() {
            (xmin, xmax, ymin, ymax) = (0.0, 0.0, 0.0, 0.0);
        }
        let inner_w = spec.width * (1.0 - 2.0 * spec.margin_fraction);
        let inner_h = spec.height * (1.0 - 2.0 * spec.margin_fraction);
        let span_x = xmax - xmin;
        let span_y = ymax - ymin;
        let scale = match (span_x > 0.0, span_y > 0.0) {
            (true, true) => (inner_w / span_x).min(inner_h / span_y),
            (true, false) => inner_w / span_x,
            (false, true) => inner_h / span_y,
            (false, false) => 1.0,
        };
        Viewport {
            scale,
            x0: 0.5 * (xmin + xmax),
            y0: 0.5 * (ymin + ymax),
            px0: 0.5 * spec.width,
            py0: 0.5 * spec.height,
        }
    }

    pub fn map(&self, p: &[f64]) -> (f64, f64) {
        (
            self.px0 + self.scale * (p[0] - self.x0),
            self.py0 - self.scale * (p[1] - self.y0),
        )
    }
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Renders one circle (class `marker`) and, unless labels are off, one text
/// element (class `label`) per country, in roster order.
pub fn render_svg(emb: &Embedding, spec: &PlotSpec) -> trademap::Result<String> {
    if emb.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: emb.dim(),
        });
    }
    if !(spec.width > 0.0 && spec.height > 0.0) || !(0.0..0.5).contains(&spec.margin_fraction) {
        return Err(Error::InvalidParameter(format!(
            "plot needs positive size and margin in [0, 0.5), got {}x{} margin {}",
            spec.width, spec.height, spec.margin_fraction
        )));
    }
    let mut groups: Vec<&str> = spec.color_groups.values().map(String::as_str).collect();
    groups.sort_unstable();
    groups.dedup();
    let color_of = |code: &str| match spec.color_groups.get(code) {
        Some(g) => PALETTE[groups.binary_search(&g.as_str()).unwrap() % PALETTE.len()],
        None => DEFAULT_COLOR,
    };

    let view = Viewport::fit(emb, spec);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = spec.width,
        h = spec.height
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, r#"<g font-family="sans-serif" font-size="11">"#);
    for i in 0..emb.len() {
        let code = emb.roster().code(i);
        let (x, y) = view.map(emb.point(i));
        let _ = writeln!(
            svg,
            r#"<circle class="marker" data-code="{}" cx="{x:.3}" cy="{y:.3}" r="{MARKER_RADIUS}" fill="{}"/>"#,
            escape(code),
            color_of(code)
        );
        let label = match spec.label_mode {
            LabelMode::Code => Some(code),
            LabelMode::FullName => Some(emb.roster().display_name(i)),
            LabelMode::None => None,
        };
        if let Some(label) = label {
            let _ = writeln!(
                svg,
                r#"<text class="label" x="{:.3}" y="{:.3}">{}</text>"#,
                x + MARKER_RADIUS + 2.0,
                y + 4.0,
                escape(label)
            );
        }
    }
    svg.push_str("</g>\n</svg>\n");
    Ok(svg)
}

//! SVG rendering of systems and profiles.
//!
//! Rendering goes through a [`Figure`], the exact plot geometry, so tests can
//! assert on breakpoint order and overlay extents without parsing SVG.

use std::fmt::Write as _;

use thiserror::Error;

use crate::pwl::{breakpoints_of, MapError, PiecewiseLinearMap};
use crate::scalar::{int, to_f64, ExactScalar};
use crate::template::{build_block, TemplateError, TemplateParams};

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("nothing to plot")]
    EmptySubject,
    #[error("canvas must be at least 64x64 pixels")]
    Canvas,
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Template(#[from] TemplateError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Marker {
    pub label: String,
    pub at: ExactScalar,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Overlay {
    pub label: String,
    pub map: PiecewiseLinearMap,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlotSpec {
    pub subject: PiecewiseLinearMap,
    pub overlays: Vec<Overlay>,
    /// Gray guides `q / d` for each listed `d`, with their labels.
    pub guides: Vec<(ExactScalar, String)>,
    pub markers: Vec<Marker>,
    pub width: u32,
    pub height: u32,
    pub title: Option<String>,
}

pub const BLOCK_LABELS: [&str; 9] = ["q_k", "r_k", "s_k^m", "s_k", "s_k^M", "t_k", "u_k", "p_k", "q_{k+1}"];

impl PlotSpec {
    pub fn new(subject: PiecewiseLinearMap) -> Self {
        let markers = breakpoints_of(&subject)
            .into_iter()
            .map(|at| Marker { label: String::new(), at })
            .collect();
        Self { subject, overlays: vec![], guides: vec![], markers, width: 800, height: 500, title: None }
    }

    /// Guides at `q/(n+1)` and `q/(w+1)`.
    pub fn with_guides(mut self, n: usize, w: &ExactScalar) -> Self {
        self.guides = vec![(int(n as i64 + 1), "q/(n+1)".into()), (w + int(1), "q/(w+1)".into())];
        self
    }

    /// One block of a template, labelled as in the generic picture, with
    /// optional dotted `delta = 0` and `delta = 1` variants.
    pub fn for_block(params: &TemplateParams, k: usize, q_k: &ExactScalar, overlays: bool) -> Result<Self, PlotError> {
        let (map, bp) = build_block(params, k, q_k)?;
        let points = [
            &bp.q_k, &bp.r_k, &bp.s_k_m, &bp.s_k, &bp.s_k_max, &bp.t_k, &bp.u_k, &bp.p_k, &bp.q_next,
        ];
        let markers = BLOCK_LABELS
            .iter()
            .zip(points)
            .map(|(label, at)| Marker { label: label.to_string(), at: at.clone() })
            .collect();
        let mut spec = PlotSpec::new(map).with_guides(params.n, &params.w);
        spec.markers = markers;
        spec.title = Some(format!("block {k}"));
        if overlays {
            for delta in [0, 1] {
                let variant = TemplateParams { delta: int(delta), ..params.clone() };
                let (map, _) = build_block(&variant, k, q_k)?;
                spec.overlays.push(Overlay { label: format!("delta={delta}"), map });
            }
        }
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LineRole {
    Component(usize),
    Overlay { label: String, component: usize },
    Guide(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub role: LineRole,
    /// Exact data coordinates.
    pub points: Vec<(ExactScalar, ExactScalar)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Figure {
    pub width: u32,
    pub height: u32,
    pub x_range: (ExactScalar, ExactScalar),
    pub y_range: (ExactScalar, ExactScalar),
    /// Components first (bottom to top), then overlays, then guides.
    pub lines: Vec<Polyline>,
    /// Markers sorted by position.
    pub markers: Vec<Marker>,
    pub title: Option<String>,
}

const MARGIN: f64 = 48.0;

fn component_lines(map: &PiecewiseLinearMap) -> Vec<Vec<(ExactScalar, ExactScalar)>> {
    (0..map.components())
        .map(|d| map.breakpoints().iter().zip(map.values()).map(|(q, v)| (q.clone(), v[d].clone())).collect())
        .collect()
}

pub fn figure(spec: &PlotSpec) -> Result<Figure, PlotError> {
    if spec.width < 64 || spec.height < 64 {
        return Err(PlotError::Canvas);
    }
    if spec.subject.components() == 0 {
        return Err(PlotError::EmptySubject);
    }
    let (lo, hi) = (spec.subject.start().clone(), spec.subject.end().clone());
    let mut lines: Vec<Polyline> = component_lines(&spec.subject)
        .into_iter()
        .enumerate()
        .map(|(d, points)| Polyline { role: LineRole::Component(d + 1), points })
        .collect();
    for overlay in &spec.overlays {
        let clipped = overlay.map.restrict(&lo.clone().max(overlay.map.start().clone()), &hi.clone().min(overlay.map.end().clone()))?;
        for (d, points) in component_lines(&clipped).into_iter().enumerate() {
            lines.push(Polyline { role: LineRole::Overlay { label: overlay.label.clone(), component: d + 1 }, points });
        }
    }
    for (div, label) in &spec.guides {
        lines.push(Polyline {
            role: LineRole::Guide(label.clone()),
            points: vec![(lo.clone(), &lo / div), (hi.clone(), &hi / div)],
        });
    }
    let ys = lines.iter().flat_map(|l| l.points.iter().map(|p| &p.1));
    let y_lo = ys.clone().min().cloned().expect("non-empty");
    let mut y_hi = ys.max().cloned().expect("non-empty");
    if y_hi == y_lo {
        y_hi = &y_lo + int(1);
    }
    let mut markers: Vec<Marker> = spec.markers.iter().filter(|m| m.at >= lo && m.at <= hi).cloned().collect();
    markers.sort_by(|a, b| a.at.cmp(&b.at));
    Ok(Figure {
        width: spec.width,
        height: spec.height,
        x_range: (lo, hi),
        y_range: (y_lo, y_hi),
        lines,
        markers,
        title: spec.title.clone(),
    })
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

impl Figure {
    /// Distinct label positions in left-to-right order.
    pub fn marker_labels(&self) -> Vec<&str> {
        self.markers.iter().map(|m| m.label.as_str()).collect()
    }

    fn px(&self, q: &ExactScalar) -> f64 {
        let (lo, hi) = &self.x_range;
        MARGIN + to_f64(&((q - lo) / (hi - lo))) * (self.width as f64 - 2.0 * MARGIN)
    }

    fn py(&self, y: &ExactScalar) -> f64 {
        let (lo, hi) = &self.y_range;
        self.height as f64 - MARGIN - to_f64(&((y - lo) / (hi - lo))) * (self.height as f64 - 2.0 * MARGIN)
    }

    fn path(&self, points: &[(ExactScalar, ExactScalar)]) -> String {
        points
            .iter()
            .map(|(x, y)| format!("{:.3},{:.3}", self.px(x), self.py(y)))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// SVG 1.1 document. Coordinates are printed with fixed decimals, so
    /// identical figures give identical bytes.
    pub fn to_svg(&self) -> String {
        let (w, h) = (self.width, self.height);
        let mut out = String::new();
        let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
        );
        let _ = writeln!(out, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#);
        if let Some(title) = &self.title {
            let _ = writeln!(out, r#"<title>{}</title>"#, escape(title));
        }
        let (top, bottom) = (MARGIN / 2.0, h as f64 - MARGIN);
        for (i, m) in self.markers.iter().enumerate() {
            let x = self.px(&m.at);
            let _ = writeln!(
                out,
                r#"<line class="marker" x1="{x:.3}" y1="{top:.3}" x2="{x:.3}" y2="{bottom:.3}" stroke="gray" stroke-width="0.5" stroke-dasharray="4,3"/>"#
            );
            if !m.label.is_empty() {
                // alternate rows keep close labels apart
                let y = bottom + 14.0 + 12.0 * (i % 2) as f64;
                let _ = writeln!(
                    out,
                    r#"<text x="{x:.3}" y="{y:.3}" font-family="sans-serif" font-size="10" text-anchor="middle">{}</text>"#,
                    escape(&m.label)
                );
            }
        }
        for line in &self.lines {
            let (class, style) = match &line.role {
                LineRole::Component(d) => (format!("component P{d}"), r#"stroke="black" stroke-width="1.5""#.to_string()),
                LineRole::Overlay { label, component } => (
                    format!("overlay {} P{component}", escape(label)),
                    r#"stroke="black" stroke-width="1" stroke-dasharray="1,3""#.to_string(),
                ),
                LineRole::Guide(label) => {
                    (format!("guide {}", escape(label)), r##"stroke="#999999" stroke-width="1""##.to_string())
                }
            };
            let _ = writeln!(
                out,
                r#"<polyline class="{class}" fill="none" {style} points="{}"/>"#,
                self.path(&line.points)
            );
            if let LineRole::Guide(label) = &line.role {
                let (x, y) = line.points.last().expect("two points");
                let _ = writeln!(
                    out,
                    r##"<text x="{:.3}" y="{:.3}" font-family="sans-serif" font-size="10" fill="#999999">{}</text>"##,
                    self.px(x) + 4.0,
                    self.py(y),
                    escape(label)
                );
            }
        }
        out.push_str("</svg>\n");
        out
    }
}

pub fn render_svg(spec: &PlotSpec) -> Result<String, PlotError> {
    Ok(figure(spec)?.to_svg())
}

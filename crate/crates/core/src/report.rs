//! Output plumbing: provenance headers and static SVG renders of data that
//! has already been computed.

use std::fmt::Write as _;

use crate::constrained::PhaseDiagram;
use crate::landscape::{IndexDistribution, IndexKind};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// `# key=value` header lines, tool version first.
pub fn provenance_header(command: &str, meta: &[(String, String)]) -> String {
    let mut s = format!("# tool=saddlestat {TOOL_VERSION}\n# command={command}\n");
    for (k, v) in meta {
        let _ = writeln!(s, "# {k}={v}");
    }
    s
}

/// Inserts provenance fields into a JSON object.
pub fn stamp_json(mut v: serde_json::Value, command: &str) -> serde_json::Value {
    if let Some(obj) = v.as_object_mut() {
        obj.insert("tool".into(), format!("saddlestat {TOOL_VERSION}").into());
        obj.insert("command".into(), command.into());
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Line,
    Dashed,
    Bars,
    Points,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub style: Style,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>, style: Style) -> Self {
        Self { label: label.into(), points, style }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Vertical markers `(x, label)`, e.g. Dirac atoms.
    pub markers: Vec<(f64, String)>,
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#444444"];
const W: f64 = 640.0;
const H: f64 = 420.0;
const PAD: f64 = 56.0;

fn bounds(plot: &Plot) -> (f64, f64, f64, f64) {
    let mut xs: Vec<f64> = plot.series.iter().flat_map(|s| s.points.iter().map(|p| p.0)).collect();
    let mut ys: Vec<f64> = plot.series.iter().flat_map(|s| s.points.iter().map(|p| p.1)).collect();
    xs.extend(plot.markers.iter().map(|m| m.0));
    xs.retain(|x| x.is_finite());
    ys.retain(|y| y.is_finite());
    if !plot.markers.is_empty() || plot.series.iter().any(|s| s.style == Style::Bars) {
        ys.push(0.0);
    }
    let span = |v: &[f64], fallback: (f64, f64)| {
        if v.is_empty() {
            return fallback;
        }
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if hi > lo {
            let pad = 0.04 * (hi - lo);
            (lo - pad, hi + pad)
        } else {
            (lo - 0.5, hi + 0.5)
        }
    };
    let (x0, x1) = span(&xs, (0.0, 1.0));
    let (y0, y1) = span(&ys, (0.0, 1.0));
    (x0, x1, y0, y1)
}

pub fn render_svg(plot: &Plot) -> String {
    let (x0, x1, y0, y1) = bounds(plot);
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(&plot.title));
    let _ = writeln!(s, r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#, W - 2.0 * PAD, H - 2.0 * PAD);
    for i in 0..=4 {
        let fx = x0 + (x1 - x0) * i as f64 / 4.0;
        let fy = y0 + (y1 - y0) * i as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, sx(fx), H - PAD + 16.0, tick(fx));
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, PAD - 6.0, sy(fy) + 4.0, tick(fy));
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 12.0, escape(&plot.x_label));
    let _ = writeln!(s, r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#, H / 2.0, H / 2.0, escape(&plot.y_label));
    for (i, ser) in plot.series.iter().enumerate() {
        let c = COLORS[i % COLORS.len()];
        let pts: Vec<(f64, f64)> = ser.points.iter().filter(|p| p.0.is_finite() && p.1.is_finite()).map(|p| (sx(p.0), sy(p.1))).collect();
        match ser.style {
            Style::Line | Style::Dashed => {
                let path: Vec<String> = pts.iter().map(|p| format!("{:.2},{:.2}", p.0, p.1)).collect();
                let dash = if ser.style == Style::Dashed { r#" stroke-dasharray="6 4""# } else { "" };
                let _ = writeln!(s, r#"<polyline fill="none" stroke="{c}" stroke-width="1.6"{dash} points="{}"/>"#, path.join(" "));
            }
            Style::Bars => {
                let bw = if pts.len() > 1 { 0.7 * (pts[1].0 - pts[0].0).abs() } else { 10.0 };
                for p in &pts {
                    let base = sy(0.0_f64.clamp(y0, y1));
                    let _ = writeln!(s, r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{c}" fill-opacity="0.7"/>"#, p.0 - bw / 2.0, p.1.min(base), bw, (base - p.1).abs());
                }
            }
            Style::Points => {
                for p in &pts {
                    let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{c}"/>"#, p.0, p.1);
                }
            }
        }
        let _ = writeln!(s, r#"<text x="{}" y="{}" fill="{c}">{}</text>"#, W - PAD - 150.0, PAD + 16.0 + 16.0 * i as f64, escape(&ser.label));
    }
    for (x, label) in &plot.markers {
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{PAD}" x2="{:.2}" y2="{}" stroke="black" stroke-width="2"/>"#, sx(*x), sx(*x), H - PAD);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#, sx(*x), PAD - 4.0, escape(label));
    }
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    if v == 0.0 || (v.abs() >= 1e-2 && v.abs() < 1e4) {
        format!("{v:.3}")
    } else {
        format!("{v:.2e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn distribution_plot(d: &IndexDistribution, title: &str) -> Plot {
    let points: Vec<(f64, f64)> = d.support.iter().cloned().zip(d.prob.iter().cloned()).collect();
    let (style, x_label) = match d.kind {
        IndexKind::Discrete => (Style::Bars, "k".to_string()),
        IndexKind::Continuous => (Style::Line, format!("kappa = k / N^{}", d.scale_exponent)),
    };
    let mut plot = Plot { title: title.into(), x_label, y_label: "probability / density".into(), ..Default::default() };
    if !points.is_empty() {
        plot.series.push(Series::new("p", points, style));
    }
    if let Some((loc, mass)) = d.atom {
        plot.markers.push((loc, format!("atom {mass}")));
    }
    plot
}

pub fn phase_plot(p: &PhaseDiagram) -> Plot {
    let minus: Vec<(f64, f64)> = p.curve_minus.clone();
    let plus: Vec<(f64, f64)> = p.curve_plus.iter().filter_map(|(m, e)| e.map(|e| (*m, e))).collect();
    let m_hi = p.curve_minus.iter().map(|c| c.0).fold(1.0, f64::max) + 0.5;
    let mut plot = Plot { title: format!("phase diagram, q = {}", p.q), x_label: "m".into(), y_label: "eps0".into(), ..Default::default() };
    plot.series.push(Series::new("eps_-", minus, Style::Line));
    plot.series.push(Series::new("eps_+", plus, Style::Line));
    plot.series.push(Series::new("eps0 = -1/(2q)", vec![(1.0, p.line_level), (m_hi, p.line_level)], Style::Dashed));
    plot.series.push(Series::new("critical point", vec![p.critical_point], Style::Points));
    plot.series.push(Series::new("threshold", vec![(0.0, p.threshold)], Style::Points));
    plot
}

/// Inset of the microscopic toppling boundary `eps = q delta` and the cone
/// lines, on `delta in [-span, span]`.
pub fn phase_inset_plot(p: &PhaseDiagram, span: f64) -> Plot {
    let line = |slope: f64| vec![(-span, -span * slope), (span, span * slope)];
    let mut plot = Plot { title: format!("critical window, q = {}", p.q), x_label: "delta".into(), y_label: "eps".into(), ..Default::default() };
    plot.series.push(Series::new("eps = q delta", line(p.toppling_slope), Style::Line));
    plot.series.push(Series::new("cone -", line(p.cone_slopes.0), Style::Dashed));
    plot.series.push(Series::new("cone +", line(p.cone_slopes.1), Style::Dashed));
    plot
}

/// Rows of `(delta, eps)` inset data for CSV output.
pub fn phase_inset_rows(p: &PhaseDiagram, span: f64, points: usize) -> Vec<[f64; 4]> {
    (0..points)
        .map(|i| {
            let d = -span + 2.0 * span * i as f64 / (points - 1) as f64;
            [d, p.toppling_slope * d, p.cone_slopes.0 * d, p.cone_slopes.1 * d]
        })
        .collect()
}

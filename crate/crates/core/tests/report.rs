use saddlestat::constrained::phase_curves;
use saddlestat::landscape::{complexity_distribution, simplicity_distribution, toppling_distribution};
use saddlestat::report::*;

#[test]
fn header_lines() {
    let h = provenance_header("dist --m 2", &[("seed".into(), "7".into()), ("n".into(), "100".into())]);
    let lines: Vec<&str> = h.lines().collect();
    assert_eq!(lines[0], format!("# tool=saddlestat {TOOL_VERSION}"));
    assert_eq!(lines[1], "# command=dist --m 2");
    assert_eq!(&lines[2..], ["# seed=7", "# n=100"]);
    assert!(h.ends_with('\n'));
}

#[test]
fn json_stamp() {
    let v = stamp_json(serde_json::json!({"x": 1}), "table");
    assert_eq!(v["x"], 1);
    assert_eq!(v["command"], "table");
    assert_eq!(v["tool"], format!("saddlestat {TOOL_VERSION}"));
    assert_eq!(stamp_json(serde_json::json!([1, 2]), "c"), serde_json::json!([1, 2]));
}

fn well_formed(svg: &str) {
    assert!(svg.starts_with("<svg "));
    assert!(svg.trim_end().ends_with("</svg>"));
    assert!(!svg.contains("NaN") && !svg.contains("inf"));
}

#[test]
fn discrete_distribution_renders_bars() {
    let d = simplicity_distribution(2.0).unwrap();
    let svg = render_svg(&distribution_plot(&d, "m = 2"));
    well_formed(&svg);
    assert_eq!(svg.matches("fill-opacity").count(), 1);
    assert!(svg.contains("m = 2"));
}

#[test]
fn atom_renders_marker() {
    let d = complexity_distribution(0.5).unwrap();
    let plot = distribution_plot(&d, "complexity");
    assert_eq!(plot.markers.len(), 1);
    let svg = render_svg(&plot);
    well_formed(&svg);
    assert!(svg.contains("atom "));
}

#[test]
fn continuous_distribution_renders_line() {
    let d = toppling_distribution(-1.0, 4.0, 101).unwrap();
    let plot = distribution_plot(&d, "toppling & co <1>");
    assert_eq!(plot.series[0].points.len(), 101);
    let svg = render_svg(&plot);
    well_formed(&svg);
    assert_eq!(svg.matches("<polyline").count(), 1);
    assert!(svg.contains("toppling &amp; co &lt;1&gt;"));
}

#[test]
fn phase_plots() {
    let grid: Vec<f64> = (1..=20).map(|i| 0.05 * i as f64).collect();
    let p = phase_curves(2.0, &grid).unwrap();
    let plot = phase_plot(&p);
    assert_eq!(plot.series.len(), 5);
    well_formed(&render_svg(&plot));
    let inset = phase_inset_plot(&p, 1.0);
    assert_eq!(inset.series.len(), 3);
    well_formed(&render_svg(&inset));

    let rows = phase_inset_rows(&p, 1.0, 11);
    assert_eq!(rows.len(), 11);
    assert_eq!(rows[0][0], -1.0);
    assert_eq!(rows[10][0], 1.0);
    for r in &rows {
        assert!((r[1] - 2.0 * r[0]).abs() < 1e-12);
        assert!((r[2] - p.cone_slopes.0 * r[0]).abs() < 1e-12);
        assert!((r[3] - p.cone_slopes.1 * r[0]).abs() < 1e-12);
    }
}

#[test]
fn empty_plot_still_renders() {
    well_formed(&render_svg(&Plot::default()));
    let plot = Plot { series: vec![Series::new("flat", vec![(1.0, 2.0), (1.0, 2.0)], Style::Points)], ..Default::default() };
    well_formed(&render_svg(&plot));
}

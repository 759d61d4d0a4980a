//! Minimal static SVG line plots: fixed 800x600 viewport, one or two panels,
//! polyline series with axis ticks. Plots are a convenience; the CSV files
//! are the data contract.

use std::fmt::Write;

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 600.0;

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

/// Render one or more vertically stacked panels into an SVG document.
pub fn render(panels: &[Panel]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let panel_height = HEIGHT / panels.len() as f64;
    for (i, panel) in panels.iter().enumerate() {
        render_panel(&mut out, panel, i as f64 * panel_height, panel_height);
    }
    let _ = writeln!(out, "</svg>");
    out
}

fn data_bounds(series: &[Series]) -> ((f64, f64), (f64, f64)) {
    let mut x = (f64::INFINITY, f64::NEG_INFINITY);
    let mut y = (f64::INFINITY, f64::NEG_INFINITY);
    for s in series {
        for (px, py) in &s.points {
            if px.is_finite() {
                x = (x.0.min(*px), x.1.max(*px));
            }
            if py.is_finite() {
                y = (y.0.min(*py), y.1.max(*py));
            }
        }
    }
    if !x.0.is_finite() || x.0 == x.1 {
        x = (0.0, 1.0);
    }
    if !y.0.is_finite() || y.0 == y.1 {
        y = (y.0.min(0.0), y.0.max(0.0) + 1.0);
    }
    (x, y)
}

fn render_panel(out: &mut String, panel: &Panel, y_offset: f64, height: f64) {
    let margin_left = 70.0;
    let margin_right = 20.0;
    let margin_top = 34.0;
    let margin_bottom = 46.0;
    let plot_w = WIDTH - margin_left - margin_right;
    let plot_h = height - margin_top - margin_bottom;
    let ((x0, x1), (y0, y1)) = data_bounds(&panel.series);
    let sx = move |x: f64| margin_left + (x - x0) / (x1 - x0) * plot_w;
    let sy = move |y: f64| y_offset + margin_top + plot_h - (y - y0) / (y1 - y0) * plot_h;

    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        margin_left + plot_w / 2.0,
        y_offset + 18.0,
        escape(&panel.title)
    );
    // Frame.
    let _ = writeln!(
        out,
        r#"<rect x="{margin_left}" y="{}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black" stroke-width="1"/>"#,
        y_offset + margin_top
    );
    // Ticks and labels.
    for k in 0..=4 {
        let fx = x0 + (x1 - x0) * k as f64 / 4.0;
        let px = sx(fx);
        let _ = writeln!(
            out,
            r#"<line x1="{px}" y1="{}" x2="{px}" y2="{}" stroke="black"/>"#,
            y_offset + margin_top + plot_h,
            y_offset + margin_top + plot_h + 4.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{px}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
            y_offset + margin_top + plot_h + 17.0,
            tick_label(fx)
        );
        let fy = y0 + (y1 - y0) * k as f64 / 4.0;
        let py = sy(fy);
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{py}" x2="{margin_left}" y2="{py}" stroke="black"/>"#,
            margin_left - 4.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#,
            margin_left - 7.0,
            py + 4.0,
            tick_label(fy)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#,
        margin_left + plot_w / 2.0,
        y_offset + margin_top + plot_h + 36.0,
        escape(&panel.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        y_offset + margin_top + plot_h / 2.0,
        y_offset + margin_top + plot_h / 2.0,
        escape(&panel.y_label)
    );
    // Series polylines plus a small legend.
    for (i, s) in panel.series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut points = String::new();
        for (x, y) in &s.points {
            if x.is_finite() && y.is_finite() {
                let _ = write!(points, "{},{} ", sx(*x), sy(*y));
            }
        }
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.3"/>"#,
            points.trim_end()
        );
        if !s.label.is_empty() {
            let lx = margin_left + plot_w - 150.0;
            let ly = y_offset + margin_top + 14.0 + 14.0 * i as f64;
            let _ = writeln!(
                out,
                r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
                lx + 18.0
            );
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11">{}</text>"#,
                lx + 23.0,
                ly + 4.0,
                escape(&s.label)
            );
        }
    }
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let magnitude = v.abs();
    if (1e-3..1e4).contains(&magnitude) {
        format!("{v:.3}")
    } else {
        format!("{v:.2e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

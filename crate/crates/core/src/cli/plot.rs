//! Minimal static SVG line charts.

use std::fmt::Write as _;

const WIDTH: f64 = 720.0;
const PANEL_HEIGHT: f64 = 260.0;
const MARGIN: f64 = 48.0;

struct Frame {
    top: f64,
    x_range: (f64, f64),
    y_range: (f64, f64),
}

impl Frame {
    fn new(top: f64, points: &[&[(f64, f64)]]) -> Self {
        let all = points.iter().flat_map(|p| p.iter());
        let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for &(x, y) in all {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if x0 > x1 {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if x1 - x0 < 1e-12 {
            x1 = x0 + 1.0;
        }
        y0 = y0.min(0.0);
        if y1 - y0 < 1e-12 {
            y1 = y0 + 1.0;
        }
        Self { top, x_range: (x0, x1), y_range: (y0, y1) }
    }

    fn map(&self, (x, y): (f64, f64)) -> (f64, f64) {
        let w = WIDTH - 2.0 * MARGIN;
        let h = PANEL_HEIGHT - 2.0 * MARGIN;
        let px = MARGIN + (x - self.x_range.0) / (self.x_range.1 - self.x_range.0) * w;
        let py = self.top + PANEL_HEIGHT - MARGIN - (y - self.y_range.0) / (self.y_range.1 - self.y_range.0) * h;
        (px, py)
    }

    fn axes(&self, out: &mut String, title: &str, x_label: &str, y_label: &str) {
        let (l, b) = (MARGIN, self.top + PANEL_HEIGHT - MARGIN);
        let (r, t) = (WIDTH - MARGIN, self.top + MARGIN);
        let _ = writeln!(out, r##"<line x1="{l:.2}" y1="{b:.2}" x2="{r:.2}" y2="{b:.2}" stroke="#333"/>"##);
        let _ = writeln!(out, r##"<line x1="{l:.2}" y1="{b:.2}" x2="{l:.2}" y2="{t:.2}" stroke="#333"/>"##);
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, self.top + 24.0, escape(title));
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="11">{}</text>"#, WIDTH / 2.0, b + 30.0, escape(x_label));
        let _ = writeln!(out, r#"<text x="12" y="{:.2}" font-size="11" transform="rotate(-90 12 {:.2})">{}</text>"#, (b + t) / 2.0, (b + t) / 2.0, escape(y_label));
        for (v, y) in [(self.y_range.0, b), (self.y_range.1, t)] {
            let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-size="10">{v:.3}</text>"#, l - 4.0, y + 3.0);
        }
        for (v, x) in [(self.x_range.0, l), (self.x_range.1, r)] {
            let _ = writeln!(out, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle" font-size="10">{v:.0}</text>"#, b + 14.0);
        }
    }

    fn polyline(&self, out: &mut String, class: &str, color: &str, points: &[(f64, f64)]) {
        let coords: Vec<String> = points
            .iter()
            .map(|&p| {
                let (x, y) = self.map(p);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(out, r#"<polyline class="{class}" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, coords.join(" "));
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Two stacked charts: actual vs stitched predictions for one series, and
/// the mean window RMSE per forecast origin.
pub fn backtest_svg(title: &str, actual: &[(f64, f64)], predicted: &[(f64, f64)], rmse: &[(f64, f64)]) -> String {
    let mut out = String::new();
    let height = 2.0 * PANEL_HEIGHT;
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}">"#);
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);

    let _ = writeln!(out, r#"<g id="chart-a">"#);
    let a = Frame::new(0.0, &[actual, predicted]);
    a.axes(&mut out, &format!("{title}: actual and predicted"), "step", "normalized count");
    a.polyline(&mut out, "actual", "#1f77b4", actual);
    a.polyline(&mut out, "predicted", "#d62728", predicted);
    let _ = writeln!(out, "</g>");

    let _ = writeln!(out, r#"<g id="chart-b">"#);
    let b = Frame::new(PANEL_HEIGHT, &[rmse]);
    b.axes(&mut out, "mean RMSE per forecast origin", "origin", "RMSE");
    b.polyline(&mut out, "rmse", "#2ca02c", rmse);
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, "</svg>");
    out
}

//! Minimal SVG line and bar charts.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 130.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

pub struct Series<'a> {
    pub label: &'a str,
    pub x: &'a [f64],
    pub y: &'a [f64],
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn open(svg: &mut String, title: &str, frame: &Frame, x_label: &str, y_label: &str) {
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="18" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let (l, r, t, b) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
    let _ = writeln!(
        svg,
        r#"<path d="M{l:.1} {t:.1}V{b:.1}H{r:.1}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let xv = frame.x0 + f * (frame.x1 - frame.x0);
        let yv = frame.y0 + f * (frame.y1 - frame.y0);
        let (x, y) = (frame.px(xv), frame.py(yv));
        let _ = writeln!(svg, r#"<path d="M{x:.1} {b:.1}v5M{l:.1} {y:.1}h-5" stroke="black"/>"#);
        let _ = writeln!(
            svg,
            r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            b + 18.0,
            tick(xv)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            l - 8.0,
            y + 4.0,
            tick(yv)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        (l + r) / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        (t + b) / 2.0,
        (t + b) / 2.0,
        escape(y_label)
    );
}

fn tick(v: f64) -> String {
    if v.abs() >= 1e4 || (v != 0.0 && v.abs() < 1e-2) {
        format!("{v:.1e}")
    } else {
        format!("{v:.2}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-300 {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

/// Line chart; non-finite points break the line.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series], y_range: Option<(f64, f64)>) -> String {
    let (x0, x1) = range(series.iter().flat_map(|s| s.x.iter().copied()));
    let (y0, y1) = y_range.unwrap_or_else(|| {
        let (lo, hi) = range(series.iter().flat_map(|s| s.y.iter().copied()));
        (lo.min(0.0), hi + 0.05 * (hi - lo))
    });
    let frame = Frame { x0, x1, y0, y1 };
    let mut svg = String::new();
    open(&mut svg, title, &frame, x_label, y_label);
    for (k, s) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let mut d = String::new();
        let mut pen_down = false;
        for (x, y) in s.x.iter().zip(s.y) {
            if !y.is_finite() {
                pen_down = false;
                continue;
            }
            let cmd = if pen_down { 'L' } else { 'M' };
            let _ = write!(d, "{cmd}{:.2} {:.2}", frame.px(*x), frame.py(y.clamp(y0, y1)));
            pen_down = true;
        }
        let _ = writeln!(
            svg,
            r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="1.5"/>"#
        );
        let ly = TOP + 16.0 * k as f64 + 8.0;
        let lx = WIDTH - RIGHT + 10.0;
        let _ = writeln!(
            svg,
            r#"<path d="M{lx:.1} {ly:.1}h20" stroke="{color}" stroke-width="2"/>"#
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}">{}</text>"#,
            lx + 26.0,
            ly + 4.0,
            escape(s.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Bar chart of a histogram given by bin centers and counts.
pub fn histogram_chart(title: &str, x_label: &str, centers: &[f64], counts: &[u64]) -> String {
    let width = if centers.len() > 1 {
        centers[1] - centers[0]
    } else {
        1.0
    };
    let x0 = centers.first().copied().unwrap_or(0.0) - width / 2.0;
    let x1 = centers.last().copied().unwrap_or(0.0) + width / 2.0;
    let top = counts.iter().copied().max().unwrap_or(0).max(1) as f64 * 1.05;
    let frame = Frame {
        x0,
        x1,
        y0: 0.0,
        y1: top,
    };
    let mut svg = String::new();
    open(&mut svg, title, &frame, x_label, "shots");
    for (c, n) in centers.iter().zip(counts) {
        let xa = frame.px(c - width / 2.0);
        let xb = frame.px(c + width / 2.0);
        let y = frame.py(*n as f64);
        let _ = writeln!(
            svg,
            r##"<rect x="{xa:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="#1f77b4" stroke="white" stroke-width="0.5"/>"##,
            xb - xa,
            frame.py(0.0) - y
        );
    }
    svg.push_str("</svg>\n");
    svg
}

//! Self-contained log-log line plots as SVG.

use std::fmt::Write as _;

const WIDTH: f64 = 820.0;
const HEIGHT: f64 = 520.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 210.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Decade range `[floor(log10 min), ceil(log10 max)]`, widened to at least one decade.
fn decades(values: impl Iterator<Item = f64>) -> (i32, i32) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0, 1);
    }
    let lo = lo.log10().floor() as i32;
    let hi = (hi.log10().ceil() as i32).max(lo + 1);
    (lo, hi)
}

fn tick_label(out: &mut String, x: f64, y: f64, anchor: &str, exp: i32) {
    let _ = write!(
        out,
        r#"<text x="{x:.1}" y="{y:.1}" text-anchor="{anchor}" font-size="12">10<tspan dy="-6" font-size="9">{exp}</tspan></text>"#
    );
    out.push('\n');
}

/// Renders the plot; returns the SVG text and one warning per series with
/// points dropped because they are not positive and finite on both axes.
pub fn render(plot: &Plot) -> (String, Vec<String>) {
    let mut warnings = Vec::new();
    let kept: Vec<Vec<(f64, f64)>> = plot
        .series
        .iter()
        .map(|s| {
            let ok: Vec<_> = s
                .points
                .iter()
                .copied()
                .filter(|(x, y)| x.is_finite() && y.is_finite() && *x > 0.0 && *y > 0.0)
                .collect();
            let dropped = s.points.len() - ok.len();
            if dropped > 0 {
                warnings.push(format!(
                    "{}: skipped {dropped} point(s) that are not positive on a log axis ({})",
                    s.name, plot.title
                ));
            }
            ok
        })
        .collect();

    let (x0, x1) = decades(kept.iter().flatten().map(|p| p.0));
    let (y0, y1) = decades(kept.iter().flatten().map(|p| p.1));
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x.log10() - f64::from(x0)) / f64::from(x1 - x0) * pw;
    let py = |y: f64| TOP + ph - (y.log10() - f64::from(y0)) / f64::from(y1 - y0) * ph;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="16">{}</text>"#,
        LEFT + pw / 2.0,
        escape(&plot.title)
    );

    // Grid, ticks and labels at every power of 10 (every other one on wide ranges).
    let step = |lo: i32, hi: i32| ((hi - lo) / 10 + 1) as usize;
    for e in (x0..=x1).step_by(step(x0, x1)) {
        let x = px(10f64.powi(e));
        let _ = writeln!(out, r##"<line x1="{x:.1}" y1="{TOP}" x2="{x:.1}" y2="{:.1}" stroke="#ddd"/>"##, TOP + ph);
        tick_label(&mut out, x, TOP + ph + 20.0, "middle", e);
    }
    for e in (y0..=y1).step_by(step(y0, y1)) {
        let y = py(10f64.powi(e));
        let _ = writeln!(out, r##"<line x1="{LEFT}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd"/>"##, LEFT + pw);
        tick_label(&mut out, LEFT - 8.0, y + 4.0, "end", e);
    }
    let _ = writeln!(out, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="13">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 15.0,
        escape(&plot.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="20" y="{:.1}" text-anchor="middle" font-size="13" transform="rotate(-90 20 {:.1})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(&plot.y_label)
    );

    for (i, (s, pts)) in plot.series.iter().zip(&kept).enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        // One vertex per distinct pixel position keeps long traces small.
        let mut path = String::new();
        let mut last: Option<(i64, i64)> = None;
        for (j, &(x, y)) in pts.iter().enumerate() {
            let (sx, sy) = (px(x), py(y));
            let cell = ((sx * 2.0).round() as i64, (sy * 2.0).round() as i64);
            if last == Some(cell) && j + 1 != pts.len() {
                continue;
            }
            last = Some(cell);
            let _ = write!(path, "{sx:.1},{sy:.1} ");
        }
        if pts.len() == 1 {
            let (sx, sy) = (px(pts[0].0), py(pts[0].1));
            let _ = writeln!(out, r#"<circle cx="{sx:.1}" cy="{sy:.1}" r="2.5" fill="{color}"/>"#);
        }
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            path.trim_end()
        );
        let ly = TOP + 16.0 + 20.0 * i as f64;
        let lx = LEFT + pw + 15.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="3"/>"#,
            lx + 24.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-size="12">{}</text>"#,
            lx + 30.0,
            ly + 4.0,
            escape(&s.name)
        );
    }
    out.push_str("</svg>\n");
    (out, warnings)
}

//! Minimal SVG renderer for the two chart shapes the tool emits: multi-series
//! line charts and per-level box plots. No external assets, one `<svg>` root.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 28.0;
const MARGIN_BOTTOM: f64 = 56.0;

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub stroke: &'static str,
    pub dash: Option<&'static str>,
}

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        let span = (self.x_max - self.x_min).max(f64::MIN_POSITIVE);
        MARGIN_LEFT + (v - self.x_min) / span * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn y(&self, v: f64) -> f64 {
        let span = (self.y_max - self.y_min).max(f64::MIN_POSITIVE);
        HEIGHT - MARGIN_BOTTOM - (v - self.y_min) / span * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

fn open_svg(out: &mut String) {
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    );
    let _ = writeln!(out, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
}

fn axes(out: &mut String, frame: &Frame, x_label: &str, y_label: &str) {
    let x0 = MARGIN_LEFT;
    let x1 = WIDTH - MARGIN_RIGHT;
    let y0 = HEIGHT - MARGIN_BOTTOM;
    let y1 = MARGIN_TOP;
    let _ = writeln!(
        out,
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>"
    );
    let _ = writeln!(
        out,
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>"
    );
    for i in 0..=4 {
        let f = f64::from(i) / 4.0;
        let xv = frame.x_min + f * (frame.x_max - frame.x_min);
        let yv = frame.y_min + f * (frame.y_max - frame.y_min);
        let xp = frame.x(xv);
        let yp = frame.y(yv);
        let _ = writeln!(
            out,
            "<line x1=\"{xp}\" y1=\"{y0}\" x2=\"{xp}\" y2=\"{}\" stroke=\"black\"/>",
            y0 + 5.0
        );
        let _ = writeln!(
            out,
            "<text x=\"{xp}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
            y0 + 20.0,
            tick(xv)
        );
        let _ = writeln!(
            out,
            "<line x1=\"{}\" y1=\"{yp}\" x2=\"{x0}\" y2=\"{yp}\" stroke=\"black\"/>",
            x0 - 5.0
        );
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>",
            x0 - 9.0,
            yp + 4.0,
            tick(yv)
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{x_label}</text>",
        (x0 + x1) / 2.0,
        HEIGHT - 14.0
    );
    let _ = writeln!(
        out,
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{y_label}</text>",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );
}

fn tick(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if !(0.001..10000.0).contains(&a) {
        return format!("{v:.1e}");
    }
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

/// Renders a line chart: one polyline per series, axes with ticks, a legend.
pub fn line_chart(series: &[Series], x_label: &str, y_label: &str, y_unit: bool) -> String {
    let xs = series.iter().flat_map(|s| s.points.iter().map(|p| p.0));
    let ys = series.iter().flat_map(|s| s.points.iter().map(|p| p.1));
    let (x_min, x_max) = min_max(xs);
    let (mut y_min, mut y_max) = min_max(ys);
    if y_unit {
        y_min = 0.0;
        y_max = 1.0;
    } else if y_min == y_max {
        y_min -= 0.5;
        y_max += 0.5;
    }
    let frame = Frame {
        x_min,
        x_max: if x_max > x_min { x_max } else { x_min + 1.0 },
        y_min,
        y_max,
    };

    let mut out = String::new();
    open_svg(&mut out);
    axes(&mut out, &frame, x_label, y_label);
    for s in series {
        let mut pts = String::new();
        for (x, y) in &s.points {
            let _ = write!(pts, "{:.2},{:.2} ", frame.x(*x), frame.y(*y));
        }
        let dash = s
            .dash
            .map(|d| format!(" stroke-dasharray=\"{d}\""))
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.8\"{dash}/>",
            pts.trim_end(),
            s.stroke
        );
        for (x, y) in &s.points {
            let _ = writeln!(
                out,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.2\" fill=\"{}\"/>",
                frame.x(*x),
                frame.y(*y),
                s.stroke
            );
        }
    }
    for (i, s) in series.iter().enumerate() {
        let ly = MARGIN_TOP + 14.0 * i as f64 + 6.0;
        let lx = WIDTH - MARGIN_RIGHT - 150.0;
        let dash = s
            .dash
            .map(|d| format!(" stroke-dasharray=\"{d}\""))
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "<line x1=\"{lx}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{}\" stroke-width=\"1.8\"{dash}/>",
            lx + 26.0,
            s.stroke
        );
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\">{}</text>",
            lx + 32.0,
            ly + 4.0,
            s.label
        );
    }
    out.push_str("</svg>\n");
    out
}

pub struct BoxRow {
    pub category: u64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// Renders one box-and-whisker glyph per category on an evenly spaced axis.
pub fn box_plot(rows: &[BoxRow], x_label: &str, y_label: &str) -> String {
    let (mut y_min, mut y_max) = min_max(rows.iter().flat_map(|r| [r.min, r.max]));
    if y_min == y_max {
        y_min -= 0.5;
        y_max += 0.5;
    }
    let pad = 0.05 * (y_max - y_min);
    let frame = Frame {
        x_min: 0.0,
        x_max: rows.len() as f64,
        y_min: y_min - pad,
        y_max: y_max + pad,
    };

    let mut out = String::new();
    open_svg(&mut out);
    let x0 = MARGIN_LEFT;
    let y_base = HEIGHT - MARGIN_BOTTOM;
    let _ = writeln!(
        out,
        "<line x1=\"{x0}\" y1=\"{y_base}\" x2=\"{}\" y2=\"{y_base}\" stroke=\"black\"/>",
        WIDTH - MARGIN_RIGHT
    );
    let _ = writeln!(
        out,
        "<line x1=\"{x0}\" y1=\"{y_base}\" x2=\"{x0}\" y2=\"{MARGIN_TOP}\" stroke=\"black\"/>"
    );
    for i in 0..=4 {
        let yv = frame.y_min + f64::from(i) / 4.0 * (frame.y_max - frame.y_min);
        let yp = frame.y(yv);
        let _ = writeln!(
            out,
            "<line x1=\"{}\" y1=\"{yp}\" x2=\"{x0}\" y2=\"{yp}\" stroke=\"black\"/>",
            x0 - 5.0
        );
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>",
            x0 - 9.0,
            yp + 4.0,
            tick(yv)
        );
    }
    let slot = (WIDTH - MARGIN_LEFT - MARGIN_RIGHT) / rows.len().max(1) as f64;
    for (i, r) in rows.iter().enumerate() {
        let cx = frame.x(i as f64 + 0.5);
        let half = 0.3 * slot;
        let (ymin, yq1, ymed, yq3, ymax) = (
            frame.y(r.min),
            frame.y(r.q1),
            frame.y(r.median),
            frame.y(r.q3),
            frame.y(r.max),
        );
        let _ = writeln!(
            out,
            "<line x1=\"{cx}\" y1=\"{ymin}\" x2=\"{cx}\" y2=\"{ymax}\" stroke=\"black\"/>"
        );
        for yw in [ymin, ymax] {
            let _ = writeln!(
                out,
                "<line x1=\"{}\" y1=\"{yw}\" x2=\"{}\" y2=\"{yw}\" stroke=\"black\"/>",
                cx - half * 0.6,
                cx + half * 0.6
            );
        }
        let _ = writeln!(
            out,
            "<rect x=\"{}\" y=\"{yq3}\" width=\"{}\" height=\"{}\" fill=\"#9ecae1\" stroke=\"black\"/>",
            cx - half,
            2.0 * half,
            (yq1 - yq3).max(0.5)
        );
        let _ = writeln!(
            out,
            "<line x1=\"{}\" y1=\"{ymed}\" x2=\"{}\" y2=\"{ymed}\" stroke=\"black\" stroke-width=\"2\"/>",
            cx - half,
            cx + half
        );
        let _ = writeln!(
            out,
            "<text x=\"{cx}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
            y_base + 20.0,
            r.category
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{x_label}</text>",
        (MARGIN_LEFT + WIDTH - MARGIN_RIGHT) / 2.0,
        HEIGHT - 14.0
    );
    let _ = writeln!(
        out,
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{y_label}</text>",
        (y_base + MARGIN_TOP) / 2.0,
        (y_base + MARGIN_TOP) / 2.0
    );
    out.push_str("</svg>\n");
    out
}

fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo > hi {
        (0.0, 1.0)
    } else {
        (lo, hi)
    }
}

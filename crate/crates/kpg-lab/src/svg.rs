//! Minimal deterministic SVG line charts.
//!
//! The emitter produces a self-contained document from data series alone —
//! no system fonts queried, no timestamps, no randomness — so the same
//! trace always yields byte-identical output, which keeps plots diffable
//! in tests and across machines.

/// One polyline with a legend label.
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// A complete chart: axes, labelled series, title.
#[derive(Debug, Clone)]
pub struct Figure {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 616.0;
const TOP: f64 = 48.0;
const BOTTOM: f64 = 372.0;
const TICKS: usize = 5;

/// Fixed palette cycled across series.
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

/// Data range padded so flat series still get a visible band.
fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-300 {
        let pad = lo.abs().max(1.0) * 0.1;
        return (lo - pad, hi + pad);
    }
    let pad = (hi - lo) * 0.05;
    (lo - pad, hi + pad)
}

/// Deterministic tick label: plain decimal for moderate magnitudes,
/// scientific otherwise.
fn tick_label(v: f64) -> String {
    let magnitude = v.abs();
    if magnitude != 0.0 && !(1e-3..1e4).contains(&magnitude) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn x_pixel(v: f64, range: (f64, f64)) -> f64 {
    LEFT + (v - range.0) / (range.1 - range.0) * (RIGHT - LEFT)
}

fn y_pixel(v: f64, range: (f64, f64)) -> f64 {
    BOTTOM - (v - range.0) / (range.1 - range.0) * (BOTTOM - TOP)
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Render the figure as a complete SVG document.
pub fn render(figure: &Figure) -> String {
    let x_range = padded_range(figure.series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let y_range = padded_range(figure.series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         font-family=\"monospace\" font-size=\"12\">\n"
    ));
    out.push_str(&format!(
        "  <rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
    out.push_str(&format!(
        "  <text x=\"{:.1}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
        (LEFT + RIGHT) / 2.0,
        escape(&figure.title)
    ));

    // Axes.
    out.push_str(&format!(
        "  <line x1=\"{LEFT}\" y1=\"{BOTTOM}\" x2=\"{RIGHT}\" y2=\"{BOTTOM}\" stroke=\"black\"/>\n"
    ));
    out.push_str(&format!(
        "  <line x1=\"{LEFT}\" y1=\"{TOP}\" x2=\"{LEFT}\" y2=\"{BOTTOM}\" stroke=\"black\"/>\n"
    ));

    // Ticks, grid lines, and labels.
    for t in 0..=TICKS {
        let frac = t as f64 / TICKS as f64;
        let xv = x_range.0 + frac * (x_range.1 - x_range.0);
        let xp = x_pixel(xv, x_range);
        out.push_str(&format!(
            "  <line x1=\"{xp:.2}\" y1=\"{BOTTOM}\" x2=\"{xp:.2}\" y2=\"{:.2}\" stroke=\"#dddddd\"/>\n",
            TOP
        ));
        out.push_str(&format!(
            "  <text x=\"{xp:.2}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
            BOTTOM + 18.0,
            tick_label(xv)
        ));
        let yv = y_range.0 + frac * (y_range.1 - y_range.0);
        let yp = y_pixel(yv, y_range);
        out.push_str(&format!(
            "  <line x1=\"{LEFT}\" y1=\"{yp:.2}\" x2=\"{RIGHT}\" y2=\"{yp:.2}\" stroke=\"#dddddd\"/>\n"
        ));
        out.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>\n",
            LEFT - 6.0,
            yp + 4.0,
            tick_label(yv)
        ));
    }

    // Axis labels.
    out.push_str(&format!(
        "  <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
        (LEFT + RIGHT) / 2.0,
        HEIGHT - 8.0,
        escape(&figure.x_label)
    ));
    out.push_str(&format!(
        "  <text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1})\">{}</text>\n",
        (TOP + BOTTOM) / 2.0,
        (TOP + BOTTOM) / 2.0,
        escape(&figure.y_label)
    ));

    // Series.
    for (idx, series) in figure.series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        if series.points.len() == 1 {
            let (x, y) = series.points[0];
            out.push_str(&format!(
                "  <circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>\n",
                x_pixel(x, x_range),
                y_pixel(y, y_range)
            ));
        } else {
            let points: Vec<String> = series
                .points
                .iter()
                .map(|&(x, y)| {
                    format!("{:.2},{:.2}", x_pixel(x, x_range), y_pixel(y, y_range))
                })
                .collect();
            out.push_str(&format!(
                "  <polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
                points.join(" ")
            ));
        }
        // Legend entry.
        let ly = TOP + 14.0 * idx as f64;
        out.push_str(&format!(
            "  <line x1=\"{:.1}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
            RIGHT - 110.0,
            RIGHT - 90.0
        ));
        out.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{:.1}\">{}</text>\n",
            RIGHT - 84.0,
            ly + 4.0,
            escape(&series.label)
        ));
    }

    out.push_str("</svg>\n");
    out
}

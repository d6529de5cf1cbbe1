//! Static SVG heatmaps of node fields with a linear colour bar.

use std::fmt::Write;

use toda_lab::grid::Grid2D;

const PLOT: f64 = 480.0;
const PAD: f64 = 40.0;
const BAR_W: f64 = 18.0;
const NO_DATA: &str = "#bdbdbd";

// viridis, sampled at five evenly spaced stops
const STOPS: [(f64, f64, f64); 5] = [
    (68.0, 1.0, 84.0),
    (59.0, 82.0, 139.0),
    (33.0, 145.0, 140.0),
    (94.0, 201.0, 98.0),
    (253.0, 231.0, 37.0),
];

/// Colour for `t` in [0, 1], linear between the stops.
fn colour(t: f64) -> String {
    let t = t.clamp(0.0, 1.0) * (STOPS.len() - 1) as f64;
    let i = (t.floor() as usize).min(STOPS.len() - 2);
    let f = t - i as f64;
    let (a, b) = (STOPS[i], STOPS[i + 1]);
    let mix = |x: f64, y: f64| (x + f * (y - x)).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// One square cell per node; non-finite values are drawn grey.
pub fn heatmap(grid: &Grid2D, values: &[f64], title: &str) -> String {
    let nodes = grid.nodes();
    let h = grid.h();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for n in nodes {
        x0 = x0.min(n.x);
        x1 = x1.max(n.x);
        y0 = y0.min(n.y);
        y1 = y1.max(n.y);
    }
    let span = (x1 - x0).max(y1 - y0) + h;
    let scale = PLOT / span;
    let finite = values.iter().copied().filter(|v| v.is_finite());
    let (lo, hi) = finite.fold((f64::MAX, f64::MIN), |(a, b), v| (a.min(v), b.max(v)));
    let (lo, hi) = if lo > hi { (0.0, 1.0) } else { (lo, hi) };
    let width = if hi > lo { hi - lo } else { 1.0 };

    let total_w = PLOT + 3.0 * PAD + BAR_W + 60.0;
    let total_h = PLOT + 2.0 * PAD;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{total_w}" height="{total_h}" viewBox="0 0 {total_w} {total_h}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{PAD}" y="{}" font-family="sans-serif" font-size="14">{}</text>"#,
        PAD * 0.6,
        escape(title)
    );
    let cell = h * scale;
    for (n, &v) in nodes.iter().zip(values) {
        let px = PAD + (n.x - x0) * scale;
        let py = PAD + (y1 - n.y) * scale;
        let fill = if v.is_finite() {
            colour((v - lo) / width)
        } else {
            NO_DATA.to_string()
        };
        let _ = writeln!(
            s,
            r#"<rect x="{px:.2}" y="{py:.2}" width="{cell:.2}" height="{cell:.2}" fill="{fill}"/>"#
        );
    }

    let bx = 2.0 * PAD + PLOT;
    let _ = writeln!(
        s,
        r#"<defs><linearGradient id="scale" x1="0" y1="1" x2="0" y2="0">"#
    );
    for k in 0..=10 {
        let t = k as f64 / 10.0;
        let _ = writeln!(s, r#"<stop offset="{t}" stop-color="{}"/>"#, colour(t));
    }
    let _ = writeln!(s, "</linearGradient></defs>");
    let _ = writeln!(
        s,
        r#"<rect x="{bx}" y="{PAD}" width="{BAR_W}" height="{PLOT}" fill="url(#scale)" stroke="black" stroke-width="0.5"/>"#
    );
    for (label, y) in [(hi, PAD + 4.0), (lo, PAD + PLOT)] {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{y}" font-family="sans-serif" font-size="11">{label:.6}</text>"#,
            bx + BAR_W + 4.0
        );
    }
    s.push_str("</svg>\n");
    s
}

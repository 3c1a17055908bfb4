//! Population-versus-time figure as a standalone SVG document.

use std::fmt::Write as _;

use lindblad_calib::measurement::ExperimentRecord;

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 130.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

/// Record probabilities as dots and, when given, model populations on the
/// same delay axis as lines. One series of each per bitstring.
pub fn population_plot(record: &ExperimentRecord, model: Option<&[Vec<f64>]>, title: &str) -> String {
    let times = record.grid.times();
    let (x0, x1) = (times[0], *times.last().expect("non-empty grid"));
    let x1 = if x1 > x0 { x1 } else { x0 + 1.0 };
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |t: f64| LEFT + (t - x0) / (x1 - x0) * pw;
    let sy = |p: f64| TOP + (1.0 - p) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">{}</text>"#, LEFT + pw / 2.0, escape(title));

    // Axes and ticks.
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="black"/>"#
    );
    for t in ticks(x0, x1) {
        let x = sx(t);
        let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, TOP + ph, TOP + ph + 5.0);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, TOP + ph + 18.0, trim(t));
    }
    for i in 0..=4 {
        let p = i as f64 / 4.0;
        let y = sy(p);
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/>"#, LEFT - 5.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 8.0, y + 4.0, trim(p));
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">delay (us)</text>"#, LEFT + pw / 2.0, HEIGHT - 15.0);
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">population</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );

    for (b, label) in record.bitstrings().iter().enumerate() {
        let color = PALETTE[b % PALETTE.len()];
        let _ = writeln!(s, r#"<g class="dots" data-bitstring="{label}" fill="{color}">"#);
        for (k, row) in record.probs.iter().enumerate() {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5"/>"#, sx(times[k]), sy(row[b]));
        }
        s.push_str("</g>\n");
        if let Some(model) = model {
            let pts: Vec<String> =
                model.iter().enumerate().map(|(k, row)| format!("{:.2},{:.2}", sx(times[k]), sy(row[b]))).collect();
            let _ = writeln!(
                s,
                r#"<g class="model" data-bitstring="{label}"><polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/></g>"#,
                pts.join(" ")
            );
        }
        let ly = TOP + 10.0 + 18.0 * b as f64;
        let lx = WIDTH - RIGHT + 20.0;
        let _ = writeln!(s, r#"<circle cx="{lx:.2}" cy="{ly:.2}" r="3" fill="{color}"/>"#);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">|{label}&#x27E9;</text>"#, lx + 10.0, ly + 4.0);
    }
    s.push_str("</svg>\n");
    s
}

/// Round tick positions, about five across `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step + 1e-9).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn trim(x: f64) -> String {
    let s = format!("{x:.2}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

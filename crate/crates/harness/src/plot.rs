//! Minimal SVG line chart of cumulative regret.

use std::fmt::Write;

use crate::experiment::AlgoRun;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
];

/// Cumulative regret against round, one polyline per run, with a legend.
/// Output depends only on the input.
pub fn render_svg(runs: &[AlgoRun]) -> String {
    let rounds = runs
        .iter()
        .flat_map(|r| r.curve.iter().map(|c| c.round))
        .max()
        .unwrap_or(1)
        .max(1) as f64;
    let values = runs
        .iter()
        .flat_map(|r| r.curve.iter().map(|c| c.cum_regret));
    let (lo, hi) = values.fold((0.0_f64, 0.0_f64), |(lo, hi), v| {
        if v.is_finite() {
            (lo.min(v), hi.max(v))
        } else {
            (lo, hi)
        }
    });
    let span = if hi - lo > 0.0 { hi - lo } else { 1.0 };
    let px = |t: f64| MARGIN + (WIDTH - 2.0 * MARGIN) * t / rounds;
    let py = |v: f64| HEIGHT - MARGIN - (HEIGHT - 2.0 * MARGIN) * (v - lo) / span;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (x0, x1, y0, y1) = (MARGIN, WIDTH - MARGIN, HEIGHT - MARGIN, MARGIN);
    let _ = writeln!(
        s,
        r#"<path d="M{x0} {y1} L{x0} {y0} L{x1} {y0}" stroke="black" fill="none"/>"#
    );
    for i in 0..=4 {
        let v = lo + span * i as f64 / 4.0;
        let y = py(v);
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            x0 - 6.0,
            y + 4.0,
            format_tick(v)
        );
        let t = rounds * i as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            px(t),
            y0 + 18.0,
            t.round()
        );
    }
    if lo < 0.0 {
        let _ = writeln!(
            s,
            r##"<line x1="{x0}" y1="{:.2}" x2="{x1}" y2="{:.2}" stroke="#999" stroke-dasharray="4 3"/>"##,
            py(0.0),
            py(0.0)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">round</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.1}" text-anchor="middle" transform="rotate(-90 14 {:.1})">cumulative regret</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    for (i, run) in runs.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut d = String::new();
        for (j, c) in run
            .curve
            .iter()
            .filter(|c| c.cum_regret.is_finite())
            .enumerate()
        {
            let _ = write!(
                d,
                "{}{:.2} {:.2}",
                if j == 0 { "M" } else { " L" },
                px(c.round as f64),
                py(c.cum_regret)
            );
        }
        let _ = writeln!(
            s,
            r#"<path d="{d}" stroke="{color}" stroke-width="1.5" fill="none"/>"#
        );
        let ly = y1 + 16.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            x0 + 12.0,
            x0 + 32.0,
            x0 + 38.0,
            ly + 4.0,
            run.algo()
        );
    }
    s.push_str("</svg>\n");
    s
}

fn format_tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.1e}")
    } else {
        format!("{v:.2}")
    }
}

//! Minimal line charts.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

pub struct Series<'a> {
    pub label: &'a str,
    pub values: &'a [f64],
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Plots each series against its index, with the y axis fixed to `[0, 1]`.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let points = series.iter().map(|s| s.values.len()).max().unwrap_or(0);
    let x_max = points.saturating_sub(1).max(1) as f64;
    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let px = |x: f64| MARGIN + plot_w * x / x_max;
    let py = |y: f64| HEIGHT - MARGIN - plot_h * y.clamp(0.0, 1.0);

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    )
    .unwrap();
    writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        MARGIN / 2.0,
        escape(title)
    )
    .unwrap();
    writeln!(
        svg,
        r#"<path d="M{l} {t} L{l} {b} L{r} {b}" stroke="black" fill="none"/>"#,
        l = MARGIN,
        t = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    )
    .unwrap();
    for i in 0..=4 {
        let y = i as f64 / 4.0;
        writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="end" font-family="sans-serif" font-size="11">{y:.2}</text>"#,
            MARGIN - 6.0,
            py(y) + 4.0
        )
        .unwrap();
    }
    let ticks = 5.min(points.saturating_sub(1)).max(1);
    for i in 0..=ticks {
        let x = (x_max * i as f64 / ticks as f64).round();
        writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="11">{x}</text>"#,
            px(x),
            HEIGHT - MARGIN + 16.0
        )
        .unwrap();
    }
    writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    )
    .unwrap();
    writeln!(
        svg,
        r#"<text x="16" y="{y}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 16 {y})">{}</text>"#,
        escape(y_label),
        y = HEIGHT / 2.0
    )
    .unwrap();
    for (k, s) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<String> =
            s.values.iter().enumerate().map(|(i, &v)| format!("{:.2},{:.2}", px(i as f64), py(v))).collect();
        writeln!(svg, r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#, pts.join(" "))
            .unwrap();
        if series.len() > 1 {
            let y = MARGIN + 14.0 + 16.0 * k as f64;
            writeln!(
                svg,
                r#"<text x="{}" y="{y}" text-anchor="end" font-family="sans-serif" font-size="12" fill="{color}">{}</text>"#,
                WIDTH - MARGIN - 4.0,
                escape(s.label)
            )
            .unwrap();
        }
    }
    svg.push_str("</svg>\n");
    svg
}

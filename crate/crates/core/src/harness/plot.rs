use std::fmt::Write as _;
use std::path::Path;

use super::record::{read_rows, SweepRow};
use crate::error::{Error, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;

/// Reads sweep rows from `csv` and writes an SVG chart to `svg`.
pub fn emit_plot(csv: &Path, svg: &Path) -> Result<()> {
    let rows = read_rows(csv)?;
    std::fs::write(svg, render_svg(&rows, "axis value")?).map_err(|e| Error::io(svg, e))
}

/// Estimate against axis value with 95% interval whiskers. The x axis is
/// logarithmic when the values are positive and span more than a factor of 8.
pub fn render_svg(rows: &[SweepRow], x_label: &str) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::Csv("no rows to plot".into()));
    }
    if let Some(r) = rows
        .iter()
        .find(|r| !r.axis_value.is_finite() || ![r.estimate, r.ci_lo, r.ci_hi].iter().all(|v| (0.0..=1.0).contains(v)))
    {
        return Err(Error::Csv(format!("row with axis value {} is out of range", r.axis_value)));
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.axis_value).collect();
    let (lo, hi) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let log = lo > 0.0 && hi / lo > 8.0;
    let t = |x: f64| if log { x.ln() } else { x };
    let (tlo, thi) = if t(hi) > t(lo) { (t(lo), t(hi)) } else { (t(lo) - 0.5, t(lo) + 0.5) };
    let px = |x: f64| MARGIN + (t(x) - tlo) / (thi - tlo) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - y * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (x0, x1, y0, y1) = (MARGIN, WIDTH - MARGIN, py(0.0), py(1.0));
    let _ = writeln!(
        s,
        r#"<g stroke="black" fill="none"><line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}"/><line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/></g>"#
    );
    for i in 0..=4 {
        let y = i as f64 / 4.0;
        let _ = writeln!(
            s,
            r##"<line x1="{x0}" y1="{py:.2}" x2="{x1}" y2="{py:.2}" stroke="#ddd"/><text x="{tx}" y="{ty:.2}" text-anchor="end">{y:.2}</text>"##,
            py = py(y),
            tx = x0 - 6.0,
            ty = py(y) + 4.0
        );
    }
    for &x in &xs {
        let _ =
            writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, px(x), y0 + 16.0, fmt_num(x));
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">estimate</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    let points: Vec<String> = rows.iter().map(|r| format!("{:.2},{:.2}", px(r.axis_value), py(r.estimate))).collect();
    let _ =
        writeln!(s, r##"<polyline fill="none" stroke="#1f5fa8" stroke-width="1.5" points="{}"/>"##, points.join(" "));
    for r in rows {
        let (x, a, b) = (px(r.axis_value), py(r.ci_lo), py(r.ci_hi));
        let _ = writeln!(
            s,
            r##"<g stroke="#1f5fa8"><line x1="{x:.2}" y1="{a:.2}" x2="{x:.2}" y2="{b:.2}"/><line x1="{l:.2}" y1="{a:.2}" x2="{r_:.2}" y2="{a:.2}"/><line x1="{l:.2}" y1="{b:.2}" x2="{r_:.2}" y2="{b:.2}"/></g>"##,
            l = x - 4.0,
            r_ = x + 4.0
        );
        let _ = writeln!(s, r##"<circle cx="{x:.2}" cy="{:.2}" r="3.5" fill="#1f5fa8"/>"##, py(r.estimate));
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn fmt_num(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(x: f64, e: f64) -> SweepRow {
        SweepRow {
            axis_value: x,
            estimate: e,
            ci_lo: (e - 0.05).max(0.0),
            ci_hi: (e + 0.05).min(1.0),
            trials: 100,
            successes: (e * 100.0) as u64,
        }
    }

    #[test]
    fn one_circle_per_row() {
        let rows: Vec<_> = [2.0, 8.0, 32.0, 128.0].iter().map(|&k| row(k, 0.5)).collect();
        let svg = render_svg(&rows, "K <truncation>").unwrap();
        let doc = roxmltree::Document::parse(&svg).unwrap();
        assert_eq!(doc.descendants().filter(|n| n.has_tag_name("circle")).count(), 4);
    }

    #[test]
    fn single_point_and_bad_rows() {
        assert!(render_svg(&[row(3.0, 1.0)], "x").is_ok());
        assert!(render_svg(&[], "x").is_err());
        assert!(render_svg(&[row(f64::NAN, 0.5)], "x").is_err());
    }
}

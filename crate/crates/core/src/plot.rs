//! Dependency-free SVG plots on a fixed 800x600 canvas.
//!
//! Plots are conveniences; the CSV files written alongside them carry the
//! numbers. Coordinates are printed with three decimals so output is stable.

use std::fmt::Write;

use crate::stats::SignificanceMatrix;

const W: f64 = 800.0;
const H: f64 = 600.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 800 600" width="800" height="600" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="800" height="600" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="400" y="24" text-anchor="middle" font-size="16">{}</text>"#, escape(title));
}

struct Axes {
    x_max: f64,
    y_max: f64,
}

impl Axes {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x / self.x_max).clamp(0.0, 1.0) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y / self.y_max).clamp(0.0, 1.0) * (H - TOP - BOTTOM)
    }

    fn draw(&self, out: &mut String, x_label: &str, y_label: &str) {
        let (x0, y0, x1, y1) = (LEFT, H - BOTTOM, W - RIGHT, TOP);
        let _ = writeln!(out, r#"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="black"/>"#, x1 - x0, y0 - y1);
        for i in 0..=5 {
            let f = i as f64 / 5.0;
            let (gx, gy) = (self.px(f * self.x_max), self.py(f * self.y_max));
            let _ = writeln!(out, r##"<line x1="{gx:.3}" y1="{y0}" x2="{gx:.3}" y2="{y1}" stroke="#ddd"/>"##);
            let _ = writeln!(out, r##"<line x1="{x0}" y1="{gy:.3}" x2="{x1}" y2="{gy:.3}" stroke="#ddd"/>"##);
            let _ = writeln!(out, r#"<text x="{gx:.3}" y="{}" text-anchor="middle">{}</text>"#, y0 + 16.0, tick(f * self.x_max));
            let _ = writeln!(out, r#"<text x="{}" y="{:.3}" text-anchor="end">{}</text>"#, x0 - 6.0, gy + 4.0, tick(f * self.y_max));
        }
        let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, (x0 + x1) / 2.0, H - 20.0, escape(x_label));
        let _ = writeln!(
            out,
            r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">{1}</text>"#,
            (y0 + y1) / 2.0,
            escape(y_label)
        );
    }
}

fn tick(v: f64) -> String {
    let s = format!("{v:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// DET curves as right-continuous staircases of `(rfa, pmiss)` points,
/// clipped to RFA in `[0, x_max]`.
pub fn det_svg(title: &str, curves: &[(String, Vec<(f64, f64)>)], x_max: f64) -> String {
    let axes = Axes { x_max: if x_max > 0.0 { x_max } else { 1.0 }, y_max: 1.0 };
    let mut out = String::new();
    header(&mut out, title);
    axes.draw(&mut out, "Rate of false alarms per minute", "Probability of missed detection");
    for (k, (name, points)) in curves.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut coords = vec![(0.0, 1.0)];
        for &(x, y) in points {
            if x > axes.x_max {
                break;
            }
            let last = coords.last().expect("nonempty").1;
            coords.push((x, last));
            coords.push((x, y));
        }
        let last = coords.last().expect("nonempty").1;
        coords.push((axes.x_max, last));
        let pts: Vec<String> = coords.iter().map(|&(x, y)| format!("{:.3},{:.3}", axes.px(x), axes.py(y))).collect();
        let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
        legend(&mut out, k, color, name);
    }
    out.push_str("</svg>\n");
    out
}

fn legend(out: &mut String, k: usize, color: &str, name: &str) {
    let y = TOP + 14.0 * k as f64 + 6.0;
    let x = W - RIGHT + 10.0;
    let _ = writeln!(out, r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{color}" stroke-width="2"/>"#, x + 18.0);
    let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, x + 22.0, y + 4.0, escape(name));
}

/// Scatter of `(x, y)` points, e.g. processing time against score.
pub fn scatter_svg(title: &str, x_label: &str, y_label: &str, points: &[(f64, f64)]) -> String {
    let x_max = points.iter().map(|p| p.0).fold(0.0, f64::max);
    let y_max = points.iter().map(|p| p.1).fold(0.0, f64::max);
    let axes = Axes { x_max: if x_max > 0.0 { x_max } else { 1.0 }, y_max: if y_max > 0.0 { y_max } else { 1.0 } };
    let mut out = String::new();
    header(&mut out, title);
    axes.draw(&mut out, x_label, y_label);
    for &(x, y) in points {
        let _ = writeln!(out, r##"<circle cx="{:.3}" cy="{:.3}" r="3" fill="#1f77b4"/>"##, axes.px(x), axes.py(y));
    }
    out.push_str("</svg>\n");
    out
}

/// Pairwise significance grid: a green cell means the row run is
/// significantly better than the column run.
pub fn significance_svg(title: &str, m: &SignificanceMatrix) -> String {
    let k = m.names.len().max(1) as f64;
    let (x0, y0) = (160.0, 160.0);
    let cell = ((W - x0 - 20.0) / k).min((H - y0 - 20.0) / k);
    let mut out = String::new();
    header(&mut out, title);
    for (i, name) in m.names.iter().enumerate() {
        let c = (i as f64 + 0.5) * cell;
        let _ = writeln!(out, r#"<text x="{}" y="{:.3}" text-anchor="end">{}</text>"#, x0 - 6.0, y0 + c + 4.0, escape(name));
        let _ = writeln!(
            out,
            r#"<text x="{0:.3}" y="{1}" transform="rotate(-60 {0:.3} {1})">{2}</text>"#,
            x0 + c,
            y0 - 6.0,
            escape(name)
        );
    }
    for (i, row) in m.better.iter().enumerate() {
        for (j, &b) in row.iter().enumerate() {
            let fill = if i == j { "#bbbbbb" } else if b { "#2ca02c" } else { "#f4f4f4" };
            let _ = writeln!(
                out,
                r##"<rect x="{:.3}" y="{:.3}" width="{cell:.3}" height="{cell:.3}" fill="{fill}" stroke="#888"/>"##,
                x0 + j as f64 * cell,
                y0 + i as f64 * cell
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_plot_shape() {
        let svg = det_svg("t", &[("a<b".into(), vec![(0.0, 1.0), (0.1, 0.5), (3.0, 0.0)])], 1.0);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(svg.contains(r#"viewBox="0 0 800 600""#));
        assert!(svg.contains("a&lt;b"));
        assert_eq!(svg.matches("<polyline").count(), 1);
    }

    #[test]
    fn grid_colors() {
        let m = SignificanceMatrix {
            names: vec!["x".into(), "y".into()],
            means: vec![0.5, 0.1],
            p_values: vec![vec![None, Some(0.01)], vec![Some(0.01), None]],
            better: vec![vec![false, true], vec![false, false]],
            alpha: 0.05,
        };
        let svg = significance_svg("g", &m);
        assert_eq!(svg.matches("#2ca02c").count(), 1);
        assert_eq!(svg.matches("<rect x=").count(), 4);
    }

    #[test]
    fn scatter_is_deterministic() {
        let p = [(1.0, 0.2), (4.5, 0.1)];
        assert_eq!(scatter_svg("s", "x", "y", &p), scatter_svg("s", "x", "y", &p));
    }
}

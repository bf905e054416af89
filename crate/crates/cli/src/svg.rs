//! Two-panel SVG: the (x, y) projection with the attracting centre marked,
//! and z(t) with vertical lines at its zeros.

use std::fmt::Write;

const MARGIN: f64 = 44.0;
const BASE: &str = "#303030";
const DOMAIN: &str = "#7b3fa0";
const IMAGE: &str = "#e08a1e";

#[derive(Debug, Clone, Default)]
pub struct Plot {
    /// `(t, x, y, z)` in time order.
    pub points: Vec<[f64; 4]>,
    pub zeros: Vec<f64>,
    /// A fundamental domain and its image, highlighted in both panels.
    pub domain: Option<(f64, f64)>,
    pub image: Option<(f64, f64)>,
}

struct Frame {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    lo: (f64, f64),
    hi: (f64, f64),
}

impl Frame {
    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let fx = (x - self.lo.0) / (self.hi.0 - self.lo.0);
        let fy = (y - self.lo.1) / (self.hi.1 - self.lo.1);
        (self.x0 + fx * self.w, self.y0 + (1.0 - fy) * self.h)
    }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if !(hi > lo) {
        let d = lo.abs().max(1.0);
        return (lo - d, hi + d);
    }
    let pad = 0.04 * (hi - lo);
    (lo - pad, hi + pad)
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)))
}

fn within(t: f64, span: Option<(f64, f64)>) -> bool {
    span.is_some_and(|(a, b)| t >= a.min(b) && t <= a.max(b))
}

fn polyline(out: &mut String, pts: &[(f64, f64)], color: &str, width: f64) {
    if pts.len() < 2 {
        return;
    }
    let _ = write!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="{width}" points=""#);
    for (x, y) in pts {
        let _ = write!(out, "{x:.2},{y:.2} ");
    }
    out.push_str("\"/>\n");
}

fn frame_box(out: &mut String, f: &Frame, title: &str, xlabel: &str) {
    let _ = writeln!(
        out,
        r##"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="#888"/>"##,
        f.x0, f.y0, f.w, f.h
    );
    let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" font-size="13" text-anchor="middle">{title}</text>"#, f.x0 + f.w / 2.0, f.y0 - 10.0);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" font-size="10">{:.4}</text><text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end">{:.4}</text>"#,
        f.x0,
        f.y0 + f.h + 14.0,
        f.lo.0,
        f.x0 + f.w,
        f.y0 + f.h + 14.0,
        f.hi.0
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="middle">{xlabel}</text>"#,
        f.x0 + f.w / 2.0,
        f.y0 + f.h + 28.0
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end">{:.4}</text><text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end">{:.4}</text>"#,
        f.x0 - 4.0,
        f.y0 + f.h,
        f.lo.1,
        f.x0 - 4.0,
        f.y0 + 10.0,
        f.hi.1
    );
}

/// Draws `pick(point)` as a base curve plus the highlighted spans.
fn curves(out: &mut String, plot: &Plot, f: &Frame, pick: impl Fn(&[f64; 4]) -> (f64, f64)) {
    let all: Vec<_> = plot.points.iter().map(|p| f.map(pick(p).0, pick(p).1)).collect();
    polyline(out, &all, BASE, 1.0);
    for (span, color) in [(plot.domain, DOMAIN), (plot.image, IMAGE)] {
        let pts: Vec<_> = plot.points.iter().filter(|p| within(p[0], span)).map(|p| f.map(pick(p).0, pick(p).1)).collect();
        polyline(out, &pts, color, 2.0);
    }
}

pub fn render(plot: &Plot, width: f64, height: f64) -> String {
    let panel_w = width / 2.0 - 1.5 * MARGIN;
    let panel_h = height - 2.0 * MARGIN;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif">"#
    );
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    // Left panel: equal aspect so spirals keep their shape.
    let (xl, xh) = range(plot.points.iter().map(|p| p[1]).chain([0.0]));
    let (yl, yh) = range(plot.points.iter().map(|p| p[2]).chain([0.0]));
    let half = 0.5 * (xh - xl).max(yh - yl);
    let (cx, cy) = (0.5 * (xl + xh), 0.5 * (yl + yh));
    let (lo, hi) = padded(-half, half);
    let side = panel_w.min(panel_h);
    let left = Frame { x0: MARGIN, y0: MARGIN, w: side, h: side, lo: (cx + lo, cy + lo), hi: (cx + hi, cy + hi) };
    out.push_str("<g id=\"projection\">\n");
    frame_box(&mut out, &left, "(x, y)", "x");
    curves(&mut out, plot, &left, |p| (p[1], p[2]));
    let (sx, sy) = left.map(0.0, 0.0);
    let _ = writeln!(out, r##"<circle cx="{sx:.2}" cy="{sy:.2}" r="5" fill="#f2b705" stroke="#a07800"/>"##);
    out.push_str("</g>\n");

    // Right panel: z(t).
    let (tl, th) = range(plot.points.iter().map(|p| p[0]));
    let (zl, zh) = range(plot.points.iter().map(|p| p[3]));
    let right = Frame {
        x0: width / 2.0 + 0.5 * MARGIN,
        y0: MARGIN,
        w: panel_w,
        h: panel_h,
        lo: (padded(tl, th).0, padded(zl, zh).0),
        hi: (padded(tl, th).1, padded(zl, zh).1),
    };
    out.push_str("<g id=\"height\">\n");
    frame_box(&mut out, &right, "z(t)", "t");
    let (a, zero) = right.map(right.lo.0, 0.0);
    let (b, _) = right.map(right.hi.0, 0.0);
    let _ = writeln!(out, r##"<line x1="{a:.2}" y1="{zero:.2}" x2="{b:.2}" y2="{zero:.2}" stroke="#ccc"/>"##);
    for &t in &plot.zeros {
        let (x, _) = right.map(t, 0.0);
        let _ = writeln!(
            out,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#999" stroke-dasharray="3,3"/>"##,
            right.y0,
            right.y0 + right.h
        );
    }
    curves(&mut out, plot, &right, |p| (p[0], p[3]));
    out.push_str("</g>\n</svg>\n");
    out
}

/// Sign changes of z in a sampled series, located by linear interpolation.
pub fn sampled_zeros(points: &[[f64; 4]]) -> Vec<f64> {
    points
        .windows(2)
        .filter(|w| w[0][3] != 0.0 && w[0][3].signum() != w[1][3].signum() && w[1][3] != 0.0)
        .map(|w| w[0][0] + (w[1][0] - w[0][0]) * w[0][3] / (w[0][3] - w[1][3]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeros_of_sampled_sine() {
        let pts: Vec<_> = (0..=700).map(|i| {
            let t = i as f64 * 0.01;
            [t, 0.0, 0.0, t.sin()]
        }).collect();
        let z = sampled_zeros(&pts);
        assert_eq!(z.len(), 2);
        assert!((z[0] - std::f64::consts::PI).abs() < 1e-4);
    }

    #[test]
    fn flat_series_still_renders() {
        let plot = Plot { points: vec![[0.0, 1.0, 0.0, 0.0], [1.0, 0.5, 0.0, 0.0]], ..Default::default() };
        let svg = render(&plot, 800.0, 360.0);
        assert!(svg.contains("<polyline") && !svg.contains("NaN"));
    }
}

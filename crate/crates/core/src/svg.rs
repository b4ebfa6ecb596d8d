//! Minimal SVG line plots: profiles with their mirror image, turning
//! segments, energy traces and homotopy frames.

use std::fmt::Write as _;

use crate::homotopy::TurningBoundReport;
use crate::profile::ProfileCurve;

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub color: String,
    pub dashed: bool,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>, color_index: usize) -> Self {
        Series { label: label.into(), points, color: PALETTE[color_index % PALETTE.len()].to_string(), dashed: false }
    }

    pub fn dashed(mut self) -> Self {
        self.dashed = true;
        self
    }
}

#[derive(Debug, Clone)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub width: f64,
    pub height: f64,
    /// Same scale on both axes, for curves.
    pub equal_aspect: bool,
    pub series: Vec<Series>,
}

impl Plot {
    pub fn new(title: impl Into<String>, x_label: &str, y_label: &str) -> Self {
        Plot {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            width: 640.0,
            height: 480.0,
            equal_aspect: false,
            series: Vec::new(),
        }
    }

    pub fn push(&mut self, s: Series) -> &mut Self {
        self.series.push(s);
        self
    }

    fn bounds(&self) -> (f64, f64, f64, f64) {
        let mut b = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in self.series.iter().flat_map(|s| &s.points) {
            if p.0.is_finite() && p.1.is_finite() {
                b = (b.0.min(p.0), b.1.max(p.0), b.2.min(p.1), b.3.max(p.1));
            }
        }
        if !b.0.is_finite() {
            return (0.0, 1.0, 0.0, 1.0);
        }
        let pad = |lo: f64, hi: f64| {
            let d = if hi > lo { 0.05 * (hi - lo) } else { 0.5 * lo.abs().max(1.0) };
            (lo - d, hi + d)
        };
        let (x0, x1) = pad(b.0, b.1);
        let (y0, y1) = pad(b.2, b.3);
        (x0, x1, y0, y1)
    }

    pub fn render(&self) -> String {
        let (ml, mr, mt, mb) = (70.0, 20.0, 40.0, 50.0);
        let (pw, ph) = (self.width - ml - mr, self.height - mt - mb);
        let (mut x0, mut x1, mut y0, mut y1) = self.bounds();
        if self.equal_aspect {
            let (sx, sy) = ((x1 - x0) / pw, (y1 - y0) / ph);
            let s = sx.max(sy);
            let (cx, cy) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
            (x0, x1) = (cx - 0.5 * s * pw, cx + 0.5 * s * pw);
            (y0, y1) = (cy - 0.5 * s * ph, cy + 0.5 * s * ph);
        }
        let px = |x: f64| ml + (x - x0) / (x1 - x0) * pw;
        let py = |y: f64| mt + ph - (y - y0) / (y1 - y0) * ph;
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#,
            w = self.width,
            h = self.height
        );
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(out, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, self.width / 2.0, escape(&self.title));
        let _ = writeln!(out, r#"<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
        for k in 0..=4 {
            let f = k as f64 / 4.0;
            let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
                px(xv),
                mt + ph + 16.0,
                tick(xv)
            );
            let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, ml - 6.0, py(yv) + 4.0, tick(yv));
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            ml + pw / 2.0,
            self.height - 10.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
            mt + ph / 2.0,
            mt + ph / 2.0,
            escape(&self.y_label)
        );
        for (k, s) in self.series.iter().enumerate() {
            let mut pts = String::new();
            for p in s.points.iter().filter(|p| p.0.is_finite() && p.1.is_finite()) {
                let _ = write!(pts, "{:.2},{:.2} ", px(p.0), py(p.1));
            }
            let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{}" stroke-width="1.5"{dash} points="{}"/>"#,
                s.color,
                pts.trim_end()
            );
            if !s.label.is_empty() {
                let y = mt + 14.0 + 14.0 * k as f64;
                let _ = writeln!(out, r#"<text x="{:.1}" y="{y:.1}" fill="{}">{}</text>"#, ml + 8.0, s.color, escape(&s.label));
            }
        }
        out.push_str("</svg>\n");
        out
    }
}

fn tick(v: f64) -> String {
    if v == 0.0 || (1e-3..1e4).contains(&v.abs()) {
        format!("{v:.3}")
    } else {
        format!("{v:.2e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// The profile `(r, h)` and its mirror `(−r, h)`, i.e. the meridian section.
fn section(curve: &ProfileCurve, lo: usize, hi: usize) -> (Vec<(f64, f64)>, Vec<(f64, f64)>) {
    let right = (lo..=hi).map(|i| (curve.r[i], curve.h[i])).collect();
    let left = (lo..=hi).map(|i| (-curve.r[i], curve.h[i])).collect();
    (right, left)
}

pub fn profile_svg(curve: &ProfileCurve, title: &str) -> String {
    let mut p = Plot::new(title, "r", "h");
    p.equal_aspect = true;
    let (right, left) = section(curve, 0, curve.len() - 1);
    p.push(Series::new("profile", right, 0));
    p.push(Series::new("", left, 0).dashed());
    p.render()
}

/// Profile coloured by the pieces of a turning-bound decomposition.
pub fn segments_svg(curve: &ProfileCurve, report: &TurningBoundReport, title: &str) -> String {
    let work = if report.reversed { curve.reversed() } else { curve.clone() };
    let mut p = Plot::new(title, "r", "h");
    p.equal_aspect = true;
    let n = work.len();
    for seg in &report.segments {
        let lo = work.s.partition_point(|&s| s < seg.s_start).saturating_sub(1);
        let hi = work.s.partition_point(|&s| s <= seg.s_end).min(n - 1);
        let (right, left) = section(&work, lo, hi);
        let kind = if seg.interior { "4π" } else { "2π" };
        p.push(Series::new(format!("piece {}: W = {:.4} ≥ {kind}", seg.index, seg.closed_energy), right, seg.index));
        p.push(Series::new("", left, seg.index).dashed());
    }
    p.render()
}

/// Energy against time or parameter, with optional horizontal reference
/// levels such as `4π` or `8π`.
pub fn energy_svg(x: &[f64], w: &[f64], x_label: &str, title: &str, references: &[(String, f64)]) -> String {
    let mut p = Plot::new(title, x_label, "W");
    p.push(Series::new("W", x.iter().copied().zip(w.iter().copied()).collect(), 0));
    if let (Some(&a), Some(&b)) = (x.first(), x.last()) {
        for (k, (label, level)) in references.iter().enumerate() {
            p.push(Series::new(label.clone(), vec![(a, *level), (b, *level)], k + 1).dashed());
        }
    }
    p.render()
}

/// Several profiles side by side, shifted horizontally so they do not
/// overlap.
pub fn frames_svg(frames: &[(String, ProfileCurve)], title: &str) -> String {
    let mut p = Plot::new(title, "r", "h");
    p.equal_aspect = true;
    let mut offset = 0.0;
    for (k, (label, c)) in frames.iter().enumerate() {
        let rmax = c.r.iter().fold(0.0f64, |a, &v| a.max(v));
        offset += rmax;
        let (right, left) = section(c, 0, c.len() - 1);
        let shift = |v: Vec<(f64, f64)>| v.into_iter().map(|(x, y)| (x + offset, y)).collect();
        p.push(Series::new(label.clone(), shift(right), k));
        p.push(Series::new("", shift(left), k));
        offset += 1.2 * rmax;
    }
    p.render()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn renders_polylines_and_escapes_labels() {
        let c = ProfileCurve::from_fn(21, 0.0, PI, (true, true), |t| (t.sin(), -t.cos())).unwrap();
        let svg = profile_svg(&c, "a < b");
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("a &lt; b"));
        let e = energy_svg(&[0.0, 1.0], &[2.0, 1.0], "t", "W", &[("4π".into(), 4.0 * PI)]);
        assert_eq!(e.matches("<polyline").count(), 2);
    }

    #[test]
    fn degenerate_bounds_do_not_produce_nan() {
        let svg = energy_svg(&[1.0], &[1.0], "t", "single", &[]);
        assert!(!svg.contains("NaN"));
    }
}

//! Static log-log plot of a bifurcation diagram.

use std::fmt::Write as _;

use crate::sweep::{BifurcationDiagram, FoldPoint};

const W: f64 = 640.0;
const H: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

struct LogAxis {
    lo: f64,
    hi: f64,
}

impl LogAxis {
    /// Whole decades covering `[min, max]`.
    fn covering(min: f64, max: f64) -> Self {
        let lo = min.log10().floor();
        let mut hi = max.log10().ceil();
        if hi <= lo {
            hi = lo + 1.0;
        }
        LogAxis { lo, hi }
    }

    fn frac(&self, v: f64) -> f64 {
        (v.log10() - self.lo) / (self.hi - self.lo)
    }

    fn decades(&self) -> impl Iterator<Item = i32> {
        (self.lo as i32)..=(self.hi as i32)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// `R` against `d` on log scales, fold marked.
pub fn diagram_svg(diagram: &BifurcationDiagram, fold: Option<FoldPoint>, title: &str, regime: &str) -> String {
    let pts: Vec<(f64, f64)> = diagram.points.iter().filter_map(|p| p.radius().map(|r| (p.d, r))).collect();
    let d_min = diagram.points.first().map_or(1e-2, |p| p.d);
    let d_max = diagram.points.last().map_or(1e6, |p| p.d);
    let (r_min, r_max) = pts
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &(_, r)| (lo.min(r), hi.max(r)));
    let (r_min, r_max) = if pts.is_empty() { (0.1, 10.0) } else { (r_min, r_max) };
    let xa = LogAxis::covering(d_min, d_max);
    let ya = LogAxis::covering(r_min, r_max);
    let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
    let px = |d: f64| LEFT + xa.frac(d) * pw;
    let py = |r: f64| TOP + (1.0 - ya.frac(r)) * ph;

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{:.1}" y="20" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));

    for k in xa.decades() {
        let x = px(10f64.powi(k));
        let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="gainsboro"/>"#, TOP + ph);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">1e{k}</text>"#, TOP + ph + 18.0);
    }
    for k in ya.decades() {
        let y = py(10f64.powi(k));
        let _ = writeln!(s, r#"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="gainsboro"/>"#, LEFT + pw);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{k}</text>"#, LEFT - 6.0, y + 4.0);
    }
    let _ = writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">d</text>"#, LEFT + pw / 2.0, H - 10.0);
    let _ = writeln!(s, r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">R(d)</text>"#, TOP + ph / 2.0, TOP + ph / 2.0);

    if !pts.is_empty() {
        let path: Vec<String> = pts.iter().map(|&(d, r)| format!("{:.2},{:.2}", px(d), py(r))).collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{}"/>"#, path.join(" "));
        for &(d, r) in &pts {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2" fill="steelblue"/>"#, px(d), py(r));
        }
    }
    // shots without a crossing sit on the bottom axis
    for p in diagram.points.iter().filter(|p| p.radius().is_none()) {
        let _ = writeln!(s, r#"<path d="M{:.2},{:.2} l-4,6 h8 z" fill="gray"/>"#, px(p.d), TOP + ph - 6.0);
    }
    if let Some(f) = fold {
        let (x, y) = (px(f.d0), py(f.r0));
        let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="5" fill="none" stroke="crimson" stroke-width="2"/>"#);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" fill="crimson">R0 = {:.6}</text>"#, x + 8.0, y + 16.0, f.r0);
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, LEFT + pw - 6.0, TOP + 16.0, escape(regime));
    s.push_str("</svg>\n");
    s
}

//! Minimal static line chart for accuracy curves.

use netlearn::io::CurveRow;
use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// One polyline per (model, q) series, accuracy against position.
pub fn curve_chart(title: &str, rows: &[CurveRow]) -> String {
    let mut series: Vec<(String, Vec<(u32, f64)>)> = Vec::new();
    for r in rows {
        let label = format!("{} q={}", r.model, r.q);
        match series.iter_mut().find(|(l, _)| *l == label) {
            Some((_, pts)) => pts.push((r.position, r.accuracy)),
            None => series.push((label, vec![(r.position, r.accuracy)])),
        }
    }
    let max_pos = rows.iter().map(|r| r.position).max().unwrap_or(1).max(2);
    let lo = rows.iter().map(|r| r.accuracy).fold(1.0, f64::min).min(0.5);
    let hi = rows.iter().map(|r| r.accuracy).fold(0.0, f64::max).max(lo + 0.1).min(1.0);
    let x = |p: u32| MARGIN + (f64::from(p) - 1.0) / f64::from(max_pos - 1) * (WIDTH - 2.0 * MARGIN);
    let y = |a: f64| HEIGHT - MARGIN - (a - lo) / (hi - lo) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{title}</text>"#, WIDTH / 2.0);
    let (x0, x1, y0, y1) = (MARGIN, WIDTH - MARGIN, HEIGHT - MARGIN, MARGIN);
    let _ = writeln!(s, r#"<path d="M{x0},{y1} V{y0} H{x1}" fill="none" stroke="black"/>"#);
    for i in 0..=5 {
        let a = lo + (hi - lo) * f64::from(i) / 5.0;
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{a:.2}</text>"#, x0 - 6.0, y(a) + 4.0);
    }
    for p in (1..=max_pos).filter(|p| p % 5 == 0 || *p == 1) {
        let _ = writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="middle">{p}</text>"#, x(p), y0 + 16.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">position</text>"#, WIDTH / 2.0, HEIGHT - 10.0);
    for (i, (label, pts)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let path: Vec<String> = pts.iter().map(|&(p, a)| format!("{:.1},{:.1}", x(p), y(a))).collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, path.join(" "));
        let ly = MARGIN + 16.0 * i as f64;
        let _ = writeln!(s, r#"<text x="{}" y="{ly}" fill="{color}" text-anchor="end">{label}</text>"#, x1);
    }
    s.push_str("</svg>\n");
    s
}

//! SVG line chart of F1 against threshold, one series per strategy.

use std::collections::BTreeMap;
use std::fmt::Write as _;

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 56.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders `(strategy, T, f1)` points. Undefined F1 values break the line.
pub fn render_f1_svg(points: &[(String, usize, Option<f64>)], title: &str) -> String {
    let mut series: BTreeMap<&str, Vec<(usize, Option<f64>)>> = BTreeMap::new();
    for (s, t, f) in points {
        series.entry(s.as_str()).or_default().push((*t, *f));
    }
    let t_min = points.iter().map(|p| p.1).min().unwrap_or(0);
    let t_max = points.iter().map(|p| p.1).max().unwrap_or(1).max(t_min + 1);
    let x = |t: usize| PAD + (t - t_min) as f64 / (t_max - t_min) as f64 * (W - 2.0 * PAD);
    let y = |f: f64| H - PAD - f.clamp(0.0, 1.0) * (H - 2.0 * PAD);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, esc(title));
    let _ = writeln!(
        s,
        r#"<path d="M{PAD} {PAD} V{} H{}" fill="none" stroke="black"/>"#,
        H - PAD,
        W - PAD
    );
    for i in 0..=5 {
        let f = i as f64 / 5.0;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{f:.1}</text>"#,
            PAD - 6.0,
            y(f) + 4.0
        );
    }
    for t in t_min..=t_max {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{t}</text>"#,
            x(t),
            H - PAD + 16.0
        );
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">T</text>"#, W / 2.0, H - 12.0);
    let _ = writeln!(s, r#"<text x="16" y="{}" transform="rotate(-90 16 {})" text-anchor="middle">F1</text>"#, H / 2.0, H / 2.0);

    for (k, (name, mut pts)) in series.into_iter().enumerate() {
        pts.sort_by_key(|p| p.0);
        let color = COLORS[k % COLORS.len()];
        let mut d = String::new();
        let mut pen_down = false;
        for (t, f) in &pts {
            match f {
                Some(f) => {
                    let _ = write!(d, "{}{:.1} {:.1} ", if pen_down { "L" } else { "M" }, x(*t), y(*f));
                    pen_down = true;
                }
                None => pen_down = false,
            }
        }
        if !d.is_empty() {
            let _ = writeln!(s, r#"<path d="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, d.trim_end());
        }
        for (t, f) in pts.iter().filter_map(|(t, f)| f.map(|f| (*t, f))) {
            let _ = writeln!(s, r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{color}"/>"#, x(t), y(f));
        }
        let ly = PAD + 16.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            W - PAD - 110.0,
            W - PAD - 90.0,
            W - PAD - 84.0,
            ly + 4.0,
            esc(name)
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_series() {
        let pts = vec![
            ("plain".to_string(), 1, Some(0.5)),
            ("plain".to_string(), 2, None),
            ("plain".to_string(), 3, Some(0.9)),
            ("a<b".to_string(), 1, Some(1.0)),
        ];
        let svg = render_f1_svg(&pts, "F1 vs T");
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<circle").count(), 3);
        assert!(svg.contains("a&lt;b"));
    }
}

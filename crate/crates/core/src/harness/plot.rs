//! SVG scatter of success rate against mean time per instance.

use std::fmt::Write as _;

use super::report::ReportRow;
use super::HarnessError;

const W: f64 = 640.0;
const H: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Upper x bound rounded up to a 1/2/5 step so ticks read cleanly.
fn nice_max(v: f64) -> f64 {
    if v <= 0.0 || !v.is_finite() {
        return 1.0;
    }
    let mag = 10f64.powf(v.log10().floor());
    [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|&c| c >= v)
        .unwrap_or(10.0 * mag)
}

/// One labeled point per row: x = mean time (s), y = success rate (%).
pub fn render_svg(rows: &[ReportRow], title: &str) -> Result<String, HarnessError> {
    if rows.is_empty() {
        return Err(HarnessError::EmptyInput);
    }
    let x_max = nice_max(rows.iter().map(|r| r.mean_time_s).fold(0.0, f64::max));
    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x / x_max).clamp(0.0, 1.0) * pw;
    let sy = |y: f64| TOP + (1.0 - (y / 100.0).clamp(0.0, 1.0)) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="18" text-anchor="middle" font-size="14">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<g stroke="black"><line x1="{LEFT}" y1="{}" x2="{}" y2="{}"/><line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{}"/></g>"#,
        TOP + ph,
        LEFT + pw,
        TOP + ph,
        TOP + ph
    );
    for i in 0..=5 {
        let f = i as f64 / 5.0;
        let (x, y) = (sx(f * x_max), sy(f * 100.0));
        let _ = writeln!(
            s,
            r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            TOP + ph + 18.0,
            format_tick(f * x_max),
            LEFT - 6.0,
            y + 4.0,
            format_tick(f * 100.0)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">average time per instance (s)</text>"#,
        LEFT + pw / 2.0,
        H - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">success rate (%)</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );
    for r in rows {
        let (x, y) = (sx(r.mean_time_s), sy(r.success_rate));
        let (dx, anchor) = if x > LEFT + pw * 0.8 {
            (-8.0, "end")
        } else {
            (8.0, "start")
        };
        let ly = if y < TOP + 12.0 { y + 14.0 } else { y - 6.0 };
        let _ = writeln!(
            s,
            r#"<g class="point"><circle cx="{x:.1}" cy="{y:.1}" r="4" fill="steelblue"/><text x="{:.1}" y="{ly:.1}" text-anchor="{anchor}">{}</text></g>"#,
            x + dx,
            escape(&r.label)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn format_tick(v: f64) -> String {
    if v == v.trunc() {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

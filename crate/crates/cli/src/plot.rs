//! Minimal SVG line charts of convergence traces.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COST_FLOOR: f64 = 1e-16;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Reads `sweep,cost[,...]` rows; the header line is optional.
pub fn read_trace(path: &Path) -> Result<Series> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut points = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (k == 0 && line.starts_with("sweep")) {
            continue;
        }
        let mut cols = line.split(',');
        let parse = |s: Option<&str>| -> Result<f64> {
            s.context("missing column")?.trim().parse::<f64>().with_context(|| format!("line {}", k + 1))
        };
        let x = parse(cols.next())?;
        let y = parse(cols.next())?;
        points.push((x, y));
    }
    if points.is_empty() {
        bail!("trace {} is empty", path.display());
    }
    let label = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(Series { label, points })
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Cost on a log axis; with `log_x` the x coordinate is `log10(sweep + 1)`.
pub fn render(series: &[Series], log_x: bool, title: &str) -> Result<String> {
    if series.is_empty() {
        bail!("nothing to plot");
    }
    let fx = |x: f64| if log_x { (x.max(0.0) + 1.0).log10() } else { x };
    let fy = |y: f64| y.max(COST_FLOOR).log10();

    let xs = series.iter().flat_map(|s| s.points.iter().map(|p| fx(p.0)));
    let (xmin, xmax) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    let ys = series.iter().flat_map(|s| s.points.iter().map(|p| fy(p.1)));
    let (ymin, ymax) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(y), b.max(y)));
    let (xmin, xmax) = if xmax > xmin { (xmin, xmax) } else { (xmin - 0.5, xmin + 0.5) };
    let (dlo, dhi) = (ymin.floor(), ymax.ceil().max(ymin.floor() + 1.0));

    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x - xmin) / (xmax - xmin) * pw;
    let py = |y: f64| TOP + (dhi - y) / (dhi - dlo) * ph;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, LEFT + pw / 2.0, esc(title));
    let _ = writeln!(out, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);

    let mut d = dlo as i64;
    while d <= dhi as i64 {
        let y = py(d as f64);
        let _ = writeln!(out, r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/>"##, LEFT + pw);
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{d}</text>"#, LEFT - 6.0, y + 4.0);
        d += 1;
    }
    for k in 0..=5 {
        let x = xmin + (xmax - xmin) * k as f64 / 5.0;
        let label = if log_x { format!("{:.0}", 10f64.powf(x) - 1.0) } else { format!("{:.0}", x) };
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{label}</text>"#, px(x), TOP + ph + 18.0);
    }
    let xlabel = if log_x { "sweep (log scale)" } else { "sweep" };
    let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{xlabel}</text>"#, LEFT + pw / 2.0, HEIGHT - 16.0);
    let _ = writeln!(
        out,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">cost</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = s.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(fx(x)), py(fy(y)))).collect();
        let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
        let ly = TOP + 16.0 + 18.0 * i as f64;
        let lx = LEFT + pw + 12.0;
        let _ = writeln!(out, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 20.0);
        let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, lx + 26.0, ly + 4.0, esc(&s.label));
    }
    out.push_str("</svg>\n");
    Ok(out)
}

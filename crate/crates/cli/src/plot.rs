//! Self-contained SVG line plots and heatmaps.

use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PlotError {
    #[error("column `{0}` not in table")]
    MissingColumn(String),
    #[error("nothing to plot: {0}")]
    Empty(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotKind {
    Line,
    Heatmap,
}

/// What to draw from a table. For a line plot `group` splits rows into
/// series; for a heatmap `x`, `y` index the cells and `z` colours them.
#[derive(Clone, Debug)]
pub struct PlotSpec {
    pub kind: PlotKind,
    pub x: String,
    pub y: String,
    pub z: Option<String>,
    pub group: Option<String>,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub z_label: String,
}

impl PlotSpec {
    pub fn line(x: &str, y: &str, title: &str, x_label: &str, y_label: &str) -> Self {
        Self {
            kind: PlotKind::Line,
            x: x.into(),
            y: y.into(),
            z: None,
            group: None,
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            z_label: String::new(),
        }
    }

    pub fn heatmap(x: &str, y: &str, z: &str, title: &str, labels: [&str; 3]) -> Self {
        Self {
            kind: PlotKind::Heatmap,
            x: x.into(),
            y: y.into(),
            z: Some(z.into()),
            group: None,
            title: title.into(),
            x_label: labels[0].into(),
            y_label: labels[1].into(),
            z_label: labels[2].into(),
        }
    }

    pub fn grouped_by(mut self, column: &str) -> Self {
        self.group = Some(column.into());
        self
    }
}

const W: f64 = 760.0;
const H: f64 = 480.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 40.0;
const TOP: f64 = 46.0;
const BOTTOM: f64 = 62.0;
const COLORBAR: f64 = 70.0;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn column(columns: &[String], rows: &[Vec<f64>], name: &str) -> Result<Vec<f64>, PlotError> {
    let i = columns.iter().position(|c| c == name).ok_or_else(|| PlotError::MissingColumn(name.into()))?;
    Ok(rows.iter().map(|r| r[i]).collect())
}

pub fn render(spec: &PlotSpec, columns: &[String], rows: &[Vec<f64>]) -> Result<String, PlotError> {
    let x = column(columns, rows, &spec.x)?;
    let y = column(columns, rows, &spec.y)?;
    match spec.kind {
        PlotKind::Line => {
            let groups = match &spec.group {
                Some(g) => Some(column(columns, rows, g)?),
                None => None,
            };
            line(spec, &x, &y, groups.as_deref())
        }
        PlotKind::Heatmap => {
            let zname = spec.z.as_deref().ok_or_else(|| PlotError::MissingColumn("<z>".into()))?;
            let z = column(columns, rows, zname)?;
            heatmap(spec, &x, &y, &z)
        }
    }
}

fn finite_range(v: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = v
        .filter(|a| a.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), a| (lo.min(a), hi.max(a)));
    if lo > hi {
        return None;
    }
    if lo == hi {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.05 };
        return Some((lo - pad, hi + pad));
    }
    Some((lo, hi))
}

/// Round tick positions covering [lo, hi], about `n` of them.
fn ticks(lo: f64, hi: f64, n: usize) -> (Vec<f64>, f64) {
    let raw = (hi - lo) / n as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    ((first..=last).map(|k| k as f64 * step).collect(), step)
}

fn tick_label(v: f64, step: f64) -> String {
    let a = v.abs();
    if a != 0.0 && (a >= 1e5 || a < 1e-3) {
        return format!("{v:.2e}");
    }
    let decimals = if step >= 1.0 { 0 } else { (-step.log10().floor()) as usize };
    format!("{v:.decimals$}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    width: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (self.width - LEFT - RIGHT)
    }
    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (H - TOP - BOTTOM)
    }
}

fn open(out: &mut String, width: f64, spec: &PlotSpec) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{H}" viewBox="0 0 {width} {H}" font-family="sans-serif" font-size="13">"#
    );
    let _ = writeln!(out, r#"<rect width="{width}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="26" text-anchor="middle" font-size="15">{}</text>"#,
        width / 2.0,
        escape(&spec.title)
    );
}

fn axes(out: &mut String, f: &Frame, spec: &PlotSpec) {
    let (xl, xr, yt, yb) = (LEFT, f.width - RIGHT, TOP, H - BOTTOM);
    let _ = writeln!(out, r#"<rect x="{xl}" y="{yt}" width="{}" height="{}" fill="none" stroke="black"/>"#, xr - xl, yb - yt);
    let (xt, xs) = ticks(f.x0, f.x1, 6);
    for t in xt {
        let p = f.px(t);
        let _ = writeln!(out, r#"<line x1="{p:.2}" y1="{yb}" x2="{p:.2}" y2="{}" stroke="black"/>"#, yb + 5.0);
        let _ = writeln!(out, r#"<text x="{p:.2}" y="{}" text-anchor="middle">{}</text>"#, yb + 20.0, tick_label(t, xs));
    }
    let (yt_, ys) = ticks(f.y0, f.y1, 6);
    for t in yt_ {
        let p = f.py(t);
        let _ = writeln!(out, r#"<line x1="{}" y1="{p:.2}" x2="{xl}" y2="{p:.2}" stroke="black"/>"#, xl - 5.0);
        let _ = writeln!(out, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, xl - 8.0, p + 4.0, tick_label(t, ys));
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        (xl + xr) / 2.0,
        H - 18.0,
        escape(&spec.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="20" y="{0}" text-anchor="middle" transform="rotate(-90 20 {0})">{1}</text>"#,
        (yt + yb) / 2.0,
        escape(&spec.y_label)
    );
}

fn line(spec: &PlotSpec, x: &[f64], y: &[f64], groups: Option<&[f64]>) -> Result<String, PlotError> {
    let (x0, x1) = finite_range(x.iter().copied()).ok_or_else(|| PlotError::Empty(spec.x.clone()))?;
    let (y0, y1) = finite_range(y.iter().copied()).ok_or_else(|| PlotError::Empty(spec.y.clone()))?;
    let pad = 0.04 * (y1 - y0);
    let f = Frame { x0, x1, y0: y0 - pad, y1: y1 + pad, width: W };
    let mut keys: Vec<f64> = Vec::new();
    if let Some(g) = groups {
        for &v in g {
            if !keys.contains(&v) {
                keys.push(v);
            }
        }
    } else {
        keys.push(0.0);
    }
    let mut out = String::new();
    open(&mut out, W, spec);
    axes(&mut out, &f, spec);
    for (si, key) in keys.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        let mut pts: Vec<(f64, f64)> = (0..x.len())
            .filter(|&i| groups.is_none_or(|g| g[i] == *key))
            .map(|i| (x[i], y[i]))
            .filter(|(a, b)| a.is_finite() && b.is_finite())
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let path: Vec<String> = pts.iter().map(|&(a, b)| format!("{:.2},{:.2}", f.px(a), f.py(b))).collect();
        let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, path.join(" "));
        if let (Some(_), Some(name)) = (groups, &spec.group) {
            let ly = TOP + 18.0 + 18.0 * si as f64;
            let lx = W - RIGHT - 150.0;
            let _ = writeln!(out, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 24.0);
            let _ = writeln!(out, r#"<text x="{}" y="{}">{} = {}</text>"#, lx + 30.0, ly + 4.0, escape(name), key);
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn distinct_sorted(v: &[f64]) -> Vec<f64> {
    let mut d: Vec<f64> = v.iter().copied().filter(|a| a.is_finite()).collect();
    d.sort_by(f64::total_cmp);
    d.dedup();
    d
}

/// Perceptually ordered dark-blue to yellow ramp.
fn colour(u: f64) -> String {
    const STOPS: [(f64, f64, f64); 5] =
        [(68.0, 1.0, 84.0), (59.0, 82.0, 139.0), (33.0, 145.0, 140.0), (94.0, 201.0, 98.0), (253.0, 231.0, 37.0)];
    let u = u.clamp(0.0, 1.0) * (STOPS.len() - 1) as f64;
    let i = (u.floor() as usize).min(STOPS.len() - 2);
    let w = u - i as f64;
    let (a, b) = (STOPS[i], STOPS[i + 1]);
    let mix = |p: f64, q: f64| (p + w * (q - p)).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

/// Cell edges halfway between neighbouring grid values.
fn edges(c: &[f64]) -> Vec<f64> {
    if c.len() == 1 {
        return vec![c[0] - 0.5, c[0] + 0.5];
    }
    let mut e = Vec::with_capacity(c.len() + 1);
    e.push(c[0] - (c[1] - c[0]) / 2.0);
    for w in c.windows(2) {
        e.push((w[0] + w[1]) / 2.0);
    }
    let n = c.len();
    e.push(c[n - 1] + (c[n - 1] - c[n - 2]) / 2.0);
    e
}

fn heatmap(spec: &PlotSpec, x: &[f64], y: &[f64], z: &[f64]) -> Result<String, PlotError> {
    let xs = distinct_sorted(x);
    let ys = distinct_sorted(y);
    if xs.is_empty() || ys.is_empty() {
        return Err(PlotError::Empty("heatmap grid".into()));
    }
    let (z0, z1) = finite_range(z.iter().copied()).unwrap_or((0.0, 1.0));
    let (xe, ye) = (edges(&xs), edges(&ys));
    let width = W + COLORBAR;
    let f = Frame { x0: xe[0], x1: xe[xe.len() - 1], y0: ye[0], y1: ye[ye.len() - 1], width: width - COLORBAR };
    let mut out = String::new();
    open(&mut out, width, spec);
    for i in 0..x.len() {
        let (Some(ix), Some(iy)) = (xs.iter().position(|&v| v == x[i]), ys.iter().position(|&v| v == y[i])) else {
            continue;
        };
        let fill = if z[i].is_finite() { colour((z[i] - z0) / (z1 - z0)) } else { "#bbbbbb".into() };
        let (px0, px1) = (f.px(xe[ix]), f.px(xe[ix + 1]));
        let (py0, py1) = (f.py(ye[iy + 1]), f.py(ye[iy]));
        let _ = writeln!(
            out,
            r#"<rect x="{px0:.2}" y="{py0:.2}" width="{:.2}" height="{:.2}" fill="{fill}" stroke="{fill}" stroke-width="0.3"/>"#,
            px1 - px0,
            py1 - py0
        );
    }
    axes(&mut out, &f, spec);
    let bx = width - COLORBAR - RIGHT + 30.0;
    let n = 64;
    let span = H - TOP - BOTTOM;
    for k in 0..n {
        let u = k as f64 / (n - 1) as f64;
        let y0 = H - BOTTOM - span * (k + 1) as f64 / n as f64;
        let _ = writeln!(out, r#"<rect x="{bx}" y="{y0:.2}" width="16" height="{:.2}" fill="{}"/>"#, span / n as f64 + 0.3, colour(u));
    }
    let (zt, zs) = ticks(z0, z1, 5);
    for t in zt {
        let p = H - BOTTOM - (t - z0) / (z1 - z0) * span;
        let _ = writeln!(out, r#"<text x="{}" y="{:.2}">{}</text>"#, bx + 20.0, p + 4.0, tick_label(t, zs));
    }
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, bx + 8.0, TOP - 8.0, escape(&spec.z_label));
    out.push_str("</svg>\n");
    Ok(out)
}

//! SVG line plots generated from the experiment CSVs.
//!
//! Each series is a `<polyline data-series="...">` drawn in canvas
//! coordinates that also carries the raw `(t, value)` pairs, with 17
//! significant digits, in its `data-points` attribute. [`read_svg_series`]
//! recovers them.
//!
//! Files written by [`emit_plots`] for every successful cell:
//!
//! - `seed{s}_data.svg`: truth and blurred-noisy data;
//! - `seed{s}_{method}.svg`: truth and restoration;
//! - `seed{s}_{method}_theta.svg`: the weight of a mixed method.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::experiment::{cell_file, theta_file, Method, SUMMARY_FILE};
use crate::io::{column, fmt_real, parse_real, read_columns_file};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 48.0;
const COLORS: [&str; 4] = ["#c0392b", "#2471a3", "#1e8449", "#7d3c98"];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub dashed: bool,
}

impl Series {
    pub fn new(name: impl Into<String>, x: Vec<f64>, y: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            x,
            y,
            dashed: false,
        }
    }

    pub fn dashed(mut self) -> Self {
        self.dashed = true;
        self
    }
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let mult = if norm < 1.5 {
        1.0
    } else if norm < 3.5 {
        2.0
    } else if norm < 7.5 {
        5.0
    } else {
        10.0
    };
    mult * mag
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

/// Renders series sharing one set of axes.
pub fn render_svg(title: &str, series: &[Series]) -> String {
    let (x0, x1) = bounds(series.iter().flat_map(|s| s.x.iter().copied()));
    let (y0, y1) = bounds(series.iter().flat_map(|s| s.y.iter().copied()));
    let pw = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let ph = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = pw / (x1 - x0);
    let sy = ph / (y1 - y0);
    let to_px = |x: f64| MARGIN_LEFT + (x - x0) * sx;
    let to_py = |y: f64| MARGIN_TOP + ph - (y - y0) * sy;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );

    let step = nice_step(x1 - x0);
    let mut x = (x0 / step).ceil() * step;
    while x <= x1 {
        let px = to_px(x);
        let _ = writeln!(
            svg,
            r##"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="#ddd"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            MARGIN_TOP,
            MARGIN_TOP + ph,
            MARGIN_TOP + ph + 16.0,
            tick_label(x, step)
        );
        x += step;
    }
    let step = nice_step(y1 - y0);
    let mut y = (y0 / step).ceil() * step;
    while y <= y1 {
        let py = to_py(y);
        let _ = writeln!(
            svg,
            r##"<line x1="{MARGIN_LEFT}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            MARGIN_LEFT + pw,
            MARGIN_LEFT - 6.0,
            py + 4.0,
            tick_label(y, step)
        );
        y += step;
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">t</text>"#,
        MARGIN_LEFT + pw / 2.0,
        HEIGHT - 10.0
    );

    for (k, s) in series.iter().enumerate() {
        let pixels: Vec<String> =
            s.x.iter()
                .zip(&s.y)
                .map(|(x, y)| format!("{:.2},{:.2}", to_px(*x), to_py(*y)))
                .collect();
        let raw: Vec<String> =
            s.x.iter()
                .zip(&s.y)
                .map(|(x, y)| format!("{},{}", fmt_real(*x), fmt_real(*y)))
                .collect();
        let dash = if s.dashed {
            r#" stroke-dasharray="6 4""#
        } else {
            ""
        };
        let _ = writeln!(
            svg,
            r#"<polyline data-series="{}" fill="none" stroke="{}" stroke-width="1.6"{dash} points="{}" data-points="{}"/>"#,
            escape(&s.name),
            COLORS[k % COLORS.len()],
            pixels.join(" "),
            raw.join(" ")
        );
    }

    for (k, s) in series.iter().enumerate() {
        let ly = MARGIN_TOP + 16.0 + 16.0 * k as f64;
        let lx = MARGIN_LEFT + pw - 150.0;
        let dash = if s.dashed {
            r#" stroke-dasharray="6 4""#
        } else {
            ""
        };
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{}" stroke-width="1.6"{dash}/><text x="{:.2}" y="{ly:.2}">{}</text>"#,
            ly - 4.0,
            lx + 24.0,
            ly - 4.0,
            COLORS[k % COLORS.len()],
            lx + 30.0,
            escape(&s.name)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn tick_label(v: f64, step: f64) -> String {
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let v = if v.abs() < step * 1e-9 { 0.0 } else { v };
    format!("{v:.decimals$}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

pub fn write_svg(path: &Path, title: &str, series: &[Series]) -> Result<()> {
    fs::write(path, render_svg(title, series)).map_err(|e| Error::io(path, e))
}

/// A series name with its `(x, y)` points.
pub type NamedPoints = (String, Vec<(f64, f64)>);

/// Recovers `(name, points)` of every polyline written by [`render_svg`].
pub fn read_svg_series(path: &Path) -> Result<Vec<NamedPoints>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bad = |message: String| Error::Parse {
        path: path.to_path_buf(),
        message,
    };
    let attr = |line: &str, key: &str| -> Option<String> {
        let start = line.find(&format!("{key}=\""))? + key.len() + 2;
        let len = line[start..].find('"')?;
        Some(line[start..start + len].to_string())
    };
    let mut out = Vec::new();
    for line in text.lines().filter(|l| l.starts_with("<polyline")) {
        let name = attr(line, "data-series").ok_or_else(|| bad("polyline without name".into()))?;
        let points =
            attr(line, "data-points").ok_or_else(|| bad("polyline without points".into()))?;
        let pts = points
            .split_whitespace()
            .map(|p| {
                let (x, y) = p
                    .split_once(',')
                    .ok_or_else(|| bad(format!("bad point `{p}`")))?;
                match (parse_real(x), parse_real(y)) {
                    (Some(x), Some(y)) => Ok((x, y)),
                    _ => Err(bad(format!("bad point `{p}`"))),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        out.push((name, pts));
    }
    Ok(out)
}

pub fn data_plot_file(out_dir: &Path, seed: u64) -> PathBuf {
    out_dir.join(format!("seed{seed}_data.svg"))
}

pub fn cell_plot_file(out_dir: &Path, seed: u64, method: Method) -> PathBuf {
    out_dir.join(format!("seed{seed}_{method}.svg"))
}

pub fn theta_plot_file(out_dir: &Path, seed: u64, method: Method) -> PathBuf {
    out_dir.join(format!("seed{seed}_{method}_theta.svg"))
}

/// Writes the SVG figures for every `ok` row of `summary.csv` in `out_dir`,
/// reading all plotted values back from the per-cell CSVs. Returns the files
/// written, in summary order.
pub fn emit_plots(out_dir: &Path) -> Result<Vec<PathBuf>> {
    let summary = out_dir.join(SUMMARY_FILE);
    let mut reader = csv::Reader::from_path(&summary).map_err(|e| Error::Parse {
        path: summary.clone(),
        message: e.to_string(),
    })?;
    let mut cells = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            path: summary.clone(),
            message: e.to_string(),
        })?;
        let status = record.get(6).unwrap_or("");
        if !status.starts_with("ok") {
            continue;
        }
        let seed: u64 = record[0].parse().map_err(|_| Error::Parse {
            path: summary.clone(),
            message: format!("bad seed `{}`", &record[0]),
        })?;
        let method: Method = record[1].parse()?;
        cells.push((seed, method));
    }

    let mut written = Vec::new();
    let mut seeds_done = BTreeSet::new();
    for (seed, method) in cells {
        let path = cell_file(out_dir, seed, method);
        let (header, cols) = read_columns_file(&path)?;
        let t = column(&path, &header, &cols, "t")?;
        let truth = column(&path, &header, &cols, "f_true")?;
        if seeds_done.insert(seed) {
            let noisy = column(&path, &header, &cols, "g_noisy")?;
            let file = data_plot_file(out_dir, seed);
            write_svg(
                &file,
                &format!("seed {seed}: truth and blurred noisy data"),
                &[
                    Series::new("f_true", t.to_vec(), truth.to_vec()).dashed(),
                    Series::new("g_noisy", t.to_vec(), noisy.to_vec()),
                ],
            )?;
            written.push(file);
        }
        let restored = column(&path, &header, &cols, "f_restored")?;
        let file = cell_plot_file(out_dir, seed, method);
        write_svg(
            &file,
            &format!("seed {seed}: {method} restoration"),
            &[
                Series::new("f_true", t.to_vec(), truth.to_vec()).dashed(),
                Series::new("f_restored", t.to_vec(), restored.to_vec()),
            ],
        )?;
        written.push(file);

        let tpath = theta_file(out_dir, seed, method);
        if method.is_mixed() && tpath.exists() {
            let (header, cols) = read_columns_file(&tpath)?;
            let t = column(&tpath, &header, &cols, "t")?;
            let theta = column(&tpath, &header, &cols, "theta")?;
            let file = theta_plot_file(out_dir, seed, method);
            write_svg(
                &file,
                &format!("seed {seed}: {method} weight"),
                &[Series::new("theta", t.to_vec(), theta.to_vec())],
            )?;
            written.push(file);
        }
    }
    Ok(written)
}

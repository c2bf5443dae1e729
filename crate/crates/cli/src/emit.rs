//! Deterministic CSV/JSON/SVG writers and the run manifest.
//!
//! CSV numbers use 17 significant digits (`{:.16e}`), which round-trips every
//! `f64`. JSON documents are built from structs and `BTreeMap`s, so key order
//! is fixed. SVG plots use an 800×600 canvas with linear axes mapping the
//! data bounding box onto the plot area inside fixed margins.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{Format, RunConfig};
use crate::error::{CliError, CliResult};

pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(usize),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => fmt_num(*x),
            Cell::Int(i) => i.to_string(),
        }
    }
}

pub fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<Cell>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let line: Vec<String> = row.iter().map(Cell::render).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// Numeric-only rows.
pub fn num_rows(rows: impl IntoIterator<Item = Vec<f64>>) -> impl Iterator<Item = Vec<Cell>> {
    rows.into_iter().map(|r| r.into_iter().map(Cell::Num).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Reported for context only; never affects the exit code.
    pub informational: bool,
    pub detail: String,
}

impl Check {
    pub fn at_most(name: &str, value: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Check { name: name.into(), value, tolerance, pass: value <= tolerance, informational: false, detail: detail.into() }
    }

    pub fn flag(name: &str, pass: bool, value: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Check { name: name.into(), value, tolerance, pass, informational: false, detail: detail.into() }
    }

    pub fn info(name: &str, value: f64, detail: impl Into<String>) -> Self {
        Check { name: name.into(), value, tolerance: f64::NAN, pass: true, informational: true, detail: detail.into() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub config: RunConfig,
    pub versions: BTreeMap<String, String>,
    pub digests: BTreeMap<String, String>,
    pub checks: Vec<Check>,
}

impl Manifest {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass || c.informational)
    }
}

#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub manifest: Manifest,
    /// Emitted data files, excluding the manifest itself.
    pub files: Vec<PathBuf>,
}

/// Writes files into the output directory and records their digests.
pub struct Emitter {
    out_dir: PathBuf,
    formats: Vec<Format>,
    digests: BTreeMap<String, String>,
    files: Vec<PathBuf>,
}

impl Emitter {
    pub fn new(out_dir: &Path, formats: &[Format]) -> CliResult<Self> {
        std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
        Ok(Emitter { out_dir: out_dir.to_path_buf(), formats: formats.to_vec(), digests: BTreeMap::new(), files: vec![] })
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        let path = self.out_dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.digests.insert(name.to_string(), hex::encode(Sha256::digest(bytes)));
        self.files.push(path);
        Ok(())
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<Cell>>) -> CliResult<()> {
        if !self.wants(Format::Csv) {
            return Ok(());
        }
        self.write(name, csv_string(header, rows).as_bytes())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        if !self.wants(Format::Json) {
            return Ok(());
        }
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn svg(&mut self, name: &str, plot: &LinePlot) -> CliResult<()> {
        if !self.wants(Format::Svg) {
            return Ok(());
        }
        self.write(name, plot.render().as_bytes())
    }

    /// Writes `manifest.json` (always, regardless of formats).
    pub fn finish(self, config: &RunConfig, checks: Vec<Check>) -> CliResult<RunArtifacts> {
        let mut versions = BTreeMap::new();
        versions.insert("archam".to_string(), env!("CARGO_PKG_VERSION").to_string());
        let manifest = Manifest { config: config.clone(), versions, digests: self.digests, checks };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        let path = self.out_dir.join("manifest.json");
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok(RunArtifacts { manifest, files: self.files })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    /// Empty labels are left out of the legend.
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

pub const SVG_WIDTH: f64 = 800.0;
pub const SVG_HEIGHT: f64 = 600.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 60.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn bounds(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = vals.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

impl LinePlot {
    pub fn render(&self) -> String {
        let pts = || self.series.iter().flat_map(|s| s.points.iter());
        let (x0, x1) = bounds(pts().map(|p| p.0));
        let (y0, y1) = bounds(pts().map(|p| p.1));
        let pw = SVG_WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let ph = SVG_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        let sx = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| MARGIN_TOP + (1.0 - (y - y0) / (y1 - y0)) * ph;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" viewBox="0 0 {SVG_WIDTH} {SVG_HEIGHT}">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="16">{}</text>"#, SVG_WIDTH / 2.0, esc(&self.title));
        let (bx, by) = (MARGIN_LEFT, MARGIN_TOP + ph);
        let _ = writeln!(s, r#"<line x1="{bx:.2}" y1="{by:.2}" x2="{:.2}" y2="{by:.2}" stroke="black"/>"#, bx + pw);
        let _ = writeln!(s, r#"<line x1="{bx:.2}" y1="{by:.2}" x2="{bx:.2}" y2="{MARGIN_TOP:.2}" stroke="black"/>"#);
        for (v, anchor, x) in [(x0, "start", bx), (x1, "end", bx + pw)] {
            let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="{anchor}" font-size="12">{}</text>"#, by + 18.0, tick(v));
        }
        for (v, y) in [(y0, by), (y1, MARGIN_TOP + 10.0)] {
            let _ = writeln!(s, r#"<text x="{:.2}" y="{y:.2}" text-anchor="end" font-size="12">{}</text>"#, bx - 6.0, tick(v));
        }
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="14">{}</text>"#, bx + pw / 2.0, SVG_HEIGHT - 16.0, esc(&self.x_label));
        let _ = writeln!(
            s,
            r#"<text x="20" y="{:.2}" text-anchor="middle" font-size="14" transform="rotate(-90 20 {:.2})">{}</text>"#,
            MARGIN_TOP + ph / 2.0,
            MARGIN_TOP + ph / 2.0,
            esc(&self.y_label)
        );
        let mut legend_row = 0;
        for (i, series) in self.series.iter().enumerate() {
            let colour = PALETTE[i % PALETTE.len()];
            let coords: Vec<String> = series
                .points
                .iter()
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            let _ = writeln!(s, r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#, coords.join(" "));
            if !series.label.is_empty() {
                let ly = MARGIN_TOP + 16.0 + 16.0 * legend_row as f64;
                let lx = bx + pw - 120.0;
                let _ = writeln!(s, r#"<line x1="{lx:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{colour}" stroke-width="2"/>"#, ly - 4.0, lx + 20.0, ly - 4.0);
                let _ = writeln!(s, r#"<text x="{:.2}" y="{ly:.2}" font-size="12">{}</text>"#, lx + 26.0, esc(&series.label));
                legend_row += 1;
            }
        }
        s.push_str("</svg>\n");
        s
    }
}

fn tick(v: f64) -> String {
    format!("{v:.4e}")
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{Format, Metric, OracleMode};
use super::run::{Row, SweepResult};
use crate::error::{Error, Result};
use crate::netcore::{s11, write_s1p, C64};

pub const JSON_SCHEMA_VERSION: u32 = 1;

const ORACLE_COLUMNS: [&str; 5] = [
    "oracle_zin_re_ohm",
    "oracle_zin_im_ohm",
    "oracle_gain_db",
    "delta_zin_rel",
    "delta_gain_db",
];

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

fn clean(s: &str) -> String {
    s.replace([',', '\n', '\r'], ";")
}

/// CSV header: frequency, requested metrics, oracle columns, then bookkeeping.
pub fn csv_header(metrics: &[Metric], oracle: OracleMode) -> Vec<String> {
    let mut h = vec!["freq_ghz".to_string()];
    for m in metrics {
        h.extend(m.columns().iter().map(|c| c.to_string()));
    }
    if oracle != OracleMode::Off {
        h.extend(ORACLE_COLUMNS.iter().map(|c| c.to_string()));
        if oracle == OracleMode::Full {
            h.push("oracle_vds_ratio".into());
        }
    }
    h.extend(["f_lo_ghz", "series", "error"].iter().map(|c| c.to_string()));
    h
}

fn csv_row(r: &Row, label: &str, metrics: &[Metric], oracle: OracleMode) -> String {
    let mut cells = vec![cell(Some(r.freq_ghz))];
    for m in metrics {
        cells.extend(r.metric(*m).into_iter().map(cell));
    }
    if oracle != OracleMode::Off {
        let o = r.oracle.as_ref();
        cells.push(cell(o.map(|o| o.zin_re_ohm)));
        cells.push(cell(o.map(|o| o.zin_im_ohm)));
        cells.push(cell(o.map(|o| o.gain_db)));
        cells.push(cell(o.map(|o| o.delta_zin_rel)));
        cells.push(cell(o.map(|o| o.delta_gain_db)));
        if oracle == OracleMode::Full {
            cells.push(cell(o.and_then(|o| o.vds_ratio)));
        }
    }
    cells.push(cell(Some(r.f_lo_ghz)));
    cells.push(clean(label));
    cells.push(r.error.as_deref().map(clean).unwrap_or_default());
    cells.join(",")
}

pub fn to_csv(result: &SweepResult) -> String {
    let mut out = csv_header(&result.metrics, result.oracle).join(",");
    out.push('\n');
    for s in &result.series {
        for r in &s.rows {
            out.push_str(&csv_row(r, &s.label, &result.metrics, result.oracle));
            out.push('\n');
        }
    }
    out
}

/// Parsed CSV: header and raw cells.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Numeric value of a cell; empty cells are `None`.
    pub fn value(&self, row: usize, name: &str) -> Result<Option<f64>> {
        let c = self.column(name).ok_or_else(|| Error::Config(format!("no column `{name}`")))?;
        let text = &self.rows[row][c];
        if text.is_empty() {
            return Ok(None);
        }
        text.parse()
            .map(Some)
            .map_err(|_| Error::Config(format!("row {row} column `{name}`: `{text}` is not a number")))
    }
}

pub fn parse_csv(text: &str) -> Result<CsvTable> {
    let mut lines = text.lines().filter(|l| !l.is_empty());
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::Config("empty CSV".into()))?
        .split(',')
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let cells: Vec<String> = line.split(',').map(str::to_string).collect();
        if cells.len() != header.len() {
            return Err(Error::Config(format!("CSV row {i} has {} cells, header has {}", cells.len(), header.len())));
        }
        rows.push(cells);
    }
    Ok(CsvTable { header, rows })
}

#[derive(Serialize)]
struct JsonDoc<'a> {
    schema_version: u32,
    #[serde(flatten)]
    result: &'a SweepResult,
}

pub fn to_json(result: &SweepResult) -> Result<String> {
    serde_json::to_string_pretty(&JsonDoc {
        schema_version: JSON_SCHEMA_VERSION,
        result,
    })
    .map_err(|e| Error::Config(format!("json: {e}")))
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = (hi - lo).max(1e-12);
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| span / s <= 6.0).unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * step {
        out.push(if t.abs() < 1e-12 * step { 0.0 } else { t });
        t += step;
    }
    out
}

/// One line plot of `metric` with a polyline per series (two for impedance).
pub fn to_svg(result: &SweepResult, metric: Metric) -> String {
    let (w, h, ml, mr, mt, mb) = (640.0, 420.0, 70.0, 150.0, 40.0, 55.0);
    let mut lines: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for s in &result.series {
        for (ci, col) in metric.columns().iter().enumerate() {
            let pts: Vec<(f64, f64)> = s
                .rows
                .iter()
                .filter_map(|r| r.metric(metric)[ci].map(|v| (r.freq_ghz, v)))
                .collect();
            let name = if metric.columns().len() > 1 {
                format!("{} {}", s.label, if col.contains("_re_") { "Re" } else { "Im" })
            } else {
                s.label.clone()
            };
            lines.push((name, pts));
        }
    }
    let all: Vec<(f64, f64)> = lines.iter().flat_map(|l| l.1.iter().copied()).collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for (x, y) in &all {
        x0 = x0.min(*x);
        x1 = x1.max(*x);
        y0 = y0.min(*y);
        y1 = y1.max(*y);
    }
    if all.is_empty() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 < 1e-12 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    let pad = ((y1 - y0) * 0.08).max(1e-3);
    y0 -= pad;
    y1 += pad;
    let px = |x: f64| ml + (x - x0) / (x1 - x0) * (w - ml - mr);
    let py = |y: f64| h - mb - (y - y0) / (y1 - y0) * (h - mt - mb);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        (w - mr + ml) / 2.0,
        xml(&result.title)
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{ml}" y="{mt}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - ml - mr,
        h - mt - mb
    );
    for t in nice_ticks(x0, x1) {
        let x = px(t);
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="black"/><text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#,
            h - mb,
            h - mb + 5.0,
            h - mb + 18.0,
            fmt_tick(t)
        );
    }
    for t in nice_ticks(y0, y1) {
        let y = py(t);
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{y:.2}" x2="{ml}" y2="{y:.2}" stroke="black"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
            ml - 5.0,
            ml - 8.0,
            y + 4.0,
            fmt_tick(t)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">Frequency [GHz]</text>"#,
        (w - mr + ml) / 2.0,
        h - 12.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>"#,
        (h - mb + mt) / 2.0,
        (h - mb + mt) / 2.0,
        xml(metric.label())
    );
    for (i, (name, pts)) in lines.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{:.2},{:.2}", px(*x), py(*y))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            coords.join(" ")
        );
        let ly = mt + 10.0 + 18.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            w - mr + 10.0,
            w - mr + 30.0,
            w - mr + 35.0,
            ly + 4.0,
            xml(name)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn fmt_tick(t: f64) -> String {
    let s = format!("{t:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn xml(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn safe(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Writes the requested formats into `dir`, returning the files written.
pub fn emit(result: &SweepResult, formats: &[Format], dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for f in formats {
        match f {
            Format::Csv => {
                let p = dir.join(format!("{stem}.csv"));
                write_file(&p, to_csv(result).as_bytes())?;
                written.push(p);
            }
            Format::Json => {
                let p = dir.join(format!("{stem}.json"));
                write_file(&p, to_json(result)?.as_bytes())?;
                written.push(p);
            }
            Format::Svg => {
                for m in &result.metrics {
                    let p = dir.join(format!("{stem}_{}.svg", m.name()));
                    write_file(&p, to_svg(result, *m).as_bytes())?;
                    written.push(p);
                }
            }
            Format::S1p => {
                if !result.metrics.contains(&Metric::Zin) {
                    return Err(Error::Config("s1p output needs the zin metric".into()));
                }
                let multi = result.series.len() > 1;
                for s in &result.series {
                    let (mut freqs, mut gamma) = (Vec::new(), Vec::new());
                    for r in &s.rows {
                        if let (Some(re), Some(im)) = (r.zin_re_ohm, r.zin_im_ohm) {
                            freqs.push(r.freq_ghz * 1e9);
                            gamma.push(s11(C64::new(re, im), 50.0));
                        }
                    }
                    let name = if multi { format!("{stem}_{}.s1p", safe(&s.label)) } else { format!("{stem}.s1p") };
                    let p = dir.join(name);
                    let mut buf = Vec::new();
                    write_s1p(&mut buf, &freqs, &gamma).map_err(|e| Error::io(&p, e))?;
                    write_file(&p, &buf)?;
                    written.push(p);
                }
            }
        }
    }
    Ok(written)
}

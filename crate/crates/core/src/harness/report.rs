//! Report files: one JSON document, one CSV per table and one SVG line plot per table.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::experiments::{ExperimentReport, Table};

fn file_stem(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

/// Write `report` under `dir`; returns the created paths.
pub fn emit_report(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let stem = file_stem(&report.name);
    let mut files = Vec::new();
    let json = dir.join(format!("{stem}.json"));
    fs::write(&json, serde_json::to_string_pretty(report)?)?;
    files.push(json);
    files.extend(emit_tables(report, dir)?);
    Ok(files)
}

/// CSV and SVG files for every table of `report`.
pub fn emit_tables(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let stem = file_stem(&report.name);
    let mut files = Vec::new();
    for table in &report.tables {
        let base = format!("{stem}_{}", file_stem(&table.name));
        let csv_path = dir.join(format!("{base}.csv"));
        write_csv(table, &csv_path)?;
        files.push(csv_path);
        if table.rows.len() >= 2 && table.columns.len() >= 2 {
            let svg_path = dir.join(format!("{base}.svg"));
            fs::write(&svg_path, line_plot_svg(table))?;
            files.push(svg_path);
        }
    }
    Ok(files)
}

pub fn write_csv(table: &Table, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|x| format!("{x:e}")))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a JSON report back, e.g. to re-render its tables.
pub fn read_report(path: &Path) -> Result<ExperimentReport> {
    let report: ExperimentReport = serde_json::from_str(&fs::read_to_string(path)?)?;
    Ok(report)
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Column 0 against every other column; log-log axes when all data are positive.
pub fn line_plot_svg(table: &Table) -> String {
    let (w, h, m) = (640.0, 420.0, 60.0);
    let finite = |v: f64| v.is_finite();
    let log = table.rows.iter().all(|r| r.iter().all(|&v| v > 0.0 && finite(v)));
    let tr = |v: f64| if log { v.log10() } else { v };
    let pts = |c: usize| -> Vec<(f64, f64)> {
        table.rows.iter().filter(|r| finite(r[0]) && finite(r[c])).map(|r| (tr(r[0]), tr(r[c]))).collect()
    };
    let all: Vec<(f64, f64)> = (1..table.columns.len()).flat_map(pts).collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !(x1 > x0) {
        x1 = x0 + 1.0;
    }
    if !(y1 > y0) {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let sy = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="15" text-anchor="middle">{}</text>"#,
        w / 2.0,
        escape(&table.name)
    );
    let _ = writeln!(
        s,
        r#"<path d="M{m} {m} L{m} {} L{} {}" fill="none" stroke="black"/>"#,
        h - m,
        w - m,
        h - m
    );
    let axis = |v: f64| if log { format!("{:.3}", 10f64.powf(v)) } else { format!("{v:.3}") };
    let _ = writeln!(s, r#"<text x="{m}" y="{}" font-family="sans-serif" font-size="11">{}</text>"#, h - m + 16.0, axis(x0));
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#,
        w - m,
        h - m + 16.0,
        axis(x1)
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#, m - 4.0, h - m, axis(y0));
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#, m - 4.0, m + 4.0, axis(y1));
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">{}{}</text>"#,
        w / 2.0,
        h - 16.0,
        escape(&table.columns[0]),
        if log { " (log)" } else { "" }
    );
    for c in 1..table.columns.len() {
        let colour = PALETTE[(c - 1) % PALETTE.len()];
        let p = pts(c);
        if p.is_empty() {
            continue;
        }
        let d: Vec<String> = p.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="2"/>"#, d.join(" "));
        for &(x, y) in &p {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{colour}"/>"#, sx(x), sy(y));
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" fill="{colour}">{}</text>"#,
            w - m + 4.0,
            m + 16.0 * c as f64,
            escape(&table.columns[c])
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

//! Report files: the sweep table, per-series trends and a JSON manifest.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::pipeline::{ReportRow, RunReport, StageKind};
use crate::stage1::FairnessMode;

pub const TABLE_FILE: &str = "table.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

fn trend_file(series: &str) -> String {
    format!("trend_{series}.csv")
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Gap columns shown for `mode`: `|SPD|`, `|EOD|` or both.
fn gap_columns(mode: FairnessMode) -> Vec<(&'static str, fn(&ReportRow) -> Option<f64>)> {
    let spd: fn(&ReportRow) -> Option<f64> = |r| r.metrics.as_ref().and_then(|m| m.abs_spd());
    let eod: fn(&ReportRow) -> Option<f64> = |r| r.metrics.as_ref().and_then(|m| m.abs_eod());
    match mode {
        FairnessMode::Sp => vec![("abs_spd", spd)],
        FairnessMode::Eo => vec![("abs_eod", eod)],
        FairnessMode::SpPlusEo => vec![("abs_spd", spd), ("abs_eod", eod)],
    }
}

/// Stage-1 and stage-2 column groups in sweep order.
fn series(report: &RunReport) -> Vec<String> {
    let mut names = vec![StageKind::Syn1.to_string()];
    names.extend(report.ns2.iter().map(|s| format!("{}_{}", StageKind::Syn2, s.key())));
    names
}

fn rows_of<'a>(report: &'a RunReport, series: &'a str) -> impl Iterator<Item = &'a ReportRow> {
    report.rows.iter().filter(move |r| r.series() == series)
}

fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// One row per ρ; each series contributes accuracy and the mode's gaps.
/// The ρ = 0 stage-1 cell is the baseline.
pub fn table(report: &RunReport) -> (Vec<String>, Vec<Vec<String>>) {
    let gaps = gap_columns(report.mode);
    let names = series(report);
    let mut header = vec!["rho".to_string()];
    for name in &names {
        header.push(format!("{name}_accuracy_pct"));
        header.extend(gaps.iter().map(|(g, _)| format!("{name}_{g}")));
    }
    let rows = report
        .rho
        .iter()
        .map(|&rho| {
            let mut line = vec![rho.to_string()];
            for name in &names {
                let row = rows_of(report, name).find(|r| r.rho == rho);
                line.push(cell(row.and_then(|r| r.metrics.as_ref()).map(|m| m.accuracy_pct)));
                line.extend(gaps.iter().map(|(_, get)| cell(row.and_then(get))));
            }
            line
        })
        .collect();
    (header, rows)
}

const TREND_HEADER: [&str; 12] = [
    "rho",
    "accuracy_pct",
    "covariance_sp",
    "covariance_eo",
    "correlation_sp",
    "correlation_eo",
    "spd",
    "eod",
    "uplink",
    "downlink",
    "iterative",
    "error",
];

fn trend_line(rho: f64, row: &ReportRow) -> Vec<String> {
    let m = row.metrics.as_ref();
    vec![
        rho.to_string(),
        cell(m.map(|m| m.accuracy_pct)),
        cell(m.map(|m| m.covariance_sp)),
        cell(m.map(|m| m.covariance_eo)),
        cell(m.and_then(|m| m.correlation_sp)),
        cell(m.and_then(|m| m.correlation_eo)),
        m.map(|m| m.spd.to_string()).unwrap_or_default(),
        m.map(|m| m.eod.to_string()).unwrap_or_default(),
        row.communication.uplink.to_string(),
        row.communication.downlink.to_string(),
        row.communication.iterative.to_string(),
        row.error.clone().unwrap_or_default(),
    ]
}

#[derive(Serialize)]
struct Manifest<'a> {
    files: &'a [String],
    #[serde(flatten)]
    report: &'a RunReport,
}

/// Writes [`TABLE_FILE`], one `trend_<series>.csv` per series (the baseline
/// repeated on every ρ for plotting) and [`MANIFEST_FILE`] into `dir`.
/// Returns the written paths. Output depends only on `report`.
pub fn emit_report(report: &RunReport, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    if report.is_empty() {
        return Err(Error::EmptyReport);
    }
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();

    let (header, rows) = table(report);
    write_csv(&dir.join(TABLE_FILE), &header, &rows)?;
    files.push(TABLE_FILE.to_string());

    let header: Vec<String> = TREND_HEADER.iter().map(|s| s.to_string()).collect();
    if let Some(base) = report.baseline() {
        let lines: Vec<_> = report.rho.iter().map(|&rho| trend_line(rho, base)).collect();
        let name = trend_file(&StageKind::Baseline.to_string());
        write_csv(&dir.join(&name), &header, &lines)?;
        files.push(name);
    }
    for name in series(report) {
        let lines: Vec<_> = rows_of(report, &name).map(|r| trend_line(r.rho, r)).collect();
        let file = trend_file(&name);
        write_csv(&dir.join(&file), &header, &lines)?;
        files.push(file);
    }

    files.push(MANIFEST_FILE.to_string());
    let manifest = Manifest { files: &files, report };
    let path = dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest)?;
    std::fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;

    Ok(files.into_iter().map(|f| dir.join(f)).collect())
}

/// Reads a report back from a manifest written by [`emit_report`].
pub fn load_report(path: impl AsRef<Path>) -> Result<RunReport> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

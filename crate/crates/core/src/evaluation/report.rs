//! Plain-text and CSV renderings of evaluation results, plus parsers for
//! the CSV forms.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::ablation::AblationGrid;
use super::cv::EvalReport;
use super::metrics::format_2dp;
use crate::error::{Error, Result};

const METRIC_COLUMNS: [&str; 10] = [
    "P_acc", "P_rej", "P_avg", "R_acc", "R_rej", "R_avg", "F_acc", "F_rej", "F_avg", "Acc",
];

fn metric_values(r: &EvalReport) -> [f64; 10] {
    let m = &r.metrics;
    [
        m.accepted.precision,
        m.rejected.precision,
        m.macro_avg.precision,
        m.accepted.recall,
        m.rejected.recall,
        m.macro_avg.recall,
        m.accepted.f1,
        m.rejected.f1,
        m.macro_avg.f1,
        m.accuracy,
    ]
}

fn row_name(r: &EvalReport) -> String {
    format!("{} ({}, {})", r.classifier.display_name(), r.feature_sets, r.protocol.label())
}

fn table(header: &[String], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &[String]| -> String {
        cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect::<Vec<_>>()
            .join(" | ")
    };
    let mut out = line(header);
    out.push('\n');
    out.push_str(&widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("-+-"));
    out.push('\n');
    for row in rows {
        out.push_str(&line(row));
        out.push('\n');
    }
    out
}

/// One row per report, columns as in the classifier comparison table.
pub fn render_metrics_text(reports: &[EvalReport]) -> String {
    let mut header = vec!["Classifier".to_string()];
    header.extend(METRIC_COLUMNS.iter().map(|c| c.to_string()));
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            let mut row = vec![row_name(r)];
            row.extend(metric_values(r).iter().map(|v| format_2dp(*v)));
            row
        })
        .collect();
    let mut out = table(&header, &rows);
    for r in reports {
        let cm = &r.metrics.confusion;
        let _ = writeln!(
            out,
            "{}: tp_acc={} fn_acc={} fp_acc={} tn_acc={}",
            row_name(r),
            cm.tp_acc,
            cm.fn_acc,
            cm.fp_acc,
            cm.tn_acc
        );
        for w in r.metrics.warnings.iter().chain(&r.notes) {
            let _ = writeln!(out, "  warning: {w}");
        }
    }
    out.push_str(&footer(reports.iter().map(|r| (r.config_hash.as_str(), r.options.seed))));
    out
}

fn footer<'a>(items: impl Iterator<Item = (&'a str, u64)>) -> String {
    let mut seen: Vec<(&str, u64)> = Vec::new();
    for item in items {
        if !seen.contains(&item) {
            seen.push(item);
        }
    }
    seen.iter()
        .map(|(h, s)| format!("config_hash: {h}  seed: {s}\n"))
        .collect()
}

/// A row of the metrics CSV, values at full precision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsCsvRow {
    pub classifier: String,
    pub feature_sets: String,
    pub protocol: String,
    pub p_acc: f64,
    pub p_rej: f64,
    pub p_avg: f64,
    pub r_acc: f64,
    pub r_rej: f64,
    pub r_avg: f64,
    pub f_acc: f64,
    pub f_rej: f64,
    pub f_avg: f64,
    pub accuracy: f64,
    pub tp_acc: u64,
    pub fn_acc: u64,
    pub fp_acc: u64,
    pub tn_acc: u64,
    pub config_hash: String,
    pub seed: u64,
}

impl MetricsCsvRow {
    pub fn from_report(r: &EvalReport) -> Self {
        let v = metric_values(r);
        let cm = &r.metrics.confusion;
        MetricsCsvRow {
            classifier: r.classifier.as_str().to_string(),
            feature_sets: r.feature_sets.clone(),
            protocol: r.protocol.label(),
            p_acc: v[0],
            p_rej: v[1],
            p_avg: v[2],
            r_acc: v[3],
            r_rej: v[4],
            r_avg: v[5],
            f_acc: v[6],
            f_rej: v[7],
            f_avg: v[8],
            accuracy: v[9],
            tp_acc: cm.tp_acc,
            fn_acc: cm.fn_acc,
            fp_acc: cm.fp_acc,
            tn_acc: cm.tn_acc,
            config_hash: r.config_hash.clone(),
            seed: r.options.seed,
        }
    }
}

fn csv_error(e: impl std::fmt::Display) -> Error {
    Error::Evaluation(format!("report csv: {e}"))
}

pub fn render_metrics_csv(reports: &[EvalReport]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in reports {
        w.serialize(MetricsCsvRow::from_report(r)).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
}

pub fn parse_metrics_csv(input: &str) -> Result<Vec<MetricsCsvRow>> {
    csv::Reader::from_reader(input.as_bytes())
        .deserialize()
        .map(|r| r.map_err(csv_error))
        .collect()
}

fn grid_cell(grid: &AblationGrid, r: usize, c: usize) -> String {
    let cell = &grid.rows[r].cells[c];
    match cell.seed_std {
        Some(sd) => format!("{} ±{:.1}", cell.percent, sd),
        None => cell.percent.to_string(),
    }
}

/// Accuracy percents in the ablation table shape, rows labelled with their
/// dimension.
pub fn render_grid_text(grid: &AblationGrid) -> String {
    let mut header = vec!["Features".to_string()];
    header.extend(grid.columns.iter().cloned());
    let rows: Vec<Vec<String>> = grid
        .rows
        .iter()
        .enumerate()
        .map(|(r, row)| {
            let mut cells = vec![format!("{} [{}]", row.label, row.dimension)];
            cells.extend((0..grid.columns.len()).map(|c| grid_cell(grid, r, c)));
            cells
        })
        .collect();
    let mut out = table(&header, &rows);
    let _ = writeln!(out, "best 10-F row: {}", grid.rows[grid.winner].label);
    let _ = writeln!(out, "classifier: {}", grid.classifier);
    if !grid.extra_seeds.is_empty() {
        let seeds: Vec<String> = grid.extra_seeds.iter().map(u64::to_string).collect();
        let _ = writeln!(out, "spread over extra seeds: {}", seeds.join(", "));
    }
    out.push_str(&footer(std::iter::once((grid.base_config_hash.as_str(), grid.seed))));
    out
}

/// Parsed ablation CSV: accuracies at full precision.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCsv {
    pub columns: Vec<String>,
    /// (label, dimension, accuracy per column)
    pub rows: Vec<(String, usize, Vec<f64>)>,
}

pub fn render_grid_csv(grid: &AblationGrid) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["features".to_string(), "dimension".to_string()];
    header.extend(grid.columns.iter().cloned());
    w.write_record(&header).expect("in-memory csv");
    for row in &grid.rows {
        let mut rec = vec![row.label.clone(), row.dimension.to_string()];
        rec.extend(row.cells.iter().map(|c| c.accuracy.to_string()));
        w.write_record(&rec).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
}

pub fn parse_grid_csv(input: &str) -> Result<GridCsv> {
    let mut reader = csv::Reader::from_reader(input.as_bytes());
    let header = reader.headers().map_err(csv_error)?.clone();
    if header.len() < 3 || &header[0] != "features" || &header[1] != "dimension" {
        return Err(csv_error("expected a header starting with features,dimension"));
    }
    let columns: Vec<String> = header.iter().skip(2).map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(csv_error)?;
        if rec.len() != header.len() {
            return Err(csv_error(format!("row has {} fields, expected {}", rec.len(), header.len())));
        }
        let dim = rec[1].parse().map_err(csv_error)?;
        let values = rec
            .iter()
            .skip(2)
            .map(|v| v.parse::<f64>().map_err(csv_error))
            .collect::<Result<Vec<_>>>()?;
        rows.push((rec[0].to_string(), dim, values));
    }
    Ok(GridCsv { columns, rows })
}

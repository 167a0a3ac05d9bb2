//! Evaluation report rendering: a plain-text table for humans and a
//! versioned JSON document for machines.

use std::fmt::Write as _;

use serde::Serialize;

use pud_core::EvalReport;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct ReportDocument<'a> {
    pub schema_version: u32,
    pub descriptor_kind: &'a str,
    pub report: &'a EvalReport,
}

pub fn render_table(report: &EvalReport) -> String {
    let width = report
        .per_class_precision
        .keys()
        .map(|k| k.len())
        .max()
        .unwrap_or(5)
        .max("class-mean".len());

    let mut out = String::new();
    let _ = writeln!(
        out,
        "method {} at {} returns",
        report.method, report.n_returns
    );
    let _ = writeln!(out, "{:<width$}  precision%  recall%", "class");
    for (label, precision) in &report.per_class_precision {
        let recall = report.per_class_recall.get(label).copied().unwrap_or(0.0);
        let _ = writeln!(out, "{label:<width$}  {precision:>10.2}  {recall:>7.2}");
    }
    let _ = writeln!(
        out,
        "{:<width$}  {:>10.2}  {:>7.2}",
        "average", report.avg_precision, report.avg_recall
    );
    let _ = writeln!(
        out,
        "{:<width$}  {:>10.2}  {:>7.2}",
        "class-mean", report.class_mean_precision, report.class_mean_recall
    );
    if let Some(ns) = report.ns_score {
        let _ = writeln!(out, "N-S score: {ns:.4}");
    }
    out
}

pub fn to_json(report: &EvalReport, descriptor_kind: &str) -> Result<String, crate::CliError> {
    let doc = ReportDocument {
        schema_version: REPORT_SCHEMA_VERSION,
        descriptor_kind,
        report,
    };
    serde_json::to_string_pretty(&doc)
        .map_err(|e| crate::CliError::Data(format!("cannot serialize report: {e}")))
}

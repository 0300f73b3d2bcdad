//! Violation reports and ranking tables in CSV or JSON.
//!
//! Numbers are rounded for display (voltages to 0.01 %, indices to 1e-6)
//! and printed in shortest round-trip form, so output is byte-stable.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::contingency::{
    CapacityScreenResult, ContingencyResult, RankingEntry, ResultStatus, ViolationCounts, ViolationReport,
    VoltageLimits,
};
use crate::ras::RasEvaluation;

pub const CSV_HEADER: &str = "bus_id,nominal_kv,voltage_pct,class";
pub const RANKING_HEADER: &str = "rank,contingency_id,status,severity_index,worst_deviation,violations";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(format!("unknown report format '{other}' (expected csv or json)")),
        }
    }
}

/// Everything a study run produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub limits: VoltageLimits,
    pub base: ContingencyResult,
    /// In study order.
    pub results: Vec<ContingencyResult>,
    pub ranking: Vec<RankingEntry>,
    /// Plan evaluations grouped by contingency in study order, best plan first.
    pub remedial: Vec<RasEvaluation>,
}

impl StudyReport {
    pub fn rank_of(&self, contingency_id: &str) -> Option<usize> {
        self.ranking
            .iter()
            .find(|e| e.contingency_id == contingency_id)
            .map(|e| e.position)
    }

    pub fn result(&self, contingency_id: &str) -> Option<&ContingencyResult> {
        self.results.iter().find(|r| r.contingency_id == contingency_id)
    }

    pub fn evaluations_for<'a>(&'a self, contingency_id: &'a str) -> impl Iterator<Item = &'a RasEvaluation> + 'a {
        self.remedial.iter().filter(move |e| e.contingency_id == contingency_id)
    }
}

pub fn round_to(x: f64, decimals: i32) -> f64 {
    let f = 10f64.powi(decimals);
    let r = (x * f).round() / f;
    // Normalize -0.0 so it prints as 0.
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn pct(x: f64) -> f64 {
    round_to(x, 2)
}

fn index(x: f64) -> f64 {
    round_to(x, 6)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub bus_id: String,
    pub nominal_kv: f64,
    pub voltage_pct: f64,
    pub class: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSection {
    pub id: String,
    pub status: ResultStatus,
    pub severity_index: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    pub counts: ViolationCounts,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub capacity: Option<CapacityScreenResult>,
    pub rows: Vec<ReportRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemedialSection {
    pub contingency_id: String,
    pub plan_id: String,
    pub status: ResultStatus,
    pub severity_index_before: f64,
    pub severity_index_after: f64,
    pub cleared: bool,
    pub max_drop_vs_steady_state_pct: f64,
    pub counts: ViolationCounts,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub capacity: Option<CapacityScreenResult>,
    pub rows: Vec<ReportRow>,
}

/// Display form of a [`StudyReport`]; the JSON report is this value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base: Option<ReportSection>,
    pub contingencies: Vec<ReportSection>,
    pub remedial: Vec<RemedialSection>,
}

fn rows(report: &ViolationReport) -> Vec<ReportRow> {
    report
        .rows
        .iter()
        .map(|r| ReportRow {
            bus_id: r.bus_id.clone(),
            nominal_kv: r.nominal_kv,
            voltage_pct: pct(r.voltage_pct),
            class: r.class.as_str().to_string(),
        })
        .collect()
}

fn section(r: &ContingencyResult, rank: Option<usize>) -> ReportSection {
    ReportSection {
        id: r.contingency_id.clone(),
        status: r.status,
        severity_index: index(r.severity_index),
        rank,
        counts: r.report.counts,
        capacity: r.capacity,
        rows: rows(&r.report),
    }
}

impl ReportDocument {
    /// An empty study yields an empty document (no base section either).
    pub fn from_report(report: &StudyReport) -> Self {
        if report.results.is_empty() {
            return Self::default();
        }
        Self {
            base: Some(section(&report.base, None)),
            contingencies: report
                .results
                .iter()
                .map(|r| section(r, report.rank_of(&r.contingency_id)))
                .collect(),
            remedial: report
                .remedial
                .iter()
                .map(|e| RemedialSection {
                    contingency_id: e.contingency_id.clone(),
                    plan_id: e.plan_id.clone(),
                    status: e.after.status,
                    severity_index_before: index(e.severity_before()),
                    severity_index_after: index(e.severity_after()),
                    cleared: e.cleared,
                    max_drop_vs_steady_state_pct: pct(e.max_drop_vs_steady_state_pct),
                    counts: e.after.report.counts,
                    capacity: e.capacity_after,
                    rows: rows(&e.after.report),
                })
                .collect(),
        }
    }
}

fn status_str(s: ResultStatus) -> &'static str {
    match s {
        ResultStatus::Converged => "converged",
        ResultStatus::Diverged => "diverged",
        ResultStatus::NotApplicable => "not-applicable",
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn write_rows(out: &mut String, rows: &[ReportRow]) {
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            csv_field(&r.bus_id),
            r.nominal_kv,
            r.voltage_pct,
            r.class
        );
    }
}

fn render_csv(doc: &ReportDocument) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    if let Some(base) = &doc.base {
        let _ = writeln!(
            out,
            "# base,status={},severity_index={}",
            status_str(base.status),
            base.severity_index
        );
        write_rows(&mut out, &base.rows);
    }
    for s in &doc.contingencies {
        let _ = write!(
            out,
            "# contingency={},status={},severity_index={}",
            s.id,
            status_str(s.status),
            s.severity_index
        );
        if let Some(rank) = s.rank {
            let _ = write!(out, ",rank={rank}");
        }
        if let Some(c) = &s.capacity {
            let _ = write!(out, ",curtailment_mw={}", c.curtailment_mw);
        }
        out.push('\n');
        write_rows(&mut out, &s.rows);
    }
    for s in &doc.remedial {
        let _ = writeln!(
            out,
            "# remedial={},plan={},status={},severity_index={},cleared={},max_drop_pct={}",
            s.contingency_id,
            s.plan_id,
            status_str(s.status),
            s.severity_index_after,
            s.cleared,
            s.max_drop_vs_steady_state_pct
        );
        write_rows(&mut out, &s.rows);
    }
    out
}

pub fn write_report(report: &StudyReport, format: ReportFormat) -> Vec<u8> {
    let doc = ReportDocument::from_report(report);
    match format {
        ReportFormat::Csv => render_csv(&doc).into_bytes(),
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(&doc).expect("report document is always serializable");
            s.push('\n');
            s.into_bytes()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingRow {
    pub rank: usize,
    pub contingency_id: String,
    pub status: ResultStatus,
    pub severity_index: f64,
    pub worst_deviation: f64,
    pub violations: usize,
}

pub fn ranking_rows(ranking: &[RankingEntry]) -> Vec<RankingRow> {
    ranking
        .iter()
        .map(|e| RankingRow {
            rank: e.position,
            contingency_id: e.contingency_id.clone(),
            status: e.status,
            severity_index: index(e.severity_index),
            worst_deviation: index(e.worst_deviation),
            violations: e.violations,
        })
        .collect()
}

pub fn write_ranking(ranking: &[RankingEntry], format: ReportFormat) -> Vec<u8> {
    let rows = ranking_rows(ranking);
    match format {
        ReportFormat::Csv => {
            let mut out = String::new();
            out.push_str(RANKING_HEADER);
            out.push('\n');
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    r.rank,
                    csv_field(&r.contingency_id),
                    status_str(r.status),
                    r.severity_index,
                    r.worst_deviation,
                    r.violations
                );
            }
            out.into_bytes()
        }
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(&rows).expect("ranking is always serializable");
            s.push('\n');
            s.into_bytes()
        }
    }
}

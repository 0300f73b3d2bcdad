//! One analysis cycle: a full study run against a sealed snapshot.

use std::time::Instant;

use nca_core::contingency::ViolationCounts;
use nca_core::study::{run_study, StudyError};
use nca_core::study_io::{StudyReport, StudySpec};
use serde::{Deserialize, Serialize};

use crate::history::HistoryRecord;
use crate::snapshot::{SnapshotSummary, SystemSnapshot};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleResult {
    pub sequence: u64,
    pub snapshot: SnapshotSummary,
    pub report: StudyReport,
    pub duration_ms: f64,
}

/// Compact per-cycle notice sent on the event stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleEvent {
    pub sequence: u64,
    pub timestamp_ms: u64,
    pub duration_ms: f64,
    pub top_contingency: Option<String>,
    pub top_severity_index: f64,
    pub counts: ViolationCounts,
}

pub fn analysis_cycle(snapshot: &SystemSnapshot, study: &StudySpec, workers: Option<usize>) -> Result<CycleResult, StudyError> {
    let t = Instant::now();
    let report = run_study(&snapshot.model, study, workers)?;
    Ok(CycleResult {
        sequence: snapshot.sequence,
        snapshot: snapshot.summary(),
        report,
        duration_ms: t.elapsed().as_secs_f64() * 1e3,
    })
}

impl CycleResult {
    /// Violation counts summed over every contingency of the cycle.
    pub fn contingency_counts(&self) -> ViolationCounts {
        let mut c = ViolationCounts::default();
        for r in &self.report.results {
            c.undervoltage += r.report.counts.undervoltage;
            c.overvoltage += r.report.counts.overvoltage;
            c.de_energized += r.report.counts.de_energized;
        }
        c
    }

    pub fn history_record(&self, timestamp_ms: u64) -> HistoryRecord {
        let top = self.report.ranking.first();
        let worst = self
            .report
            .base
            .report
            .rows
            .iter()
            .min_by(|a, b| a.voltage_pct.total_cmp(&b.voltage_pct));
        HistoryRecord {
            timestamp_ms,
            sequence: self.sequence,
            total_load_mw: self.snapshot.total_load_mw,
            worst_bus: worst.map(|r| r.bus_id.clone()),
            worst_voltage_pct: worst.map(|r| r.voltage_pct),
            top_contingency: top.map(|e| e.contingency_id.clone()),
            top_severity_index: top.map_or(0.0, |e| e.severity_index),
            counts: self.contingency_counts(),
        }
    }

    pub fn event(&self, timestamp_ms: u64) -> CycleEvent {
        let top = self.report.ranking.first();
        CycleEvent {
            sequence: self.sequence,
            timestamp_ms,
            duration_ms: self.duration_ms,
            top_contingency: top.map(|e| e.contingency_id.clone()),
            top_severity_index: top.map_or(0.0, |e| e.severity_index),
            counts: self.contingency_counts(),
        }
    }
}

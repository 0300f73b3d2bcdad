//! Measurement samples and the latest-value table.

use std::collections::BTreeMap;

use nca_core::NetworkModel;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    VoltagePct,
    PMw,
    QMvar,
    IAmps,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quality {
    #[default]
    Good,
    Suspect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementSample {
    /// Bus or load id.
    pub element: String,
    pub quantity: Quantity,
    pub value: f64,
    /// Milliseconds on the sender's monotonic clock.
    pub timestamp_ms: u64,
    #[serde(default)]
    pub quality: Quality,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RejectReason {
    UnknownElement,
    NonFinite,
    /// Constant-power loads must not draw negative real power.
    NegativeLoad,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "reason", rename_all = "kebab-case")]
pub enum SampleStatus {
    Accepted,
    /// Valid, but an equal-or-newer sample for the same key is already held.
    Superseded,
    Rejected(RejectReason),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestCounters {
    pub accepted: u64,
    pub superseded: u64,
    pub rejected: u64,
    pub suspect: u64,
}

/// Newest sample per `(element, quantity)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LatestValues {
    table: BTreeMap<(String, Quantity), MeasurementSample>,
    pub counters: IngestCounters,
}

fn known(model: &NetworkModel, element: &str) -> bool {
    model.bus_index(element).is_some() || model.load_index(element).is_some()
}

impl LatestValues {
    pub fn get(&self, element: &str, quantity: Quantity) -> Option<&MeasurementSample> {
        self.table.get(&(element.to_string(), quantity))
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn samples(&self) -> impl Iterator<Item = &MeasurementSample> {
        self.table.values()
    }

    pub fn ingest_one(&mut self, model: &NetworkModel, sample: MeasurementSample) -> SampleStatus {
        let status = if !known(model, &sample.element) {
            SampleStatus::Rejected(RejectReason::UnknownElement)
        } else if !sample.value.is_finite() {
            SampleStatus::Rejected(RejectReason::NonFinite)
        } else if sample.quantity == Quantity::PMw && sample.value < 0.0 && model.load_index(&sample.element).is_some() {
            SampleStatus::Rejected(RejectReason::NegativeLoad)
        } else {
            let key = (sample.element.clone(), sample.quantity);
            match self.table.get(&key) {
                Some(held) if held.timestamp_ms > sample.timestamp_ms => SampleStatus::Superseded,
                _ => {
                    if sample.quality == Quality::Suspect {
                        self.counters.suspect += 1;
                    }
                    self.table.insert(key, sample);
                    SampleStatus::Accepted
                }
            }
        };
        match status {
            SampleStatus::Accepted => self.counters.accepted += 1,
            SampleStatus::Superseded => self.counters.superseded += 1,
            SampleStatus::Rejected(_) => self.counters.rejected += 1,
        }
        status
    }

    pub fn ingest(&mut self, model: &NetworkModel, batch: Vec<MeasurementSample>) -> Vec<SampleStatus> {
        batch.into_iter().map(|s| self.ingest_one(model, s)).collect()
    }
}

//! Sealed operating-point snapshots built from the latest measurements.

use std::sync::Arc;

use nca_core::NetworkModel;
use serde::{Deserialize, Serialize};

use crate::measurement::{LatestValues, Quality, Quantity};

/// Immutable model plus the bookkeeping of how it was derived.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSnapshot {
    pub sequence: u64,
    pub as_of_ms: u64,
    pub model: Arc<NetworkModel>,
    /// Load ids whose p or q came from a measurement.
    pub measured_loads: Vec<String>,
    /// Suspect samples skipped while building.
    pub suspect_ignored: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotSummary {
    pub sequence: u64,
    pub as_of_ms: u64,
    pub total_load_mw: f64,
    pub total_load_mvar: f64,
    pub measured_loads: Vec<String>,
    pub suspect_ignored: usize,
}

impl SystemSnapshot {
    pub fn summary(&self) -> SnapshotSummary {
        SnapshotSummary {
            sequence: self.sequence,
            as_of_ms: self.as_of_ms,
            total_load_mw: self.model.loads.iter().map(|l| l.p_mw).sum(),
            total_load_mvar: self.model.loads.iter().map(|l| l.q_mvar).sum(),
            measured_loads: self.measured_loads.clone(),
            suspect_ignored: self.suspect_ignored,
        }
    }
}

/// Substitutes good load p/q measurements into a copy of `base`. Voltage and
/// current samples are kept in the table but do not alter the model.
pub fn build_snapshot(latest: &LatestValues, base: &NetworkModel, sequence: u64, as_of_ms: u64) -> SystemSnapshot {
    let mut model = base.clone();
    let mut measured = Vec::new();
    let mut suspect = 0;
    for load in &mut model.loads {
        let mut hit = false;
        for (q, slot) in [(Quantity::PMw, &mut load.p_mw), (Quantity::QMvar, &mut load.q_mvar)] {
            match latest.get(&load.id, q) {
                Some(s) if s.quality == Quality::Good => {
                    *slot = s.value;
                    hit = true;
                }
                Some(_) => suspect += 1,
                None => {}
            }
        }
        if hit {
            measured.push(load.id.clone());
        }
    }
    SystemSnapshot {
        sequence,
        as_of_ms,
        model: Arc::new(model),
        measured_loads: measured,
        suspect_ignored: suspect,
    }
}

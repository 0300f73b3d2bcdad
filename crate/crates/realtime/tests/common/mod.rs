#![allow(dead_code)]

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use nca_core::study_io::StudySpec;
use nca_core::{build_network, reference_network, NetworkModel};
use nca_realtime::{HistoryStore, Service, DEFAULT_RETENTION_MS};

pub fn fixture() -> (NetworkModel, StudySpec) {
    let (net, study) = reference_network();
    (build_network(&net).unwrap(), study)
}

/// Clock that advances 1000 ms per reading, starting at `start`.
pub fn stepping_clock(start: u64) -> Box<dyn Fn() -> u64 + Send + Sync> {
    let t = Arc::new(AtomicU64::new(start));
    Box::new(move || t.fetch_add(1000, Ordering::SeqCst))
}

pub fn service() -> Service {
    let (model, study) = fixture();
    Service::with_clock(model, study, HistoryStore::in_memory(DEFAULT_RETENTION_MS), Some(2), stepping_clock(1_000))
}

pub fn sample(element: &str, quantity: nca_realtime::Quantity, value: f64, t: u64) -> nca_realtime::MeasurementSample {
    nca_realtime::MeasurementSample {
        element: element.into(),
        quantity,
        value,
        timestamp_ms: t,
        quality: nca_realtime::Quality::Good,
    }
}

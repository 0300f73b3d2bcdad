//! Shared service state: ingestion table, published cycle, history and the
//! event channel.

use std::sync::{Arc, Mutex, RwLock};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use nca_core::study::StudyError;
use nca_core::study_io::StudySpec;
use nca_core::NetworkModel;
use thiserror::Error;
use tokio::sync::{broadcast, watch};

use crate::cycle::{analysis_cycle, CycleEvent, CycleResult};
use crate::history::{HistoryError, HistoryRecord, HistoryStore};
use crate::measurement::{IngestCounters, LatestValues, MeasurementSample, SampleStatus};
use crate::snapshot::{build_snapshot, SystemSnapshot};
use crate::whatif::{whatif, WhatIfError, WhatIfRequest};

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error(transparent)]
    Study(#[from] StudyError),
    #[error(transparent)]
    History(#[from] HistoryError),
}

pub type Clock = Box<dyn Fn() -> u64 + Send + Sync>;

pub fn wall_clock_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .unwrap_or(Duration::ZERO)
        .as_millis() as u64
}

/// The last completed cycle together with the snapshot it ran on.
#[derive(Debug)]
pub struct Published {
    pub cycle: CycleResult,
    pub snapshot: SystemSnapshot,
    pub timestamp_ms: u64,
}

pub struct Service {
    base: Arc<NetworkModel>,
    study: Arc<StudySpec>,
    workers: Option<usize>,
    latest_values: Mutex<LatestValues>,
    latest: RwLock<Option<Arc<Published>>>,
    history: Mutex<HistoryStore>,
    /// Held for the whole of a cycle: one analysis at a time.
    cycle_lock: Mutex<u64>,
    events: broadcast::Sender<CycleEvent>,
    stop: watch::Sender<bool>,
    clock: Clock,
}

impl Service {
    pub fn new(base: NetworkModel, study: StudySpec, history: HistoryStore, workers: Option<usize>) -> Self {
        Self::with_clock(base, study, history, workers, Box::new(wall_clock_ms))
    }

    pub fn with_clock(base: NetworkModel, study: StudySpec, history: HistoryStore, workers: Option<usize>, clock: Clock) -> Self {
        let next_sequence = history.last_sequence().map_or(1, |s| s + 1);
        let (events, _) = broadcast::channel(64);
        let (stop, _) = watch::channel(false);
        Self {
            base: Arc::new(base),
            study: Arc::new(study),
            workers,
            latest_values: Mutex::new(LatestValues::default()),
            latest: RwLock::new(None),
            history: Mutex::new(history),
            cycle_lock: Mutex::new(next_sequence),
            events,
            stop,
            clock,
        }
    }

    pub fn base(&self) -> &NetworkModel {
        &self.base
    }

    pub fn study(&self) -> &StudySpec {
        &self.study
    }

    pub fn ingest(&self, batch: Vec<MeasurementSample>) -> Vec<SampleStatus> {
        self.latest_values.lock().unwrap().ingest(&self.base, batch)
    }

    pub fn counters(&self) -> IngestCounters {
        self.latest_values.lock().unwrap().counters
    }

    pub fn measurement_count(&self) -> usize {
        self.latest_values.lock().unwrap().len()
    }

    pub fn subscribe(&self) -> broadcast::Receiver<CycleEvent> {
        self.events.subscribe()
    }

    /// Flips once when the service is shutting down; streams and the cycle
    /// loop watch it.
    pub fn stop_signal(&self) -> watch::Receiver<bool> {
        self.stop.subscribe()
    }

    pub fn request_stop(&self) {
        self.stop.send_replace(true);
    }

    pub fn latest(&self) -> Option<Arc<Published>> {
        self.latest.read().unwrap().clone()
    }

    pub fn query_history(&self, from_ms: u64, to_ms: u64) -> Vec<HistoryRecord> {
        self.history.lock().unwrap().query(from_ms, to_ms)
    }

    /// Builds a snapshot from the current table without running anything.
    /// Later ingestion cannot reach it.
    pub fn seal_snapshot(&self, sequence: u64) -> SystemSnapshot {
        let table = self.latest_values.lock().unwrap().clone();
        build_snapshot(&table, &self.base, sequence, (self.clock)())
    }

    /// Seals a snapshot, analyses it and publishes the result.
    pub fn run_cycle(&self) -> Result<Arc<Published>, ServiceError> {
        let mut next = self.cycle_lock.lock().unwrap();
        let snapshot = self.seal_snapshot(*next);
        let published = self.analyse_and_publish(snapshot)?;
        *next += 1;
        Ok(published)
    }

    /// Runs `snapshot` through the cycle and publishes it. Exposed so callers
    /// can seal first and ingest before analysis starts.
    pub fn run_sealed(&self, snapshot: SystemSnapshot) -> Result<Arc<Published>, ServiceError> {
        let mut next = self.cycle_lock.lock().unwrap();
        let published = self.analyse_and_publish(snapshot)?;
        *next = (*next).max(published.cycle.sequence + 1);
        Ok(published)
    }

    fn analyse_and_publish(&self, snapshot: SystemSnapshot) -> Result<Arc<Published>, ServiceError> {
        let cycle = analysis_cycle(&snapshot, &self.study, self.workers)?;
        let mut history = self.history.lock().unwrap();
        let now = (self.clock)();
        let timestamp_ms = history.last_timestamp().map_or(now, |last| now.max(last + 1));
        history.append(cycle.history_record(timestamp_ms))?;
        drop(history);
        let event = cycle.event(timestamp_ms);
        let published = Arc::new(Published {
            cycle,
            snapshot,
            timestamp_ms,
        });
        *self.latest.write().unwrap() = Some(published.clone());
        // No subscribers is fine.
        let _ = self.events.send(event);
        log::info!(
            "cycle {} done in {:.1} ms",
            published.cycle.sequence,
            published.cycle.duration_ms
        );
        Ok(published)
    }

    /// Evaluates on the latest snapshot, or on the base model before the
    /// first cycle.
    pub fn whatif(&self, req: &WhatIfRequest) -> Result<nca_core::ras::RasEvaluation, WhatIfError> {
        match self.latest() {
            Some(p) => whatif(&p.snapshot.model, &self.study, req),
            None => whatif(&self.base, &self.study, req),
        }
    }
}

//! Real-time contingency analysis service.
//!
//! Measurements land in a latest-value table; a single worker periodically
//! seals a snapshot, runs the full study on it and publishes the result.
//! Readers always see the last completed cycle.

pub mod cycle;
pub mod history;
pub mod http;
pub mod measurement;
pub mod service;
pub mod snapshot;
pub mod whatif;

use std::future::Future;
use std::sync::Arc;
use std::time::Duration;

use tokio::net::TcpListener;
use tokio::time::MissedTickBehavior;

pub use cycle::{analysis_cycle, CycleEvent, CycleResult};
pub use history::{HistoryRecord, HistoryStore, DEFAULT_RETENTION_MS};
pub use measurement::{MeasurementSample, Quality, Quantity, SampleStatus};
pub use service::Service;
pub use snapshot::{build_snapshot, SystemSnapshot};
pub use whatif::{whatif, WhatIfRequest};

/// Runs cycles every `period` until the service is asked to stop. A cycle that overruns
/// delays the next tick instead of overlapping it. An in-flight cycle always
/// finishes, so its history record is on disk before this returns.
pub async fn run_cycles(service: Arc<Service>, period: Duration) {
    let mut stop = service.stop_signal();
    if *stop.borrow() {
        return;
    }
    let mut tick = tokio::time::interval(period);
    tick.set_missed_tick_behavior(MissedTickBehavior::Delay);
    loop {
        tokio::select! {
            _ = tick.tick() => {
                let svc = service.clone();
                match tokio::task::spawn_blocking(move || svc.run_cycle()).await {
                    Ok(Ok(_)) => {}
                    Ok(Err(e)) => log::error!("analysis cycle failed: {e}"),
                    Err(e) => log::error!("analysis worker panicked: {e}"),
                }
            }
            _ = stop.changed() => break,
        }
    }
}

/// Serves the API on `listener` and runs the cycle loop until `shutdown`
/// resolves.
pub async fn serve(
    service: Arc<Service>,
    listener: TcpListener,
    period: Duration,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let cycles = tokio::spawn(run_cycles(service.clone(), period));
    let app = http::router(service.clone());
    let on_signal = service.clone();
    let result = axum::serve(listener, app)
        .with_graceful_shutdown(async move {
            shutdown.await;
            on_signal.request_stop();
        })
        .await;
    service.request_stop();
    let _ = cycles.await;
    result
}

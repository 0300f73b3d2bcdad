//! HTTP + JSON routes and the server-sent event stream.

use std::convert::Infallible;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::{header, StatusCode};
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures_util::stream::{self, Stream};
use nca_core::study_io::{write_ranking, write_report, ReportFormat};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::sync::broadcast::error::RecvError;

use crate::measurement::{IngestCounters, MeasurementSample};
use crate::service::Service;
use crate::snapshot::SnapshotSummary;
use crate::whatif::WhatIfRequest;

pub struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

fn parse_body<T: serde::de::DeserializeOwned>(body: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError(StatusCode::BAD_REQUEST, e.to_string()))
}

fn no_cycle_yet() -> ApiError {
    ApiError(StatusCode::SERVICE_UNAVAILABLE, "no analysis cycle has completed yet".into())
}

fn bytes_response(body: Vec<u8>, format: ReportFormat) -> Response {
    let ctype = match format {
        ReportFormat::Csv => "text/csv",
        ReportFormat::Json => "application/json",
    };
    ([(header::CONTENT_TYPE, ctype)], body).into_response()
}

#[derive(Debug, Deserialize)]
struct FormatQuery {
    format: Option<String>,
}

impl FormatQuery {
    fn format(&self) -> Result<ReportFormat, ApiError> {
        match &self.format {
            None => Ok(ReportFormat::Json),
            Some(f) => f.parse().map_err(|e: String| ApiError(StatusCode::BAD_REQUEST, e)),
        }
    }
}

/// Batch accepted as either a bare array or `{"samples": [...]}`.
#[derive(Deserialize)]
#[serde(untagged)]
enum Batch {
    Bare(Vec<MeasurementSample>),
    Wrapped { samples: Vec<MeasurementSample> },
}

async fn post_measurements(State(svc): State<Arc<Service>>, body: Bytes) -> Result<Response, ApiError> {
    let samples = match parse_body::<Batch>(&body)? {
        Batch::Bare(s) | Batch::Wrapped { samples: s } => s,
    };
    let statuses = svc.ingest(samples);
    Ok(Json(json!({ "statuses": statuses })).into_response())
}

#[derive(Serialize)]
struct SnapshotView {
    /// Sequence the next cycle will use when no cycle has run yet.
    latest_sequence: Option<u64>,
    snapshot: Option<SnapshotSummary>,
    measurements_held: usize,
    counters: IngestCounters,
}

async fn get_snapshot(State(svc): State<Arc<Service>>) -> Json<SnapshotView> {
    let latest = svc.latest();
    Json(SnapshotView {
        latest_sequence: latest.as_ref().map(|p| p.cycle.sequence),
        snapshot: latest.map(|p| p.cycle.snapshot.clone()),
        measurements_held: svc.measurement_count(),
        counters: svc.counters(),
    })
}

async fn get_violations(State(svc): State<Arc<Service>>, Query(q): Query<FormatQuery>) -> Result<Response, ApiError> {
    let fmt = q.format()?;
    let p = svc.latest().ok_or_else(no_cycle_yet)?;
    Ok(bytes_response(write_report(&p.cycle.report, fmt), fmt))
}

async fn get_ranking(State(svc): State<Arc<Service>>, Query(q): Query<FormatQuery>) -> Result<Response, ApiError> {
    let fmt = q.format()?;
    let p = svc.latest().ok_or_else(no_cycle_yet)?;
    Ok(bytes_response(write_ranking(&p.cycle.report.ranking, fmt), fmt))
}

async fn post_whatif(State(svc): State<Arc<Service>>, body: Bytes) -> Result<Response, ApiError> {
    let req: WhatIfRequest = parse_body(&body)?;
    let eval = tokio::task::spawn_blocking(move || svc.whatif(&req))
        .await
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
        .map_err(|e| ApiError(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()))?;
    Ok(Json(eval).into_response())
}

#[derive(Debug, Deserialize)]
struct HistoryQuery {
    from: Option<u64>,
    to: Option<u64>,
}

async fn get_history(State(svc): State<Arc<Service>>, Query(q): Query<HistoryQuery>) -> Result<Response, ApiError> {
    let (from, to) = (q.from.unwrap_or(0), q.to.unwrap_or(u64::MAX));
    if from > to {
        return Err(ApiError(StatusCode::BAD_REQUEST, format!("from {from} is after to {to}")));
    }
    Ok(Json(svc.query_history(from, to)).into_response())
}

async fn get_elements(State(svc): State<Arc<Service>>) -> Json<serde_json::Value> {
    let m = svc.base();
    let s = svc.study();
    Json(json!({
        "buses": m.buses.iter().map(|b| &b.id).collect::<Vec<_>>(),
        "breakers": m.breakers.iter().map(|b| &b.id).collect::<Vec<_>>(),
        "loads": m.loads.iter().map(|l| &l.id).collect::<Vec<_>>(),
        "generators": m.generators.iter().map(|g| &g.id).collect::<Vec<_>>(),
        "contingencies": s.contingencies.iter().map(|c| &c.id).collect::<Vec<_>>(),
        "ras_plans": s.ras_catalog.iter().map(|p| &p.id).collect::<Vec<_>>(),
    }))
}

async fn get_stream(State(svc): State<Arc<Service>>) -> Sse<impl Stream<Item = Result<Event, Infallible>>> {
    let rx = svc.subscribe();
    let stop = svc.stop_signal();
    let events = stream::unfold((rx, stop), |(mut rx, mut stop)| async move {
        loop {
            if *stop.borrow() {
                return None;
            }
            tokio::select! {
                msg = rx.recv() => match msg {
                    Ok(ev) => {
                        let event = Event::default()
                            .event("cycle")
                            .id(ev.sequence.to_string())
                            .json_data(&ev)
                            .expect("cycle event serializes");
                        return Some((Ok(event), (rx, stop)));
                    }
                    Err(RecvError::Lagged(n)) => log::warn!("stream subscriber lagged by {n} events"),
                    Err(RecvError::Closed) => return None,
                },
                _ = stop.changed() => return None,
            }
        }
    });
    Sse::new(events).keep_alive(KeepAlive::default())
}

pub fn router(service: Arc<Service>) -> Router {
    Router::new()
        .route("/api/measurements", post(post_measurements))
        .route("/api/snapshot", get(get_snapshot))
        .route("/api/violations", get(get_violations))
        .route("/api/ranking", get(get_ranking))
        .route("/api/whatif", post(post_whatif))
        .route("/api/history", get(get_history))
        .route("/api/elements", get(get_elements))
        .route("/api/stream", get(get_stream))
        .with_state(service)
}

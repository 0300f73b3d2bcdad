mod common;

use nca_realtime::measurement::{LatestValues, RejectReason};
use nca_realtime::{build_snapshot, Quality, Quantity, SampleStatus};

use common::{fixture, sample};

#[test]
fn valid_sample_is_accepted() {
    let (model, _) = fixture();
    let mut t = LatestValues::default();
    assert_eq!(t.ingest_one(&model, sample("CT-fan-2E", Quantity::PMw, 1.4, 100)), SampleStatus::Accepted);
    assert_eq!(t.get("CT-fan-2E", Quantity::PMw).unwrap().value, 1.4);
    // Buses take voltage samples.
    assert_eq!(t.ingest_one(&model, sample("2E", Quantity::VoltagePct, 99.0, 100)), SampleStatus::Accepted);
}

#[test]
fn bad_samples_are_rejected_with_reason() {
    let (model, _) = fixture();
    let mut t = LatestValues::default();
    let got = t.ingest(
        &model,
        vec![
            sample("nope", Quantity::PMw, 1.0, 1),
            sample("CT-fan-2E", Quantity::PMw, f64::NAN, 1),
            sample("CT-fan-2E", Quantity::QMvar, f64::INFINITY, 1),
            sample("CT-fan-2E", Quantity::PMw, -3.0, 1),
        ],
    );
    assert_eq!(
        got,
        vec![
            SampleStatus::Rejected(RejectReason::UnknownElement),
            SampleStatus::Rejected(RejectReason::NonFinite),
            SampleStatus::Rejected(RejectReason::NonFinite),
            SampleStatus::Rejected(RejectReason::NegativeLoad),
        ]
    );
    assert!(t.is_empty());
    assert_eq!(t.counters.rejected, 4);
    assert_eq!(
        serde_json::to_string(&got[0]).unwrap(),
        r#"{"status":"rejected","reason":"unknown-element"}"#
    );
}

#[test]
fn newest_timestamp_wins() {
    let (model, _) = fixture();
    let mut t = LatestValues::default();
    t.ingest_one(&model, sample("CT-fan-2E", Quantity::PMw, 1.4, 100));
    assert_eq!(t.ingest_one(&model, sample("CT-fan-2E", Quantity::PMw, 9.9, 90)), SampleStatus::Superseded);
    assert_eq!(t.get("CT-fan-2E", Quantity::PMw).unwrap().value, 1.4);
    // Equal timestamps: the later arrival replaces.
    assert_eq!(t.ingest_one(&model, sample("CT-fan-2E", Quantity::PMw, 1.5, 100)), SampleStatus::Accepted);
    assert_eq!(t.get("CT-fan-2E", Quantity::PMw).unwrap().value, 1.5);
}

#[test]
fn empty_table_snapshot_equals_base() {
    let (model, _) = fixture();
    let snap = build_snapshot(&LatestValues::default(), &model, 1, 0);
    assert_eq!(*snap.model, model);
    assert!(snap.measured_loads.is_empty());
}

#[test]
fn measured_load_is_substituted_alone() {
    let (model, _) = fixture();
    let k = model.load_index("CT-fan-2E").unwrap();
    let nominal = model.loads[k].p_mw;
    let mut t = LatestValues::default();
    t.ingest_one(&model, sample("CT-fan-2E", Quantity::PMw, 2.0 * nominal, 5));
    // Voltage samples never alter the model.
    t.ingest_one(&model, sample("2E", Quantity::VoltagePct, 80.0, 5));
    let snap = build_snapshot(&t, &model, 7, 5);
    for (i, (a, b)) in snap.model.loads.iter().zip(&model.loads).enumerate() {
        if i == k {
            assert_eq!(a.p_mw, 2.0 * nominal);
            assert_eq!(a.q_mvar, b.q_mvar);
        } else {
            assert_eq!(a, b);
        }
    }
    assert_eq!(snap.measured_loads, vec!["CT-fan-2E".to_string()]);
    assert_eq!(snap.sequence, 7);
}

#[test]
fn suspect_sample_keeps_nominal_and_is_counted() {
    let (model, _) = fixture();
    let mut t = LatestValues::default();
    let mut s = sample("CT-fan-2E", Quantity::PMw, 50.0, 5);
    s.quality = Quality::Suspect;
    assert_eq!(t.ingest_one(&model, s), SampleStatus::Accepted);
    assert_eq!(t.counters.suspect, 1);
    let snap = build_snapshot(&t, &model, 1, 5);
    assert_eq!(*snap.model, model);
    assert_eq!(snap.suspect_ignored, 1);
}

#[test]
fn sample_json_shape() {
    let s: nca_realtime::MeasurementSample =
        serde_json::from_str(r#"{"element":"CT-fan-2E","quantity":"p_mw","value":1.4,"timestamp_ms":100}"#).unwrap();
    assert_eq!(s.quality, Quality::Good);
    assert_eq!(s.quantity, Quantity::PMw);
}

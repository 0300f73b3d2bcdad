mod support;

use std::process::Command;
use std::time::Duration;

use nca_core::study_io::fixture::{REFERENCE_NETWORK_JSON, REFERENCE_STUDY_JSON};
use serde_json::Value;

use support::{free_port, get, nca, wait_for, Server};

fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn run_fixture_exits_one_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.csv");
    let o = nca().args(["run", "--fixture", "--out"]).arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
    let ranking = String::from_utf8(o.stdout).unwrap();
    assert!(ranking.starts_with("rank,contingency_id,status,severity_index,worst_deviation,violations\n"));
    assert_eq!(ranking.lines().count(), 7);
    let report = std::fs::read_to_string(&out).unwrap();
    assert!(report.starts_with("bus_id,nominal_kv,voltage_pct,class\n"));
    assert!(report.contains("600V Load Center 2W,0.6,"));
}

#[test]
fn empty_study_is_header_only_and_clean() {
    let dir = tempfile::tempdir().unwrap();
    let net = write(&dir, "n.nca-net.json", REFERENCE_NETWORK_JSON);
    let study = write(&dir, "s.nca-study.json", r#"{"contingencies": []}"#);
    let out = dir.path().join("r.csv");
    let o = nca()
        .args(["run", "--network"])
        .arg(&net)
        .arg("--study")
        .arg(&study)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read_to_string(&out).unwrap(), "bus_id,nominal_kv,voltage_pct,class\n");
}

#[test]
fn malformed_network_names_the_element() {
    let dir = tempfile::tempdir().unwrap();
    let broken = REFERENCE_NETWORK_JSON.replacen(r#""nominal_kv": 345,"#, r#""nominal_kv": "high","#, 1);
    assert_ne!(broken, REFERENCE_NETWORK_JSON);
    let net = write(&dir, "n.nca-net.json", &broken);
    let study = write(&dir, "s.nca-study.json", REFERENCE_STUDY_JSON);
    let o = nca().args(["verify", "--network"]).arg(&net).arg("--study").arg(&study).output().unwrap();
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("Grid Equivalent"), "{err}");
    assert!(err.contains("nominal_kv"), "{err}");
}

#[test]
fn missing_file_and_bad_flags_exit_three() {
    let o = nca().args(["run", "--network", "/nonexistent.json", "--study", "/nonexistent.json"]).output().unwrap();
    assert_eq!(o.status.code(), Some(3));
    let o = nca().args(["run"]).output().unwrap();
    assert_eq!(o.status.code(), Some(3));
    let o = nca().args(["run", "--fixture", "--format", "xml"]).output().unwrap();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn verify_summarises_fixture() {
    let o = nca().args(["verify", "--fixture"]).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let s = String::from_utf8(o.stdout).unwrap();
    assert!(s.starts_with("ok: "), "{s}");
    assert!(s.contains("6 contingencies"), "{s}");
}

#[test]
fn occupied_port_exits_three() {
    let held = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let port = held.local_addr().unwrap().port().to_string();
    let o = nca().args(["serve", "--fixture", "--port", &port]).output().unwrap();
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cannot bind"));
}

#[test]
fn history_survives_a_restart() {
    let dir = tempfile::tempdir().unwrap();
    let hist = dir.path().join("history.jsonl");
    let serve = |port: u16| {
        let mut cmd: Command = nca();
        cmd.args(["serve", "--fixture", "--cycle-ms", "200", "--port", &port.to_string(), "--history"])
            .arg(&hist);
        Server::spawn(cmd, port)
    };

    let port = free_port();
    let first = serve(port);
    let seen = wait_for(Duration::from_secs(60), || {
        let (code, body) = get(port, "/api/history")?;
        let n = serde_json::from_slice::<Value>(&body).ok()?.as_array()?.len();
        (code == 200 && n >= 2).then_some(n)
    })
    .expect("history records");
    drop(first);

    let lines = std::fs::read_to_string(&hist).unwrap().lines().count();
    assert!(lines >= seen);

    let port = free_port();
    let _second = serve(port);
    let (_, body) = wait_for(Duration::from_secs(60), || get(port, "/api/history").filter(|(c, _)| *c == 200))
        .expect("server up");
    let records: Vec<Value> = serde_json::from_slice(&body).unwrap();
    assert!(records.len() >= seen.min(lines.saturating_sub(1)));
    let ts: Vec<u64> = records.iter().map(|r| r["timestamp_ms"].as_u64().unwrap()).collect();
    assert!(ts.windows(2).all(|w| w[0] < w[1]));
}

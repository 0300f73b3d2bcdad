#![allow(dead_code)]

use nca_core::network::{BranchKind, BusCategory, BusKind};
use nca_core::study_io::network_file::{BranchSpec, BusSpec, GeneratorSpec, LoadSpec};
use nca_core::study_io::NetworkSpec;
use nca_core::study_io::StudySpec;
use nca_core::{build_network, reference_network, NetworkModel};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn bus(id: &str, kv: f64, kind: BusKind) -> BusSpec {
    BusSpec {
        id: id.into(),
        nominal_kv: kv,
        kind,
        category: BusCategory::Switchgear,
        safety_related: false,
    }
}

pub fn line(id: &str, from: &str, to: &str, r: f64, x: f64) -> BranchSpec {
    BranchSpec {
        id: id.into(),
        from: from.into(),
        to: to.into(),
        r_pu: r,
        x_pu: x,
        g_sh_pu: 0.0,
        b_sh_pu: 0.0,
        tap: 1.0,
        rating_mva: None,
        kind: BranchKind::Line,
    }
}

pub fn load(id: &str, bus: &str, p: f64, q: f64) -> LoadSpec {
    LoadSpec {
        id: id.into(),
        bus: bus.into(),
        p_mw: p,
        q_mvar: q,
        group: None,
        safety_related: false,
    }
}

pub fn gen(id: &str, bus: &str, p: f64, v: f64) -> GeneratorSpec {
    GeneratorSpec {
        id: id.into(),
        bus: bus.into(),
        p_mw: p,
        v_set_pu: v,
        q_limits_mvar: None,
    }
}

/// Slack 1.0∠0, line z = j0.1 pu, pq load `p + jq` in MW/MVAr on 100 MVA.
pub fn two_bus(p_mw: f64, q_mvar: f64) -> NetworkSpec {
    NetworkSpec {
        name: "two-bus".into(),
        base_mva: 100.0,
        buses: vec![bus("B1", 13.8, BusKind::Slack), bus("B2", 13.8, BusKind::Pq)],
        branches: vec![line("L12", "B1", "B2", 0.0, 0.1)],
        transformers: vec![],
        breakers: vec![],
        loads: vec![load("LD2", "B2", p_mw, q_mvar)],
        generators: vec![gen("G1", "B1", 0.0, 1.0)],
    }
}

/// Random radial feeder of `n` buses grown from a slack at `N00`: every new
/// bus hangs off an earlier one. Some buses carry a pv generator.
pub fn random_radial(seed: u64, n: usize) -> NetworkSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let name = |k: usize| format!("N{k:02}");
    let mut buses = vec![bus(&name(0), 13.8, BusKind::Slack)];
    let mut branches = Vec::new();
    let mut loads = Vec::new();
    let mut generators = vec![gen("G00", &name(0), 0.0, rng.random_range(0.98..1.04))];
    for k in 1..n {
        let parent = rng.random_range(0..k);
        let pv = k > 2 && rng.random_bool(0.15);
        buses.push(bus(&name(k), 13.8, if pv { BusKind::Pv } else { BusKind::Pq }));
        let x = rng.random_range(0.01..0.06);
        let r = x * rng.random_range(0.05..0.5);
        let mut br = line(&format!("L{k:02}"), &name(parent), &name(k), r, x);
        br.b_sh_pu = rng.random_range(0.0..0.02);
        branches.push(br);
        if pv {
            generators.push(gen(&format!("G{k:02}"), &name(k), rng.random_range(2.0..15.0), rng.random_range(0.99..1.03)));
        }
        if rng.random_bool(0.8) {
            loads.push(load(
                &format!("D{k:02}"),
                &name(k),
                rng.random_range(0.5..12.0),
                rng.random_range(0.0..5.0),
            ));
        }
    }
    NetworkSpec {
        name: format!("radial-{seed}"),
        base_mva: 100.0,
        buses,
        branches,
        transformers: vec![],
        breakers: vec![],
        loads,
        generators,
    }
}

pub fn fixture() -> (NetworkModel, StudySpec) {
    let (net, study) = reference_network();
    (build_network(&net).expect("fixture builds"), study)
}

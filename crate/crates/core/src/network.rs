//! Per-unit network model of a plant distribution system.
//!
//! A [`NetworkModel`] is built once from a [`NetworkSpec`] and never mutated
//! afterwards; every switching or contingency operation returns a new value.
//! Three-winding transformers are expanded into a star (one internal node
//! plus one leg per winding) at build time, so downstream code only ever
//! sees two-terminal branches.

use std::collections::{BTreeMap, HashMap, HashSet};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::study_io::network_file::{
    BranchSpec, BreakerSpec, BusSpec, GeneratorSpec, LoadSpec, NetworkSpec, TransformerSpec,
};
use crate::units::{self, UnitsError};

#[derive(Debug, Error, PartialEq)]
pub enum NetworkError {
    #[error("{element} '{id}' references unknown bus '{bus}'")]
    DanglingBus {
        element: &'static str,
        id: String,
        bus: String,
    },
    #[error("duplicate {element} id '{id}'")]
    DuplicateId { element: &'static str, id: String },
    #[error("bus '{0}' has nonpositive nominal_kv")]
    NonPositiveKv(String),
    #[error("{element} '{id}' joins buses at {from_kv} kV and {to_kv} kV without being a transformer")]
    VoltageLevelMismatch {
        element: &'static str,
        id: String,
        from_kv: f64,
        to_kv: f64,
    },
    #[error("branch '{0}' has zero series impedance")]
    ZeroImpedance(String),
    #[error("branch '{0}' has nonpositive tap ratio")]
    NonPositiveTap(String),
    #[error("transformer '{id}': {reason}")]
    BadTransformer { id: String, reason: String },
    #[error("load '{0}' has negative p_mw")]
    NegativeLoad(String),
    #[error("generator '{gen}' sits on pq bus '{bus}'")]
    GeneratorOnPqBus { gen: String, bus: String },
    #[error("unknown breaker '{0}'")]
    UnknownBreaker(String),
    #[error(transparent)]
    Units(#[from] UnitsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BusKind {
    Slack,
    Pv,
    Pq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BusCategory {
    Switchyard,
    Switchgear,
    LoadCenter,
    Mcc,
    InternalNode,
}

impl BusCategory {
    /// Internal nodes (transformer terminals, star points, motor terminals)
    /// are solved but left out of violation reports.
    pub fn is_monitored(self) -> bool {
        !matches!(self, BusCategory::InternalNode)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Winding {
    H,
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchKind {
    Line,
    Cable,
    TransformerLeg,
    SourceThevenin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BreakerState {
    Open,
    Closed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bus {
    pub id: String,
    pub nominal_kv: f64,
    pub kind: BusKind,
    pub category: BusCategory,
    pub safety_related: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub id: String,
    pub from: usize,
    pub to: usize,
    /// Series impedance, per unit on the system base.
    pub series_impedance: Complex64,
    /// Total shunt admittance, half stamped at each end.
    pub shunt_admittance: Complex64,
    pub tap_ratio: f64,
    pub rating_mva: Option<f64>,
    pub kind: BranchKind,
    /// Set for legs produced by transformer expansion.
    pub winding: Option<(String, Winding)>,
}

impl Branch {
    /// A source-thevenin branch whose impedance has been driven to zero acts
    /// as an ideal connection and is merged like a closed breaker.
    pub fn is_ideal_merge(&self) -> bool {
        self.kind == BranchKind::SourceThevenin && self.series_impedance.norm() == 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformerWinding {
    pub winding: Winding,
    pub bus: usize,
    pub rated_kv: f64,
    pub tap: f64,
}

/// Pre-expansion transformer record, kept for reporting and contingency lookup.
#[derive(Debug, Clone, PartialEq)]
pub struct Transformer {
    pub id: String,
    pub mva_base: f64,
    pub windings: Vec<TransformerWinding>,
    /// Pairwise impedances on the system base, keyed by winding pair.
    pub pair_impedance: BTreeMap<(Winding, Winding), Complex64>,
    /// Internal star bus for three-winding units.
    pub star_bus: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Breaker {
    pub id: String,
    pub from: usize,
    pub to: usize,
    pub normal_state: BreakerState,
    pub current_state: BreakerState,
}

impl Breaker {
    pub fn is_closed(&self) -> bool {
        self.current_state == BreakerState::Closed
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Load {
    pub id: String,
    pub bus: usize,
    pub p_mw: f64,
    pub q_mvar: f64,
    pub group: Option<String>,
    pub safety_related: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub id: String,
    pub bus: usize,
    pub p_set_mw: f64,
    pub v_set_pu: f64,
    pub q_limits_mvar: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkModel {
    pub name: String,
    pub s_base_mva: f64,
    pub buses: Vec<Bus>,
    pub branches: Vec<Branch>,
    pub transformers: Vec<Transformer>,
    pub breakers: Vec<Breaker>,
    pub loads: Vec<Load>,
    pub generators: Vec<Generator>,
    bus_index: HashMap<String, usize>,
    warnings: Vec<String>,
}

/// A single breaker operation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", content = "breaker", rename_all = "kebab-case")]
pub enum SwitchAction {
    Open(String),
    Close(String),
}

impl NetworkModel {
    pub fn bus_index(&self, id: &str) -> Option<usize> {
        self.bus_index.get(id).copied()
    }

    pub fn bus(&self, id: &str) -> Option<&Bus> {
        self.bus_index(id).map(|i| &self.buses[i])
    }

    pub fn breaker_index(&self, id: &str) -> Option<usize> {
        self.breakers.iter().position(|b| b.id == id)
    }

    pub fn branch_index(&self, id: &str) -> Option<usize> {
        self.branches.iter().position(|b| b.id == id)
    }

    pub fn load_index(&self, id: &str) -> Option<usize> {
        self.loads.iter().position(|l| l.id == id)
    }

    pub fn generator_index(&self, id: &str) -> Option<usize> {
        self.generators.iter().position(|g| g.id == id)
    }

    pub fn transformer(&self, id: &str) -> Option<&Transformer> {
        self.transformers.iter().find(|t| t.id == id)
    }

    /// Validation warnings collected while building (e.g. negative star legs).
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn has_load_group(&self, group: &str) -> bool {
        self.loads.iter().any(|l| l.group.as_deref() == Some(group))
    }

    /// Returns a copy with `actions` applied in order. Only breaker states change.
    pub fn apply_switching(&self, actions: &[SwitchAction]) -> Result<NetworkModel, NetworkError> {
        let mut next = self.clone();
        for action in actions {
            let (id, state) = match action {
                SwitchAction::Open(id) => (id, BreakerState::Open),
                SwitchAction::Close(id) => (id, BreakerState::Closed),
            };
            let idx = next
                .breaker_index(id)
                .ok_or_else(|| NetworkError::UnknownBreaker(id.clone()))?;
            next.breakers[idx].current_state = state;
        }
        Ok(next)
    }
}

fn check_unique<'a>(
    element: &'static str,
    ids: impl Iterator<Item = &'a str>,
) -> Result<(), NetworkError> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(NetworkError::DuplicateId {
                element,
                id: id.to_string(),
            });
        }
    }
    Ok(())
}

struct Resolver<'a> {
    index: &'a HashMap<String, usize>,
}

impl Resolver<'_> {
    fn bus(&self, element: &'static str, id: &str, bus: &str) -> Result<usize, NetworkError> {
        self.index
            .get(bus)
            .copied()
            .ok_or_else(|| NetworkError::DanglingBus {
                element,
                id: id.to_string(),
                bus: bus.to_string(),
            })
    }
}

/// Validates `spec` and produces a per-unit model on the system base.
pub fn build_network(spec: &NetworkSpec) -> Result<NetworkModel, NetworkError> {
    let s_base = spec.base_mva;
    if !(s_base > 0.0) {
        return Err(UnitsError::NonPositiveBase(s_base).into());
    }
    check_unique("bus", spec.buses.iter().map(|b| b.id.as_str()))?;
    check_unique(
        "branch",
        spec.branches
            .iter()
            .map(|b| b.id.as_str())
            .chain(spec.transformers.iter().map(|t| t.id.as_str())),
    )?;
    check_unique("breaker", spec.breakers.iter().map(|b| b.id.as_str()))?;
    check_unique("load", spec.loads.iter().map(|l| l.id.as_str()))?;
    check_unique("generator", spec.generators.iter().map(|g| g.id.as_str()))?;

    let mut buses: Vec<Bus> = spec.buses.iter().map(bus_from_spec).collect::<Result<_, _>>()?;
    let mut index: HashMap<String, usize> = buses
        .iter()
        .enumerate()
        .map(|(i, b)| (b.id.clone(), i))
        .collect();

    let mut warnings = Vec::new();
    let mut branches = Vec::new();
    {
        let resolve = Resolver { index: &index };
        for br in &spec.branches {
            branches.push(branch_from_spec(br, &resolve, &buses)?);
        }
    }

    let mut transformers = Vec::new();
    for t in &spec.transformers {
        let (xfmr, legs, star) = expand_transformer(t, &index, &buses, s_base, &mut warnings)?;
        let mut xfmr = xfmr;
        if let Some(star) = star {
            let idx = buses.len();
            index.insert(star.id.clone(), idx);
            buses.push(star);
            xfmr.star_bus = Some(idx);
        }
        let star_idx = xfmr.star_bus;
        for leg in legs {
            let (from, to) = match star_idx {
                Some(s) => (leg.from, s),
                None => (leg.from, leg.to),
            };
            branches.push(Branch { from, to, ..leg });
        }
        transformers.push(xfmr);
    }

    let resolve = Resolver { index: &index };
    let breakers = spec
        .breakers
        .iter()
        .map(|b| breaker_from_spec(b, &resolve, &buses))
        .collect::<Result<Vec<_>, _>>()?;
    let loads = spec
        .loads
        .iter()
        .map(|l| load_from_spec(l, &resolve))
        .collect::<Result<Vec<_>, _>>()?;
    let generators = spec
        .generators
        .iter()
        .map(|g| generator_from_spec(g, &resolve, &buses))
        .collect::<Result<Vec<_>, _>>()?;

    Ok(NetworkModel {
        name: spec.name.clone(),
        s_base_mva: s_base,
        buses,
        branches,
        transformers,
        breakers,
        loads,
        generators,
        bus_index: index,
        warnings,
    })
}

fn bus_from_spec(b: &BusSpec) -> Result<Bus, NetworkError> {
    if !(b.nominal_kv > 0.0) {
        return Err(NetworkError::NonPositiveKv(b.id.clone()));
    }
    Ok(Bus {
        id: b.id.clone(),
        nominal_kv: b.nominal_kv,
        kind: b.kind,
        category: b.category,
        safety_related: b.safety_related,
    })
}

fn branch_from_spec(br: &BranchSpec, resolve: &Resolver, buses: &[Bus]) -> Result<Branch, NetworkError> {
    let from = resolve.bus("branch", &br.id, &br.from)?;
    let to = resolve.bus("branch", &br.id, &br.to)?;
    let z = Complex64::new(br.r_pu, br.x_pu);
    if z.norm() == 0.0 && br.kind != BranchKind::SourceThevenin {
        return Err(NetworkError::ZeroImpedance(br.id.clone()));
    }
    if !(br.tap > 0.0) {
        return Err(NetworkError::NonPositiveTap(br.id.clone()));
    }
    let (fkv, tkv) = (buses[from].nominal_kv, buses[to].nominal_kv);
    if br.kind != BranchKind::TransformerLeg && fkv != tkv {
        return Err(NetworkError::VoltageLevelMismatch {
            element: "branch",
            id: br.id.clone(),
            from_kv: fkv,
            to_kv: tkv,
        });
    }
    Ok(Branch {
        id: br.id.clone(),
        from,
        to,
        series_impedance: z,
        shunt_admittance: Complex64::new(br.g_sh_pu, br.b_sh_pu),
        tap_ratio: br.tap,
        rating_mva: br.rating_mva,
        kind: br.kind,
        winding: None,
    })
}

fn breaker_from_spec(b: &BreakerSpec, resolve: &Resolver, buses: &[Bus]) -> Result<Breaker, NetworkError> {
    let from = resolve.bus("breaker", &b.id, &b.from)?;
    let to = resolve.bus("breaker", &b.id, &b.to)?;
    if buses[from].nominal_kv != buses[to].nominal_kv {
        return Err(NetworkError::VoltageLevelMismatch {
            element: "breaker",
            id: b.id.clone(),
            from_kv: buses[from].nominal_kv,
            to_kv: buses[to].nominal_kv,
        });
    }
    Ok(Breaker {
        id: b.id.clone(),
        from,
        to,
        normal_state: b.normal_state,
        current_state: b.current_state.unwrap_or(b.normal_state),
    })
}

fn load_from_spec(l: &LoadSpec, resolve: &Resolver) -> Result<Load, NetworkError> {
    if l.p_mw < 0.0 {
        return Err(NetworkError::NegativeLoad(l.id.clone()));
    }
    Ok(Load {
        id: l.id.clone(),
        bus: resolve.bus("load", &l.id, &l.bus)?,
        p_mw: l.p_mw,
        q_mvar: l.q_mvar,
        group: l.group.clone(),
        safety_related: l.safety_related,
    })
}

fn generator_from_spec(g: &GeneratorSpec, resolve: &Resolver, buses: &[Bus]) -> Result<Generator, NetworkError> {
    let bus = resolve.bus("generator", &g.id, &g.bus)?;
    if buses[bus].kind == BusKind::Pq {
        return Err(NetworkError::GeneratorOnPqBus {
            gen: g.id.clone(),
            bus: g.bus.clone(),
        });
    }
    Ok(Generator {
        id: g.id.clone(),
        bus,
        p_set_mw: g.p_mw,
        v_set_pu: g.v_set_pu,
        q_limits_mvar: g.q_limits_mvar.map(|[lo, hi]| (lo, hi)),
    })
}

/// Branch id for an expanded transformer leg.
pub fn leg_branch_id(transformer: &str, winding: Winding, two_winding: bool) -> String {
    if two_winding {
        transformer.to_string()
    } else {
        format!("{transformer}/{winding:?}")
    }
}

type Expansion = (Transformer, Vec<Branch>, Option<Bus>);

fn expand_transformer(
    t: &TransformerSpec,
    index: &HashMap<String, usize>,
    buses: &[Bus],
    s_base: f64,
    warnings: &mut Vec<String>,
) -> Result<Expansion, NetworkError> {
    let bad = |reason: &str| NetworkError::BadTransformer {
        id: t.id.clone(),
        reason: reason.to_string(),
    };
    let resolve = Resolver { index };
    let mut windings = Vec::new();
    for w in &t.windings {
        if !(w.tap > 0.0) {
            return Err(NetworkError::NonPositiveTap(t.id.clone()));
        }
        windings.push(TransformerWinding {
            winding: w.winding,
            bus: resolve.bus("transformer", &t.id, &w.bus)?,
            rated_kv: w.rated_kv,
            tap: w.tap,
        });
    }
    let order: Vec<Winding> = windings.iter().map(|w| w.winding).collect();
    let h = windings
        .iter()
        .find(|w| w.winding == Winding::H)
        .ok_or_else(|| bad("missing H winding"))?;
    let h_bus_kv = buses[h.bus].nominal_kv;
    let to_sys = |pct: Option<&crate::study_io::network_file::ImpedancePct>, name: &str| {
        let pct = pct.ok_or_else(|| bad(&format!("missing {name} impedance")))?;
        units::impedance_to_system_base(
            Complex64::new(pct.r_pct, pct.x_pct),
            t.mva_base,
            h.rated_kv,
            s_base,
            h_bus_kv,
        )
        .map_err(NetworkError::from)
    };

    let mut pair_impedance = BTreeMap::new();
    match order.as_slice() {
        [Winding::H, Winding::X] => {
            let z_hx = to_sys(Some(&t.hx), "hx")?;
            if z_hx.norm() == 0.0 {
                return Err(NetworkError::ZeroImpedance(t.id.clone()));
            }
            pair_impedance.insert((Winding::H, Winding::X), z_hx);
            let x = &windings[1];
            let leg = Branch {
                id: leg_branch_id(&t.id, Winding::X, true),
                from: h.bus,
                to: x.bus,
                series_impedance: z_hx,
                shunt_admittance: Complex64::new(0.0, 0.0),
                tap_ratio: h.tap / x.tap,
                rating_mva: Some(t.mva_base),
                kind: BranchKind::TransformerLeg,
                winding: Some((t.id.clone(), Winding::X)),
            };
            let xfmr = Transformer {
                id: t.id.clone(),
                mva_base: t.mva_base,
                windings,
                pair_impedance,
                star_bus: None,
            };
            Ok((xfmr, vec![leg], None))
        }
        [Winding::H, Winding::X, Winding::Y] => {
            let z_hx = to_sys(Some(&t.hx), "hx")?;
            let z_hy = to_sys(t.hy.as_ref(), "hy")?;
            let z_xy = to_sys(t.xy.as_ref(), "xy")?;
            pair_impedance.insert((Winding::H, Winding::X), z_hx);
            pair_impedance.insert((Winding::H, Winding::Y), z_hy);
            pair_impedance.insert((Winding::X, Winding::Y), z_xy);
            let legs_z = star_legs(z_hx, z_hy, z_xy);
            let star = Bus {
                id: format!("{}/star", t.id),
                nominal_kv: h_bus_kv,
                kind: BusKind::Pq,
                category: BusCategory::InternalNode,
                safety_related: false,
            };
            let mut legs = Vec::new();
            for (w, z) in windings.iter().zip(legs_z) {
                if z.re < 0.0 || z.im < 0.0 {
                    warnings.push(format!(
                        "transformer '{}' leg {:?} has negative star impedance {z}",
                        t.id, w.winding
                    ));
                }
                if z.norm() == 0.0 {
                    return Err(NetworkError::ZeroImpedance(format!("{}/{:?}", t.id, w.winding)));
                }
                legs.push(Branch {
                    id: leg_branch_id(&t.id, w.winding, false),
                    from: w.bus,
                    // Rewired to the star bus by the caller.
                    to: usize::MAX,
                    series_impedance: z,
                    shunt_admittance: Complex64::new(0.0, 0.0),
                    tap_ratio: w.tap,
                    rating_mva: Some(t.mva_base),
                    kind: BranchKind::TransformerLeg,
                    winding: Some((t.id.clone(), w.winding)),
                });
            }
            let xfmr = Transformer {
                id: t.id.clone(),
                mva_base: t.mva_base,
                windings,
                pair_impedance,
                star_bus: None,
            };
            Ok((xfmr, legs, Some(star)))
        }
        _ => Err(bad("windings must be listed as [H, X] or [H, X, Y]")),
    }
}

/// Star-equivalent leg impedances `[Z_H, Z_X, Z_Y]` from pairwise values.
pub fn star_legs(z_hx: Complex64, z_hy: Complex64, z_xy: Complex64) -> [Complex64; 3] {
    [
        0.5 * (z_hx + z_hy - z_xy),
        0.5 * (z_hx + z_xy - z_hy),
        0.5 * (z_hy + z_xy - z_hx),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::study_io::network_file::parse_network_file;

    fn two_bus() -> &'static str {
        r#"{
          "base_mva": 100,
          "buses": [
            {"id": "A", "nominal_kv": 4.16, "kind": "slack", "category": "switchgear"},
            {"id": "B", "nominal_kv": 4.16, "kind": "pq", "category": "load-center"}
          ],
          "branches": [{"id": "L1", "from": "A", "to": "B", "r_pu": 0.0, "x_pu": 0.1, "kind": "line"}]
        }"#
    }

    fn sat_doc() -> &'static str {
        r#"{
          "base_mva": 100,
          "buses": [
            {"id": "HV", "nominal_kv": 22, "kind": "slack", "category": "switchyard"},
            {"id": "XB", "nominal_kv": 4.16, "kind": "pq", "category": "switchgear"},
            {"id": "YB", "nominal_kv": 4.16, "kind": "pq", "category": "switchgear"}
          ],
          "transformers": [{
            "id": "SAT",
            "mva_base": 50,
            "windings": [
              {"winding": "H", "bus": "HV", "rated_kv": 22},
              {"winding": "X", "bus": "XB", "rated_kv": 4.16},
              {"winding": "Y", "bus": "YB", "rated_kv": 4.16}
            ],
            "hx": {"r_pct": 0.4, "x_pct": 8.0},
            "hy": {"r_pct": 0.5, "x_pct": 9.0},
            "xy": {"r_pct": 0.8, "x_pct": 16.0}
          }]
        }"#
    }

    #[test]
    fn minimal_two_bus() {
        let spec = parse_network_file(two_bus().as_bytes()).unwrap();
        let model = build_network(&spec).unwrap();
        assert_eq!(model.buses.len(), 2);
        assert_eq!(model.branches.len(), 1);
        assert!(model.buses.iter().all(|b| b.category != BusCategory::InternalNode));
    }

    #[test]
    fn three_winding_expands_to_star() {
        let spec = parse_network_file(sat_doc().as_bytes()).unwrap();
        let model = build_network(&spec).unwrap();
        assert_eq!(model.buses.len(), 4);
        let star = model.bus("SAT/star").unwrap();
        assert_eq!(star.category, BusCategory::InternalNode);
        let legs: Vec<_> = model
            .branches
            .iter()
            .filter(|b| b.kind == BranchKind::TransformerLeg)
            .collect();
        assert_eq!(legs.len(), 3);
        let s = model.bus_index("SAT/star").unwrap();
        assert!(legs.iter().all(|l| l.to == s));
    }

    #[test]
    fn star_conserves_pairwise_impedance() {
        let spec = parse_network_file(sat_doc().as_bytes()).unwrap();
        let model = build_network(&spec).unwrap();
        let t = model.transformer("SAT").unwrap();
        let leg = |w| {
            model
                .branches
                .iter()
                .find(|b| b.winding == Some(("SAT".into(), w)))
                .unwrap()
                .series_impedance
        };
        for (a, b) in [(Winding::H, Winding::X), (Winding::H, Winding::Y), (Winding::X, Winding::Y)] {
            let diff = leg(a) + leg(b) - t.pair_impedance[&(a, b)];
            assert!(diff.norm() < 1e-12, "{a:?}{b:?}: {diff}");
        }
        // 8% on 50 MVA -> 0.16 pu on 100 MVA
        assert!((t.pair_impedance[&(Winding::H, Winding::X)].im - 0.16).abs() < 1e-12);
    }

    #[test]
    fn dangling_reference_names_bus() {
        let doc = two_bus().replace(r#""to": "B""#, r#""to": "2Z""#);
        let spec = parse_network_file(doc.as_bytes()).unwrap();
        let err = build_network(&spec).unwrap_err();
        assert!(err.to_string().contains("2Z"), "{err}");
        assert!(matches!(err, NetworkError::DanglingBus { .. }));
    }

    #[test]
    fn duplicate_bus_rejected() {
        let doc = two_bus().replace(r#""id": "B""#, r#""id": "A""#);
        let spec = parse_network_file(doc.as_bytes()).unwrap();
        assert!(matches!(
            build_network(&spec),
            Err(NetworkError::DuplicateId { element: "bus", .. })
        ));
    }

    #[test]
    fn nonpositive_kv_rejected() {
        let doc = two_bus().replace(r#""nominal_kv": 4.16, "kind": "pq""#, r#""nominal_kv": 0, "kind": "pq""#);
        let spec = parse_network_file(doc.as_bytes()).unwrap();
        assert_eq!(build_network(&spec), Err(NetworkError::NonPositiveKv("B".into())));
    }

    #[test]
    fn line_across_voltage_levels_rejected() {
        let doc = two_bus().replace(r#""nominal_kv": 4.16, "kind": "pq""#, r#""nominal_kv": 0.6, "kind": "pq""#);
        let spec = parse_network_file(doc.as_bytes()).unwrap();
        assert!(matches!(
            build_network(&spec),
            Err(NetworkError::VoltageLevelMismatch { .. })
        ));
    }

    #[test]
    fn negative_star_leg_is_warning_only() {
        let doc = sat_doc().replace(r#""x_pct": 8.0"#, r#""x_pct": 2.0"#);
        let spec = parse_network_file(doc.as_bytes()).unwrap();
        let model = build_network(&spec).unwrap();
        assert!(!model.warnings().is_empty());
    }

    #[test]
    fn build_is_deterministic() {
        let spec = parse_network_file(sat_doc().as_bytes()).unwrap();
        assert_eq!(build_network(&spec).unwrap(), build_network(&spec).unwrap());
    }
}

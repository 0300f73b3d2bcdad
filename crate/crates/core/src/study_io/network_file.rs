//! `.nca-net.json` network documents.

use serde::{Deserialize, Serialize};

use super::{parse_document, ParseError};
use crate::network::{BranchKind, BreakerState, BusCategory, BusKind, Winding};

fn default_base_mva() -> f64 {
    100.0
}

fn default_tap() -> f64 {
    1.0
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    #[serde(default)]
    pub name: String,
    #[serde(default = "default_base_mva")]
    pub base_mva: f64,
    pub buses: Vec<BusSpec>,
    #[serde(default)]
    pub branches: Vec<BranchSpec>,
    #[serde(default)]
    pub transformers: Vec<TransformerSpec>,
    #[serde(default)]
    pub breakers: Vec<BreakerSpec>,
    #[serde(default)]
    pub loads: Vec<LoadSpec>,
    #[serde(default)]
    pub generators: Vec<GeneratorSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BusSpec {
    pub id: String,
    pub nominal_kv: f64,
    pub kind: BusKind,
    pub category: BusCategory,
    #[serde(default)]
    pub safety_related: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchSpec {
    pub id: String,
    pub from: String,
    pub to: String,
    pub r_pu: f64,
    pub x_pu: f64,
    #[serde(default)]
    pub g_sh_pu: f64,
    #[serde(default)]
    pub b_sh_pu: f64,
    #[serde(default = "default_tap")]
    pub tap: f64,
    /// Absent means unlimited.
    #[serde(default)]
    pub rating_mva: Option<f64>,
    pub kind: BranchKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImpedancePct {
    pub r_pct: f64,
    pub x_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindingSpec {
    pub winding: Winding,
    pub bus: String,
    pub rated_kv: f64,
    #[serde(default = "default_tap")]
    pub tap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformerSpec {
    pub id: String,
    pub mva_base: f64,
    pub windings: Vec<WindingSpec>,
    pub hx: ImpedancePct,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hy: Option<ImpedancePct>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xy: Option<ImpedancePct>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BreakerSpec {
    pub id: String,
    pub from: String,
    pub to: String,
    pub normal_state: BreakerState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub current_state: Option<BreakerState>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadSpec {
    pub id: String,
    pub bus: String,
    pub p_mw: f64,
    pub q_mvar: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub safety_related: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub id: String,
    pub bus: String,
    pub p_mw: f64,
    pub v_set_pu: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_limits_mvar: Option<[f64; 2]>,
}

pub fn parse_network_file(bytes: &[u8]) -> Result<NetworkSpec, ParseError> {
    parse_document(bytes)
}

pub fn serialize_network(spec: &NetworkSpec) -> String {
    serde_json::to_string_pretty(spec).expect("network spec is always serializable")
}

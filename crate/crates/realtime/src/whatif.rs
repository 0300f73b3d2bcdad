//! Operator what-if evaluation on a copy of a snapshot.

use nca_core::contingency::{Contingency, ContingencyError};
use nca_core::network::Load;
use nca_core::ras::{evaluate_ras, PlanTarget, RasAction, RasError, RasEvaluation, RasPlan};
use nca_core::study_io::StudySpec;
use nca_core::NetworkModel;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WhatIfError {
    #[error("unknown contingency '{0}'")]
    UnknownContingency(String),
    #[error("unknown plan '{0}'")]
    UnknownPlan(String),
    #[error("unknown bus '{0}' in load_delta")]
    UnknownBus(String),
    #[error("load_delta at bus '{0}' is not finite")]
    NonFinite(String),
    #[error("load_delta leaves bus '{bus}' with negative load ({p_mw} MW)")]
    NegativeLoad { bus: String, p_mw: f64 },
    #[error(transparent)]
    Contingency(#[from] ContingencyError),
    #[error(transparent)]
    Ras(#[from] RasError),
}

/// A study contingency by id, or a full inline definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ContingencyRef {
    Id(String),
    Inline(Contingency),
}

/// A catalog plan by id, a full inline plan, or just an action list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PlanRef {
    Id(String),
    Inline(RasPlan),
    Actions { actions: Vec<RasAction> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadDelta {
    pub bus: String,
    #[serde(default)]
    pub dp_mw: f64,
    #[serde(default)]
    pub dq_mvar: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WhatIfRequest {
    #[serde(default)]
    pub contingency: Option<ContingencyRef>,
    #[serde(default)]
    pub ras_plan: Option<PlanRef>,
    #[serde(default)]
    pub load_delta: Vec<LoadDelta>,
}

fn null_plan() -> RasPlan {
    RasPlan {
        id: "none".into(),
        target: PlanTarget::Kinds { kinds: Vec::new() },
        description: "no action".into(),
        actions: Vec::new(),
        null_plan: true,
    }
}

/// Adds each delta as an extra constant-power load at its bus.
pub fn apply_load_delta(model: &NetworkModel, deltas: &[LoadDelta]) -> Result<NetworkModel, WhatIfError> {
    let mut next = model.clone();
    for (k, d) in deltas.iter().enumerate() {
        let bus = model.bus_index(&d.bus).ok_or_else(|| WhatIfError::UnknownBus(d.bus.clone()))?;
        if !(d.dp_mw.is_finite() && d.dq_mvar.is_finite()) {
            return Err(WhatIfError::NonFinite(d.bus.clone()));
        }
        next.loads.push(Load {
            id: format!("whatif-{k}@{}", d.bus),
            bus,
            p_mw: d.dp_mw,
            q_mvar: d.dq_mvar,
            group: None,
            safety_related: false,
        });
    }
    for d in deltas {
        let bus = model.bus_index(&d.bus).expect("checked above");
        let p: f64 = next.loads.iter().filter(|l| l.bus == bus).map(|l| l.p_mw).sum();
        if p < 0.0 {
            return Err(WhatIfError::NegativeLoad {
                bus: d.bus.clone(),
                p_mw: p,
            });
        }
    }
    Ok(next)
}

/// Evaluates `req` against `model` (normally the latest snapshot). Nothing
/// outside the returned value is touched.
pub fn whatif(model: &NetworkModel, study: &StudySpec, req: &WhatIfRequest) -> Result<RasEvaluation, WhatIfError> {
    let base = apply_load_delta(model, &req.load_delta)?;
    let contingency = match &req.contingency {
        None => None,
        Some(ContingencyRef::Id(id)) => Some(
            study
                .contingency(id)
                .cloned()
                .ok_or_else(|| WhatIfError::UnknownContingency(id.clone()))?,
        ),
        Some(ContingencyRef::Inline(c)) => Some(c.clone()),
    };
    let plan = match &req.ras_plan {
        None => null_plan(),
        Some(PlanRef::Id(id)) => study
            .ras_catalog
            .iter()
            .find(|p| p.id == *id)
            .cloned()
            .ok_or_else(|| WhatIfError::UnknownPlan(id.clone()))?,
        Some(PlanRef::Inline(p)) => p.clone(),
        Some(PlanRef::Actions { actions }) => RasPlan {
            id: "operator".into(),
            actions: actions.clone(),
            null_plan: actions.is_empty(),
            ..null_plan()
        },
    };
    Ok(evaluate_ras(&base, contingency.as_ref(), &plan, &study.solver, &study.limits)?)
}

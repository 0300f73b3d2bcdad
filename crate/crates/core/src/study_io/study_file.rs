//! `.nca-study.json` study documents: contingency list, remedial action
//! catalog, voltage limits and solver settings.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{parse_document, ParseError};
use crate::contingency::{apply_contingency, Contingency, VoltageLimits};
use crate::network::NetworkModel;
use crate::powerflow::SolverSettings;
use crate::ras::{apply_plan, PlanTarget, RasPlan};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySpec {
    #[serde(default)]
    pub name: String,
    pub contingencies: Vec<Contingency>,
    #[serde(default)]
    pub ras_catalog: Vec<RasPlan>,
    #[serde(default)]
    pub limits: VoltageLimits,
    #[serde(default)]
    pub solver: SolverSettings,
}

impl StudySpec {
    pub fn contingency(&self, id: &str) -> Option<&Contingency> {
        self.contingencies.iter().find(|c| c.id == id)
    }

    pub fn plans_for<'a>(&'a self, c: &'a Contingency) -> impl Iterator<Item = &'a RasPlan> + 'a {
        self.ras_catalog.iter().filter(move |p| p.applies_to(c))
    }

    /// Checks every contingency and plan against the elements of `model`.
    pub fn validate_against(&self, model: &NetworkModel) -> Result<(), ParseError> {
        for c in &self.contingencies {
            apply_contingency(model, c)
                .map_err(|e| ParseError::Reference(format!("contingency '{}': {e}", c.id)))?;
        }
        for p in &self.ras_catalog {
            apply_plan(model, p).map_err(|e| ParseError::Reference(e.to_string()))?;
        }
        Ok(())
    }
}

fn check_internal(spec: &StudySpec) -> Result<(), ParseError> {
    let mut ids = HashSet::new();
    for c in &spec.contingencies {
        if !ids.insert(c.id.as_str()) {
            return Err(ParseError::Reference(format!("duplicate contingency id '{}'", c.id)));
        }
    }
    let mut plans = HashSet::new();
    for p in &spec.ras_catalog {
        if !plans.insert(p.id.as_str()) {
            return Err(ParseError::Reference(format!("duplicate plan id '{}'", p.id)));
        }
        if let PlanTarget::Contingency(cid) = &p.target {
            if !ids.contains(cid.as_str()) {
                return Err(ParseError::Reference(format!(
                    "plan '{}' targets unknown contingency '{cid}'",
                    p.id
                )));
            }
        }
        if p.actions.is_empty() && !p.null_plan {
            return Err(ParseError::Reference(format!("plan '{}' has no actions", p.id)));
        }
    }
    spec.limits
        .validate()
        .map_err(|e| ParseError::Reference(e.to_string()))
}

pub fn parse_study_file(bytes: &[u8]) -> Result<StudySpec, ParseError> {
    let spec: StudySpec = parse_document(bytes)?;
    check_internal(&spec)?;
    Ok(spec)
}

pub fn serialize_study(spec: &StudySpec) -> String {
    serde_json::to_string_pretty(spec).expect("study spec is always serializable")
}

//! Full study run: base case, contingency sweep, ranking and remedial plans.

use thiserror::Error;

use crate::contingency::{rank_contingencies, run_base_case, run_sweep, ContingencyError};
use crate::network::{build_network, NetworkError, NetworkModel};
use crate::ras::{suggest_ras, RasError};
use crate::study_io::{NetworkSpec, ParseError, StudyReport, StudySpec};

#[derive(Debug, Error)]
pub enum StudyError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Contingency(#[from] ContingencyError),
    #[error(transparent)]
    Ras(#[from] RasError),
}

/// Builds the model and checks the study against it.
pub fn prepare(network: &NetworkSpec, study: &StudySpec) -> Result<NetworkModel, StudyError> {
    let model = build_network(network)?;
    for w in model.warnings() {
        log::warn!("{w}");
    }
    study.validate_against(&model)?;
    Ok(model)
}

/// Runs `study` against `model`. `workers` bounds sweep parallelism; the
/// result does not depend on it.
pub fn run_study(model: &NetworkModel, study: &StudySpec, workers: Option<usize>) -> Result<StudyReport, StudyError> {
    let settings = &study.solver;
    let limits = &study.limits;
    let base = run_base_case(model, settings, limits);
    let results = run_sweep(model, &study.contingencies, settings, limits, workers)?;
    let ranking = rank_contingencies(&results);
    let mut remedial = Vec::new();
    for c in &study.contingencies {
        remedial.extend(suggest_ras(model, c, &study.ras_catalog, settings, limits)?);
    }
    Ok(StudyReport {
        limits: *limits,
        base,
        results,
        ranking,
        remedial,
    })
}

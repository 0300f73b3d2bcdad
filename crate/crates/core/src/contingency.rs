//! N-1 contingency application, voltage violation screening and severity
//! ranking.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{BranchKind, BreakerState, NetworkModel, Winding};
use crate::powerflow::{solve_network, Method, NetworkSolution, SolverSettings};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContingencyError {
    #[error("unknown {element} '{id}'")]
    UnknownElement { element: &'static str, id: String },
    #[error("branch '{0}' is not a source-thevenin branch")]
    NotSourceBranch(String),
    #[error("transformer '{transformer}' has no {winding:?} winding")]
    NoSuchWinding { transformer: String, winding: Winding },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

fn unknown(element: &'static str, id: &str) -> ContingencyError {
    ContingencyError::UnknownElement {
        element,
        id: id.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Contingency {
    pub id: String,
    #[serde(default)]
    pub description: String,
    pub kind: ContingencyKind,
}

fn default_floor() -> f64 {
    0.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ContingencyKind {
    /// Removes one winding leg of a transformer.
    TransformerWindingOutage { transformer: String, winding: Winding },
    /// Scales every load tagged with `group`.
    LoadOverlay { group: String, scale: f64 },
    /// Replaces the impedance of a source-thevenin branch; zero merges its ends.
    SourceImpedanceChange { branch: String, r_pu: f64, x_pu: f64 },
    /// Derates an export branch and screens plant output against it.
    LineCapacityReduction {
        branch: String,
        capacity_mw: f64,
        plant_generator: String,
        #[serde(default = "default_floor")]
        critical_floor_mw: f64,
    },
    BreakerStuckClosed { breaker: String },
    BreakerFailOpen { breaker: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KindTag {
    TransformerWindingOutage,
    LoadOverlay,
    SourceImpedanceChange,
    LineCapacityReduction,
    BreakerStuckClosed,
    BreakerFailOpen,
}

impl ContingencyKind {
    pub fn tag(&self) -> KindTag {
        match self {
            ContingencyKind::TransformerWindingOutage { .. } => KindTag::TransformerWindingOutage,
            ContingencyKind::LoadOverlay { .. } => KindTag::LoadOverlay,
            ContingencyKind::SourceImpedanceChange { .. } => KindTag::SourceImpedanceChange,
            ContingencyKind::LineCapacityReduction { .. } => KindTag::LineCapacityReduction,
            ContingencyKind::BreakerStuckClosed { .. } => KindTag::BreakerStuckClosed,
            ContingencyKind::BreakerFailOpen { .. } => KindTag::BreakerFailOpen,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VoltageLimits {
    pub under_pct: f64,
    pub over_pct: f64,
}

impl Default for VoltageLimits {
    fn default() -> Self {
        Self {
            under_pct: 90.0,
            over_pct: 110.0,
        }
    }
}

impl VoltageLimits {
    pub fn validate(&self) -> Result<(), ContingencyError> {
        if self.under_pct < 100.0 && 100.0 < self.over_pct && self.under_pct > 0.0 {
            Ok(())
        } else {
            Err(ContingencyError::InvalidParameter(format!(
                "voltage limits must satisfy 0 < under < 100 < over, got {} / {}",
                self.under_pct, self.over_pct
            )))
        }
    }

    /// Limits are inclusive: a bus exactly on a limit is compliant.
    pub fn classify(&self, voltage_pct: f64, energized: bool) -> ViolationClass {
        if !energized {
            ViolationClass::DeEnergized
        } else if voltage_pct < self.under_pct {
            ViolationClass::Undervoltage
        } else if voltage_pct > self.over_pct {
            ViolationClass::Overvoltage
        } else {
            ViolationClass::None
        }
    }

    fn under_band(&self) -> f64 {
        1.0 - self.under_pct / 100.0
    }

    fn over_band(&self) -> f64 {
        self.over_pct / 100.0 - 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationClass {
    None,
    Undervoltage,
    Overvoltage,
    DeEnergized,
}

impl ViolationClass {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationClass::None => "none",
            ViolationClass::Undervoltage => "undervoltage",
            ViolationClass::Overvoltage => "overvoltage",
            ViolationClass::DeEnergized => "de-energized",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationRow {
    pub bus_id: String,
    pub nominal_kv: f64,
    pub voltage_pct: f64,
    pub class: ViolationClass,
}

impl ViolationRow {
    /// `| |V| / V_nom − 1 |`, 1.0 for a de-energized bus.
    pub fn deviation(&self) -> f64 {
        match self.class {
            ViolationClass::DeEnergized => 1.0,
            _ => (self.voltage_pct / 100.0 - 1.0).abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViolationCounts {
    pub undervoltage: usize,
    pub overvoltage: usize,
    pub de_energized: usize,
}

impl ViolationCounts {
    pub fn total(&self) -> usize {
        self.undervoltage + self.overvoltage + self.de_energized
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub rows: Vec<ViolationRow>,
    pub counts: ViolationCounts,
}

impl ViolationReport {
    pub fn from_rows(mut rows: Vec<ViolationRow>) -> Self {
        rows.sort_by(|a, b| {
            a.voltage_pct
                .total_cmp(&b.voltage_pct)
                .then_with(|| a.bus_id.cmp(&b.bus_id))
        });
        let mut counts = ViolationCounts::default();
        for r in &rows {
            match r.class {
                ViolationClass::Undervoltage => counts.undervoltage += 1,
                ViolationClass::Overvoltage => counts.overvoltage += 1,
                ViolationClass::DeEnergized => counts.de_energized += 1,
                ViolationClass::None => {}
            }
        }
        Self { rows, counts }
    }

    pub fn violations(&self) -> impl Iterator<Item = &ViolationRow> {
        self.rows.iter().filter(|r| r.class != ViolationClass::None)
    }

    pub fn row(&self, bus_id: &str) -> Option<&ViolationRow> {
        self.rows.iter().find(|r| r.bus_id == bus_id)
    }

    pub fn is_compliant(&self) -> bool {
        self.counts.total() == 0
    }

    pub fn worst_deviation(&self) -> f64 {
        self.rows.iter().map(ViolationRow::deviation).fold(0.0, f64::max)
    }
}

/// Percent-of-nominal voltages and classes for every monitored bus.
pub fn check_violations(solution: &NetworkSolution, model: &NetworkModel, limits: &VoltageLimits) -> ViolationReport {
    let rows = model
        .buses
        .iter()
        .zip(&solution.buses)
        .filter(|(bus, _)| bus.category.is_monitored())
        .map(|(bus, state)| {
            // Bus voltage bases equal nominal kV, so per unit ×100 is % of nominal.
            let pct = state.voltage_pct();
            ViolationRow {
                bus_id: bus.id.clone(),
                nominal_kv: bus.nominal_kv,
                voltage_pct: pct,
                class: limits.classify(pct, state.energized),
            }
        })
        .collect();
    ViolationReport::from_rows(rows)
}

/// Voltage performance index: `Σ max(0, dev − band) / band` over violating
/// rows; a de-energized bus counts with `dev = 1`.
pub fn voltage_index(report: &ViolationReport, limits: &VoltageLimits) -> f64 {
    report
        .rows
        .iter()
        .map(|r| {
            let band = match r.class {
                ViolationClass::None => return 0.0,
                ViolationClass::Overvoltage => limits.over_band(),
                ViolationClass::Undervoltage | ViolationClass::DeEnergized => limits.under_band(),
            };
            (r.deviation() - band).max(0.0) / band
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CapacityAdvisory {
    None,
    CurtailAndRedispatch,
    ContactGridOperators,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityScreenResult {
    pub plant_output_mw: f64,
    pub line_capacity_mw: f64,
    pub critical_floor_mw: f64,
    pub overload_mw: f64,
    pub curtailment_mw: f64,
    /// Generation other plants must pick up to replace the curtailment.
    pub external_redispatch_mw: f64,
    pub critical_infrastructure_at_risk: bool,
    pub advisory: CapacityAdvisory,
}

impl CapacityScreenResult {
    /// Fraction of plant output that must be curtailed.
    pub fn severity(&self) -> f64 {
        if self.plant_output_mw > 0.0 {
            self.overload_mw / self.plant_output_mw
        } else {
            0.0
        }
    }
}

pub fn screen_capacity(plant_output_mw: f64, line_capacity_mw: f64, critical_floor_mw: f64) -> CapacityScreenResult {
    let overload = (plant_output_mw - line_capacity_mw).max(0.0);
    let at_risk = line_capacity_mw < critical_floor_mw;
    let advisory = if at_risk {
        CapacityAdvisory::ContactGridOperators
    } else if overload > 0.0 {
        CapacityAdvisory::CurtailAndRedispatch
    } else {
        CapacityAdvisory::None
    };
    CapacityScreenResult {
        plant_output_mw,
        line_capacity_mw,
        critical_floor_mw,
        overload_mw: overload,
        curtailment_mw: overload,
        external_redispatch_mw: overload,
        critical_infrastructure_at_risk: at_risk,
        advisory,
    }
}

/// Capacity screen for `c` evaluated against the current state of `model`.
pub fn capacity_for(model: &NetworkModel, c: &Contingency) -> Result<Option<CapacityScreenResult>, ContingencyError> {
    let ContingencyKind::LineCapacityReduction {
        branch,
        plant_generator,
        critical_floor_mw,
        ..
    } = &c.kind
    else {
        return Ok(None);
    };
    let br = model.branch_index(branch).ok_or_else(|| unknown("branch", branch))?;
    let g = model
        .generator_index(plant_generator)
        .ok_or_else(|| unknown("generator", plant_generator))?;
    let capacity = model.branches[br].rating_mva.unwrap_or(f64::INFINITY);
    Ok(Some(screen_capacity(
        model.generators[g].p_set_mw,
        capacity,
        *critical_floor_mw,
    )))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AppliedContingency {
    pub model: NetworkModel,
    /// Set when the contingency left the model unchanged.
    pub no_op: bool,
    pub warnings: Vec<String>,
}

/// Returns a copy of `model` with the failure imposed.
pub fn apply_contingency(model: &NetworkModel, c: &Contingency) -> Result<AppliedContingency, ContingencyError> {
    let mut m = model.clone();
    let mut warnings = Vec::new();
    match &c.kind {
        ContingencyKind::TransformerWindingOutage { transformer, winding } => {
            let t = model
                .transformer(transformer)
                .ok_or_else(|| unknown("transformer", transformer))?;
            if !t.windings.iter().any(|w| w.winding == *winding) {
                return Err(ContingencyError::NoSuchWinding {
                    transformer: transformer.clone(),
                    winding: *winding,
                });
            }
            let two_winding = t.windings.len() == 2;
            m.branches.retain(|b| match &b.winding {
                Some((id, w)) if id == transformer => !(two_winding || w == winding),
                _ => true,
            });
        }
        ContingencyKind::LoadOverlay { group, scale } => {
            if !(*scale >= 0.0) {
                return Err(ContingencyError::InvalidParameter(format!("overlay scale {scale}")));
            }
            if !model.has_load_group(group) {
                return Err(unknown("load group", group));
            }
            for l in m.loads.iter_mut().filter(|l| l.group.as_deref() == Some(group)) {
                l.p_mw *= scale;
                l.q_mvar *= scale;
            }
        }
        ContingencyKind::SourceImpedanceChange { branch, r_pu, x_pu } => {
            let k = model.branch_index(branch).ok_or_else(|| unknown("branch", branch))?;
            if model.branches[k].kind != BranchKind::SourceThevenin {
                return Err(ContingencyError::NotSourceBranch(branch.clone()));
            }
            m.branches[k].series_impedance = num_complex::Complex64::new(*r_pu, *x_pu);
        }
        ContingencyKind::LineCapacityReduction {
            branch,
            capacity_mw,
            plant_generator,
            ..
        } => {
            let k = model.branch_index(branch).ok_or_else(|| unknown("branch", branch))?;
            model
                .generator_index(plant_generator)
                .ok_or_else(|| unknown("generator", plant_generator))?;
            if !(*capacity_mw >= 0.0) {
                return Err(ContingencyError::InvalidParameter(format!("capacity {capacity_mw}")));
            }
            m.branches[k].rating_mva = Some(*capacity_mw);
        }
        ContingencyKind::BreakerStuckClosed { breaker } => {
            let k = model.breaker_index(breaker).ok_or_else(|| unknown("breaker", breaker))?;
            let b = &model.breakers[k];
            if b.current_state == BreakerState::Closed {
                warnings.push(format!("breaker '{breaker}' is already closed; stuck-closed has no effect"));
            }
            m.breakers[k].current_state = BreakerState::Closed;
        }
        ContingencyKind::BreakerFailOpen { breaker } => {
            let k = model.breaker_index(breaker).ok_or_else(|| unknown("breaker", breaker))?;
            if model.breakers[k].current_state == BreakerState::Open {
                warnings.push(format!("breaker '{breaker}' is already open; fail-open has no effect"));
            }
            m.breakers[k].current_state = BreakerState::Open;
        }
    }
    let no_op = m == *model;
    Ok(AppliedContingency {
        model: m,
        no_op,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResultStatus {
    Converged,
    Diverged,
    NotApplicable,
}

/// Solution status plus screened voltages for one operating state.
#[derive(Debug, Clone, PartialEq)]
pub struct Assessment {
    pub solution: NetworkSolution,
    pub converged: bool,
    pub report: ViolationReport,
    pub voltage_index: f64,
}

/// Solves every island and screens voltages. A diverged state carries an
/// empty report.
pub fn assess(model: &NetworkModel, settings: &SolverSettings, limits: &VoltageLimits) -> Assessment {
    let solution = solve_network(model, settings, Method::NewtonRaphson);
    let converged = solution.converged();
    let report = if converged {
        check_violations(&solution, model, limits)
    } else {
        ViolationReport::default()
    };
    let voltage_index = voltage_index(&report, limits);
    Assessment {
        solution,
        converged,
        report,
        voltage_index,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContingencyResult {
    pub contingency_id: String,
    pub description: String,
    pub kind: Option<KindTag>,
    pub status: ResultStatus,
    pub report: ViolationReport,
    pub voltage_index: f64,
    /// Voltage index plus the capacity-screen term (overload as a fraction
    /// of plant output) when a capacity screen applies.
    pub severity_index: f64,
    pub worst_deviation: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity: Option<CapacityScreenResult>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl ContingencyResult {
    pub(crate) fn from_assessment(
        id: &str,
        description: &str,
        kind: Option<KindTag>,
        assessment: &Assessment,
        capacity: Option<CapacityScreenResult>,
        no_op: bool,
        warnings: Vec<String>,
    ) -> Self {
        let status = match (assessment.converged, no_op) {
            (false, _) => ResultStatus::Diverged,
            (true, true) => ResultStatus::NotApplicable,
            (true, false) => ResultStatus::Converged,
        };
        let severity_index = assessment.voltage_index + capacity.map(|c| c.severity()).unwrap_or(0.0);
        Self {
            contingency_id: id.to_string(),
            description: description.to_string(),
            kind,
            status,
            worst_deviation: assessment.report.worst_deviation(),
            report: assessment.report.clone(),
            voltage_index: assessment.voltage_index,
            severity_index,
            capacity,
            warnings,
        }
    }

    pub fn is_clear(&self) -> bool {
        self.status != ResultStatus::Diverged && self.severity_index == 0.0
    }
}

/// Intact-system screening, reported under the id `base`.
pub fn run_base_case(model: &NetworkModel, settings: &SolverSettings, limits: &VoltageLimits) -> ContingencyResult {
    let a = assess(model, settings, limits);
    ContingencyResult::from_assessment("base", "intact system", None, &a, None, false, Vec::new())
}

/// Imposes `c` on a copy of `model`, solves and screens it.
pub fn run_contingency(
    model: &NetworkModel,
    c: &Contingency,
    settings: &SolverSettings,
    limits: &VoltageLimits,
) -> Result<ContingencyResult, ContingencyError> {
    let applied = apply_contingency(model, c)?;
    for w in &applied.warnings {
        log::warn!("contingency '{}': {w}", c.id);
    }
    let assessment = assess(&applied.model, settings, limits);
    let capacity = capacity_for(&applied.model, c)?;
    Ok(ContingencyResult::from_assessment(
        &c.id,
        &c.description,
        Some(c.kind.tag()),
        &assessment,
        capacity,
        applied.no_op,
        applied.warnings,
    ))
}

/// Runs every contingency, fanning out over `workers` threads (all cores when
/// `None`). Results come back in list order.
pub fn run_sweep(
    model: &NetworkModel,
    contingencies: &[Contingency],
    settings: &SolverSettings,
    limits: &VoltageLimits,
    workers: Option<usize>,
) -> Result<Vec<ContingencyResult>, ContingencyError> {
    let run = || {
        contingencies
            .par_iter()
            .map(|c| run_contingency(model, c, settings, limits))
            .collect::<Result<Vec<_>, _>>()
    };
    match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| ContingencyError::InvalidParameter(e.to_string()))?
            .install(run),
        None => run(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingEntry {
    pub position: usize,
    pub contingency_id: String,
    pub status: ResultStatus,
    pub severity_index: f64,
    pub worst_deviation: f64,
    pub violations: usize,
}

fn severity_order(a: &ContingencyResult, b: &ContingencyResult) -> Ordering {
    let diverged = |r: &ContingencyResult| r.status == ResultStatus::Diverged;
    diverged(b)
        .cmp(&diverged(a))
        .then_with(|| b.severity_index.total_cmp(&a.severity_index))
        .then_with(|| b.worst_deviation.total_cmp(&a.worst_deviation))
        .then_with(|| a.contingency_id.cmp(&b.contingency_id))
}

/// Most severe first: diverged, then SI descending, worst deviation
/// descending, id ascending.
pub fn rank_contingencies(results: &[ContingencyResult]) -> Vec<RankingEntry> {
    let mut order: Vec<&ContingencyResult> = results.iter().collect();
    order.sort_by(|a, b| severity_order(a, b));
    order
        .into_iter()
        .enumerate()
        .map(|(i, r)| RankingEntry {
            position: i + 1,
            contingency_id: r.contingency_id.clone(),
            status: r.status,
            severity_index: r.severity_index,
            worst_deviation: r.worst_deviation,
            violations: r.report.counts.total(),
        })
        .collect()
}

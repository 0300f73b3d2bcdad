//! Remedial action schemes: pre-planned switching and dispatch sequences
//! evaluated against a post-contingency state.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contingency::{
    apply_contingency, assess, capacity_for, CapacityScreenResult, Contingency, ContingencyError,
    ContingencyResult, KindTag, VoltageLimits,
};
use crate::network::{BreakerState, NetworkModel};
use crate::powerflow::SolverSettings;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RasError {
    #[error("plan '{plan}': unknown breaker '{breaker}'")]
    UnknownBreaker { plan: String, breaker: String },
    #[error("plan '{plan}': fast bus transfer must open and close two different breakers")]
    SameTransferBreaker { plan: String },
    #[error("plan '{plan}': no loads in group '{group}'")]
    EmptyLoadGroup { plan: String, group: String },
    #[error("plan '{plan}': unknown generator '{generator}'")]
    UnknownGenerator { plan: String, generator: String },
    #[error("plan '{plan}': redispatch to {p_mw} MW is not a valid output")]
    BadRedispatch { plan: String, p_mw: f64 },
    #[error("plan '{0}' has no actions")]
    Empty(String),
    #[error(transparent)]
    Contingency(#[from] ContingencyError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RasAction {
    OpenBreaker { breaker: String },
    CloseBreaker { breaker: String },
    /// Open one incomer and close the alternate in a single step.
    FastBusTransfer { open: String, close: String },
    ShedLoadGroup { group: String },
    Redispatch { generator: String, p_mw: f64 },
    /// Temporary feeder swap, e.g. moving a bus onto a nominal-tap source.
    TemporaryFeed {
        open: String,
        close: String,
        #[serde(default)]
        note: String,
    },
}

/// Which contingencies a plan may be offered for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PlanTarget {
    Contingency(String),
    Kinds { kinds: Vec<KindTag> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RasPlan {
    pub id: String,
    pub target: PlanTarget,
    #[serde(default)]
    pub description: String,
    pub actions: Vec<RasAction>,
    /// A plan that deliberately does nothing (monitor only).
    #[serde(default)]
    pub null_plan: bool,
}

impl RasPlan {
    pub fn applies_to(&self, c: &Contingency) -> bool {
        match &self.target {
            PlanTarget::Contingency(id) => *id == c.id,
            PlanTarget::Kinds { kinds } => kinds.contains(&c.kind.tag()),
        }
    }
}

fn set_breaker(model: &mut NetworkModel, plan: &str, id: &str, state: BreakerState) -> Result<(), RasError> {
    let k = model.breaker_index(id).ok_or_else(|| RasError::UnknownBreaker {
        plan: plan.to_string(),
        breaker: id.to_string(),
    })?;
    model.breakers[k].current_state = state;
    Ok(())
}

fn transfer(model: &mut NetworkModel, plan: &str, open: &str, close: &str) -> Result<(), RasError> {
    if open == close {
        return Err(RasError::SameTransferBreaker { plan: plan.to_string() });
    }
    // Validate both ends before touching either so the swap is atomic.
    for id in [open, close] {
        if model.breaker_index(id).is_none() {
            return Err(RasError::UnknownBreaker {
                plan: plan.to_string(),
                breaker: id.to_string(),
            });
        }
    }
    set_breaker(model, plan, open, BreakerState::Open)?;
    set_breaker(model, plan, close, BreakerState::Closed)
}

/// Returns a copy of `model` with every action of `plan` applied in order.
pub fn apply_plan(model: &NetworkModel, plan: &RasPlan) -> Result<NetworkModel, RasError> {
    if plan.actions.is_empty() && !plan.null_plan {
        return Err(RasError::Empty(plan.id.clone()));
    }
    let mut m = model.clone();
    for action in &plan.actions {
        match action {
            RasAction::OpenBreaker { breaker } => set_breaker(&mut m, &plan.id, breaker, BreakerState::Open)?,
            RasAction::CloseBreaker { breaker } => set_breaker(&mut m, &plan.id, breaker, BreakerState::Closed)?,
            RasAction::FastBusTransfer { open, close } | RasAction::TemporaryFeed { open, close, .. } => {
                transfer(&mut m, &plan.id, open, close)?
            }
            RasAction::ShedLoadGroup { group } => {
                if !m.has_load_group(group) {
                    return Err(RasError::EmptyLoadGroup {
                        plan: plan.id.clone(),
                        group: group.clone(),
                    });
                }
                m.loads.retain(|l| l.group.as_deref() != Some(group));
            }
            RasAction::Redispatch { generator, p_mw } => {
                let g = m.generator_index(generator).ok_or_else(|| RasError::UnknownGenerator {
                    plan: plan.id.clone(),
                    generator: generator.clone(),
                })?;
                if !(p_mw.is_finite() && *p_mw >= 0.0) {
                    return Err(RasError::BadRedispatch {
                        plan: plan.id.clone(),
                        p_mw: *p_mw,
                    });
                }
                m.generators[g].p_set_mw = *p_mw;
            }
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RasEvaluation {
    pub plan_id: String,
    pub contingency_id: String,
    pub before: ContingencyResult,
    pub after: ContingencyResult,
    /// Converged after the plan with no voltage violations and no capacity
    /// overload left.
    pub cleared: bool,
    /// Largest drop, in percent of nominal, of any monitored bus voltage
    /// after the plan relative to the intact steady state. Buses that are
    /// de-energized after the plan count as a 100 % drop.
    pub max_drop_vs_steady_state_pct: f64,
    /// Safety-related loads energized before the plan and dead after it.
    pub safety_loads_lost: Vec<String>,
    pub capacity_before: Option<CapacityScreenResult>,
    pub capacity_after: Option<CapacityScreenResult>,
}

impl RasEvaluation {
    pub fn severity_before(&self) -> f64 {
        self.before.severity_index
    }

    pub fn severity_after(&self) -> f64 {
        self.after.severity_index
    }
}

fn energized_safety_loads(model: &NetworkModel, energized: &[bool]) -> Vec<String> {
    model
        .loads
        .iter()
        .filter(|l| l.safety_related && energized[l.bus])
        .map(|l| l.id.clone())
        .collect()
}

/// Solves the contingency state, applies `plan` on top of it and solves
/// again. `contingency = None` applies the plan to the intact system.
pub fn evaluate_ras(
    base: &NetworkModel,
    contingency: Option<&Contingency>,
    plan: &RasPlan,
    settings: &SolverSettings,
    limits: &VoltageLimits,
) -> Result<RasEvaluation, RasError> {
    let steady = assess(base, settings, limits);
    let (post, warnings, cid, desc, kind) = match contingency {
        Some(c) => {
            let applied = apply_contingency(base, c)?;
            (applied.model, applied.warnings, c.id.clone(), c.description.clone(), Some(c.kind.tag()))
        }
        None => (base.clone(), Vec::new(), "base".to_string(), "intact system".to_string(), None),
    };
    let before_a = assess(&post, settings, limits);
    let capacity_before = match contingency {
        Some(c) => capacity_for(&post, c)?,
        None => None,
    };
    let remedied = apply_plan(&post, plan)?;
    let after_a = assess(&remedied, settings, limits);
    let capacity_after = match contingency {
        Some(c) => capacity_for(&remedied, c)?,
        None => None,
    };

    let before = ContingencyResult::from_assessment(&cid, &desc, kind, &before_a, capacity_before, false, warnings);
    let after = ContingencyResult::from_assessment(
        &format!("{cid}+{}", plan.id),
        &plan.description,
        kind,
        &after_a,
        capacity_after,
        false,
        Vec::new(),
    );

    let max_drop = if after_a.converged && steady.converged {
        base.buses
            .iter()
            .enumerate()
            .filter(|(_, b)| b.category.is_monitored())
            .map(|(k, _)| steady.solution.buses[k].voltage_pct() - after_a.solution.buses[k].voltage_pct())
            .fold(0.0_f64, f64::max)
    } else {
        100.0
    };

    let energized_before: Vec<bool> = before_a.solution.buses.iter().map(|b| b.energized).collect();
    let energized_after: Vec<bool> = after_a.solution.buses.iter().map(|b| b.energized).collect();
    let was = energized_safety_loads(&post, &energized_before);
    let still = energized_safety_loads(&remedied, &energized_after);
    let safety_loads_lost = was.into_iter().filter(|id| !still.contains(id)).collect();

    let cleared = after_a.converged
        && after.report.is_compliant()
        && capacity_after.map_or(true, |c| c.overload_mw == 0.0);

    Ok(RasEvaluation {
        plan_id: plan.id.clone(),
        contingency_id: cid,
        before,
        after,
        cleared,
        max_drop_vs_steady_state_pct: max_drop,
        safety_loads_lost,
        capacity_before,
        capacity_after,
    })
}

/// Evaluates every catalog plan that applies to `c` and orders them best
/// first: lowest post-plan severity, then plans that keep safety-related loads
/// energized, then plan id.
pub fn suggest_ras(
    base: &NetworkModel,
    c: &Contingency,
    catalog: &[RasPlan],
    settings: &SolverSettings,
    limits: &VoltageLimits,
) -> Result<Vec<RasEvaluation>, RasError> {
    let mut evals = catalog
        .iter()
        .filter(|p| p.applies_to(c))
        .map(|p| evaluate_ras(base, Some(c), p, settings, limits))
        .collect::<Result<Vec<_>, _>>()?;
    evals.sort_by(|a, b| {
        a.severity_after()
            .total_cmp(&b.severity_after())
            .then_with(|| a.safety_loads_lost.is_empty().cmp(&b.safety_loads_lost.is_empty()).reverse())
            .then_with(|| a.plan_id.cmp(&b.plan_id))
    });
    Ok(evals)
}

//! AC load flow on energized islands.
//!
//! Newton-Raphson is the production solver; Gauss-Seidel is kept as an
//! independent cross-check. Both work on the merged electrical nodes of one
//! island (closed breakers collapsed) and share [`IslandSystem`].

mod balance;
mod gauss_seidel;
mod injection;
mod newton;
mod ybus;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{BusKind, NetworkModel};
use crate::topology::{connected_islands, merge_nodes, Island, NodeMap};

pub use balance::{branch_losses, power_balance_residual, BalanceCheck};
pub use gauss_seidel::solve_gauss_seidel;
pub use injection::{assemble_jacobian, injected_power, Jacobian, PowerFlowState, VariableLayout};
pub use newton::{solve_newton_raphson, solve_newton_raphson_from};
pub use ybus::{build_ybus, build_ybus_on_nodes, AdmittanceMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("island starting at bus '{0}' has no source")]
    NotEnergized(String),
    #[error("island holds more than one slack bus: {0:?}")]
    MultipleSlack(Vec<String>),
    #[error("branch '{0}' has zero impedance and cannot be stamped")]
    ZeroImpedance(String),
    #[error("singular Jacobian at iteration {0}")]
    SingularJacobian(usize),
    #[error("node containing bus '{0}' has no admittance to the rest of the island")]
    IsolatedNode(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    /// Worst absolute power mismatch accepted, per unit.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub flat_start: bool,
    pub gs_max_iterations: usize,
    /// Over-relaxation factor for pq nodes in Gauss-Seidel (1.0 = classical).
    pub gs_acceleration: f64,
    pub enforce_q_limits: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tolerance: 1e-6,
            max_iterations: 50,
            flat_start: true,
            gs_max_iterations: 500,
            gs_acceleration: 1.0,
            enforce_q_limits: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    NewtonRaphson,
    GaussSeidel,
}

/// Solver input for one island: merged nodes, admittances and specified
/// injections, all per unit.
#[derive(Debug, Clone)]
pub struct IslandSystem {
    pub island: Island,
    pub nodes: NodeMap,
    pub ybus: AdmittanceMatrix,
    pub kind: Vec<BusKind>,
    pub v_set: Vec<f64>,
    pub p_gen: Vec<f64>,
    pub p_load: Vec<f64>,
    pub q_load: Vec<f64>,
    /// Reactive generation fixed after a pv to pq switch.
    pub q_fixed: Vec<f64>,
    pub q_limits: Vec<Option<(f64, f64)>>,
    pub slack: usize,
}

impl IslandSystem {
    pub fn new(model: &NetworkModel, island: &Island) -> Result<Self, SolveError> {
        let first_id = || model.buses[island.buses[0]].id.clone();
        if !island.energized {
            return Err(SolveError::NotEnergized(first_id()));
        }
        let nodes = merge_nodes(model, island);
        let ybus = build_ybus_on_nodes(model, &nodes)?;
        let n = nodes.nodes.len();
        let base = model.s_base_mva;

        let mut kind = vec![BusKind::Pq; n];
        for (k, buses) in nodes.nodes.iter().enumerate() {
            kind[k] = buses
                .iter()
                .map(|&b| model.buses[b].kind)
                .min()
                .unwrap_or(BusKind::Pq);
        }
        let mut v_set = vec![1.0; n];
        let mut v_seen = vec![false; n];
        let mut p_gen = vec![0.0; n];
        let mut q_limits: Vec<Option<(f64, f64)>> = vec![None; n];
        for g in &model.generators {
            let Some(&k) = nodes.node_of.get(&g.bus) else { continue };
            p_gen[k] += g.p_set_mw / base;
            if !v_seen[k] {
                v_set[k] = g.v_set_pu;
                v_seen[k] = true;
            }
            if let Some((lo, hi)) = g.q_limits_mvar {
                let acc = q_limits[k].get_or_insert((0.0, 0.0));
                acc.0 += lo / base;
                acc.1 += hi / base;
            }
        }
        let mut p_load = vec![0.0; n];
        let mut q_load = vec![0.0; n];
        for l in &model.loads {
            if let Some(&k) = nodes.node_of.get(&l.bus) {
                p_load[k] += l.p_mw / base;
                q_load[k] += l.q_mvar / base;
            }
        }

        let slacks: Vec<usize> = (0..n).filter(|&k| kind[k] == BusKind::Slack).collect();
        let slack = match slacks.as_slice() {
            [s] => *s,
            [] => {
                // Source-only island (e.g. a diesel-fed bus): the first pv node
                // becomes the angle reference.
                let k = (0..n)
                    .find(|&k| kind[k] == BusKind::Pv)
                    .ok_or_else(|| SolveError::NotEnergized(first_id()))?;
                kind[k] = BusKind::Slack;
                k
            }
            many => {
                return Err(SolveError::MultipleSlack(
                    many.iter().map(|&k| model.buses[nodes.nodes[k][0]].id.clone()).collect(),
                ))
            }
        };
        if n > 1 {
            for k in 0..n {
                let offdiag = ybus.row(k).iter().any(|&(j, y)| j != k && y.norm() > 0.0);
                if !offdiag {
                    return Err(SolveError::IsolatedNode(model.buses[nodes.nodes[k][0]].id.clone()));
                }
            }
        }

        Ok(Self {
            island: island.clone(),
            nodes,
            ybus,
            kind,
            v_set,
            p_gen,
            p_load,
            q_load,
            q_fixed: vec![0.0; n],
            q_limits,
            slack,
        })
    }

    pub fn len(&self) -> usize {
        self.kind.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kind.is_empty()
    }

    pub fn p_spec(&self, k: usize) -> f64 {
        self.p_gen[k] - self.p_load[k]
    }

    pub fn q_spec(&self, k: usize) -> f64 {
        self.q_fixed[k] - self.q_load[k]
    }

    pub fn layout(&self) -> VariableLayout {
        let n = self.len();
        VariableLayout {
            angle_nodes: (0..n).filter(|&k| self.kind[k] != BusKind::Slack).collect(),
            magnitude_nodes: (0..n).filter(|&k| self.kind[k] == BusKind::Pq).collect(),
        }
    }

    /// Flat start: 1.0∠0 for pq nodes, setpoint magnitude for sources.
    pub fn initial_state(&self) -> PowerFlowState {
        let mut s = PowerFlowState::flat(self.len());
        for k in 0..self.len() {
            if self.kind[k] != BusKind::Pq {
                s.vm[k] = self.v_set[k];
            }
        }
        s
    }

    /// `[ΔP (non-slack); ΔQ (pq)]`, specified minus calculated.
    pub fn mismatch(&self, state: &PowerFlowState, layout: &VariableLayout) -> Vec<f64> {
        let (p, q) = injected_power(state, &self.ybus);
        layout
            .angle_nodes
            .iter()
            .map(|&k| self.p_spec(k) - p[k])
            .chain(layout.magnitude_nodes.iter().map(|&k| self.q_spec(k) - q[k]))
            .collect()
    }

    pub(crate) fn solution(
        &self,
        method: Method,
        state: PowerFlowState,
        converged: bool,
        trace: Vec<f64>,
        pv_to_pq: Vec<usize>,
    ) -> PowerFlowSolution {
        let (p, q) = injected_power(&state, &self.ybus);
        let mut buses = Vec::new();
        for (k, members) in self.nodes.nodes.iter().enumerate() {
            for &b in members {
                buses.push(BusVoltage {
                    bus: b,
                    vm: state.vm[k],
                    va: state.va[k],
                });
            }
        }
        buses.sort_by_key(|b| b.bus);
        let losses = Complex64::new(p.iter().sum(), q.iter().sum());
        PowerFlowSolution {
            method,
            converged,
            iterations: state.iteration,
            worst_mismatch: trace.last().copied().unwrap_or(0.0),
            trace,
            slack_injection: Complex64::new(p[self.slack], q[self.slack]),
            losses,
            node_buses: self.nodes.nodes.clone(),
            p_injection: p,
            q_injection: q,
            buses,
            state,
            pv_to_pq,
            island: self.island.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BusVoltage {
    pub bus: usize,
    pub vm: f64,
    pub va: f64,
}

/// Result of solving one island.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerFlowSolution {
    pub method: Method,
    pub converged: bool,
    pub iterations: usize,
    pub worst_mismatch: f64,
    /// Worst mismatch before each update, then after the last one.
    pub trace: Vec<f64>,
    /// Per bus of the island, ordered by bus index.
    pub buses: Vec<BusVoltage>,
    pub node_buses: Vec<Vec<usize>>,
    /// Calculated net injections per merged node.
    pub p_injection: Vec<f64>,
    pub q_injection: Vec<f64>,
    pub slack_injection: Complex64,
    /// Sum of all nodal injections: series plus shunt losses.
    pub losses: Complex64,
    pub state: PowerFlowState,
    /// Nodes switched from pv to pq by Q-limit enforcement.
    pub pv_to_pq: Vec<usize>,
    pub island: Island,
}

impl PowerFlowSolution {
    pub fn voltage(&self, bus: usize) -> Option<BusVoltage> {
        self.buses
            .binary_search_by_key(&bus, |b| b.bus)
            .ok()
            .map(|k| self.buses[k])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IslandStatus {
    Converged,
    Diverged,
    DeEnergized,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IslandOutcome {
    pub island: Island,
    pub status: IslandStatus,
    pub solution: Option<PowerFlowSolution>,
    pub error: Option<SolveError>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BusState {
    pub energized: bool,
    pub vm: f64,
    pub va: f64,
}

impl BusState {
    pub fn voltage_pct(&self) -> f64 {
        if self.energized {
            100.0 * self.vm
        } else {
            0.0
        }
    }
}

/// Whole-network solution: every island solved or marked de-energized.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSolution {
    pub islands: Vec<IslandOutcome>,
    /// One entry per model bus, model order.
    pub buses: Vec<BusState>,
}

impl NetworkSolution {
    pub fn converged(&self) -> bool {
        self.islands.iter().all(|i| i.status != IslandStatus::Diverged)
    }

    pub fn total_iterations(&self) -> usize {
        self.islands
            .iter()
            .filter_map(|i| i.solution.as_ref())
            .map(|s| s.iterations)
            .sum()
    }
}

pub fn solve_island(model: &NetworkModel, island: &Island, settings: &SolverSettings, method: Method) -> Result<PowerFlowSolution, SolveError> {
    match method {
        Method::NewtonRaphson => solve_newton_raphson(model, island, settings),
        Method::GaussSeidel => solve_gauss_seidel(model, island, settings),
    }
}

pub fn solve_network(model: &NetworkModel, settings: &SolverSettings, method: Method) -> NetworkSolution {
    let mut buses = vec![
        BusState {
            energized: false,
            vm: 0.0,
            va: 0.0,
        };
        model.buses.len()
    ];
    let mut islands = Vec::new();
    for island in connected_islands(model) {
        if !island.energized {
            islands.push(IslandOutcome {
                island,
                status: IslandStatus::DeEnergized,
                solution: None,
                error: None,
            });
            continue;
        }
        match solve_island(model, &island, settings, method) {
            Ok(sol) if sol.converged => {
                for bv in &sol.buses {
                    buses[bv.bus] = BusState {
                        energized: true,
                        vm: bv.vm,
                        va: bv.va,
                    };
                }
                islands.push(IslandOutcome {
                    island,
                    status: IslandStatus::Converged,
                    solution: Some(sol),
                    error: None,
                });
            }
            Ok(sol) => islands.push(IslandOutcome {
                island,
                status: IslandStatus::Diverged,
                solution: Some(sol),
                error: None,
            }),
            Err(e) => islands.push(IslandOutcome {
                island,
                status: IslandStatus::Diverged,
                solution: None,
                error: Some(e),
            }),
        }
    }
    NetworkSolution { islands, buses }
}

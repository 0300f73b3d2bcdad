use nalgebra::DVector;

use super::{assemble_jacobian, injected_power, IslandSystem, Method, PowerFlowSolution, PowerFlowState, SolveError, SolverSettings};
use crate::network::{BusKind, NetworkModel};
use crate::topology::Island;

pub fn solve_newton_raphson(model: &NetworkModel, island: &Island, settings: &SolverSettings) -> Result<PowerFlowSolution, SolveError> {
    solve_newton_raphson_from(model, island, settings, None)
}

/// Newton-Raphson from `initial` when `settings.flat_start` is false and an
/// initial state is given, otherwise from a flat start.
pub fn solve_newton_raphson_from(
    model: &NetworkModel,
    island: &Island,
    settings: &SolverSettings,
    initial: Option<&PowerFlowState>,
) -> Result<PowerFlowSolution, SolveError> {
    let mut sys = IslandSystem::new(model, island)?;
    let mut state = match initial {
        Some(s) if !settings.flat_start && s.vm.len() == sys.len() => PowerFlowState {
            iteration: 0,
            ..s.clone()
        },
        _ => sys.initial_state(),
    };
    let mut trace = Vec::new();
    let mut converged = iterate(&sys, &mut state, settings, &mut trace)?;

    let mut switched = Vec::new();
    if converged && settings.enforce_q_limits {
        let (_, q) = injected_power(&state, &sys.ybus);
        for k in 0..sys.len() {
            if sys.kind[k] != BusKind::Pv {
                continue;
            }
            let Some((lo, hi)) = sys.q_limits[k] else { continue };
            let q_gen = q[k] + sys.q_load[k];
            if q_gen < lo || q_gen > hi {
                sys.kind[k] = BusKind::Pq;
                sys.q_fixed[k] = q_gen.clamp(lo, hi);
                switched.push(k);
            }
        }
        if !switched.is_empty() {
            converged = iterate(&sys, &mut state, settings, &mut trace)?;
        }
    }
    Ok(sys.solution(Method::NewtonRaphson, state, converged, trace, switched))
}

fn iterate(sys: &IslandSystem, state: &mut PowerFlowState, settings: &SolverSettings, trace: &mut Vec<f64>) -> Result<bool, SolveError> {
    let layout = sys.layout();
    let na = layout.angle_nodes.len();
    let mut updates = 0;
    loop {
        let mismatch = sys.mismatch(state, &layout);
        let worst = mismatch.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let worst = if mismatch.iter().all(|v| v.is_finite()) { worst } else { f64::NAN };
        trace.push(worst);
        if worst.is_nan() {
            return Ok(false);
        }
        if worst <= settings.tolerance {
            return Ok(true);
        }
        if updates >= settings.max_iterations {
            return Ok(false);
        }
        let jac = assemble_jacobian(state, &sys.ybus, &layout);
        let dx = jac
            .solve(&DVector::from_vec(mismatch))
            .ok_or(SolveError::SingularJacobian(state.iteration))?;
        for (r, &k) in layout.angle_nodes.iter().enumerate() {
            state.va[k] += dx[r];
        }
        for (r, &k) in layout.magnitude_nodes.iter().enumerate() {
            state.vm[k] += dx[na + r];
        }
        state.iteration += 1;
        updates += 1;
        if layout.magnitude_nodes.iter().any(|&k| !(state.vm[k] > 0.0)) {
            trace.push(f64::NAN);
            return Ok(false);
        }
    }
}

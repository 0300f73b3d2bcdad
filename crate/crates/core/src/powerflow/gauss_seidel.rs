use num_complex::Complex64;

use super::{IslandSystem, Method, PowerFlowSolution, PowerFlowState, SolveError, SolverSettings};
use crate::network::{BusKind, NetworkModel};
use crate::topology::Island;

/// Classical node-by-node Gauss-Seidel sweep with the same worst-mismatch
/// stopping rule as Newton-Raphson.
pub fn solve_gauss_seidel(model: &NetworkModel, island: &Island, settings: &SolverSettings) -> Result<PowerFlowSolution, SolveError> {
    let sys = IslandSystem::new(model, island)?;
    let layout = sys.layout();
    let n = sys.len();
    let init = sys.initial_state();
    let mut v = init.complex();
    let mut diag = vec![Complex64::default(); n];
    for (k, d) in diag.iter_mut().enumerate() {
        *d = sys.ybus.get(k, k);
        if n > 1 && d.norm() == 0.0 {
            return Err(SolveError::IsolatedNode(model.buses[sys.nodes.nodes[k][0]].id.clone()));
        }
    }
    let alpha = settings.gs_acceleration;
    let mut trace = Vec::new();
    let mut sweeps = 0;
    let converged = loop {
        let state = to_state(&v, sweeps);
        let mismatch = sys.mismatch(&state, &layout);
        let worst = if mismatch.iter().all(|x| x.is_finite()) {
            mismatch.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
        } else {
            f64::NAN
        };
        trace.push(worst);
        if worst.is_nan() {
            break false;
        }
        if worst <= settings.tolerance {
            break true;
        }
        if sweeps >= settings.gs_max_iterations {
            break false;
        }
        for k in 0..n {
            if sys.kind[k] == BusKind::Slack {
                continue;
            }
            let mut others = Complex64::default();
            for &(j, y) in sys.ybus.row(k) {
                if j != k {
                    others += y * v[j];
                }
            }
            let s = if sys.kind[k] == BusKind::Pv {
                let q = (v[k] * (diag[k] * v[k] + others).conj()).im;
                Complex64::new(sys.p_spec(k), q)
            } else {
                Complex64::new(sys.p_spec(k), sys.q_spec(k))
            };
            let updated = (s.conj() / v[k].conj() - others) / diag[k];
            v[k] = if sys.kind[k] == BusKind::Pv {
                updated * (sys.v_set[k] / updated.norm())
            } else {
                v[k] + alpha * (updated - v[k])
            };
        }
        sweeps += 1;
    };
    Ok(sys.solution(Method::GaussSeidel, to_state(&v, sweeps), converged, trace, Vec::new()))
}

fn to_state(v: &[Complex64], iteration: usize) -> PowerFlowState {
    PowerFlowState {
        vm: v.iter().map(|x| x.norm()).collect(),
        va: v.iter().map(|x| x.arg()).collect(),
        iteration,
    }
}

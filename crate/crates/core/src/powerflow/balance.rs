use num_complex::Complex64;
use serde::Serialize;

use super::ybus::branch_stamp;
use super::{injected_power, IslandSystem, PowerFlowSolution, SolveError};
use crate::network::{BusKind, NetworkModel};

/// Post-solve power accounting for one island, per unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BalanceCheck {
    /// Worst |specified − recomputed| over the solved unknowns.
    pub worst_residual: f64,
    pub slack_generation_p: f64,
    /// Σ load + branch losses − Σ non-slack generation.
    pub expected_slack_p: f64,
    pub total_generation_p: f64,
    pub total_load_p: f64,
    pub branch_losses_p: f64,
}

impl BalanceCheck {
    /// Generation minus (load + losses).
    pub fn conservation_error(&self) -> f64 {
        self.total_generation_p - self.total_load_p - self.branch_losses_p
    }
}

/// Losses summed branch by branch from terminal flows `S = V · conj(I)`.
pub fn branch_losses(model: &NetworkModel, solution: &PowerFlowSolution) -> Complex64 {
    let mut total = Complex64::default();
    for br in &model.branches {
        let (Some(vf), Some(vt)) = (solution.voltage(br.from), solution.voltage(br.to)) else {
            continue;
        };
        if br.is_ideal_merge() {
            continue;
        }
        let vf = Complex64::from_polar(vf.vm, vf.va);
        let vt = Complex64::from_polar(vt.vm, vt.va);
        let [ff, ft, tf, tt] = branch_stamp(br.series_impedance, br.shunt_admittance, br.tap_ratio);
        let i_f = ff * vf + ft * vt;
        let i_t = tf * vf + tt * vt;
        total += vf * i_f.conj() + vt * i_t.conj();
    }
    total
}

pub fn power_balance_residual(solution: &PowerFlowSolution, model: &NetworkModel) -> Result<BalanceCheck, SolveError> {
    let mut sys = IslandSystem::new(model, &solution.island)?;
    for &k in &solution.pv_to_pq {
        sys.kind[k] = BusKind::Pq;
    }
    let (p, q) = injected_power(&solution.state, &sys.ybus);
    let layout = sys.layout();
    let mut worst = 0.0_f64;
    for &k in &layout.angle_nodes {
        worst = worst.max((sys.p_spec(k) - p[k]).abs());
    }
    for &k in &layout.magnitude_nodes {
        if !solution.pv_to_pq.contains(&k) {
            worst = worst.max((sys.q_spec(k) - q[k]).abs());
        }
    }
    let s = sys.slack;
    let slack_generation_p = p[s] + sys.p_load[s];
    let total_load_p: f64 = sys.p_load.iter().sum();
    let other_gen: f64 = (0..sys.len()).filter(|&k| k != s).map(|k| sys.p_gen[k]).sum();
    let losses = branch_losses(model, solution).re;
    Ok(BalanceCheck {
        worst_residual: worst,
        slack_generation_p,
        expected_slack_p: total_load_p + losses - other_gen,
        total_generation_p: slack_generation_p + other_gen,
        total_load_p,
        branch_losses_p: losses,
    })
}

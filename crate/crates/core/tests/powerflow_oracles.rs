mod common;

use std::time::Instant;

use nca_core::build_network;
use nca_core::powerflow::{
    assemble_jacobian, build_ybus, injected_power, power_balance_residual, solve_network, IslandSystem, Method,
    PowerFlowState, SolverSettings,
};
use nca_core::topology::connected_islands;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{fixture, random_radial, two_bus};

/// Damped fixed point `V2 ← V1 − z·conj(S/V2)` for a load `s` behind `z`.
fn fixed_point_v2(s: Complex64, z: Complex64) -> Complex64 {
    let mut v = Complex64::new(1.0, 0.0);
    for _ in 0..100_000 {
        let next = Complex64::new(1.0, 0.0) - z * (s / v).conj();
        let step = next - v;
        v += 0.5 * step;
        if step.norm() < 1e-13 {
            break;
        }
    }
    v
}

fn bus_vm_va(model: &nca_core::NetworkModel, sol: &nca_core::powerflow::NetworkSolution, id: &str) -> (f64, f64) {
    let b = sol.buses[model.bus_index(id).unwrap()];
    (b.vm, b.va)
}

#[test]
fn two_bus_case_a_matches_fixed_point() {
    let model = build_network(&two_bus(30.0, 10.0)).unwrap();
    let settings = SolverSettings::default();
    let t = Instant::now();
    let sol = solve_network(&model, &settings, Method::NewtonRaphson);
    let elapsed = t.elapsed();
    assert!(sol.converged());

    let oracle = fixed_point_v2(Complex64::new(0.3, 0.1), Complex64::new(0.0, 0.1));
    let (vm, va) = bus_vm_va(&model, &sol, "B2");
    assert!((vm - oracle.norm()).abs() < 1e-6, "{vm} vs {}", oracle.norm());
    assert!((va - oracle.arg()).abs() < 1e-6);
    // Loose sanity on the quoted digits.
    assert!((vm - 0.989).abs() < 5e-4);
    assert!((va.to_degrees() + 1.74).abs() < 5e-3);
    assert!(elapsed.as_millis() < 10, "{elapsed:?}");

    let gs = solve_network(&model, &settings, Method::GaussSeidel);
    let (gvm, _) = bus_vm_va(&model, &gs, "B2");
    assert!((gvm - oracle.norm()).abs() < 1e-5);

    let island = &sol.islands[0];
    let s = island.solution.as_ref().unwrap();
    let k = s.node_buses.iter().position(|n| n.contains(&model.bus_index("B2").unwrap())).unwrap();
    assert!((s.p_injection[k] + 0.3).abs() < 1e-6);
    assert!((s.q_injection[k] + 0.1).abs() < 1e-6);
}

#[test]
fn transfer_beyond_limit_diverges() {
    let (p, q, x) = (6.0, 0.0, 0.1);
    // No |V2| in (0, 1.2] admits an angle satisfying both balance equations:
    // sin δ = p·x/V2 and cos δ = (V2² + q·x)/V2 must lie on the unit circle.
    let mut closest = f64::INFINITY;
    let mut v2: f64 = 1e-4;
    while v2 <= 1.2 {
        let s = p * x / v2;
        let c = (v2 * v2 + q * x) / v2;
        closest = closest.min((s * s + c * c - 1.0).abs());
        v2 += 1e-4;
    }
    assert!(closest > 0.1, "a fixed point might exist: {closest}");

    let model = build_network(&two_bus(600.0, 0.0)).unwrap();
    let sol = solve_network(&model, &SolverSettings::default(), Method::NewtonRaphson);
    assert!(!sol.converged());
}

#[test]
fn zero_load_network_needs_no_update() {
    let model = build_network(&two_bus(0.0, 0.0)).unwrap();
    for method in [Method::NewtonRaphson, Method::GaussSeidel] {
        let sol = solve_network(&model, &SolverSettings::default(), method);
        assert!(sol.converged());
        assert_eq!(sol.total_iterations(), 0);
        for b in &sol.buses {
            assert_eq!((b.vm, b.va), (1.0, 0.0));
        }
    }
}

fn fd_check(sys: &IslandSystem, state: &PowerFlowState) -> f64 {
    let layout = sys.layout();
    let jac = assemble_jacobian(state, &sys.ybus, &layout);
    let h = 1e-6;
    let rows: Vec<(bool, usize)> = layout
        .angle_nodes
        .iter()
        .map(|&k| (true, k))
        .chain(layout.magnitude_nodes.iter().map(|&k| (false, k)))
        .collect();
    let mut worst = 0.0_f64;
    for (col, &(is_angle, k)) in rows.iter().enumerate() {
        let shifted = |d: f64| {
            let mut s = state.clone();
            if is_angle {
                s.va[k] += d;
            } else {
                s.vm[k] += d;
            }
            injected_power(&s, &sys.ybus)
        };
        let (pp, qp) = shifted(h);
        let (pm, qm) = shifted(-h);
        for (row, &(p_row, i)) in rows.iter().enumerate() {
            let fd = if p_row { (pp[i] - pm[i]) / (2.0 * h) } else { (qp[i] - qm[i]) / (2.0 * h) };
            let an = jac.matrix[(row, col)];
            // Relative to the entry, or to 1 pu for entries near zero.
            worst = worst.max((an - fd).abs() / fd.abs().max(1.0));
        }
    }
    worst
}

fn random_state(rng: &mut ChaCha8Rng, n: usize) -> PowerFlowState {
    PowerFlowState {
        vm: (0..n).map(|_| rng.random_range(0.9..1.1)).collect(),
        va: (0..n).map(|_| rng.random_range(-0.3..0.3)).collect(),
        iteration: 0,
    }
}

#[test]
fn jacobian_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (model, _) = fixture();
    let island = connected_islands(&model).into_iter().find(|i| i.energized).unwrap();
    let fixture_sys = IslandSystem::new(&model, &island).unwrap();
    for trial in 0..20 {
        let worst = if trial % 2 == 0 {
            fd_check(&fixture_sys, &random_state(&mut rng, fixture_sys.len()))
        } else {
            let m = build_network(&random_radial(trial, 12)).unwrap();
            let isl = connected_islands(&m).remove(0);
            let sys = IslandSystem::new(&m, &isl).unwrap();
            fd_check(&sys, &random_state(&mut rng, sys.len()))
        };
        assert!(worst <= 1e-5, "trial {trial}: relative error {worst}");
    }
}

#[test]
fn reactive_network_has_zero_j2_at_flat_start() {
    let model = build_network(&random_radial(3, 6)).unwrap();
    let mut spec = random_radial(3, 6);
    for br in &mut spec.branches {
        br.r_pu = 0.0;
        br.g_sh_pu = 0.0;
    }
    let reactive = build_network(&spec).unwrap();
    assert_ne!(model, reactive);
    let island = connected_islands(&reactive).remove(0);
    let sys = IslandSystem::new(&reactive, &island).unwrap();
    let jac = assemble_jacobian(&PowerFlowState::flat(sys.len()), &sys.ybus, &sys.layout());
    assert!(jac.j2().iter().all(|v| v.abs() < 1e-12));
    assert_eq!(jac.matrix.nrows(), sys.layout().dim());
}

fn assert_nr_matches_gs(model: &nca_core::NetworkModel, label: &str) {
    let settings = SolverSettings {
        gs_max_iterations: 20_000,
        ..SolverSettings::default()
    };
    let nr = solve_network(model, &settings, Method::NewtonRaphson);
    let gs = solve_network(model, &settings, Method::GaussSeidel);
    assert!(nr.converged(), "{label}: NR diverged");
    assert!(gs.converged(), "{label}: GS diverged");
    for (k, (a, b)) in nr.buses.iter().zip(&gs.buses).enumerate() {
        assert_eq!(a.energized, b.energized);
        assert!((a.vm - b.vm).abs() <= 1e-4, "{label}: bus {} vm {} vs {}", model.buses[k].id, a.vm, b.vm);
        assert!(
            (a.va - b.va).abs().to_degrees() <= 0.01,
            "{label}: bus {} va {} vs {}",
            model.buses[k].id,
            a.va,
            b.va
        );
    }
}

#[test]
fn newton_agrees_with_gauss_seidel_on_fixture() {
    let (model, _) = fixture();
    assert_nr_matches_gs(&model, "fixture");
}

#[test]
fn newton_agrees_with_gauss_seidel_on_random_radials() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for seed in 0..50 {
        let n = rng.random_range(2..=20);
        let model = build_network(&random_radial(seed, n)).unwrap();
        assert_nr_matches_gs(&model, &format!("radial seed {seed}, {n} buses"));
    }
}

#[test]
fn generation_equals_load_plus_losses() {
    let (model, study) = fixture();
    let settings = SolverSettings::default();
    let mut models = vec![model.clone()];
    for c in &study.contingencies {
        models.push(nca_core::contingency::apply_contingency(&model, c).unwrap().model);
    }
    let mut checked = 0;
    for m in &models {
        let sol = solve_network(m, &settings, Method::NewtonRaphson);
        for outcome in sol.islands.iter().filter_map(|i| i.solution.as_ref()).filter(|s| s.converged) {
            let b = power_balance_residual(outcome, m).unwrap();
            assert!(b.worst_residual <= settings.tolerance, "{}", b.worst_residual);
            assert!(b.conservation_error().abs() <= 1e-5, "{}", b.conservation_error());
            assert!((b.slack_generation_p - b.expected_slack_p).abs() <= 1e-5);
            // Injection sum and branch-by-branch accounting agree.
            assert!((outcome.losses.re - b.branch_losses_p).abs() <= 1e-9);
            assert!(b.branch_losses_p >= 0.0);
            checked += 1;
        }
    }
    assert!(checked >= models.len());
}

#[test]
fn perturbed_state_breaks_balance() {
    let (model, _) = fixture();
    let settings = SolverSettings::default();
    let sol = solve_network(&model, &settings, Method::NewtonRaphson);
    let mut s = sol.islands[0].solution.clone().unwrap();
    let sys = IslandSystem::new(&model, &s.island).unwrap();
    let pq = sys.layout().magnitude_nodes[0];
    s.state.vm[pq] += 0.01;
    let b = power_balance_residual(&s, &model).unwrap();
    assert!(b.worst_residual > settings.tolerance);
}

#[test]
fn fixture_ybus_equals_sum_of_branch_stamps() {
    let (model, _) = fixture();
    for island in connected_islands(&model).into_iter().filter(|i| i.energized) {
        let sys = IslandSystem::new(&model, &island).unwrap();
        let n = sys.len();
        let mut dense = vec![vec![Complex64::default(); n]; n];
        for br in &model.branches {
            let (Some(&f), Some(&t)) = (sys.nodes.node_of.get(&br.from), sys.nodes.node_of.get(&br.to)) else {
                continue;
            };
            if br.series_impedance.norm() == 0.0 {
                continue;
            }
            // π-model with the off-nominal tap on the from side.
            let y = Complex64::new(1.0, 0.0) / br.series_impedance;
            let ysh = br.shunt_admittance / 2.0;
            let a = br.tap_ratio;
            let local = [[(y + ysh) / (a * a), -y / a], [-y / a, y + ysh]];
            let idx = [f, t];
            for r in 0..2 {
                for c in 0..2 {
                    dense[idx[r]][idx[c]] += local[r][c];
                }
            }
        }
        let ybus = build_ybus(&model, &island).unwrap();
        let got = ybus.to_dense();
        let scale = dense.iter().flatten().map(|v| v.norm()).fold(1.0, f64::max);
        for i in 0..n {
            for j in 0..n {
                assert!((got[i][j] - dense[i][j]).norm() <= 1e-12 * scale, "({i},{j})");
            }
        }
    }
}

#[test]
fn voltage_falls_monotonically_with_load() {
    let (net, _) = nca_core::reference_network();
    let mut spec = net.clone();
    let idx = spec.loads.iter().position(|l| l.bus == "600V Load Center 2W").expect("load on LC 2W");
    let p0 = spec.loads[idx].p_mw;
    let mut last = f64::INFINITY;
    for step in 0..12 {
        spec.loads[idx].p_mw = p0 * (1.0 + 0.25 * step as f64);
        let model = build_network(&spec).unwrap();
        let sol = solve_network(&model, &SolverSettings::default(), Method::NewtonRaphson);
        assert!(sol.converged());
        let vm = sol.buses[model.bus_index("600V Load Center 2W").unwrap()].vm;
        assert!(vm <= last + 1e-12, "step {step}: {vm} > {last}");
        last = vm;
    }
}

#[test]
fn iteration_trace_is_bit_identical() {
    let (model, _) = fixture();
    let settings = SolverSettings::default();
    let a = solve_network(&model, &settings, Method::NewtonRaphson);
    let b = solve_network(&model, &settings, Method::NewtonRaphson);
    for (x, y) in a.islands.iter().zip(&b.islands) {
        let (x, y) = (x.solution.as_ref(), y.solution.as_ref());
        assert_eq!(x.map(|s| s.trace.iter().map(|v| v.to_bits()).collect::<Vec<_>>()), y.map(|s| s.trace.iter().map(|v| v.to_bits()).collect::<Vec<_>>()));
    }
    assert_eq!(a, b);
}

//! Polar-form nodal injections and their Jacobian.
//!
//! With `Y_ij = |Y_ij|∠θ_ij` and `V_i = |V_i|∠δ_i`:
//!
//! ```text
//! P_i =  Σ_j |V_i||V_j||Y_ij| cos(θ_ij − δ_i + δ_j)
//! Q_i = −Σ_j |V_i||V_j||Y_ij| sin(θ_ij − δ_i + δ_j)
//! ```

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::ybus::AdmittanceMatrix;

/// Node voltages during iteration; `iteration` is the update count so far.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerFlowState {
    pub vm: Vec<f64>,
    pub va: Vec<f64>,
    pub iteration: usize,
}

impl PowerFlowState {
    pub fn flat(n: usize) -> Self {
        Self {
            vm: vec![1.0; n],
            va: vec![0.0; n],
            iteration: 0,
        }
    }

    pub fn complex(&self) -> Vec<num_complex::Complex64> {
        self.vm
            .iter()
            .zip(&self.va)
            .map(|(&m, &a)| num_complex::Complex64::from_polar(m, a))
            .collect()
    }
}

pub fn injected_power(state: &PowerFlowState, ybus: &AdmittanceMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = ybus.dim();
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    for i in 0..n {
        for &(j, y) in ybus.row(i) {
            let (mag, theta) = y.to_polar();
            let arg = theta - state.va[i] + state.va[j];
            let k = state.vm[i] * state.vm[j] * mag;
            p[i] += k * arg.cos();
            q[i] -= k * arg.sin();
        }
    }
    (p, q)
}

/// Which nodes carry unknowns: angles for every non-slack node, magnitudes
/// for pq nodes only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableLayout {
    pub angle_nodes: Vec<usize>,
    pub magnitude_nodes: Vec<usize>,
}

impl VariableLayout {
    pub fn dim(&self) -> usize {
        self.angle_nodes.len() + self.magnitude_nodes.len()
    }
}

/// Full Newton Jacobian with blocks `[[J1, J2], [J3, J4]]`:
/// `J1 = ∂P/∂δ`, `J2 = ∂P/∂|V|`, `J3 = ∂Q/∂δ`, `J4 = ∂Q/∂|V|`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jacobian {
    pub matrix: DMatrix<f64>,
    pub n_angle: usize,
    pub n_magnitude: usize,
}

impl Jacobian {
    pub fn j1(&self) -> DMatrix<f64> {
        self.matrix.view((0, 0), (self.n_angle, self.n_angle)).into_owned()
    }
    pub fn j2(&self) -> DMatrix<f64> {
        self.matrix.view((0, self.n_angle), (self.n_angle, self.n_magnitude)).into_owned()
    }
    pub fn j3(&self) -> DMatrix<f64> {
        self.matrix.view((self.n_angle, 0), (self.n_magnitude, self.n_angle)).into_owned()
    }
    pub fn j4(&self) -> DMatrix<f64> {
        self.matrix
            .view((self.n_angle, self.n_angle), (self.n_magnitude, self.n_magnitude))
            .into_owned()
    }

    /// Solves `J x = rhs` by LU with partial pivoting.
    pub fn solve(&self, rhs: &DVector<f64>) -> Option<DVector<f64>> {
        let x = self.matrix.clone().lu().solve(rhs)?;
        x.iter().all(|v| v.is_finite()).then_some(x)
    }
}

/// Dense partial derivatives of all node injections `(dP/dδ, dP/d|V|, dQ/dδ, dQ/d|V|)`.
fn node_partials(state: &PowerFlowState, ybus: &AdmittanceMatrix) -> [DMatrix<f64>; 4] {
    let n = ybus.dim();
    let mut dp_da = DMatrix::zeros(n, n);
    let mut dp_dv = DMatrix::zeros(n, n);
    let mut dq_da = DMatrix::zeros(n, n);
    let mut dq_dv = DMatrix::zeros(n, n);
    let (vm, va) = (&state.vm, &state.va);
    for i in 0..n {
        for &(j, y) in ybus.row(i) {
            let (mag, theta) = y.to_polar();
            if i == j {
                dp_dv[(i, i)] += 2.0 * vm[i] * mag * theta.cos();
                dq_dv[(i, i)] -= 2.0 * vm[i] * mag * theta.sin();
                continue;
            }
            let arg = theta - va[i] + va[j];
            let (s, c) = arg.sin_cos();
            let vv = vm[i] * vm[j] * mag;
            dp_da[(i, j)] = -vv * s;
            dp_da[(i, i)] += vv * s;
            dq_da[(i, j)] = -vv * c;
            dq_da[(i, i)] += vv * c;
            dp_dv[(i, j)] = vm[i] * mag * c;
            dp_dv[(i, i)] += vm[j] * mag * c;
            dq_dv[(i, j)] = -vm[i] * mag * s;
            dq_dv[(i, i)] -= vm[j] * mag * s;
        }
    }
    [dp_da, dp_dv, dq_da, dq_dv]
}

pub fn assemble_jacobian(state: &PowerFlowState, ybus: &AdmittanceMatrix, layout: &VariableLayout) -> Jacobian {
    let [dp_da, dp_dv, dq_da, dq_dv] = node_partials(state, ybus);
    let (na, nm) = (layout.angle_nodes.len(), layout.magnitude_nodes.len());
    let mut m = DMatrix::zeros(na + nm, na + nm);
    for (r, &i) in layout.angle_nodes.iter().enumerate() {
        for (c, &j) in layout.angle_nodes.iter().enumerate() {
            m[(r, c)] = dp_da[(i, j)];
        }
        for (c, &j) in layout.magnitude_nodes.iter().enumerate() {
            m[(r, na + c)] = dp_dv[(i, j)];
        }
    }
    for (r, &i) in layout.magnitude_nodes.iter().enumerate() {
        for (c, &j) in layout.angle_nodes.iter().enumerate() {
            m[(na + r, c)] = dq_da[(i, j)];
        }
        for (c, &j) in layout.magnitude_nodes.iter().enumerate() {
            m[(na + r, na + c)] = dq_dv[(i, j)];
        }
    }
    Jacobian {
        matrix: m,
        n_angle: na,
        n_magnitude: nm,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn line(z: Complex64) -> AdmittanceMatrix {
        let y = z.inv();
        AdmittanceMatrix::from_triplets(2, [(0, 0, y), (0, 1, -y), (1, 0, -y), (1, 1, y)])
    }

    #[test]
    fn flat_lossless_line_has_no_injection() {
        let (p, q) = injected_power(&PowerFlowState::flat(2), &line(Complex64::new(0.0, 0.1)));
        for v in p.iter().chain(&q) {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn jacobian_dimension_counts_unknowns() {
        let y = AdmittanceMatrix::from_triplets(
            3,
            [
                (0, 0, Complex64::new(0.0, -20.0)),
                (0, 1, Complex64::new(0.0, 10.0)),
                (1, 0, Complex64::new(0.0, 10.0)),
                (1, 1, Complex64::new(0.0, -20.0)),
                (1, 2, Complex64::new(0.0, 10.0)),
                (2, 1, Complex64::new(0.0, 10.0)),
                (2, 2, Complex64::new(0.0, -10.0)),
                (0, 2, Complex64::new(0.0, 0.0)),
            ],
        );
        let layout = VariableLayout {
            angle_nodes: vec![1, 2],
            magnitude_nodes: vec![1, 2],
        };
        let j = assemble_jacobian(&PowerFlowState::flat(3), &y, &layout);
        assert_eq!(j.matrix.shape(), (4, 4));
        // Purely reactive network at flat start: ∂P/∂|V| vanishes.
        assert!(j.j2().iter().all(|v| v.abs() < 1e-12));
    }
}

//! Bus admittance matrix in row-compressed sparse form.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::SolveError;
use crate::network::NetworkModel;
use crate::topology::{merge_nodes, Island, NodeMap};

/// Square complex matrix stored row-wise; each row holds `(column, value)`
/// pairs sorted by column.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmittanceMatrix {
    rows: Vec<Vec<(usize, Complex64)>>,
}

impl AdmittanceMatrix {
    pub fn from_triplets(n: usize, triplets: impl IntoIterator<Item = (usize, usize, Complex64)>) -> Self {
        let mut acc: Vec<BTreeMap<usize, Complex64>> = vec![BTreeMap::new(); n];
        for (i, j, v) in triplets {
            *acc[i].entry(j).or_default() += v;
        }
        Self {
            rows: acc.into_iter().map(|r| r.into_iter().collect()).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &[(usize, Complex64)] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.rows[i]
            .binary_search_by_key(&j, |&(c, _)| c)
            .map(|k| self.rows[i][k].1)
            .unwrap_or_default()
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// `Y * v`.
    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(j, y)| y * v[j]).sum())
            .collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        let n = self.dim();
        let mut out = vec![vec![Complex64::default(); n]; n];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, y) in row {
                out[i][j] = y;
            }
        }
        out
    }
}

/// Four stamp entries `(ff, ft, tf, tt)` of one branch.
pub(crate) fn branch_stamp(z: Complex64, shunt: Complex64, tap: f64) -> [Complex64; 4] {
    let y = z.inv();
    let half = shunt * 0.5;
    [(y + half) / (tap * tap), -y / tap, -y / tap, y + half]
}

/// Stamps every in-island branch onto the island's merged nodes.
pub fn build_ybus_on_nodes(model: &NetworkModel, nodes: &NodeMap) -> Result<AdmittanceMatrix, SolveError> {
    let mut triplets = Vec::new();
    for br in &model.branches {
        let (Some(&f), Some(&t)) = (nodes.node_of.get(&br.from), nodes.node_of.get(&br.to)) else {
            continue;
        };
        if br.is_ideal_merge() {
            continue;
        }
        if br.series_impedance.norm() == 0.0 {
            return Err(SolveError::ZeroImpedance(br.id.clone()));
        }
        let [ff, ft, tf, tt] = branch_stamp(br.series_impedance, br.shunt_admittance, br.tap_ratio);
        if f == t {
            triplets.push((f, f, ff + ft + tf + tt));
        } else {
            triplets.extend([(f, f, ff), (f, t, ft), (t, f, tf), (t, t, tt)]);
        }
    }
    Ok(AdmittanceMatrix::from_triplets(nodes.nodes.len(), triplets))
}

pub fn build_ybus(model: &NetworkModel, island: &Island) -> Result<AdmittanceMatrix, SolveError> {
    let nodes = merge_nodes(model, island);
    build_ybus_on_nodes(model, &nodes)
}

//! Breaker-aware topology processing: island detection and supernode merging.

use std::collections::HashMap;

use crate::network::{BusKind, NetworkModel};

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// A connected group of buses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Island {
    /// Bus indices, sorted by bus id.
    pub buses: Vec<usize>,
    pub energized: bool,
}

impl Island {
    pub fn bus_ids<'a>(&self, model: &'a NetworkModel) -> Vec<&'a str> {
        self.buses.iter().map(|&b| model.buses[b].id.as_str()).collect()
    }

    pub fn contains(&self, bus: usize) -> bool {
        self.buses.contains(&bus)
    }
}

/// Groups `members` by disjoint-set root, each group sorted by bus id and
/// groups ordered by their smallest bus id.
fn grouped(model: &NetworkModel, members: impl Iterator<Item = usize>, set: &mut DisjointSet) -> Vec<Vec<usize>> {
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for b in members {
        groups.entry(set.find(b)).or_default().push(b);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    for g in &mut out {
        g.sort_by(|&a, &b| model.buses[a].id.cmp(&model.buses[b].id));
    }
    out.sort_by(|a, b| model.buses[a[0]].id.cmp(&model.buses[b[0]].id));
    out
}

/// Islands over all branches plus closed breakers; an island is energized
/// when it holds a slack or pv bus.
pub fn connected_islands(model: &NetworkModel) -> Vec<Island> {
    let mut set = DisjointSet::new(model.buses.len());
    for br in &model.branches {
        set.union(br.from, br.to);
    }
    for bk in model.breakers.iter().filter(|b| b.is_closed()) {
        set.union(bk.from, bk.to);
    }
    grouped(model, 0..model.buses.len(), &mut set)
        .into_iter()
        .map(|buses| {
            let energized = buses
                .iter()
                .any(|&b| matches!(model.buses[b].kind, BusKind::Slack | BusKind::Pv));
            Island { buses, energized }
        })
        .collect()
}

/// Electrical nodes of an island after merging closed breakers and ideal
/// (zero-impedance source) connections.
#[derive(Debug, Clone)]
pub struct NodeMap {
    /// Buses per node, node order by smallest bus id.
    pub nodes: Vec<Vec<usize>>,
    /// Bus index to node index, restricted to the island.
    pub node_of: HashMap<usize, usize>,
}

pub fn merge_nodes(model: &NetworkModel, island: &Island) -> NodeMap {
    let mut set = DisjointSet::new(model.buses.len());
    for bk in model.breakers.iter().filter(|b| b.is_closed()) {
        if island.contains(bk.from) {
            set.union(bk.from, bk.to);
        }
    }
    for br in model.branches.iter().filter(|b| b.is_ideal_merge()) {
        if island.contains(br.from) {
            set.union(br.from, br.to);
        }
    }
    let nodes = grouped(model, island.buses.iter().copied(), &mut set);
    let node_of = nodes
        .iter()
        .enumerate()
        .flat_map(|(n, buses)| buses.iter().map(move |&b| (b, n)))
        .collect();
    NodeMap { nodes, node_of }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{build_network, SwitchAction};
    use crate::study_io::network_file::parse_network_file;

    fn model() -> NetworkModel {
        let doc = r#"{
          "base_mva": 100,
          "buses": [
            {"id": "S", "nominal_kv": 4.16, "kind": "slack", "category": "switchgear"},
            {"id": "A", "nominal_kv": 4.16, "kind": "pq", "category": "switchgear"},
            {"id": "B", "nominal_kv": 4.16, "kind": "pq", "category": "load-center"},
            {"id": "C", "nominal_kv": 4.16, "kind": "pq", "category": "load-center"}
          ],
          "branches": [{"id": "L1", "from": "S", "to": "A", "r_pu": 0.01, "x_pu": 0.1, "kind": "line"}],
          "breakers": [
            {"id": "K1", "from": "A", "to": "B", "normal_state": "closed"},
            {"id": "K2", "from": "B", "to": "C", "normal_state": "open"}
          ]
        }"#;
        build_network(&parse_network_file(doc.as_bytes()).unwrap()).unwrap()
    }

    #[test]
    fn open_breaker_splits_island() {
        let m = model();
        let islands = connected_islands(&m);
        assert_eq!(islands.len(), 2);
        assert_eq!(islands[0].bus_ids(&m), vec!["A", "B", "S"]);
        assert!(islands[0].energized);
        assert_eq!(islands[1].bus_ids(&m), vec!["C"]);
        assert!(!islands[1].energized);
    }

    #[test]
    fn closing_joins() {
        let m = model().apply_switching(&[SwitchAction::Close("K2".into())]).unwrap();
        let islands = connected_islands(&m);
        assert_eq!(islands.len(), 1);
        let nodes = merge_nodes(&m, &islands[0]);
        // A, B, C merge through breakers; S stays separate behind L1.
        assert_eq!(nodes.nodes.len(), 2);
    }

    #[test]
    fn switching_identity_and_involution() {
        let m = model();
        assert_eq!(m.apply_switching(&[]).unwrap(), m);
        let back = m
            .apply_switching(&[SwitchAction::Close("K1".into()), SwitchAction::Open("K1".into())])
            .unwrap();
        assert_ne!(back, m);
        let round = m
            .apply_switching(&[SwitchAction::Open("K1".into()), SwitchAction::Close("K1".into())])
            .unwrap();
        assert_eq!(round, m);
        assert!(m.apply_switching(&[SwitchAction::Open("nope".into())]).is_err());
    }

    #[test]
    fn partition_covers_every_bus_once() {
        let m = model();
        let mut all: Vec<usize> = connected_islands(&m).into_iter().flat_map(|i| i.buses).collect();
        all.sort();
        assert_eq!(all, vec![0, 1, 2, 3]);
    }
}

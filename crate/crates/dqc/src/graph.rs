//! Open graphs with a flow.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{DqcError, Result};

/// An undirected simple graph with inputs, outputs and a flow `f` on the
/// computation vertices.
///
/// The flow domain is the set of vertices the flow touches (inputs, outputs
/// and both ends of every flow edge). Vertices outside it carry no
/// computation; they are measured before anything else.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GraphSpec {
    vertices: usize,
    edges: BTreeSet<(usize, usize)>,
    inputs: Vec<usize>,
    outputs: Vec<usize>,
    flow: BTreeMap<usize, usize>,
    order: Vec<usize>,
}

fn graph_err(msg: impl Into<String>) -> DqcError {
    DqcError::Graph(msg.into())
}

impl GraphSpec {
    pub fn new(
        vertices: usize,
        edges: &[(usize, usize)],
        inputs: &[usize],
        outputs: &[usize],
        flow: &[(usize, usize)],
    ) -> Result<Self> {
        let mut edge_set = BTreeSet::new();
        for &(a, b) in edges {
            if a >= vertices || b >= vertices {
                return Err(graph_err(format!("edge ({a}, {b}) leaves the vertex range")));
            }
            if a == b {
                return Err(graph_err(format!("self-loop at {a}")));
            }
            if !edge_set.insert((a.min(b), a.max(b))) {
                return Err(graph_err(format!("duplicate edge ({a}, {b})")));
            }
        }
        for &v in inputs.iter().chain(outputs) {
            if v >= vertices {
                return Err(graph_err(format!("vertex {v} out of range")));
            }
        }
        let mut successors = BTreeMap::new();
        let mut seen_targets = BTreeSet::new();
        for &(i, j) in flow {
            if !edge_set.contains(&(i.min(j), i.max(j))) {
                return Err(graph_err(format!("flow edge {i} → {j} is not a graph edge")));
            }
            if successors.insert(i, j).is_some() || !seen_targets.insert(j) {
                return Err(graph_err(format!("flow is not an injective function at {i} → {j}")));
            }
            if outputs.contains(&i) {
                return Err(graph_err(format!("output {i} has a flow successor")));
            }
            if inputs.contains(&j) {
                return Err(graph_err(format!("input {j} has a flow predecessor")));
            }
        }
        let mut graph = GraphSpec {
            vertices,
            edges: edge_set,
            inputs: inputs.to_vec(),
            outputs: outputs.to_vec(),
            flow: successors,
            order: Vec::new(),
        };
        let domain = graph.flow_domain();
        if let Some(v) = domain.iter().find(|v| !graph.outputs.contains(v) && !graph.flow.contains_key(v)) {
            return Err(graph_err(format!("non-output {v} has no flow successor")));
        }
        graph.order = graph.topological_order(&domain)?;
        Ok(graph)
    }

    /// Orders the flow domain by `i ≺ f(i)` and `i ≺ k` for `k ∈ N(f(i)) \ {i}`,
    /// smallest index first among ready vertices.
    fn topological_order(&self, domain: &BTreeSet<usize>) -> Result<Vec<usize>> {
        let mut before: BTreeMap<usize, BTreeSet<usize>> = domain.iter().map(|&v| (v, BTreeSet::new())).collect();
        for (&i, &f) in &self.flow {
            before.get_mut(&f).expect("flow target in domain").insert(i);
            for k in self.neighbors(f) {
                if k != i && domain.contains(&k) {
                    before.get_mut(&k).expect("domain vertex").insert(i);
                }
            }
        }
        let mut order: Vec<usize> = (0..self.vertices).filter(|v| !domain.contains(v)).collect();
        let mut done = BTreeSet::new();
        while done.len() < domain.len() {
            let next = domain
                .iter()
                .find(|v| !done.contains(*v) && before[*v].iter().all(|p| done.contains(p)))
                .copied()
                .ok_or_else(|| graph_err("flow order has a cycle"))?;
            done.insert(next);
            order.push(next);
        }
        Ok(order)
    }

    pub fn vertices(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn inputs(&self) -> &[usize] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter_map(move |&(a, b)| match (a == v, b == v) {
            (true, _) => Some(b),
            (_, true) => Some(a),
            _ => None,
        })
    }

    pub fn successor(&self, v: usize) -> Option<usize> {
        self.flow.get(&v).copied()
    }

    pub fn predecessor(&self, v: usize) -> Option<usize> {
        self.flow.iter().find_map(|(&i, &f)| (f == v).then_some(i))
    }

    pub fn flow_domain(&self) -> BTreeSet<usize> {
        let mut d: BTreeSet<usize> = self.inputs.iter().chain(&self.outputs).copied().collect();
        for (&i, &f) in &self.flow {
            d.insert(i);
            d.insert(f);
        }
        d
    }

    /// Every vertex, in a measurement order compatible with the flow.
    pub fn measurement_order(&self) -> &[usize] {
        &self.order
    }

    /// Vertices `j` whose outcome induces a `Z` byproduct on `v`: those with
    /// `v ∈ N(f(j)) \ {j}`.
    pub fn z_dependencies(&self, v: usize) -> Vec<usize> {
        self.flow.iter().filter(|&(&j, &f)| j != v && self.adjacent(f, v)).map(|(&j, _)| j).collect()
    }

    /// Same graph with the vertices in `keep` relabelled `0..keep.len()` in
    /// the given order; flow edges are kept when both ends survive.
    pub fn induced(&self, keep: &[usize]) -> Result<GraphSpec> {
        let index = |v: usize| keep.iter().position(|&k| k == v);
        let edges: Vec<_> = self.edges().filter_map(|(a, b)| Some((index(a)?, index(b)?))).collect();
        let inputs: Vec<_> = self.inputs.iter().filter_map(|&v| index(v)).collect();
        let outputs: Vec<_> = self.outputs.iter().filter_map(|&v| index(v)).collect();
        let flow: Vec<_> = self.flow.iter().filter_map(|(&i, &f)| Some((index(i)?, index(f)?))).collect();
        GraphSpec::new(keep.len(), &edges, &inputs, &outputs, &flow)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_flow_orders_left_to_right() {
        let g = GraphSpec::new(3, &[(0, 1), (1, 2)], &[0], &[2], &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(g.measurement_order(), [0, 1, 2]);
        assert_eq!(g.z_dependencies(2), [0]);
        assert_eq!(g.predecessor(2), Some(1));
    }

    #[test]
    fn vertices_outside_the_flow_go_first() {
        let g = GraphSpec::new(5, &[(0, 1), (1, 2), (2, 3), (3, 4)], &[0], &[2], &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(g.measurement_order(), [3, 4, 0, 1, 2]);
    }

    #[test]
    fn rejects_malformed_graphs() {
        assert!(GraphSpec::new(2, &[(0, 0)], &[], &[], &[]).is_err());
        assert!(GraphSpec::new(2, &[(0, 1), (1, 0)], &[], &[], &[]).is_err());
        assert!(GraphSpec::new(2, &[(0, 2)], &[], &[], &[]).is_err());
        // flow along a non-edge
        assert!(GraphSpec::new(3, &[(0, 1)], &[0], &[2], &[(0, 2)]).is_err());
        // non-output without successor
        assert!(GraphSpec::new(3, &[(0, 1), (1, 2)], &[0], &[2], &[(0, 1)]).is_err());
    }

    #[test]
    fn rejects_cyclic_order() {
        // triangle: f(0)=1, f(2)=... with N(f(0)) ∋ 2 and N(f(2)) ∋ 0 forces 0 ≺ 2 ≺ 0
        let edges = [(0, 1), (1, 2), (0, 3), (2, 3), (1, 3)];
        assert!(GraphSpec::new(4, &edges, &[0, 2], &[1, 3], &[(0, 1), (2, 3)]).is_err());
    }
}

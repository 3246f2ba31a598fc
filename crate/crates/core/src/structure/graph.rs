use std::collections::BTreeSet;

use super::Structure;

/// A simple undirected graph: symmetric, irreflexive adjacency.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    labels: Vec<String>,
    adjacency: Vec<BTreeSet<usize>>,
}

impl Graph {
    pub fn new(labels: Vec<String>) -> Self {
        let n = labels.len();
        Graph {
            labels,
            adjacency: vec![BTreeSet::new(); n],
        }
    }

    /// Adds `{u, v}`; self-loops are ignored.
    pub fn add_edge(&mut self, u: usize, v: usize) {
        if u != v {
            self.adjacency[u].insert(v);
            self.adjacency[v].insert(u);
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn neighbors(&self, v: usize) -> &BTreeSet<usize> {
        &self.adjacency[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].contains(&v)
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, ns)| ns.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    /// Neighbourhood as a bitmask; only valid for graphs with at most 64 vertices.
    pub fn neighbor_mask(&self, v: usize) -> u64 {
        self.adjacency[v].iter().fold(0, |m, &u| m | (1 << u))
    }
}

/// Vertices are the universe; `a ~ a'` iff they are distinct and occur together
/// in some tuple of some relation.
pub fn gaifman_graph(structure: &Structure) -> Graph {
    let mut g = Graph::new(structure.universe().to_vec());
    for rel in structure.relations() {
        for t in rel.tuples() {
            for (i, &x) in t.iter().enumerate() {
                for &y in &t[i + 1..] {
                    g.add_edge(x, y);
                }
            }
        }
    }
    g
}

//! Small undirected simple graph used for interaction graphs, architecture
//! graphs and move-conflict graphs.

use std::collections::BTreeSet;

/// Undirected simple graph on vertices `0..n`.
///
/// Neighbor lists are kept sorted so that every traversal is deterministic.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Graph {
    adj: Vec<BTreeSet<usize>>,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Self {
            adj: vec![BTreeSet::new(); n],
        }
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut g = Self::new(n);
        for (a, b) in edges {
            g.add_edge(a, b);
        }
        g
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    /// Adds the edge `{a, b}`. Self-loops are ignored. Returns `true` if the
    /// edge was not already present.
    pub fn add_edge(&mut self, a: usize, b: usize) -> bool {
        if a == b {
            return false;
        }
        let fresh = self.adj[a].insert(b);
        self.adj[b].insert(a);
        fresh
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].contains(&b)
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[v].iter().copied()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    /// Edges as `(low, high)` pairs in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(a, ns)| ns.range(a + 1..).map(move |&b| (a, b)))
    }

    /// Vertices with at least one incident edge, ascending.
    pub fn non_isolated(&self) -> Vec<usize> {
        (0..self.node_count()).filter(|&v| self.degree(v) > 0).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edges_are_deduplicated_and_ordered() {
        let mut g = Graph::new(4);
        assert!(g.add_edge(2, 0));
        assert!(!g.add_edge(0, 2));
        assert!(!g.add_edge(3, 3));
        g.add_edge(1, 3);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 2), (1, 3)]);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.non_isolated(), vec![0, 1, 2, 3]);
    }
}

use std::collections::HashMap;

use super::MediaGraph;
use crate::EntityType;

/// Dense, index-addressed snapshot of a [`MediaGraph`]. Nodes are numbered
/// in name order; each adjacency list is sorted by neighbor index.
#[derive(Debug, Clone)]
pub struct GraphView {
    pub names: Vec<String>,
    pub types: Vec<EntityType>,
    pub index: HashMap<String, usize>,
    pub adj: Vec<Vec<(usize, f64)>>,
}

impl GraphView {
    pub fn new(g: &MediaGraph) -> Self {
        let (names, types): (Vec<String>, Vec<EntityType>) = g.nodes().map(|(n, t)| (n.to_string(), t)).unzip();
        let index: HashMap<String, usize> = names.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
        let mut adj = vec![Vec::new(); names.len()];
        for (k, a) in g.edges() {
            let (u, v) = (index[&k.u], index[&k.v]);
            adj[u].push((v, a.weight as f64));
            adj[v].push((u, a.weight as f64));
        }
        for list in &mut adj {
            list.sort_by_key(|&(n, _)| n);
        }
        GraphView {
            names,
            types,
            index,
            adj,
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adj[u].len()
    }

    pub fn weight(&self, u: usize, v: usize) -> Option<f64> {
        let list = &self.adj[u];
        list.binary_search_by_key(&v, |&(n, _)| n).ok().map(|i| list[i].1)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.weight(u, v).is_some()
    }

    pub fn total_weight(&self) -> f64 {
        self.adj.iter().flatten().map(|&(_, w)| w).sum::<f64>() / 2.0
    }

    /// Each undirected edge once, as `(u, v, w)` with `u < v`.
    pub fn edge_list(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (u, list) in self.adj.iter().enumerate() {
            for &(v, w) in list {
                if u < v {
                    out.push((u, v, w));
                }
            }
        }
        out
    }
}

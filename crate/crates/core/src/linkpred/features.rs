use serde::{Deserialize, Serialize};

use super::nn::Matrix;
use crate::analytics::{
    betweenness_raw, eigenvector_raw, leiden_labels, min_max, weighted_degree_raw, EIGEN_MAX_ITER, EIGEN_TOL,
};
use crate::embeddings::EmbeddingTable;
use crate::graph::GraphView;
use crate::{Error, Result};

/// Number of structural scalars appended to each pair vector.
pub const STRUCTURAL_DIM: usize = 5;

/// Per-node structural properties of a training graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeScalars {
    pub entity_type: usize,
    pub community: usize,
    pub weighted_degree: f64,
    pub betweenness: f64,
    pub eigenvector: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuralFeatures {
    /// Indexed like the training graph's [`GraphView`].
    pub nodes: Vec<NodeScalars>,
}

impl StructuralFeatures {
    /// Type, Leiden community and the three min-max normalized centralities.
    pub fn compute(g: &GraphView, seed: u64) -> Self {
        let wd = min_max(&weighted_degree_raw(g));
        let bt = min_max(&betweenness_raw(g));
        let ev = min_max(&eigenvector_raw(g, EIGEN_TOL, EIGEN_MAX_ITER).vector);
        let comm = leiden_labels(g, 1.0, seed);
        let nodes = (0..g.len())
            .map(|i| NodeScalars {
                entity_type: g.types[i].ordinal(),
                community: comm[i],
                weighted_degree: wd[i],
                betweenness: bt[i],
                eigenvector: ev[i],
            })
            .collect();
        StructuralFeatures { nodes }
    }

    /// Symmetric pair scalars: same type, same community, and the mean of
    /// the two nodes' weighted degree, betweenness and eigenvector scores.
    pub fn pair(&self, u: usize, v: usize) -> [f64; STRUCTURAL_DIM] {
        let (a, b) = (&self.nodes[u], &self.nodes[v]);
        [
            f64::from(u8::from(a.entity_type == b.entity_type)),
            f64::from(u8::from(a.community == b.community)),
            (a.weighted_degree + b.weighted_degree) / 2.0,
            (a.betweenness + b.betweenness) / 2.0,
            (a.eigenvector + b.eigenvector) / 2.0,
        ]
    }
}

/// Encoder inputs: base embeddings, optionally with structural scalars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeFeatureTable {
    pub base: EmbeddingTable,
    pub structural: Option<StructuralFeatures>,
}

impl NodeFeatureTable {
    pub fn new(base: EmbeddingTable) -> Self {
        NodeFeatureTable { base, structural: None }
    }

    /// Attaches structural scalars computed on `g`.
    pub fn with_structural(mut self, g: &GraphView, seed: u64) -> Self {
        self.structural = Some(StructuralFeatures::compute(g, seed));
        self
    }

    /// Length of the decoder input for encoder output dimension `d`.
    pub fn pair_dim(&self, d: usize) -> usize {
        2 * d + if self.structural.is_some() { STRUCTURAL_DIM } else { 0 }
    }

    /// Base vectors stacked in `g`'s node order.
    pub fn matrix_for(&self, g: &GraphView) -> Result<Matrix> {
        let d = self.base.dim;
        let mut data = Vec::with_capacity(g.len() * d);
        for name in &g.names {
            let v = self.base.get(name).ok_or_else(|| Error::UnknownNode(name.clone()))?;
            data.extend_from_slice(v);
        }
        Ok(Matrix::from_vec(g.len(), d, data))
    }
}

/// Rows `[z_a ‖ z_b ‖ s(a, b)]` with `a < b`, so the vector for a pair does
/// not depend on argument order.
pub fn pair_matrix(z: &Matrix, pairs: &[(usize, usize)], structural: Option<&StructuralFeatures>) -> Matrix {
    let d = z.cols;
    let width = 2 * d + structural.map_or(0, |_| STRUCTURAL_DIM);
    let mut out = Matrix::zeros(pairs.len(), width);
    for (i, &(u, v)) in pairs.iter().enumerate() {
        let (a, b) = super::sampling::ordered(u, v);
        let row = out.row_mut(i);
        row[..d].copy_from_slice(z.row(a));
        row[d..2 * d].copy_from_slice(z.row(b));
        if let Some(s) = structural {
            row[2 * d..].copy_from_slice(&s.pair(a, b));
        }
    }
    out
}

/// Scatters `dL/d(pair rows)` back onto the node rows of `z`.
pub fn scatter_pair_grad(d_pairs: &Matrix, pairs: &[(usize, usize)], n: usize, d: usize) -> Matrix {
    let mut out = Matrix::zeros(n, d);
    for (i, &(u, v)) in pairs.iter().enumerate() {
        let (a, b) = super::sampling::ordered(u, v);
        let row = d_pairs.row(i);
        for k in 0..d {
            out.data[a * d + k] += row[k];
            out.data[b * d + k] += row[d + k];
        }
    }
    out
}

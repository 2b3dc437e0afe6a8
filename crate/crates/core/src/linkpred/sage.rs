//! Mean-aggregation GraphSAGE encoder.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::nn::{dropout_mask, hadamard, relu, relu_backward, Matrix, Param};
use crate::graph::GraphView;

/// Unweighted neighbor lists used for mean aggregation.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanAdjacency {
    neighbors: Vec<Vec<usize>>,
}

impl MeanAdjacency {
    pub fn new(g: &GraphView) -> Self {
        MeanAdjacency {
            neighbors: g.adj.iter().map(|l| l.iter().map(|&(u, _)| u).collect()).collect(),
        }
    }

    pub fn from_lists(neighbors: Vec<Vec<usize>>) -> Self {
        MeanAdjacency { neighbors }
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    /// Row `v` of the result is the mean of `h` over `v`'s neighbors, or
    /// zero for an isolated node.
    pub fn aggregate(&self, h: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(h.rows, h.cols);
        for (v, list) in self.neighbors.iter().enumerate() {
            if list.is_empty() {
                continue;
            }
            let scale = 1.0 / list.len() as f64;
            for &u in list {
                let (src, dst) = (u * h.cols, v * h.cols);
                for k in 0..h.cols {
                    out.data[dst + k] += scale * h.data[src + k];
                }
            }
        }
        out
    }

    /// Adjoint of [`aggregate`](Self::aggregate).
    pub fn aggregate_transpose(&self, d: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(d.rows, d.cols);
        for (v, list) in self.neighbors.iter().enumerate() {
            if list.is_empty() {
                continue;
            }
            let scale = 1.0 / list.len() as f64;
            for &u in list {
                let (src, dst) = (v * d.cols, u * d.cols);
                for k in 0..d.cols {
                    out.data[dst + k] += scale * d.data[src + k];
                }
            }
        }
        out
    }
}

/// `relu(h W_self + mean_neigh(h) W_neigh + b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SageLayer {
    pub w_self: Param,
    pub w_neigh: Param,
    pub b: Param,
}

impl SageLayer {
    pub fn new(input: usize, output: usize, rng: &mut impl Rng) -> Self {
        let bound = (6.0 / (input + output) as f64).sqrt();
        SageLayer {
            w_self: Param::new(Matrix::uniform(input, output, bound, rng)),
            w_neigh: Param::new(Matrix::uniform(input, output, bound, rng)),
            b: Param::new(Matrix::zeros(1, output)),
        }
    }
}

struct LayerCache {
    input: Matrix,
    agg: Matrix,
    pre: Matrix,
    mask: Option<Matrix>,
}

pub struct EncoderCache {
    layers: Vec<LayerCache>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Encoder {
    pub layers: Vec<SageLayer>,
    /// Applied between layers in training mode.
    pub dropout: f64,
}

impl Encoder {
    pub fn new(input: usize, hidden: usize, layers: usize, dropout: f64, rng: &mut impl Rng) -> Self {
        assert!(layers >= 1, "at least one layer");
        let layers = (0..layers)
            .map(|l| SageLayer::new(if l == 0 { input } else { hidden }, hidden, rng))
            .collect();
        Encoder { layers, dropout }
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().b.value.cols
    }

    /// Forward pass; dropout only when `train` carries an RNG.
    pub fn forward(
        &self,
        adj: &MeanAdjacency,
        x: &Matrix,
        mut train: Option<&mut dyn rand::RngCore>,
    ) -> (Matrix, EncoderCache) {
        let mut h = x.clone();
        let mut caches = Vec::with_capacity(self.layers.len());
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            let agg = adj.aggregate(&h);
            let mut pre = h.matmul(&layer.w_self.value);
            pre.add_assign(&agg.matmul(&layer.w_neigh.value));
            pre.add_row(&layer.b.value);
            let mut out = if l < last { relu(&pre) } else { pre.clone() };
            let mut mask = None;
            if l < last && self.dropout > 0.0 {
                if let Some(rng) = train.as_deref_mut() {
                    let m = dropout_mask(out.rows, out.cols, self.dropout, rng);
                    out = hadamard(&out, &m);
                    mask = Some(m);
                }
            }
            caches.push(LayerCache {
                input: h,
                agg,
                pre,
                mask,
            });
            h = out;
        }
        (h, EncoderCache { layers: caches })
    }

    /// Accumulates gradients given `dL/d(output)`.
    pub fn backward(&mut self, adj: &MeanAdjacency, cache: &EncoderCache, d_out: &Matrix) {
        let mut d = d_out.clone();
        let last = self.layers.len() - 1;
        for (l, (layer, c)) in self.layers.iter_mut().zip(&cache.layers).enumerate().rev() {
            if let Some(m) = &c.mask {
                d = hadamard(&d, m);
            }
            let dpre = if l < last { relu_backward(&c.pre, &d) } else { d };
            layer.w_self.accumulate(&c.input.t_matmul(&dpre));
            layer.w_neigh.accumulate(&c.agg.t_matmul(&dpre));
            layer.b.accumulate(&dpre.column_sums());
            let mut d_in = dpre.matmul_t(&layer.w_self.value);
            d_in.add_assign(&adj.aggregate_transpose(&dpre.matmul_t(&layer.w_neigh.value)));
            d = d_in;
        }
    }

    pub fn params(&mut self) -> Vec<&mut Param> {
        self.layers
            .iter_mut()
            .flat_map(|l| [&mut l.w_self, &mut l.w_neigh, &mut l.b])
            .collect()
    }
}

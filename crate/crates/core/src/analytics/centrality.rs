//! Index-level centrality kernels over a [`GraphView`].

use std::collections::VecDeque;

use rayon::prelude::*;

use crate::graph::GraphView;

/// Mean incident edge weight; isolated nodes score 0.
pub fn weighted_degree_raw(g: &GraphView) -> Vec<f64> {
    g.adj
        .iter()
        .map(|list| {
            if list.is_empty() {
                0.0
            } else {
                list.iter().map(|&(_, w)| w).sum::<f64>() / list.len() as f64
            }
        })
        .collect()
}

/// Single-source stage of Brandes' algorithm on hop counts.
fn brandes_from(g: &GraphView, s: usize) -> Vec<f64> {
    let n = g.len();
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![usize::MAX; n];
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    sigma[s] = 1.0;
    dist[s] = 0;
    queue.push_back(s);
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &(w, _) in &g.adj[v] {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
            if dist[w] == dist[v] + 1 {
                sigma[w] += sigma[v];
                preds[w].push(v);
            }
        }
    }
    let mut delta = vec![0.0f64; n];
    for &w in order.iter().rev() {
        for &v in &preds[w] {
            delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
        }
    }
    delta[s] = 0.0;
    delta
}

/// Unnormalized betweenness over unordered pairs `j < k`, unweighted paths.
pub fn betweenness_raw(g: &GraphView) -> Vec<f64> {
    let n = g.len();
    let partials: Vec<Vec<f64>> = (0..n).into_par_iter().map(|s| brandes_from(g, s)).collect();
    let mut out = vec![0.0; n];
    for p in partials {
        for (o, d) in out.iter_mut().zip(p) {
            *o += d;
        }
    }
    out.iter_mut().for_each(|x| *x /= 2.0);
    out
}

#[derive(Debug, Clone)]
pub struct PowerResult {
    pub vector: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Dominant eigenvector of the weighted adjacency by power iteration.
///
/// Iterates on `A + I`, which has the same eigenvectors; the shift stops
/// the iteration from oscillating on bipartite graphs, where `-λ` is also
/// an eigenvalue.
pub fn eigenvector_raw(g: &GraphView, tol: f64, max_iter: usize) -> PowerResult {
    let n = g.len();
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut next = vec![0.0; n];
    for it in 1..=max_iter {
        for (v, slot) in next.iter_mut().enumerate() {
            *slot = x[v] + g.adj[v].iter().map(|&(u, w)| w * x[u]).sum::<f64>();
        }
        let norm = next.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm == 0.0 {
            return PowerResult {
                vector: x,
                iterations: it,
                converged: true,
            };
        }
        next.iter_mut().for_each(|a| *a /= norm);
        let delta = x.iter().zip(&next).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        std::mem::swap(&mut x, &mut next);
        if delta < tol {
            return PowerResult {
                vector: x,
                iterations: it,
                converged: true,
            };
        }
    }
    PowerResult {
        vector: x,
        iterations: max_iter,
        converged: false,
    }
}

/// Weighted PageRank; dangling mass is spread uniformly.
pub fn pagerank_raw(g: &GraphView, damping: f64, tol: f64, max_iter: usize) -> PowerResult {
    let n = g.len();
    let nf = n as f64;
    let strength: Vec<f64> = g.adj.iter().map(|l| l.iter().map(|&(_, w)| w).sum()).collect();
    let mut x = vec![1.0 / nf; n];
    for it in 1..=max_iter {
        let dangling: f64 = (0..n).filter(|&v| strength[v] == 0.0).map(|v| x[v]).sum();
        let base = (1.0 - damping) / nf + damping * dangling / nf;
        let next: Vec<f64> = (0..n)
            .map(|v| base + damping * g.adj[v].iter().map(|&(u, w)| x[u] * w / strength[u]).sum::<f64>())
            .collect();
        let delta: f64 = x.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        x = next;
        if delta < tol {
            return PowerResult {
                vector: x,
                iterations: it,
                converged: true,
            };
        }
    }
    PowerResult {
        vector: x,
        iterations: max_iter,
        converged: false,
    }
}

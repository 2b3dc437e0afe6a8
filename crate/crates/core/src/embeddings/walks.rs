use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::graph::GraphView;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WalkConfig {
    pub walk_length: usize,
    pub walks_per_node: usize,
    pub window: usize,
    pub return_p: f64,
    pub inout_q: f64,
    pub seed: u64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            walk_length: 100,
            walks_per_node: 300,
            window: 15,
            return_p: 1.0,
            inout_q: 1.0,
            seed: 7,
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.walk_length < 2 {
            return Err(Error::Config("walk_length must be at least 2".into()));
        }
        if self.walks_per_node == 0 || self.window == 0 {
            return Err(Error::Config("walks_per_node and window must be positive".into()));
        }
        if !(self.return_p > 0.0 && self.inout_q > 0.0) {
            return Err(Error::Config("p and q must be positive".into()));
        }
        Ok(())
    }
}

/// SplitMix64 finalizer, used to give every walk its own stream.
pub(crate) fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn pick(weights: &[f64], rng: &mut impl Rng) -> usize {
    let total: f64 = weights.iter().sum();
    let mut draw = rng.gen::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if draw < *w {
            return i;
        }
        draw -= w;
    }
    weights.len() - 1
}

/// Cumulative weight tables for first-order steps.
struct FirstOrder {
    cumulative: Vec<Vec<f64>>,
}

impl FirstOrder {
    fn new(g: &GraphView) -> Self {
        let cumulative = g
            .adj
            .iter()
            .map(|l| {
                let mut acc = 0.0;
                l.iter()
                    .map(|&(_, w)| {
                        acc += w;
                        acc
                    })
                    .collect()
            })
            .collect();
        FirstOrder { cumulative }
    }

    fn step(&self, g: &GraphView, cur: usize, rng: &mut impl Rng) -> usize {
        let cum = &self.cumulative[cur];
        let draw = rng.gen::<f64>() * cum[cum.len() - 1];
        let i = cum.partition_point(|&c| c <= draw).min(cum.len() - 1);
        g.adj[cur][i].0
    }
}

fn walk_from(g: &GraphView, first: &FirstOrder, start: usize, cfg: &WalkConfig, rng: &mut impl Rng) -> Vec<u32> {
    let mut walk = Vec::with_capacity(cfg.walk_length);
    walk.push(start as u32);
    if g.adj[start].is_empty() {
        return walk;
    }
    let unbiased = cfg.return_p == 1.0 && cfg.inout_q == 1.0;
    let mut weights = Vec::new();
    while walk.len() < cfg.walk_length {
        let cur = *walk.last().unwrap() as usize;
        let next = if walk.len() == 1 || unbiased {
            first.step(g, cur, rng)
        } else {
            let prev = walk[walk.len() - 2] as usize;
            weights.clear();
            weights.extend(g.adj[cur].iter().map(|&(x, w)| {
                if x == prev {
                    w / cfg.return_p
                } else if g.has_edge(prev, x) {
                    w
                } else {
                    w / cfg.inout_q
                }
            }));
            g.adj[cur][pick(&weights, rng)].0
        };
        walk.push(next as u32);
    }
    walk
}

/// Second-order biased walks, `walks_per_node` per node, round-major. Each
/// walk draws from its own seed so the output does not depend on thread
/// scheduling.
pub fn generate_walks(g: &GraphView, cfg: &WalkConfig) -> Result<Vec<Vec<u32>>> {
    cfg.validate()?;
    if g.is_empty() {
        return Err(Error::Invalid("random walks on an empty graph".into()));
    }
    let n = g.len();
    let first = FirstOrder::new(g);
    Ok((0..cfg.walks_per_node * n)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, i as u64));
            walk_from(g, &first, i % n, cfg, &mut rng)
        })
        .collect())
}

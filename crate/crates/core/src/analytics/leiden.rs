//! Leiden community detection on weighted modularity.

use std::collections::{HashMap, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::GraphView;

/// Randomness of the refinement merge choice.
const THETA: f64 = 0.01;
const MAX_LEVELS: usize = 64;

/// Weighted graph with self-loops, as produced by aggregation.
#[derive(Debug, Clone)]
struct Level {
    adj: Vec<Vec<(usize, f64)>>,
    /// `A_ii`, already counting both endpoint halves.
    self_w: Vec<f64>,
    /// Weighted degree including the self-loop.
    k: Vec<f64>,
}

impl Level {
    fn from_view(g: &GraphView) -> Self {
        let adj = g.adj.clone();
        let k = adj.iter().map(|l| l.iter().map(|&(_, w)| w).sum()).collect();
        Level {
            self_w: vec![0.0; adj.len()],
            adj,
            k,
        }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    fn aggregate(&self, membership: &[usize], count: usize) -> Level {
        let mut maps: Vec<HashMap<usize, f64>> = vec![HashMap::new(); count];
        let mut self_w = vec![0.0; count];
        let mut k = vec![0.0; count];
        for v in 0..self.len() {
            let cv = membership[v];
            self_w[cv] += self.self_w[v];
            k[cv] += self.k[v];
            for &(u, w) in &self.adj[v] {
                let cu = membership[u];
                if cu == cv {
                    self_w[cv] += w;
                } else {
                    *maps[cv].entry(cu).or_insert(0.0) += w;
                }
            }
        }
        let adj = maps
            .into_iter()
            .map(|m| {
                let mut l: Vec<(usize, f64)> = m.into_iter().collect();
                l.sort_by_key(|&(u, _)| u);
                l
            })
            .collect();
        Level { adj, self_w, k }
    }
}

struct Ctx<'a> {
    total: f64,
    gamma: f64,
    rng: &'a mut ChaCha8Rng,
}

/// Renumbers labels to `0..k` in order of first appearance.
fn relabel(membership: &mut [usize]) -> usize {
    let mut map = HashMap::new();
    for c in membership.iter_mut() {
        let next = map.len();
        *c = *map.entry(*c).or_insert(next);
    }
    map.len()
}

fn weights_to_communities(level: &Level, v: usize, membership: &[usize]) -> Vec<(usize, f64)> {
    let mut acc: Vec<(usize, f64)> = Vec::new();
    for &(u, w) in &level.adj[v] {
        let c = membership[u];
        match acc.iter_mut().find(|(cc, _)| *cc == c) {
            Some(slot) => slot.1 += w,
            None => acc.push((c, w)),
        }
    }
    acc
}

/// Queue-based local moving. Returns whether any node moved.
fn move_nodes(level: &Level, membership: &mut [usize], ctx: &mut Ctx) -> bool {
    let n = level.len();
    let mut tot = vec![0.0; n.max(membership.iter().max().map_or(0, |m| m + 1))];
    for v in 0..n {
        tot[membership[v]] += level.k[v];
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(ctx.rng);
    let mut queue: VecDeque<usize> = order.into();
    let mut queued = vec![true; n];
    let mut empty: Vec<usize> = (0..tot.len())
        .filter(|&c| tot[c] == 0.0 && !membership.contains(&c))
        .collect();
    let mut moved = false;
    while let Some(v) = queue.pop_front() {
        queued[v] = false;
        let own = membership[v];
        let kv = level.k[v];
        tot[own] -= kv;
        let links = weights_to_communities(level, v, membership);
        let gain = |c: usize, w: f64| w - ctx.gamma * kv * tot[c] / ctx.total;
        let stay_w = links.iter().find(|(c, _)| *c == own).map_or(0.0, |x| x.1);
        let mut best = own;
        let mut best_gain = gain(own, stay_w);
        for &(c, w) in &links {
            let g = gain(c, w);
            if g > best_gain + 1e-12 {
                best = c;
                best_gain = g;
            }
        }
        if best_gain < -1e-12 && tot[own] > 0.0 {
            // Leaving for an empty community beats every option.
            best = empty.pop().unwrap_or_else(|| {
                tot.push(0.0);
                tot.len() - 1
            });
        }
        tot[best] += kv;
        if best != own {
            membership[v] = best;
            moved = true;
            if tot[own] == 0.0 {
                empty.push(own);
            }
            for &(u, _) in &level.adj[v] {
                if !queued[u] && membership[u] != best {
                    queued[u] = true;
                    queue.push_back(u);
                }
            }
        }
    }
    moved
}

/// Splits each community of `membership` into well-connected
/// sub-communities, starting from singletons and merging randomly.
fn refine(level: &Level, membership: &[usize], ctx: &mut Ctx) -> Vec<usize> {
    let n = level.len();
    let mut refined: Vec<usize> = (0..n).collect();
    let mut tot_ref = level.k.clone();
    let mut singleton = vec![true; n];
    let mut comm_tot: HashMap<usize, f64> = HashMap::new();
    for (&c, &k) in membership.iter().zip(&level.k) {
        *comm_tot.entry(c).or_insert(0.0) += k;
    }
    // External weight of each refined community towards the rest of its
    // parent community.
    let mut ext_ref = vec![0.0; n];
    for v in 0..n {
        ext_ref[v] = level.adj[v]
            .iter()
            .filter(|&&(u, _)| membership[u] == membership[v])
            .map(|&(_, w)| w)
            .sum();
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(ctx.rng);
    for v in order {
        if !singleton[v] {
            continue;
        }
        let parent = membership[v];
        let kc = comm_tot[&parent];
        let kv = level.k[v];
        if ext_ref[v] < ctx.gamma * kv * (kc - kv) / ctx.total {
            continue;
        }
        let own = refined[v];
        let mut cands: Vec<(usize, f64)> = Vec::new();
        for &(u, w) in &level.adj[v] {
            if membership[u] != parent {
                continue;
            }
            let c = refined[u];
            if c == own {
                continue;
            }
            match cands.iter_mut().find(|(cc, _)| *cc == c) {
                Some(slot) => slot.1 += w,
                None => cands.push((c, w)),
            }
        }
        let options: Vec<(usize, f64)> = cands
            .into_iter()
            .filter(|&(c, _)| ext_ref[c] >= ctx.gamma * tot_ref[c] * (kc - tot_ref[c]) / ctx.total)
            .map(|(c, w)| (c, (w - ctx.gamma * kv * tot_ref[c] / ctx.total) / ctx.total))
            .filter(|&(_, g)| g >= 0.0)
            .collect();
        if options.is_empty() {
            continue;
        }
        let max = options.iter().map(|o| o.1).fold(0.0f64, f64::max);
        let mut weights: Vec<f64> = options.iter().map(|o| ((o.1 - max) / THETA).exp()).collect();
        // The stay-alone option has gain zero.
        weights.push(((0.0 - max) / THETA).exp());
        let sum: f64 = weights.iter().sum();
        let mut draw = ctx.rng.gen::<f64>() * sum;
        let mut pick = weights.len() - 1;
        for (i, w) in weights.iter().enumerate() {
            if draw < *w {
                pick = i;
                break;
            }
            draw -= w;
        }
        if pick == options.len() {
            continue;
        }
        let target = options[pick].0;
        let w_vt: f64 = level.adj[v]
            .iter()
            .filter(|&&(u, _)| refined[u] == target)
            .map(|&(_, w)| w)
            .sum();
        refined[v] = target;
        tot_ref[target] += kv;
        tot_ref[own] = 0.0;
        ext_ref[target] = ext_ref[target] + ext_ref[v] - 2.0 * w_vt;
        singleton[v] = false;
        singleton[target] = false;
    }
    refined
}

/// Community label per node of `g`, contiguous from 0 in order of first
/// appearance over node indices.
pub fn leiden_labels(g: &GraphView, resolution: f64, seed: u64) -> Vec<usize> {
    let n = g.len();
    let mut labels: Vec<usize> = (0..n).collect();
    let mut level = Level::from_view(g);
    let total: f64 = level.k.iter().sum();
    if n == 0 || total == 0.0 {
        return labels;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ctx = Ctx {
        total,
        gamma: resolution,
        rng: &mut rng,
    };
    // node of `g` -> node of the current level
    let mut node_of: Vec<usize> = (0..n).collect();
    let mut membership: Vec<usize> = (0..level.len()).collect();
    for _ in 0..MAX_LEVELS {
        move_nodes(&level, &mut membership, &mut ctx);
        let count = relabel(&mut membership);
        if count == level.len() {
            break;
        }
        let mut refined = refine(&level, &membership, &mut ctx);
        let refined_count = relabel(&mut refined);
        if refined_count == level.len() {
            break;
        }
        let mut next_membership = vec![0; refined_count];
        for v in 0..level.len() {
            next_membership[refined[v]] = membership[v];
        }
        level = level.aggregate(&refined, refined_count);
        for slot in node_of.iter_mut() {
            *slot = refined[*slot];
        }
        membership = next_membership;
    }
    for (v, slot) in labels.iter_mut().enumerate() {
        *slot = membership[node_of[v]];
    }
    split_disconnected(g, &mut labels);
    relabel(&mut labels);
    labels
}

/// Gives every connected piece of a community its own label. Splitting a
/// community along a cut with no edges never lowers modularity.
fn split_disconnected(g: &GraphView, labels: &mut [usize]) {
    let n = g.len();
    let mut piece = vec![usize::MAX; n];
    let mut next = 0;
    for s in 0..n {
        if piece[s] != usize::MAX {
            continue;
        }
        piece[s] = next;
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            for &(u, _) in &g.adj[v] {
                if piece[u] == usize::MAX && labels[u] == labels[s] {
                    piece[u] = next;
                    stack.push(u);
                }
            }
        }
        next += 1;
    }
    labels.copy_from_slice(&piece);
}

/// Weighted modularity `Q = (1/2m) Σ_ij [A_ij - γ k_i k_j / 2m] δ(c_i, c_j)`.
pub fn modularity(g: &GraphView, labels: &[usize], resolution: f64) -> f64 {
    let k: Vec<f64> = g.adj.iter().map(|l| l.iter().map(|&(_, w)| w).sum()).collect();
    let two_m: f64 = k.iter().sum();
    if two_m == 0.0 {
        return 0.0;
    }
    let mut internal = 0.0;
    for (v, list) in g.adj.iter().enumerate() {
        for &(u, w) in list {
            if labels[u] == labels[v] {
                internal += w;
            }
        }
    }
    let mut tot: HashMap<usize, f64> = HashMap::new();
    for (v, kv) in k.iter().enumerate() {
        *tot.entry(labels[v]).or_insert(0.0) += kv;
    }
    let expected: f64 = tot.values().map(|t| t * t).sum::<f64>() / two_m;
    (internal - resolution * expected) / two_m
}

fn choose2(x: f64) -> f64 {
    x * (x - 1.0) / 2.0
}

/// Adjusted Rand index between two labelings of the same items.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len(), "labelings must cover the same items");
    let n = a.len() as f64;
    let mut table: HashMap<(usize, usize), f64> = HashMap::new();
    let mut rows: HashMap<usize, f64> = HashMap::new();
    let mut cols: HashMap<usize, f64> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_insert(0.0) += 1.0;
        *rows.entry(x).or_insert(0.0) += 1.0;
        *cols.entry(y).or_insert(0.0) += 1.0;
    }
    let index: f64 = table.values().map(|&c| choose2(c)).sum();
    let sum_a: f64 = rows.values().map(|&c| choose2(c)).sum();
    let sum_b: f64 = cols.values().map(|&c| choose2(c)).sum();
    let expected = sum_a * sum_b / choose2(n);
    let max = (sum_a + sum_b) / 2.0;
    if max == expected {
        return 1.0;
    }
    (index - expected) / (max - expected)
}

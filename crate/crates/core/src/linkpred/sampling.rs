use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{GraphView, MediaGraph};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum NegativeMode {
    Random,
    #[serde(rename = "MIXED_50_50")]
    Mixed5050,
}

pub(crate) fn ordered(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Pairs at hop distance exactly two, `u < v`, in ascending order.
pub fn two_hop_pairs(g: &GraphView) -> Vec<(usize, usize)> {
    let mut out = BTreeSet::new();
    for list in &g.adj {
        for (i, &(a, _)) in list.iter().enumerate() {
            for &(b, _) in &list[i + 1..] {
                if !g.has_edge(a, b) {
                    out.insert(ordered(a, b));
                }
            }
        }
    }
    out.into_iter().collect()
}

/// Uniform pairs `u < v` of distinct nodes for which `excluded` is false,
/// drawn with replacement. Falls back to enumerating the allowed pairs when
/// rejection sampling keeps failing.
pub(crate) fn uniform_pairs(
    n: usize,
    count: usize,
    excluded: impl Fn(usize, usize) -> bool,
    rng: &mut impl Rng,
) -> Result<Vec<(usize, usize)>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    if n < 2 {
        return Err(Error::NoNegatives);
    }
    let mut out = Vec::with_capacity(count);
    let mut misses = 0usize;
    while out.len() < count {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v && !excluded(u, v) {
            out.push(ordered(u, v));
            misses = 0;
        } else {
            misses += 1;
            if misses > 1000 {
                break;
            }
        }
    }
    if out.len() < count {
        let allowed: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .filter(|&(u, v)| !excluded(u, v))
            .collect();
        if allowed.is_empty() {
            return Err(Error::NoNegatives);
        }
        while out.len() < count {
            out.push(*allowed.choose(rng).unwrap());
        }
    }
    Ok(out)
}

/// Index-level [`sample_negatives`].
pub fn sample_negative_indices(g: &GraphView, n: usize, mode: NegativeMode, seed: u64) -> Result<Vec<(usize, usize)>> {
    let nodes = g.len();
    if nodes < 2 || g.edge_count() == nodes * (nodes - 1) / 2 {
        return Err(Error::NoNegatives);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    if mode == NegativeMode::Mixed5050 {
        let mut hop2 = two_hop_pairs(g);
        hop2.shuffle(&mut rng);
        out.extend(hop2.into_iter().take(n / 2));
    }
    let rest = n - out.len();
    out.extend(uniform_pairs(nodes, rest, |u, v| g.has_edge(u, v), &mut rng)?);
    Ok(out)
}

/// Non-edge pairs. MIXED_50_50 takes half from the two-hop pairs without
/// replacement, topping up with uniform non-edges once those run out.
pub fn sample_negatives(g: &MediaGraph, n: usize, mode: NegativeMode, seed: u64) -> Result<Vec<(String, String)>> {
    let view = g.view();
    Ok(sample_negative_indices(&view, n, mode, seed)?
        .into_iter()
        .map(|(u, v)| (view.names[u].clone(), view.names[v].clone()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{graph_from_edges, random_graph};
    use std::collections::VecDeque;

    fn bfs_distance(g: &GraphView, s: usize, t: usize) -> Option<usize> {
        let mut dist = vec![usize::MAX; g.len()];
        dist[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            for &(u, _) in &g.adj[v] {
                if dist[u] == usize::MAX {
                    dist[u] = dist[v] + 1;
                    q.push_back(u);
                }
            }
        }
        (dist[t] != usize::MAX).then_some(dist[t])
    }

    #[test]
    fn path_has_one_two_hop_pair() {
        let g = graph_from_edges(&[("a", "b", 1), ("b", "c", 1)]).view();
        assert_eq!(two_hop_pairs(&g), vec![(0, 2)]);
        let negs = sample_negative_indices(&g, 4, NegativeMode::Mixed5050, 1).unwrap();
        assert!(negs.iter().all(|&p| p == (0, 2)));
    }

    #[test]
    fn complete_graph_has_no_negatives() {
        let g = graph_from_edges(&[("a", "b", 1), ("b", "c", 1), ("a", "c", 1)]);
        assert!(matches!(
            sample_negatives(&g, 1, NegativeMode::Random, 0),
            Err(Error::NoNegatives)
        ));
    }

    #[test]
    fn mixed_half_is_two_hop_by_bfs() {
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        let g = random_graph(50, 0.15, 1..=1, &mut rng).view();
        assert!(two_hop_pairs(&g).len() >= 500, "fixture must hold enough two-hop pairs");
        let negs = sample_negative_indices(&g, 1000, NegativeMode::Mixed5050, 9).unwrap();
        assert_eq!(negs.len(), 1000);
        let at_two = negs.iter().filter(|&&(u, v)| bfs_distance(&g, u, v) == Some(2)).count();
        assert!(at_two >= 499, "{at_two}");
    }

    #[test]
    fn ten_thousand_samples_avoid_edges() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = random_graph(40, 0.3, 1..=2, &mut rng).view();
        for mode in [NegativeMode::Random, NegativeMode::Mixed5050] {
            let negs = sample_negative_indices(&g, 10_000, mode, 3).unwrap();
            assert!(negs.iter().all(|&(u, v)| u < v && !g.has_edge(u, v)));
        }
        assert_eq!(
            sample_negative_indices(&g, 50, NegativeMode::Mixed5050, 3).unwrap(),
            sample_negative_indices(&g, 50, NegativeMode::Mixed5050, 3).unwrap()
        );
    }
}

//! Seeded graph generators for tests, benchmarks and the acceptance suite.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use chrono::{Datelike, Months, NaiveDate};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::{EdgeAttr, MediaGraph};
use crate::EntityType;

fn fixed_date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2021, 1, 1).unwrap()
}

/// Zero-padded so that name order equals numeric order.
pub fn node_name(i: usize) -> String {
    format!("n{i:04}")
}

/// Builds a graph from `(u, v, weight)` triples, all dated 2021-01-01.
pub fn graph_from_edges(edges: &[(&str, &str, u32)]) -> MediaGraph {
    let mut g = MediaGraph::new();
    for &(u, v, w) in edges {
        let attr = EdgeAttr {
            weight: w,
            first: fixed_date(),
            last: fixed_date(),
        };
        g.insert_edge(u, v, attr).expect("valid fixture edge");
    }
    g
}

/// Erdos-Renyi graph on `n` nodes (all kept, even if isolated).
pub fn random_graph(n: usize, p: f64, weights: RangeInclusive<u32>, rng: &mut impl Rng) -> MediaGraph {
    let mut g = MediaGraph::new();
    for i in 0..n {
        g.add_node(&node_name(i), EntityType::Person);
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen::<f64>() < p {
                let attr = EdgeAttr {
                    weight: rng.gen_range(weights.clone()),
                    first: fixed_date(),
                    last: fixed_date(),
                };
                g.insert_edge(&node_name(i), &node_name(j), attr).unwrap();
            }
        }
    }
    g
}

/// Random graph made connected by first laying a random spanning tree.
pub fn random_connected_graph(n: usize, p: f64, weights: RangeInclusive<u32>, rng: &mut impl Rng) -> MediaGraph {
    let mut g = random_graph(n, p, weights.clone(), rng);
    for i in 1..n {
        let j = rng.gen_range(0..i);
        if !g.has_edge(&node_name(i), &node_name(j)) {
            let attr = EdgeAttr {
                weight: rng.gen_range(weights.clone()),
                first: fixed_date(),
                last: fixed_date(),
            };
            g.insert_edge(&node_name(i), &node_name(j), attr).unwrap();
        }
    }
    g
}

/// A planted-partition graph and its ground-truth block labels.
#[derive(Debug, Clone)]
pub struct Planted {
    pub graph: MediaGraph,
    pub block_of: BTreeMap<String, usize>,
}

/// Stochastic block model with unit weights. Isolated nodes are kept.
pub fn planted_partition(sizes: &[usize], p_in: f64, p_out: f64, seed: u64) -> Planted {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = MediaGraph::new();
    let mut block_of = BTreeMap::new();
    let mut labels = Vec::new();
    for (b, &size) in sizes.iter().enumerate() {
        for _ in 0..size {
            let name = node_name(labels.len());
            g.add_node(&name, EntityType::Person);
            block_of.insert(name, b);
            labels.push(b);
        }
    }
    let n = labels.len();
    for i in 0..n {
        for j in i + 1..n {
            let p = if labels[i] == labels[j] { p_in } else { p_out };
            if rng.gen::<f64>() < p {
                let attr = EdgeAttr {
                    weight: 1,
                    first: fixed_date(),
                    last: fixed_date(),
                };
                g.insert_edge(&node_name(i), &node_name(j), attr).unwrap();
            }
        }
    }
    Planted { graph: g, block_of }
}

/// Settings for [`temporal_planted`].
#[derive(Debug, Clone)]
pub struct TemporalFixture {
    pub sizes: Vec<usize>,
    pub p_in: f64,
    pub p_out: f64,
    /// First day of the first month edges may form in.
    pub start: NaiveDate,
    pub months: u32,
    pub max_weight: u32,
    pub seed: u64,
}

impl Default for TemporalFixture {
    fn default() -> Self {
        TemporalFixture {
            sizes: vec![30, 30],
            p_in: 0.4,
            p_out: 0.02,
            start: NaiveDate::from_ymd_opt(2020, 1, 1).unwrap(),
            months: 24,
            max_weight: 5,
            seed: 11,
        }
    }
}

fn days_in_month(first: NaiveDate) -> u32 {
    let next = first + Months::new(1);
    (next - first).num_days() as u32
}

/// Planted-partition graph whose edges first form in a uniformly drawn
/// month, with weights uniform in `1..=max_weight` and a last date no
/// earlier than the first.
pub fn temporal_planted(cfg: &TemporalFixture) -> Planted {
    let mut planted = planted_partition(&cfg.sizes, cfg.p_in, cfg.p_out, cfg.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
    let start = cfg.start.with_day(1).unwrap();
    let end = start + Months::new(cfg.months);
    let keys: Vec<_> = planted.graph.edges().map(|(k, _)| k.clone()).collect();
    for k in keys {
        let month = start + Months::new(rng.gen_range(0..cfg.months));
        let first = month + chrono::Days::new(rng.gen_range(0..days_in_month(month)) as u64);
        let span = (end - first).num_days().max(1) as u64;
        let last = first + chrono::Days::new(rng.gen_range(0..span));
        let attr = EdgeAttr {
            weight: rng.gen_range(1..=cfg.max_weight),
            first,
            last,
        };
        planted.graph.insert_edge(&k.u, &k.v, attr).unwrap();
    }
    planted
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planted_is_seeded() {
        let a = planted_partition(&[10, 10], 0.5, 0.05, 3);
        let b = planted_partition(&[10, 10], 0.5, 0.05, 3);
        assert_eq!(a.graph, b.graph);
        assert_eq!(a.graph.node_count(), 20);
    }

    #[test]
    fn temporal_dates_stay_in_range() {
        let cfg = TemporalFixture::default();
        let p = temporal_planted(&cfg);
        let (lo, hi) = p.graph.date_range().unwrap();
        assert!(lo >= cfg.start);
        assert!(hi < cfg.start + Months::new(cfg.months));
        assert!(p
            .graph
            .edges()
            .all(|(_, a)| a.first <= a.last && (1..=5).contains(&a.weight)));
    }
}

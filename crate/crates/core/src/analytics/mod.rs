//! Centralities, Leiden communities and intra-community leader rankings.

mod centrality;
mod leiden;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

pub use centrality::{betweenness_raw, eigenvector_raw, pagerank_raw, weighted_degree_raw, PowerResult};
pub use leiden::{adjusted_rand_index, leiden_labels, modularity};

use crate::graph::{GraphView, MediaGraph};
use crate::{Error, Result};

pub const EIGEN_TOL: f64 = 1e-10;
pub const EIGEN_MAX_ITER: usize = 1000;
pub const PAGERANK_DAMPING: f64 = 0.85;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CentralityKind {
    WeightedDegree,
    Betweenness,
    Eigenvector,
    Pagerank,
}

impl CentralityKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CentralityKind::WeightedDegree => "weighted_degree",
            CentralityKind::Betweenness => "betweenness",
            CentralityKind::Eigenvector => "eigenvector",
            CentralityKind::Pagerank => "pagerank",
        }
    }
}

impl fmt::Display for CentralityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralityMap {
    pub kind: CentralityKind,
    /// Min-max normalized scores.
    pub scores: BTreeMap<String, f64>,
    /// Scores before normalization.
    pub raw: BTreeMap<String, f64>,
    /// False when an iterative method hit its iteration cap.
    pub converged: bool,
}

impl CentralityMap {
    fn from_raw(kind: CentralityKind, view: &GraphView, raw: Vec<f64>, converged: bool) -> Self {
        let norm = min_max(&raw);
        CentralityMap {
            kind,
            scores: view.names.iter().cloned().zip(norm).collect(),
            raw: view.names.iter().cloned().zip(raw).collect(),
            converged,
        }
    }

    /// The `k` highest normalized scores, ties broken by name.
    pub fn top(&self, k: usize) -> Vec<(&str, f64)> {
        let mut all: Vec<(&str, f64)> = self.scores.iter().map(|(n, s)| (n.as_str(), *s)).collect();
        all.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        all.truncate(k);
        all
    }
}

/// `(x - min) / (max - min)`; all zeros when every value is equal.
pub fn min_max(raw: &[f64]) -> Vec<f64> {
    let lo = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if raw.is_empty() || hi - lo <= 0.0 {
        return vec![0.0; raw.len()];
    }
    raw.iter().map(|x| (x - lo) / (hi - lo)).collect()
}

fn non_empty(g: &MediaGraph) -> Result<GraphView> {
    if g.is_empty() {
        return Err(Error::Invalid("centrality of an empty graph".into()));
    }
    Ok(g.view())
}

pub fn weighted_degree(g: &MediaGraph) -> Result<CentralityMap> {
    let v = non_empty(g)?;
    let raw = weighted_degree_raw(&v);
    Ok(CentralityMap::from_raw(CentralityKind::WeightedDegree, &v, raw, true))
}

pub fn betweenness(g: &MediaGraph) -> Result<CentralityMap> {
    let v = non_empty(g)?;
    let raw = betweenness_raw(&v);
    Ok(CentralityMap::from_raw(CentralityKind::Betweenness, &v, raw, true))
}

pub fn eigenvector(g: &MediaGraph, tol: f64, max_iter: usize) -> Result<CentralityMap> {
    let v = non_empty(g)?;
    let r = eigenvector_raw(&v, tol, max_iter);
    Ok(CentralityMap::from_raw(
        CentralityKind::Eigenvector,
        &v,
        r.vector,
        r.converged,
    ))
}

pub fn pagerank(g: &MediaGraph, damping: f64, tol: f64, max_iter: usize) -> Result<CentralityMap> {
    let v = non_empty(g)?;
    let r = pagerank_raw(&v, damping, tol, max_iter);
    Ok(CentralityMap::from_raw(
        CentralityKind::Pagerank,
        &v,
        r.vector,
        r.converged,
    ))
}

pub fn centrality(g: &MediaGraph, kind: CentralityKind) -> Result<CentralityMap> {
    match kind {
        CentralityKind::WeightedDegree => weighted_degree(g),
        CentralityKind::Betweenness => betweenness(g),
        CentralityKind::Eigenvector => eigenvector(g, EIGEN_TOL, EIGEN_MAX_ITER),
        CentralityKind::Pagerank => pagerank(g, PAGERANK_DAMPING, EIGEN_TOL, EIGEN_MAX_ITER),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub community_of: BTreeMap<String, usize>,
    pub resolution: f64,
    pub seed: u64,
}

impl Partition {
    pub fn count(&self) -> usize {
        self.community_of.values().max().map_or(0, |m| m + 1)
    }

    pub fn members(&self, community: usize) -> BTreeSet<String> {
        self.community_of
            .iter()
            .filter(|(_, &c)| c == community)
            .map(|(n, _)| n.clone())
            .collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.count()];
        for &c in self.community_of.values() {
            sizes[c] += 1;
        }
        sizes
    }

    pub fn get(&self, node: &str) -> Option<usize> {
        self.community_of.get(node).copied()
    }
}

pub const DEFAULT_RESOLUTION: f64 = 1.0;

/// Leiden on weighted modularity. IDs are contiguous, numbered in order of
/// first appearance over node names.
pub fn leiden(g: &MediaGraph, resolution: f64, seed: u64) -> Result<Partition> {
    let v = non_empty(g)?;
    let labels = leiden_labels(&v, resolution, seed);
    Ok(Partition {
        community_of: v.names.iter().cloned().zip(labels).collect(),
        resolution,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeaderMetric {
    Eigenvector,
    Pagerank,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leader {
    pub community: usize,
    /// 1-based.
    pub rank: usize,
    pub entity: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderTable {
    pub leaders: Vec<Leader>,
    /// Set when fewer than the requested number of communities exist.
    pub shortfall: bool,
}

/// Leaders of the `n_comms` largest communities (ties by smaller ID), each
/// scored on its induced subgraph. Scores are the unnormalized metric.
pub fn intra_community_ranking(
    g: &MediaGraph,
    part: &Partition,
    n_comms: usize,
    n_leaders: usize,
    metric: LeaderMetric,
) -> Result<LeaderTable> {
    for (name, _) in g.nodes() {
        if part.get(name).is_none() {
            return Err(Error::Invalid(format!("node `{name}` has no community")));
        }
    }
    let sizes = part.sizes();
    let mut order: Vec<usize> = (0..sizes.len()).filter(|&c| sizes[c] > 0).collect();
    order.sort_by(|&a, &b| sizes[b].cmp(&sizes[a]).then(a.cmp(&b)));
    let shortfall = order.len() < n_comms;
    order.truncate(n_comms);
    let mut leaders = Vec::new();
    for c in order {
        let members: BTreeSet<String> = part.members(c).into_iter().filter(|n| g.contains_node(n)).collect();
        let sub = g.subgraph(&members);
        let view = sub.view();
        let scores = match metric {
            LeaderMetric::Eigenvector => eigenvector_raw(&view, EIGEN_TOL, EIGEN_MAX_ITER).vector,
            LeaderMetric::Pagerank => pagerank_raw(&view, PAGERANK_DAMPING, EIGEN_TOL, EIGEN_MAX_ITER).vector,
        };
        let mut ranked: Vec<(usize, f64)> = scores.into_iter().enumerate().collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| view.names[a.0].cmp(&view.names[b.0])));
        for (rank, (i, score)) in ranked.into_iter().take(n_leaders).enumerate() {
            leaders.push(Leader {
                community: c,
                rank: rank + 1,
                entity: view.names[i].clone(),
                score,
            });
        }
    }
    Ok(LeaderTable { leaders, shortfall })
}

/// One row of the analysis CSV (`axis,community,rank,entity,score`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisRow {
    pub axis: String,
    pub community: Option<usize>,
    pub rank: usize,
    pub entity: String,
    pub score: f64,
}

/// Top-`top` rows per centrality plus community leader rows.
pub fn analysis_rows(
    g: &MediaGraph,
    kinds: &[CentralityKind],
    top: usize,
    part: &Partition,
    n_comms: usize,
    n_leaders: usize,
) -> Result<Vec<AnalysisRow>> {
    let mut rows = Vec::new();
    for &kind in kinds {
        let map = centrality(g, kind)?;
        for (i, (name, score)) in map.top(top).into_iter().enumerate() {
            rows.push(AnalysisRow {
                axis: kind.as_str().to_string(),
                community: None,
                rank: i + 1,
                entity: name.to_string(),
                score,
            });
        }
    }
    let table = intra_community_ranking(g, part, n_comms, n_leaders, LeaderMetric::Eigenvector)?;
    for l in table.leaders {
        rows.push(AnalysisRow {
            axis: "community_leader".to_string(),
            community: Some(l.community),
            rank: l.rank,
            entity: l.entity,
            score: l.score,
        });
    }
    Ok(rows)
}

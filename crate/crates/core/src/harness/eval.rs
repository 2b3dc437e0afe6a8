use std::collections::{BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{Confusion, Metrics};
use crate::analytics::Partition;
use crate::embeddings::derive_seed;
use crate::graph::{EdgeAttr, EdgeKey, MediaGraph};
use crate::linkpred::{two_hop_pairs, NegativeMode};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Provenance {
    Random,
    TwoHop,
    Mixed,
}

/// Balanced evaluation pairs, node names in canonical order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkDataset {
    pub positives: Vec<(String, String)>,
    pub negatives: Vec<(String, String)>,
    pub provenance: Provenance,
}

impl LinkDataset {
    pub fn pairs(&self) -> Vec<(String, String)> {
        self.positives.iter().chain(&self.negatives).cloned().collect()
    }

    pub fn labels(&self) -> Vec<bool> {
        let mut y = vec![true; self.positives.len()];
        y.resize(self.positives.len() + self.negatives.len(), false);
        y
    }

    pub fn len(&self) -> usize {
        self.positives.len() + self.negatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// "All Weights" for 1, otherwise "Weight ≥ N".
pub fn subset_label(min_weight: u32) -> String {
    if min_weight <= 1 {
        "All Weights".to_string()
    } else {
        format!("Weight ≥ {min_weight}")
    }
}

/// Positives are test edges with weight ≥ `min_weight`. Negatives, one per
/// positive, are pairs of training nodes that are neither training edges
/// nor test edges of any weight.
pub fn build_eval_set(
    train_g: &MediaGraph,
    test_edges: &[(EdgeKey, EdgeAttr)],
    min_weight: u32,
    mode: NegativeMode,
    seed: u64,
) -> Result<LinkDataset> {
    if test_edges.is_empty() {
        return Err(Error::Invalid("no test edges".into()));
    }
    let view = train_g.view();
    let idx = |name: &str| {
        view.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownNode(name.to_string()))
    };
    let mut excluded = BTreeSet::new();
    let mut positives = Vec::new();
    for (k, a) in test_edges {
        let (u, v) = (idx(&k.u)?, idx(&k.v)?);
        excluded.insert((u.min(v), u.max(v)));
        if a.weight >= min_weight {
            positives.push((k.u.clone(), k.v.clone()));
        }
    }
    if positives.is_empty() {
        return Err(Error::EmptyThreshold { min_weight });
    }
    let blocked = |u: usize, v: usize| view.has_edge(u, v) || excluded.contains(&(u.min(v), u.max(v)));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = positives.len();
    let mut picked: Vec<(usize, usize)> = Vec::with_capacity(n);
    let provenance = match mode {
        NegativeMode::Random => Provenance::Random,
        NegativeMode::Mixed5050 => {
            let mut hop: Vec<(usize, usize)> = two_hop_pairs(&view)
                .into_iter()
                .filter(|&(u, v)| !blocked(u, v))
                .collect();
            hop.shuffle(&mut rng);
            picked.extend(hop.into_iter().take(n / 2));
            Provenance::Mixed
        }
    };
    picked.extend(crate::linkpred::uniform_pairs(
        view.len(),
        n - picked.len(),
        blocked,
        &mut rng,
    )?);
    let negatives = picked
        .into_iter()
        .map(|(u, v)| (view.names[u].clone(), view.names[v].clone()))
        .collect();
    Ok(LinkDataset {
        positives,
        negatives,
        provenance,
    })
}

/// Labelled node pairs over a shared name table.
#[derive(Debug, Clone, PartialEq)]
pub struct PairUniverse {
    pub names: Vec<String>,
    pub pairs: Vec<(u32, u32)>,
    pub labels: Vec<bool>,
}

impl PairUniverse {
    pub fn from_dataset(ds: &LinkDataset) -> Self {
        let mut index: HashMap<String, u32> = HashMap::new();
        let mut names = Vec::new();
        let mut id = |s: &String| {
            *index.entry(s.clone()).or_insert_with(|| {
                names.push(s.clone());
                (names.len() - 1) as u32
            })
        };
        let pairs = ds.pairs().iter().map(|(u, v)| (id(u), id(v))).collect();
        PairUniverse {
            pairs,
            labels: ds.labels(),
            names,
        }
    }

    /// Every unordered pair of training nodes that is not a training edge,
    /// labelled by membership in `positives`.
    pub fn all_pairs(train_g: &MediaGraph, positives: &[(String, String)]) -> Self {
        let view = train_g.view();
        let pos: BTreeSet<(&str, &str)> = positives
            .iter()
            .map(|(a, b)| {
                if a <= b {
                    (a.as_str(), b.as_str())
                } else {
                    (b.as_str(), a.as_str())
                }
            })
            .collect();
        let mut pairs = Vec::new();
        let mut labels = Vec::new();
        for u in 0..view.len() {
            for v in u + 1..view.len() {
                if !view.has_edge(u, v) {
                    pairs.push((u as u32, v as u32));
                    labels.push(pos.contains(&(view.names[u].as_str(), view.names[v].as_str())));
                }
            }
        }
        PairUniverse {
            names: view.names,
            pairs,
            labels,
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn positive_rate(&self) -> f64 {
        self.labels.iter().filter(|&&y| y).count() as f64 / self.len().max(1) as f64
    }
}

/// Per-metric means over iterations of uniform random scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineMetrics {
    pub accuracy: f64,
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
    pub iterations: usize,
    /// Iterations where precision or recall hit a zero denominator.
    pub zero_division_iterations: usize,
}

pub fn random_baseline(universe: &PairUniverse, iterations: usize, seed: u64) -> Result<BaselineMetrics> {
    if universe.is_empty() {
        return Err(Error::Invalid("empty pair universe".into()));
    }
    if iterations == 0 {
        return Err(Error::Config("random baseline needs at least one iteration".into()));
    }
    let runs: Vec<Metrics> = (0..iterations)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i as u64));
            let mut c = Confusion::default();
            for &y in &universe.labels {
                c.add(rng.gen::<f64>() >= 0.5, y);
            }
            Metrics::from_confusion(c)
        })
        .collect();
    let mean = |f: fn(&Metrics) -> f64| runs.iter().map(f).sum::<f64>() / iterations as f64;
    Ok(BaselineMetrics {
        accuracy: mean(|m| m.accuracy),
        f1: mean(|m| m.f1),
        precision: mean(|m| m.precision),
        recall: mean(|m| m.recall),
        iterations,
        zero_division_iterations: runs
            .iter()
            .filter(|m| m.precision_zero_division || m.recall_zero_division)
            .count(),
    })
}

/// Predicts a link iff both endpoints share a community.
pub fn community_baseline(part: &Partition, universe: &PairUniverse) -> Result<Metrics> {
    let comm = universe
        .names
        .iter()
        .map(|n| part.get(n).ok_or_else(|| Error::UnknownNode(n.clone())))
        .collect::<Result<Vec<usize>>>()?;
    if universe.is_empty() {
        return Err(Error::Invalid("empty pair universe".into()));
    }
    let mut c = Confusion::default();
    for (&(u, v), &y) in universe.pairs.iter().zip(&universe.labels) {
        c.add(comm[u as usize] == comm[v as usize], y);
    }
    Ok(Metrics::from_confusion(c))
}

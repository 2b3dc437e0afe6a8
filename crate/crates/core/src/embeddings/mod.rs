//! Node2Vec: biased second-order random walks fed to skip-gram with
//! negative sampling.

mod skipgram;
mod walks;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub(crate) use skipgram::{log_sigmoid, sigmoid};
pub use skipgram::{sgns_gradients, sgns_loss, train_skipgram, SkipGramConfig, SkipGramResult};
pub(crate) use walks::derive_seed;
pub use walks::{generate_walks, WalkConfig};

use crate::graph::{GraphView, MediaGraph};
use crate::{Error, Result};

/// Node name to vector, all of length `dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingTable {
    pub dim: usize,
    pub vectors: BTreeMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn from_rows(names: &[String], flat: &[f64], dim: usize) -> Self {
        let vectors = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), flat[i * dim..(i + 1) * dim].to_vec()))
            .collect();
        EmbeddingTable { dim, vectors }
    }

    pub fn get(&self, name: &str) -> Option<&[f64]> {
        self.vectors.get(name).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Writes the `{node: [f64; dim]}` JSON object.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string(&self.vectors)?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let vectors: BTreeMap<String, Vec<f64>> = serde_json::from_str(&text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        let dim = vectors.values().next().map_or(0, Vec::len);
        if let Some((name, _)) = vectors.iter().find(|(_, v)| v.len() != dim) {
            return Err(Error::Invalid(format!(
                "vector for `{name}` does not have length {dim}"
            )));
        }
        Ok(EmbeddingTable { dim, vectors })
    }
}

/// Walks plus skip-gram in one call. The skip-gram window and seed follow
/// `walk`.
pub fn node2vec(g: &MediaGraph, walk: &WalkConfig, sg: &SkipGramConfig) -> Result<(EmbeddingTable, SkipGramResult)> {
    let view = g.view();
    node2vec_view(&view, walk, sg)
}

pub(crate) fn node2vec_view(
    view: &GraphView,
    walk: &WalkConfig,
    sg: &SkipGramConfig,
) -> Result<(EmbeddingTable, SkipGramResult)> {
    let walks = generate_walks(view, walk)?;
    let cfg = SkipGramConfig {
        window: walk.window,
        seed: walk.seed,
        ..sg.clone()
    };
    let result = train_skipgram(&walks, view.len(), &cfg)?;
    Ok((EmbeddingTable::from_rows(&view.names, &result.vectors, cfg.dim), result))
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

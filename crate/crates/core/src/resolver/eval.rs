use std::collections::HashMap;
use std::fs::File;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ResolvedCluster;
use crate::{Error, Result};

/// Validity labels keyed by `(cluster index, member)`.
pub type Annotations = HashMap<(usize, String), bool>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErEvalReport {
    /// Mean over clusters of the invalid-member percentage.
    pub false_hit_rate_pct: f64,
    /// `100 - false_hit_rate_pct`.
    pub accuracy_pct: f64,
    /// Fraction of false misses, `fn / (fn + tp)`, when counts were given.
    pub fmp: Option<f64>,
    /// `(cluster index, fraction of invalid members)`.
    pub per_cluster_error: Vec<(usize, f64)>,
}

/// Scores annotated clusters. Every cluster member must be annotated.
pub fn er_evaluate(
    clusters: &[ResolvedCluster],
    annotations: &Annotations,
    false_misses: Option<u64>,
    true_positives: Option<u64>,
) -> Result<ErEvalReport> {
    let mut per_cluster_error = Vec::with_capacity(clusters.len());
    for (id, cluster) in clusters.iter().enumerate() {
        let mut invalid = 0usize;
        for member in &cluster.aliases {
            let valid = annotations
                .get(&(id, member.clone()))
                .ok_or_else(|| Error::Invalid(format!("cluster {id} member `{member}` is not annotated")))?;
            if !valid {
                invalid += 1;
            }
        }
        per_cluster_error.push((id, invalid as f64 / cluster.aliases.len() as f64));
    }
    let false_hit_rate_pct = if per_cluster_error.is_empty() {
        0.0
    } else {
        100.0 * per_cluster_error.iter().map(|(_, e)| e).sum::<f64>() / per_cluster_error.len() as f64
    };

    let fmp = match (false_misses, true_positives) {
        (None, None) => None,
        (fm, tp) => {
            let (fm, tp) = (fm.unwrap_or(0), tp.unwrap_or(0));
            if fm + tp == 0 {
                return Err(Error::UndefinedFmp);
            }
            Some(fm as f64 / (fm + tp) as f64)
        }
    };

    Ok(ErEvalReport {
        false_hit_rate_pct,
        accuracy_pct: 100.0 - false_hit_rate_pct,
        fmp,
        per_cluster_error,
    })
}

#[derive(Deserialize)]
struct AnnotationRow {
    cluster_id: usize,
    member: String,
    valid: u8,
}

/// Reads `cluster_id,member,valid(0|1)` rows.
pub fn load_annotations(path: impl AsRef<Path>) -> Result<Annotations> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let mut out = Annotations::new();
    for (i, row) in reader.deserialize::<AnnotationRow>().enumerate() {
        let row = row?;
        if row.valid > 1 {
            return Err(Error::Parse {
                line: i + 2,
                message: format!("valid must be 0 or 1, got {}", row.valid),
            });
        }
        out.insert((row.cluster_id, row.member), row.valid == 1);
    }
    Ok(out)
}

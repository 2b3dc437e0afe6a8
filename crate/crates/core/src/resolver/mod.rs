//! Rule-based entity resolution.
//!
//! Two preprocessed names match when they pass every filter: initials
//! subset, two-token minimum, fuzzy first name, fuzzy surname, Double
//! Metaphone agreement and a combined similarity floor. Clusters are formed
//! by star clustering: a seed absorbs every remaining name it matches.

mod eval;
mod metaphone;
mod normalize;
mod similarity;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use eval::{er_evaluate, load_annotations, Annotations, ErEvalReport};
pub use metaphone::{double_metaphone, double_metaphone_truncated, phonetic_primary, REFERENCE_CODE_LEN};
pub use normalize::{initials, preprocess_name, preprocess_with, NormalizedName, DEFAULT_HONORIFICS};
pub use similarity::{levenshtein, levenshtein_similarity};

use crate::corpus::EntityIndex;
use crate::{EntityType, Error, Result};

/// Thresholds of the matching filters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchConfig {
    /// First-name similarity must be strictly above this.
    pub first_name_min: f64,
    /// Surname similarity must be strictly above this.
    pub surname_min: f64,
    /// Mean of first-name and surname similarity must reach this.
    pub combined_min: f64,
    /// Length the phonetic codes are cut to before comparison; `None`
    /// compares full codes.
    pub phonetic_len: Option<usize>,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig {
            first_name_min: 0.75,
            surname_min: 0.8,
            combined_min: 0.85,
            phonetic_len: Some(REFERENCE_CODE_LEN),
        }
    }
}

/// Similarity of two tokens. A single letter scores 1.0 against any token
/// that starts with it ("d" vs "doe").
fn token_similarity(a: &str, b: &str) -> f64 {
    let single = |t: &str| t.chars().count() == 1;
    if (single(a) || single(b)) && a.chars().next() == b.chars().next() {
        return 1.0;
    }
    levenshtein_similarity(a, b)
}

/// Surname similarity. Last tokens are compared; when one name extends the
/// other ("lalu prasad" / "lalu prasad yadav"), the shorter name's last
/// token is also aligned with the same position in the longer one and the
/// better score wins.
fn surname_similarity(p: &NormalizedName, e: &NormalizedName, cfg: &MatchConfig) -> f64 {
    let last_vs_last = token_similarity(p.last(), e.last());
    let (short, long) = if p.tokens.len() <= e.tokens.len() {
        (p, e)
    } else {
        (e, p)
    };
    if short.tokens.len() == long.tokens.len() {
        return last_vs_last;
    }
    let k = short.tokens.len();
    let is_prefix = short.tokens[..k - 1]
        .iter()
        .zip(&long.tokens)
        .all(|(a, b)| token_similarity(a, b) > cfg.surname_min);
    if !is_prefix {
        return last_vs_last;
    }
    last_vs_last.max(token_similarity(&short.tokens[k - 1], &long.tokens[k - 1]))
}

fn phonetic_code(name: &NormalizedName, cfg: &MatchConfig) -> String {
    let code = phonetic_primary(&name.concatenated());
    match cfg.phonetic_len {
        Some(n) => code.chars().take(n).collect(),
        None => code,
    }
}

/// Per-filter outcome of a name comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchTrace {
    pub initials_subset: bool,
    pub two_tokens: bool,
    pub first_similarity: f64,
    pub surname_similarity: f64,
    pub phonetic_equal: bool,
    pub combined: f64,
    pub matched: bool,
}

/// Runs every filter and reports the intermediate values.
pub fn match_trace(p: &NormalizedName, e: &NormalizedName, cfg: &MatchConfig) -> MatchTrace {
    let (ip, ie) = (initials(p), initials(e));
    let initials_subset = ip.is_subset(&ie) || ie.is_subset(&ip);
    let two_tokens = p.tokens.len() >= 2 && e.tokens.len() >= 2;
    let first_similarity = token_similarity(p.first(), e.first());
    let surname = surname_similarity(p, e, cfg);
    let phonetic_equal = phonetic_code(p, cfg) == phonetic_code(e, cfg);
    let combined = (first_similarity + surname) / 2.0;
    let matched = initials_subset
        && two_tokens
        && first_similarity > cfg.first_name_min
        && surname > cfg.surname_min
        && phonetic_equal
        && combined >= cfg.combined_min;
    MatchTrace {
        initials_subset,
        two_tokens,
        first_similarity,
        surname_similarity: surname,
        phonetic_equal,
        combined,
        matched,
    }
}

/// True when all six filters pass. Symmetric in its arguments.
pub fn match_names(p: &NormalizedName, e: &NormalizedName, cfg: &MatchConfig) -> bool {
    let (ip, ie) = (initials(p), initials(e));
    if !(ip.is_subset(&ie) || ie.is_subset(&ip)) {
        return false;
    }
    if p.tokens.len() < 2 || e.tokens.len() < 2 {
        return false;
    }
    match_trace(p, e, cfg).matched
}

/// A cluster of surface forms judged to name the same entity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolvedCluster {
    pub canonical: String,
    pub aliases: BTreeSet<String>,
    #[serde(rename = "type")]
    pub entity_type: EntityType,
}

/// Longest alias by character count, ties to the lexicographically smallest.
fn pick_canonical<'a>(aliases: impl Iterator<Item = &'a String>) -> String {
    aliases
        .max_by(|a, b| a.chars().count().cmp(&b.chars().count()).then_with(|| b.cmp(a)))
        .cloned()
        .expect("clusters are never empty")
}

struct Candidate {
    raw: String,
    name: Option<NormalizedName>,
}

/// Star clustering over distinct raw names. Seeds are taken in order of
/// descending token count, descending length, then lexicographically.
pub fn resolve_all(names: &[String], index: Option<&EntityIndex>, cfg: &MatchConfig) -> Vec<ResolvedCluster> {
    let mut seen = HashSet::new();
    let mut pool: Vec<Candidate> = names
        .iter()
        .filter(|n| !n.trim().is_empty() && seen.insert(n.as_str()))
        .map(|raw| Candidate {
            raw: raw.clone(),
            name: preprocess_name(raw).ok(),
        })
        .collect();
    pool.sort_by(|a, b| {
        let tokens = |c: &Candidate| c.name.as_ref().map_or(0, |n| n.tokens.len());
        tokens(b)
            .cmp(&tokens(a))
            .then_with(|| b.raw.chars().count().cmp(&a.raw.chars().count()))
            .then_with(|| a.raw.cmp(&b.raw))
    });

    let type_of = |raw: &str| index.and_then(|idx| idx.type_of(raw)).unwrap_or_default();
    let mut clusters = Vec::new();
    let mut remaining: Vec<Candidate> = pool;
    while !remaining.is_empty() {
        let seed = remaining.remove(0);
        let matched: Vec<bool> = match &seed.name {
            Some(seed_name) => remaining
                .par_iter()
                .map(|c| c.name.as_ref().is_some_and(|n| match_names(seed_name, n, cfg)))
                .collect(),
            None => vec![false; remaining.len()],
        };
        let mut members = vec![seed.raw];
        let mut rest = Vec::with_capacity(remaining.len());
        for (cand, hit) in remaining.into_iter().zip(matched) {
            if hit {
                members.push(cand.raw);
            } else {
                rest.push(cand);
            }
        }
        remaining = rest;
        let entity_type = members
            .iter()
            .map(|m| type_of(m))
            .find(|t| *t != EntityType::Unknown)
            .unwrap_or_default();
        clusters.push(ResolvedCluster {
            canonical: pick_canonical(members.iter()),
            aliases: members.into_iter().collect(),
            entity_type,
        });
    }
    clusters
}

/// Maps lowercased aliases to their cluster's canonical name and type.
#[derive(Debug, Clone, Default)]
pub struct AliasMap {
    map: HashMap<String, (String, EntityType)>,
}

impl AliasMap {
    pub fn new(clusters: &[ResolvedCluster]) -> Self {
        let mut map = HashMap::new();
        for c in clusters {
            for alias in &c.aliases {
                map.entry(alias.trim().to_lowercase())
                    .or_insert_with(|| (c.canonical.clone(), c.entity_type));
            }
        }
        AliasMap { map }
    }

    pub fn resolve(&self, surface: &str) -> Option<(&str, EntityType)> {
        self.map
            .get(&surface.trim().to_lowercase())
            .map(|(c, t)| (c.as_str(), *t))
    }
}

pub fn save_clusters(path: impl AsRef<Path>, clusters: &[ResolvedCluster]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for c in clusters {
        serde_json::to_writer(&mut w, c)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_clusters(path: impl AsRef<Path>) -> Result<Vec<ResolvedCluster>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let cluster = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(cluster);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::EntityRecord;
    use proptest::prelude::*;

    fn n(s: &str) -> NormalizedName {
        preprocess_name(s).unwrap()
    }

    fn m(a: &str, b: &str) -> bool {
        match_names(&n(a), &n(b), &MatchConfig::default())
    }

    #[test]
    fn worked_examples() {
        assert!(m("lalu prasad", "lalu prasad yadav"));
        assert!(!m("bhupinder singh", "bhupendra singh"));
        assert!(!m("singh", "singh"));
        assert!(m("narendra tomar", "narendra singh tomar"));
        assert!(!m("narendra modi", "narendra tomar"));
        assert!(m("John Doe", "John D"));
    }

    #[test]
    fn full_length_codes_block_the_extension_merge() {
        let cfg = MatchConfig {
            phonetic_len: None,
            ..MatchConfig::default()
        };
        let t = match_trace(&n("lalu prasad"), &n("lalu prasad yadav"), &cfg);
        assert!(!t.phonetic_equal && !t.matched);
    }

    #[test]
    fn john_doe_cluster_takes_type_from_index() {
        let idx = EntityIndex::new(vec![EntityRecord::new(
            "John Doe",
            Vec::<String>::new(),
            EntityType::Pol,
        )]);
        let names = vec!["John Doe".to_string(), "John D".to_string()];
        let clusters = resolve_all(&names, Some(&idx), &MatchConfig::default());
        assert_eq!(clusters.len(), 1);
        assert_eq!(clusters[0].canonical, "John Doe");
        assert_eq!(clusters[0].entity_type, EntityType::Pol);
        assert_eq!(
            clusters[0].aliases,
            BTreeSet::from(["John Doe".to_string(), "John D".to_string()])
        );
    }

    #[test]
    fn modi_and_tomar_stay_apart() {
        let names = vec!["narendra modi".to_string(), "narendra tomar".to_string()];
        let clusters = resolve_all(&names, None, &MatchConfig::default());
        assert_eq!(clusters.len(), 2);
        assert!(clusters.iter().all(|c| c.aliases.len() == 1));
    }

    #[test]
    fn single_name() {
        let clusters = resolve_all(&["Modi".to_string()], None, &MatchConfig::default());
        assert_eq!(clusters.len(), 1);
        assert_eq!(clusters[0].canonical, "Modi");
    }

    #[test]
    fn canonical_tie_break_is_lexicographic() {
        let aliases = ["bb cc".to_string(), "aa cc".to_string(), "x".to_string()];
        assert_eq!(pick_canonical(aliases.iter()), "aa cc");
    }

    #[test]
    fn alias_map_resolves_case_insensitively() {
        let clusters = resolve_all(
            &["Lalu Prasad".to_string(), "Lalu Prasad Yadav".to_string()],
            None,
            &MatchConfig::default(),
        );
        let map = AliasMap::new(&clusters);
        assert_eq!(map.resolve("lalu prasad").unwrap().0, "Lalu Prasad Yadav");
    }

    const FIRST: [&str; 6] = ["narendra", "narender", "lalu", "john", "rahul", "r"];
    const LAST: [&str; 7] = ["tomar", "singh", "prasad", "yadav", "doe", "d", "gandhi"];

    fn name_strategy() -> impl Strategy<Value = String> {
        (0usize..FIRST.len(), proptest::collection::vec(0usize..LAST.len(), 0..3)).prop_map(|(f, ls)| {
            let mut parts = vec![FIRST[f]];
            parts.extend(ls.into_iter().map(|i| LAST[i]));
            parts.join(" ")
        })
    }

    proptest! {
        #[test]
        fn matching_is_symmetric(a in name_strategy(), b in name_strategy()) {
            let cfg = MatchConfig::default();
            prop_assert_eq!(match_names(&n(&a), &n(&b), &cfg), match_names(&n(&b), &n(&a), &cfg));
        }

        #[test]
        fn clusters_partition_the_input(names in proptest::collection::vec(name_strategy(), 1..12)) {
            let cfg = MatchConfig::default();
            let clusters = resolve_all(&names, None, &cfg);
            let distinct: BTreeSet<String> = names.iter().cloned().collect();
            let mut covered = BTreeSet::new();
            for c in &clusters {
                for a in &c.aliases {
                    prop_assert!(covered.insert(a.clone()), "alias {} in two clusters", a);
                }
                prop_assert!(c.aliases.contains(&c.canonical));
                let len = c.canonical.chars().count();
                prop_assert!(c.aliases.iter().all(|a| a.chars().count() <= len));
                for a in &c.aliases {
                    if n(a).tokens.len() < 2 {
                        prop_assert_eq!(c.aliases.len(), 1);
                    }
                }
            }
            prop_assert_eq!(covered, distinct);
            prop_assert_eq!(resolve_all(&names, None, &cfg), clusters);
        }
    }
}

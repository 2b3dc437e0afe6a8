//! The MediaGraph: an undirected, weighted, timestamped co-occurrence graph.

mod io;
mod view;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use io::{load_graph, save_graph};
pub use view::GraphView;

use crate::corpus::ArticleRecord;
use crate::resolver::AliasMap;
use crate::{EntityType, Error, Result};

/// Unordered node pair stored with `u < v`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeKey {
    pub u: String,
    pub v: String,
}

impl EdgeKey {
    /// Order-normalizes the pair. Returns `None` for self-loops.
    pub fn new(a: &str, b: &str) -> Option<Self> {
        match a.cmp(b) {
            std::cmp::Ordering::Less => Some(EdgeKey {
                u: a.to_string(),
                v: b.to_string(),
            }),
            std::cmp::Ordering::Greater => Some(EdgeKey {
                u: b.to_string(),
                v: a.to_string(),
            }),
            std::cmp::Ordering::Equal => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeAttr {
    pub weight: u32,
    pub first: NaiveDate,
    pub last: NaiveDate,
}

impl EdgeAttr {
    fn merge(&mut self, other: &EdgeAttr) {
        self.weight += other.weight;
        self.first = self.first.min(other.first);
        self.last = self.last.max(other.last);
    }
}

/// Inclusive calendar window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl TimeWindow {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Result<Self> {
        if start > end {
            return Err(Error::Invalid(format!("window start {start} is after end {end}")));
        }
        Ok(TimeWindow { start, end })
    }

    pub fn contains(&self, d: NaiveDate) -> bool {
        self.start <= d && d <= self.end
    }
}

impl fmt::Display for TimeWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..={}", self.start, self.end)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MediaGraph {
    nodes: BTreeMap<String, EntityType>,
    edges: BTreeMap<EdgeKey, EdgeAttr>,
}

impl MediaGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, name: &str, entity_type: EntityType) {
        let slot = self.nodes.entry(name.to_string()).or_insert(entity_type);
        if *slot == EntityType::Unknown {
            *slot = entity_type;
        }
    }

    /// Inserts or overwrites an edge; endpoints are added as `Unknown` if
    /// missing. Self-loops, zero weights and inverted dates are rejected.
    pub fn insert_edge(&mut self, a: &str, b: &str, attr: EdgeAttr) -> Result<()> {
        let key = EdgeKey::new(a, b).ok_or_else(|| Error::Invalid(format!("self-loop on `{a}`")))?;
        if attr.weight == 0 {
            return Err(Error::Invalid(format!("edge {a}--{b} has zero weight")));
        }
        if attr.first > attr.last {
            return Err(Error::Invalid(format!("edge {a}--{b} has first date after last date")));
        }
        self.add_node(a, EntityType::Unknown);
        self.add_node(b, EntityType::Unknown);
        self.edges.insert(key, attr);
        Ok(())
    }

    /// Records one co-occurrence of `a` and `b` on `date`. Self-pairs are
    /// ignored.
    pub fn add_cooccurrence(&mut self, a: &str, b: &str, date: NaiveDate) {
        let Some(key) = EdgeKey::new(a, b) else { return };
        self.add_node(a, EntityType::Unknown);
        self.add_node(b, EntityType::Unknown);
        let one = EdgeAttr {
            weight: 1,
            first: date,
            last: date,
        };
        self.edges.entry(key).and_modify(|e| e.merge(&one)).or_insert(one);
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (&str, EntityType)> {
        self.nodes.iter().map(|(n, t)| (n.as_str(), *t))
    }

    pub fn contains_node(&self, name: &str) -> bool {
        self.nodes.contains_key(name)
    }

    pub fn node_type(&self, name: &str) -> Option<EntityType> {
        self.nodes.get(name).copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = (&EdgeKey, &EdgeAttr)> {
        self.edges.iter()
    }

    pub fn edge(&self, a: &str, b: &str) -> Option<&EdgeAttr> {
        EdgeKey::new(a, b).and_then(|k| self.edges.get(&k))
    }

    pub fn has_edge(&self, a: &str, b: &str) -> bool {
        self.edge(a, b).is_some()
    }

    /// Earliest first date and latest last date over all edges.
    pub fn date_range(&self) -> Option<(NaiveDate, NaiveDate)> {
        let first = self.edges.values().map(|e| e.first).min()?;
        let last = self.edges.values().map(|e| e.last).max()?;
        Some((first, last))
    }

    /// Keeps edges satisfying `keep`, and only the nodes they touch.
    pub fn filter_edges(&self, mut keep: impl FnMut(&EdgeKey, &EdgeAttr) -> bool) -> MediaGraph {
        let edges: BTreeMap<EdgeKey, EdgeAttr> = self
            .edges
            .iter()
            .filter(|(k, a)| keep(k, a))
            .map(|(k, a)| (k.clone(), *a))
            .collect();
        let touched: BTreeSet<&str> = edges.keys().flat_map(|k| [k.u.as_str(), k.v.as_str()]).collect();
        let nodes = self
            .nodes
            .iter()
            .filter(|(n, _)| touched.contains(n.as_str()))
            .map(|(n, t)| (n.clone(), *t))
            .collect();
        MediaGraph { nodes, edges }
    }

    /// The graph minus nodes without edges.
    pub fn without_isolated(&self) -> MediaGraph {
        self.filter_edges(|_, _| true)
    }

    /// Induced subgraph on `keep`.
    pub fn subgraph(&self, keep: &BTreeSet<String>) -> MediaGraph {
        let nodes = self
            .nodes
            .iter()
            .filter(|(n, _)| keep.contains(*n))
            .map(|(n, t)| (n.clone(), *t))
            .collect();
        let edges = self
            .edges
            .iter()
            .filter(|(k, _)| keep.contains(&k.u) && keep.contains(&k.v))
            .map(|(k, a)| (k.clone(), *a))
            .collect();
        MediaGraph { nodes, edges }
    }

    pub fn view(&self) -> GraphView {
        GraphView::new(self)
    }
}

/// A resolved mention: canonical entity name and type.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mention {
    pub name: String,
    pub entity_type: EntityType,
}

/// One article reduced to its date and resolved mention set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolvedArticle {
    pub date: NaiveDate,
    pub mentions: Vec<Mention>,
}

/// Maps each article's surface mentions to canonical names. Mentions not
/// covered by the alias map keep their surface form and an unknown type.
pub fn resolve_articles(
    articles: &[ArticleRecord],
    mentions: &[Vec<String>],
    aliases: &AliasMap,
) -> Vec<ResolvedArticle> {
    articles
        .iter()
        .zip(mentions)
        .map(|(a, ms)| ResolvedArticle {
            date: a.publish_date,
            mentions: ms
                .iter()
                .map(|m| match aliases.resolve(m) {
                    Some((name, t)) => Mention {
                        name: name.to_string(),
                        entity_type: t,
                    },
                    None => Mention {
                        name: m.trim().to_string(),
                        entity_type: EntityType::Unknown,
                    },
                })
                .collect(),
        })
        .collect()
}

fn article_graph(article: &ResolvedArticle, person_only: bool) -> MediaGraph {
    let mut g = MediaGraph::new();
    let mut names: BTreeMap<&str, EntityType> = BTreeMap::new();
    for m in &article.mentions {
        if person_only && !m.entity_type.is_person_kind() {
            continue;
        }
        let slot = names.entry(m.name.as_str()).or_insert(m.entity_type);
        if *slot == EntityType::Unknown {
            *slot = m.entity_type;
        }
    }
    for (&n, &t) in &names {
        g.add_node(n, t);
    }
    let list: Vec<&str> = names.keys().copied().collect();
    for (i, a) in list.iter().enumerate() {
        for b in &list[i + 1..] {
            g.add_cooccurrence(a, b, article.date);
        }
    }
    g
}

fn merge_graphs(mut a: MediaGraph, b: MediaGraph) -> MediaGraph {
    for (n, t) in b.nodes {
        a.add_node(&n, t);
    }
    for (k, attr) in b.edges {
        a.edges.entry(k).and_modify(|e| e.merge(&attr)).or_insert(attr);
    }
    a
}

/// Every unordered pair of distinct canonicals in an article adds one to
/// that pair's weight. With `person_only`, ORG mentions are dropped first.
pub fn build_graph(articles: &[ResolvedArticle], person_only: bool) -> MediaGraph {
    articles
        .par_iter()
        .fold(MediaGraph::new, |acc, a| {
            merge_graphs(acc, article_graph(a, person_only))
        })
        .reduce(MediaGraph::new, merge_graphs)
}

/// `2|E| / (|V| (|V| - 1))`.
pub fn density_of(nodes: usize, edges: usize) -> Result<f64> {
    if nodes < 2 {
        return Err(Error::UndefinedDensity);
    }
    let n = nodes as f64;
    Ok(2.0 * edges as f64 / (n * (n - 1.0)))
}

pub fn density(g: &MediaGraph) -> Result<f64> {
    density_of(g.node_count(), g.edge_count())
}

/// Edges whose first co-occurrence lies inside `w`, without isolated nodes.
pub fn slice_by_time(g: &MediaGraph, w: &TimeWindow) -> MediaGraph {
    g.filter_edges(|_, a| w.contains(a.first))
}

/// Edges with weight at least `min_weight`, without isolated nodes.
pub fn threshold_edges(g: &MediaGraph, min_weight: u32) -> MediaGraph {
    assert!(min_weight >= 1, "min_weight must be positive");
    g.filter_edges(|_, a| a.weight >= min_weight)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    fn art(date: NaiveDate, names: &[&str]) -> ResolvedArticle {
        ResolvedArticle {
            date,
            mentions: names
                .iter()
                .map(|n| Mention {
                    name: n.to_string(),
                    entity_type: EntityType::Person,
                })
                .collect(),
        }
    }

    pub(crate) fn triangle() -> MediaGraph {
        build_graph(&[art(d(2021, 1, 1), &["A", "B", "C"])], false)
    }

    #[test]
    fn one_article_gives_a_clique() {
        let g = triangle();
        assert_eq!(g.edge_count(), 3);
        assert!(g.edges().all(|(_, a)| a.weight == 1));
    }

    #[test]
    fn weights_add_and_dates_span() {
        let g = build_graph(
            &[art(d(2021, 1, 1), &["A", "B"]), art(d(2021, 3, 1), &["B", "A"])],
            false,
        );
        let e = g.edge("A", "B").unwrap();
        assert_eq!((e.weight, e.first, e.last), (2, d(2021, 1, 1), d(2021, 3, 1)));
    }

    #[test]
    fn single_mention_and_self_pairs() {
        let g = build_graph(&[art(d(2021, 1, 1), &["A"]), art(d(2021, 1, 2), &["B", "B"])], false);
        assert_eq!(g.edge_count(), 0);
        assert!(g.insert_edge_checked_self_loop());
    }

    impl MediaGraph {
        fn insert_edge_checked_self_loop(&self) -> bool {
            let mut g = self.clone();
            let attr = EdgeAttr {
                weight: 1,
                first: d(2021, 1, 1),
                last: d(2021, 1, 1),
            };
            g.insert_edge("A", "A", attr).is_err()
        }
    }

    #[test]
    fn person_only_drops_orgs_keeps_unknown() {
        let mut a = art(d(2021, 1, 1), &["A", "B"]);
        a.mentions.push(Mention {
            name: "Corp".into(),
            entity_type: EntityType::Org,
        });
        a.mentions.push(Mention {
            name: "X".into(),
            entity_type: EntityType::Unknown,
        });
        let g = build_graph(&[a], true);
        assert!(!g.contains_node("Corp"));
        assert!(g.has_edge("A", "X"));
        assert_eq!(g.edge_count(), 3);
    }

    #[test]
    fn density_examples() {
        assert!((density_of(6197, 14014).unwrap() - 0.000730).abs() < 5e-7);
        assert!((density_of(865, 5091).unwrap() - 0.013624).abs() < 5e-7);
        assert_eq!(density(&triangle()).unwrap(), 1.0);
        assert!(matches!(density_of(1, 0), Err(Error::UndefinedDensity)));
    }

    #[test]
    fn slicing_by_first_date() {
        let g = build_graph(
            &[
                art(d(2020, 3, 1), &["A", "B"]),
                art(d(2021, 6, 10), &["C", "D"]),
                art(d(2021, 8, 1), &["C", "D"]),
            ],
            false,
        );
        let all = TimeWindow::new(d(2020, 1, 1), d(2021, 12, 31)).unwrap();
        assert_eq!(slice_by_time(&g, &all), g.without_isolated());
        let before = TimeWindow::new(d(2019, 1, 1), d(2019, 12, 31)).unwrap();
        assert!(slice_by_time(&g, &before).is_empty());
        let to_may = TimeWindow::new(d(2020, 1, 1), d(2021, 5, 31)).unwrap();
        assert!(!slice_by_time(&g, &to_may).has_edge("C", "D"));
        let to_jul = TimeWindow::new(d(2020, 1, 1), d(2021, 7, 31)).unwrap();
        let s = slice_by_time(&g, &to_jul);
        assert!(s.has_edge("C", "D"));
        assert_eq!(s.edge("C", "D").unwrap().weight, 2);
    }

    #[test]
    fn thresholds() {
        let g = build_graph(
            &[
                art(d(2021, 1, 1), &["A", "B", "C"]),
                art(d(2021, 1, 2), &["B", "C", "D"]),
                art(d(2021, 1, 3), &["C", "D"]),
            ],
            false,
        );
        // AB=1 AC=1 BC=2 BD=1 CD=2
        assert_eq!(threshold_edges(&g, 1), g.without_isolated());
        let t = threshold_edges(&g, 2);
        let weights: Vec<u32> = t.edges().map(|(_, a)| a.weight).collect();
        assert_eq!(weights, vec![2, 2]);
        assert!(!t.contains_node("A"));
        assert!(threshold_edges(&g, 3).is_empty());
    }

    #[test]
    fn inverted_window_is_rejected() {
        assert!(TimeWindow::new(d(2021, 2, 1), d(2021, 1, 1)).is_err());
    }

    fn corpus_strategy() -> impl Strategy<Value = Vec<(u32, Vec<usize>)>> {
        proptest::collection::vec((1u32..28, proptest::collection::vec(0usize..8, 0..5)), 0..100)
    }

    fn to_articles(raw: &[(u32, Vec<usize>)]) -> Vec<ResolvedArticle> {
        let names = ["A", "B", "C", "D", "E", "F", "G", "H"];
        raw.iter()
            .map(|(day, ids)| art(d(2021, 2, *day), &ids.iter().map(|&i| names[i]).collect::<Vec<_>>()))
            .collect()
    }

    proptest! {
        #[test]
        fn weight_equals_brute_force_article_count(raw in corpus_strategy()) {
            let articles = to_articles(&raw);
            let g = build_graph(&articles, false);
            for (k, attr) in g.edges() {
                let count = articles.iter().filter(|a| {
                    a.mentions.iter().any(|m| m.name == k.u) && a.mentions.iter().any(|m| m.name == k.v)
                }).count();
                prop_assert_eq!(attr.weight as usize, count);
                prop_assert!(attr.first <= attr.last);
                prop_assert!(k.u < k.v);
            }
            let names = ["A", "B", "C", "D", "E", "F", "G", "H"];
            for (i, a) in names.iter().enumerate() {
                for b in &names[i + 1..] {
                    let together = articles.iter().any(|art| {
                        art.mentions.iter().any(|m| m.name == *a) && art.mentions.iter().any(|m| m.name == *b)
                    });
                    prop_assert_eq!(g.has_edge(a, b), together);
                }
            }
        }

        #[test]
        fn threshold_and_slice_are_monotone(raw in corpus_strategy(), lo in 1u32..4, extra in 0u32..3, cut in 1u32..28) {
            let g = build_graph(&to_articles(&raw), false);
            prop_assert!(threshold_edges(&g, lo + extra).edge_count() <= threshold_edges(&g, lo).edge_count());
            let narrow = TimeWindow::new(d(2021, 2, 1), d(2021, 2, cut)).unwrap();
            let wide = TimeWindow::new(d(2021, 2, 1), d(2021, 2, 28)).unwrap();
            prop_assert!(slice_by_time(&g, &narrow).edge_count() <= slice_by_time(&g, &wide).edge_count());
        }
    }
}

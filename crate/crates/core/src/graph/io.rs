use std::fs;
use std::io::Write;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{EdgeAttr, MediaGraph};
use crate::{EntityType, Error, Result};

#[derive(Serialize, Deserialize)]
struct NodeRow {
    name: String,
    #[serde(rename = "type", default)]
    entity_type: EntityType,
}

#[derive(Serialize, Deserialize)]
struct EdgeRow {
    u: String,
    v: String,
    weight: u32,
    first: NaiveDate,
    last: NaiveDate,
}

#[derive(Deserialize)]
struct GraphFile {
    nodes: Vec<NodeRow>,
    edges: Vec<EdgeRow>,
}

/// Writes one node or edge object per line so load errors can point at the
/// offending line.
pub fn save_graph(g: &MediaGraph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::new();
    let rows = |out: &mut Vec<u8>, items: Vec<String>| {
        let n = items.len();
        for (i, s) in items.into_iter().enumerate() {
            let sep = if i + 1 < n { "," } else { "" };
            let _ = writeln!(out, "    {s}{sep}");
        }
    };
    out.extend_from_slice(b"{\n  \"nodes\": [\n");
    let nodes = g
        .nodes()
        .map(|(n, t)| {
            serde_json::to_string(&NodeRow {
                name: n.to_string(),
                entity_type: t,
            })
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    rows(&mut out, nodes);
    out.extend_from_slice(b"  ],\n  \"edges\": [\n");
    let edges = g
        .edges()
        .map(|(k, a)| {
            serde_json::to_string(&EdgeRow {
                u: k.u.clone(),
                v: k.v.clone(),
                weight: a.weight,
                first: a.first,
                last: a.last,
            })
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    rows(&mut out, edges);
    out.extend_from_slice(b"  ]\n}\n");
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// 1-based line of the `n`-th occurrence of `needle`, or 0 if absent.
fn line_of_nth(text: &str, needle: &str, n: usize) -> usize {
    text.match_indices(needle)
        .nth(n)
        .map(|(at, _)| text[..at].matches('\n').count() + 1)
        .unwrap_or(0)
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<MediaGraph> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_graph(&text)
}

pub(crate) fn parse_graph(text: &str) -> Result<MediaGraph> {
    let file: GraphFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    let mut g = MediaGraph::new();
    for (i, n) in file.nodes.iter().enumerate() {
        if g.contains_node(&n.name) {
            return Err(Error::Parse {
                line: line_of_nth(text, "\"name\"", i),
                message: format!("duplicate node `{}`", n.name),
            });
        }
        g.add_node(&n.name, n.entity_type);
    }
    for (i, e) in file.edges.iter().enumerate() {
        let fail = |message: String| Error::Parse {
            line: line_of_nth(text, "\"u\"", i),
            message,
        };
        if e.u >= e.v {
            return Err(fail(format!(
                "edge endpoints must satisfy u < v, got `{}`, `{}`",
                e.u, e.v
            )));
        }
        for end in [&e.u, &e.v] {
            if !g.contains_node(end) {
                return Err(fail(format!("edge endpoint `{end}` is not a declared node")));
            }
        }
        if g.has_edge(&e.u, &e.v) {
            return Err(fail(format!("duplicate edge `{}`--`{}`", e.u, e.v)));
        }
        let attr = EdgeAttr {
            weight: e.weight,
            first: e.first,
            last: e.last,
        };
        g.insert_edge(&e.u, &e.v, attr).map_err(|err| fail(err.to_string()))?;
    }
    Ok(g)
}

//! Graph file formats.
//!
//! Edge-list text: an optional first line `# nodes <n>`, then one edge per
//! line as `<u> <v>`, whitespace separated and 0-based. JSON:
//! `{"num_nodes": n, "edges": [[u, v], ...]}`. Both round-trip losslessly.

use crate::graph::{Graph, GraphError};
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    num_nodes: usize,
    edges: Vec<(usize, usize)>,
}

/// Parses the edge-list text format.
pub fn parse_edge_list(text: &str) -> Result<Graph, IoError> {
    let mut declared_nodes: Option<usize> = None;
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let mut parts = rest.split_whitespace();
            if parts.next() == Some("nodes") {
                let n = parts
                    .next()
                    .and_then(|t| t.parse::<usize>().ok())
                    .ok_or_else(|| IoError::Parse {
                        line: idx + 1,
                        message: "expected `# nodes <n>`".into(),
                    })?;
                declared_nodes = Some(n);
            }
            continue;
        }
        let mut parts = line.split_whitespace();
        let u = parts.next().and_then(|t| t.parse::<usize>().ok());
        let v = parts.next().and_then(|t| t.parse::<usize>().ok());
        match (u, v, parts.next()) {
            (Some(u), Some(v), None) => edges.push((u, v)),
            _ => {
                return Err(IoError::Parse {
                    line: idx + 1,
                    message: format!("expected `<u> <v>`, got `{line}`"),
                })
            }
        }
    }
    let num_nodes = declared_nodes
        .unwrap_or_else(|| edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0));
    Ok(Graph::new(num_nodes, &edges)?)
}

/// Renders the edge-list text format, header included.
pub fn to_edge_list(graph: &Graph) -> String {
    let mut out = format!("# nodes {}\n", graph.num_nodes());
    for &(u, v) in graph.edges() {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

/// Parses the JSON graph format.
pub fn parse_json(text: &str) -> Result<Graph, IoError> {
    let raw: GraphJson = serde_json::from_str(text)?;
    Ok(Graph::new(raw.num_nodes, &raw.edges)?)
}

/// Renders the JSON graph format.
pub fn to_json(graph: &Graph) -> String {
    let raw = GraphJson {
        num_nodes: graph.num_nodes(),
        edges: graph.edges().to_vec(),
    };
    serde_json::to_string_pretty(&raw).expect("graph json serializes")
}

/// Reads a graph file, dispatching on extension: `.json` selects the JSON
/// format, anything else the edge-list text format.
pub fn read_graph_file(path: &Path) -> Result<Graph, IoError> {
    let text = std::fs::read_to_string(path)?;
    if path.extension().and_then(|e| e.to_str()) == Some("json") {
        parse_json(&text)
    } else {
        parse_edge_list(&text)
    }
}

/// Writes a graph file in the format matching the extension.
pub fn write_graph_file(path: &Path, graph: &Graph) -> Result<(), IoError> {
    let text = if path.extension().and_then(|e| e.to_str()) == Some("json") {
        to_json(graph)
    } else {
        to_edge_list(graph)
    };
    std::fs::write(path, text)?;
    Ok(())
}

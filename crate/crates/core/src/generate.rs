//! Synthetic test-bed networks.

use std::collections::BTreeSet;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netgraph::{self, Graph, NodeIdx};
use crate::rng;

/// Erdős–Rényi `G(n, p)`.
pub fn erdos_renyi(n: usize, edge_prob: f64, seed: u64) -> Result<Graph> {
    if !(0.0..=1.0).contains(&edge_prob) {
        return Err(Error::param(format!("edge probability {edge_prob} outside [0, 1]")));
    }
    let mut rng = rng::stream(seed, 0);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(edge_prob) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, &edges)
}

/// Barabási–Albert preferential attachment. Starts from a clique on
/// `attachments + 1` nodes; each later node links to `attachments` distinct
/// earlier nodes chosen proportionally to degree.
pub fn barabasi_albert(n: usize, attachments: usize, seed: u64) -> Result<Graph> {
    if attachments == 0 {
        return Err(Error::param("attachments must be at least 1"));
    }
    if n <= attachments {
        return Err(Error::param(format!(
            "BA needs more than {attachments} nodes, got {n}"
        )));
    }
    let mut rng = rng::stream(seed, 0);
    let mut edges = Vec::new();
    // Each endpoint appears once per incident edge.
    let mut ends: Vec<NodeIdx> = Vec::new();
    for u in 0..=attachments {
        for v in u + 1..=attachments {
            edges.push((u, v));
            ends.push(u);
            ends.push(v);
        }
    }
    for v in attachments + 1..n {
        let mut targets = BTreeSet::new();
        while targets.len() < attachments {
            targets.insert(ends[rng.gen_range(0..ends.len())]);
        }
        for &u in &targets {
            edges.push((u, v));
            ends.push(u);
            ends.push(v);
        }
    }
    Graph::from_edges(n, &edges)
}

/// Watts–Strogatz: ring lattice where each node links to `ring_degree / 2`
/// successors, then each lattice edge is rewired with probability
/// `rewire_prob` to a uniformly random non-neighbor.
pub fn watts_strogatz(n: usize, ring_degree: usize, rewire_prob: f64, seed: u64) -> Result<Graph> {
    if !ring_degree.is_multiple_of(2) || ring_degree == 0 {
        return Err(Error::param(format!(
            "ring degree must be even and positive, got {ring_degree}"
        )));
    }
    if ring_degree >= n {
        return Err(Error::param(format!(
            "ring degree {ring_degree} must be below n = {n}"
        )));
    }
    if !(0.0..=1.0).contains(&rewire_prob) {
        return Err(Error::param(format!("rewire probability {rewire_prob} outside [0, 1]")));
    }
    let mut rng = rng::stream(seed, 0);
    let key = |u: NodeIdx, v: NodeIdx| (u.min(v), u.max(v));
    let mut edges: BTreeSet<(NodeIdx, NodeIdx)> = BTreeSet::new();
    for u in 0..n {
        for j in 1..=ring_degree / 2 {
            edges.insert(key(u, (u + j) % n));
        }
    }
    for j in 1..=ring_degree / 2 {
        for u in 0..n {
            let v = (u + j) % n;
            if !rng.gen_bool(rewire_prob) {
                continue;
            }
            let free: Vec<NodeIdx> = (0..n)
                .filter(|&w| w != u && !edges.contains(&key(u, w)))
                .collect();
            if let Some(&w) = free.choose(&mut rng) {
                edges.remove(&key(u, v));
                edges.insert(key(u, w));
            }
        }
    }
    let edges: Vec<_> = edges.into_iter().collect();
    Graph::from_edges(n, &edges)
}

/// Serializable graph source.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum GraphModel {
    Er { n: usize, edge_prob: f64 },
    Ba { n: usize, attachments: usize },
    Ws { n: usize, ring_degree: usize, rewire_prob: f64 },
    File { path: PathBuf },
}

impl GraphModel {
    pub fn generate(&self, seed: u64) -> Result<Graph> {
        match *self {
            GraphModel::Er { n, edge_prob } => erdos_renyi(n, edge_prob, seed),
            GraphModel::Ba { n, attachments } => barabasi_albert(n, attachments, seed),
            GraphModel::Ws {
                n,
                ring_degree,
                rewire_prob,
            } => watts_strogatz(n, ring_degree, rewire_prob, seed),
            GraphModel::File { ref path } => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                netgraph::load_edge_list(&text)
            }
        }
    }

    /// Short label used as the graph id in result tables.
    pub fn label(&self) -> String {
        match self {
            GraphModel::Er { n, edge_prob } => format!("er-{n}-{edge_prob}"),
            GraphModel::Ba { n, attachments } => format!("ba-{n}-{attachments}"),
            GraphModel::Ws {
                n,
                ring_degree,
                rewire_prob,
            } => format!("ws-{n}-{ring_degree}-{rewire_prob}"),
            GraphModel::File { path } => format!(
                "file-{}",
                path.file_stem().map(|s| s.to_string_lossy()).unwrap_or_default()
            ),
        }
    }

    /// Whether a fresh graph is drawn per replication.
    pub fn is_random(&self) -> bool {
        !matches!(self, GraphModel::File { .. })
    }
}

/// Free-function form of [`GraphModel::generate`].
pub fn generate_graph(model: &GraphModel, seed: u64) -> Result<Graph> {
    model.generate(seed)
}

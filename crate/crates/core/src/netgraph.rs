//! Graph model, partial observation bookkeeping and edge-list ingestion.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense internal node index, `0..n`.
pub type NodeIdx = usize;

/// Bijection between opaque external tokens and dense indices.
///
/// Indices are assigned in insertion order and never change.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Roster {
    tokens: Vec<String>,
    index: HashMap<String, NodeIdx>,
}

impl Roster {
    pub fn new() -> Self {
        Self::default()
    }

    /// Roster `"0", "1", …, "n-1"`.
    pub fn numbered(n: usize) -> Self {
        let mut r = Roster::new();
        for i in 0..n {
            r.insert(&i.to_string()).expect("numeric tokens are valid");
        }
        r
    }

    /// Builds a roster from a token list, rejecting duplicates.
    pub fn from_tokens<I, S>(tokens: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut r = Roster::new();
        for t in tokens {
            let t = t.as_ref();
            if r.contains(t) {
                return Err(Error::DuplicateToken(t.to_string()));
            }
            r.insert(t)?;
        }
        Ok(r)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn index(&self, token: &str) -> Option<NodeIdx> {
        self.index.get(token).copied()
    }

    pub fn require(&self, token: &str) -> Result<NodeIdx> {
        self.index(token)
            .ok_or_else(|| Error::UnknownNode(token.to_string()))
    }

    pub fn token(&self, idx: NodeIdx) -> &str {
        &self.tokens[idx]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn tokens_of(&self, nodes: &[NodeIdx]) -> Vec<String> {
        nodes.iter().map(|&v| self.tokens[v].clone()).collect()
    }

    /// Returns the index of `token`, appending it if new.
    pub fn insert(&mut self, token: &str) -> Result<NodeIdx> {
        if let Some(i) = self.index(token) {
            return Ok(i);
        }
        validate_token(token)?;
        let i = self.tokens.len();
        self.tokens.push(token.to_string());
        self.index.insert(token.to_string(), i);
        Ok(i)
    }
}

/// Tokens must survive a round trip through the edge-list format.
pub fn validate_token(token: &str) -> Result<()> {
    if token.is_empty() || token.starts_with('#') || token.chars().any(char::is_whitespace) {
        return Err(Error::InvalidToken(token.to_string()));
    }
    Ok(())
}

/// Undirected simple graph over a roster.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    roster: Roster,
    adj: Vec<Vec<NodeIdx>>,
    edges: Vec<(NodeIdx, NodeIdx)>,
}

impl Graph {
    /// Graph over a numbered roster. Duplicate edges are merged; self-loops
    /// and out-of-range endpoints are rejected.
    pub fn from_edges(n: usize, edges: &[(NodeIdx, NodeIdx)]) -> Result<Self> {
        Self::with_roster(Roster::numbered(n), edges.iter().copied())
    }

    pub fn with_roster<I>(roster: Roster, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeIdx, NodeIdx)>,
    {
        let n = roster.len();
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::param(format!("edge ({u}, {v}) outside 0..{n}")));
            }
            if u == v {
                return Err(Error::SelfLoop {
                    line: 0,
                    token: roster.token(u).to_string(),
                });
            }
            set.insert((u.min(v), u.max(v)));
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &set {
            adj[u].push(v);
            adj[v].push(u);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        Ok(Graph {
            roster,
            adj,
            edges: set.into_iter().collect(),
        })
    }

    pub fn empty(n: usize) -> Self {
        Self::from_edges(n, &[]).expect("empty graph is valid")
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn roster(&self) -> &Roster {
        &self.roster
    }

    /// Sorted `(u, v)` pairs with `u < v`.
    pub fn edges(&self) -> &[(NodeIdx, NodeIdx)] {
        &self.edges
    }

    pub fn neighbors(&self, v: NodeIdx) -> &[NodeIdx] {
        &self.adj[v]
    }

    pub fn degree(&self, v: NodeIdx) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: NodeIdx, v: NodeIdx) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    pub fn nodes(&self) -> std::ops::Range<NodeIdx> {
        0..self.node_count()
    }

    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &w in &self.adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == n
    }

    /// Nodes reachable from `seeds` (the union of their components), sorted.
    pub fn component_union(&self, seeds: &[NodeIdx]) -> Vec<NodeIdx> {
        let mut seen = vec![false; self.node_count()];
        let mut stack: Vec<NodeIdx> = Vec::new();
        for &s in seeds {
            if !seen[s] {
                seen[s] = true;
                stack.push(s);
            }
        }
        while let Some(u) = stack.pop() {
            for &w in &self.adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        (0..seen.len()).filter(|&v| seen[v]).collect()
    }

    /// Serializes as an edge list: every node as a single-token line in index
    /// order, then one line per edge. Loading the output reproduces the graph
    /// including its index assignment.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for t in self.roster.tokens() {
            let _ = writeln!(out, "{t}");
        }
        for &(u, v) in &self.edges {
            let _ = writeln!(out, "{} {}", self.roster.token(u), self.roster.token(v));
        }
        out
    }
}

/// Parses an edge list. Lines starting with `#` and blank lines are skipped; a
/// line holds either one token (a node) or two (an undirected edge).
pub fn load_edge_list(text: &str) -> Result<Graph> {
    let mut roster = Roster::new();
    let mut edges = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.as_slice() {
            [a] => {
                roster.insert(a).map_err(|e| at_line(e, line_no))?;
            }
            [a, b] => {
                if a == b {
                    return Err(Error::SelfLoop {
                        line: line_no,
                        token: a.to_string(),
                    });
                }
                let u = roster.insert(a).map_err(|e| at_line(e, line_no))?;
                let v = roster.insert(b).map_err(|e| at_line(e, line_no))?;
                edges.push((u, v));
            }
            other => {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected 1 or 2 tokens, found {}", other.len()),
                })
            }
        }
    }
    Graph::with_roster(roster, edges)
}

fn at_line(e: Error, line: usize) -> Error {
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

/// Parses a roster file: one token per line, `#` comments allowed.
pub fn load_roster(text: &str) -> Result<Roster> {
    let mut tokens = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.split_whitespace().count() != 1 {
            return Err(Error::Parse {
                line: i + 1,
                message: "expected one token".into(),
            });
        }
        tokens.push(line);
    }
    Roster::from_tokens(tokens)
}

/// The `k` nodes of largest degree, ties broken by ascending index.
pub fn top_k_by_degree(g: &Graph, k: usize) -> Result<Vec<NodeIdx>> {
    if k > g.node_count() {
        return Err(Error::param(format!(
            "k = {k} exceeds node count {}",
            g.node_count()
        )));
    }
    let all: Vec<NodeIdx> = g.nodes().collect();
    Ok(top_k_by_degree_among(g, &all, k))
}

/// Like [`top_k_by_degree`] but restricted to `pool`; returns fewer than `k`
/// nodes when the pool is smaller.
pub fn top_k_by_degree_among(g: &Graph, pool: &[NodeIdx], k: usize) -> Vec<NodeIdx> {
    let mut order = pool.to_vec();
    order.sort_by(|&a, &b| g.degree(b).cmp(&g.degree(a)).then(a.cmp(&b)));
    order.truncate(k);
    order
}

/// What the interviewer has learned so far: which nodes were queried and the
/// edges they reported.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObservedNetwork {
    roster: Roster,
    queried: Vec<bool>,
    query_order: Vec<NodeIdx>,
    edges: BTreeSet<(NodeIdx, NodeIdx)>,
}

/// Result of applying one query answer.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RevealSummary {
    pub new_edges: usize,
    pub new_nodes: Vec<NodeIdx>,
}

impl ObservedNetwork {
    pub fn new(roster: Roster) -> Self {
        let n = roster.len();
        ObservedNetwork {
            roster,
            queried: vec![false; n],
            query_order: Vec::new(),
            edges: BTreeSet::new(),
        }
    }

    pub fn roster(&self) -> &Roster {
        &self.roster
    }

    pub fn node_count(&self) -> usize {
        self.roster.len()
    }

    pub fn is_queried(&self, v: NodeIdx) -> bool {
        self.queried[v]
    }

    /// Queried nodes in query order.
    pub fn queried(&self) -> &[NodeIdx] {
        &self.query_order
    }

    pub fn revealed_edges(&self) -> impl Iterator<Item = (NodeIdx, NodeIdx)> + '_ {
        self.edges.iter().copied()
    }

    pub fn revealed_edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Revealed neighbors of `v`, sorted.
    pub fn revealed_neighbors(&self, v: NodeIdx) -> Vec<NodeIdx> {
        let mut out: Vec<NodeIdx> = self
            .edges
            .range((v, 0)..=(v, NodeIdx::MAX))
            .map(|&(_, w)| w)
            .collect();
        out.extend(self.edges.iter().filter(|&&(_, w)| w == v).map(|&(u, _)| u));
        out.sort_unstable();
        out
    }

    /// Records that `node` reported `contacts`. Contacts missing from the
    /// roster are appended to it.
    pub fn reveal(&self, node: &str, contacts: &[&str]) -> Result<ObservedNetwork> {
        let mut next = self.clone();
        next.reveal_in_place(node, contacts)?;
        Ok(next)
    }

    pub fn reveal_in_place(&mut self, node: &str, contacts: &[&str]) -> Result<RevealSummary> {
        let u = self.roster.require(node)?;
        if self.queried[u] {
            return Err(Error::AlreadyQueried(node.to_string()));
        }
        if contacts.contains(&node) {
            return Err(Error::SelfLoop {
                line: 0,
                token: node.to_string(),
            });
        }
        for c in contacts {
            validate_token(c)?;
        }
        let mut summary = RevealSummary::default();
        let mut idx = Vec::with_capacity(contacts.len());
        for c in contacts {
            let before = self.roster.len();
            let v = self.roster.insert(c)?;
            if v == before {
                self.queried.push(false);
                summary.new_nodes.push(v);
            }
            idx.push(v);
        }
        summary.new_edges = self.reveal_indices(u, &idx);
        Ok(summary)
    }

    /// Index-based reveal for simulation, where the roster is fixed.
    pub fn reveal_index(&mut self, node: NodeIdx, contacts: &[NodeIdx]) -> Result<usize> {
        if node >= self.node_count() {
            return Err(Error::UnknownNode(node.to_string()));
        }
        if self.queried[node] {
            return Err(Error::AlreadyQueried(self.roster.token(node).to_string()));
        }
        if let Some(&bad) = contacts.iter().find(|&&c| c >= self.node_count() || c == node) {
            return Err(Error::param(format!("invalid contact {bad} for node {node}")));
        }
        Ok(self.reveal_indices(node, contacts))
    }

    fn reveal_indices(&mut self, u: NodeIdx, contacts: &[NodeIdx]) -> usize {
        self.queried[u] = true;
        self.query_order.push(u);
        let mut added = 0;
        for &v in contacts {
            if self.edges.insert((u.min(v), u.max(v))) {
                added += 1;
            }
        }
        added
    }

    /// The graph every downstream optimization runs on: the full roster with
    /// exactly the revealed edges.
    pub fn subgraph(&self) -> Graph {
        Graph::with_roster(self.roster.clone(), self.edges.iter().copied())
            .expect("revealed edges are valid")
    }
}

/// Free-function form of [`ObservedNetwork::subgraph`].
pub fn observed_subgraph(obs: &ObservedNetwork) -> Graph {
    obs.subgraph()
}

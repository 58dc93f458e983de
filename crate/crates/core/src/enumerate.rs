//! Every graph on a few nodes, one per isomorphism class.
//!
//! Classes on `n` nodes are grown from classes on `n - 1` nodes by adding a
//! vertex with every possible neighborhood, then deduplicated by a canonical
//! code: the largest adjacency bitstring over vertex orders that respect an
//! isomorphism-invariant vertex coloring.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::netgraph::Graph;

pub const MAX_NODES: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct Small {
    n: usize,
    adj: [u8; MAX_NODES],
}

impl Small {
    fn has(&self, u: usize, v: usize) -> bool {
        self.adj[u] >> v & 1 == 1
    }

    fn degree(&self, v: usize) -> u32 {
        self.adj[v].count_ones()
    }

    fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let full = ((1u16 << self.n) - 1) as u8;
        let mut seen = 1u8;
        let mut frontier = 1u8;
        while frontier != 0 {
            let mut next = 0u8;
            for v in 0..self.n {
                if frontier >> v & 1 == 1 {
                    next |= self.adj[v];
                }
            }
            frontier = next & !seen;
            seen |= next;
        }
        seen == full
    }

    fn code(&self, order: &[usize]) -> u32 {
        let mut code = 0u32;
        for i in 0..self.n {
            for j in i + 1..self.n {
                code = code << 1 | u32::from(self.has(order[i], order[j]));
            }
        }
        code
    }

    fn canonical(&self) -> u32 {
        let inv: Vec<(u32, Vec<u32>)> = (0..self.n)
            .map(|v| {
                let mut nd: Vec<u32> = (0..self.n)
                    .filter(|&w| self.has(v, w))
                    .map(|w| self.degree(w))
                    .collect();
                nd.sort_unstable();
                (self.degree(v), nd)
            })
            .collect();
        let mut vertices: Vec<usize> = (0..self.n).collect();
        vertices.sort_by(|&a, &b| inv[a].cmp(&inv[b]));
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for &v in &vertices {
            match classes.last_mut() {
                Some(c) if inv[c[0]] == inv[v] => c.push(v),
                _ => classes.push(vec![v]),
            }
        }
        let mut best = 0u32;
        let mut order = Vec::with_capacity(self.n);
        self.search(&mut classes, 0, &mut order, &mut best);
        best
    }

    fn search(&self, classes: &mut [Vec<usize>], ci: usize, order: &mut Vec<usize>, best: &mut u32) {
        if ci == classes.len() {
            *best = (*best).max(self.code(order));
            return;
        }
        let len = classes[ci].len();
        // Heap's algorithm over the class members.
        let mut c = vec![0usize; len];
        let base = order.len();
        order.extend_from_slice(&classes[ci]);
        self.search(classes, ci + 1, order, best);
        let mut i = 1;
        while i < len {
            if c[i] < i {
                let swap = if i % 2 == 0 { 0 } else { c[i] };
                classes[ci].swap(swap, i);
                order.truncate(base);
                order.extend_from_slice(&classes[ci]);
                self.search(classes, ci + 1, order, best);
                c[i] += 1;
                i = 1;
            } else {
                c[i] = 0;
                i += 1;
            }
        }
        order.truncate(base);
    }

    fn to_graph(self) -> Graph {
        let mut edges = Vec::new();
        for u in 0..self.n {
            for v in u + 1..self.n {
                if self.has(u, v) {
                    edges.push((u, v));
                }
            }
        }
        Graph::from_edges(self.n, &edges).expect("valid small graph")
    }
}

fn classes(n: usize) -> Vec<Small> {
    let mut level = vec![Small {
        n: 0,
        adj: [0; MAX_NODES],
    }];
    for size in 1..=n {
        let v = size - 1;
        let mut seen = HashSet::new();
        let mut next = Vec::new();
        for g in &level {
            for mask in 0u16..(1 << v) {
                let mut h = *g;
                h.n = size;
                h.adj[v] = mask as u8;
                for u in 0..v {
                    if mask >> u & 1 == 1 {
                        h.adj[u] |= 1 << v;
                    }
                }
                if seen.insert(h.canonical()) {
                    next.push(h);
                }
            }
        }
        level = next;
    }
    level
}

fn check(n: usize) -> Result<()> {
    if n > MAX_NODES {
        return Err(Error::LimitExceeded {
            what: "graph enumeration nodes",
            limit: MAX_NODES,
            actual: n,
        });
    }
    Ok(())
}

/// One representative per isomorphism class of graphs on exactly `n` nodes.
pub fn all_graphs(n: usize) -> Result<Vec<Graph>> {
    check(n)?;
    Ok(classes(n).into_iter().map(Small::to_graph).collect())
}

/// One representative per isomorphism class of connected graphs on exactly
/// `n` nodes.
pub fn connected_graphs(n: usize) -> Result<Vec<Graph>> {
    check(n)?;
    Ok(classes(n)
        .into_iter()
        .filter(Small::is_connected)
        .map(Small::to_graph)
        .collect())
}

/// Connected classes for every size `1..=max_nodes`.
pub fn connected_graphs_up_to(max_nodes: usize) -> Result<Vec<Graph>> {
    let mut out = Vec::new();
    for n in 1..=max_nodes {
        out.extend(connected_graphs(n)?);
    }
    Ok(out)
}

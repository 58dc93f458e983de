//! Exact spread for small graphs.
//!
//! [`exact_spread`] and [`exact_spread_attendance`] enumerate every live-edge
//! subset (and attendance pattern) literally. [`ComponentDistribution`]
//! computes the same quantity by tracking the distribution of the connected
//! component partition as edges are added one at a time, which stays cheap
//! on small graphs with many edges.

use std::collections::BTreeMap;

use super::{check_disjoint, check_nodes, AttendanceProb, PropagationProb, SetObjective};
use crate::error::{Error, Result};
use crate::netgraph::{Graph, NodeIdx};

pub const EDGE_LIMIT: usize = 20;
pub const INVITED_LIMIT: usize = 12;
pub const PARTITION_NODE_LIMIT: usize = 16;
pub const PARTITION_STATE_LIMIT: usize = 1 << 18;

fn root(parent: &mut [usize], mut v: usize) -> usize {
    while parent[v] != v {
        parent[v] = parent[parent[v]];
        v = parent[v];
    }
    v
}

/// Expected number of nodes reached from `seeds`, by enumerating all
/// `2^|E|` live-edge subsets.
pub fn exact_spread(g: &Graph, seeds: &[NodeIdx], p: PropagationProb) -> Result<f64> {
    let m = g.edge_count();
    if m > EDGE_LIMIT {
        return Err(Error::LimitExceeded {
            what: "edge count",
            limit: EDGE_LIMIT,
            actual: m,
        });
    }
    check_nodes(g, seeds)?;
    if seeds.is_empty() {
        return Ok(0.0);
    }
    let n = g.node_count();
    let p = p.value();
    let mut parent = vec![0; n];
    let mut seed_root = vec![false; n];
    let mut total = 0.0;
    for mask in 0u32..(1u32 << m) {
        let live = mask.count_ones() as i32;
        let weight = p.powi(live) * (1.0 - p).powi(m as i32 - live);
        if weight == 0.0 {
            continue;
        }
        for (i, slot) in parent.iter_mut().enumerate() {
            *slot = i;
        }
        for (e, &(u, v)) in g.edges().iter().enumerate() {
            if mask >> e & 1 == 1 {
                let a = root(&mut parent, u);
                let b = root(&mut parent, v);
                parent[a] = b;
            }
        }
        seed_root.iter_mut().for_each(|s| *s = false);
        for &s in seeds {
            let r = root(&mut parent, s);
            seed_root[r] = true;
        }
        let reached = (0..n).filter(|&v| seed_root[root(&mut parent, v)]).count();
        total += weight * reached as f64;
    }
    Ok(total)
}

/// `f(invited, p, q)` with `committed` always seeding, by enumerating every
/// attendance pattern of the invitees.
pub fn exact_spread_attendance(
    g: &Graph,
    invited: &[NodeIdx],
    committed: &[NodeIdx],
    p: PropagationProb,
    q: AttendanceProb,
) -> Result<f64> {
    if invited.len() > INVITED_LIMIT {
        return Err(Error::LimitExceeded {
            what: "invited count",
            limit: INVITED_LIMIT,
            actual: invited.len(),
        });
    }
    check_disjoint(invited, committed)?;
    let k = invited.len();
    let q = q.value();
    let mut total = 0.0;
    let mut seeds = Vec::with_capacity(k + committed.len());
    for mask in 0u32..(1u32 << k) {
        let a = mask.count_ones() as i32;
        let weight = q.powi(a) * (1.0 - q).powi(k as i32 - a);
        if weight == 0.0 {
            continue;
        }
        seeds.clear();
        seeds.extend_from_slice(committed);
        seeds.extend((0..k).filter(|&i| mask >> i & 1 == 1).map(|i| invited[i]));
        total += weight * exact_spread(g, &seeds, p)?;
    }
    Ok(total)
}

#[derive(Clone, Debug)]
struct PartitionState {
    prob: f64,
    blocks: Vec<u32>,
}

/// Exact distribution of the live-edge component partition of a small graph.
#[derive(Clone, Debug)]
pub struct ComponentDistribution {
    n: usize,
    states: Vec<PartitionState>,
}

fn unpack(key: u64, n: usize) -> [u8; PARTITION_NODE_LIMIT] {
    let mut labels = [0u8; PARTITION_NODE_LIMIT];
    for (i, l) in labels.iter_mut().enumerate().take(n) {
        *l = (key >> (4 * i) & 0xF) as u8;
    }
    labels
}

fn pack(labels: &[u8], n: usize) -> u64 {
    labels
        .iter()
        .take(n)
        .enumerate()
        .fold(0, |acc, (i, &l)| acc | (l as u64) << (4 * i))
}

/// Merges the blocks of `u` and `v` and relabels in first-appearance order.
fn merged(key: u64, n: usize, u: usize, v: usize) -> u64 {
    let mut labels = unpack(key, n);
    let (keep, drop) = (labels[u].min(labels[v]), labels[u].max(labels[v]));
    let mut remap = [u8::MAX; PARTITION_NODE_LIMIT];
    let mut next = 0u8;
    for l in labels.iter_mut().take(n) {
        if *l == drop {
            *l = keep;
        }
        if remap[*l as usize] == u8::MAX {
            remap[*l as usize] = next;
            next += 1;
        }
        *l = remap[*l as usize];
    }
    pack(&labels, n)
}

impl ComponentDistribution {
    pub fn new(g: &Graph, p: PropagationProb) -> Result<Self> {
        let n = g.node_count();
        if n > PARTITION_NODE_LIMIT {
            return Err(Error::LimitExceeded {
                what: "node count for exact partition enumeration",
                limit: PARTITION_NODE_LIMIT,
                actual: n,
            });
        }
        let p = p.value();
        let singletons: Vec<u8> = (0..n as u8).collect();
        let mut dist: BTreeMap<u64, f64> = BTreeMap::new();
        dist.insert(pack(&singletons, n), 1.0);
        for &(u, v) in g.edges() {
            let mut next: BTreeMap<u64, f64> = BTreeMap::new();
            for (&key, &prob) in &dist {
                let labels = unpack(key, n);
                if labels[u] == labels[v] {
                    *next.entry(key).or_default() += prob;
                } else {
                    if p < 1.0 {
                        *next.entry(key).or_default() += prob * (1.0 - p);
                    }
                    if p > 0.0 {
                        *next.entry(merged(key, n, u, v)).or_default() += prob * p;
                    }
                }
            }
            if next.len() > PARTITION_STATE_LIMIT {
                return Err(Error::LimitExceeded {
                    what: "partition states",
                    limit: PARTITION_STATE_LIMIT,
                    actual: next.len(),
                });
            }
            dist = next;
        }
        let states = dist
            .into_iter()
            .map(|(key, prob)| {
                let labels = unpack(key, n);
                let count = labels.iter().take(n).map(|&l| l as usize + 1).max().unwrap_or(0);
                let mut blocks = vec![0u32; count];
                for (v, &l) in labels.iter().take(n).enumerate() {
                    blocks[l as usize] |= 1 << v;
                }
                PartitionState { prob, blocks }
            })
            .collect();
        Ok(ComponentDistribution { n, states })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    /// Exact `f(seeds, p)`.
    pub fn spread(&self, seeds: u32) -> f64 {
        self.states
            .iter()
            .map(|s| {
                let reached: u32 = s
                    .blocks
                    .iter()
                    .filter(|&&b| b & seeds != 0)
                    .map(|b| b.count_ones())
                    .sum();
                s.prob * reached as f64
            })
            .sum()
    }

    /// Exact `f(invited, p, q)` with `committed` always seeding. A block is
    /// reached unless it has no committed node and none of its invitees
    /// attends.
    pub fn spread_attendance(&self, invited: u32, committed: u32, q: f64) -> f64 {
        let miss = 1.0 - q;
        self.states
            .iter()
            .map(|s| {
                let reached: f64 = s
                    .blocks
                    .iter()
                    .map(|&b| {
                        let hit = if b & committed != 0 {
                            1.0
                        } else {
                            1.0 - miss.powi((b & invited).count_ones() as i32)
                        };
                        b.count_ones() as f64 * hit
                    })
                    .sum();
                s.prob * reached
            })
            .sum()
    }

    /// Exact multilinear extension: node `v` is present independently with
    /// probability `presence[v]` (selection times attendance).
    pub fn multilinear(&self, presence: &[f64], committed: u32) -> f64 {
        self.states
            .iter()
            .map(|s| {
                let reached: f64 = s
                    .blocks
                    .iter()
                    .map(|&b| {
                        let hit = if b & committed != 0 {
                            1.0
                        } else {
                            let none: f64 = (0..self.n)
                                .filter(|&v| b >> v & 1 == 1)
                                .map(|v| 1.0 - presence[v])
                                .product();
                            1.0 - none
                        };
                        b.count_ones() as f64 * hit
                    })
                    .sum();
                s.prob * reached
            })
            .sum()
    }
}

pub(crate) fn mask_of(nodes: &[NodeIdx]) -> u32 {
    nodes.iter().fold(0, |m, &v| m | 1 << v)
}

/// Exact stage objective `f(S ∪ committed, p, q)` on a small graph.
#[derive(Clone, Debug)]
pub struct ExactObjective {
    dist: ComponentDistribution,
    committed: u32,
    q: f64,
}

impl ExactObjective {
    pub fn new(
        g: &Graph,
        p: PropagationProb,
        q: AttendanceProb,
        committed: &[NodeIdx],
    ) -> Result<Self> {
        check_nodes(g, committed)?;
        Ok(ExactObjective {
            dist: ComponentDistribution::new(g, p)?,
            committed: mask_of(committed),
            q: q.value(),
        })
    }

    pub fn distribution(&self) -> &ComponentDistribution {
        &self.dist
    }

    pub fn committed_mask(&self) -> u32 {
        self.committed
    }

    pub fn attendance(&self) -> f64 {
        self.q
    }

    fn eval_mask(&self, mask: u32) -> f64 {
        self.dist.spread_attendance(mask, self.committed, self.q)
    }
}

impl SetObjective for ExactObjective {
    type Cover = (u32, f64);

    fn empty(&self) -> (u32, f64) {
        (0, self.eval_mask(0))
    }

    fn value(&self, cover: &(u32, f64)) -> f64 {
        cover.1
    }

    fn gain(&self, cover: &(u32, f64), v: NodeIdx) -> f64 {
        self.eval_mask(cover.0 | 1 << v) - cover.1
    }

    fn add(&self, cover: &mut (u32, f64), v: NodeIdx) {
        cover.0 |= 1 << v;
        cover.1 = self.eval_mask(cover.0);
    }

    fn evaluate(&self, set: &[NodeIdx]) -> f64 {
        self.eval_mask(mask_of(set))
    }
}

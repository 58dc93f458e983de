//! Lazy greedy maximization under a cardinality budget, and the per-scenario
//! optimum surrogate used to normalize the robust objective.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap};
use std::sync::RwLock;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::cascade::{
    AttendanceProb, ExactObjective, PropagationProb, SetObjective, WorldBatch,
};
use crate::error::{Error, Result};
use crate::netgraph::{Graph, NodeIdx};
use crate::par;

/// Largest number of subsets [`exhaustive_opt`] will enumerate.
pub const EXHAUSTIVE_LIMIT: u64 = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GreedyStatus {
    Complete,
    /// The candidate pool ran out before `k` picks.
    PoolExhausted,
    EmptyPool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreedyResult {
    /// Picks in selection order.
    pub selected: Vec<NodeIdx>,
    /// Objective value of the empty selection (committed nodes only).
    pub base_value: f64,
    /// `prefix_values[i]` is the value after `i + 1` picks.
    pub prefix_values: Vec<f64>,
    pub evaluations: usize,
    pub status: GreedyStatus,
}

impl GreedyResult {
    pub fn value(&self) -> f64 {
        self.prefix_values.last().copied().unwrap_or(self.base_value)
    }
}

/// Gains are compared after rounding to 1e-9 so that ties between
/// symmetric nodes resolve by index regardless of float summation order.
fn quantize(gain: f64) -> i64 {
    (gain * 1e9).round() as i64
}

#[derive(Debug, PartialEq, Eq)]
struct Entry {
    key: i64,
    node: NodeIdx,
    round: usize,
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key
            .cmp(&other.key)
            .then_with(|| Reverse(self.node).cmp(&Reverse(other.node)))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn status_for(candidates: usize, k: usize, picked: usize) -> GreedyStatus {
    if candidates == 0 && k > 0 {
        GreedyStatus::EmptyPool
    } else if picked < k {
        GreedyStatus::PoolExhausted
    } else {
        GreedyStatus::Complete
    }
}

/// CELF lazy greedy: stale marginal gains are upper bounds by submodularity,
/// so a node is re-evaluated only when it reaches the top of the heap.
pub fn lazy_greedy_with<O: SetObjective>(
    obj: &O,
    candidates: &[NodeIdx],
    k: usize,
) -> GreedyResult {
    let mut cover = obj.empty();
    let base_value = obj.value(&cover);
    let initial = par::map_slice(candidates, |&v| obj.gain(&cover, v));
    let mut evaluations = candidates.len();
    let mut heap: BinaryHeap<Entry> = candidates
        .iter()
        .zip(initial)
        .map(|(&node, g)| Entry {
            key: quantize(g),
            node,
            round: 0,
        })
        .collect();
    let mut selected = Vec::with_capacity(k);
    let mut prefix_values = Vec::with_capacity(k);
    while selected.len() < k {
        let round = selected.len();
        let Some(top) = heap.pop() else { break };
        if top.round == round {
            obj.add(&mut cover, top.node);
            selected.push(top.node);
            prefix_values.push(obj.value(&cover));
        } else {
            evaluations += 1;
            let g = obj.gain(&cover, top.node);
            heap.push(Entry {
                key: quantize(g),
                node: top.node,
                round,
            });
        }
    }
    let status = status_for(candidates.len(), k, selected.len());
    GreedyResult {
        selected,
        base_value,
        prefix_values,
        evaluations,
        status,
    }
}

/// Plain greedy that re-evaluates every remaining candidate each round.
pub fn naive_greedy_with<O: SetObjective>(
    obj: &O,
    candidates: &[NodeIdx],
    k: usize,
) -> GreedyResult {
    let mut cover = obj.empty();
    let base_value = obj.value(&cover);
    let mut remaining = candidates.to_vec();
    let mut selected = Vec::new();
    let mut prefix_values = Vec::new();
    let mut evaluations = 0;
    while selected.len() < k && !remaining.is_empty() {
        let gains = par::map_slice(&remaining, |&v| obj.gain(&cover, v));
        evaluations += gains.len();
        let best = (0..remaining.len())
            .max_by(|&a, &b| {
                quantize(gains[a])
                    .cmp(&quantize(gains[b]))
                    .then(remaining[b].cmp(&remaining[a]))
            })
            .expect("nonempty");
        let v = remaining.remove(best);
        obj.add(&mut cover, v);
        selected.push(v);
        prefix_values.push(obj.value(&cover));
    }
    let status = status_for(candidates.len(), k, selected.len());
    GreedyResult {
        selected,
        base_value,
        prefix_values,
        evaluations,
        status,
    }
}

fn binomial(n: usize, k: usize) -> u64 {
    let k = k.min(n - k.min(n));
    (0..k).fold(1u64, |acc, i| {
        acc.saturating_mul((n - i) as u64) / (i as u64 + 1)
    })
}

/// True optimum over all subsets of `candidates` of size `min(k, |pool|)`.
/// Returns the lexicographically first optimal set.
pub fn exhaustive_opt_with<O: SetObjective>(
    obj: &O,
    candidates: &[NodeIdx],
    k: usize,
) -> Result<(Vec<NodeIdx>, f64)> {
    let k = k.min(candidates.len());
    let count = binomial(candidates.len(), k);
    if count > EXHAUSTIVE_LIMIT {
        return Err(Error::LimitExceeded {
            what: "candidate subsets",
            limit: EXHAUSTIVE_LIMIT as usize,
            actual: count as usize,
        });
    }
    let mut best: Option<(Vec<NodeIdx>, f64)> = None;
    for_each_subset(candidates, k, |set| {
        let value = obj.evaluate(set);
        if best.as_ref().is_none_or(|(_, b)| value > b + 1e-12) {
            best = Some((set.to_vec(), value));
        }
    });
    Ok(best.expect("at least the empty subset"))
}

/// Calls `f` on every `k`-subset of `items` in lexicographic index order.
pub fn for_each_subset<T: Copy, F: FnMut(&[T])>(items: &[T], k: usize, mut f: F) {
    fn rec<T: Copy, F: FnMut(&[T])>(items: &[T], k: usize, start: usize, cur: &mut Vec<T>, f: &mut F) {
        if cur.len() == k {
            f(cur);
            return;
        }
        let need = k - cur.len();
        for i in start..=items.len().saturating_sub(need) {
            if items.len() - i < need {
                break;
            }
            cur.push(items[i]);
            rec(items, k, i + 1, cur, f);
            cur.pop();
        }
    }
    if k > items.len() {
        return;
    }
    let mut cur = Vec::with_capacity(k);
    rec(items, k, 0, &mut cur, &mut f);
}

pub(crate) fn pool_excluding(n: usize, committed: &[NodeIdx]) -> Vec<NodeIdx> {
    let mut taken = vec![false; n];
    for &c in committed {
        taken[c] = true;
    }
    (0..n).filter(|&v| !taken[v]).collect()
}

/// Lazy greedy on a fresh batch of `eval_samples` sampled worlds, with every
/// non-committed node as a candidate.
#[allow(clippy::too_many_arguments)]
pub fn lazy_greedy<R: RngCore + ?Sized>(
    g: &Graph,
    k: usize,
    p: PropagationProb,
    q: AttendanceProb,
    committed: &[NodeIdx],
    eval_samples: usize,
    rng: &mut R,
) -> Result<GreedyResult> {
    if eval_samples == 0 {
        return Err(Error::param("eval_samples must be at least 1"));
    }
    let batch = WorldBatch::sample(g, p, q, eval_samples, rng);
    let obj = batch.objective(committed);
    let pool = pool_excluding(g.node_count(), committed);
    Ok(lazy_greedy_with(&obj, &pool, k))
}

/// Exact optimum by enumeration with the exact objective.
pub fn exhaustive_opt(
    g: &Graph,
    k: usize,
    p: PropagationProb,
    q: AttendanceProb,
    committed: &[NodeIdx],
) -> Result<(Vec<NodeIdx>, f64)> {
    let obj = ExactObjective::new(g, p, q, committed)?;
    let pool = pool_excluding(g.node_count(), committed);
    exhaustive_opt_with(&obj, &pool, k)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OptKey {
    p_bits: u64,
    q_bits: u64,
    k: usize,
    committed: Vec<NodeIdx>,
}

impl OptKey {
    pub fn new(p: PropagationProb, q: AttendanceProb, k: usize, committed: &[NodeIdx]) -> Self {
        let mut committed = committed.to_vec();
        committed.sort_unstable();
        OptKey {
            p_bits: p.value().to_bits(),
            q_bits: q.value().to_bits(),
            k,
            committed,
        }
    }
}

/// Memo of `OPT(p)` surrogates, keyed by scenario, budget and committed set.
/// One cache belongs to one graph.
#[derive(Debug, Default)]
pub struct OptCache {
    values: RwLock<HashMap<OptKey, f64>>,
}

impl OptCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, key: &OptKey) -> Option<f64> {
        self.values.read().expect("cache lock").get(key).copied()
    }

    pub fn get_or_insert_with<F: FnOnce() -> Result<f64>>(&self, key: OptKey, f: F) -> Result<f64> {
        if let Some(v) = self.get(&key) {
            return Ok(v);
        }
        let v = f()?;
        Ok(*self.values.write().expect("cache lock").entry(key).or_insert(v))
    }

    pub fn len(&self) -> usize {
        self.values.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Greedy value as the `OPT(p)` surrogate, memoized in `cache`.
#[allow(clippy::too_many_arguments)]
pub fn opt_estimate<R: RngCore + ?Sized>(
    g: &Graph,
    k: usize,
    p: PropagationProb,
    q: AttendanceProb,
    committed: &[NodeIdx],
    eval_samples: usize,
    cache: &OptCache,
    rng: &mut R,
) -> Result<f64> {
    cache.get_or_insert_with(OptKey::new(p, q, k, committed), || {
        lazy_greedy(g, k, p, q, committed, eval_samples, rng).map(|r| r.value())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::exact_spread;
    use crate::rng::stream;

    fn p(v: f64) -> PropagationProb {
        PropagationProb::new(v).unwrap()
    }

    fn star(leaves: usize) -> Graph {
        let edges: Vec<_> = (1..=leaves).map(|l| (0, l)).collect();
        Graph::from_edges(leaves + 1, &edges).unwrap()
    }

    #[test]
    fn disjoint_edges_pick_one_endpoint_each() {
        let g = Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        // Exhaustive oracle over all six pairs.
        let mut best = 0.0;
        for_each_subset(&[0, 1, 2, 3], 2, |s| {
            best = f64::max(best, exact_spread(&g, s, p(1.0)).unwrap());
        });
        assert_eq!(best, 4.0);
        let r = lazy_greedy(&g, 2, p(1.0), AttendanceProb::CERTAIN, &[], 200, &mut stream(1, 0)).unwrap();
        assert_eq!(r.selected, vec![0, 2]);
        assert_eq!(r.value(), 4.0);
        assert_eq!(r.status, GreedyStatus::Complete);
    }

    #[test]
    fn star_picks_hub() {
        let g = star(5);
        let values: Vec<f64> = (0..6).map(|v| exact_spread(&g, &[v], p(0.5)).unwrap()).collect();
        assert!(values[1..].iter().all(|&v| v < values[0]));
        let obj = ExactObjective::new(&g, p(0.5), AttendanceProb::CERTAIN, &[]).unwrap();
        let r = lazy_greedy_with(&obj, &[0, 1, 2, 3, 4, 5], 1);
        assert_eq!(r.selected, vec![0]);
        let r = lazy_greedy(&g, 1, p(0.5), AttendanceProb::CERTAIN, &[], 2000, &mut stream(3, 0)).unwrap();
        assert_eq!(r.selected, vec![0]);
    }

    #[test]
    fn zero_budget_and_empty_pool() {
        let g = star(3);
        let r = lazy_greedy(&g, 0, p(0.5), AttendanceProb::CERTAIN, &[], 10, &mut stream(1, 0)).unwrap();
        assert!(r.selected.is_empty());
        assert_eq!(r.value(), 0.0);
        let obj = ExactObjective::new(&g, p(0.5), AttendanceProb::CERTAIN, &[]).unwrap();
        let r = lazy_greedy_with(&obj, &[], 2);
        assert_eq!(r.status, GreedyStatus::EmptyPool);
        let r = lazy_greedy_with(&obj, &[1], 2);
        assert_eq!(r.status, GreedyStatus::PoolExhausted);
    }

    #[test]
    fn opt_estimate_reference_values_and_cache() {
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (3, 4)]).unwrap();
        let cache = OptCache::new();
        let v = opt_estimate(&g, 3, p(0.0), AttendanceProb::CERTAIN, &[], 100, &cache, &mut stream(1, 0)).unwrap();
        assert_eq!(v, 3.0);

        let tri = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let obj = ExactObjective::new(&tri, p(0.5), AttendanceProb::CERTAIN, &[]).unwrap();
        let r = lazy_greedy_with(&obj, &[0, 1, 2], 1);
        assert!((r.value() - 2.25).abs() < 1e-12);

        let a = opt_estimate(&tri, 1, p(0.5), AttendanceProb::CERTAIN, &[], 500, &cache, &mut stream(2, 0)).unwrap();
        let b = opt_estimate(&tri, 1, p(0.5), AttendanceProb::CERTAIN, &[], 500, &cache, &mut stream(99, 0)).unwrap();
        assert_eq!(a, b);
        assert_eq!(cache.len(), 2);
    }

    #[test]
    fn exhaustive_reference_values() {
        let path = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        // At p=1 every singleton covers the whole path; ties go to the
        // lexicographically first set.
        let (set, v) = exhaustive_opt(&path, 1, p(1.0), AttendanceProb::CERTAIN, &[]).unwrap();
        assert_eq!((set, v), (vec![0], 3.0));
        let (set, v) = exhaustive_opt(&path, 1, p(0.5), AttendanceProb::CERTAIN, &[]).unwrap();
        assert_eq!(set, vec![1]);
        assert!((v - 2.0).abs() < 1e-12);
        let (set, v) = exhaustive_opt(&path, 3, p(0.3), AttendanceProb::CERTAIN, &[]).unwrap();
        assert_eq!(set, vec![0, 1, 2]);
        assert!((v - 3.0).abs() < 1e-12);
        let (set, v) = exhaustive_opt(&path, 0, p(0.3), AttendanceProb::CERTAIN, &[]).unwrap();
        assert!(set.is_empty());
        assert_eq!(v, 0.0);
    }

    #[test]
    fn exhaustive_limit() {
        let g = Graph::empty(16);
        let obj = ExactObjective::new(&g, p(0.5), AttendanceProb::CERTAIN, &[]).unwrap();
        let pool: Vec<usize> = (0..16).collect();
        assert!(exhaustive_opt_with(&obj, &pool, 8).is_ok());
        assert_eq!(binomial(40, 5), 658_008);
    }

    #[test]
    fn subsets_enumerated_in_order() {
        let mut seen = Vec::new();
        for_each_subset(&[1, 2, 3, 4], 2, |s| seen.push(s.to_vec()));
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[0], vec![1, 2]);
        assert_eq!(seen[5], vec![3, 4]);
        let mut count = 0;
        for_each_subset(&[1, 2], 0, |_| count += 1);
        assert_eq!(count, 1);
        for_each_subset(&[1, 2], 3, |_| count += 1);
        assert_eq!(count, 1);
    }
}

use rand::{Rng, RngCore};

use super::{AttendanceProb, Moments, PropagationProb, SetObjective, SpreadEstimate};
use crate::netgraph::{Graph, NodeIdx};
use crate::par;
use crate::rng;
use crate::robust::MarginalVector;

/// One live-edge realization: component labels of the kept-edge subgraph
/// plus an attendance coin per node.
#[derive(Clone, Debug)]
pub struct World {
    labels: Vec<u32>,
    sizes: Vec<u32>,
    attend: Vec<bool>,
    parent: Vec<u32>,
}

fn find(parent: &mut [u32], mut v: u32) -> u32 {
    while parent[v as usize] != v {
        let up = parent[parent[v as usize] as usize];
        parent[v as usize] = up;
        v = up;
    }
    v
}

impl World {
    pub fn empty(n: usize) -> Self {
        World {
            labels: vec![0; n],
            sizes: Vec::with_capacity(n),
            attend: vec![false; n],
            parent: vec![0; n],
        }
    }

    /// Draws edge coins in edge order, then attendance coins in node order.
    pub fn resample<R: Rng + ?Sized>(
        &mut self,
        g: &Graph,
        p: PropagationProb,
        q: AttendanceProb,
        rng: &mut R,
    ) {
        let n = g.node_count();
        for (i, slot) in self.parent.iter_mut().enumerate() {
            *slot = i as u32;
        }
        let p = p.value();
        for &(u, v) in g.edges() {
            if rng.gen::<f64>() < p {
                let a = find(&mut self.parent, u as u32);
                let b = find(&mut self.parent, v as u32);
                if a != b {
                    self.parent[a.max(b) as usize] = a.min(b);
                }
            }
        }
        self.sizes.clear();
        // Roots are the smallest member of their component, so a root is
        // always visited before the rest of its component.
        for v in 0..n {
            let r = find(&mut self.parent, v as u32) as usize;
            if r == v {
                self.labels[v] = self.sizes.len() as u32;
                self.sizes.push(1);
            } else {
                let l = self.labels[r];
                self.labels[v] = l;
                self.sizes[l as usize] += 1;
            }
        }
        let q = q.value();
        for a in self.attend.iter_mut() {
            *a = rng.gen::<f64>() < q;
        }
    }

    pub fn label(&self, v: NodeIdx) -> u32 {
        self.labels[v]
    }

    pub fn component_size(&self, label: u32) -> u32 {
        self.sizes[label as usize]
    }

    pub fn attends(&self, v: NodeIdx) -> bool {
        self.attend[v]
    }

    /// Nodes reached from the attending invitees plus every committed node.
    pub fn spread(&self, invited: &[NodeIdx], committed: &[NodeIdx]) -> u32 {
        let mut hit: Vec<u32> = Vec::with_capacity(invited.len() + committed.len());
        let seeds = committed
            .iter()
            .chain(invited.iter().filter(|&&v| self.attend[v]));
        let mut total = 0;
        for &v in seeds {
            let l = self.labels[v];
            if !hit.contains(&l) {
                hit.push(l);
                total += self.sizes[l as usize];
            }
        }
        total
    }

    /// Draws `S ∼ x`, returns `spread(S)` and fills `scratch.delta` with
    /// `spread(S ∪ {i}) − spread(S ∖ {i})` for every eligible `i`.
    pub(crate) fn gradient_sample<R: Rng + ?Sized>(
        &self,
        x: &MarginalVector,
        committed: &[NodeIdx],
        rng: &mut R,
        scratch: &mut GradScratch,
    ) -> u32 {
        let ncomp = self.sizes.len();
        let count = &mut scratch.count[..ncomp];
        count.iter_mut().for_each(|c| *c = 0);
        for &c in committed {
            count[self.labels[c] as usize] += 1;
        }
        for (j, (&v, &xv)) in x.nodes().iter().zip(x.values()).enumerate() {
            let pick = rng.gen::<f64>() < xv;
            let present = pick && self.attend[v];
            scratch.present[j] = present;
            if present {
                count[self.labels[v] as usize] += 1;
            }
        }
        let value = count
            .iter()
            .zip(&self.sizes)
            .filter(|(&c, _)| c > 0)
            .map(|(_, &s)| s)
            .sum();
        for (j, &v) in x.nodes().iter().enumerate() {
            scratch.delta[j] = if self.attend[v] {
                let l = self.labels[v] as usize;
                let others = count[l] - scratch.present[j] as u32;
                if others == 0 {
                    self.sizes[l]
                } else {
                    0
                }
            } else {
                0
            };
        }
        value
    }
}

pub(crate) struct GradScratch {
    count: Vec<u32>,
    present: Vec<bool>,
    pub delta: Vec<u32>,
}

impl GradScratch {
    pub fn new(n: usize, dim: usize) -> Self {
        GradScratch {
            count: vec![0; n],
            present: vec![false; dim],
            delta: vec![0; dim],
        }
    }
}

/// A fixed batch of sampled worlds, shared by every evaluation in one
/// planning step (common random numbers). Spread over a fixed batch is an
/// exact coverage function, hence monotone and submodular.
#[derive(Clone, Debug)]
pub struct WorldBatch {
    n: usize,
    worlds: usize,
    labels: Vec<u32>,
    sizes: Vec<u32>,
    attend: Vec<bool>,
}

impl WorldBatch {
    pub fn sample<R: RngCore + ?Sized>(
        g: &Graph,
        p: PropagationProb,
        q: AttendanceProb,
        worlds: usize,
        rng: &mut R,
    ) -> Self {
        let n = g.node_count();
        let base = rng::fork(rng);
        let chunks: Vec<(usize, usize)> = rng::chunks(worlds).collect();
        let parts = par::map_slice(&chunks, |&(c, count)| {
            let mut rng = rng::stream(base, c as u64);
            let mut w = World::empty(n);
            let mut labels = Vec::with_capacity(count * n);
            let mut sizes = Vec::with_capacity(count * n);
            let mut attend = Vec::with_capacity(count * n);
            for _ in 0..count {
                w.resample(g, p, q, &mut rng);
                labels.extend_from_slice(&w.labels);
                sizes.extend_from_slice(&w.sizes);
                sizes.resize(sizes.len() + n - w.sizes.len(), 0);
                attend.extend_from_slice(&w.attend);
            }
            (labels, sizes, attend)
        });
        let mut batch = WorldBatch {
            n,
            worlds,
            labels: Vec::with_capacity(worlds * n),
            sizes: Vec::with_capacity(worlds * n),
            attend: Vec::with_capacity(worlds * n),
        };
        for (l, s, a) in parts {
            batch.labels.extend(l);
            batch.sizes.extend(s);
            batch.attend.extend(a);
        }
        batch
    }

    pub fn worlds(&self) -> usize {
        self.worlds
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    fn spread_in(&self, w: usize, invited: &[NodeIdx], committed: &[NodeIdx], hit: &mut Vec<u32>) -> u32 {
        let off = w * self.n;
        hit.clear();
        let mut total = 0;
        let seeds = committed
            .iter()
            .chain(invited.iter().filter(|&&v| self.attend[off + v]));
        for &v in seeds {
            let l = self.labels[off + v];
            if !hit.contains(&l) {
                hit.push(l);
                total += self.sizes[off + l as usize];
            }
        }
        total
    }

    /// Mean and standard error of the spread over the batch.
    pub fn spread(&self, invited: &[NodeIdx], committed: &[NodeIdx]) -> SpreadEstimate {
        let mut hit = Vec::new();
        let mut m = Moments::default();
        for w in 0..self.worlds {
            m.push(self.spread_in(w, invited, committed, &mut hit) as f64);
        }
        m.estimate()
    }

    pub fn objective(&self, committed: &[NodeIdx]) -> SampledObjective<'_> {
        SampledObjective {
            batch: self,
            committed: committed.to_vec(),
        }
    }
}

/// `f(S ∪ committed, p, q)` averaged over a [`WorldBatch`].
#[derive(Clone, Debug)]
pub struct SampledObjective<'a> {
    batch: &'a WorldBatch,
    committed: Vec<NodeIdx>,
}

#[derive(Clone, Debug)]
pub struct BatchCover {
    hit: Vec<bool>,
    total: u64,
}

impl SampledObjective<'_> {
    pub fn committed(&self) -> &[NodeIdx] {
        &self.committed
    }

    pub fn estimate(&self, set: &[NodeIdx]) -> SpreadEstimate {
        self.batch.spread(set, &self.committed)
    }
}

impl SetObjective for SampledObjective<'_> {
    type Cover = BatchCover;

    fn empty(&self) -> BatchCover {
        let b = self.batch;
        let mut cover = BatchCover {
            hit: vec![false; b.worlds * b.n],
            total: 0,
        };
        for w in 0..b.worlds {
            let off = w * b.n;
            for &c in &self.committed {
                let l = off + b.labels[off + c] as usize;
                if !cover.hit[l] {
                    cover.hit[l] = true;
                    cover.total += b.sizes[l] as u64;
                }
            }
        }
        cover
    }

    fn value(&self, cover: &BatchCover) -> f64 {
        cover.total as f64 / self.batch.worlds as f64
    }

    fn gain(&self, cover: &BatchCover, v: NodeIdx) -> f64 {
        let b = self.batch;
        let mut sum = 0u64;
        for w in 0..b.worlds {
            let off = w * b.n;
            if b.attend[off + v] {
                let l = off + b.labels[off + v] as usize;
                if !cover.hit[l] {
                    sum += b.sizes[l] as u64;
                }
            }
        }
        sum as f64 / b.worlds as f64
    }

    fn add(&self, cover: &mut BatchCover, v: NodeIdx) {
        let b = self.batch;
        for w in 0..b.worlds {
            let off = w * b.n;
            if b.attend[off + v] {
                let l = off + b.labels[off + v] as usize;
                if !cover.hit[l] {
                    cover.hit[l] = true;
                    cover.total += b.sizes[l] as u64;
                }
            }
        }
    }

    fn evaluate(&self, set: &[NodeIdx]) -> f64 {
        let b = self.batch;
        let mut hit = Vec::new();
        let total: u64 = (0..b.worlds)
            .map(|w| b.spread_in(w, set, &self.committed, &mut hit) as u64)
            .sum();
        total as f64 / b.worlds as f64
    }
}

//! Independent cascade diffusion.
//!
//! On an undirected graph with a single transmission probability, the
//! independent cascade started from a seed set activates exactly the nodes
//! connected to the seeds in a random subgraph that keeps each edge with
//! probability `p` (the live-edge view). [`simulate_once`] runs the
//! sequential process; everything else works on sampled or enumerated
//! live-edge worlds.

mod exact;
mod objective;
mod world;

pub use exact::{exact_spread, exact_spread_attendance, ComponentDistribution, ExactObjective};
pub use objective::SetObjective;
pub use world::{SampledObjective, World, WorldBatch};
pub(crate) use world::GradScratch;

use std::collections::VecDeque;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netgraph::{Graph, NodeIdx};
use crate::par;
use crate::rng;
use crate::robust::MarginalVector;

/// Edge transmission probability.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct PropagationProb(f64);

/// Probability that an invited node attends its training.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct AttendanceProb(f64);

macro_rules! unit_interval {
    ($t:ident, $what:literal) => {
        impl $t {
            pub fn new(value: f64) -> Result<Self> {
                if (0.0..=1.0).contains(&value) {
                    Ok($t(value))
                } else {
                    Err(Error::param(format!(
                        "{} must lie in [0, 1], got {value}",
                        $what
                    )))
                }
            }

            pub fn value(self) -> f64 {
                self.0
            }
        }

        impl TryFrom<f64> for $t {
            type Error = Error;
            fn try_from(v: f64) -> Result<Self> {
                $t::new(v)
            }
        }

        impl From<$t> for f64 {
            fn from(p: $t) -> f64 {
                p.0
            }
        }
    };
}

unit_interval!(PropagationProb, "propagation probability");
unit_interval!(AttendanceProb, "attendance probability");

impl AttendanceProb {
    pub const CERTAIN: AttendanceProb = AttendanceProb(1.0);
}

impl Default for AttendanceProb {
    fn default() -> Self {
        AttendanceProb(0.5)
    }
}

/// Monte Carlo estimate of an expected activated-node count.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpreadEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

/// Running sums for merging per-chunk results in a fixed order.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Moments {
    pub count: usize,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(mut self, other: Moments) -> Moments {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self
    }

    pub fn estimate(&self) -> SpreadEstimate {
        let n = self.count.max(1) as f64;
        let mean = self.sum / n;
        let var = if self.count > 1 {
            ((self.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        SpreadEstimate {
            mean,
            stderr: (var / n).sqrt(),
            samples: self.count,
        }
    }
}

/// Runs one cascade from `seeds` and returns the activated nodes, sorted.
///
/// Each newly activated node tries each inactive neighbor once.
pub fn simulate_once<R: Rng + ?Sized>(
    g: &Graph,
    seeds: &[NodeIdx],
    p: PropagationProb,
    rng: &mut R,
) -> Vec<NodeIdx> {
    let mut active = vec![false; g.node_count()];
    let mut queue = VecDeque::new();
    for &s in seeds {
        if !active[s] {
            active[s] = true;
            queue.push_back(s);
        }
    }
    cascade_from(g, p.value(), &mut active, &mut queue, rng);
    (0..active.len()).filter(|&v| active[v]).collect()
}

fn cascade_from<R: Rng + ?Sized>(
    g: &Graph,
    p: f64,
    active: &mut [bool],
    queue: &mut VecDeque<NodeIdx>,
    rng: &mut R,
) -> usize {
    let mut count = queue.len();
    while let Some(u) = queue.pop_front() {
        for &w in g.neighbors(u) {
            if !active[w] && rng.gen::<f64>() < p {
                active[w] = true;
                count += 1;
                queue.push_back(w);
            }
        }
    }
    count
}

fn check_nodes(g: &Graph, nodes: &[NodeIdx]) -> Result<()> {
    match nodes.iter().find(|&&v| v >= g.node_count()) {
        Some(v) => Err(Error::UnknownNode(v.to_string())),
        None => Ok(()),
    }
}

pub(crate) fn check_disjoint(invited: &[NodeIdx], committed: &[NodeIdx]) -> Result<()> {
    if let Some(v) = invited.iter().find(|v| committed.contains(v)) {
        return Err(Error::param(format!(
            "node {v} is both invited and committed"
        )));
    }
    Ok(())
}

/// Sample mean and standard error of the cascade size over `samples` runs.
pub fn estimate_spread<R: RngCore + ?Sized>(
    g: &Graph,
    seeds: &[NodeIdx],
    p: PropagationProb,
    samples: usize,
    rng: &mut R,
) -> Result<SpreadEstimate> {
    estimate_spread_attendance(g, seeds, &[], p, AttendanceProb::CERTAIN, samples, rng)
}

/// Like [`estimate_spread`], but each invited node first attends with
/// probability `q`; committed nodes always seed.
pub fn estimate_spread_attendance<R: RngCore + ?Sized>(
    g: &Graph,
    invited: &[NodeIdx],
    committed: &[NodeIdx],
    p: PropagationProb,
    q: AttendanceProb,
    samples: usize,
    rng: &mut R,
) -> Result<SpreadEstimate> {
    if samples == 0 {
        return Err(Error::param("samples must be at least 1"));
    }
    check_nodes(g, invited)?;
    check_nodes(g, committed)?;
    check_disjoint(invited, committed)?;
    let base = rng::fork(rng);
    let chunks: Vec<(usize, usize)> = rng::chunks(samples).collect();
    let certain = q.value() >= 1.0;
    let parts = par::map_slice(&chunks, |&(c, count)| {
        let mut rng = rng::stream(base, c as u64);
        let mut active = vec![false; g.node_count()];
        let mut queue = VecDeque::new();
        let mut m = Moments::default();
        for _ in 0..count {
            active.iter_mut().for_each(|a| *a = false);
            for &s in committed {
                if !active[s] {
                    active[s] = true;
                    queue.push_back(s);
                }
            }
            for &s in invited {
                if !active[s] && (certain || rng.gen::<f64>() < q.value()) {
                    active[s] = true;
                    queue.push_back(s);
                }
            }
            let size = cascade_from(g, p.value(), &mut active, &mut queue, &mut rng);
            m.push(size as f64);
        }
        m
    });
    Ok(parts
        .into_iter()
        .fold(Moments::default(), Moments::merge)
        .estimate())
}

/// Per-coordinate gradient estimate of the multilinear extension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientEstimate {
    /// One entry per eligible node, in [`MarginalVector::nodes`] order.
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Estimate of the extension value itself from the same worlds.
    pub value: SpreadEstimate,
}

/// Unbiased stochastic gradient of `F(x) = E[f(S ∪ committed, p, q)]`, where
/// `S` contains each eligible node independently with probability `x_i`.
///
/// Each sample draws one live-edge world with attendance and one set `S`, and
/// scores coordinate `i` as `spread(S ∪ {i}) − spread(S ∖ {i})` in that world.
pub fn grad_multilinear<R: RngCore + ?Sized>(
    g: &Graph,
    x: &MarginalVector,
    p: PropagationProb,
    q: AttendanceProb,
    committed: &[NodeIdx],
    samples: usize,
    rng: &mut R,
) -> Result<GradientEstimate> {
    if samples == 0 {
        return Err(Error::param("samples must be at least 1"));
    }
    check_nodes(g, x.nodes())?;
    check_nodes(g, committed)?;
    check_disjoint(x.nodes(), committed)?;
    let base = rng::fork(rng);
    let chunks: Vec<(usize, usize)> = rng::chunks(samples).collect();
    let dim = x.len();
    let parts = par::map_slice(&chunks, |&(c, count)| {
        let mut rng = rng::stream(base, c as u64);
        let mut scratch = GradScratch::new(g.node_count(), dim);
        let mut sum = vec![0.0; dim];
        let mut sum_sq = vec![0.0; dim];
        let mut value = Moments::default();
        let mut w = World::empty(g.node_count());
        for _ in 0..count {
            w.resample(g, p, q, &mut rng);
            let v = w.gradient_sample(x, committed, &mut rng, &mut scratch);
            value.push(v as f64);
            for (j, &d) in scratch.delta.iter().enumerate() {
                let d = d as f64;
                sum[j] += d;
                sum_sq[j] += d * d;
            }
        }
        (sum, sum_sq, value)
    });
    let mut sum = vec![0.0; dim];
    let mut sum_sq = vec![0.0; dim];
    let mut value = Moments::default();
    for (s, sq, v) in parts {
        for j in 0..dim {
            sum[j] += s[j];
            sum_sq[j] += sq[j];
        }
        value = value.merge(v);
    }
    let n = samples as f64;
    let mut mean = Vec::with_capacity(dim);
    let mut stderr = Vec::with_capacity(dim);
    for j in 0..dim {
        let m = sum[j] / n;
        let var = if samples > 1 {
            ((sum_sq[j] - n * m * m) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        mean.push(m);
        stderr.push((var / n).sqrt());
    }
    Ok(GradientEstimate {
        mean,
        stderr,
        value: value.estimate(),
    })
}

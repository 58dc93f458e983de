//! Seed selection that holds up across an uncertainty set of propagation
//! probabilities.
//!
//! The max-min problem over sets is relaxed to distributions over sets,
//! represented by their marginal vectors. A no-regret pair solves the
//! relaxation: the adversary runs multiplicative weights over the scenarios,
//! the selector runs projected stochastic gradient ascent on the normalized
//! multilinear extension. The averaged marginal vector is then rounded
//! several times and the candidate with the best worst case is kept.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::cascade::{
    AttendanceProb, ExactObjective, PropagationProb, SampledObjective, SetObjective, World,
    WorldBatch,
};
use crate::error::{Error, Result};
use crate::greedy::{self, OptCache, OptKey};
use crate::netgraph::{Graph, NodeIdx};
use crate::par;
use crate::rng;

/// Candidate propagation probabilities, strictly increasing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct UncertaintySet(Vec<PropagationProb>);

impl UncertaintySet {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::param("uncertainty set must be nonempty"));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::param("uncertainty set must be strictly increasing"));
        }
        let probs = values
            .into_iter()
            .map(PropagationProb::new)
            .collect::<Result<Vec<_>>>()?;
        Ok(UncertaintySet(probs))
    }

    pub fn single(p: PropagationProb) -> Self {
        UncertaintySet(vec![p])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[PropagationProb] {
        &self.0
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|p| p.value()).collect()
    }
}

impl Default for UncertaintySet {
    /// Ten evenly spaced values from 0.05 to 0.95.
    fn default() -> Self {
        make_uncertainty_set(0.05, 0.95, 10).expect("default grid is valid")
    }
}

impl TryFrom<Vec<f64>> for UncertaintySet {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        UncertaintySet::new(v)
    }
}

impl From<UncertaintySet> for Vec<f64> {
    fn from(u: UncertaintySet) -> Vec<f64> {
        u.to_f64()
    }
}

/// `count` evenly spaced values from `lo` to `hi` inclusive.
pub fn make_uncertainty_set(lo: f64, hi: f64, count: usize) -> Result<UncertaintySet> {
    if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
        return Err(Error::param(format!("need 0 <= lo <= hi <= 1, got [{lo}, {hi}]")));
    }
    if count == 0 {
        return Err(Error::param("count must be at least 1"));
    }
    if count == 1 {
        return UncertaintySet::new(vec![lo]);
    }
    let steps = (count - 1) as f64;
    let values = (0..count)
        .map(|i| {
            let x = (lo * (steps - i as f64) + hi * i as f64) / steps;
            // Round off float noise.
            (x * 1e12).round() / 1e12
        })
        .collect();
    UncertaintySet::new(values)
}

/// Inclusion probabilities for the eligible nodes under a budget `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginalVector {
    nodes: Vec<NodeIdx>,
    values: Vec<f64>,
    budget: usize,
}

const BUDGET_SLACK: f64 = 1e-9;

impl MarginalVector {
    pub fn new(nodes: Vec<NodeIdx>, values: Vec<f64>, budget: usize) -> Result<Self> {
        if nodes.len() != values.len() {
            return Err(Error::param("nodes and values differ in length"));
        }
        let mut sorted = nodes.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::param("marginal vector lists a node twice"));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::param(format!("marginal {v} outside [0, 1]")));
        }
        let sum: f64 = values.iter().sum();
        if sum > budget as f64 + BUDGET_SLACK {
            return Err(Error::param(format!("marginals sum to {sum} > budget {budget}")));
        }
        Ok(MarginalVector {
            nodes,
            values,
            budget,
        })
    }

    pub fn zeros(nodes: Vec<NodeIdx>, budget: usize) -> Result<Self> {
        let values = vec![0.0; nodes.len()];
        Self::new(nodes, values, budget)
    }

    /// Every node at `min(1, k / |nodes|)`.
    pub fn uniform(nodes: Vec<NodeIdx>, budget: usize) -> Result<Self> {
        let v = if nodes.is_empty() {
            0.0
        } else {
            (budget as f64 / nodes.len() as f64).min(1.0)
        };
        let values = vec![v; nodes.len()];
        Self::new(nodes, values, budget)
    }

    pub fn nodes(&self) -> &[NodeIdx] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn get(&self, node: NodeIdx) -> Option<f64> {
        self.nodes
            .iter()
            .position(|&v| v == node)
            .map(|i| self.values[i])
    }

    /// Node `v` present with probability `x_v · q`; zero elsewhere.
    pub fn presence(&self, n: usize, q: f64) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (&v, &x) in self.nodes.iter().zip(&self.values) {
            out[v] = x * q;
        }
        out
    }
}

/// Euclidean projection onto `{0 ≤ x ≤ 1, Σx ≤ k}`, by bisection on the
/// multiplier of the sum constraint.
pub fn project_capped_simplex(y: &[f64], k: usize) -> Vec<f64> {
    let clip = |t: f64| -> Vec<f64> { y.iter().map(|&v| (v - t).clamp(0.0, 1.0)).collect() };
    let k = k as f64;
    let x = clip(0.0);
    if x.iter().sum::<f64>() <= k {
        return x;
    }
    let mut lo = 0.0;
    let mut hi = y.iter().cloned().fold(f64::MIN, f64::max);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if clip(mid).iter().sum::<f64>() > k {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    clip(hi)
}

/// The adversary's mixed strategy over the uncertainty set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioWeights(Vec<f64>);

impl ScenarioWeights {
    pub fn uniform(m: usize) -> Self {
        ScenarioWeights(vec![1.0 / m as f64; m])
    }

    pub fn new(w: Vec<f64>) -> Result<Self> {
        let s: f64 = w.iter().sum();
        if w.is_empty() || w.iter().any(|v| v.is_nan() || *v < 0.0) || (s - 1.0).abs() > 1e-9 {
            return Err(Error::param("scenario weights must be a probability vector"));
        }
        Ok(ScenarioWeights(w))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn is_valid(&self) -> bool {
        let s: f64 = self.0.iter().sum();
        self.0.iter().all(|&v| v >= 0.0) && (s - 1.0).abs() <= 1e-9
    }

    /// Multiplicative weights step: the adversary minimizes, so scenarios
    /// with high payoff lose weight.
    fn update(&mut self, payoffs: &[f64], eta: f64) {
        let shift = payoffs.iter().cloned().fold(f64::MAX, f64::min);
        for (w, &v) in self.0.iter_mut().zip(payoffs) {
            *w *= (-eta * (v - shift)).exp();
        }
        let s: f64 = self.0.iter().sum();
        for w in &mut self.0 {
            *w /= s;
        }
    }
}

/// Dependent rounding of a marginal vector: fractional entries are merged
/// pairwise, each merge moving mass so that one entry becomes integral while
/// preserving both expectations and the total. Each node ends up selected
/// with probability exactly `x_i`, and at most `⌈Σx⌉` nodes are selected.
pub fn swap_round<R: Rng + ?Sized>(x: &MarginalVector, rng: &mut R) -> Vec<NodeIdx> {
    const EPS: f64 = 1e-12;
    let mut vals: Vec<f64> = x
        .values()
        .iter()
        .map(|&v| {
            if v < EPS {
                0.0
            } else if v > 1.0 - EPS {
                1.0
            } else {
                v
            }
        })
        .collect();
    let fractional = |v: f64| v > 0.0 && v < 1.0;
    let mut carry: Option<usize> = None;
    for j in 0..vals.len() {
        if !fractional(vals[j]) {
            continue;
        }
        let Some(i) = carry else {
            carry = Some(j);
            continue;
        };
        let (a, b) = (vals[i], vals[j]);
        let s = a + b;
        if s <= 1.0 {
            if rng.gen::<f64>() * s < a {
                vals[i] = s;
                vals[j] = 0.0;
            } else {
                vals[i] = 0.0;
                vals[j] = s;
            }
        } else if rng.gen::<f64>() * (2.0 - s) < 1.0 - b {
            vals[i] = 1.0;
            vals[j] = s - 1.0;
        } else {
            vals[i] = s - 1.0;
            vals[j] = 1.0;
        }
        for t in [i, j] {
            if vals[t] < EPS {
                vals[t] = 0.0;
            } else if vals[t] > 1.0 - EPS {
                vals[t] = 1.0;
            }
        }
        carry = [i, j].into_iter().find(|&t| fractional(vals[t]));
    }
    if let Some(i) = carry {
        vals[i] = if rng.gen::<f64>() < vals[i] { 1.0 } else { 0.0 };
    }
    x.nodes()
        .iter()
        .zip(&vals)
        .filter(|(_, &v)| v == 1.0)
        .map(|(&n, _)| n)
        .collect()
}

/// One robust planning instance: graph, eligible pool, budget, scenarios,
/// attendance probability and already committed nodes.
#[derive(Clone, Debug)]
pub struct RobustProblem<'g> {
    pub graph: &'g Graph,
    pub pool: Vec<NodeIdx>,
    pub k: usize,
    pub uncertainty: UncertaintySet,
    pub q: AttendanceProb,
    pub committed: Vec<NodeIdx>,
}

impl<'g> RobustProblem<'g> {
    /// Every non-committed node is eligible.
    pub fn new(
        graph: &'g Graph,
        k: usize,
        uncertainty: UncertaintySet,
        q: AttendanceProb,
        committed: &[NodeIdx],
    ) -> Self {
        RobustProblem {
            graph,
            pool: greedy::pool_excluding(graph.node_count(), committed),
            k,
            uncertainty,
            q,
            committed: committed.to_vec(),
        }
    }

    /// Effective budget: `k` capped by the pool size.
    pub fn budget(&self) -> usize {
        self.k.min(self.pool.len())
    }

    /// Greedy `OPT(p)` surrogates, each on its own batch of sampled worlds.
    pub fn greedy_normalizers<R: RngCore + ?Sized>(
        &self,
        eval_samples: usize,
        cache: &OptCache,
        rng: &mut R,
    ) -> Result<Vec<f64>> {
        self.uncertainty
            .values()
            .iter()
            .map(|&p| {
                let key = OptKey::new(p, self.q, self.budget(), &self.committed);
                cache.get_or_insert_with(key, || {
                    let batch = WorldBatch::sample(self.graph, p, self.q, eval_samples, rng);
                    let obj = batch.objective(&self.committed);
                    Ok(greedy::lazy_greedy_with(&obj, &self.pool, self.budget()).value())
                })
            })
            .collect()
    }

    /// Exact optima by enumeration (small graphs only).
    pub fn exact_normalizers(&self) -> Result<Vec<f64>> {
        self.exact_scenarios()?
            .into_iter()
            .map(|s| {
                greedy::exhaustive_opt_with(&s.objective, &self.pool, self.budget()).map(|(_, v)| v)
            })
            .collect()
    }

    /// Exact objectives with exhaustive normalizers.
    pub fn exact_scenarios(&self) -> Result<Vec<Scenario<ExactObjective>>> {
        self.uncertainty
            .values()
            .iter()
            .map(|&p| {
                let objective = ExactObjective::new(self.graph, p, self.q, &self.committed)?;
                let (_, opt) = greedy::exhaustive_opt_with(&objective, &self.pool, self.budget())?;
                Ok(Scenario { p, objective, opt })
            })
            .collect()
    }
}

/// A scenario's objective with its normalizer.
#[derive(Clone, Debug)]
pub struct Scenario<O> {
    pub p: PropagationProb,
    pub objective: O,
    pub opt: f64,
}

impl<O: SetObjective> Scenario<O> {
    /// `f(S)/OPT`. A scenario whose optimum is zero cannot tell sets apart
    /// and scores every set as 1.
    pub fn normalized(&self, set: &[NodeIdx]) -> f64 {
        if self.opt <= 0.0 {
            1.0
        } else {
            self.objective.evaluate(set) / self.opt
        }
    }
}

fn degenerate_ratio(value: f64, opt: f64) -> f64 {
    if opt <= 0.0 {
        1.0
    } else {
        value / opt
    }
}

/// `f(set ∪ committed, p, q) / OPT(p)` with the greedy surrogate for `OPT`.
#[allow(clippy::too_many_arguments)]
pub fn normalized_value<R: RngCore + ?Sized>(
    g: &Graph,
    set: &[NodeIdx],
    k: usize,
    p: PropagationProb,
    q: AttendanceProb,
    committed: &[NodeIdx],
    cache: &OptCache,
    eval_samples: usize,
    rng: &mut R,
) -> Result<f64> {
    let opt = greedy::opt_estimate(g, k, p, q, committed, eval_samples, cache, rng)?;
    if opt <= 0.0 {
        return Err(Error::ZeroNormalizer(p.value()));
    }
    let f = crate::cascade::estimate_spread_attendance(g, set, committed, p, q, eval_samples, rng)?;
    Ok(f.mean / opt)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverParams {
    pub iters: usize,
    pub samples_per_iter: usize,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            iters: 500,
            samples_per_iter: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOutcome {
    /// Uniform average of the played iterates.
    pub marginal: MarginalVector,
    /// Adversary weights at each iteration.
    pub weights_trace: Vec<ScenarioWeights>,
    /// Estimated normalized value per scenario, averaged over iterations.
    pub mean_values: Vec<f64>,
    /// Average payoff minus the adversary's best fixed response; small when
    /// the pair is near equilibrium.
    pub gap: f64,
}

/// Saddle-point iteration on the normalized multilinear extension.
///
/// Each iteration splits `samples_per_iter` worlds evenly over the scenarios;
/// the selector's step uses the adversary-weighted gradient.
pub fn solve_robust<R: RngCore + ?Sized>(
    problem: &RobustProblem<'_>,
    normalizers: &[f64],
    params: &SolverParams,
    rng: &mut R,
) -> Result<SolveOutcome> {
    let m = problem.uncertainty.len();
    if normalizers.len() != m {
        return Err(Error::param("one normalizer per scenario required"));
    }
    if params.iters == 0 {
        return Err(Error::param("iters must be at least 1"));
    }
    let k = problem.budget();
    let g = problem.graph;
    let dim = problem.pool.len();
    let mut x = MarginalVector::uniform(problem.pool.clone(), k)?;
    let mut weights = ScenarioWeights::uniform(m);
    let mut weights_trace = Vec::with_capacity(params.iters);
    let mut avg_x = vec![0.0; dim];
    let mut value_sums = vec![0.0; m];
    let mut payoff_sum = 0.0;
    let eta_adv = ((m as f64).ln() / params.iters as f64).sqrt();
    let eta_x = k as f64 / (params.iters as f64).sqrt();
    let per_scenario = (params.samples_per_iter / m).max(1);
    let base = rng::fork(rng);

    for t in 0..params.iters {
        let results = par::map_range(m, |j| {
            let mut rng = rng::stream(base, (t * m + j) as u64);
            let p = problem.uncertainty.values()[j];
            let mut world = World::empty(g.node_count());
            let mut scratch = crate::cascade::GradScratch::new(g.node_count(), dim);
            let mut grad = vec![0.0; dim];
            let mut value = 0.0;
            for _ in 0..per_scenario {
                world.resample(g, p, problem.q, &mut rng);
                value += world.gradient_sample(&x, &problem.committed, &mut rng, &mut scratch) as f64;
                for (gj, &d) in grad.iter_mut().zip(&scratch.delta) {
                    *gj += d as f64;
                }
            }
            let scale = if normalizers[j] > 0.0 {
                1.0 / (per_scenario as f64 * normalizers[j])
            } else {
                0.0
            };
            grad.iter_mut().for_each(|v| *v *= scale);
            let ratio = degenerate_ratio(value / per_scenario as f64, normalizers[j]);
            (ratio, grad)
        });

        let mut step = vec![0.0; dim];
        let mut payoff = 0.0;
        let values: Vec<f64> = results.iter().map(|(v, _)| *v).collect();
        for ((value, grad), &w) in results.iter().zip(weights.as_slice()) {
            payoff += w * value;
            for (s, g) in step.iter_mut().zip(grad) {
                *s += w * g;
            }
        }
        payoff_sum += payoff;
        for (acc, v) in value_sums.iter_mut().zip(&values) {
            *acc += v;
        }
        for (a, v) in avg_x.iter_mut().zip(x.values()) {
            *a += v;
        }
        weights_trace.push(weights.clone());
        weights.update(&values, eta_adv);

        let y: Vec<f64> = x
            .values()
            .iter()
            .zip(&step)
            .map(|(v, s)| v + eta_x * s)
            .collect();
        x = MarginalVector::new(problem.pool.clone(), project_capped_simplex(&y, k), k)?;
    }

    let iters = params.iters as f64;
    let avg: Vec<f64> = avg_x.iter().map(|v| (v / iters).clamp(0.0, 1.0)).collect();
    let mean_values: Vec<f64> = value_sums.iter().map(|v| v / iters).collect();
    let best_response = mean_values.iter().cloned().fold(f64::MAX, f64::min);
    Ok(SolveOutcome {
        marginal: MarginalVector::new(problem.pool.clone(), project_capped_simplex(&avg, k), k)?,
        weights_trace,
        gap: payoff_sum / iters - best_response,
        mean_values,
    })
}

/// The chosen set with its per-scenario diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub selected: Vec<NodeIdx>,
    /// Normalized value per scenario, in uncertainty-set order.
    pub per_scenario: Vec<f64>,
    pub worst_case: f64,
    /// Index of the scenario attaining the worst case.
    pub argmin: usize,
    pub candidates: usize,
}

/// Rounds `x` `num_candidates` times and keeps the candidate whose minimum
/// normalized value over the scenarios is largest (earliest draw on ties).
pub fn sample_best_with<O: SetObjective, R: RngCore + ?Sized>(
    scenarios: &[Scenario<O>],
    x: &MarginalVector,
    num_candidates: usize,
    rng: &mut R,
) -> Result<Selection> {
    if num_candidates == 0 {
        return Err(Error::param("num_candidate_sets must be at least 1"));
    }
    if scenarios.is_empty() {
        return Err(Error::param("at least one scenario required"));
    }
    let mut candidates: Vec<Vec<NodeIdx>> = (0..num_candidates)
        .map(|_| {
            let mut s = swap_round(x, rng);
            s.sort_unstable();
            s
        })
        .collect();
    let scored = par::map_slice(&candidates, |set| {
        let per: Vec<f64> = scenarios.iter().map(|s| s.normalized(set)).collect();
        let (argmin, worst) = per
            .iter()
            .enumerate()
            .fold((0, f64::MAX), |(bi, bv), (i, &v)| if v < bv { (i, v) } else { (bi, bv) });
        (per, worst, argmin)
    });
    let best = (0..scored.len())
        .fold(0, |b, i| if scored[i].1 > scored[b].1 { i } else { b });
    let (per_scenario, worst_case, argmin) = scored[best].clone();
    Ok(Selection {
        selected: candidates.swap_remove(best),
        per_scenario,
        worst_case,
        argmin,
        candidates: num_candidates,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RobustParams {
    pub solver: SolverParams,
    /// Worlds per scenario for normalizers and candidate evaluation.
    pub eval_samples: usize,
    pub num_candidate_sets: usize,
}

impl Default for RobustParams {
    fn default() -> Self {
        RobustParams {
            solver: SolverParams::default(),
            eval_samples: 10_000,
            num_candidate_sets: 20,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustSolution {
    pub marginal: MarginalVector,
    pub weights_trace: Vec<ScenarioWeights>,
    pub selected: Vec<NodeIdx>,
    pub scenarios: Vec<f64>,
    pub per_scenario: Vec<f64>,
    pub normalizers: Vec<f64>,
    pub worst_case: f64,
    pub argmin_p: f64,
    pub gap: f64,
}

/// Evaluates rounded candidates on fresh sampled worlds, one batch per
/// scenario.
pub fn sample_best<R: RngCore + ?Sized>(
    problem: &RobustProblem<'_>,
    x: &MarginalVector,
    normalizers: &[f64],
    num_candidates: usize,
    eval_samples: usize,
    rng: &mut R,
) -> Result<Selection> {
    let batches: Vec<WorldBatch> = problem
        .uncertainty
        .values()
        .iter()
        .map(|&p| WorldBatch::sample(problem.graph, p, problem.q, eval_samples, rng))
        .collect();
    let scenarios: Vec<Scenario<SampledObjective<'_>>> = batches
        .iter()
        .zip(problem.uncertainty.values())
        .zip(normalizers)
        .map(|((b, &p), &opt)| Scenario {
            p,
            objective: b.objective(&problem.committed),
            opt,
        })
        .collect();
    sample_best_with(&scenarios, x, num_candidates, rng)
}

/// Full single-stage pipeline: one world batch per scenario serves both the
/// greedy normalizer and candidate evaluation, so normalization is
/// consistent within the run.
pub fn plan_robust<R: RngCore + ?Sized>(
    problem: &RobustProblem<'_>,
    params: &RobustParams,
    cache: &OptCache,
    rng: &mut R,
) -> Result<RobustSolution> {
    if params.eval_samples == 0 {
        return Err(Error::param("eval_samples must be at least 1"));
    }
    let k = problem.budget();
    let batches: Vec<WorldBatch> = problem
        .uncertainty
        .values()
        .iter()
        .map(|&p| WorldBatch::sample(problem.graph, p, problem.q, params.eval_samples, rng))
        .collect();
    let scenarios = batches
        .iter()
        .zip(problem.uncertainty.values())
        .map(|(b, &p)| {
            let objective = b.objective(&problem.committed);
            let key = OptKey::new(p, problem.q, k, &problem.committed);
            let opt = cache.get_or_insert_with(key, || {
                Ok(greedy::lazy_greedy_with(&objective, &problem.pool, k).value())
            })?;
            Ok(Scenario { p, objective, opt })
        })
        .collect::<Result<Vec<_>>>()?;
    let normalizers: Vec<f64> = scenarios.iter().map(|s| s.opt).collect();
    let outcome = solve_robust(problem, &normalizers, &params.solver, rng)?;
    let selection = sample_best_with(&scenarios, &outcome.marginal, params.num_candidate_sets, rng)?;
    Ok(RobustSolution {
        argmin_p: problem.uncertainty.values()[selection.argmin].value(),
        marginal: outcome.marginal,
        weights_trace: outcome.weights_trace,
        selected: selection.selected,
        scenarios: problem.uncertainty.to_f64(),
        per_scenario: selection.per_scenario,
        normalizers,
        worst_case: selection.worst_case,
        gap: outcome.gap,
    })
}

/// Exact normalized multilinear value of `x` per scenario (small graphs).
pub fn exact_marginal_values(scenarios: &[Scenario<ExactObjective>], x: &MarginalVector) -> Vec<f64> {
    scenarios
        .iter()
        .map(|s| {
            let d = s.objective.distribution();
            let presence = x.presence(d.node_count(), s.objective.attendance());
            degenerate_ratio(d.multilinear(&presence, s.objective.committed_mask()), s.opt)
        })
        .collect()
}

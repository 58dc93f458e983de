//! Multi-stage recruitment: plan a stage, observe who attended, plan the next
//! stage conditioned on everyone already committed.

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::cascade::{AttendanceProb, PropagationProb, SpreadEstimate, WorldBatch};
use crate::error::{Error, Result};
use crate::greedy::{self, OptCache};
use crate::netgraph::{self, Graph, NodeIdx, ObservedNetwork, Roster};
use crate::rng::{self, ids};
use crate::robust::{self, RobustParams, RobustProblem, RobustSolution, UncertaintySet};
use crate::sampler::{Phase, QuerySession};
use crate::trace::{EventKind, ScenarioValue, Trace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Strategy {
    /// Robust adaptive planning on the sampled network.
    Change,
    /// Highest degree first on the fully surveyed network.
    Dc,
    /// Uniform without replacement.
    Random,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Change, Strategy::Dc, Strategy::Random];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Change => "CHANGE",
            Strategy::Dc => "DC",
            Strategy::Random => "RANDOM",
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "CHANGE" => Ok(Strategy::Change),
            "DC" => Ok(Strategy::Dc),
            "RANDOM" => Ok(Strategy::Random),
            _ => Err(Error::param(format!("unknown strategy `{s}`"))),
        }
    }
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterventionConfig {
    pub stages: usize,
    /// Invitation capacity per stage, one entry per stage.
    pub capacities: Vec<usize>,
    #[serde(default)]
    pub q: AttendanceProb,
    #[serde(default)]
    pub uncertainty: UncertaintySet,
    pub query_budget: usize,
    pub strategy: Strategy,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub budgets: RobustParams,
    /// Invitees who did not show up may be invited again later.
    #[serde(default = "yes")]
    pub reinvite_no_shows: bool,
}

/// `⌈total/stages⌉`-style split with the larger shares first.
pub fn split_capacity(total: usize, stages: usize) -> Vec<usize> {
    let base = total / stages;
    let extra = total % stages;
    (0..stages).map(|t| base + usize::from(t < extra)).collect()
}

impl InterventionConfig {
    /// Field defaults for an `n`-node roster: query budget `⌈0.2n⌉`, total
    /// capacity `⌈0.15n⌉` over three near-equal stages (fewer when the
    /// total is below three), q = 0.5 and the default uncertainty set.
    pub fn defaults_for(n: usize, strategy: Strategy, seed: u64) -> Self {
        let total = (15 * n).div_ceil(100).max(1);
        let stages = total.min(3);
        InterventionConfig {
            stages,
            capacities: split_capacity(total, stages),
            q: AttendanceProb::default(),
            uncertainty: UncertaintySet::default(),
            query_budget: (2 * n).div_ceil(10),
            strategy,
            seed,
            budgets: RobustParams::default(),
            reinvite_no_shows: true,
        }
    }

    pub fn total_capacity(&self) -> usize {
        self.capacities.iter().sum()
    }

    pub fn validate(&self, roster_size: usize) -> Result<()> {
        if self.stages == 0 {
            return Err(Error::param("stages must be at least 1"));
        }
        if self.capacities.len() != self.stages {
            return Err(Error::param(format!(
                "capacities has {} entries for {} stages",
                self.capacities.len(),
                self.stages
            )));
        }
        if self.capacities.contains(&0) {
            return Err(Error::param("every stage capacity must be at least 1"));
        }
        if self.total_capacity() > roster_size {
            return Err(Error::param(format!(
                "total capacity {} exceeds roster size {roster_size}",
                self.total_capacity()
            )));
        }
        if self.budgets.eval_samples == 0 || self.budgets.num_candidate_sets == 0 {
            return Err(Error::param("Monte Carlo budgets must be at least 1"));
        }
        if self.budgets.solver.iters == 0 {
            return Err(Error::param("solver iterations must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InterventionState {
    stage: usize,
    stages: usize,
    committed: Vec<Vec<NodeIdx>>,
    pending: Option<Vec<NodeIdx>>,
    declined: Vec<NodeIdx>,
    observed: ObservedNetwork,
}

impl InterventionState {
    pub fn new(observed: ObservedNetwork, stages: usize) -> Self {
        InterventionState {
            stage: 1,
            stages,
            committed: Vec::new(),
            pending: None,
            declined: Vec::new(),
            observed,
        }
    }

    /// Current stage, 1-based; `stages + 1` once every stage is done.
    pub fn stage(&self) -> usize {
        self.stage
    }

    pub fn stages(&self) -> usize {
        self.stages
    }

    pub fn is_complete(&self) -> bool {
        self.stage > self.stages
    }

    /// Attendees per completed stage.
    pub fn committed(&self) -> &[Vec<NodeIdx>] {
        &self.committed
    }

    pub fn all_committed(&self) -> Vec<NodeIdx> {
        let mut all: Vec<NodeIdx> = self.committed.iter().flatten().copied().collect();
        all.sort_unstable();
        all
    }

    pub fn pending(&self) -> Option<&[NodeIdx]> {
        self.pending.as_deref()
    }

    /// Invitees who did not attend, in the order they declined.
    pub fn declined(&self) -> &[NodeIdx] {
        &self.declined
    }

    pub fn observed(&self) -> &ObservedNetwork {
        &self.observed
    }

    /// Nodes that may still be invited.
    pub fn pool(&self, reinvite_no_shows: bool) -> Vec<NodeIdx> {
        let n = self.observed.node_count();
        let mut blocked = vec![false; n];
        for &v in self.committed.iter().flatten() {
            blocked[v] = true;
        }
        if !reinvite_no_shows {
            for &v in &self.declined {
                blocked[v] = true;
            }
        }
        (0..n).filter(|&v| !blocked[v]).collect()
    }

    fn check_plannable(&self) -> Result<()> {
        if self.is_complete() {
            return Err(Error::InvalidState(format!(
                "all {} stages are complete",
                self.stages
            )));
        }
        if self.pending.is_some() {
            return Err(Error::InvalidState(format!(
                "stage {} invitations await attendance",
                self.stage
            )));
        }
        Ok(())
    }

    /// Marks `invited` as the pending invitation of the current stage.
    pub fn invite(&mut self, invited: Vec<NodeIdx>, capacity: usize, reinvite_no_shows: bool) -> Result<()> {
        self.check_plannable()?;
        if invited.len() > capacity {
            return Err(Error::param(format!(
                "{} invitations exceed capacity {capacity}",
                invited.len()
            )));
        }
        let pool = self.pool(reinvite_no_shows);
        let mut seen = std::collections::HashSet::new();
        for &v in &invited {
            if pool.binary_search(&v).is_err() || !seen.insert(v) {
                let token = if v < self.observed.node_count() {
                    self.observed.roster().token(v).to_string()
                } else {
                    v.to_string()
                };
                return Err(Error::param(format!("`{token}` cannot be invited")));
            }
        }
        self.pending = Some(invited);
        Ok(())
    }

    /// Commits `attended` as this stage's peer leaders and advances the stage.
    pub fn record_attendance(&mut self, attended: &[NodeIdx]) -> Result<()> {
        let Some(pending) = self.pending.as_ref() else {
            return Err(Error::InvalidState("no invitations are pending".into()));
        };
        let offenders: Vec<String> = attended
            .iter()
            .filter(|v| !pending.contains(v))
            .map(|&v| {
                if v < self.observed.node_count() {
                    self.observed.roster().token(v).to_string()
                } else {
                    v.to_string()
                }
            })
            .collect();
        if !offenders.is_empty() {
            return Err(Error::NotInvited(offenders));
        }
        let mut stage: Vec<NodeIdx> = attended.to_vec();
        stage.sort_unstable();
        stage.dedup();
        let pending = self.pending.take().expect("checked above");
        self.declined
            .extend(pending.into_iter().filter(|v| stage.binary_search(v).is_err()));
        self.committed.push(stage);
        self.stage += 1;
        Ok(())
    }

    /// Token form of [`record_attendance`](Self::record_attendance); unknown
    /// tokens are reported as not invited.
    pub fn record_attendance_tokens(&mut self, attended: &[&str]) -> Result<()> {
        let unknown: Vec<String> = attended
            .iter()
            .filter(|t| !self.observed.roster().contains(t))
            .map(|t| t.to_string())
            .collect();
        if !unknown.is_empty() {
            return Err(Error::NotInvited(unknown));
        }
        let idx: Vec<NodeIdx> = attended
            .iter()
            .map(|t| self.observed.roster().index(t).expect("checked"))
            .collect();
        self.record_attendance(&idx)
    }
}

/// Outcome of planning one stage.
#[derive(Clone, Debug, PartialEq)]
pub struct StagePlan {
    pub stage: usize,
    pub invited: Vec<NodeIdx>,
    /// Robust diagnostics, CHANGE only.
    pub solution: Option<RobustSolution>,
    /// Set when the pool could not fill the stage capacity.
    pub warning: Option<String>,
}

impl StagePlan {
    pub fn worst_case(&self) -> Option<f64> {
        self.solution.as_ref().map(|s| s.worst_case)
    }

    pub fn argmin_p(&self) -> Option<f64> {
        self.solution.as_ref().map(|s| s.argmin_p)
    }
}

/// Chooses the current stage's invitations and marks them pending.
pub fn plan_stage<R: RngCore + ?Sized>(
    state: &mut InterventionState,
    config: &InterventionConfig,
    rng: &mut R,
) -> Result<StagePlan> {
    state.check_plannable()?;
    let stage = state.stage;
    let capacity = config.capacities[stage - 1];
    let pool = state.pool(config.reinvite_no_shows);
    let k = capacity.min(pool.len());
    let warning = (k < capacity).then(|| {
        format!(
            "stage {stage}: only {} eligible nodes for capacity {capacity}",
            pool.len()
        )
    });
    let mut solution = None;
    let invited = if k == 0 {
        Vec::new()
    } else {
        match config.strategy {
            Strategy::Change => {
                let g = state.observed.subgraph();
                let problem = RobustProblem {
                    graph: &g,
                    pool: pool.clone(),
                    k,
                    uncertainty: config.uncertainty.clone(),
                    q: config.q,
                    committed: state.all_committed(),
                };
                let sol = robust::plan_robust(&problem, &config.budgets, &OptCache::new(), rng)?;
                let mut invited = sol.selected.clone();
                invited.sort_unstable();
                solution = Some(sol);
                invited
            }
            Strategy::Dc => {
                let g = state.observed.subgraph();
                netgraph::top_k_by_degree_among(&g, &pool, k)
            }
            Strategy::Random => {
                let mut invited: Vec<NodeIdx> = pool.choose_multiple(rng, k).copied().collect();
                invited.sort_unstable();
                invited
            }
        }
    };
    state.invite(invited.clone(), capacity, config.reinvite_no_shows)?;
    Ok(StagePlan {
        stage,
        invited,
        solution,
        warning,
    })
}

/// Free-function form of [`InterventionState::record_attendance`].
pub fn record_attendance(state: &mut InterventionState, attended: &[NodeIdx]) -> Result<()> {
    state.record_attendance(attended)
}

pub fn invitation_event(roster: &Roster, plan: &StagePlan) -> EventKind {
    EventKind::Invitation {
        stage: plan.stage,
        invited: roster.tokens_of(&plan.invited),
        worst_case: plan.worst_case(),
        argmin_p: plan.argmin_p(),
        per_scenario: plan
            .solution
            .as_ref()
            .map(|s| {
                s.scenarios
                    .iter()
                    .zip(&s.per_scenario)
                    .map(|(&p, &value)| ScenarioValue { p, value })
                    .collect()
            })
            .unwrap_or_default(),
    }
}

/// Ground-truth evaluation of a committed set at one propagation
/// probability.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub p: f64,
    pub spread: SpreadEstimate,
    /// Greedy surrogate for the best achievable spread with the same total
    /// number of committed peer leaders.
    pub opt: f64,
}

impl Evaluation {
    pub fn normalized(&self) -> f64 {
        if self.opt <= 0.0 {
            1.0
        } else {
            self.spread.mean / self.opt
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationOutcome {
    pub trace: Trace,
    pub committed: Vec<Vec<NodeIdx>>,
    pub plans: Vec<StagePlan>,
    pub evaluations: Vec<Evaluation>,
}

impl SimulationOutcome {
    pub fn committed_count(&self) -> usize {
        self.committed.iter().map(Vec::len).sum()
    }

    /// `min_p f(S, p) / OPT(p)` over the evaluation grid.
    pub fn worst_case_normalized(&self) -> f64 {
        self.evaluations
            .iter()
            .map(Evaluation::normalized)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Samples the network (CHANGE), surveys it fully (DC) or skips discovery
/// (RANDOM), runs every stage with Bernoulli(q) attendance, and evaluates the
/// final committed set on the ground truth at each grid point with
/// `eval_samples` sampled worlds.
///
/// All randomness derives from `config.seed`: runs with equal seeds share
/// attendance and evaluation streams, so strategies compared under one seed
/// see common random numbers.
pub fn simulate_intervention(
    g: &Graph,
    config: &InterventionConfig,
    eval_grid: &[PropagationProb],
    eval_samples: usize,
) -> Result<SimulationOutcome> {
    config.validate(g.node_count())?;
    if eval_samples == 0 {
        return Err(Error::param("eval_samples must be at least 1"));
    }
    let mut trace = Trace::new();
    trace.push(None, EventKind::Created {
        config: serde_json::to_value(config)?,
        roster: Vec::new(),
    });

    let observed = match config.strategy {
        Strategy::Change => {
            let budget = config.query_budget.min(g.node_count());
            let mut session = QuerySession::new(ObservedNetwork::new(g.roster().clone()), budget);
            let mut rng = rng::stream(config.seed, ids::SAMPLING);
            while !session.is_exhausted() {
                let t = session.next_query(&mut rng)?;
                let token = g.roster().token(t.node).to_string();
                trace.push(Some(ids::SAMPLING), EventKind::QueryIssued {
                    node: token.clone(),
                    phase: t.phase,
                    fallback: t.fallback,
                });
                let new_edges = session.record_answer_index(t.node, g.neighbors(t.node))?;
                trace.push(None, EventKind::QueryAnswered {
                    node: token,
                    contacts: g.roster().tokens_of(g.neighbors(t.node)),
                    new_nodes: Vec::new(),
                    new_edges,
                });
            }
            trace.push(None, EventKind::CollectionClosed {
                queries: session.answered().len(),
            });
            session.into_observed()
        }
        Strategy::Dc => {
            let mut obs = ObservedNetwork::new(g.roster().clone());
            for v in g.nodes() {
                obs.reveal_index(v, g.neighbors(v))?;
            }
            obs
        }
        Strategy::Random => ObservedNetwork::new(g.roster().clone()),
    };

    let mut state = InterventionState::new(observed, config.stages);
    let mut plans = Vec::with_capacity(config.stages);
    while !state.is_complete() {
        let stage = state.stage();
        let mut plan_rng = rng::stream(config.seed, ids::planning(stage));
        let plan = plan_stage(&mut state, config, &mut plan_rng)?;
        trace.push(Some(ids::planning(stage)), invitation_event(g.roster(), &plan));

        let mut att_rng = rng::stream(config.seed, ids::attendance(stage));
        let attended: Vec<NodeIdx> = plan
            .invited
            .iter()
            .copied()
            .filter(|_| att_rng.gen_bool(config.q.value()))
            .collect();
        state.record_attendance(&attended)?;
        trace.push(Some(ids::attendance(stage)), EventKind::Attendance {
            stage,
            attended: g.roster().tokens_of(&attended),
        });
        trace.push(None, EventKind::StageAdvanced {
            stage: state.stage(),
        });
        plans.push(plan);
    }
    trace.push(None, EventKind::Completed);

    let committed_all = state.all_committed();
    let total = config.total_capacity().min(g.node_count());
    let all: Vec<NodeIdx> = g.nodes().collect();
    let evaluations = eval_grid
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let mut rng = rng::stream(config.seed, ids::EVALUATION + ((i as u64) << 32));
            let batch = WorldBatch::sample(g, p, AttendanceProb::CERTAIN, eval_samples, &mut rng);
            let spread = batch.spread(&committed_all, &[]);
            let opt = greedy::lazy_greedy_with(&batch.objective(&[]), &all, total).value();
            Evaluation {
                p: p.value(),
                spread,
                opt,
            }
        })
        .collect();

    Ok(SimulationOutcome {
        trace,
        committed: state.committed().to_vec(),
        plans,
        evaluations,
    })
}

/// Phase of each answered query in a trace, in order.
pub fn query_phases(trace: &Trace) -> Vec<Phase> {
    trace
        .events()
        .iter()
        .filter_map(|e| match &e.kind {
            EventKind::QueryIssued { phase, .. } => Some(*phase),
            _ => None,
        })
        .collect()
}

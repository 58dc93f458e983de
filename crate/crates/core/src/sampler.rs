//! Budgeted network discovery.
//!
//! Queries come in pairs: a node drawn uniformly from the unqueried roster,
//! then a uniformly random unqueried contact of that respondent. Random
//! neighbors of random nodes skew towards high degree, so the second query of
//! each pair tends to reveal more edges.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netgraph::{Graph, NodeIdx, ObservedNetwork, RevealSummary};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    /// Uniform over the unqueried roster.
    Random,
    /// Uniform over unqueried contacts of the preceding respondent.
    Neighbor,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryTarget {
    pub node: NodeIdx,
    pub phase: Phase,
    /// A neighbor query that fell back to a uniform pick because the
    /// preceding respondent had no unqueried contacts.
    pub fallback: bool,
}

/// Adaptive query state machine over an [`ObservedNetwork`].
#[derive(Clone, Debug)]
pub struct QuerySession {
    observed: ObservedNetwork,
    budget: usize,
    answered: Vec<QueryTarget>,
    pending: Option<QueryTarget>,
    last_random: Option<NodeIdx>,
}

impl QuerySession {
    pub fn new(observed: ObservedNetwork, budget: usize) -> Self {
        QuerySession {
            observed,
            budget,
            answered: Vec::new(),
            pending: None,
            last_random: None,
        }
    }

    pub fn observed(&self) -> &ObservedNetwork {
        &self.observed
    }

    pub fn into_observed(self) -> ObservedNetwork {
        self.observed
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    /// Queries answered so far, in order.
    pub fn answered(&self) -> &[QueryTarget] {
        &self.answered
    }

    pub fn pending(&self) -> Option<QueryTarget> {
        self.pending
    }

    pub fn remaining(&self) -> usize {
        self.budget - self.answered.len()
    }

    /// Phase of the next query to be issued.
    pub fn phase(&self) -> Phase {
        if self.answered.len().is_multiple_of(2) {
            Phase::Random
        } else {
            Phase::Neighbor
        }
    }

    fn unqueried(&self) -> Vec<NodeIdx> {
        (0..self.observed.node_count())
            .filter(|&v| !self.observed.is_queried(v))
            .collect()
    }

    pub fn is_exhausted(&self) -> bool {
        self.pending.is_none()
            && (self.remaining() == 0 || self.unqueried().is_empty())
    }

    /// Picks the next node to interview. Until the answer is recorded the
    /// same target is returned.
    pub fn next_query<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<QueryTarget> {
        if let Some(t) = self.pending {
            return Ok(t);
        }
        if self.remaining() == 0 {
            return Err(Error::BudgetExhausted);
        }
        let unqueried = self.unqueried();
        if unqueried.is_empty() {
            return Err(Error::RosterExhausted);
        }
        let phase = self.phase();
        let mut fallback = false;
        let node = match phase {
            Phase::Random => *unqueried.choose(rng).expect("nonempty"),
            Phase::Neighbor => {
                let contacts: Vec<NodeIdx> = self
                    .last_random
                    .map(|r| self.observed.revealed_neighbors(r))
                    .unwrap_or_default()
                    .into_iter()
                    .filter(|&v| !self.observed.is_queried(v))
                    .collect();
                match contacts.choose(rng) {
                    Some(&v) => v,
                    None => {
                        fallback = true;
                        *unqueried.choose(rng).expect("nonempty")
                    }
                }
            }
        };
        let t = QueryTarget {
            node,
            phase,
            fallback,
        };
        self.pending = Some(t);
        Ok(t)
    }

    /// Marks a previously chosen target as pending, for replaying a
    /// recorded session.
    pub fn issue(&mut self, t: QueryTarget) -> Result<()> {
        if self.pending.is_some() {
            return Err(Error::InvalidState("a query is already pending".into()));
        }
        if self.remaining() == 0 {
            return Err(Error::BudgetExhausted);
        }
        if t.node >= self.observed.node_count() {
            return Err(Error::UnknownNode(t.node.to_string()));
        }
        if self.observed.is_queried(t.node) {
            return Err(Error::AlreadyQueried(
                self.observed.roster().token(t.node).to_string(),
            ));
        }
        if t.phase != self.phase() {
            return Err(Error::InvalidState(format!(
                "expected a {:?} query",
                self.phase()
            )));
        }
        self.pending = Some(t);
        Ok(())
    }

    fn take_pending(&mut self, node: NodeIdx) -> Result<QueryTarget> {
        match self.pending {
            Some(t) if t.node == node => {
                self.pending = None;
                Ok(t)
            }
            Some(t) => Err(Error::InvalidState(format!(
                "answer for `{}` but the pending query is `{}`",
                self.observed.roster().token(node),
                self.observed.roster().token(t.node)
            ))),
            None => Err(Error::InvalidState("no query is pending".into())),
        }
    }

    fn finish(&mut self, t: QueryTarget) {
        if t.phase == Phase::Random {
            self.last_random = Some(t.node);
        }
        self.answered.push(t);
    }

    /// Records the pending respondent's contacts by token; unknown contacts
    /// join the roster.
    pub fn record_answer(&mut self, node: &str, contacts: &[&str]) -> Result<RevealSummary> {
        let idx = self.observed.roster().require(node)?;
        let t = self.take_pending(idx)?;
        match self.observed.reveal_in_place(node, contacts) {
            Ok(summary) => {
                self.finish(t);
                Ok(summary)
            }
            Err(e) => {
                self.pending = Some(t);
                Err(e)
            }
        }
    }

    pub fn record_answer_index(&mut self, node: NodeIdx, contacts: &[NodeIdx]) -> Result<usize> {
        let t = self.take_pending(node)?;
        match self.observed.reveal_index(node, contacts) {
            Ok(added) => {
                self.finish(t);
                Ok(added)
            }
            Err(e) => {
                self.pending = Some(t);
                Err(e)
            }
        }
    }
}

/// Result of [`run_sampling`].
#[derive(Clone, Debug)]
pub struct SamplingOutcome {
    pub observed: ObservedNetwork,
    pub queries: Vec<QueryTarget>,
}

impl SamplingOutcome {
    pub fn phase_nodes(&self, phase: Phase) -> Vec<NodeIdx> {
        self.queries
            .iter()
            .filter(|q| q.phase == phase)
            .map(|q| q.node)
            .collect()
    }
}

/// Runs `min(budget, n)` queries against a ground-truth graph.
pub fn run_sampling<R: Rng + ?Sized>(g: &Graph, budget: usize, rng: &mut R) -> SamplingOutcome {
    let budget = budget.min(g.node_count());
    let mut session = QuerySession::new(ObservedNetwork::new(g.roster().clone()), budget);
    while !session.is_exhausted() {
        let t = session.next_query(rng).expect("session not exhausted");
        session
            .record_answer_index(t.node, g.neighbors(t.node))
            .expect("answer matches pending query");
    }
    let queries = session.answered().to_vec();
    SamplingOutcome {
        observed: session.into_observed(),
        queries,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netgraph::Roster;
    use crate::rng::stream;

    fn star(leaves: usize) -> Graph {
        let edges: Vec<_> = (1..=leaves).map(|l| (0, l)).collect();
        Graph::from_edges(leaves + 1, &edges).unwrap()
    }

    #[test]
    fn leaf_then_hub() {
        let g = star(5);
        for seed in 0..20 {
            let mut rng = stream(seed, 0);
            let mut s = QuerySession::new(ObservedNetwork::new(g.roster().clone()), 4);
            let first = s.next_query(&mut rng).unwrap();
            assert_eq!(first.phase, Phase::Random);
            s.record_answer_index(first.node, g.neighbors(first.node)).unwrap();
            if first.node != 0 {
                let second = s.next_query(&mut rng).unwrap();
                assert_eq!(second.phase, Phase::Neighbor);
                assert_eq!(second.node, 0);
                assert!(!second.fallback);
            }
        }
    }

    #[test]
    fn isolated_respondent_falls_back() {
        let roster = Roster::from_tokens(["a", "b", "c"]).unwrap();
        let mut s = QuerySession::new(ObservedNetwork::new(roster), 3);
        let mut rng = stream(3, 0);
        let t = s.next_query(&mut rng).unwrap();
        let tok = s.observed().roster().token(t.node).to_string();
        s.record_answer(&tok, &[]).unwrap();
        let t2 = s.next_query(&mut rng).unwrap();
        assert_eq!(t2.phase, Phase::Neighbor);
        assert!(t2.fallback);
        assert_ne!(t2.node, t.node);
    }

    #[test]
    fn budget_and_idempotency() {
        let g = star(3);
        let mut s = QuerySession::new(ObservedNetwork::new(g.roster().clone()), 1);
        let mut rng = stream(1, 0);
        let a = s.next_query(&mut rng).unwrap();
        let b = s.next_query(&mut rng).unwrap();
        assert_eq!(a, b);
        assert!(s.record_answer_index((a.node + 1) % 4, &[]).is_err());
        s.record_answer_index(a.node, g.neighbors(a.node)).unwrap();
        assert!(matches!(s.next_query(&mut rng), Err(Error::BudgetExhausted)));
        assert!(s.is_exhausted());
    }

    #[test]
    fn full_budget_reveals_graph() {
        let g = Graph::from_edges(6, &[(0, 1), (1, 2), (3, 4), (2, 5)]).unwrap();
        let out = run_sampling(&g, 6, &mut stream(8, 0));
        assert_eq!(out.observed.queried().len(), 6);
        assert_eq!(out.observed.subgraph(), g);
        let none = run_sampling(&g, 0, &mut stream(8, 0));
        assert!(none.observed.queried().is_empty());
        let clamped = run_sampling(&g, 50, &mut stream(8, 0));
        assert_eq!(clamped.queries.len(), 6);
    }

    #[test]
    fn odd_budget_split() {
        let g = star(9);
        let out = run_sampling(&g, 5, &mut stream(2, 0));
        assert_eq!(out.phase_nodes(Phase::Random).len(), 3);
        assert_eq!(out.phase_nodes(Phase::Neighbor).len(), 2);
    }
}

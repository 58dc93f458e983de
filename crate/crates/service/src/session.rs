//! Session aggregate: the live intervention as a pure state machine over
//! recorded events.
//!
//! Commands decide which events to emit; [`Session::apply`] is the only code
//! that changes state, and replay runs the same `apply` over the log.

use change_core::planner::{self, InterventionConfig, InterventionState, Strategy};
use change_core::rng::{self, ids};
use change_core::robust::RobustParams;
use change_core::sampler::{Phase, QuerySession, QueryTarget};
use change_core::trace::{EventKind, EventRecord, ScenarioValue, Trace};
use change_core::{Error, ObservedNetwork, Roster};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Collecting,
    Planning,
    AwaitingAttendance,
    Complete,
}

/// Body of `POST /sessions`.
#[derive(Clone, Debug, Deserialize)]
pub struct CreateRequest {
    pub roster: Option<Vec<String>>,
    pub config: Option<serde_json::Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QueryView {
    pub node: String,
    pub phase: Phase,
    pub fallback: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlanView {
    pub stage: usize,
    pub invited: Vec<String>,
    pub worst_case: Option<f64>,
    pub argmin_p: Option<f64>,
    pub per_scenario: Vec<ScenarioValue>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObservedSummary {
    pub node_count: usize,
    pub edge_count: usize,
    pub queried: Vec<String>,
}

/// Full snapshot returned by `GET /sessions/{id}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StateView {
    pub id: String,
    pub status: Status,
    pub strategy: Strategy,
    pub stage: usize,
    pub stages: usize,
    pub capacities: Vec<usize>,
    pub committed: Vec<Vec<String>>,
    pub pending_invitations: Option<Vec<String>>,
    pub pending_query: Option<QueryView>,
    pub observed: ObservedSummary,
    pub query_budget: usize,
    pub queries_used: usize,
    pub queries_remaining: usize,
    pub stages_remaining: usize,
    pub last_plan: Option<PlanView>,
    pub events: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum NextQuery {
    Query {
        node: String,
        phase: Phase,
        fallback: bool,
        queries_used: usize,
        query_budget: usize,
    },
    BudgetExhausted {
        queries_used: usize,
        query_budget: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnswerView {
    pub respondent: String,
    pub new_edges: usize,
    pub new_nodes: Vec<String>,
    pub node_count: usize,
    pub edge_count: usize,
    pub queries_used: usize,
    pub queries_remaining: usize,
}

/// Command failures, mapped to HTTP statuses by the API layer.
#[derive(Debug, thiserror::Error)]
pub enum SessionError {
    #[error("{message}")]
    Invalid {
        message: String,
        details: Vec<String>,
    },
    #[error("{0}")]
    Conflict(String),
    #[error("corrupt event log: {0}")]
    Corrupt(String),
}

impl SessionError {
    fn invalid(message: impl Into<String>) -> Self {
        SessionError::Invalid {
            message: message.into(),
            details: Vec::new(),
        }
    }
}

impl From<Error> for SessionError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidState(_) | Error::BudgetExhausted | Error::RosterExhausted => {
                SessionError::Conflict(e.to_string())
            }
            Error::NotInvited(ref ids) => SessionError::Invalid {
                message: "attendance lists nodes that were not invited".into(),
                details: ids.clone(),
            },
            other => SessionError::invalid(other.to_string()),
        }
    }
}

type Result<T, E = SessionError> = std::result::Result<T, E>;

#[derive(Clone, Debug)]
pub struct Session {
    id: String,
    config: InterventionConfig,
    status: Status,
    query: QuerySession,
    state: Option<InterventionState>,
    last_plan: Option<PlanView>,
    trace: Trace,
}

/// Parses and completes a creation request. Missing Monte Carlo budgets are
/// taken from `default_budgets`.
pub fn resolve_config(
    req: &CreateRequest,
    default_budgets: &RobustParams,
) -> Result<(Vec<String>, InterventionConfig)> {
    let Some(roster) = req.roster.clone() else {
        return Err(SessionError::Invalid {
            message: "invalid session document".into(),
            details: vec!["roster: missing".into()],
        });
    };
    let Some(mut value) = req.config.clone() else {
        return Err(SessionError::Invalid {
            message: "invalid session document".into(),
            details: vec!["config: missing".into()],
        });
    };
    if let Some(obj) = value.as_object_mut() {
        if !obj.contains_key("budgets") {
            obj.insert(
                "budgets".into(),
                serde_json::to_value(default_budgets).expect("budgets serialize"),
            );
        }
    }
    let config: InterventionConfig = serde_json::from_value(value).map_err(|e| SessionError::Invalid {
        message: "invalid session document".into(),
        details: vec![format!("config: {e}")],
    })?;
    Roster::from_tokens(&roster).map_err(|e| SessionError::Invalid {
        message: "invalid session document".into(),
        details: vec![format!("roster: {e}")],
    })?;
    if roster.is_empty() {
        return Err(SessionError::Invalid {
            message: "invalid session document".into(),
            details: vec!["roster: empty".into()],
        });
    }
    config.validate(roster.len()).map_err(|e| SessionError::Invalid {
        message: "invalid session document".into(),
        details: vec![format!("config: {e}")],
    })?;
    Ok((roster, config))
}

impl Session {
    /// The `created` event for a validated request.
    pub fn creation_event(roster: &[String], config: &InterventionConfig) -> EventKind {
        EventKind::Created {
            config: serde_json::to_value(config).expect("config serializes"),
            roster: roster.to_vec(),
        }
    }

    /// New session with its `created` record.
    pub fn create(id: &str, ts_ms: u64, roster: &[String], config: &InterventionConfig) -> Result<(Session, EventRecord)> {
        let rec = EventRecord {
            seq: 0,
            ts_ms,
            stream: None,
            kind: Session::creation_event(roster, config),
        };
        Ok((Session::from_created(id, &rec)?, rec))
    }

    fn from_created(id: &str, rec: &EventRecord) -> Result<Session> {
        let EventKind::Created { config, roster } = &rec.kind else {
            return Err(SessionError::Corrupt("first event must be `created`".into()));
        };
        let config: InterventionConfig =
            serde_json::from_value(config.clone()).map_err(|e| SessionError::Corrupt(e.to_string()))?;
        let roster = Roster::from_tokens(roster).map_err(|e| SessionError::Corrupt(e.to_string()))?;
        let budget = config.query_budget;
        let mut trace = Trace::new();
        trace.push_at(rec.ts_ms, rec.stream, rec.kind.clone());
        Ok(Session {
            id: id.to_string(),
            config,
            status: Status::Collecting,
            query: QuerySession::new(ObservedNetwork::new(roster), budget),
            state: None,
            last_plan: None,
            trace,
        })
    }

    /// Rebuilds a session from its full event log.
    pub fn replay(id: &str, events: &[EventRecord]) -> Result<Session> {
        let Some(first) = events.first() else {
            return Err(SessionError::Corrupt("empty event log".into()));
        };
        let mut s = Session::from_created(id, first)?;
        for rec in &events[1..] {
            s.apply(rec)?;
        }
        Ok(s)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn config(&self) -> &InterventionConfig {
        &self.config
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    fn roster(&self) -> &Roster {
        match &self.state {
            Some(s) => s.observed().roster(),
            None => self.query.observed().roster(),
        }
    }

    fn node(&self, token: &str) -> Result<usize> {
        self.roster()
            .index(token)
            .ok_or_else(|| SessionError::invalid(format!("unknown node `{token}`")))
    }

    fn expect_status(&self, want: Status, op: &str) -> Result<()> {
        if self.status == want {
            Ok(())
        } else {
            Err(SessionError::Conflict(format!(
                "{op} requires status {want:?} but the session is {:?}",
                self.status
            )))
        }
    }

    fn state_mut(&mut self) -> Result<&mut InterventionState> {
        self.state
            .as_mut()
            .ok_or_else(|| SessionError::Corrupt("planning event before collection closed".into()))
    }

    /// Applies one recorded event. Fails without changing anything visible
    /// to callers only if the event is inconsistent with the current state;
    /// commands therefore apply to a copy first.
    pub fn apply(&mut self, rec: &EventRecord) -> Result<()> {
        if rec.seq != self.trace.next_seq() {
            return Err(SessionError::Corrupt(format!(
                "expected seq {}, found {}",
                self.trace.next_seq(),
                rec.seq
            )));
        }
        match &rec.kind {
            EventKind::Created { .. } => {
                return Err(SessionError::Corrupt("duplicate `created` event".into()))
            }
            EventKind::QueryIssued {
                node,
                phase,
                fallback,
            } => {
                self.expect_status(Status::Collecting, "query")?;
                let node = self.node(node)?;
                self.query.issue(QueryTarget {
                    node,
                    phase: *phase,
                    fallback: *fallback,
                })?;
            }
            EventKind::QueryAnswered { node, contacts, .. } => {
                self.expect_status(Status::Collecting, "query result")?;
                let contacts: Vec<&str> = contacts.iter().map(String::as_str).collect();
                self.query.record_answer(node, &contacts)?;
            }
            EventKind::CollectionClosed { .. } => {
                self.expect_status(Status::Collecting, "closing collection")?;
                if self.query.pending().is_some() {
                    return Err(SessionError::Conflict("a query result is outstanding".into()));
                }
                self.state = Some(InterventionState::new(
                    self.query.observed().clone(),
                    self.config.stages,
                ));
                self.status = Status::Planning;
            }
            EventKind::Invitation {
                stage,
                invited,
                worst_case,
                argmin_p,
                per_scenario,
            } => {
                self.expect_status(Status::Planning, "plan")?;
                let idx = invited
                    .iter()
                    .map(|t| self.node(t))
                    .collect::<Result<Vec<_>>>()?;
                let capacity = self.config.capacities[stage - 1];
                let reinvite = self.config.reinvite_no_shows;
                let state = self.state_mut()?;
                if state.stage() != *stage {
                    return Err(SessionError::Corrupt(format!(
                        "invitation for stage {stage} during stage {}",
                        state.stage()
                    )));
                }
                state.invite(idx, capacity, reinvite)?;
                self.last_plan = Some(PlanView {
                    stage: *stage,
                    invited: invited.clone(),
                    worst_case: *worst_case,
                    argmin_p: *argmin_p,
                    per_scenario: per_scenario.clone(),
                });
                self.status = Status::AwaitingAttendance;
            }
            EventKind::Attendance { stage, attended } => {
                self.expect_status(Status::AwaitingAttendance, "attendance")?;
                let state = self.state_mut()?;
                if state.stage() != *stage {
                    return Err(SessionError::Corrupt(format!(
                        "attendance for stage {stage} during stage {}",
                        state.stage()
                    )));
                }
                let attended: Vec<&str> = attended.iter().map(String::as_str).collect();
                state.record_attendance_tokens(&attended)?;
            }
            EventKind::StageAdvanced { stage } => {
                self.expect_status(Status::AwaitingAttendance, "stage advance")?;
                let state = self.state_mut()?;
                if state.stage() != *stage || state.pending().is_some() {
                    return Err(SessionError::Corrupt(format!("unexpected advance to stage {stage}")));
                }
                self.status = Status::Planning;
            }
            EventKind::Completed => {
                if self.status == Status::Collecting || self.status == Status::Complete {
                    return Err(SessionError::Corrupt("completion out of order".into()));
                }
                self.status = Status::Complete;
            }
        }
        self.trace.push_at(rec.ts_ms, rec.stream, rec.kind.clone());
        Ok(())
    }

    /// Applies `events` to a copy and returns the copy with the new records;
    /// `self` is untouched on error.
    fn decide(&self, ts_ms: u64, events: Vec<(Option<u64>, EventKind)>) -> Result<(Session, Vec<EventRecord>)> {
        let mut next = self.clone();
        let mut out = Vec::with_capacity(events.len());
        for (stream, kind) in events {
            let rec = EventRecord {
                seq: next.trace.next_seq(),
                ts_ms,
                stream,
                kind,
            };
            next.apply(&rec)?;
            out.push(rec);
        }
        Ok((next, out))
    }

    fn query_view(&self, t: QueryTarget) -> NextQuery {
        NextQuery::Query {
            node: self.roster().token(t.node).to_string(),
            phase: t.phase,
            fallback: t.fallback,
            queries_used: self.query.answered().len(),
            query_budget: self.query.budget(),
        }
    }

    /// Next interview target. Emits `query_issued`, or `collection_closed`
    /// once the budget or the roster is used up.
    pub fn next_query(&self, ts_ms: u64) -> Result<(Session, Vec<EventRecord>, NextQuery)> {
        self.expect_status(Status::Collecting, "next-query")?;
        if let Some(t) = self.query.pending() {
            return Ok((self.clone(), Vec::new(), self.query_view(t)));
        }
        if self.query.is_exhausted() {
            let (next, recs) = self.decide(ts_ms, vec![(
                None,
                EventKind::CollectionClosed {
                    queries: self.query.answered().len(),
                },
            )])?;
            let view = NextQuery::BudgetExhausted {
                queries_used: next.query.answered().len(),
                query_budget: next.query.budget(),
            };
            return Ok((next, recs, view));
        }
        let stream_id = ids::query(self.query.answered().len());
        let mut rng = rng::stream(self.config.seed, stream_id);
        let mut probe = self.query.clone();
        let t = probe.next_query(&mut rng)?;
        let (next, recs) = self.decide(ts_ms, vec![(
            Some(stream_id),
            EventKind::QueryIssued {
                node: self.roster().token(t.node).to_string(),
                phase: t.phase,
                fallback: t.fallback,
            },
        )])?;
        let view = next.query_view(t);
        Ok((next, recs, view))
    }

    pub fn post_query_result(
        &self,
        ts_ms: u64,
        respondent: &str,
        contacts: &[String],
    ) -> Result<(Session, Vec<EventRecord>, AnswerView)> {
        self.expect_status(Status::Collecting, "query-result")?;
        let Some(pending) = self.query.pending() else {
            return Err(SessionError::Conflict("no query is outstanding".into()));
        };
        let expected = self.roster().token(pending.node);
        if respondent != expected {
            return Err(SessionError::Conflict(format!(
                "respondent `{respondent}` does not match the issued query `{expected}`"
            )));
        }
        // Dry run to learn the reveal summary and reject bad contacts.
        let mut probe = self.query.clone();
        let refs: Vec<&str> = contacts.iter().map(String::as_str).collect();
        let summary = probe.record_answer(respondent, &refs)?;
        let new_nodes = probe.observed().roster().tokens_of(&summary.new_nodes);
        let (next, recs) = self.decide(ts_ms, vec![(
            None,
            EventKind::QueryAnswered {
                node: respondent.to_string(),
                contacts: contacts.to_vec(),
                new_nodes: new_nodes.clone(),
                new_edges: summary.new_edges,
            },
        )])?;
        let obs = next.query.observed();
        let view = AnswerView {
            respondent: respondent.to_string(),
            new_edges: summary.new_edges,
            new_nodes,
            node_count: obs.node_count(),
            edge_count: obs.revealed_edge_count(),
            queries_used: next.query.answered().len(),
            queries_remaining: next.query.remaining(),
        };
        Ok((next, recs, view))
    }

    /// Plans the current stage. Repeating the call while attendance is
    /// outstanding returns the same plan without new events.
    pub fn plan_next_stage(&self, ts_ms: u64) -> Result<(Session, Vec<EventRecord>, PlanView)> {
        if self.status == Status::AwaitingAttendance {
            let plan = self.last_plan.clone().expect("awaiting implies a plan");
            return Ok((self.clone(), Vec::new(), plan));
        }
        self.expect_status(Status::Planning, "plan-stage")?;
        let state = self.state.as_ref().expect("planning implies state");
        let stage = state.stage();
        let stream_id = ids::planning(stage);
        let mut rng = rng::stream(self.config.seed, stream_id);
        let mut probe = state.clone();
        let plan = planner::plan_stage(&mut probe, &self.config, &mut rng)?;
        let mut events = vec![(
            Some(stream_id),
            planner::invitation_event(state.observed().roster(), &plan),
        )];
        if plan.invited.is_empty() {
            events.push((None, EventKind::Completed));
        }
        let (next, recs) = self.decide(ts_ms, events)?;
        let view = next.last_plan.clone().expect("just planned");
        Ok((next, recs, view))
    }

    pub fn post_attendance(&self, ts_ms: u64, attended: &[String]) -> Result<(Session, Vec<EventRecord>, StateView)> {
        self.expect_status(Status::AwaitingAttendance, "attendance")?;
        let state = self.state.as_ref().expect("awaiting implies state");
        let stage = state.stage();
        let mut events = vec![
            (
                None,
                EventKind::Attendance {
                    stage,
                    attended: attended.to_vec(),
                },
            ),
            (None, EventKind::StageAdvanced { stage: stage + 1 }),
        ];
        if stage + 1 > self.config.stages {
            events.push((None, EventKind::Completed));
        }
        let (next, recs) = self.decide(ts_ms, events)?;
        let view = next.view();
        Ok((next, recs, view))
    }

    pub fn view(&self) -> StateView {
        let roster = self.roster();
        let observed = match &self.state {
            Some(s) => s.observed(),
            None => self.query.observed(),
        };
        let (stage, committed, pending) = match &self.state {
            Some(s) => (
                s.stage(),
                s.committed().iter().map(|c| roster.tokens_of(c)).collect(),
                s.pending().map(|p| roster.tokens_of(p)),
            ),
            None => (1, Vec::new(), None),
        };
        StateView {
            id: self.id.clone(),
            status: self.status,
            strategy: self.config.strategy,
            stage,
            stages: self.config.stages,
            capacities: self.config.capacities.clone(),
            committed,
            pending_invitations: pending,
            pending_query: self.query.pending().map(|t| QueryView {
                node: roster.token(t.node).to_string(),
                phase: t.phase,
                fallback: t.fallback,
            }),
            observed: ObservedSummary {
                node_count: observed.node_count(),
                edge_count: observed.revealed_edge_count(),
                queried: roster.tokens_of(observed.queried()),
            },
            query_budget: self.query.budget(),
            queries_used: self.query.answered().len(),
            queries_remaining: self.query.remaining(),
            stages_remaining: if self.status == Status::Complete {
                0
            } else {
                (self.config.stages + 1).saturating_sub(stage)
            },
            last_plan: self.last_plan.clone(),
            events: self.trace.next_seq(),
        }
    }
}

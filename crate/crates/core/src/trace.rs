//! Line-delimited event records shared by the simulator and the service.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampler::Phase;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub seq: u64,
    /// Milliseconds: logical time in simulation, wall clock in the service.
    pub ts_ms: u64,
    /// Random stream consumed by the step, when it drew any randomness.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stream: Option<u64>,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum EventKind {
    Created {
        config: serde_json::Value,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        roster: Vec<String>,
    },
    QueryIssued {
        node: String,
        phase: Phase,
        fallback: bool,
    },
    QueryAnswered {
        node: String,
        contacts: Vec<String>,
        new_nodes: Vec<String>,
        new_edges: usize,
    },
    CollectionClosed {
        queries: usize,
    },
    Invitation {
        stage: usize,
        invited: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        worst_case: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        argmin_p: Option<f64>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        per_scenario: Vec<ScenarioValue>,
    },
    Attendance {
        stage: usize,
        attended: Vec<String>,
    },
    StageAdvanced {
        stage: usize,
    },
    Completed,
}

/// Normalized value of the invited set under one propagation probability.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioValue {
    pub p: f64,
    pub value: f64,
}

/// Append-only event sequence with monotone sequence numbers.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    events: Vec<EventRecord>,
}

impl Trace {
    pub fn new() -> Self {
        Trace::default()
    }

    pub fn events(&self) -> &[EventRecord] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn next_seq(&self) -> u64 {
        self.events.len() as u64
    }

    /// Appends with logical time equal to the sequence number.
    pub fn push(&mut self, stream: Option<u64>, kind: EventKind) -> &EventRecord {
        let seq = self.next_seq();
        self.push_at(seq, stream, kind)
    }

    pub fn push_at(&mut self, ts_ms: u64, stream: Option<u64>, kind: EventKind) -> &EventRecord {
        let seq = self.next_seq();
        self.events.push(EventRecord {
            seq,
            ts_ms,
            stream,
            kind,
        });
        self.events.last().expect("just pushed")
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for e in &self.events {
            write_record(&mut out, e)?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("json is utf-8")
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Trace> {
        let mut events = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line.map_err(|e| Error::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: EventRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
            if rec.seq != events.len() as u64 {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("expected seq {}, found {}", events.len(), rec.seq),
                });
            }
            events.push(rec);
        }
        Ok(Trace { events })
    }
}

pub fn write_record<W: Write>(out: &mut W, record: &EventRecord) -> Result<()> {
    serde_json::to_writer(&mut *out, record)?;
    out.write_all(b"\n")
        .map_err(|e| Error::io("<trace>", e))
}

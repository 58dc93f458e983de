//! Batch comparison of strategies over synthetic graphs, written as CSV.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::cascade::{AttendanceProb, PropagationProb};
use crate::error::{Error, Result};
use crate::generate::GraphModel;
use crate::netgraph::Graph;
use crate::par;
use crate::planner::{self, InterventionConfig, Strategy};
use crate::rng;
use crate::robust::{RobustParams, UncertaintySet};

/// Per-run overrides on top of [`InterventionConfig::defaults_for`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigTemplate {
    pub capacities: Option<Vec<usize>>,
    pub query_budget: Option<usize>,
    pub q: Option<AttendanceProb>,
    pub uncertainty: Option<UncertaintySet>,
    pub budgets: Option<RobustParams>,
    pub reinvite_no_shows: Option<bool>,
}

impl ConfigTemplate {
    pub fn instantiate(&self, n: usize, strategy: Strategy, seed: u64) -> InterventionConfig {
        let mut c = InterventionConfig::defaults_for(n, strategy, seed);
        if let Some(caps) = &self.capacities {
            c.stages = caps.len();
            c.capacities = caps.clone();
        }
        if let Some(m) = self.query_budget {
            c.query_budget = m;
        }
        if let Some(q) = self.q {
            c.q = q;
        }
        if let Some(u) = &self.uncertainty {
            c.uncertainty = u.clone();
        }
        if let Some(b) = &self.budgets {
            c.budgets = b.clone();
        }
        if let Some(r) = self.reinvite_no_shows {
            c.reinvite_no_shows = r;
        }
        c
    }
}

fn default_replications() -> usize {
    1
}

fn default_strategies() -> Vec<Strategy> {
    Strategy::ALL.to_vec()
}

fn default_eval_samples() -> usize {
    2_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub graphs: Vec<GraphModel>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default = "default_strategies")]
    pub strategies: Vec<Strategy>,
    #[serde(default)]
    pub config: ConfigTemplate,
    /// Propagation probabilities for the final evaluation; defaults to the
    /// uncertainty set.
    #[serde(default)]
    pub eval_grid: Option<Vec<f64>>,
    #[serde(default = "default_eval_samples")]
    pub eval_samples: usize,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    /// Fill the wall-clock column. Off by default so output bytes depend
    /// only on the spec.
    #[serde(default)]
    pub record_timing: bool,
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ExperimentSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn grid(&self) -> Result<Vec<PropagationProb>> {
        match &self.eval_grid {
            Some(g) => g.iter().map(|&p| PropagationProb::new(p)).collect(),
            None => Ok(self
                .config
                .uncertainty
                .clone()
                .unwrap_or_default()
                .values()
                .to_vec()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.graphs.is_empty() {
            return Err(Error::param("at least one graph model is required"));
        }
        if self.replications == 0 {
            return Err(Error::param("replications must be at least 1"));
        }
        if self.strategies.is_empty() {
            return Err(Error::param("at least one strategy is required"));
        }
        if self.eval_samples == 0 {
            return Err(Error::param("eval_samples must be at least 1"));
        }
        if self.grid()?.is_empty() {
            return Err(Error::param("evaluation grid is empty"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub graph_id: String,
    pub strategy: Strategy,
    pub replication: usize,
    pub seed: u64,
    pub stages: usize,
    pub committed: usize,
    /// Expected spread at each grid point, in grid order.
    pub spreads: Vec<f64>,
    pub worst_case_normalized: f64,
    pub wall_clock_ms: u64,
}

/// Rows plus the evaluation grid that labels their spread columns.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultTable {
    pub grid: Vec<f64>,
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    /// Mean spread per grid point over the rows of one strategy.
    pub fn mean_spreads(&self, strategy: Strategy) -> Vec<f64> {
        let rows: Vec<&ResultRow> = self.rows.iter().filter(|r| r.strategy == strategy).collect();
        (0..self.grid.len())
            .map(|i| rows.iter().map(|r| r.spreads[i]).sum::<f64>() / rows.len().max(1) as f64)
            .collect()
    }

    fn header(&self) -> Vec<String> {
        let mut h: Vec<String> = [
            "graph_id",
            "strategy",
            "replication",
            "seed",
            "stages",
            "committed",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        h.extend(self.grid.iter().map(|p| format!("spread_p{p}")));
        h.push("worst_case_normalized".into());
        h.push("wall_clock_ms".into());
        h
    }

    pub fn write_csv_to<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.header())?;
        for r in &self.rows {
            let mut rec = vec![
                r.graph_id.clone(),
                r.strategy.to_string(),
                r.replication.to_string(),
                r.seed.to_string(),
                r.stages.to_string(),
                r.committed.to_string(),
            ];
            rec.extend(r.spreads.iter().map(|s| s.to_string()));
            rec.push(r.worst_case_normalized.to_string());
            rec.push(r.wall_clock_ms.to_string());
            w.write_record(rec)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    pub fn read_csv_from<R: Read>(input: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(input);
        let header = rd.headers()?.clone();
        let bad = |m: String| Error::Parse { line: 1, message: m };
        let grid = header
            .iter()
            .filter_map(|h| h.strip_prefix("spread_p"))
            .map(|p| p.parse::<f64>().map_err(|e| bad(e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        let m = grid.len();
        if header.len() != 8 + m {
            return Err(bad(format!("unexpected column count {}", header.len())));
        }
        let mut rows = Vec::new();
        for (i, rec) in rd.records().enumerate() {
            let rec = rec?;
            let line = i + 2;
            let field = |j: usize| rec.get(j).unwrap_or("");
            let err = |j: usize, e: String| Error::Parse {
                line,
                message: format!("column {}: {e}", header.get(j).unwrap_or("?")),
            };
            macro_rules! num {
                ($j:expr) => {
                    field($j).parse().map_err(|e: std::num::ParseIntError| err($j, e.to_string()))?
                };
            }
            let float = |j: usize| {
                field(j)
                    .parse::<f64>()
                    .map_err(|e| err(j, e.to_string()))
            };
            rows.push(ResultRow {
                graph_id: field(0).to_string(),
                strategy: field(1).parse()?,
                replication: num!(2),
                seed: num!(3),
                stages: num!(4),
                committed: num!(5),
                spreads: (0..m).map(|j| float(6 + j)).collect::<Result<_>>()?,
                worst_case_normalized: float(6 + m)?,
                wall_clock_ms: num!(7 + m),
            });
        }
        Ok(ResultTable { grid, rows })
    }
}

pub fn write_csv(table: &ResultTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    table.write_csv_to(&mut out)?;
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<ResultTable> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    ResultTable::read_csv_from(std::io::BufReader::new(file))
}

/// Seeds for one (graph, replication) cell: the graph draw and the
/// intervention, shared by every strategy in the cell.
fn cell_seeds(master: u64, graph: usize, replication: usize) -> (u64, u64) {
    let mut r = rng::stream(master, ((graph as u64) << 32) | replication as u64);
    (r.next_u64(), r.next_u64())
}

/// Runs every graph × strategy × replication and returns rows sorted by
/// (graph id, strategy, replication).
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ResultTable> {
    spec.validate()?;
    let grid = spec.grid()?;

    // Graphs are generated up front so generator errors surface once.
    let mut cells: Vec<(usize, usize, String, Graph, u64)> = Vec::new();
    for (gi, model) in spec.graphs.iter().enumerate() {
        let label = format!("g{gi}-{}", model.label());
        let fixed = if model.is_random() {
            None
        } else {
            Some(model.generate(0)?)
        };
        for r in 0..spec.replications {
            let (graph_seed, run_seed) = cell_seeds(spec.seed, gi, r);
            let g = match &fixed {
                Some(g) => g.clone(),
                None => model.generate(graph_seed)?,
            };
            cells.push((gi, r, label.clone(), g, run_seed));
        }
    }
    let tasks: Vec<(usize, Strategy)> = (0..cells.len())
        .flat_map(|c| spec.strategies.iter().map(move |&s| (c, s)))
        .collect();

    let results = par::map_slice(&tasks, |&(c, strategy)| -> Result<ResultRow> {
        let (_, r, label, g, seed) = &cells[c];
        let config = spec.config.instantiate(g.node_count(), strategy, *seed);
        let start = Instant::now();
        let out = planner::simulate_intervention(g, &config, &grid, spec.eval_samples)?;
        let elapsed = start.elapsed().as_millis() as u64;
        Ok(ResultRow {
            graph_id: label.clone(),
            strategy,
            replication: *r,
            seed: *seed,
            stages: config.stages,
            committed: out.committed_count(),
            spreads: out.evaluations.iter().map(|e| e.spread.mean).collect(),
            worst_case_normalized: out.worst_case_normalized(),
            wall_clock_ms: if spec.record_timing { elapsed } else { 0 },
        })
    });
    let mut rows = results.into_iter().collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| {
        (&a.graph_id, a.strategy, a.replication).cmp(&(&b.graph_id, b.strategy, b.replication))
    });
    Ok(ResultTable {
        grid: grid.iter().map(|p| p.value()).collect(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec() -> ExperimentSpec {
        ExperimentSpec::from_json(
            r#"{
                "graphs": [{"model": "ba", "n": 30, "attachments": 2}],
                "replications": 3,
                "strategies": ["DC"],
                "eval_grid": [0.1, 0.5],
                "eval_samples": 200,
                "seed": 4
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn one_row_per_replication() {
        let t = run_experiment(&small_spec()).unwrap();
        assert_eq!(t.rows.len(), 3);
        assert_eq!(
            t.rows.iter().map(|r| r.replication).collect::<Vec<_>>(),
            vec![0, 1, 2]
        );
        for r in &t.rows {
            assert!(r.committed <= 5);
            assert!(r.spreads.iter().all(|&s| s <= 30.0));
            assert_eq!(r.wall_clock_ms, 0);
        }
    }

    #[test]
    fn csv_round_trip() {
        let t = run_experiment(&small_spec()).unwrap();
        let text = t.to_csv_string();
        assert!(text.starts_with(
            "graph_id,strategy,replication,seed,stages,committed,spread_p0.1,spread_p0.5,worst_case_normalized,wall_clock_ms\n"
        ));
        let back = ResultTable::read_csv_from(text.as_bytes()).unwrap();
        assert_eq!(back, t);
        assert_eq!(text, run_experiment(&small_spec()).unwrap().to_csv_string());
    }

    #[test]
    fn empty_table_is_header_only() {
        let t = ResultTable {
            grid: vec![0.5],
            rows: vec![],
        };
        assert_eq!(t.to_csv_string().lines().count(), 1);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_csv(&t, &path).unwrap();
        assert_eq!(read_csv(&path).unwrap(), t);
        assert!(write_csv(&t, dir.path().join("missing/out.csv")).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(ExperimentSpec::from_json(r#"{"graphs": []}"#).is_err());
        assert!(ExperimentSpec::from_json(
            r#"{"graphs": [{"model":"er","n":5,"edge_prob":0.1}], "replications": 0}"#
        )
        .is_err());
        assert!(ExperimentSpec::from_json(r#"{"graphs": [{"model":"er","n":5,"edge_prob":0.1}], "bogus": 1}"#).is_err());
        let s = ExperimentSpec::from_json(r#"{"graphs": [{"model":"er","n":5,"edge_prob":0.1}]}"#).unwrap();
        assert_eq!(s.grid().unwrap().len(), 10);
        assert_eq!(s.strategies.len(), 3);
    }
}

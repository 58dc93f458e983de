//! `change`: generate graphs, simulate interventions, run experiments,
//! evaluate seed sets, and serve live sessions.

use std::fs;
use std::io::{self, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use change_core::cascade::{estimate_spread, PropagationProb};
use change_core::experiment::{self, ExperimentSpec};
use change_core::generate::GraphModel;
use change_core::netgraph::{load_edge_list, load_roster, Graph};
use change_core::planner::{self, Strategy};
use change_core::rng::{self, ids};
use change_core::robust::UncertaintySet;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "change", version, about = "Robust multi-stage peer-leader planning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic graph as an edge list.
    Generate {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one intervention and print its event trace as JSON lines.
    Simulate {
        #[command(flatten)]
        graph: GraphArgs,
        /// Experiment spec; its first graph is used unless a graph is given.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_parser = parse_strategy)]
        strategy: Option<Strategy>,
        #[arg(long)]
        seed: Option<u64>,
        /// Worlds per evaluation point.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment spec and write the result table as CSV.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the spec's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the spec's evaluation sample count.
        #[arg(long)]
        samples: Option<usize>,
        /// Overrides the spec's output path; stdout when neither is set.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate the spread of a seed set at each propagation probability.
    Evaluate {
        #[command(flatten)]
        graph: GraphArgs,
        /// One node token per line.
        #[arg(long)]
        seeds: PathBuf,
        /// Comma-separated propagation probabilities.
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<f64>>,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Start the session service. Flags override the environment.
    Serve {
        #[arg(long)]
        bind: Option<SocketAddr>,
        #[arg(long)]
        data_dir: Option<PathBuf>,
        /// Evaluation samples for per-scenario diagnostics.
        #[arg(long)]
        samples: Option<usize>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Model {
    Er,
    Ba,
    Ws,
}

#[derive(Debug, Args)]
struct GraphArgs {
    /// Edge list file.
    #[arg(long, conflicts_with = "model")]
    graph: Option<PathBuf>,
    #[arg(long, value_enum)]
    model: Option<Model>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    edge_prob: Option<f64>,
    #[arg(long)]
    attachments: Option<usize>,
    #[arg(long)]
    ring_degree: Option<usize>,
    #[arg(long)]
    rewire_prob: Option<f64>,
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.to_ascii_uppercase().parse().map_err(|e| format!("{e}"))
}

type Failure = Box<dyn std::error::Error>;

fn missing(flag: &str) -> Failure {
    format!("--{flag} is required for this model").into()
}

impl GraphArgs {
    fn model(&self) -> Result<Option<GraphModel>, Failure> {
        if let Some(path) = &self.graph {
            return Ok(Some(GraphModel::File { path: path.clone() }));
        }
        let Some(model) = self.model else {
            return Ok(None);
        };
        let n = self.n.ok_or_else(|| missing("n"))?;
        Ok(Some(match model {
            Model::Er => GraphModel::Er {
                n,
                edge_prob: self.edge_prob.ok_or_else(|| missing("edge-prob"))?,
            },
            Model::Ba => GraphModel::Ba {
                n,
                attachments: self.attachments.ok_or_else(|| missing("attachments"))?,
            },
            Model::Ws => GraphModel::Ws {
                n,
                ring_degree: self.ring_degree.ok_or_else(|| missing("ring-degree"))?,
                rewire_prob: self.rewire_prob.ok_or_else(|| missing("rewire-prob"))?,
            },
        }))
    }

    fn require(&self) -> Result<GraphModel, Failure> {
        self.model()?
            .ok_or_else(|| "a graph is required: pass --graph FILE or --model with its parameters".into())
    }
}

fn write_output(out: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, bytes).map_err(|e| format!("{}: {e}", path.display()).into()),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()).into())
}

fn load_graph(path: &Path) -> Result<Graph, Failure> {
    load_edge_list(&read_text(path)?).map_err(|e| format!("{}: {e}", path.display()).into())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Generate { graph, seed, out } => {
            let g = graph.require()?.generate(seed)?;
            write_output(out.as_deref(), g.to_edge_list().as_bytes())
        }
        Command::Simulate {
            graph,
            config,
            strategy,
            seed,
            samples,
            out,
        } => {
            let spec = config.as_deref().map(ExperimentSpec::load).transpose()?;
            let model = match (graph.model()?, &spec) {
                (Some(m), _) => m,
                (None, Some(s)) => s.graphs[0].clone(),
                (None, None) => graph.require()?,
            };
            let seed = seed.or(spec.as_ref().map(|s| s.seed)).unwrap_or(0);
            let strategy = strategy
                .or_else(|| spec.as_ref().and_then(|s| s.strategies.first().copied()))
                .unwrap_or(Strategy::Change);
            let template = spec.as_ref().map(|s| s.config.clone()).unwrap_or_default();
            let grid = match &spec {
                Some(s) => s.grid()?,
                None => template.uncertainty.clone().unwrap_or_default().values().to_vec(),
            };
            let samples = samples.or(spec.as_ref().map(|s| s.eval_samples)).unwrap_or(2_000);

            let g = model.generate(seed)?;
            let cfg = template.instantiate(g.node_count(), strategy, seed);
            let outcome = planner::simulate_intervention(&g, &cfg, &grid, samples)?;
            write_output(out.as_deref(), outcome.trace.to_jsonl().as_bytes())?;
            eprintln!(
                "{strategy}: committed {} of {} invitations, worst-case normalized {:.4}",
                outcome.committed_count(),
                cfg.total_capacity(),
                outcome.worst_case_normalized()
            );
            for e in &outcome.evaluations {
                eprintln!("  p={:<5} spread {:.3} (opt {:.3})", e.p, e.spread.mean, e.opt);
            }
            Ok(())
        }
        Command::Experiment {
            config,
            seed,
            samples,
            out,
        } => {
            let mut spec = ExperimentSpec::load(&config)?;
            if let Some(s) = seed {
                spec.seed = s;
            }
            if let Some(s) = samples {
                spec.eval_samples = s;
            }
            let out = out.or_else(|| spec.output.clone());
            let table = experiment::run_experiment(&spec)?;
            match out {
                Some(path) => experiment::write_csv(&table, &path)?,
                None => write_output(None, table.to_csv_string().as_bytes())?,
            }
            for s in &spec.strategies {
                let means: Vec<String> = table.mean_spreads(*s).iter().map(|m| format!("{m:.2}")).collect();
                eprintln!("{s}: mean spread [{}]", means.join(", "));
            }
            Ok(())
        }
        Command::Evaluate {
            graph,
            seeds,
            grid,
            samples,
            seed,
            out,
        } => {
            let g = match graph.require()? {
                GraphModel::File { path } => load_graph(&path)?,
                m => m.generate(seed)?,
            };
            let tokens = load_roster(&read_text(&seeds)?)?;
            let nodes = tokens
                .tokens()
                .iter()
                .map(|t| g.roster().require(t))
                .collect::<Result<Vec<_>, _>>()?;
            let grid = match grid {
                Some(v) => v.into_iter().map(PropagationProb::new).collect::<Result<Vec<_>, _>>()?,
                None => UncertaintySet::default().values().to_vec(),
            };
            let mut text = String::from("p,spread,stderr\n");
            for (i, p) in grid.iter().enumerate() {
                let mut r = rng::stream(seed, ids::EVALUATION + ((i as u64) << 32));
                let est = estimate_spread(&g, &nodes, *p, samples, &mut r)?;
                text.push_str(&format!("{},{},{}\n", p.value(), est.mean, est.stderr));
            }
            write_output(out.as_deref(), text.as_bytes())
        }
        Command::Serve {
            bind,
            data_dir,
            samples,
        } => {
            let mut settings = change_service::Settings::from_env()?;
            if let Some(b) = bind {
                settings.bind = b;
            }
            if let Some(d) = data_dir {
                settings.data_dir = d;
            }
            if let Some(s) = samples {
                settings.budgets.eval_samples = s;
            }
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(change_service::serve(settings))?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    tracing_subscriber::fmt().with_writer(io::stderr).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

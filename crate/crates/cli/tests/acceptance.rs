//! End-to-end acceptance checks. Runs as a plain binary so each criterion
//! prints exactly one PASS/FAIL line; exits non-zero if any fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use change_core::cascade::{
    estimate_spread, exact_spread, grad_multilinear, AttendanceProb, ExactObjective, PropagationProb,
    SetObjective,
};
use change_core::enumerate::connected_graphs_up_to;
use change_core::experiment::{read_csv, ResultTable};
use change_core::generate::barabasi_albert;
use change_core::greedy::{for_each_subset, lazy_greedy_with};
use change_core::netgraph::{Graph, NodeIdx};
use change_core::planner::Strategy;
use change_core::rng::{ids, stream, StreamRng};
use change_core::robust::{
    project_capped_simplex, sample_best_with, solve_robust, swap_round, MarginalVector,
    RobustProblem, SolverParams, UncertaintySet,
};
use change_core::sampler::{run_sampling, Phase};
use rand::seq::SliceRandom;
use rand::Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn prob(p: f64) -> PropagationProb {
    PropagationProb::new(p).unwrap()
}

fn attend(q: f64) -> AttendanceProb {
    AttendanceProb::new(q).unwrap()
}

// ---------------------------------------------------------------------------
// Brute-force oracles, written against plain edge lists.

fn find(parent: &mut [usize], mut v: usize) -> usize {
    while parent[v] != v {
        parent[v] = parent[parent[v]];
        v = parent[v];
    }
    v
}

/// Calls `f(weight, component_root_of)` for every live-edge subset.
fn for_each_world(n: usize, edges: &[(usize, usize)], p: f64, mut f: impl FnMut(f64, &[usize])) {
    let m = edges.len();
    let mut parent = vec![0; n];
    let mut roots = vec![0; n];
    for mask in 0u64..(1 << m) {
        let live = mask.count_ones() as i32;
        let w = p.powi(live) * (1.0 - p).powi(m as i32 - live);
        if w == 0.0 {
            continue;
        }
        for (v, slot) in parent.iter_mut().enumerate() {
            *slot = v;
        }
        for (i, &(a, b)) in edges.iter().enumerate() {
            if mask >> i & 1 == 1 {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra] = rb;
            }
        }
        for (v, r) in roots.iter_mut().enumerate() {
            *r = find(&mut parent, v);
        }
        f(w, &roots);
    }
}

/// Expected number of nodes reached when node `v` seeds independently with
/// probability `presence[v]`.
fn oracle_multilinear(n: usize, edges: &[(usize, usize)], presence: &[f64], p: f64) -> f64 {
    let mut total = 0.0;
    for_each_world(n, edges, p, |w, roots| {
        let mut absent = vec![1.0; n];
        for v in 0..n {
            absent[roots[v]] *= 1.0 - presence[v];
        }
        let reached: f64 = (0..n).map(|v| 1.0 - absent[roots[v]]).sum();
        total += w * reached;
    });
    total
}

fn oracle_spread(n: usize, edges: &[(usize, usize)], invited: &[usize], committed: &[usize], p: f64, q: f64) -> f64 {
    let mut presence = vec![0.0; n];
    for &v in invited {
        presence[v] = q;
    }
    for &v in committed {
        presence[v] = 1.0;
    }
    oracle_multilinear(n, edges, &presence, p)
}

fn random_graph(rng: &mut StreamRng, nodes: std::ops::RangeInclusive<usize>, max_edges: usize, density: f64) -> Graph {
    let n = rng.gen_range(nodes);
    let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    pairs.shuffle(rng);
    let edges: Vec<_> = pairs
        .into_iter()
        .filter(|_| rng.gen::<f64>() < density)
        .take(max_edges)
        .collect();
    Graph::from_edges(n, &edges).unwrap()
}

fn random_connected_graph(rng: &mut StreamRng, nodes: std::ops::RangeInclusive<usize>, max_edges: usize) -> Graph {
    loop {
        let g = random_graph(rng, nodes.clone(), max_edges, 0.45);
        if g.is_connected() {
            return g;
        }
    }
}

// ---------------------------------------------------------------------------

fn oracle_agreement() -> Verdict {
    let mut rng = stream(101, 0);
    let mut cases = 0;
    let mut within = 0;
    let mut exact_mismatch = 0;
    for _ in 0..50 {
        let g = random_graph(&mut rng, 3..=9, 20, 0.4);
        let edges = g.edges().to_vec();
        for &p in &[0.1, 0.3, 0.5, 0.8] {
            let size = rng.gen_range(1..=3.min(g.node_count()));
            let seeds: Vec<NodeIdx> = (0..g.node_count()).collect::<Vec<_>>().choose_multiple(&mut rng, size).copied().collect();
            let exact = exact_spread(&g, &seeds, prob(p)).unwrap();
            if (exact - oracle_spread(g.node_count(), &edges, &seeds, &[], p, 1.0)).abs() > 1e-9 {
                exact_mismatch += 1;
            }
            let est = estimate_spread(&g, &seeds, prob(p), 100_000, &mut rng).unwrap();
            cases += 1;
            if (est.mean - exact).abs() <= 3.0 * est.stderr + 1e-12 {
                within += 1;
            }
        }
    }
    let tri = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
    let tri_oracle = oracle_spread(3, tri.edges(), &[0], &[], 0.5, 1.0);
    let tri_exact = exact_spread(&tri, &[0], prob(0.5)).unwrap();
    let tri_est = estimate_spread(&tri, &[0], prob(0.5), 100_000, &mut rng).unwrap();
    let tri_ok = (tri_oracle - 2.25).abs() < 1e-12
        && (tri_exact - tri_oracle).abs() < 1e-12
        && (tri_est.mean - tri_oracle).abs() <= 3.0 * tri_est.stderr;
    let rate = within as f64 / cases as f64;
    verdict(
        rate >= 0.99 && exact_mismatch == 0 && tri_ok,
        format!(
            "{within}/{cases} estimates within 3 stderr ({:.1}%), {exact_mismatch} exact/oracle mismatches, triangle exact {tri_exact} estimate {:.4}±{:.4}",
            100.0 * rate,
            tri_est.mean,
            tri_est.stderr
        ),
    )
}

fn submodularity() -> Verdict {
    let graphs = connected_graphs_up_to(5).unwrap();
    let mut checks = 0usize;
    let mut violations = 0usize;
    let mut oracle_mismatch = 0usize;
    for g in &graphs {
        let n = g.node_count();
        for &p in &[0.25, 0.5, 0.75] {
            for &q in &[0.5, 1.0] {
                let obj = ExactObjective::new(g, prob(p), attend(q), &[]).unwrap();
                let value: Vec<f64> = (0u32..1 << n)
                    .map(|mask| {
                        let set: Vec<usize> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
                        obj.evaluate(&set)
                    })
                    .collect();
                for (mask, &v) in value.iter().enumerate() {
                    let set: Vec<usize> = (0..n).filter(|&u| mask >> u & 1 == 1).collect();
                    if (v - oracle_spread(n, g.edges(), &set, &[], p, q)).abs() > 1e-9 {
                        oracle_mismatch += 1;
                    }
                }
                for s in 0u32..1 << n {
                    for t in 0u32..1 << n {
                        if s & !t != 0 {
                            continue;
                        }
                        for v in 0..n {
                            if t >> v & 1 == 1 {
                                continue;
                            }
                            let gain_s = value[(s | 1 << v) as usize] - value[s as usize];
                            let gain_t = value[(t | 1 << v) as usize] - value[t as usize];
                            checks += 1;
                            if gain_s < -1e-9 || gain_s < gain_t - 1e-9 {
                                violations += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    verdict(
        violations == 0 && oracle_mismatch == 0,
        format!(
            "{} graphs, {checks} diminishing-return/monotone checks, {violations} violations, {oracle_mismatch} oracle mismatches",
            graphs.len()
        ),
    )
}

/// Exact spread of every singleton and pair, in one pass over the worlds.
fn oracle_small_sets(n: usize, edges: &[(usize, usize)], p: f64) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut single = vec![0.0; n];
    let mut pair = vec![vec![0.0; n]; n];
    let mut size = vec![0usize; n];
    for_each_world(n, edges, p, |w, roots| {
        size.iter_mut().for_each(|s| *s = 0);
        for &r in roots {
            size[r] += 1;
        }
        for a in 0..n {
            let sa = size[roots[a]] as f64;
            single[a] += w * sa;
            for b in a + 1..n {
                let sb = if roots[a] == roots[b] { 0.0 } else { size[roots[b]] as f64 };
                pair[a][b] += w * (sa + sb);
            }
        }
    });
    (single, pair)
}

fn greedy_guarantee() -> Verdict {
    let bound = 1.0 - (-1.0f64).exp();
    let graphs = connected_graphs_up_to(7).unwrap();
    let mut runs = 0;
    let mut violations = 0;
    let mut worst: f64 = f64::INFINITY;
    for g in &graphs {
        let n = g.node_count();
        let pool: Vec<usize> = (0..n).collect();
        for &p in &[0.3, 0.7] {
            let obj = ExactObjective::new(g, prob(p), AttendanceProb::CERTAIN, &[]).unwrap();
            let (single, pair) = oracle_small_sets(n, g.edges(), p);
            for k in 1..=2.min(n) {
                let greedy = lazy_greedy_with(&obj, &pool, k).value();
                let mut opt = f64::MIN;
                for_each_subset(&pool, k, |set| {
                    opt = opt.max(match *set {
                        [a] => single[a],
                        [a, b] => pair[a][b],
                        _ => unreachable!(),
                    });
                });
                runs += 1;
                worst = worst.min(greedy / opt);
                if greedy < bound * opt - 1e-9 {
                    violations += 1;
                }
            }
        }
    }
    verdict(
        violations == 0,
        format!("{runs} runs on {} graphs, {violations} violations, worst ratio {worst:.4}", graphs.len()),
    )
}

fn robust_guarantee() -> Verdict {
    let bound = (1.0 - (-1.0f64).exp()).powi(2);
    let grid: Vec<f64> = (0..10).map(|i| 0.05 + 0.1 * i as f64).collect();
    let mut rng = stream(404, 0);
    let instances = 24;
    let mut violations = 0;
    let mut worst_ratio = f64::INFINITY;
    for i in 0..instances {
        let g = random_connected_graph(&mut rng, 5..=8, 14);
        let n = g.node_count();
        let k = 1 + i % 2;
        let m = rng.gen_range(2..=5);
        let mut u: Vec<f64> = grid.choose_multiple(&mut rng, m).copied().collect();
        u.sort_by(f64::total_cmp);
        let q = if i % 3 == 0 { 1.0 } else { 0.5 };
        let committed: Vec<usize> = if i % 4 == 3 { vec![rng.gen_range(0..n)] } else { vec![] };

        let problem = RobustProblem::new(&g, k, UncertaintySet::new(u.clone()).unwrap(), attend(q), &committed);
        let scenarios = problem.exact_scenarios().unwrap();
        let normalizers: Vec<f64> = scenarios.iter().map(|s| s.opt).collect();
        let solved = solve_robust(&problem, &normalizers, &SolverParams::default(), &mut rng).unwrap();
        let chosen = sample_best_with(&scenarios, &solved.marginal, 20, &mut rng).unwrap();

        let pool = problem.pool.clone();
        let kk = k.min(pool.len());
        let opts: Vec<f64> = u
            .iter()
            .map(|&p| {
                let mut best = f64::MIN;
                for_each_subset(&pool, kk, |set| best = best.max(oracle_spread(n, g.edges(), set, &committed, p, q)));
                best
            })
            .collect();
        let worst_case = |set: &[usize]| {
            u.iter()
                .zip(&opts)
                .map(|(&p, &opt)| oracle_spread(n, g.edges(), set, &committed, p, q) / opt)
                .fold(f64::INFINITY, f64::min)
        };
        let mut best_pure = f64::MIN;
        for_each_subset(&pool, kk, |set| best_pure = best_pure.max(worst_case(set)));
        let achieved = worst_case(&chosen.selected);
        worst_ratio = worst_ratio.min(achieved / best_pure);
        if achieved < bound * best_pure - 1e-9 || (achieved - chosen.worst_case).abs() > 1e-9 {
            violations += 1;
        }
    }
    verdict(
        violations == 0,
        format!("{instances} instances, {violations} violations, worst achieved/best-pure {worst_ratio:.4} (bound {bound:.4})"),
    )
}

fn swap_rounding() -> Verdict {
    let mut rng = stream(505, 0);
    let draws = 10_000;
    let mut coords = 0;
    let mut outside = 0;
    let mut oversize = 0;
    for _ in 0..20 {
        let d = rng.gen_range(2..=12);
        let k = rng.gen_range(1..=d.min(4));
        let y: Vec<f64> = (0..d).map(|_| rng.gen_range(-0.2..1.4)).collect();
        let x = MarginalVector::new((0..d).collect(), project_capped_simplex(&y, k), k).unwrap();
        let mut counts = vec![0usize; d];
        for _ in 0..draws {
            let set = swap_round(&x, &mut rng);
            if set.len() > k {
                oversize += 1;
            }
            for v in set {
                counts[v] += 1;
            }
        }
        for (i, &xi) in x.values().iter().enumerate() {
            coords += 1;
            let mean = draws as f64 * xi;
            let sigma = (draws as f64 * xi * (1.0 - xi)).sqrt();
            if (counts[i] as f64 - mean).abs() > 3.0 * sigma + 1e-6 {
                outside += 1;
            }
        }
    }
    verdict(
        outside == 0 && oversize == 0,
        format!("20 vectors, {coords} coordinates, {outside} outside 3σ, {oversize} oversize draws"),
    )
}

fn gradient_check() -> Verdict {
    let mut rng = stream(606, 0);
    let mut coords = 0;
    let mut outside = 0;
    let mut max_z: f64 = 0.0;
    for point in 0..10 {
        let g = loop {
            let g = random_graph(&mut rng, 3..=5, 4, 0.6);
            if g.edge_count() > 0 {
                break g;
            }
        };
        let n = g.node_count();
        let p = rng.gen_range(0.1..0.9);
        let q = if point % 2 == 0 { 1.0 } else { 0.5 };
        let values: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let x = MarginalVector::new((0..n).collect(), values.clone(), n).unwrap();
        let grad = grad_multilinear(&g, &x, prob(p), attend(q), &[], 20_000, &mut rng).unwrap();
        let h = 1e-4;
        for i in 0..n {
            let shifted = |delta: f64| {
                let presence: Vec<f64> = (0..n)
                    .map(|v| q * if v == i { values[v] + delta } else { values[v] })
                    .collect();
                oracle_multilinear(n, g.edges(), &presence, p)
            };
            let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
            let combined = (grad.stderr[i].powi(2) + 1e-12).sqrt();
            let z = (grad.mean[i] - fd).abs() / combined;
            max_z = max_z.max(z);
            coords += 1;
            if z > 3.0 {
                outside += 1;
            }
        }
    }
    verdict(
        outside == 0,
        format!("10 points, {coords} coordinates, {outside} outside 3 stderr, max |z| {max_z:.2}"),
    )
}

fn friendship_paradox() -> Verdict {
    let mut wins = 0;
    for trial in 0..30u64 {
        let g = barabasi_albert(1000, 2, trial).unwrap();
        let out = run_sampling(&g, 200, &mut stream(trial, ids::SAMPLING));
        let mean = |phase| {
            let nodes = out.phase_nodes(phase);
            nodes.iter().map(|&v| g.degree(v) as f64).sum::<f64>() / nodes.len() as f64
        };
        if mean(Phase::Neighbor) > mean(Phase::Random) {
            wins += 1;
        }
    }
    verdict(wins >= 28, format!("phase-2 mean degree higher in {wins}/30 trials"))
}

fn run_experiment_binary(spec: &std::path::Path, out: &std::path::Path) -> (bool, Duration, String) {
    let start = Instant::now();
    let o = Command::new(env!("CARGO_BIN_EXE_change"))
        .args(["experiment", "--config"])
        .arg(spec)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs");
    (o.status.success(), start.elapsed(), String::from_utf8_lossy(&o.stderr).into_owned())
}

fn end_to_end() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(
        &spec,
        r#"{"graphs": [{"model": "ba", "n": 100, "attachments": 2}], "replications": 30, "seed": 1}"#,
    )
    .unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let (ok_a, time_a, err_a) = run_experiment_binary(&spec, &a);
    let (ok_b, time_b, err_b) = run_experiment_binary(&spec, &b);
    if !ok_a || !ok_b {
        return verdict(false, format!("experiment failed: {err_a}{err_b}"));
    }
    let identical = std::fs::read(&a).unwrap() == std::fs::read(&b).unwrap();
    let limit = Duration::from_secs(15 * 60);
    let table: ResultTable = read_csv(&a).unwrap();
    let change = table.mean_spreads(Strategy::Change);
    let random = table.mean_spreads(Strategy::Random);
    let behind: Vec<String> = table
        .grid
        .iter()
        .zip(change.iter().zip(&random))
        .filter(|(_, (c, r))| c < r)
        .map(|(p, (c, r))| format!("p={p}: {c:.2}<{r:.2}"))
        .collect();
    verdict(
        identical && time_a < limit && time_b < limit && behind.is_empty(),
        format!(
            "csv identical: {identical}; runs {:.0}s/{:.0}s; CHANGE below RANDOM at {} of {} grid points{}",
            time_a.as_secs_f64(),
            time_b.as_secs_f64(),
            behind.len(),
            table.grid.len(),
            if behind.is_empty() { String::new() } else { format!(" [{}]", behind.join(", ")) }
        ),
    )
}

mod service {
    use super::*;
    use axum::body::Body;
    use axum::http::{Request, StatusCode};
    use axum::Router;
    use change_service::{router, AppState, Settings};
    use http_body_util::BodyExt;
    use serde_json::{json, Value};
    use tower::ServiceExt;

    async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value, Vec<u8>) {
        let req = Request::builder().method(method).uri(uri);
        let req = match body {
            Some(b) => req.header("content-type", "application/json").body(Body::from(b.to_string())),
            None => req.body(Body::empty()),
        }
        .unwrap();
        let resp = app.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        let bytes = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
        (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null), bytes)
    }

    /// One random call sequence; returns the number of order violations
    /// that were not rejected, plus the session id.
    async fn sequence(app: &Router, rng: &mut StreamRng, strategy: &str) -> (usize, String) {
        let roster: Vec<String> = (0..rng.gen_range(3..8)).map(|i| format!("r{i}")).collect();
        let stages = rng.gen_range(1..=2);
        let config = json!({
            "stages": stages,
            "capacities": vec![1; stages],
            "query_budget": rng.gen_range(0..6),
            "strategy": strategy,
            "seed": rng.gen::<u32>(),
            "budgets": {"solver": {"iters": 10, "samples_per_iter": 10}, "eval_samples": 50, "num_candidate_sets": 3}
        });
        let (_, created, _) = call(app, "POST", "/sessions", Some(json!({"roster": roster, "config": config}))).await;
        let id = created["id"].as_str().unwrap().to_string();
        let base = format!("/sessions/{id}");
        let mut unexpected = 0;
        for _ in 0..rng.gen_range(5..50) {
            let (_, state, _) = call(app, "GET", &base, None).await;
            let status = state["status"].as_str().unwrap().to_string();
            let pending = state["pending_query"]["node"].as_str().map(str::to_string);
            let op = if rng.gen_bool(0.4) {
                match status.as_str() {
                    "collecting" if pending.is_none() => 0,
                    "collecting" => 1,
                    "planning" => 2,
                    _ => 3,
                }
            } else {
                rng.gen_range(0..4)
            };
            let (code, allowed) = match op {
                0 => (call(app, "GET", &format!("{base}/next-query"), None).await.0, status == "collecting"),
                1 => {
                    let respondent = pending.clone().unwrap_or_else(|| roster[0].clone());
                    let contacts: Vec<&String> = roster.iter().filter(|t| **t != respondent && rng.gen_bool(0.4)).collect();
                    let body = json!({"respondent": respondent, "contacts": contacts});
                    let code = call(app, "POST", &format!("{base}/query-result"), Some(body)).await.0;
                    (code, status == "collecting" && pending.is_some())
                }
                2 => (
                    call(app, "POST", &format!("{base}/plan-stage"), None).await.0,
                    status == "planning" || status == "awaiting_attendance",
                ),
                _ => {
                    let attended: Vec<Value> = state["pending_invitations"]
                        .as_array()
                        .cloned()
                        .unwrap_or_default()
                        .into_iter()
                        .filter(|_| rng.gen_bool(0.5))
                        .collect();
                    let code = call(app, "POST", &format!("{base}/attendance"), Some(json!({"attended": attended}))).await.0;
                    (code, status == "awaiting_attendance")
                }
            };
            let expected = if allowed { StatusCode::OK } else { StatusCode::CONFLICT };
            if code != expected {
                unexpected += 1;
            }
            if !code.is_success() {
                let (_, after, _) = call(app, "GET", &base, None).await;
                if after != state {
                    unexpected += 1;
                }
            }
        }
        (unexpected, id)
    }

    pub fn event_sourcing() -> Verdict {
        let runtime = tokio::runtime::Runtime::new().unwrap();
        runtime.block_on(async {
            let dir = tempfile::tempdir().unwrap();
            let settings = Settings {
                data_dir: dir.path().to_path_buf(),
                ..Settings::default()
            };
            let live = router(AppState::open(settings.clone()).unwrap());
            let mut rng = stream(909, 0);
            let mut unexpected = 0;
            let mut sessions = Vec::new();
            for i in 0..100 {
                let strategy = ["CHANGE", "DC", "RANDOM"][i % 3];
                let (bad, id) = sequence(&live, &mut rng, strategy).await;
                unexpected += bad;
                let (_, state, bytes) = call(&live, "GET", &format!("/sessions/{id}"), None).await;
                sessions.push((id, state["status"].as_str().unwrap().to_string(), bytes));
            }
            let restarted = router(AppState::open(settings).unwrap());
            let mut differing = 0;
            for (id, _, before) in &sessions {
                let (_, _, after) = call(&restarted, "GET", &format!("/sessions/{id}"), None).await;
                if &after != before {
                    differing += 1;
                }
            }
            let complete = sessions.iter().filter(|(_, s, _)| s == "complete").count();
            verdict(
                unexpected == 0 && differing == 0,
                format!(
                    "100 sequences ({complete} reached completion), {differing} replays differ, {unexpected} calls accepted or rejected against order"
                ),
            )
        })
    }
}

fn main() -> ExitCode {
    type Check = fn() -> Verdict;
    let criteria: [(&str, Check); 9] = [
        ("oracle agreement", oracle_agreement),
        ("submodularity and monotonicity", submodularity),
        ("greedy guarantee", greedy_guarantee),
        ("robust guarantee", robust_guarantee),
        ("swap rounding marginals", swap_rounding),
        ("gradient check", gradient_check),
        ("friendship paradox", friendship_paradox),
        ("end-to-end experiment", end_to_end),
        ("service event sourcing", service::event_sourcing),
    ];
    let limits = [60, 120, 300, 600, u64::MAX, u64::MAX, u64::MAX, u64::MAX, u64::MAX];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, ((name, check), limit)) in criteria.iter().zip(limits).enumerate() {
        let number = i + 1;
        if !filter.is_empty() && !filter.iter().any(|f| f == &number.to_string()) {
            continue;
        }
        let start = Instant::now();
        let mut v = match std::panic::catch_unwind(check) {
            Ok(v) => v,
            Err(e) => verdict(
                false,
                format!(
                    "panicked: {}",
                    e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default()
                ),
            ),
        };
        let secs = start.elapsed().as_secs_f64();
        if secs > limit as f64 {
            v.pass = false;
            v.detail.push_str(&format!("; exceeded {limit}s limit"));
        }
        if !v.pass {
            failed += 1;
        }
        println!(
            "criterion {number} [{}] {name}: {} ({secs:.1}s)",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}

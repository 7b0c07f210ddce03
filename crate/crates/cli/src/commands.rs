use std::path::{Path, PathBuf};

use annealing_core::convergence_lab::{self, Counterexample, Metric, SearchParams};
use annealing_core::gadget_factory::{self, build_gadget, build_key, GadgetSpec};
use annealing_core::graph_learner::{
    learn_msg, query_bound, GraphOracle, LearnOutcome, LearnerConfig, NoisyOracle, PlantedOracle,
    SampledOracle,
};
use annealing_core::inequalities::verify_all;
use annealing_core::report::fmt_num;
use annealing_core::sa_engine::{estimate_score, exact_score, hoeffding_trials, ScoreRow, SimPlan};
use annealing_core::schedule_optimizer::{
    self as opt, BruteCaps, InstanceFamily, OptimizerResult,
};
use annealing_core::search_graph::{load_graph, load_schedule, save_graph, save_runs};
use annealing_core::stationary_model::{load_msg, save_msg};
use annealing_core::temperature_grid::{self as grid, TemperatureGrid, DEFAULT_GRID_CAP};
use annealing_core::{CoolingSchedule, ScoreMode, SearchGraph, Temperature};
use clap::{Args, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::{usage, Cli, Output};

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run individual annealing walks and report where they end.
    Simulate(SimulateArgs),
    /// Success probability of a schedule, exact and/or by Monte Carlo.
    Score(ScoreArgs),
    /// Build a temperature grid.
    Grid(GridArgs),
    /// Check the numeric inequalities on lattices and random samples.
    Props(PropsArgs),
    /// Write a lower-bound gadget graph and its key schedule.
    GenGadget(GadgetArgs),
    /// Exact success of key, far and all-infinite schedules on gadgets.
    VerifyBounds(BoundsArgs),
    /// Learn a stationary graph model from score queries.
    LearnMsg(LearnArgs),
    /// Optimize one schedule for a family of stationary graph models.
    Optimize(OptimizeArgs),
    /// Compare convergence toward a cold stationary distribution.
    Converge(ConvergeArgs),
    /// Search random graphs for a convergence-order violation.
    FindCounterexample(SearchArgs),
    /// Collect fields of earlier JSON/CSV outputs into one table.
    Report(ReportArgs),
}

fn read(path: &Path) -> anyhow::Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn graph_from(path: &Path) -> anyhow::Result<SearchGraph> {
    load_graph(&read(path)?).map_err(|e| anyhow::Error::new(e).context(format!("in {}", path.display())))
}

fn schedule_from(path: &Path) -> anyhow::Result<CoolingSchedule> {
    load_schedule(&read(path)?).map_err(|e| anyhow::Error::new(e).context(format!("in {}", path.display())))
}

fn temps_of(values: &[f64]) -> anyhow::Result<Vec<Temperature>> {
    Ok(values.iter().map(|&t| Temperature::new(t)).collect::<Result<_, _>>()?)
}

fn p_triple(p: &[f64]) -> anyhow::Result<(f64, f64, f64)> {
    match p {
        [a, b, c] => Ok((*a, *b, *c)),
        _ => Err(usage(format!("--p takes three comma-separated values, got {}", p.len()))),
    }
}

pub fn dispatch(cli: &Cli) -> anyhow::Result<Output> {
    let seed = cli.seed;
    match &cli.command {
        Command::Simulate(a) => simulate(a, seed),
        Command::Score(a) => score(a, seed),
        Command::Grid(a) => make_grid(a),
        Command::Props(a) => props(a, seed),
        Command::GenGadget(a) => gen_gadget(a),
        Command::VerifyBounds(a) => verify_bounds(a),
        Command::LearnMsg(a) => learn(a, seed),
        Command::Optimize(a) => optimize(a, seed),
        Command::Converge(a) => converge(a),
        Command::FindCounterexample(a) => find_counterexample(a, seed),
        Command::Report(a) => report(a),
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    schedule: PathBuf,
    #[arg(long, default_value = "end_state")]
    mode: ScoreMode,
    #[arg(long, default_value_t = 1)]
    runs: u64,
    /// Include every visited node.
    #[arg(long)]
    record: bool,
}

fn simulate(a: &SimulateArgs, seed: u64) -> anyhow::Result<Output> {
    let g = graph_from(&a.graph)?;
    let s = schedule_from(&a.schedule)?;
    let plan = SimPlan::new(&g, &s, a.mode);
    let runs: Vec<Value> = (0..a.runs)
        .map(|i| {
            let run_seed = annealing_core::rng::stream_seed(seed, i);
            let o = plan.run(run_seed, a.record);
            let mut v = json!({"run": i, "seed": run_seed, "end": g.id(o.end_node), "success": o.success});
            if let Some(t) = o.trajectory {
                v["trajectory"] = t.iter().map(|&n| g.id(n)).collect();
            }
            v
        })
        .collect();
    let rows: Vec<String> = runs
        .iter()
        .map(|r| format!("{},{},{}", r["run"], r["end"].as_str().unwrap_or_default(), r["success"]))
        .collect();
    Ok(Output::report(&json!({"seed": seed, "mode": a.mode, "runs": runs}))?.with_csv("run,end,success", rows))
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    schedule: PathBuf,
    #[arg(long, default_value = "end_state")]
    mode: ScoreMode,
    /// Exact propagation.
    #[arg(long)]
    exact: bool,
    /// Monte Carlo trials; defaults to the Hoeffding count for --epsilon when --exact is absent.
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.99)]
    confidence: f64,
    #[arg(long)]
    schedule_id: Option<String>,
}

fn score(a: &ScoreArgs, seed: u64) -> anyhow::Result<Output> {
    let g = graph_from(&a.graph)?;
    let s = schedule_from(&a.schedule)?;
    let exact = a.exact.then(|| exact_score(&g, &s, a.mode));
    let trials = match (a.trials, a.exact) {
        (Some(t), _) => Some(t),
        (None, false) => Some(hoeffding_trials(a.epsilon, a.confidence)?),
        (None, true) => None,
    };
    let est = trials.map(|t| estimate_score(&g, &s, a.mode, t, a.confidence, seed)).transpose()?;
    let row = ScoreRow {
        schedule_id: a.schedule_id.clone().unwrap_or_else(|| {
            a.schedule.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
        }),
        mode: a.mode,
        trials: est.as_ref().map_or(0, |e| e.trials),
        mean: est.as_ref().map_or(f64::NAN, |e| e.mean),
        half_width: est.as_ref().map_or(0.0, |e| e.half_width),
        exact,
    };
    let line = fmt_num(exact.unwrap_or(row.mean));
    let mut doc = json!({
        "schedule_id": row.schedule_id,
        "mode": row.mode,
        "seed": seed,
        "length": s.len(),
        "exact": exact,
    });
    if let Some(e) = &est {
        doc["trials"] = json!(e.trials);
        doc["mean"] = json!(e.mean);
        doc["half_width"] = json!(e.half_width);
        doc["confidence"] = json!(e.confidence);
    }
    Ok(Output::report(&doc)?.with_csv(ScoreRow::CSV_HEADER, [row.to_csv()]).with_line(line))
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GridKindArg {
    Fine,
    Geometric,
    Coarse,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long, value_enum)]
    kind: GridKindArg,
    #[arg(long)]
    e_max: Option<u64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Schedule length (coarse grid).
    #[arg(long)]
    m: Option<u64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    t_min: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_GRID_CAP)]
    cap: usize,
}

fn need<T: Copy>(v: Option<T>, flag: &str) -> anyhow::Result<T> {
    v.ok_or_else(|| usage(format!("{flag} is required")))
}

fn make_grid(a: &GridArgs) -> anyhow::Result<Output> {
    let g: TemperatureGrid = match a.kind {
        GridKindArg::Fine => grid::fine_grid(need(a.e_max, "--e-max")?, need(a.delta, "--delta")?, a.cap)?,
        GridKindArg::Geometric => {
            grid::geometric_grid(need(a.e_max, "--e-max")?, need(a.delta, "--delta")?, a.cap)?
        }
        GridKindArg::Coarse => {
            // Default range: acceptance at drops 1..=e_max spans [0.01, 0.99].
            let d0: f64 = 0.01;
            let t_min = match a.t_min {
                Some(t) => t,
                None => 1.0 / (1.0 / d0).ln(),
            };
            let t_max = match (a.t_max, a.e_max) {
                (Some(t), _) => t,
                (None, Some(e)) => e as f64 / (1.0 / (1.0 - d0)).ln(),
                (None, None) => return Err(usage("coarse grid needs --t-max or --e-max")),
            };
            grid::coarse_grid(need(a.m, "--m")?, need(a.epsilon, "--epsilon")?, t_min, t_max, a.cap)?
        }
    };
    let rows: Vec<String> = g.temps().iter().enumerate().map(|(i, t)| format!("{i},{t}")).collect();
    Ok(Output::data(&g)?.with_csv("index,temperature", rows))
}

#[derive(Debug, Args)]
pub struct PropsArgs {
    /// Lattice spacing.
    #[arg(long, default_value_t = 0.01)]
    step: f64,
    /// Random samples per inequality.
    #[arg(long, default_value_t = 100_000)]
    fuzz: usize,
}

fn props(a: &PropsArgs, seed: u64) -> anyhow::Result<Output> {
    if !(a.step > 0.0 && a.step <= 0.5) {
        return Err(usage("--step must be in (0, 0.5]"));
    }
    let reports = verify_all(a.step, a.fuzz, seed);
    let rows: Vec<String> = reports
        .iter()
        .map(|r| format!("{},{},{},{},{}", r.name, r.checked, r.passed, r.checked - r.passed, fmt_num(r.worst_slack)))
        .collect();
    let doc = json!({"seed": seed, "step": a.step, "fuzz": a.fuzz, "inequalities": reports});
    Ok(Output::report(&doc)?.with_csv("name,checked,passed,failed,worst_slack", rows))
}

#[derive(Debug, Args)]
pub struct GadgetArgs {
    /// Energy drop x between neighbouring path nodes; tau = x / ln 2.
    #[arg(long)]
    tau_x: u64,
    #[arg(long)]
    m_prime: u64,
    #[arg(long, default_value_t = 100)]
    c: u64,
    #[arg(long)]
    graph_out: Option<PathBuf>,
    #[arg(long)]
    key_out: Option<PathBuf>,
}

fn write_file(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    std::fs::write(path, bytes).map_err(|e| anyhow::anyhow!("cannot write {}: {e}", path.display()))
}

fn gen_gadget(a: &GadgetArgs) -> anyhow::Result<Output> {
    let spec = GadgetSpec::new(a.tau_x, a.m_prime, a.c);
    let g = build_gadget(&spec)?;
    let key = build_key(&spec).to_runs();
    if let Some(p) = &a.graph_out {
        write_file(p, &save_graph(&g))?;
    }
    if let Some(p) = &a.key_out {
        write_file(p, &save_runs(&key))?;
    }
    let graph_json: Value = serde_json::from_slice(&save_graph(&g))?;
    let key_json: Value = serde_json::from_slice(&save_runs(&key))?;
    let doc = json!({
        "spec": spec,
        "tau": spec.tau(),
        "width": spec.width(),
        "key_len": spec.key_len(),
        "nodes": g.node_count(),
        "graph": graph_json,
        "key": key_json,
    });
    Output::data(&doc)
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long, value_delimiter = ',', default_value = "400,2500")]
    m_prime: Vec<u64>,
    #[arg(long, default_value_t = 100)]
    c: u64,
    #[arg(long, default_value_t = 1)]
    x: u64,
}

#[derive(Serialize)]
struct BoundRow {
    gadget: String,
    schedule: &'static str,
    length: u64,
    exact_success: f64,
}

fn verify_bounds(a: &BoundsArgs) -> anyhow::Result<Output> {
    let mut rows = Vec::new();
    for &mp in &a.m_prime {
        let spec = GadgetSpec::new(a.x, mp, a.c);
        let g = build_gadget(&spec)?;
        let label = format!("x{}-m{}-c{}", a.x, mp, a.c);
        let m = spec.key_len();
        let schedules = [
            ("key", build_key(&spec)),
            ("far", gadget_factory::far_schedule(&spec, m)?),
            ("all_inf", CoolingSchedule::constant(Temperature::INF, m as usize)),
        ];
        for (name, s) in schedules {
            rows.push(BoundRow {
                gadget: label.clone(),
                schedule: name,
                length: s.len() as u64,
                exact_success: exact_score(&g, &s, ScoreMode::Absorbing),
            });
        }
    }
    let csv: Vec<String> = rows
        .iter()
        .map(|r| format!("{},{},{},{}", r.gadget, r.schedule, r.length, fmt_num(r.exact_success)))
        .collect();
    Ok(Output::report(&json!({"rows": rows}))?.with_csv("gadget,schedule,length,exact_success", csv))
}

#[derive(Debug, Args)]
pub struct LearnArgs {
    /// Planted model to query.
    #[arg(long, conflicts_with = "graph")]
    msg: Option<PathBuf>,
    /// Search graph scored by annealing at the levels given by --temps.
    #[arg(long, requires = "temps")]
    graph: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    temps: Vec<f64>,
    /// Largest number of copies of one temperature in a probe.
    #[arg(long)]
    m: u64,
    #[arg(long, default_value_t = 0.05)]
    gap: f64,
    /// Uniform noise amplitude added to planted scores.
    #[arg(long)]
    noise: Option<f64>,
    /// Monte Carlo trials per query; exact scoring when absent.
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long, default_value = "end_state")]
    mode: ScoreMode,
    #[arg(long)]
    max_queries: Option<u64>,
    /// Also write the learned model on its own.
    #[arg(long)]
    msg_out: Option<PathBuf>,
}

fn learn(a: &LearnArgs, seed: u64) -> anyhow::Result<Output> {
    let outcome: LearnOutcome;
    let k;
    if let Some(path) = &a.msg {
        let planted = load_msg(&read(path)?)?;
        k = planted.k();
        let mut config = LearnerConfig {
            temps: planted.temps().to_vec(),
            m: a.m,
            gap: a.gap,
            trials_per_query: a.trials.unwrap_or(1),
            max_queries: a.max_queries,
        };
        outcome = match (a.noise, a.trials) {
            (Some(_), Some(_)) => return Err(usage("--noise and --trials are alternative oracles")),
            (Some(noise), None) => {
                config.trials_per_query = LearnerConfig::recommended_trials(a.gap);
                learn_msg(&mut NoisyOracle::new(&planted, noise, seed), &config)?
            }
            (None, Some(t)) => learn_msg(&mut SampledOracle::new(&planted, t, seed), &config)?,
            (None, None) => learn_msg(&mut PlantedOracle { msg: &planted }, &config)?,
        };
    } else if let Some(path) = &a.graph {
        let g = graph_from(path)?;
        let temps = temps_of(&a.temps)?;
        k = temps.len();
        let config = LearnerConfig {
            temps: temps.clone(),
            m: a.m,
            gap: a.gap,
            trials_per_query: a.trials.unwrap_or(1),
            max_queries: a.max_queries,
        };
        outcome = learn_msg(&mut GraphOracle::new(&g, temps, a.mode, a.trials, seed), &config)?;
    } else {
        return Err(usage("learn-msg needs --msg or --graph"));
    }
    if let Some(p) = &a.msg_out {
        write_file(p, &save_msg(&outcome.msg))?;
    }
    let bound = query_bound(k, a.m);
    let csv = format!("{},{},{},{}", k, outcome.queries, bound, outcome.msg.edges().len());
    let doc = json!({
        "seed": seed,
        "msg": outcome.msg,
        "attained": outcome.attained,
        "queries": outcome.queries,
        "query_bound": bound,
    });
    Ok(Output::report(&doc)?.with_csv("levels,queries,query_bound,edges", [csv]))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Identical,
    Separate,
    LpRound,
    Greedy,
    Brute,
    All,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(long)]
    family: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "separate")]
    method: Vec<Method>,
    /// Rounding factor; defaults to 100 (ln K + ln n).
    #[arg(long)]
    alpha: Option<f64>,
    /// Independent roundings, seeded from --seed.
    #[arg(long, default_value_t = 1)]
    rounds: u64,
    /// Largest product state space for the separate-paths program.
    #[arg(long, default_value_t = 1 << 22)]
    state_cap: u64,
}

fn optimize(a: &OptimizeArgs, seed: u64) -> anyhow::Result<Output> {
    let family: InstanceFamily = opt::load_family(&read(&a.family)?)?;
    let mut methods = a.method.clone();
    if methods.contains(&Method::All) {
        methods = vec![Method::Identical, Method::Separate, Method::Greedy, Method::LpRound, Method::Brute];
    }
    let mut results: Vec<OptimizerResult> = Vec::new();
    let mut extras: Vec<Value> = Vec::new();
    for m in methods {
        match m {
            Method::Identical => results.push(opt::identical_paths(&family)),
            Method::Separate => results.push(opt::separate_paths_exact(&family, a.state_cap)?),
            Method::Greedy => results.push(opt::greedy_cover(&family)?),
            Method::Brute => results.push(opt::brute_force_optimal(&family, BruteCaps::default())?),
            Method::LpRound => {
                let cover = opt::covering_lp_solve(&family)?;
                let alpha = a.alpha.unwrap_or_else(|| opt::default_alpha(family.k(), family.n()));
                for i in 0..a.rounds {
                    let r = opt::lp_round(&family, &cover, alpha, annealing_core::rng::stream_seed(seed, i))?;
                    extras.push(json!({
                        "round": i,
                        "alpha": r.alpha,
                        "lp_objective": cover.objective,
                        "within_budget": cover.within_budget,
                        "alpha_m": r.alpha_m,
                        "acceptable": r.acceptable,
                        "all_acceptable": r.all_acceptable,
                    }));
                    results.push(r.result);
                }
            }
            Method::All => unreachable!("expanded above"),
        }
    }
    let csv: Vec<String> = results.iter().map(OptimizerResult::to_csv).collect();
    let doc = if results.len() == 1 && extras.is_empty() {
        serde_json::to_value(&results[0])?
    } else {
        json!({"seed": seed, "results": results, "rounding": extras})
    };
    Ok(Output::report(&doc)?.with_csv(OptimizerResult::CSV_HEADER, csv))
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    #[arg(long)]
    graph: PathBuf,
    /// p_low,p_mid,p_high.
    #[arg(long, value_delimiter = ',', default_value = "0.15,0.55,0.95")]
    p: Vec<f64>,
    #[arg(long, default_value = "l1")]
    metric: Metric,
    #[arg(long, default_value_t = convergence_lab::DEFAULT_TARGET_TOL)]
    tol: f64,
    #[arg(long, default_value_t = convergence_lab::MAX_ITERATIONS)]
    cap: u64,
}

fn trace_rows(high: &[f64], mid: &[f64]) -> Vec<String> {
    let cell = |v: &[f64], i: usize| v.get(i).map(|&x| fmt_num(x)).unwrap_or_default();
    (0..high.len().max(mid.len())).map(|i| format!("{i},{},{}", cell(high, i), cell(mid, i))).collect()
}

fn converge(a: &ConvergeArgs) -> anyhow::Result<Output> {
    let g = graph_from(&a.graph)?;
    let report = convergence_lab::monotonicity_probe(&g, p_triple(&a.p)?, a.metric, a.tol, a.cap)?;
    let rows = trace_rows(&report.trace_high, &report.trace_mid);
    let mut doc = serde_json::to_value(&report)?;
    doc["graph"] = serde_json::from_slice(&save_graph(&g))?;
    Ok(Output::report(&doc)?.with_csv("step,distance_high,distance_mid", rows))
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long, default_value_t = 6)]
    nodes: usize,
    #[arg(long, default_value = "l1")]
    metric: Metric,
    #[arg(long, value_delimiter = ',', default_value = "0.15,0.55,0.95")]
    p: Vec<f64>,
    #[arg(long, default_value_t = 100_000)]
    budget: u64,
    #[arg(long, default_value_t = 3)]
    max_energy: u64,
    #[arg(long, default_value_t = convergence_lab::DEFAULT_TARGET_TOL)]
    tol: f64,
    /// Re-run the probe stored in an earlier output instead of searching.
    #[arg(long)]
    replay: Option<PathBuf>,
}

fn find_counterexample(a: &SearchArgs, seed: u64) -> anyhow::Result<Output> {
    let mut params = SearchParams::new(a.nodes, a.metric, p_triple(&a.p)?, seed, a.budget);
    params.max_energy = a.max_energy;
    params.tol = a.tol;
    if params.max_energy == 0 {
        return Err(usage("--max-energy must be at least 1"));
    }
    if let Some(path) = &a.replay {
        let v: Value = serde_json::from_slice(&read(path)?)?;
        let tol = v.get("tol").and_then(Value::as_f64).unwrap_or(a.tol);
        let stored: Counterexample = serde_json::from_value(v)?;
        let report = convergence_lab::replay(&stored, tol, params.step_cap)?;
        let identical = report == stored.report;
        let rows = trace_rows(&report.trace_high, &report.trace_mid);
        let doc = json!({"replayed": path.display().to_string(), "identical": identical, "report": report});
        return Ok(Output::report(&doc)?.with_csv("step,distance_high,distance_mid", rows));
    }
    match convergence_lab::search_counterexample(&params)? {
        Some(c) => {
            let rows = trace_rows(&c.report.trace_high, &c.report.trace_mid);
            let mut doc = serde_json::to_value(&c)?;
            doc["found"] = json!(true);
            doc["seed"] = json!(seed);
            doc["tol"] = json!(params.tol);
            Ok(Output::data(&doc)?.with_csv("step,distance_high,distance_mid", rows))
        }
        None => {
            let doc = json!({"found": false, "seed": seed, "budget": a.budget, "nodes": a.nodes});
            Ok(Output::report(&doc)?.with_csv("step,distance_high,distance_mid", Vec::new()))
        }
    }
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Earlier JSON or CSV outputs.
    #[arg(long, num_args = 1.., value_delimiter = ',', required = true)]
    inputs: Vec<PathBuf>,
}

/// Scalar leaves of `v` as `(dotted path, value)`; numeric arrays longer
/// than 16 are summarized by their length.
fn leaves(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(o) => o.iter().for_each(|(k, v)| leaves(&key(k), v, out)),
        Value::Array(a) if a.iter().all(|x| !x.is_object() && !x.is_array()) => {
            if a.len() > 16 {
                out.push((key("len"), a.len().to_string()));
            } else {
                let parts: Vec<String> = a.iter().map(scalar).collect();
                out.push((prefix.to_string(), parts.join(" ")));
            }
        }
        Value::Array(a) => a.iter().enumerate().for_each(|(i, v)| leaves(&key(&i.to_string()), v, out)),
        other => out.push((prefix.to_string(), scalar(other))),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.as_f64().filter(|_| n.is_f64()).map(fmt_num).unwrap_or_else(|| n.to_string()),
        other => other.to_string(),
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn report(a: &ReportArgs) -> anyhow::Result<Output> {
    let mut rows: Vec<(String, String, String)> = Vec::new();
    for path in &a.inputs {
        let bytes = read(path)?;
        let source = path.display().to_string();
        let text = String::from_utf8_lossy(&bytes);
        if let Ok(v) = serde_json::from_slice::<Value>(&bytes) {
            let mut out = Vec::new();
            leaves("", &v, &mut out);
            rows.extend(out.into_iter().map(|(f, v)| (source.clone(), f, v)));
        } else {
            let mut lines = text.lines();
            let header: Vec<&str> = lines.next().unwrap_or_default().split(',').collect();
            for (i, line) in lines.enumerate() {
                for (col, val) in header.iter().zip(line.split(',')) {
                    rows.push((source.clone(), format!("{i}.{col}"), val.to_string()));
                }
            }
        }
    }
    let csv: Vec<String> = rows
        .iter()
        .map(|(s, f, v)| format!("{},{},{}", csv_escape(s), csv_escape(f), csv_escape(v)))
        .collect();
    let doc: Vec<Value> = rows.iter().map(|(s, f, v)| json!({"source": s, "field": f, "value": v})).collect();
    Ok(Output::report(&json!({"rows": doc}))?.with_csv("source,field,value", csv))
}

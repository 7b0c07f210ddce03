//! Running simulated annealing on an explicit [`SearchGraph`].
//!
//! [`exact_score`] propagates the full node distribution, [`simulate`] runs a
//! single seeded walk and [`estimate_score`] averages many walks in parallel.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::search_graph::{accept_probability, CoolingSchedule, SearchGraph, Temperature};
use crate::temperature_grid::TemperatureGrid;

/// How a run is scored.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreMode {
    /// Success iff the walk sits on a solution after the last step.
    #[default]
    EndState,
    /// Success iff the walk visits a solution at any step.
    Absorbing,
}

impl ScoreMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ScoreMode::EndState => "end_state",
            ScoreMode::Absorbing => "absorbing",
        }
    }
}

impl std::str::FromStr for ScoreMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "end_state" | "end-state" => Ok(ScoreMode::EndState),
            "absorbing" => Ok(ScoreMode::Absorbing),
            other => Err(Error::InvalidArgument(format!("unknown score mode {other:?}"))),
        }
    }
}

/// Probability mass over the nodes of a graph, indexed by node.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeDistribution {
    probs: Vec<f64>,
}

impl NodeDistribution {
    pub fn initial(graph: &SearchGraph) -> Self {
        NodeDistribution { probs: graph.initial_distribution() }
    }

    pub fn point(graph: &SearchGraph, node: usize) -> Self {
        let mut probs = vec![0.0; graph.node_count()];
        probs[node] = 1.0;
        NodeDistribution { probs }
    }

    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        if probs.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::InvalidArgument("negative probability".into()));
        }
        let s: f64 = probs.iter().sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("distribution sums to {s}")));
        }
        Ok(NodeDistribution { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn mass_on(&self, nodes: &[usize]) -> f64 {
        nodes.iter().map(|&v| self.probs[v]).sum()
    }
}

/// Per-edge acceptance probabilities of `graph` at one temperature.
struct Kernel {
    acc: Vec<Vec<f64>>,
}

impl Kernel {
    fn new(graph: &SearchGraph, t: Temperature) -> Self {
        let acc = (0..graph.node_count())
            .map(|u| {
                graph
                    .out_edges(u)
                    .iter()
                    .map(|&v| accept_probability(graph.downhill(u, v), t))
                    .collect()
            })
            .collect();
        Kernel { acc }
    }

    fn apply(&self, graph: &SearchGraph, probs: &[f64], next: &mut [f64]) {
        next.iter_mut().for_each(|x| *x = 0.0);
        for (u, &p) in probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let out = graph.out_edges(u);
            if out.is_empty() {
                next[u] += p;
                continue;
            }
            let w = p / out.len() as f64;
            let mut stay = 0.0;
            for (&v, &a) in out.iter().zip(&self.acc[u]) {
                next[v] += w * a;
                stay += w * (1.0 - a);
            }
            next[u] += stay;
        }
    }
}

/// One annealing step at temperature `t` applied to a whole distribution.
pub fn step(graph: &SearchGraph, dist: &NodeDistribution, t: Temperature) -> NodeDistribution {
    let mut next = vec![0.0; graph.node_count()];
    Kernel::new(graph, t).apply(graph, &dist.probs, &mut next);
    NodeDistribution { probs: next }
}

/// Distribution after running the whole schedule from `start`.
pub fn propagate(
    graph: &SearchGraph,
    start: &NodeDistribution,
    schedule: &CoolingSchedule,
) -> NodeDistribution {
    let mut cur = start.probs.clone();
    let mut next = vec![0.0; cur.len()];
    for &(t, n) in schedule.to_runs().runs() {
        let k = Kernel::new(graph, t);
        for _ in 0..n {
            k.apply(graph, &cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
    }
    NodeDistribution { probs: cur }
}

/// Exact success probability of `schedule` on `graph`.
pub fn exact_score(graph: &SearchGraph, schedule: &CoolingSchedule, mode: ScoreMode) -> f64 {
    let absorbing;
    let g = match mode {
        ScoreMode::EndState => graph,
        ScoreMode::Absorbing => {
            absorbing = graph.with_absorbing_solutions();
            &absorbing
        }
    };
    let end = propagate(g, &NodeDistribution::initial(g), schedule);
    end.mass_on(g.solutions()).clamp(0.0, 1.0)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimOutcome {
    pub end_node: usize,
    pub success: bool,
    /// Visited nodes, starting with the initial one, when requested.
    pub trajectory: Option<Vec<usize>>,
}

/// Precomputed per-run kernels so repeated walks share the `exp` work.
pub struct SimPlan<'g> {
    graph: std::borrow::Cow<'g, SearchGraph>,
    runs: Vec<(Kernel, u64)>,
    cdf: Vec<f64>,
    mode: ScoreMode,
}

impl<'g> SimPlan<'g> {
    pub fn new(graph: &'g SearchGraph, schedule: &CoolingSchedule, mode: ScoreMode) -> Self {
        let graph = match mode {
            ScoreMode::EndState => std::borrow::Cow::Borrowed(graph),
            ScoreMode::Absorbing => std::borrow::Cow::Owned(graph.with_absorbing_solutions()),
        };
        let runs = schedule
            .to_runs()
            .runs()
            .iter()
            .map(|&(t, n)| (Kernel::new(&graph, t), n))
            .collect();
        let mut acc = 0.0;
        let cdf = graph
            .initial_distribution()
            .into_iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        SimPlan { graph, runs, cdf, mode }
    }

    pub fn run(&self, seed: u64, record: bool) -> SimOutcome {
        let g = &*self.graph;
        let mut r = rng::rng(seed);
        let x: f64 = r.random::<f64>() * self.cdf.last().copied().unwrap_or(1.0);
        let mut u = self.cdf.partition_point(|&c| c <= x).min(self.cdf.len() - 1);
        let mut traj = record.then(|| vec![u]);
        let mut hit = g.is_solution(u);
        'outer: for (k, n) in &self.runs {
            for _ in 0..*n {
                if self.mode == ScoreMode::Absorbing && hit {
                    break 'outer;
                }
                let out = g.out_edges(u);
                if !out.is_empty() {
                    let i = r.random_range(0..out.len());
                    let a = k.acc[u][i];
                    if a >= 1.0 || r.random::<f64>() < a {
                        u = out[i];
                    }
                }
                if let Some(t) = traj.as_mut() {
                    t.push(u);
                }
                hit |= g.is_solution(u);
            }
        }
        let success = match self.mode {
            ScoreMode::EndState => g.is_solution(u),
            ScoreMode::Absorbing => hit,
        };
        SimOutcome { end_node: u, success, trajectory: traj }
    }
}

/// A single seeded annealing run.
pub fn simulate(
    graph: &SearchGraph,
    schedule: &CoolingSchedule,
    mode: ScoreMode,
    seed: u64,
    record: bool,
) -> SimOutcome {
    SimPlan::new(graph, schedule, mode).run(seed, record)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScoreEstimate {
    pub mean: f64,
    pub trials: u64,
    pub half_width: f64,
    pub confidence: f64,
}

pub fn hoeffding_half_width(trials: u64, confidence: f64) -> f64 {
    ((2.0 / (1.0 - confidence)).ln() / (2.0 * trials as f64)).sqrt()
}

/// Smallest `n` with `2 exp(-2 n eps^2) <= 1 - confidence`.
pub fn hoeffding_trials(epsilon: f64, confidence: f64) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be in (0,1), got {epsilon}")));
    }
    check_confidence(confidence)?;
    let x = (2.0 / (1.0 - confidence)).ln() / (2.0 * epsilon * epsilon);
    // Guard against ceil bumping an exact integer that came out a hair high.
    let n = (x - 1e-9 * x.max(1.0)).ceil().max(1.0);
    Ok(n as u64)
}

fn check_confidence(confidence: f64) -> Result<()> {
    if confidence > 0.0 && confidence < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("confidence must be in (0,1), got {confidence}")))
    }
}

/// Monte Carlo estimate from `trials` independent walks. Trial `i` uses the
/// seed `rng::stream_seed(seed, i)` so the result does not depend on the
/// number of worker threads.
pub fn estimate_score(
    graph: &SearchGraph,
    schedule: &CoolingSchedule,
    mode: ScoreMode,
    trials: u64,
    confidence: f64,
    seed: u64,
) -> Result<ScoreEstimate> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    check_confidence(confidence)?;
    let plan = SimPlan::new(graph, schedule, mode);
    let wins = (0..trials)
        .into_par_iter()
        .filter(|&i| plan.run(rng::stream_seed(seed, i), false).success)
        .count();
    Ok(ScoreEstimate {
        mean: wins as f64 / trials as f64,
        trials,
        half_width: hoeffding_half_width(trials, confidence),
        confidence,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SnapGap {
    pub original: f64,
    pub snapped: f64,
    pub gap: f64,
}

/// Score change caused by rounding `schedule` down onto `grid`.
pub fn snap_gap_empirical(
    graph: &SearchGraph,
    schedule: &CoolingSchedule,
    grid: &TemperatureGrid,
    mode: ScoreMode,
) -> Result<SnapGap> {
    let snapped = grid.snap(schedule)?;
    let original = exact_score(graph, schedule, mode);
    let s = exact_score(graph, &snapped, mode);
    Ok(SnapGap { original, snapped: s, gap: (original - s).abs() })
}

/// One line of the score CSV report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScoreRow {
    pub schedule_id: String,
    pub mode: ScoreMode,
    pub trials: u64,
    pub mean: f64,
    pub half_width: f64,
    pub exact: Option<f64>,
}

impl ScoreRow {
    pub const CSV_HEADER: &'static str = "schedule_id,mode,trials,mean,half_width,exact";

    pub fn to_csv(&self) -> String {
        use crate::report::fmt_num;
        format!(
            "{},{},{},{},{},{}",
            self.schedule_id,
            self.mode.as_str(),
            self.trials,
            fmt_num(self.mean),
            fmt_num(self.half_width),
            self.exact.map(fmt_num).unwrap_or_default()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search_graph::GraphBuilder;

    fn half_temp(x: f64) -> Temperature {
        Temperature::new(x / std::f64::consts::LN_2).unwrap()
    }

    fn down_pair() -> SearchGraph {
        let mut b = GraphBuilder::new();
        let u = b.node("u", 2);
        let v = b.node("v", 1);
        b.edge(u, v).solution(v).start_at(u);
        b.build().unwrap()
    }

    #[test]
    fn uphill_move_moves_all_mass() {
        let mut b = GraphBuilder::new();
        let u = b.node("u", 2);
        let v = b.node("v", 3);
        b.edge(u, v).start_at(u);
        let g = b.build().unwrap();
        let d = step(&g, &NodeDistribution::initial(&g), Temperature::new(0.01).unwrap());
        assert_eq!(d.probs(), &[0.0, 1.0]);
    }

    #[test]
    fn downhill_move_splits_mass() {
        let g = down_pair();
        let d = step(&g, &NodeDistribution::initial(&g), half_temp(1.0));
        assert!((d.probs()[0] - 0.5).abs() < 1e-12);
        assert!((d.probs()[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn one_step_score_in_both_modes() {
        let g = down_pair();
        let s = CoolingSchedule::constant(half_temp(1.0), 1);
        for mode in [ScoreMode::EndState, ScoreMode::Absorbing] {
            assert!((exact_score(&g, &s, mode) - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn trivial_scores() {
        let mut b = GraphBuilder::new();
        let a = b.node("a", 1);
        b.solution(a);
        let g = b.build().unwrap();
        assert_eq!(exact_score(&g, &CoolingSchedule::empty(), ScoreMode::EndState), 1.0);
        let mut b = GraphBuilder::new();
        let a = b.node("a", 1);
        let c = b.node("c", 1);
        b.edge(a, c).edge(c, a);
        let g = b.build().unwrap();
        let s = CoolingSchedule::constant(Temperature::INF, 5);
        assert_eq!(exact_score(&g, &s, ScoreMode::EndState), 0.0);
    }

    #[test]
    fn uphill_chain_always_reaches_the_end() {
        let mut b = GraphBuilder::new();
        let ids: Vec<usize> = (0..5).map(|i| b.node(format!("c{i}"), i + 1)).collect();
        for w in ids.windows(2) {
            b.edge(w[0], w[1]);
        }
        b.solution(ids[4]).start_at(ids[0]);
        let g = b.build().unwrap();
        let s = CoolingSchedule::constant(Temperature::new(0.3).unwrap(), 4);
        for seed in 0..20 {
            let out = simulate(&g, &s, ScoreMode::EndState, seed, true);
            assert_eq!(out.end_node, ids[4]);
            assert_eq!(out.trajectory.unwrap(), ids);
        }
    }

    #[test]
    fn simulate_is_deterministic() {
        let mut r = rng::rng(1);
        let g = crate::search_graph::random_graph(8, 4, 3, &mut r);
        let s = CoolingSchedule::constant(Temperature::new(1.5).unwrap(), 30);
        let a = simulate(&g, &s, ScoreMode::EndState, 99, true);
        let b = simulate(&g, &s, ScoreMode::EndState, 99, true);
        assert_eq!(a, b);
    }

    #[test]
    fn hoeffding_sizes() {
        assert_eq!(hoeffding_trials(0.05, 0.99).unwrap(), 1060);
        assert_eq!(hoeffding_trials(0.5, 0.5).unwrap(), 3);
        assert!(hoeffding_trials(1.0, 0.5).is_err());
        let hw = hoeffding_half_width(1060, 0.99);
        assert!((hw - (200f64.ln() / 2120.0).sqrt()).abs() < 1e-15);
        assert!((hw - 0.05).abs() < 1e-3);
    }

    #[test]
    fn estimate_of_certain_event() {
        let mut b = GraphBuilder::new();
        let a = b.node("a", 1);
        let c = b.node("c", 2);
        b.edge(a, c).solution(c).start_at(a);
        let g = b.build().unwrap();
        let s = CoolingSchedule::constant(Temperature::new(1.0).unwrap(), 3);
        let e = estimate_score(&g, &s, ScoreMode::EndState, 50, 0.9, 3).unwrap();
        assert_eq!(e.mean, 1.0);
    }

    #[test]
    fn csv_row() {
        let row = ScoreRow {
            schedule_id: "s0".into(),
            mode: ScoreMode::Absorbing,
            trials: 10,
            mean: 0.5,
            half_width: 0.25,
            exact: None,
        };
        assert_eq!(row.to_csv(), "s0,absorbing,10,0.5,0.25,");
    }
}

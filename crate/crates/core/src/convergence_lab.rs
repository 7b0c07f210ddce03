//! Fixed-acceptance Markov chains on search graphs and a search for graphs
//! where a hotter start converges faster to a cold stationary distribution
//! than a lukewarm one.
//!
//! Each step draws a uniform out-edge; moves that do not lower the energy
//! are always taken, the others with probability `p`.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::search_graph::{GraphBuilder, GraphSpec, SearchGraph};

pub const DEFAULT_STATIONARY_TOL: f64 = 1e-12;
pub const DEFAULT_TARGET_TOL: f64 = 1e-4;
pub const MAX_ITERATIONS: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    L1,
    L2,
}

impl Metric {
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::L1 => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            Metric::L2 => a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt(),
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(Metric::L1),
            "l2" => Ok(Metric::L2),
            other => Err(Error::InvalidArgument(format!("unknown metric {other:?}"))),
        }
    }
}

/// Dense row-stochastic transition matrix.
pub type Matrix = Vec<Vec<f64>>;

pub fn transition_matrix(graph: &SearchGraph, p: f64) -> Result<Matrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("p must be in [0,1], got {p}")));
    }
    let n = graph.node_count();
    let mut m = vec![vec![0.0; n]; n];
    for (u, row) in m.iter_mut().enumerate() {
        let out = graph.out_edges(u);
        if out.is_empty() {
            row[u] = 1.0;
            continue;
        }
        let w = 1.0 / out.len() as f64;
        for &v in out {
            let a = if graph.energy(v) >= graph.energy(u) { 1.0 } else { p };
            row[v] += w * a;
            row[u] += w * (1.0 - a);
        }
    }
    Ok(m)
}

/// `x M`.
pub fn apply(m: &Matrix, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; x.len()];
    for (xi, row) in x.iter().zip(m) {
        if *xi != 0.0 {
            for (yj, mij) in y.iter_mut().zip(row) {
                *yj += xi * mij;
            }
        }
    }
    y
}

/// Stationary distribution by power iteration from the uniform vector. The
/// lazy variant iterates `(I + M) / 2`, which has the same fixed points but
/// cannot oscillate on periodic chains.
pub fn stationary(m: &Matrix, tol: f64, lazy: bool) -> Result<Vec<f64>> {
    let n = m.len();
    let mut x = vec![1.0 / n as f64; n];
    for _ in 0..MAX_ITERATIONS {
        let mut y = apply(m, &x);
        if lazy {
            y.iter_mut().zip(&x).for_each(|(a, b)| *a = 0.5 * (*a + b));
        }
        let change = Metric::L1.distance(&x, &y);
        x = y;
        if change < tol {
            return Ok(x);
        }
    }
    Err(Error::NoConvergence(MAX_ITERATIONS))
}

/// `|pi M - pi|_1`.
pub fn stationarity_residual(m: &Matrix, pi: &[f64]) -> f64 {
    Metric::L1.distance(&apply(m, pi), pi)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Convergence {
    pub steps: u64,
    /// Distance to the target before each step, ending with the first value below `tol`.
    pub trace: Vec<f64>,
}

/// Applies `m` to `start` until it is within `tol` of `target`.
pub fn steps_to_target(
    m: &Matrix,
    start: &[f64],
    target: &[f64],
    metric: Metric,
    tol: f64,
    cap: u64,
) -> Result<Convergence> {
    let mut x = start.to_vec();
    let mut trace = Vec::new();
    for steps in 0..=cap {
        let d = metric.distance(&x, target);
        trace.push(d);
        if d < tol {
            return Ok(Convergence { steps, trace });
        }
        x = apply(m, &x);
    }
    Err(Error::NoConvergence(cap))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub p_triple: (f64, f64, f64),
    pub metric: Metric,
    pub steps_high: u64,
    pub steps_mid: u64,
    /// True when starting from the hottest distribution converges strictly faster.
    pub violation: bool,
    pub trace_high: Vec<f64>,
    pub trace_mid: Vec<f64>,
}

/// Compares how fast the `p_high` and `p_mid` stationary distributions reach
/// the `p_low` one under the `p_low` chain.
pub fn monotonicity_probe(
    graph: &SearchGraph,
    (p_low, p_mid, p_high): (f64, f64, f64),
    metric: Metric,
    tol: f64,
    cap: u64,
) -> Result<ProbeReport> {
    if !(p_low < p_mid && p_mid < p_high) {
        return Err(Error::InvalidArgument(format!(
            "need p_low < p_mid < p_high, got ({p_low}, {p_mid}, {p_high})"
        )));
    }
    let low = transition_matrix(graph, p_low)?;
    let target = stationary(&low, DEFAULT_STATIONARY_TOL, true)?;
    let from_high = stationary(&transition_matrix(graph, p_high)?, DEFAULT_STATIONARY_TOL, true)?;
    let from_mid = stationary(&transition_matrix(graph, p_mid)?, DEFAULT_STATIONARY_TOL, true)?;
    let high = steps_to_target(&low, &from_high, &target, metric, tol, cap)?;
    let mid = steps_to_target(&low, &from_mid, &target, metric, tol, cap)?;
    Ok(ProbeReport {
        p_triple: (p_low, p_mid, p_high),
        metric,
        steps_high: high.steps,
        steps_mid: mid.steps,
        violation: high.steps < mid.steps,
        trace_high: high.trace,
        trace_mid: mid.trace,
    })
}

/// Strongly connected random graph: a random Hamiltonian cycle, up to
/// `node_count` extra edges and energies uniform in `1..=max_energy`.
pub fn random_candidate<R: Rng + ?Sized>(node_count: usize, max_energy: u64, rng: &mut R) -> SearchGraph {
    let mut b = GraphBuilder::new();
    for i in 0..node_count {
        b.node(format!("s{i}"), rng.random_range(1..=max_energy));
    }
    let mut order: Vec<usize> = (0..node_count).collect();
    order.shuffle(rng);
    for i in 0..node_count {
        b.edge(order[i], order[(i + 1) % node_count]);
    }
    for _ in 0..rng.random_range(0..=node_count) {
        let u = rng.random_range(0..node_count);
        let v = rng.random_range(0..node_count);
        if u != v {
            b.edge(u, v);
        }
    }
    b.build_with_emax(max_energy).expect("candidate is valid")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub candidate: u64,
    pub graph: GraphSpec,
    #[serde(flatten)]
    pub report: ProbeReport,
}

#[derive(Clone, Copy, Debug)]
pub struct SearchParams {
    pub node_count: usize,
    pub max_energy: u64,
    pub metric: Metric,
    pub p_triple: (f64, f64, f64),
    pub tol: f64,
    pub seed: u64,
    pub budget: u64,
    /// Step cap per convergence run; candidates that hit it are skipped.
    pub step_cap: u64,
}

impl SearchParams {
    pub fn new(node_count: usize, metric: Metric, p_triple: (f64, f64, f64), seed: u64, budget: u64) -> Self {
        SearchParams {
            node_count,
            max_energy: 3,
            metric,
            p_triple,
            tol: DEFAULT_TARGET_TOL,
            seed,
            budget,
            step_cap: 100_000,
        }
    }
}

/// Candidate `i` is generated from `rng::stream_seed(seed, i)`, so the
/// lowest-index violation is found regardless of thread count.
pub fn search_counterexample(params: &SearchParams) -> Result<Option<Counterexample>> {
    if params.node_count < 2 {
        return Err(Error::InvalidArgument("node_count must be at least 2".into()));
    }
    const CHUNK: u64 = 256;
    let mut start = 0;
    while start < params.budget {
        let end = (start + CHUNK).min(params.budget);
        let hit = (start..end)
            .into_par_iter()
            .filter_map(|i| {
                let mut r = rng::stream(params.seed, i);
                let g = random_candidate(params.node_count, params.max_energy, &mut r);
                let report =
                    monotonicity_probe(&g, params.p_triple, params.metric, params.tol, params.step_cap).ok()?;
                report.violation.then(|| Counterexample { candidate: i, graph: g.to_spec(), report })
            })
            .min_by_key(|c| c.candidate);
        if hit.is_some() {
            return Ok(hit);
        }
        start = end;
    }
    Ok(None)
}

/// Re-runs the probe stored in a counterexample.
pub fn replay(c: &Counterexample, tol: f64, cap: u64) -> Result<ProbeReport> {
    let g = SearchGraph::from_spec(&c.graph)?;
    monotonicity_probe(&g, c.report.p_triple, c.report.metric, tol, cap)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(e_u: u64, e_v: u64, back: bool) -> SearchGraph {
        let mut b = GraphBuilder::new();
        let u = b.node("u", e_u);
        let v = b.node("v", e_v);
        b.edge(u, v);
        if back {
            b.edge(v, u);
        }
        b.build().unwrap()
    }

    #[test]
    fn matrix_rules() {
        let m = transition_matrix(&pair(1, 1, true), 0.3).unwrap();
        assert_eq!(m, vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let m = transition_matrix(&pair(2, 1, false), 0.15).unwrap();
        assert!((m[0][0] - 0.85).abs() < 1e-15 && (m[0][1] - 0.15).abs() < 1e-15);
        assert_eq!(m[1], vec![0.0, 1.0]);
    }

    #[test]
    fn symmetric_lazy_stationary() {
        let m = transition_matrix(&pair(1, 1, true), 0.5).unwrap();
        let pi = stationary(&m, 1e-12, true).unwrap();
        assert!((pi[0] - 0.5).abs() < 1e-12);
        assert!(stationarity_residual(&m, &pi) < 1e-11);
    }

    #[test]
    fn complete_graph_is_uniform() {
        let mut b = GraphBuilder::new();
        let ids: Vec<usize> = (0..5).map(|i| b.node(format!("k{i}"), 2)).collect();
        for &u in &ids {
            for &v in &ids {
                if u != v {
                    b.edge(u, v);
                }
            }
        }
        let m = transition_matrix(&b.build().unwrap(), 0.4).unwrap();
        let pi = stationary(&m, 1e-12, false).unwrap();
        assert!(pi.iter().all(|&x| (x - 0.2).abs() < 1e-12));
    }

    #[test]
    fn start_at_target_takes_no_steps() {
        let m = transition_matrix(&pair(2, 1, true), 0.4).unwrap();
        let pi = stationary(&m, 1e-12, true).unwrap();
        let c = steps_to_target(&m, &pi, &pi, Metric::L2, 1e-4, 10).unwrap();
        assert_eq!(c.steps, 0);
    }

    #[test]
    fn equal_energies_never_violate() {
        let mut b = GraphBuilder::new();
        for i in 0..5 {
            b.node(format!("e{i}"), 1);
        }
        for i in 0..5 {
            b.edge(i, (i + 1) % 5).edge(i, i);
        }
        let g = b.build().unwrap();
        let rep = monotonicity_probe(&g, (0.15, 0.55, 0.95), Metric::L1, 1e-4, 1000).unwrap();
        assert_eq!((rep.steps_high, rep.steps_mid, rep.violation), (0, 0, false));
    }
}

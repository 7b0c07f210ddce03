//! Recovering a [`MonotoneStationaryGraph`] from black-box score queries.
//!
//! The learner only ever asks for scores of non-increasing schedules over
//! the level temperatures (given as level counts). Saturated prefixes
//! `m x d_1, ..., m x d_i` reveal which levels are attainable and their
//! scores; after such a prefix, appending `k` copies of `d_j` jumps to `v_j`
//! exactly when `k` reaches the effective edge length, which a binary search
//! finds.

use std::collections::HashMap;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::{self, Rng as ChaRng};
use crate::sa_engine::{estimate_score, exact_score, hoeffding_trials, ScoreMode};
use crate::search_graph::{SearchGraph, Temperature};
use crate::stationary_model::{runs_of, Edge, LevelCounts, MonotoneStationaryGraph};

/// Black-box access to schedule scores.
pub trait ScoreOracle {
    fn query(&mut self, counts: &[u64]) -> Result<f64>;
    /// True if repeated queries may return different values.
    fn is_stochastic(&self) -> bool {
        false
    }
}

/// Returns the planted model's score exactly.
pub struct PlantedOracle<'a> {
    pub msg: &'a MonotoneStationaryGraph,
}

impl ScoreOracle for PlantedOracle<'_> {
    fn query(&mut self, counts: &[u64]) -> Result<f64> {
        Ok(self.msg.model_score(counts))
    }
}

/// Planted score plus noise drawn uniformly from `(-noise, noise)`.
pub struct NoisyOracle<'a> {
    pub msg: &'a MonotoneStationaryGraph,
    pub noise: f64,
    rng: ChaRng,
}

impl<'a> NoisyOracle<'a> {
    pub fn new(msg: &'a MonotoneStationaryGraph, noise: f64, seed: u64) -> Self {
        NoisyOracle { msg, noise, rng: rng::rng(seed) }
    }
}

impl ScoreOracle for NoisyOracle<'_> {
    fn query(&mut self, counts: &[u64]) -> Result<f64> {
        let u: f64 = self.rng.random_range(-1.0..1.0);
        Ok(self.msg.model_score(counts) + u * self.noise)
    }

    fn is_stochastic(&self) -> bool {
        true
    }
}

/// Success ratio of `trials` Bernoulli draws with the planted score as mean.
pub struct SampledOracle<'a> {
    pub msg: &'a MonotoneStationaryGraph,
    pub trials: u64,
    rng: ChaRng,
}

impl<'a> SampledOracle<'a> {
    pub fn new(msg: &'a MonotoneStationaryGraph, trials: u64, seed: u64) -> Self {
        SampledOracle { msg, trials, rng: rng::rng(seed) }
    }
}

impl ScoreOracle for SampledOracle<'_> {
    fn query(&mut self, counts: &[u64]) -> Result<f64> {
        let p = self.msg.model_score(counts);
        let wins = (0..self.trials).filter(|_| self.rng.random::<f64>() < p).count();
        Ok(wins as f64 / self.trials as f64)
    }

    fn is_stochastic(&self) -> bool {
        true
    }
}

/// Scores schedules by running annealing on a search graph, exactly or by
/// Monte Carlo.
pub struct GraphOracle<'a> {
    pub graph: &'a SearchGraph,
    pub temps: Vec<Temperature>,
    pub mode: ScoreMode,
    /// `None` for exact propagation.
    pub trials: Option<u64>,
    seed: u64,
    issued: u64,
}

impl<'a> GraphOracle<'a> {
    pub fn new(
        graph: &'a SearchGraph,
        temps: Vec<Temperature>,
        mode: ScoreMode,
        trials: Option<u64>,
        seed: u64,
    ) -> Self {
        GraphOracle { graph, temps, mode, trials, seed, issued: 0 }
    }
}

impl ScoreOracle for GraphOracle<'_> {
    fn query(&mut self, counts: &[u64]) -> Result<f64> {
        let schedule = runs_of(&self.temps, counts).expand();
        self.issued += 1;
        match self.trials {
            None => Ok(exact_score(self.graph, &schedule, self.mode)),
            Some(n) => {
                let seed = rng::stream_seed(self.seed, self.issued);
                Ok(estimate_score(self.graph, &schedule, self.mode, n, 0.999, seed)?.mean)
            }
        }
    }

    fn is_stochastic(&self) -> bool {
        self.trials.is_some()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LearnerConfig {
    pub temps: Vec<Temperature>,
    /// Largest number of copies of one temperature a probe may use.
    pub m: u64,
    /// Minimum score difference between consecutive attainable levels.
    pub gap: f64,
    pub trials_per_query: u64,
    pub max_queries: Option<u64>,
}

impl LearnerConfig {
    /// Trials per stochastic query so each estimate is within `gap/3` with
    /// probability 0.999.
    pub fn recommended_trials(gap: f64) -> u64 {
        hoeffding_trials((gap / 3.0).min(0.999), 0.999).expect("gap in (0, 1)")
    }

    pub fn validate(&self, stochastic: bool) -> Result<()> {
        if self.temps.is_empty() {
            return Err(Error::InvalidArgument("learner needs at least one temperature".into()));
        }
        if !(self.gap > 0.0 && self.gap <= 1.0) {
            return Err(Error::InvalidArgument(format!("gap must be in (0,1], got {}", self.gap)));
        }
        if self.m == 0 {
            return Err(Error::InvalidArgument("m must be positive".into()));
        }
        if stochastic && self.trials_per_query < Self::recommended_trials(self.gap) {
            return Err(Error::InvalidArgument(format!(
                "stochastic oracle needs at least {} trials per query for gap {}",
                Self::recommended_trials(self.gap),
                self.gap
            )));
        }
        Ok(())
    }

    fn k(&self) -> usize {
        self.temps.len()
    }

    fn prefix(&self, i: usize) -> LevelCounts {
        let mut c = vec![0; self.k()];
        c[..i].iter_mut().for_each(|x| *x = self.m);
        c
    }
}

/// Memoizing, budgeted wrapper around an oracle.
pub struct Session<'o, O: ScoreOracle + ?Sized> {
    oracle: &'o mut O,
    memo: HashMap<LevelCounts, f64>,
    budget: Option<u64>,
}

impl<'o, O: ScoreOracle + ?Sized> Session<'o, O> {
    pub fn new(oracle: &'o mut O, budget: Option<u64>) -> Self {
        Session { oracle, memo: HashMap::new(), budget }
    }

    /// Distinct schedules sent to the oracle so far.
    pub fn queries(&self) -> u64 {
        self.memo.len() as u64
    }

    pub fn score(&mut self, counts: &[u64]) -> Result<f64> {
        if let Some(&s) = self.memo.get(counts) {
            return Ok(s);
        }
        if let Some(b) = self.budget {
            if self.queries() >= b {
                return Err(Error::OracleBudget(b));
            }
        }
        let s = self.oracle.query(counts)?;
        self.memo.insert(counts.to_vec(), s);
        Ok(s)
    }
}

/// True iff `counts` scores like the saturated schedule (within `gap/2`).
pub fn reaches_top<O: ScoreOracle + ?Sized>(
    session: &mut Session<'_, O>,
    config: &LearnerConfig,
    counts: &[u64],
) -> Result<bool> {
    let top = session.score(&config.prefix(config.k()))?;
    Ok((session.score(counts)? - top).abs() <= config.gap / 2.0)
}

/// Smallest number `k <= upper` of `d_j` copies that, appended to the
/// saturated prefix through level `i`, lifts the score by more than `gap/2`.
fn search_reps<O: ScoreOracle + ?Sized>(
    session: &mut Session<'_, O>,
    config: &LearnerConfig,
    i: usize,
    j: usize,
    upper: u64,
    check_upper: bool,
) -> Result<Option<u64>> {
    let base_counts = config.prefix(i);
    let base = session.score(&base_counts)?;
    let moved = |k: u64, session: &mut Session<'_, O>| -> Result<bool> {
        let mut c = base_counts.clone();
        c[j - 1] = k;
        Ok(session.score(&c)? > base + config.gap / 2.0)
    };
    if check_upper && !moved(upper, session)? {
        return Ok(None);
    }
    let (mut lo, mut hi) = (1, upper);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if moved(mid, session)? {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(Some(hi))
}

/// Effective length of the edge family from `v_i` into `v_j`, or `None` if
/// more than `m` copies would be needed.
pub fn find_edge_reps<O: ScoreOracle + ?Sized>(
    session: &mut Session<'_, O>,
    config: &LearnerConfig,
    i: usize,
    j: usize,
) -> Result<Option<u64>> {
    if i >= j || j > config.k() {
        return Err(Error::InvalidArgument(format!("need i < j <= K, got ({i}, {j})")));
    }
    search_reps(session, config, i, j, config.m, true)
}

#[derive(Clone, Debug, Serialize)]
pub struct LearnOutcome {
    pub msg: MonotoneStationaryGraph,
    /// Levels reached by their own saturated prefix.
    pub attained: Vec<bool>,
    pub queries: u64,
}

/// Query bound `3 K^2 ceil(log2(m + 1))` the learner stays within.
pub fn query_bound(k: usize, m: u64) -> u64 {
    let l = 64 - m.leading_zeros() as u64; // ceil(log2(m + 1))
    3 * (k * k) as u64 * l.max(1)
}

pub fn learn_msg<O: ScoreOracle + ?Sized>(oracle: &mut O, config: &LearnerConfig) -> Result<LearnOutcome> {
    config.validate(oracle.is_stochastic())?;
    let mut session = Session::new(oracle, config.max_queries);
    let k = config.k();
    let half = config.gap / 2.0;

    // Saturated prefixes: level i is attained iff its prefix lifts the score.
    let mut prefix_score = Vec::with_capacity(k + 1);
    let mut attained = vec![false; k + 1];
    attained[0] = true;
    prefix_score.push(session.score(&config.prefix(0))?);
    let mut plateau = prefix_score[0];
    for i in 1..=k {
        let s = session.score(&config.prefix(i))?;
        if s < plateau - half {
            return Err(Error::InconsistentOracle(format!(
                "saturated prefix through level {i} scored {s}, below the earlier plateau {plateau}"
            )));
        }
        if s > plateau + half {
            attained[i] = true;
            plateau = s;
        }
        prefix_score.push(s);
    }

    let mut scores = Vec::with_capacity(k + 1);
    let mut last = 0.0f64;
    for i in 0..=k {
        if attained[i] {
            last = last.max(prefix_score[i]);
        }
        scores.push(last.clamp(0.0, 1.0));
    }

    // For each attained target, walk the attained sources upwards; the
    // effective length can only shrink, so each search is bounded by the last.
    let mut edges = Vec::new();
    for j in (1..=k).filter(|&j| attained[j]) {
        let mut upper: Option<u64> = None;
        for i in (0..j).filter(|&i| attained[i]) {
            let found = match upper {
                None => search_reps(&mut session, config, i, j, config.m, true)?,
                Some(1) => Some(1),
                Some(u) => search_reps(&mut session, config, i, j, u, false)?,
            };
            if let Some(r) = found {
                if upper.is_none_or(|u| r < u) {
                    edges.push(Edge { from: i, to: j, reps: r });
                }
                upper = Some(r);
            }
        }
        if upper.is_none() {
            return Err(Error::InconsistentOracle(format!(
                "level {j} is attained but no source reaches it within {} copies",
                config.m
            )));
        }
    }

    let msg = MonotoneStationaryGraph::new(config.temps.clone(), scores, edges, None)?;
    Ok(LearnOutcome { msg, attained, queries: session.queries() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stationary_model::fixtures::five_level;

    fn config(msg: &MonotoneStationaryGraph, m: u64) -> LearnerConfig {
        LearnerConfig {
            temps: msg.temps().to_vec(),
            m,
            gap: 0.1,
            trials_per_query: 1,
            max_queries: None,
        }
    }

    #[test]
    fn edge_lengths_of_five_level_model() {
        let g = five_level();
        let cfg = config(&g, 9);
        let mut o = PlantedOracle { msg: &g };
        let mut s = Session::new(&mut o, None);
        assert_eq!(find_edge_reps(&mut s, &cfg, 4, 5).unwrap(), Some(2));
        assert_eq!(find_edge_reps(&mut s, &cfg, 1, 5).unwrap(), Some(6));
        assert_eq!(find_edge_reps(&mut s, &cfg, 0, 5).unwrap(), None);
    }

    #[test]
    fn top_detection() {
        let g = five_level();
        let cfg = config(&g, 9);
        let mut o = PlantedOracle { msg: &g };
        let mut s = Session::new(&mut o, None);
        assert!(reaches_top(&mut s, &cfg, &[9; 5]).unwrap());
        assert!(reaches_top(&mut s, &cfg, &[3, 0, 0, 0, 6]).unwrap());
        assert!(!reaches_top(&mut s, &cfg, &[0; 5]).unwrap());
    }

    #[test]
    fn exact_recovery() {
        let g = five_level();
        let mut o = PlantedOracle { msg: &g };
        let out = learn_msg(&mut o, &config(&g, 9)).unwrap();
        assert!(out.msg.equivalent(&g));
        assert!(out.queries <= query_bound(5, 9));
    }

    #[test]
    fn budget_is_enforced() {
        let g = five_level();
        let mut cfg = config(&g, 9);
        cfg.max_queries = Some(4);
        let mut o = PlantedOracle { msg: &g };
        assert!(matches!(learn_msg(&mut o, &cfg), Err(Error::OracleBudget(4))));
    }

    #[test]
    fn query_bound_arithmetic() {
        assert_eq!(query_bound(1, 1), 3);
        assert_eq!(query_bound(5, 9), 3 * 25 * 4);
    }
}

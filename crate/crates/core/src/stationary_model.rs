//! Monotone stationary graphs: a coarse performance model in which a cooling
//! schedule moves the walk between a chain of stationary distributions
//! `v_0, ..., v_K`.
//!
//! Node `v_j` is entered through forward edges `(i, j, r)` that consume `r`
//! copies of the level temperature `d_j`. Every node also has an implicit
//! free edge back to `v_{j-1}` and an implicit self-loop, so the set of nodes
//! reachable after a prefix is always `{v_0, ..., v_R}` for some `R`.
//!
//! A non-increasing schedule over the levels is the block sequence
//! `d_1^{c_1} d_2^{c_2} ... d_K^{c_K}` and is stored as the count vector
//! `c` ([`LevelCounts`]).

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::search_graph::{CoolingSchedule, RunLengthSchedule, Temperature};

/// Repetition count per level; entry `j - 1` counts copies of `d_j`.
pub type LevelCounts = Vec<u64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub reps: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotoneStationaryGraph {
    temps: Vec<Temperature>,
    scores: Vec<f64>,
    edges: Vec<Edge>,
    #[serde(skip_serializing_if = "Option::is_none")]
    m_cap: Option<u64>,
}

#[derive(Deserialize)]
struct MsgRepr {
    temps: Vec<Temperature>,
    scores: Vec<f64>,
    edges: Vec<Edge>,
    #[serde(default)]
    m_cap: Option<u64>,
}

impl<'de> Deserialize<'de> for MonotoneStationaryGraph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = MsgRepr::deserialize(d)?;
        MonotoneStationaryGraph::new(r.temps, r.scores, r.edges, r.m_cap)
            .map_err(serde::de::Error::custom)
    }
}

fn invalid(msg: String) -> Error {
    Error::InvalidArgument(msg)
}

impl MonotoneStationaryGraph {
    pub fn new(
        temps: Vec<Temperature>,
        scores: Vec<f64>,
        mut edges: Vec<Edge>,
        m_cap: Option<u64>,
    ) -> Result<Self> {
        let k = temps.len();
        if k == 0 {
            return Err(invalid("model needs at least one temperature".into()));
        }
        if temps.windows(2).any(|w| w[1] >= w[0]) {
            return Err(invalid("temps must be strictly decreasing".into()));
        }
        if scores.len() != k + 1 {
            return Err(invalid(format!("expected {} scores, got {}", k + 1, scores.len())));
        }
        if scores.iter().any(|s| !(0.0..=1.0).contains(s)) {
            return Err(invalid("scores must lie in [0,1]".into()));
        }
        if let Some(i) = scores.windows(2).position(|w| w[1] < w[0]) {
            return Err(invalid(format!("scores decrease between v_{i} and v_{}", i + 1)));
        }
        for e in &edges {
            if e.from >= e.to || e.to > k {
                return Err(invalid(format!(
                    "edge {} -> {} must go forward and end at or before v_{k}",
                    e.from, e.to
                )));
            }
            if e.reps == 0 {
                return Err(invalid(format!("edge {} -> {} has zero reps", e.from, e.to)));
            }
            if let Some(cap) = m_cap {
                if e.reps > cap {
                    return Err(invalid(format!(
                        "edge {} -> {} has {} reps, above the cap {cap}",
                        e.from, e.to, e.reps
                    )));
                }
            }
        }
        edges.sort_by_key(|e| (e.to, e.from));
        if let Some(w) = edges.windows(2).find(|w| (w[0].to, w[0].from) == (w[1].to, w[1].from)) {
            return Err(invalid(format!("duplicate edge {} -> {}", w[0].from, w[0].to)));
        }
        // Within one target, reps must not increase with the source index.
        if let Some(w) = edges.windows(2).find(|w| w[0].to == w[1].to && w[1].reps > w[0].reps) {
            return Err(invalid(format!(
                "monotonicity violated: edge {} -> {} needs {} reps but the earlier source {} needs only {}",
                w[1].from, w[1].to, w[1].reps, w[0].from, w[0].reps
            )));
        }
        Ok(MonotoneStationaryGraph { temps, scores, edges, m_cap })
    }

    /// Number of temperature levels `K`.
    pub fn k(&self) -> usize {
        self.temps.len()
    }

    pub fn temps(&self) -> &[Temperature] {
        &self.temps
    }

    /// Temperature of level `j` (1-based).
    pub fn level_temp(&self, j: usize) -> Temperature {
        self.temps[j - 1]
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    /// Edges sorted by `(to, from)`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn m_cap(&self) -> Option<u64> {
        self.m_cap
    }

    pub fn edges_into(&self, j: usize) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.to == j)
    }

    /// Fewest copies of `d_j` that move the walk from `v_i` (or any node
    /// below it, reachable through back edges) to `v_j`.
    pub fn effective_reps(&self, i: usize, j: usize) -> Option<u64> {
        self.edges_into(j).filter(|e| e.from <= i).map(|e| e.reps).min()
    }

    /// Level reached by a non-increasing schedule given as level counts.
    pub fn reachable_index(&self, counts: &[u64]) -> usize {
        debug_assert_eq!(counts.len(), self.k());
        let mut reached = 0;
        for j in 1..=self.k() {
            if self.edges_into(j).any(|e| e.from <= reached && e.reps <= counts[j - 1]) {
                reached = j;
            }
        }
        reached
    }

    /// Level reached by an arbitrary sequence of level indices (1-based).
    ///
    /// Earliest-position dynamic program: `pos[v]` is the shortest prefix
    /// after which `v` is reachable. Forward edges are relaxed by locating the
    /// `r`-th occurrence of their level at or after `pos[from]`; back edges
    /// give `pos[v] <= pos[v + 1]`. Iterates to a fixpoint.
    pub fn reachable_index_seq(&self, seq: &[usize]) -> usize {
        let k = self.k();
        let mut occ: Vec<Vec<usize>> = vec![Vec::new(); k + 1];
        for (p, &j) in seq.iter().enumerate() {
            occ[j].push(p);
        }
        let mut pos = vec![usize::MAX; k + 1];
        pos[0] = 0;
        loop {
            let mut changed = false;
            for e in &self.edges {
                let start = pos[e.from];
                if start == usize::MAX {
                    continue;
                }
                let list = &occ[e.to];
                let first = list.partition_point(|&p| p < start);
                if let Some(&p) = list.get(first + e.reps as usize - 1) {
                    if p + 1 < pos[e.to] {
                        pos[e.to] = p + 1;
                        changed = true;
                    }
                }
            }
            for v in (0..k).rev() {
                if pos[v + 1] < pos[v] {
                    pos[v] = pos[v + 1];
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        (0..=k).rev().find(|&v| pos[v] != usize::MAX).unwrap_or(0)
    }

    pub fn model_score(&self, counts: &[u64]) -> f64 {
        self.scores[self.reachable_index(counts)]
    }

    /// Edges `(a, b, r)` with `a < i <= b`.
    pub fn crossing_edges(&self, i: usize) -> Vec<Edge> {
        self.edges.iter().filter(|e| e.from < i && i <= e.to).copied().collect()
    }

    /// True iff, for every level, some crossing edge is encompassed.
    pub fn is_acceptable(&self, counts: &[u64]) -> bool {
        self.covered_prefix(counts) == self.k()
    }

    /// Largest `i` such that levels `1..=i` all have an encompassed crossing edge.
    pub fn covered_prefix(&self, counts: &[u64]) -> usize {
        (1..=self.k())
            .take_while(|&i| {
                self.edges
                    .iter()
                    .any(|e| e.from < i && i <= e.to && encompasses(counts, e.to, e.reps))
            })
            .count()
    }

    /// `cap` copies of every level temperature.
    pub fn saturation(&self, cap: u64) -> LevelCounts {
        vec![cap; self.k()]
    }

    /// Level counts of a schedule whose temperatures all belong to the model.
    pub fn counts_of(&self, schedule: &CoolingSchedule) -> Result<LevelCounts> {
        let mut counts = vec![0; self.k()];
        for (index, &t) in schedule.temps().iter().enumerate() {
            let j = self.level_of(t).ok_or(Error::UnknownTemperature { index, value: t.value() })?;
            counts[j - 1] += 1;
        }
        Ok(counts)
    }

    /// 1-based level of `t`, tolerating last-bit differences.
    pub fn level_of(&self, t: Temperature) -> Option<usize> {
        self.temps
            .iter()
            .position(|&d| {
                d == t || (!d.is_inf() && (d.value() - t.value()).abs() <= 1e-12 * d.value())
            })
            .map(|i| i + 1)
    }

    pub fn schedule_of(&self, counts: &[u64]) -> RunLengthSchedule {
        runs_of(&self.temps, counts)
    }

    /// Same model with `m_cap` replaced.
    pub fn with_cap(mut self, m_cap: Option<u64>) -> Result<Self> {
        self.m_cap = m_cap;
        MonotoneStationaryGraph::new(self.temps, self.scores, self.edges, m_cap)
    }

    /// Effective-reps table over all `(i, j)` pairs, the canonical form used
    /// to compare models that differ only by implied edges.
    pub fn closure_table(&self) -> BTreeMap<(usize, usize), u64> {
        let mut t = BTreeMap::new();
        for j in 1..=self.k() {
            for i in 0..j {
                if let Some(r) = self.effective_reps(i, j) {
                    t.insert((i, j), r);
                }
            }
        }
        t
    }

    /// Equal up to edges implied by the back-edge closure.
    pub fn equivalent(&self, other: &MonotoneStationaryGraph) -> bool {
        self.equivalent_within(other, 1e-9)
    }

    /// Same closure table, scores within `score_tol`.
    pub fn equivalent_within(&self, other: &MonotoneStationaryGraph, score_tol: f64) -> bool {
        self.temps == other.temps
            && self.scores.len() == other.scores.len()
            && self.scores.iter().zip(&other.scores).all(|(a, b)| (a - b).abs() <= score_tol)
            && self.closure_table() == other.closure_table()
    }
}

/// True iff `counts` holds at least `reps` copies of level `j`.
pub fn encompasses(counts: &[u64], j: usize, reps: u64) -> bool {
    counts[j - 1] >= reps
}

pub fn runs_of(temps: &[Temperature], counts: &[u64]) -> RunLengthSchedule {
    let runs = temps
        .iter()
        .zip(counts)
        .filter(|(_, &c)| c > 0)
        .map(|(&t, &c)| (t, c))
        .collect();
    RunLengthSchedule::new(runs).expect("levels are strictly decreasing")
}

/// Level indices of the non-increasing schedule with the given counts.
pub fn index_sequence(counts: &[u64]) -> Vec<usize> {
    counts
        .iter()
        .enumerate()
        .flat_map(|(i, &c)| std::iter::repeat_n(i + 1, c as usize))
        .collect()
}

pub fn load_msg(bytes: &[u8]) -> Result<MonotoneStationaryGraph> {
    Ok(serde_json::from_slice(bytes)?)
}

pub fn save_msg(msg: &MonotoneStationaryGraph) -> Vec<u8> {
    serde_json::to_vec_pretty(msg).expect("model serializes")
}

/// Parameters for [`random_msg`].
#[derive(Clone, Copy, Debug)]
pub struct RandomMsgParams {
    pub k: usize,
    pub max_reps: u64,
    /// Probability of each non-chain edge `(i, j)`, `i < j - 1`.
    pub edge_prob: f64,
    /// Minimum gap between consecutive scores.
    pub min_gap: f64,
}

/// Random monotone model whose chain `0 -> 1 -> ... -> K` is always present,
/// so every level is attainable. Scores run from 0 to 1.
pub fn random_msg<R: Rng + ?Sized>(p: &RandomMsgParams, rng: &mut R) -> MonotoneStationaryGraph {
    let k = p.k;
    let temps: Vec<Temperature> =
        (0..k).map(|i| Temperature::new((k - i) as f64).unwrap()).collect();
    let mut edges = Vec::new();
    for j in 1..=k {
        let mut sources: Vec<usize> = (0..j - 1).filter(|_| rng.random_bool(p.edge_prob)).collect();
        sources.push(j - 1);
        let mut reps: Vec<u64> =
            sources.iter().map(|_| rng.random_range(1..=p.max_reps)).collect();
        reps.sort_unstable_by(|a, b| b.cmp(a));
        edges.extend(sources.into_iter().zip(reps).map(|(from, reps)| Edge { from, to: j, reps }));
    }
    let free = (1.0 - k as f64 * p.min_gap).max(0.0);
    let w: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
    let total: f64 = w.iter().sum::<f64>().max(1e-12);
    let mut scores = vec![0.0];
    for wi in w {
        let prev = *scores.last().unwrap();
        scores.push((prev + p.min_gap + free * wi / total).min(1.0));
    }
    scores[k] = 1.0;
    MonotoneStationaryGraph::new(temps, scores, edges, None).expect("random model is valid")
}

/// Hand-made reference models.
pub mod fixtures {
    use super::*;

    fn levels(k: usize) -> Vec<Temperature> {
        (0..k).map(|i| Temperature::new((k - i) as f64).unwrap()).collect()
    }

    fn edges(list: &[(usize, usize, u64)]) -> Vec<Edge> {
        list.iter().map(|&(from, to, reps)| Edge { from, to, reps }).collect()
    }

    /// Five levels with edges 0->1:3, 1->2:2, 0->2:4, 1->3:4, 2->3:2, 3->4:3,
    /// 4->5:2, 1->5:6 and scores `0, 0.1, ..., 0.5`.
    pub fn five_level() -> MonotoneStationaryGraph {
        MonotoneStationaryGraph::new(
            levels(5),
            vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5],
            edges(&[(0, 1, 3), (1, 2, 2), (0, 2, 4), (1, 3, 4), (2, 3, 2), (3, 4, 3), (4, 5, 2), (1, 5, 6)]),
            None,
        )
        .unwrap()
    }

    /// Two instances that need different schedules: the first has
    /// 0->1:1, 1->2:4, 0->2:8, the second 0->1:4, 1->2:4, 0->2:4.
    pub fn diverging_pair() -> [MonotoneStationaryGraph; 2] {
        let scores = vec![0.0, 0.5, 1.0];
        [
            MonotoneStationaryGraph::new(
                levels(2),
                scores.clone(),
                edges(&[(0, 1, 1), (1, 2, 4), (0, 2, 8)]),
                None,
            )
            .unwrap(),
            MonotoneStationaryGraph::new(
                levels(2),
                scores,
                edges(&[(0, 1, 4), (1, 2, 4), (0, 2, 4)]),
                None,
            )
            .unwrap(),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn five_level_reachability() {
        let g = five_level();
        assert_eq!(g.reachable_index(&[3, 0, 0, 0, 6]), 5);
        assert_eq!(g.reachable_index(&[0; 5]), 0);
        assert_eq!(g.reachable_index(&[2, 4, 4, 4, 2]), 5);
        assert_eq!(g.reachable_index_seq(&index_sequence(&[2, 4, 4, 4, 2])), 5);
        assert!(g.is_acceptable(&[3, 0, 0, 0, 6]));
        assert!(!g.is_acceptable(&[0, 0, 0, 0, 6]));
    }

    #[test]
    fn score_lookup() {
        let g = five_level();
        // 0->1 (3 x d1), 1->3 (4 x d3).
        let c = [3, 0, 4, 0, 0];
        assert_eq!(g.reachable_index(&c), 3);
        assert_eq!(g.model_score(&c), 0.3);
        assert_eq!(g.model_score(&[0; 5]), 0.0);
        assert_eq!(g.model_score(&g.saturation(9)), 0.5);
    }

    #[test]
    fn crossing_sets() {
        let g = five_level();
        let mut got: Vec<(usize, usize)> =
            g.crossing_edges(2).iter().map(|e| (e.from, e.to)).collect();
        got.sort();
        assert_eq!(got, vec![(0, 2), (1, 2), (1, 3), (1, 5)]);
        assert!(g.crossing_edges(1).iter().all(|e| e.from == 0));
        assert_eq!(g.crossing_edges(1).len(), 2);
    }

    #[test]
    fn encompassing() {
        assert!(encompasses(&[0, 4], 2, 4));
        assert!(!encompasses(&[0, 3], 2, 4));
    }

    #[test]
    fn monotonicity_is_enforced() {
        let e = |from, to, reps| Edge { from, to, reps };
        let t = vec![Temperature::new(2.0).unwrap(), Temperature::new(1.0).unwrap()];
        let bad = MonotoneStationaryGraph::new(
            t,
            vec![0.0, 0.5, 1.0],
            vec![e(0, 1, 1), e(0, 2, 1), e(1, 2, 3)],
            None,
        );
        assert!(bad.is_err());
    }

    #[test]
    fn json_round_trip() {
        let g = five_level();
        let back = load_msg(&save_msg(&g)).unwrap();
        assert_eq!(back, g);
        assert!(load_msg(br#"{"temps":[1.0,2.0],"scores":[0,0,0],"edges":[]}"#).is_err());
    }

    #[test]
    fn unknown_temperature_in_schedule() {
        let g = five_level();
        let s = CoolingSchedule::new(vec![Temperature::new(5.0).unwrap(), Temperature::new(4.5).unwrap()])
            .unwrap();
        assert!(matches!(g.counts_of(&s), Err(Error::UnknownTemperature { index: 1, .. })));
    }
}

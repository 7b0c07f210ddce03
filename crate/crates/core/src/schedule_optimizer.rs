//! Choosing one schedule of length at most `m` for a family of instances,
//! each described by a [`MonotoneStationaryGraph`] over the same levels.
//!
//! Every optimizer reports a canonical non-increasing schedule together with
//! the scores obtained by replaying it through each model. Ties are broken
//! by higher average score, then shorter length, then the lexicographically
//! larger count vector (which puts as much weight as possible on the hotter
//! levels).

use std::cmp::Ordering;
use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::search_graph::RunLengthSchedule;
use crate::simplex::{self, LinearProgram, LpOutcome, Relation};
use crate::stationary_model::{
    index_sequence, random_msg, runs_of, LevelCounts, MonotoneStationaryGraph, RandomMsgParams,
};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InstanceFamily {
    pub m: u64,
    pub msgs: Vec<MonotoneStationaryGraph>,
}

#[derive(Deserialize)]
struct FamilyRepr {
    m: u64,
    msgs: Vec<MonotoneStationaryGraph>,
}

impl<'de> Deserialize<'de> for InstanceFamily {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = FamilyRepr::deserialize(d)?;
        InstanceFamily::new(r.m, r.msgs).map_err(serde::de::Error::custom)
    }
}

impl InstanceFamily {
    pub fn new(m: u64, msgs: Vec<MonotoneStationaryGraph>) -> Result<Self> {
        let first = msgs
            .first()
            .ok_or_else(|| Error::InvalidArgument("family needs at least one instance".into()))?;
        if let Some(i) = msgs.iter().position(|g| g.temps() != first.temps()) {
            return Err(Error::InvalidArgument(format!(
                "instance {i} uses a different temperature set than instance 0"
            )));
        }
        Ok(InstanceFamily { m, msgs })
    }

    pub fn k(&self) -> usize {
        self.msgs[0].k()
    }

    pub fn n(&self) -> usize {
        self.msgs.len()
    }

    pub fn with_budget(&self, m: u64) -> Self {
        InstanceFamily { m, msgs: self.msgs.clone() }
    }

    /// Scores of `counts` on every instance plus their mean.
    pub fn evaluate(&self, counts: &[u64]) -> (Vec<usize>, Vec<f64>, f64) {
        let reached: Vec<usize> = self.msgs.iter().map(|g| g.reachable_index(counts)).collect();
        let scores: Vec<f64> =
            self.msgs.iter().zip(&reached).map(|(g, &r)| g.scores()[r]).collect();
        let avg = scores.iter().sum::<f64>() / scores.len() as f64;
        (reached, scores, avg)
    }

    fn result(&self, method: &str, counts: LevelCounts, seed: Option<u64>) -> OptimizerResult {
        let (reached, per_instance_scores, avg_score) = self.evaluate(&counts);
        OptimizerResult {
            method: method.into(),
            schedule: runs_of(self.msgs[0].temps(), &counts),
            length: counts.iter().sum(),
            counts,
            reached,
            per_instance_scores,
            avg_score,
            seed,
        }
    }
}

pub fn load_family(bytes: &[u8]) -> Result<InstanceFamily> {
    Ok(serde_json::from_slice(bytes)?)
}

pub fn save_family(family: &InstanceFamily) -> Vec<u8> {
    serde_json::to_vec_pretty(family).expect("family serializes")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimizerResult {
    pub method: String,
    pub schedule: RunLengthSchedule,
    pub counts: LevelCounts,
    pub length: u64,
    pub reached: Vec<usize>,
    pub per_instance_scores: Vec<f64>,
    pub avg_score: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl OptimizerResult {
    pub const CSV_HEADER: &'static str = "method,length,avg_score,counts,reached";

    pub fn to_csv(&self) -> String {
        let join = |v: Vec<String>| v.join(" ");
        format!(
            "{},{},{},{},{}",
            self.method,
            self.length,
            crate::report::fmt_num(self.avg_score),
            join(self.counts.iter().map(u64::to_string).collect()),
            join(self.reached.iter().map(usize::to_string).collect()),
        )
    }
}

/// Orders candidates: larger score first, then shorter, then lex-larger counts.
fn better(a: (f64, u64, &[u64]), b: (f64, u64, &[u64])) -> bool {
    match a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal) {
        Ordering::Greater => return true,
        Ordering::Less => return false,
        Ordering::Equal => {}
    }
    match a.1.cmp(&b.1) {
        Ordering::Less => return true,
        Ordering::Greater => return false,
        Ordering::Equal => {}
    }
    a.2 > b.2
}

/// Single schedule for instances that share the same path structure: an
/// edge `(i, j)` is usable only if every instance has it, with the largest
/// of their lengths. Returns the cheapest path to the furthest node whose
/// cost fits in `m`.
pub fn identical_paths(family: &InstanceFamily) -> OptimizerResult {
    let k = family.k();
    let joint = |i: usize, j: usize| -> Option<u64> {
        family
            .msgs
            .iter()
            .map(|g| g.effective_reps(i, j))
            .try_fold(0u64, |acc, r| r.map(|r| acc.max(r)))
    };
    // best[j] = (cost, counts) of the preferred path from v_0 to v_j.
    let mut best: Vec<Option<(u64, LevelCounts)>> = vec![None; k + 1];
    best[0] = Some((0, vec![0; k]));
    for j in 1..=k {
        for i in 0..j {
            let (Some((cost, counts)), Some(r)) = (&best[i], joint(i, j)) else {
                continue;
            };
            let cand_cost = cost + r;
            let mut cand = counts.clone();
            cand[j - 1] = r;
            let replace = match &best[j] {
                None => true,
                Some((c, v)) => cand_cost < *c || (cand_cost == *c && cand > *v),
            };
            if replace {
                best[j] = Some((cand_cost, cand));
            }
        }
    }
    let counts = (0..=k)
        .rev()
        .find_map(|q| best[q].as_ref().filter(|(c, _)| *c <= family.m).map(|(_, v)| v.clone()))
        .unwrap_or_else(|| vec![0; k]);
    family.result("identical", counts, None)
}

/// Exact optimum for instances with different graphs, by a shortest-path
/// search over tuples of per-instance positions. Fails if `(K+1)^n` exceeds
/// `state_cap`.
pub fn separate_paths_exact(family: &InstanceFamily, state_cap: u64) -> Result<OptimizerResult> {
    let k = family.k();
    let n = family.n();
    let states = (k as u64 + 1).checked_pow(n as u32).unwrap_or(u64::MAX);
    if states > state_cap {
        return Err(Error::SizeLimit(format!(
            "{states} product states exceed the cap of {state_cap}; use the lp-round or greedy method"
        )));
    }
    let m = family.m;
    let mut layer: HashMap<Vec<usize>, (u64, LevelCounts)> = HashMap::new();
    layer.insert(vec![0; n], (0, vec![0; k]));
    for j in 1..=k {
        // Only the edge lengths into level j are meaningful block sizes.
        let mut sizes: Vec<u64> = family
            .msgs
            .iter()
            .flat_map(|g| g.edges_into(j).map(|e| e.reps))
            .filter(|&r| r <= m)
            .collect();
        sizes.push(0);
        sizes.sort_unstable();
        sizes.dedup();
        let mut next: HashMap<Vec<usize>, (u64, LevelCounts)> = HashMap::new();
        let mut entries: Vec<_> = layer.into_iter().collect();
        entries.sort();
        for (state, (len, counts)) in entries {
            for &c in &sizes {
                if len + c > m {
                    break;
                }
                let to: Vec<usize> = state
                    .iter()
                    .zip(&family.msgs)
                    .map(|(&x, g)| {
                        if g.edges_into(j).any(|e| e.from <= x && e.reps <= c) {
                            j
                        } else {
                            x
                        }
                    })
                    .collect();
                let mut cand = counts.clone();
                cand[j - 1] = c;
                let cand_len = len + c;
                let replace = match next.get(&to) {
                    None => true,
                    Some((l, v)) => cand_len < *l || (cand_len == *l && cand > *v),
                };
                if replace {
                    next.insert(to, (cand_len, cand));
                }
            }
        }
        layer = next;
    }
    let mut best: Option<(f64, u64, LevelCounts)> = None;
    let mut finals: Vec<_> = layer.into_values().collect();
    finals.sort();
    for (len, counts) in finals {
        let (_, _, avg) = family.evaluate(&counts);
        let take = match &best {
            None => true,
            Some((s, l, v)) => better((avg, len, &counts), (*s, *l, v)),
        };
        if take {
            best = Some((avg, len, counts));
        }
    }
    Ok(family.result("separate", best.expect("empty schedule is always feasible").2, None))
}

/// Limits for [`brute_force_optimal`].
#[derive(Clone, Copy, Debug)]
pub struct BruteCaps {
    pub max_k: usize,
    pub max_m: u64,
    pub max_n: usize,
}

impl Default for BruteCaps {
    fn default() -> Self {
        BruteCaps { max_k: 5, max_m: 12, max_n: 4 }
    }
}

/// Enumerates every count vector with total at most `m`, scoring each with
/// the sequence-level reachability program.
pub fn brute_force_optimal(family: &InstanceFamily, caps: BruteCaps) -> Result<OptimizerResult> {
    let (k, n, m) = (family.k(), family.n(), family.m);
    if k > caps.max_k || m > caps.max_m || n > caps.max_n {
        return Err(Error::SizeLimit(format!(
            "brute force is limited to K <= {}, m <= {}, n <= {} (got K = {k}, m = {m}, n = {n})",
            caps.max_k, caps.max_m, caps.max_n
        )));
    }
    let score = |counts: &[u64]| -> f64 {
        let seq = index_sequence(counts);
        let total: f64 =
            family.msgs.iter().map(|g| g.scores()[g.reachable_index_seq(&seq)]).sum();
        total / n as f64
    };
    let mut counts = vec![0u64; k];
    let mut best = (score(&counts), 0u64, counts.clone());
    // Odometer over vectors with bounded sum.
    loop {
        let mut pos = k;
        loop {
            if pos == 0 {
                return Ok(family.result("brute", best.2, None));
            }
            pos -= 1;
            counts[pos] += 1;
            if counts.iter().sum::<u64>() <= m {
                break;
            }
            counts[pos] = 0;
        }
        let len = counts.iter().sum();
        let s = score(&counts);
        if better((s, len, &counts), (best.0, best.1, &best.2)) {
            best = (s, len, counts.clone());
        }
    }
}

/// Fractional solution of the covering program over elements `(j, l)`:
/// "`l` copies of level `j`", with cost `l`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FractionalCover {
    pub k: usize,
    pub m: u64,
    /// Indexed by [`FractionalCover::index`].
    pub weights: Vec<f64>,
    pub objective: f64,
    /// Whether the optimum fits the budget `m`.
    pub within_budget: bool,
}

impl FractionalCover {
    pub fn index(&self, j: usize, l: u64) -> usize {
        element_index(self.m, j, l)
    }

    pub fn weight(&self, j: usize, l: u64) -> f64 {
        self.weights[self.index(j, l)]
    }

    /// `(j, l, weight)` for every element with positive weight.
    pub fn support(&self) -> Vec<(usize, u64, f64)> {
        let mut out = Vec::new();
        for j in 1..=self.k {
            for l in 1..=self.m {
                let w = self.weight(j, l);
                if w > 1e-12 {
                    out.push((j, l, w));
                }
            }
        }
        out
    }
}

fn element_index(m: u64, j: usize, l: u64) -> usize {
    (j - 1) * m as usize + (l - 1) as usize
}

/// Elements that satisfy level `i` of instance `k`: `(b, l)` for every
/// crossing edge `(a, b, r)` and `r <= l <= m`.
fn covering_elements(g: &MonotoneStationaryGraph, i: usize, m: u64) -> Vec<(usize, u64)> {
    let mut out: Vec<(usize, u64)> = g
        .crossing_edges(i)
        .into_iter()
        .flat_map(|e| (e.reps..=m).map(move |l| (e.to, l)))
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

fn check_coverable(family: &InstanceFamily) -> Result<()> {
    for (instance, g) in family.msgs.iter().enumerate() {
        for level in 1..=family.k() {
            if covering_elements(g, level, family.m).is_empty() {
                return Err(Error::Infeasible { instance, level });
            }
        }
    }
    Ok(())
}

/// Minimizes total cost subject to every (instance, level) pair being
/// covered, with weights in `[0, 1]`.
pub fn covering_lp_solve(family: &InstanceFamily) -> Result<FractionalCover> {
    check_coverable(family)?;
    let (k, m) = (family.k(), family.m);
    let vars = k * m as usize;
    let mut objective = vec![0.0; vars];
    for j in 1..=k {
        for l in 1..=m {
            objective[element_index(m, j, l)] = l as f64;
        }
    }
    let mut lp = LinearProgram::new(objective);
    for g in &family.msgs {
        for i in 1..=k {
            let mut row = vec![0.0; vars];
            for (b, l) in covering_elements(g, i, m) {
                row[element_index(m, b, l)] = 1.0;
            }
            lp.add(row, Relation::Ge, 1.0);
        }
    }
    for v in 0..vars {
        let mut row = vec![0.0; vars];
        row[v] = 1.0;
        lp.add(row, Relation::Le, 1.0);
    }
    match simplex::solve(&lp)? {
        LpOutcome::Optimal { x, objective } => Ok(FractionalCover {
            k,
            m,
            weights: x.into_iter().map(|w| w.clamp(0.0, 1.0)).collect(),
            objective,
            within_budget: objective <= m as f64 + 1e-7,
        }),
        LpOutcome::Infeasible => Err(Error::Numerical("covering program reported infeasible".into())),
        LpOutcome::Unbounded => Err(Error::Numerical("covering program reported unbounded".into())),
    }
}

/// Default rounding factor `100 (ln K + ln n)`.
pub fn default_alpha(k: usize, n: usize) -> f64 {
    100.0 * ((k as f64).ln() + (n as f64).ln())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundingResult {
    pub result: OptimizerResult,
    pub alpha: f64,
    /// Per instance, checked with the crossing-cover test.
    pub acceptable: Vec<bool>,
    pub all_acceptable: bool,
    /// `alpha * m`, the bound on the expected length.
    pub alpha_m: f64,
    /// `alpha * objective`, a tighter bound on the expected length.
    pub alpha_lp: f64,
}

/// Keeps every element independently with probability `min(alpha c_e, 1)`
/// and plays, per level, the largest kept repetition count.
pub fn lp_round(
    family: &InstanceFamily,
    cover: &FractionalCover,
    alpha: f64,
    seed: u64,
) -> Result<RoundingResult> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
    }
    let mut r = rng::rng(seed);
    let mut counts = vec![0u64; cover.k];
    for j in 1..=cover.k {
        for l in 1..=cover.m {
            let p = (alpha * cover.weight(j, l)).min(1.0);
            if p > 0.0 && (p >= 1.0 || r.random::<f64>() < p) {
                counts[j - 1] = counts[j - 1].max(l);
            }
        }
    }
    let acceptable: Vec<bool> = family.msgs.iter().map(|g| g.is_acceptable(&counts)).collect();
    Ok(RoundingResult {
        all_acceptable: acceptable.iter().all(|&a| a),
        acceptable,
        alpha,
        alpha_m: alpha * cover.m as f64,
        alpha_lp: alpha * cover.objective,
        result: family.result("lp-round", counts, Some(seed)),
    })
}

/// Cost-ratio greedy for the covering program. Raising level `j` from its
/// current count `c` to `l` costs `l - c`.
pub fn greedy_cover(family: &InstanceFamily) -> Result<OptimizerResult> {
    check_coverable(family)?;
    let (k, m) = (family.k(), family.m);
    let pairs: Vec<(usize, usize)> =
        (0..family.n()).flat_map(|g| (1..=k).map(move |i| (g, i))).collect();
    let covered = |counts: &[u64], (g, i): (usize, usize)| {
        family.msgs[g].crossing_edges(i).iter().any(|e| e.reps <= counts[e.to - 1])
    };
    let mut counts = vec![0u64; k];
    loop {
        let open: Vec<(usize, usize)> =
            pairs.iter().copied().filter(|&p| !covered(&counts, p)).collect();
        if open.is_empty() {
            break;
        }
        let mut best: Option<(f64, u64, usize, u64)> = None;
        for j in 1..=k {
            for l in counts[j - 1] + 1..=m {
                let mut trial = counts.clone();
                trial[j - 1] = l;
                let gain = open.iter().filter(|&&p| covered(&trial, p)).count();
                if gain == 0 {
                    continue;
                }
                let cost = l - counts[j - 1];
                let ratio = gain as f64 / cost as f64;
                let take = match best {
                    None => true,
                    Some((br, bc, _, _)) => ratio > br + 1e-12 || (ratio >= br - 1e-12 && cost < bc),
                };
                if take {
                    best = Some((ratio, cost, j, l));
                }
            }
        }
        let (_, _, j, l) = best.expect("coverable family always has a useful element");
        counts[j - 1] = l;
    }
    Ok(family.result("greedy", counts, None))
}

/// `H(n) = 1 + 1/2 + ... + 1/n`.
pub fn harmonic(n: usize) -> f64 {
    (1..=n).map(|i| 1.0 / i as f64).sum()
}

/// Random family of `n` models over `k` shared levels.
pub fn random_family<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    max_reps: u64,
    m: u64,
    rng: &mut R,
) -> InstanceFamily {
    let p = RandomMsgParams { k, max_reps, edge_prob: 0.4, min_gap: 0.0 };
    let msgs = (0..n).map(|_| random_msg(&p, rng)).collect();
    InstanceFamily::new(m, msgs).expect("shared levels")
}

/// Random family whose budget is the greedy cover length, so the covering
/// program is feasible within `m`.
pub fn random_feasible_family<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    max_reps: u64,
    rng: &mut R,
) -> InstanceFamily {
    let loose = random_family(n, k, max_reps, max_reps, rng);
    let g = greedy_cover(&loose).expect("chain edges keep every level coverable");
    loose.with_budget(g.length.max(max_reps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stationary_model::fixtures::{diverging_pair, five_level};

    #[test]
    fn diverging_pair_schedules() {
        let f = InstanceFamily::new(8, diverging_pair().to_vec()).unwrap();
        let r = identical_paths(&f);
        assert_eq!(r.counts, vec![4, 4]);
        assert_eq!(r.reached, vec![2, 2]);
        let r = separate_paths_exact(&f.with_budget(5), 1 << 20).unwrap();
        assert_eq!(r.counts, vec![1, 4]);
        assert_eq!(r.reached, vec![2, 2]);
        let b = brute_force_optimal(&f.with_budget(5), BruteCaps::default()).unwrap();
        assert_eq!(b.counts, vec![1, 4]);
    }

    #[test]
    fn five_level_optimum() {
        let f = InstanceFamily::new(9, vec![five_level()]).unwrap();
        for r in [
            brute_force_optimal(&f, BruteCaps::default()).unwrap(),
            separate_paths_exact(&f, 1 << 20).unwrap(),
            identical_paths(&f),
        ] {
            assert_eq!(r.counts, vec![3, 0, 0, 0, 6], "{}", r.method);
            assert_eq!(r.reached, vec![5]);
        }
    }

    #[test]
    fn empty_budget() {
        let f = InstanceFamily::new(0, vec![five_level()]).unwrap();
        let b = brute_force_optimal(&f, BruteCaps::default()).unwrap();
        assert_eq!(b.counts, vec![0; 5]);
        assert_eq!(b.avg_score, 0.0);
        let r = identical_paths(&f);
        assert_eq!(r.length, 0);
    }

    #[test]
    fn lp_on_five_level_model() {
        let f = InstanceFamily::new(9, vec![five_level()]).unwrap();
        let c = covering_lp_solve(&f).unwrap();
        assert!(c.objective <= 9.0 + 1e-9);
        assert!(c.within_budget);
        let g = greedy_cover(&f).unwrap();
        assert!(c.objective <= g.length as f64 + 1e-9);
        assert!(g.length as f64 <= (harmonic(5)) * 9.0);
    }

    #[test]
    fn infeasible_level_is_named() {
        let f = InstanceFamily::new(2, vec![five_level()]).unwrap();
        match covering_lp_solve(&f) {
            Err(Error::Infeasible { instance: 0, level }) => assert!(level >= 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn certain_rounding() {
        let f = InstanceFamily::new(9, vec![five_level()]).unwrap();
        let mut c = covering_lp_solve(&f).unwrap();
        c.weights.iter_mut().for_each(|w| *w = 0.0);
        let i = c.index(5, 6);
        c.weights[i] = 1.0;
        let r = lp_round(&f, &c, 1.0, 1).unwrap();
        assert_eq!(r.result.counts, vec![0, 0, 0, 0, 6]);
    }

    #[test]
    fn caps_are_enforced() {
        let f = InstanceFamily::new(13, vec![five_level()]).unwrap();
        assert!(matches!(brute_force_optimal(&f, BruteCaps::default()), Err(Error::SizeLimit(_))));
        let many = InstanceFamily::new(3, vec![five_level(); 4]).unwrap();
        assert!(separate_paths_exact(&many, 100).is_err());
    }

    #[test]
    fn family_json_round_trip() {
        let f = InstanceFamily::new(8, diverging_pair().to_vec()).unwrap();
        assert_eq!(load_family(&save_family(&f)).unwrap(), f);
    }
}

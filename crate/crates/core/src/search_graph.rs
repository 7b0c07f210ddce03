//! Explicit search graphs, cooling schedules and the downhill acceptance rule.
//!
//! Energies are positive integers and *higher is better*: a move to a node of
//! higher or equal energy is always taken, a move that loses `delta` energy is
//! taken with probability `exp(-delta / t)`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A positive temperature, or the `INF` sentinel that accepts every move.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Temperature(f64);

impl Temperature {
    pub const INF: Temperature = Temperature(f64::INFINITY);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() || value <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "temperature must be positive, got {value}"
            )));
        }
        Ok(Temperature(value))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn is_inf(self) -> bool {
        self.0.is_infinite()
    }
}

impl fmt::Display for Temperature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_inf() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for Temperature {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_inf() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Temperature {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Name(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Temperature::new(v).map_err(serde::de::Error::custom),
            Repr::Name(s) if s.eq_ignore_ascii_case("inf") => Ok(Temperature::INF),
            Repr::Name(s) => Err(serde::de::Error::custom(format!(
                "expected a number or \"inf\", got {s:?}"
            ))),
        }
    }
}

/// Probability that a move losing `delta_e` energy is accepted at temperature `t`.
#[inline]
pub fn accept_probability(delta_e: u64, t: Temperature) -> f64 {
    if delta_e == 0 || t.is_inf() {
        1.0
    } else {
        (-(delta_e as f64) / t.value()).exp()
    }
}

/// A finite non-increasing sequence of temperatures.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct CoolingSchedule {
    temps: Vec<Temperature>,
}

impl CoolingSchedule {
    pub fn new(temps: Vec<Temperature>) -> Result<Self> {
        if let Some(i) = temps.windows(2).position(|w| w[1] > w[0]) {
            return Err(Error::InvalidArgument(format!(
                "schedule must be non-increasing: entry {} ({}) exceeds entry {} ({})",
                i + 1,
                temps[i + 1],
                i,
                temps[i]
            )));
        }
        Ok(CoolingSchedule { temps })
    }

    /// Sorts an arbitrary multiset of temperatures into canonical order.
    pub fn from_multiset(mut temps: Vec<Temperature>) -> Self {
        temps.sort_by(|a, b| b.0.total_cmp(&a.0));
        CoolingSchedule { temps }
    }

    pub fn constant(t: Temperature, len: usize) -> Self {
        CoolingSchedule { temps: vec![t; len] }
    }

    pub fn empty() -> Self {
        CoolingSchedule::default()
    }

    pub fn temps(&self) -> &[Temperature] {
        &self.temps
    }

    pub fn len(&self) -> usize {
        self.temps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.temps.is_empty()
    }

    /// Appends `other`; fails if the result would not be non-increasing.
    pub fn concat(&self, other: &CoolingSchedule) -> Result<Self> {
        let mut temps = self.temps.clone();
        temps.extend_from_slice(&other.temps);
        CoolingSchedule::new(temps)
    }

    pub fn to_runs(&self) -> RunLengthSchedule {
        let mut runs: Vec<(Temperature, u64)> = Vec::new();
        for &t in &self.temps {
            match runs.last_mut() {
                Some((last, n)) if *last == t => *n += 1,
                _ => runs.push((t, 1)),
            }
        }
        RunLengthSchedule { runs }
    }
}

/// Compressed schedule: strictly decreasing temperatures with repeat counts.
#[derive(Clone, Debug, PartialEq, Default, Serialize)]
pub struct RunLengthSchedule {
    runs: Vec<(Temperature, u64)>,
}

impl RunLengthSchedule {
    pub fn new(runs: Vec<(Temperature, u64)>) -> Result<Self> {
        if runs.iter().any(|&(_, n)| n == 0) {
            return Err(Error::InvalidArgument("run counts must be at least 1".into()));
        }
        if runs.windows(2).any(|w| w[1].0 >= w[0].0) {
            return Err(Error::InvalidArgument(
                "run temperatures must be strictly decreasing".into(),
            ));
        }
        Ok(RunLengthSchedule { runs })
    }

    pub fn runs(&self) -> &[(Temperature, u64)] {
        &self.runs
    }

    pub fn total_len(&self) -> u64 {
        self.runs.iter().map(|&(_, n)| n).sum()
    }

    pub fn expand(&self) -> CoolingSchedule {
        let mut temps = Vec::with_capacity(self.total_len() as usize);
        for &(t, n) in &self.runs {
            temps.extend(std::iter::repeat_n(t, n as usize));
        }
        CoolingSchedule { temps }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ScheduleRepr {
    Temps { temps: Vec<Temperature> },
    Runs { runs: Vec<(Temperature, u64)> },
}

/// Parses `{"temps": [...]}` or `{"runs": [[t, count], ...]}`.
pub fn load_schedule(bytes: &[u8]) -> Result<CoolingSchedule> {
    let repr: ScheduleRepr = serde_json::from_slice(bytes)?;
    match repr {
        ScheduleRepr::Temps { temps } => CoolingSchedule::new(temps),
        ScheduleRepr::Runs { runs } => Ok(RunLengthSchedule::new(runs)?.expand()),
    }
}

pub fn save_schedule(schedule: &CoolingSchedule) -> Vec<u8> {
    #[derive(Serialize)]
    struct Out<'a> {
        temps: &'a [Temperature],
    }
    serde_json::to_vec(&Out { temps: &schedule.temps }).expect("schedule serializes")
}

pub fn save_runs(schedule: &RunLengthSchedule) -> Vec<u8> {
    #[derive(Serialize)]
    struct Out<'a> {
        runs: &'a [(Temperature, u64)],
    }
    serde_json::to_vec(&Out { runs: &schedule.runs }).expect("schedule serializes")
}

/// Wire format of a search graph, with string node ids.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub e_max: i64,
    pub nodes: Vec<NodeSpec>,
    pub edges: Vec<(String, String)>,
    #[serde(default)]
    pub solutions: Vec<String>,
    pub initial: InitialSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub id: String,
    pub energy: i64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialSpec {
    Uniform,
    Explicit(BTreeMap<String, f64>),
}

impl Serialize for InitialSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            InitialSpec::Uniform => s.serialize_str("uniform"),
            InitialSpec::Explicit(m) => m.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for InitialSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Name(String),
            Map(BTreeMap<String, f64>),
        }
        match Repr::deserialize(d)? {
            Repr::Name(s) if s == "uniform" => Ok(InitialSpec::Uniform),
            Repr::Name(s) => Err(serde::de::Error::custom(format!(
                "initial must be \"uniform\" or a map, got {s:?}"
            ))),
            Repr::Map(m) => Ok(InitialSpec::Explicit(m)),
        }
    }
}

/// One broken invariant of a [`GraphSpec`].
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    EmptyGraph,
    BadEmax(i64),
    DuplicateNode(String),
    EnergyOutOfRange { node: String, energy: i64, e_max: i64 },
    UnknownEdgeEndpoint { index: usize, from: String, to: String },
    UnknownSolution(String),
    DuplicateSolution(String),
    UnknownInitialNode(String),
    NegativeInitialProbability { node: String, prob: f64 },
    InitialSum(f64),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyGraph => write!(f, "graph has no nodes"),
            Violation::BadEmax(e) => write!(f, "e_max must be at least 1, got {e}"),
            Violation::DuplicateNode(id) => write!(f, "duplicate node id {id:?}"),
            Violation::EnergyOutOfRange { node, energy, e_max } => write!(
                f,
                "energy out of range: node {node:?} has energy {energy}, allowed 1..={e_max}"
            ),
            Violation::UnknownEdgeEndpoint { index, from, to } => {
                write!(f, "edge {index} ({from:?} -> {to:?}) references an undeclared node")
            }
            Violation::UnknownSolution(id) => write!(f, "solution {id:?} is not a declared node"),
            Violation::DuplicateSolution(id) => write!(f, "solution {id:?} listed twice"),
            Violation::UnknownInitialNode(id) => {
                write!(f, "initial distribution references undeclared node {id:?}")
            }
            Violation::NegativeInitialProbability { node, prob } => {
                write!(f, "initial probability of {node:?} is negative ({prob})")
            }
            Violation::InitialSum(s) => write!(f, "initial distribution sums to {s}, expected 1"),
        }
    }
}

/// Checks every invariant of a graph description and reports all violations.
pub fn validate(spec: &GraphSpec) -> Vec<Violation> {
    let mut out = Vec::new();
    if spec.nodes.is_empty() {
        out.push(Violation::EmptyGraph);
    }
    if spec.e_max < 1 {
        out.push(Violation::BadEmax(spec.e_max));
    }
    let mut ids = HashSet::new();
    for n in &spec.nodes {
        if !ids.insert(n.id.as_str()) {
            out.push(Violation::DuplicateNode(n.id.clone()));
        }
        if n.energy < 1 || n.energy > spec.e_max {
            out.push(Violation::EnergyOutOfRange {
                node: n.id.clone(),
                energy: n.energy,
                e_max: spec.e_max,
            });
        }
    }
    for (index, (from, to)) in spec.edges.iter().enumerate() {
        if !ids.contains(from.as_str()) || !ids.contains(to.as_str()) {
            out.push(Violation::UnknownEdgeEndpoint {
                index,
                from: from.clone(),
                to: to.clone(),
            });
        }
    }
    let mut seen = HashSet::new();
    for s in &spec.solutions {
        if !ids.contains(s.as_str()) {
            out.push(Violation::UnknownSolution(s.clone()));
        } else if !seen.insert(s.as_str()) {
            out.push(Violation::DuplicateSolution(s.clone()));
        }
    }
    if let InitialSpec::Explicit(map) = &spec.initial {
        let mut sum = 0.0;
        for (id, &p) in map {
            if !ids.contains(id.as_str()) {
                out.push(Violation::UnknownInitialNode(id.clone()));
            }
            if !(p >= 0.0) {
                out.push(Violation::NegativeInitialProbability { node: id.clone(), prob: p });
            }
            sum += p;
        }
        if (sum - 1.0).abs() > 1e-9 {
            out.push(Violation::InitialSum(sum));
        }
    }
    out
}

/// A validated, index-based search graph. Immutable after construction.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchGraph {
    ids: Vec<String>,
    energy: Vec<u64>,
    e_max: u64,
    edges: Vec<(usize, usize)>,
    out: Vec<Vec<usize>>,
    solutions: Vec<usize>,
    is_solution: Vec<bool>,
    initial: Initial,
}

#[derive(Clone, Debug, PartialEq)]
enum Initial {
    Uniform,
    /// Entries in id order, as given.
    Explicit(Vec<(usize, f64)>),
}

impl SearchGraph {
    pub fn from_spec(spec: &GraphSpec) -> Result<Self> {
        let violations = validate(spec);
        if !violations.is_empty() {
            return Err(Error::Validation(violations));
        }
        let index: HashMap<&str, usize> = spec
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id.as_str(), i))
            .collect();
        let n = spec.nodes.len();
        let edges: Vec<(usize, usize)> = spec
            .edges
            .iter()
            .map(|(a, b)| (index[a.as_str()], index[b.as_str()]))
            .collect();
        let mut out = vec![Vec::new(); n];
        for &(a, b) in &edges {
            out[a].push(b);
        }
        let solutions: Vec<usize> = spec.solutions.iter().map(|s| index[s.as_str()]).collect();
        let mut is_solution = vec![false; n];
        for &s in &solutions {
            is_solution[s] = true;
        }
        let initial = match &spec.initial {
            InitialSpec::Uniform => Initial::Uniform,
            InitialSpec::Explicit(m) => {
                Initial::Explicit(m.iter().map(|(id, &p)| (index[id.as_str()], p)).collect())
            }
        };
        Ok(SearchGraph {
            ids: spec.nodes.iter().map(|n| n.id.clone()).collect(),
            energy: spec.nodes.iter().map(|n| n.energy as u64).collect(),
            e_max: spec.e_max as u64,
            edges,
            out,
            solutions,
            is_solution,
            initial,
        })
    }

    pub fn to_spec(&self) -> GraphSpec {
        GraphSpec {
            e_max: self.e_max as i64,
            nodes: self
                .ids
                .iter()
                .zip(&self.energy)
                .map(|(id, &e)| NodeSpec { id: id.clone(), energy: e as i64 })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|&(a, b)| (self.ids[a].clone(), self.ids[b].clone()))
                .collect(),
            solutions: self.solutions.iter().map(|&s| self.ids[s].clone()).collect(),
            initial: match &self.initial {
                Initial::Uniform => InitialSpec::Uniform,
                Initial::Explicit(v) => InitialSpec::Explicit(
                    v.iter().map(|&(i, p)| (self.ids[i].clone(), p)).collect(),
                ),
            },
        }
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn id(&self, node: usize) -> &str {
        &self.ids[node]
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    pub fn energy(&self, node: usize) -> u64 {
        self.energy[node]
    }

    pub fn e_max(&self) -> u64 {
        self.e_max
    }

    /// Out-edge targets in declaration order; parallel edges repeat.
    pub fn out_edges(&self, node: usize) -> &[usize] {
        &self.out[node]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn solutions(&self) -> &[usize] {
        &self.solutions
    }

    pub fn is_solution(&self, node: usize) -> bool {
        self.is_solution[node]
    }

    /// Initial distribution as a dense probability vector.
    pub fn initial_distribution(&self) -> Vec<f64> {
        let n = self.node_count();
        match &self.initial {
            Initial::Uniform => vec![1.0 / n as f64; n],
            Initial::Explicit(v) => {
                let mut d = vec![0.0; n];
                for &(i, p) in v {
                    d[i] += p;
                }
                d
            }
        }
    }

    /// Energy lost by moving from `from` to `to` (zero for uphill or level moves).
    #[inline]
    pub fn downhill(&self, from: usize, to: usize) -> u64 {
        self.energy[from].saturating_sub(self.energy[to])
    }

    /// Copy of this graph with every solution node turned into a dead end.
    pub fn with_absorbing_solutions(&self) -> SearchGraph {
        let mut g = self.clone();
        g.edges.retain(|&(a, _)| !self.is_solution[a]);
        for &s in &self.solutions {
            g.out[s].clear();
        }
        g
    }
}

/// Incremental construction of a [`SearchGraph`] from code.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    spec_nodes: Vec<NodeSpec>,
    edges: Vec<(usize, usize)>,
    solutions: Vec<usize>,
    initial: Option<Vec<(usize, f64)>>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node(&mut self, id: impl Into<String>, energy: u64) -> usize {
        self.spec_nodes.push(NodeSpec { id: id.into(), energy: energy as i64 });
        self.spec_nodes.len() - 1
    }

    pub fn edge(&mut self, from: usize, to: usize) -> &mut Self {
        self.edges.push((from, to));
        self
    }

    pub fn solution(&mut self, node: usize) -> &mut Self {
        self.solutions.push(node);
        self
    }

    pub fn start_at(&mut self, node: usize) -> &mut Self {
        self.initial = Some(vec![(node, 1.0)]);
        self
    }

    pub fn initial(&mut self, probs: Vec<(usize, f64)>) -> &mut Self {
        self.initial = Some(probs);
        self
    }

    pub fn build(&self) -> Result<SearchGraph> {
        let e_max = self.spec_nodes.iter().map(|n| n.energy).max().unwrap_or(1).max(1);
        self.build_with_emax(e_max as u64)
    }

    pub fn build_with_emax(&self, e_max: u64) -> Result<SearchGraph> {
        let id = |i: usize| self.spec_nodes[i].id.clone();
        let spec = GraphSpec {
            e_max: e_max as i64,
            nodes: self.spec_nodes.clone(),
            edges: self.edges.iter().map(|&(a, b)| (id(a), id(b))).collect(),
            solutions: self.solutions.iter().map(|&s| id(s)).collect(),
            initial: match &self.initial {
                None => InitialSpec::Uniform,
                Some(v) => {
                    let mut m = BTreeMap::new();
                    for &(i, p) in v {
                        *m.entry(id(i)).or_insert(0.0) += p;
                    }
                    InitialSpec::Explicit(m)
                }
            },
        };
        SearchGraph::from_spec(&spec)
    }
}

pub fn load_graph(bytes: &[u8]) -> Result<SearchGraph> {
    let spec: GraphSpec = serde_json::from_slice(bytes)?;
    SearchGraph::from_spec(&spec)
}

pub fn save_graph(graph: &SearchGraph) -> Vec<u8> {
    serde_json::to_vec_pretty(&graph.to_spec()).expect("graph serializes")
}

/// Random graph with energies uniform in `1..=e_max`, `out_degree` uniform
/// targets per node (self-loops excluded), uniform start and the
/// highest-energy nodes as solutions.
pub fn random_graph<R: rand::Rng + ?Sized>(
    n: usize,
    e_max: u64,
    out_degree: usize,
    rng: &mut R,
) -> SearchGraph {
    assert!(n >= 2 && e_max >= 1);
    let mut b = GraphBuilder::new();
    let energies: Vec<u64> = (0..n).map(|_| rng.random_range(1..=e_max)).collect();
    for (i, &e) in energies.iter().enumerate() {
        b.node(format!("n{i}"), e);
    }
    for u in 0..n {
        for _ in 0..out_degree {
            let mut v = rng.random_range(0..n - 1);
            if v >= u {
                v += 1;
            }
            b.edge(u, v);
        }
    }
    let best = *energies.iter().max().unwrap();
    for (i, &e) in energies.iter().enumerate() {
        if e == best {
            b.solution(i);
        }
    }
    b.build_with_emax(e_max).expect("random graph is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_node() -> GraphSpec {
        serde_json::from_str(
            r#"{"e_max": 3, "nodes": [{"id":"u","energy":2},{"id":"v","energy":1}],
                "edges": [["u","v"]], "solutions": ["v"], "initial": {"u": 1.0}}"#,
        )
        .unwrap()
    }

    #[test]
    fn acceptance_at_half() {
        let x = 7u64;
        let t = Temperature::new(x as f64 / std::f64::consts::LN_2).unwrap();
        assert!((accept_probability(x, t) - 0.5).abs() < 1e-12);
        assert_eq!(accept_probability(0, Temperature::new(7.3).unwrap()), 1.0);
        assert_eq!(accept_probability(5, Temperature::INF), 1.0);
    }

    #[test]
    fn acceptance_monotone() {
        let ts = [0.1, 0.5, 1.0, 3.0, 10.0];
        for d in 0..6u64 {
            for w in ts.windows(2) {
                let a = accept_probability(d, Temperature::new(w[0]).unwrap());
                let b = accept_probability(d, Temperature::new(w[1]).unwrap());
                assert!(a <= b);
                assert!((0.0..=1.0).contains(&a));
            }
        }
        let t = Temperature::new(2.0).unwrap();
        assert!(accept_probability(3, t) <= accept_probability(2, t));
    }

    #[test]
    fn valid_graph_has_no_violations() {
        assert!(validate(&two_node()).is_empty());
    }

    #[test]
    fn zero_energy_is_reported() {
        let mut s = two_node();
        s.nodes[1].energy = 0;
        let v = validate(&s);
        assert_eq!(v.len(), 1);
        assert!(v[0].to_string().contains("energy out of range"));
    }

    #[test]
    fn undeclared_edge_target_is_named() {
        let mut s = two_node();
        s.edges.push(("u".into(), "w".into()));
        let v = validate(&s);
        assert_eq!(
            v,
            vec![Violation::UnknownEdgeEndpoint { index: 1, from: "u".into(), to: "w".into() }]
        );
    }

    #[test]
    fn initial_must_sum_to_one() {
        let mut s = two_node();
        s.initial = InitialSpec::Explicit([("u".to_string(), 0.4)].into_iter().collect());
        assert!(matches!(validate(&s)[..], [Violation::InitialSum(_)]));
    }

    #[test]
    fn malformed_json_is_a_parse_error() {
        let err = load_graph(b"{\"e_max\": 3, \"nodes\": [").unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
    }

    #[test]
    fn invalid_json_graph_lists_violations() {
        let err = load_graph(
            br#"{"e_max": 2, "nodes": [{"id":"a","energy":5}], "edges": [["a","b"]],
                "solutions": ["c"], "initial": "uniform"}"#,
        )
        .unwrap_err();
        match err {
            Error::Validation(v) => assert_eq!(v.len(), 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn clique_plus_path_round_trips() {
        let mut b = GraphBuilder::new();
        let clique: Vec<usize> = (0..4).map(|i| b.node(format!("c{i}"), 1 + i as u64)).collect();
        for &a in &clique {
            for &c in &clique {
                if a != c {
                    b.edge(a, c);
                }
            }
        }
        let mut prev = clique[3];
        for i in 0..3 {
            let p = b.node(format!("p{i}"), 5 + i);
            b.edge(prev, p).edge(prev, p).edge(p, prev);
            prev = p;
        }
        b.solution(prev);
        let g = b.build().unwrap();
        let bytes = save_graph(&g);
        let back = load_graph(&bytes).unwrap();
        assert_eq!(back, g);
        assert_eq!(save_graph(&back), bytes);
    }

    #[test]
    fn schedule_json_forms() {
        let s = load_schedule(br#"{"temps": [3.0, "inf", 1.0]}"#);
        assert!(s.is_err(), "inf after a finite value is increasing");
        let s = load_schedule(br#"{"temps": ["inf", 3.0, 3.0, 1.0]}"#).unwrap();
        assert_eq!(s.len(), 4);
        let r = load_schedule(br#"{"runs": [["inf", 1], [3.0, 2], [1.0, 1]]}"#).unwrap();
        assert_eq!(r, s);
        assert_eq!(load_schedule(&save_schedule(&s)).unwrap(), s);
        assert_eq!(load_schedule(&save_runs(&s.to_runs())).unwrap(), s);
    }

    #[test]
    fn absorbing_copy_drops_solution_edges() {
        let mut b = GraphBuilder::new();
        let u = b.node("u", 1);
        let v = b.node("v", 2);
        b.edge(u, v).edge(v, u).solution(v).start_at(u);
        let g = b.build().unwrap().with_absorbing_solutions();
        assert!(g.out_edges(v).is_empty());
        assert_eq!(g.out_edges(u), &[v]);
    }
}

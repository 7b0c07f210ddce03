//! Two-path gadgets whose traversal requires a temperature close to one
//! specific value `tau`, and families of such gadgets tuned to widely
//! separated temperatures.
//!
//! A gadget for drop size `x` (so `tau = x / ln 2` accepts a drop of `x` with
//! probability 1/2) is laid out as
//!
//! ```text
//! start -> u_0 -> u_1 -> ... -> u_{w-1} -> l_{w-1} -> ... -> l_1 -> l_0 -> goal
//! ```
//!
//! Both paths carry energies `0, x, 2x, ..., (w-2)x, wx` (plus an offset).
//! Interior path nodes have two edges to their left neighbour and one to the
//! right one, so the walk climbs the upper path best when cold and descends
//! the lower path best when hot.

use rand::seq::index::sample;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng;
use crate::sa_engine::{exact_score, ScoreMode};
use crate::search_graph::{CoolingSchedule, GraphBuilder, SearchGraph, Temperature};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GadgetSpec {
    /// Energy drop between neighbouring path nodes.
    pub x: u64,
    /// Squared path width scale; each path has `ceil(sqrt(m_prime))` nodes.
    pub m_prime: u64,
    /// Walk constant; the key has `2 c m_prime` steps.
    pub c: u64,
    /// Added to every energy so all energies are at least 1.
    pub offset: u64,
}

impl GadgetSpec {
    pub fn new(x: u64, m_prime: u64, c: u64) -> Self {
        GadgetSpec { x, m_prime, c, offset: 1 }
    }

    pub fn tau(&self) -> Temperature {
        Temperature::new(self.x as f64 / std::f64::consts::LN_2).expect("x is positive")
    }

    pub fn width(&self) -> usize {
        (self.m_prime as f64).sqrt().ceil() as usize
    }

    pub fn key_len(&self) -> u64 {
        2 * self.c * self.m_prime
    }

    fn validate(&self) -> Result<()> {
        if self.x == 0 {
            return Err(Error::InvalidArgument("x must be positive".into()));
        }
        if self.width() < 3 {
            return Err(Error::InvalidArgument(format!(
                "gadget width ceil(sqrt({})) = {} is below 3",
                self.m_prime,
                self.width()
            )));
        }
        Ok(())
    }
}

/// Node indices of a built gadget.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GadgetLayout {
    pub width: usize,
}

impl GadgetLayout {
    pub fn start(&self) -> usize {
        0
    }
    pub fn upper(&self, k: usize) -> usize {
        1 + k
    }
    pub fn lower(&self, k: usize) -> usize {
        1 + self.width + k
    }
    pub fn goal(&self) -> usize {
        2 * self.width + 1
    }
    pub fn node_count(&self) -> usize {
        2 * self.width + 2
    }
}

pub fn build_gadget(spec: &GadgetSpec) -> Result<SearchGraph> {
    spec.validate()?;
    let w = spec.width();
    let energy = |k: usize| -> Result<u64> {
        let level = if k == w - 1 { w as u64 } else { k as u64 };
        level
            .checked_mul(spec.x)
            .and_then(|e| e.checked_add(spec.offset))
            .ok_or_else(|| Error::SizeLimit(format!("gadget energy overflows for x = {}", spec.x)))
    };
    let mut b = GraphBuilder::new();
    let start = b.node("start", spec.offset);
    let upper: Vec<usize> =
        (0..w).map(|k| energy(k).map(|e| b.node(format!("u{k}"), e))).collect::<Result<_>>()?;
    let lower: Vec<usize> =
        (0..w).map(|k| energy(k).map(|e| b.node(format!("l{k}"), e))).collect::<Result<_>>()?;
    let goal = b.node("goal", spec.offset);
    for path in [&upper, &lower] {
        b.edge(path[0], path[1]);
        for k in 1..w - 1 {
            b.edge(path[k], path[k - 1]).edge(path[k], path[k - 1]).edge(path[k], path[k + 1]);
        }
        b.edge(path[w - 1], path[w - 2]).edge(path[w - 1], path[w - 2]);
    }
    b.edge(start, upper[0]);
    b.edge(upper[w - 1], lower[w - 1]);
    b.edge(lower[0], goal);
    b.solution(goal).start_at(start);
    b.build()
}

/// `2 c m_prime` copies of `tau`.
pub fn build_key(spec: &GadgetSpec) -> CoolingSchedule {
    CoolingSchedule::constant(spec.tau(), spec.key_len() as usize)
}

/// Number of `tau` steps allowed by the far schedule: `floor(m' / (4 c ln^2 m'))`.
pub fn near_budget(spec: &GadgetSpec) -> u64 {
    let mp = spec.m_prime as f64;
    (mp / (4.0 * spec.c as f64 * mp.ln().powi(2))).floor() as u64
}

/// Temperature factor `(sqrt(m') + c^2 ln m') / sqrt(m')` separating "near" from "far".
pub fn far_factor(spec: &GadgetSpec) -> f64 {
    let mp = spec.m_prime as f64;
    let c = spec.c as f64;
    (mp.sqrt() + c * c * mp.ln()) / mp.sqrt()
}

/// The most favourable length-`m` schedule that keeps at most
/// [`near_budget`] temperatures near `tau`: hot steps at `tau * far_factor`
/// followed by the allowed `tau` steps.
pub fn far_schedule(spec: &GadgetSpec, m: u64) -> Result<CoolingSchedule> {
    if m < spec.key_len() {
        return Err(Error::InvalidArgument(format!(
            "far schedule needs m >= 2 c m' = {}, got {m}",
            spec.key_len()
        )));
    }
    let near = near_budget(spec).min(m);
    let hot = Temperature::new(spec.tau().value() * far_factor(spec))?;
    CoolingSchedule::constant(hot, (m - near) as usize)
        .concat(&CoolingSchedule::constant(spec.tau(), near as usize))
}

/// Exact probability that the far schedule reaches the goal.
pub fn far_schedule_failure(spec: &GadgetSpec, m: u64) -> Result<f64> {
    let g = build_gadget(spec)?;
    Ok(exact_score(&g, &far_schedule(spec, m)?, ScoreMode::Absorbing))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HardFamilyParams {
    pub m: u64,
    pub c: u64,
    /// Number of gadgets.
    pub l: usize,
    pub support_size: usize,
    /// Overrides the default `m^{2/3} ln m / (2c)`.
    pub m_prime: Option<u64>,
    pub seed: u64,
}

impl HardFamilyParams {
    pub fn resolved_m_prime(&self) -> u64 {
        self.m_prime.unwrap_or_else(|| {
            let m = self.m as f64;
            (m.powf(2.0 / 3.0) * m.ln() / (2.0 * self.c as f64)).round().max(9.0) as u64
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HardGadget {
    pub spec: GadgetSpec,
    pub tau: Temperature,
    #[serde(skip)]
    pub graph: SearchGraph,
}

#[derive(Clone, Debug, Serialize)]
pub struct HardFamily {
    pub params: HardFamilyParams,
    pub m_prime: u64,
    /// Increasing in temperature.
    pub gadgets: Vec<HardGadget>,
    /// Indices into `gadgets`, ascending.
    pub support: Vec<usize>,
    #[serde(skip)]
    pub master: CoolingSchedule,
}

/// Drop sizes `x_1 = 1`, `x_i = ceil(x_{i-1} (sqrt(m') + 10 c^2 ln m') / sqrt(m') + 1)`.
pub fn drop_sizes(l: usize, m_prime: u64, c: u64) -> Result<Vec<u64>> {
    let mp = m_prime as f64;
    let ratio = (mp.sqrt() + 10.0 * (c * c) as f64 * mp.ln()) / mp.sqrt();
    let mut xs: Vec<u64> = Vec::with_capacity(l);
    for i in 0..l {
        let x = match xs.last() {
            None => 1.0,
            Some(&prev) => (prev as f64 * ratio + 1.0).ceil(),
        };
        if i > 0 && !(x < (u64::MAX / 4) as f64) {
            return Err(Error::SizeLimit(format!(
                "drop size of gadget {} overflows (ratio {ratio:.1}); reduce l or c",
                i + 1
            )));
        }
        xs.push(x as u64);
    }
    Ok(xs)
}

pub fn build_hard_family(params: &HardFamilyParams) -> Result<HardFamily> {
    let m_prime = params.resolved_m_prime();
    if params.support_size == 0 || params.support_size > params.l {
        return Err(Error::InvalidArgument(format!(
            "support size must be in 1..={}, got {}",
            params.l, params.support_size
        )));
    }
    let key_total = params.support_size as u64 * 2 * params.c * m_prime;
    if key_total > params.m {
        return Err(Error::InvalidArgument(format!(
            "support keys need {key_total} steps, above the budget m = {}",
            params.m
        )));
    }
    let xs = drop_sizes(params.l, m_prime, params.c)?;
    let w = (m_prime as f64).sqrt().ceil() as u64;
    if xs.last().is_some_and(|&x| x.checked_mul(w + 1).is_none()) {
        return Err(Error::SizeLimit("gadget energies overflow; reduce l or c".into()));
    }
    let gadgets = xs
        .iter()
        .map(|&x| {
            let spec = GadgetSpec::new(x, m_prime, params.c);
            Ok(HardGadget { spec, tau: spec.tau(), graph: build_gadget(&spec)? })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut r = rng::rng(params.seed);
    let mut support = sample(&mut r, params.l, params.support_size).into_vec();
    support.sort_unstable();
    let master = CoolingSchedule::from_multiset(
        support.iter().flat_map(|&i| build_key(&gadgets[i].spec).temps().to_vec()).collect(),
    );
    Ok(HardFamily { params: *params, m_prime, gadgets, support, master })
}

impl HardFamily {
    /// Exact absorbing success of `schedule` on each support gadget.
    pub fn support_scores(&self, schedule: &CoolingSchedule) -> Vec<f64> {
        self.support
            .iter()
            .map(|&i| exact_score(&self.gadgets[i].graph, schedule, ScoreMode::Absorbing))
            .collect()
    }
}

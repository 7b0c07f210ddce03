//! The deviation function `f(x) = x - x^2`, the inequalities built on it, and
//! maximum statistics of lazy +-1 random walks.
//!
//! Every `check_*` predicate evaluates a stated bound with `SLACK` tolerance;
//! the matching `slack_*` function returns `rhs - lhs`.

use rand::RngCore;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng;

pub const SLACK: f64 = 1e-12;

fn unit(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be in [0,1], got {v}")))
    }
}

pub fn deviation(x: f64) -> Result<f64> {
    unit("x", x)?;
    Ok(x - x * x)
}

#[inline]
fn f(x: f64) -> f64 {
    x - x * x
}

/// `f(px + (1-p)y) - min(p, 1-p)(x-y)^2 - (p f(x) + (1-p) f(y))`.
pub fn slack_ajib1(p: f64, x: f64, y: f64) -> Result<f64> {
    unit("p", p)?;
    unit("x", x)?;
    unit("y", y)?;
    let lhs = p * f(x) + (1.0 - p) * f(y);
    let rhs = f(p * x + (1.0 - p) * y) - p.min(1.0 - p) * (x - y).powi(2);
    Ok(rhs - lhs)
}

/// The bound with `min(p, 1-p)` as the curvature coefficient.
///
/// Only holds when `p` is 0 or 1 or `x == y`: the exact gap is
/// `(p - p^2)(x - y)^2`, and `p - p^2 < min(p, 1-p)` strictly inside (0,1).
pub fn check_ajib1(p: f64, x: f64, y: f64) -> Result<bool> {
    Ok(slack_ajib1(p, x, y)? >= -SLACK)
}

/// Residual of `p f(x) + (1-p) f(y) = f(px + (1-p)y) - (p - p^2)(x-y)^2`.
pub fn ajib1_identity_residual(p: f64, x: f64, y: f64) -> Result<f64> {
    unit("p", p)?;
    unit("x", x)?;
    unit("y", y)?;
    let lhs = p * f(x) + (1.0 - p) * f(y);
    let rhs = f(p * x + (1.0 - p) * y) - (p - p * p) * (x - y).powi(2);
    Ok(lhs - rhs)
}

/// Jensen for the concave `f`: `f(sum p_i x_i) - sum p_i f(x_i)`.
pub fn slack_ajib2(ps: &[f64], xs: &[f64]) -> Result<f64> {
    if ps.len() != xs.len() || ps.is_empty() {
        return Err(Error::InvalidArgument("ps and xs must have the same nonzero length".into()));
    }
    for &p in ps {
        unit("p_i", p)?;
    }
    for &x in xs {
        unit("x_i", x)?;
    }
    let total: f64 = ps.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("weights sum to {total}")));
    }
    let mean: f64 = ps.iter().zip(xs).map(|(p, x)| p * x).sum();
    let lhs: f64 = ps.iter().zip(xs).map(|(p, &x)| p * f(x)).sum();
    Ok(f(mean.clamp(0.0, 1.0)) - lhs)
}

pub fn check_ajib2(ps: &[f64], xs: &[f64]) -> Result<bool> {
    Ok(slack_ajib2(ps, xs)? >= -SLACK)
}

/// `|x - y| - |f(x) - f(y)|`.
pub fn slack_sadeh(x: f64, y: f64) -> Result<f64> {
    unit("x", x)?;
    unit("y", y)?;
    Ok((x - y).abs() - (f(x) - f(y)).abs())
}

pub fn check_sadeh(x: f64, y: f64) -> Result<bool> {
    Ok(slack_sadeh(x, y)? >= -SLACK)
}

/// `x - (p - p^(1+x))`.
pub fn slack_tavan(p: f64, x: f64) -> Result<f64> {
    unit("p", p)?;
    if !(x >= 0.0) {
        return Err(Error::InvalidArgument(format!("x must be nonnegative, got {x}")));
    }
    Ok(x - (p - p.powf(1.0 + x)))
}

pub fn check_tavan(p: f64, x: f64) -> Result<bool> {
    Ok(slack_tavan(p, x)? >= -SLACK)
}

/// `max(ln(1/p), 1) min(p, 1-p) x - (p - p^(1+x))`.
pub fn slack_tavan2(p: f64, x: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidArgument(format!("p must be in (0,1), got {p}")));
    }
    unit("x", x)?;
    let rhs = (1.0 / p).ln().max(1.0) * p.min(1.0 - p) * x;
    Ok(rhs - (p - p.powf(1.0 + x)))
}

pub fn check_tavan2(p: f64, x: f64) -> Result<bool> {
    Ok(slack_tavan2(p, x)? >= -SLACK)
}

/// Pass/fail tally of one inequality over a lattice plus random samples.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropReport {
    pub name: String,
    pub checked: u64,
    pub passed: u64,
    /// Smallest `rhs - lhs` seen (for identities: largest absolute residual, negated).
    pub worst_slack: f64,
}

impl PropReport {
    fn new(name: &str) -> Self {
        PropReport { name: name.into(), checked: 0, passed: 0, worst_slack: f64::INFINITY }
    }

    fn record(&mut self, slack: f64) {
        self.checked += 1;
        if slack >= -SLACK {
            self.passed += 1;
        }
        self.worst_slack = self.worst_slack.min(slack);
    }

    pub fn all_passed(&self) -> bool {
        self.checked == self.passed
    }
}

/// Evaluates every inequality on a lattice of spacing `step` and on `fuzz`
/// uniform random points.
pub fn verify_all(step: f64, fuzz: usize, seed: u64) -> Vec<PropReport> {
    use rand::Rng;
    let n = (1.0 / step).round() as usize;
    let lattice: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    let mut r = rng::rng(seed);

    let mut ajib1 = PropReport::new("ajib1");
    let mut ident = PropReport::new("ajib1_identity");
    let mut ajib2 = PropReport::new("ajib2");
    let mut sadeh = PropReport::new("sadeh");
    let mut tavan = PropReport::new("tavan");
    let mut tavan2 = PropReport::new("tavan2");

    let mut triple = |p: f64, x: f64, y: f64| {
        ajib1.record(slack_ajib1(p, x, y).unwrap());
        ident.record(-ajib1_identity_residual(p, x, y).unwrap().abs());
    };
    for &p in &lattice {
        for &x in &lattice {
            for &y in &lattice {
                triple(p, x, y);
            }
        }
    }
    for _ in 0..fuzz {
        triple(r.random(), r.random(), r.random());
    }

    for &x in &lattice {
        for &y in &lattice {
            sadeh.record(slack_sadeh(x, y).unwrap());
        }
    }
    for &p in &lattice {
        for &x in &lattice {
            tavan.record(slack_tavan(p, 10.0 * x).unwrap());
            if p > 0.0 && p < 1.0 {
                tavan2.record(slack_tavan2(p, x).unwrap());
            }
            // Two-point Jensen on the lattice.
            ajib2.record(slack_ajib2(&[p, 1.0 - p], &[x, 1.0 - x]).unwrap());
        }
    }
    for _ in 0..fuzz {
        sadeh.record(slack_sadeh(r.random(), r.random()).unwrap());
        tavan.record(slack_tavan(r.random(), r.random_range(0.0..=10.0)).unwrap());
        let p: f64 = r.random();
        if p > 0.0 {
            tavan2.record(slack_tavan2(p, r.random()).unwrap());
        }
        let len = r.random_range(1..=8);
        let mut ps: Vec<f64> = (0..len).map(|_| -r.random::<f64>().max(1e-300).ln()).collect();
        let s: f64 = ps.iter().sum();
        ps.iter_mut().for_each(|p| *p /= s);
        let xs: Vec<f64> = (0..len).map(|_| r.random()).collect();
        ajib2.record(slack_ajib2(&ps, &xs).unwrap());
    }
    vec![ajib1, ident, ajib2, sadeh, tavan, tavan2]
}

/// Step probabilities of a lazy walk on the integers started at 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WalkParams {
    pub p_b: f64,
    pub p_s: f64,
    pub p_f: f64,
    pub k: u64,
}

impl WalkParams {
    pub fn new(p_b: f64, p_s: f64, p_f: f64, k: u64) -> Result<Self> {
        if [p_b, p_s, p_f].iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::InvalidArgument("walk probabilities must be nonnegative".into()));
        }
        if (p_b + p_s + p_f - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "walk probabilities sum to {}",
                p_b + p_s + p_f
            )));
        }
        if k == 0 {
            return Err(Error::InvalidArgument("k must be positive".into()));
        }
        Ok(WalkParams { p_b, p_s, p_f, k })
    }

    pub fn symmetric(k: u64) -> Self {
        WalkParams { p_b: 1.0 / 3.0, p_s: 1.0 / 3.0, p_f: 1.0 / 3.0, k }
    }
}

/// Sorted per-trial maxima of `x_0, ..., x_k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WalkStats {
    pub params: WalkParams,
    pub maxima: Vec<i64>,
}

impl WalkStats {
    pub fn trials(&self) -> usize {
        self.maxima.len()
    }

    /// Fraction of trials whose maximum is at least `x`.
    pub fn freq_at_least(&self, x: f64) -> f64 {
        let below = self.maxima.partition_point(|&m| (m as f64) < x);
        (self.maxima.len() - below) as f64 / self.maxima.len() as f64
    }

    pub fn freq_below(&self, x: f64) -> f64 {
        1.0 - self.freq_at_least(x)
    }

    pub fn quantile(&self, q: f64) -> i64 {
        let i = ((self.maxima.len() - 1) as f64 * q.clamp(0.0, 1.0)).round() as usize;
        self.maxima[i]
    }
}

/// Threshold `sqrt(k/c) + 2` the symmetric walk maximum should usually reach.
pub fn reach_threshold(k: u64, c: f64) -> f64 {
    (k as f64 / c).sqrt() + 2.0
}

/// Threshold `sqrt(ck) ln k` the symmetric walk maximum should stay below.
pub fn cap_threshold(k: u64, c: f64) -> f64 {
    (c * k as f64).sqrt() * (k as f64).ln()
}

/// Threshold `sqrt(k')/2` a backward-biased walk should stay below.
pub fn biased_threshold(k_prime: u64) -> f64 {
    (k_prime as f64).sqrt() / 2.0
}

/// Smallest backward bias `1/3 + c ln k' / sqrt(k')` for the biased case.
pub fn biased_params(k_prime: u64, c: f64, k: u64) -> Result<WalkParams> {
    let g = c * (k_prime as f64).ln() / (k_prime as f64).sqrt();
    let p_b = 1.0 / 3.0 + g;
    let p_f = 1.0 / 3.0 - g;
    if p_f < 0.0 || p_b > 1.0 {
        return Err(Error::InvalidArgument(format!(
            "bias {g} too large for k' = {k_prime}, c = {c}"
        )));
    }
    WalkParams::new(p_b, 1.0 - p_b - p_f, p_f, k)
}

fn threshold(p: f64) -> u64 {
    ((p * 4_294_967_296.0).round() as u64).min(1 << 32)
}

/// Runs `trials` independent walks of `params.k` steps; trial `i` is seeded
/// with `rng::stream_seed(seed, i)`.
pub fn walk_max_stats(params: WalkParams, trials: u64, seed: u64) -> Result<WalkStats> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let back = threshold(params.p_b);
    let stay = threshold(params.p_b + params.p_s).max(back);
    let mut maxima: Vec<i64> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(seed, i);
            let (mut x, mut best) = (0i64, 0i64);
            for _ in 0..params.k {
                let u = r.next_u32() as u64;
                if u < back {
                    x -= 1;
                } else if u >= stay {
                    x += 1;
                    best = best.max(x);
                }
            }
            best
        })
        .collect();
    maxima.sort_unstable();
    Ok(WalkStats { params, maxima })
}

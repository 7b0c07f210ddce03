//! Finite temperature sets and the round-down map onto them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::search_graph::{accept_probability, CoolingSchedule, Temperature};

/// Default ceiling on the number of grid elements.
pub const DEFAULT_GRID_CAP: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    Fine,
    Geometric,
    Coarse,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridParams {
    Coarse { m: u64, epsilon: f64, t_min: f64, t_max: f64, ratio: f64 },
    Delta { e_max: u64, delta: f64 },
}

/// Strictly increasing set of temperatures; `INF`, if present, is last.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TemperatureGrid {
    pub kind: GridKind,
    pub params: GridParams,
    temps: Vec<Temperature>,
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("delta must be in (0,1), got {delta}")))
    }
}

/// Number of `i` with `i * delta < 1`.
fn levels(delta: f64) -> usize {
    ((1.0 / delta - 1e-9).ceil() as usize).saturating_sub(1)
}

/// Sorts, merges values equal up to rounding error and appends `INF`.
fn finish(mut values: Vec<f64>) -> Vec<Temperature> {
    values.sort_by(f64::total_cmp);
    let mut temps: Vec<Temperature> = Vec::with_capacity(values.len() + 1);
    for v in values {
        match temps.last() {
            Some(last) if (v - last.value()).abs() <= 1e-12 * v.abs() => {}
            _ => temps.push(Temperature::new(v).expect("grid values are positive")),
        }
    }
    temps.push(Temperature::INF);
    temps
}

fn level_grid(js: &[f64], delta: f64) -> Vec<f64> {
    let n = levels(delta);
    js.iter()
        .flat_map(|&j| (1..=n).map(move |i| j / (1.0 / (i as f64 * delta)).ln()))
        .collect()
}

/// Temperatures at which `exp(-j/t)` is an exact multiple of `delta`, for every
/// integer `j` in `1..=e_max`.
pub fn fine_grid(e_max: u64, delta: f64, cap: usize) -> Result<TemperatureGrid> {
    check_delta(delta)?;
    if e_max == 0 {
        return Err(Error::InvalidArgument("e_max must be at least 1".into()));
    }
    let size = (e_max as u128) * (levels(delta) as u128) + 1;
    if size > cap as u128 {
        return Err(Error::SizeLimit(format!(
            "fine grid would hold about {size} temperatures (e_max = {e_max}, delta = {delta}), cap is {cap}; use the geometric grid or raise the cap"
        )));
    }
    let js: Vec<f64> = (1..=e_max).map(|j| j as f64).collect();
    Ok(TemperatureGrid {
        kind: GridKind::Fine,
        params: GridParams::Delta { e_max, delta },
        temps: finish(level_grid(&js, delta)),
    })
}

/// Energy levels `1, (1+delta), (1+delta)^2, ...` below `e_max`, then `e_max`.
pub fn geometric_levels(e_max: u64, delta: f64) -> Vec<f64> {
    let top = e_max as f64;
    let mut js = Vec::new();
    let mut j = 1.0f64;
    while j < top {
        js.push(j);
        j *= 1.0 + delta;
    }
    js.push(top);
    js
}

/// Like [`fine_grid`] but only for the geometric levels of [`geometric_levels`].
pub fn geometric_grid(e_max: u64, delta: f64, cap: usize) -> Result<TemperatureGrid> {
    check_delta(delta)?;
    if e_max == 0 {
        return Err(Error::InvalidArgument("e_max must be at least 1".into()));
    }
    let js = geometric_levels(e_max, delta);
    let size = js.len() * levels(delta) + 1;
    if size > cap {
        return Err(Error::SizeLimit(format!(
            "geometric grid would hold {size} temperatures, cap is {cap}"
        )));
    }
    Ok(TemperatureGrid {
        kind: GridKind::Geometric,
        params: GridParams::Delta { e_max, delta },
        temps: finish(level_grid(&js, delta)),
    })
}

pub fn coarse_ratio(m: u64, epsilon: f64) -> f64 {
    let m = m as f64;
    1.0 + epsilon / (m.sqrt() * 4.0 * m.ln())
}

/// Geometric sequence from `t_min` with ratio [`coarse_ratio`], stopping at the
/// first element that is at least `t_max`.
pub fn coarse_grid(
    m: u64,
    epsilon: f64,
    t_min: f64,
    t_max: f64,
    cap: usize,
) -> Result<TemperatureGrid> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("m must be at least 2, got {m}")));
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be in (0,1], got {epsilon}")));
    }
    if !(t_min > 0.0 && t_min < t_max && t_max.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < t_min < t_max, got [{t_min}, {t_max}]"
        )));
    }
    let ratio = coarse_ratio(m, epsilon);
    let size = ((t_max / t_min).ln() / ratio.ln()).ceil() + 1.0;
    if size > cap as f64 {
        return Err(Error::SizeLimit(format!(
            "coarse grid would hold {size} temperatures, cap is {cap}"
        )));
    }
    let mut temps = Vec::with_capacity(size as usize + 1);
    let mut t = t_min;
    loop {
        temps.push(Temperature::new(t)?);
        if t >= t_max {
            break;
        }
        t *= ratio;
    }
    Ok(TemperatureGrid {
        kind: GridKind::Coarse,
        params: GridParams::Coarse { m, epsilon, t_min, t_max, ratio },
        temps,
    })
}

impl TemperatureGrid {
    /// Wraps an explicit list of temperatures; used for ad hoc test grids.
    pub fn from_temps(mut temps: Vec<Temperature>) -> Result<Self> {
        temps.sort_by(|a, b| a.value().total_cmp(&b.value()));
        temps.dedup();
        if temps.is_empty() {
            return Err(Error::InvalidArgument("grid must not be empty".into()));
        }
        Ok(TemperatureGrid {
            kind: GridKind::Fine,
            params: GridParams::Delta { e_max: 0, delta: 0.0 },
            temps,
        })
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

    pub fn min(&self) -> Temperature {
        self.temps[0]
    }

    pub fn has_inf(&self) -> bool {
        self.temps.last().is_some_and(|t| t.is_inf())
    }

    /// Finite elements only.
    pub fn finite(&self) -> &[Temperature] {
        let n = self.temps.len() - usize::from(self.has_inf());
        &self.temps[..n]
    }

    /// Largest grid element not above `t`.
    pub fn snap_one(&self, index: usize, t: Temperature) -> Result<Temperature> {
        if t.is_inf() {
            return Ok(if self.has_inf() {
                Temperature::INF
            } else {
                *self.temps.last().unwrap()
            });
        }
        let finite = self.finite();
        if finite.is_empty() {
            return Ok(*self.temps.last().unwrap());
        }
        // Tolerate a last-bit mismatch for values that were meant to sit on the grid.
        let v = t.value() * (1.0 + 1e-12);
        let k = finite.partition_point(|x| x.value() <= v);
        if k == 0 {
            return Err(Error::BelowGrid { index, value: t.value(), min: finite[0].value() });
        }
        Ok(finite[k - 1])
    }

    /// Snaps every entry down onto the grid.
    pub fn snap(&self, schedule: &CoolingSchedule) -> Result<CoolingSchedule> {
        let temps = schedule
            .temps()
            .iter()
            .enumerate()
            .map(|(i, &t)| self.snap_one(i, t))
            .collect::<Result<Vec<_>>>()?;
        CoolingSchedule::new(temps)
    }

    /// Distance from `exp(-delta_e/t)` to the nearest acceptance probability
    /// offered by the grid at the same energy drop.
    pub fn net_error(&self, delta_e: u64, t: f64) -> f64 {
        let target = (-(delta_e as f64) / t).exp();
        let k = self.temps.partition_point(|x| x.value() < t);
        [k.checked_sub(1), Some(k)]
            .into_iter()
            .flatten()
            .filter_map(|i| self.temps.get(i))
            .map(|&g| (accept_probability(delta_e, g) - target).abs())
            .fold(f64::INFINITY, f64::min)
    }

    /// Worst [`Self::net_error`] over `delta_e` in `1..=e_max` and a
    /// log-spaced mesh of `points` temperatures spanning `[t_lo, t_hi]`.
    pub fn max_net_error(&self, e_max: u64, t_lo: f64, t_hi: f64, points: usize) -> f64 {
        let (a, b) = (t_lo.ln(), t_hi.ln());
        let mut worst = 0.0f64;
        for i in 0..points {
            let t = (a + (b - a) * i as f64 / (points - 1).max(1) as f64).exp();
            for d in 1..=e_max {
                worst = worst.max(self.net_error(d, t));
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(x: f64) -> Temperature {
        Temperature::new(x).unwrap()
    }

    #[test]
    fn fine_half() {
        let g = fine_grid(1, 0.5, DEFAULT_GRID_CAP).unwrap();
        assert_eq!(g.len(), 2);
        assert!((g.temps()[0].value() - 1.0 / 2f64.ln()).abs() < 1e-12);
        assert!(g.temps()[1].is_inf());
    }

    #[test]
    fn fine_quarter() {
        let g = fine_grid(1, 0.25, DEFAULT_GRID_CAP).unwrap();
        let want = [1.0 / 4f64.ln(), 1.0 / 2f64.ln(), 1.0 / (4.0f64 / 3.0).ln()];
        for (a, b) in g.finite().iter().zip(want) {
            assert!((a.value() - b).abs() < 1e-12);
        }
        assert_eq!(g.len(), 4);
    }

    #[test]
    fn fine_cap_is_enforced() {
        let err = fine_grid(1_000_000, 0.001, DEFAULT_GRID_CAP).unwrap_err();
        assert!(matches!(err, Error::SizeLimit(_)));
    }

    #[test]
    fn geometric_matches_fine_at_unit_emax() {
        for d in [0.5, 0.25, 0.1] {
            let a = fine_grid(1, d, DEFAULT_GRID_CAP).unwrap();
            let b = geometric_grid(1, d, DEFAULT_GRID_CAP).unwrap();
            assert_eq!(a.temps(), b.temps());
        }
        assert!(geometric_grid(4, 1.0, DEFAULT_GRID_CAP).is_err());
    }

    #[test]
    fn coarse_ratio_value() {
        let r = coarse_ratio(10_000, 0.5);
        assert!((r - (1.0 + 0.005 / (4.0 * 10_000f64.ln()))).abs() < 1e-15);
        assert!((r - 1.000_135_7).abs() < 1e-7);
        let g = coarse_grid(10_000, 0.5, 1.0, 2.0, DEFAULT_GRID_CAP).unwrap();
        assert_eq!(g.temps()[0].value(), 1.0);
        assert!(g.temps().last().unwrap().value() >= 2.0);
        for w in g.temps().windows(2) {
            assert!((w[1].value() / w[0].value() - r).abs() < 1e-12);
        }
    }

    #[test]
    fn snap_examples() {
        let g = TemperatureGrid::from_temps(vec![t(1.0), t(1.2), t(1.44)]).unwrap();
        let s = CoolingSchedule::new(vec![Temperature::INF, t(1.3), t(1.2), t(1.0)]).unwrap();
        let out = g.snap(&s).unwrap();
        assert_eq!(out.temps(), &[t(1.44), t(1.2), t(1.2), t(1.0)]);
        let err = g.snap(&CoolingSchedule::new(vec![t(0.9)]).unwrap()).unwrap_err();
        assert!(matches!(err, Error::BelowGrid { index: 0, .. }));
    }

    #[test]
    fn grid_json_round_trip() {
        let g = coarse_grid(100, 0.5, 1.0, 1.1, DEFAULT_GRID_CAP).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        assert!(s.contains("\"kind\":\"coarse\""));
        let back: TemperatureGrid = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
        let f = fine_grid(2, 0.5, DEFAULT_GRID_CAP).unwrap();
        let back: TemperatureGrid = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        assert_eq!(back, f);
    }
}

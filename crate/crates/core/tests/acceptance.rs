//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use annealing_core::convergence_lab::{self, Metric, SearchParams};
use annealing_core::gadget_factory::{build_gadget, build_key, far_schedule_failure, GadgetSpec};
use annealing_core::graph_learner::{learn_msg, query_bound, LearnerConfig, NoisyOracle, PlantedOracle};
use annealing_core::inequalities::{reach_threshold, verify_all, walk_max_stats, WalkParams};
use annealing_core::rng;
use annealing_core::sa_engine::{estimate_score, exact_score, hoeffding_trials, snap_gap_empirical};
use annealing_core::schedule_optimizer::{
    brute_force_optimal, covering_lp_solve, identical_paths, lp_round, random_family,
    random_feasible_family, separate_paths_exact, BruteCaps, InstanceFamily,
};
use annealing_core::search_graph::random_graph;
use annealing_core::stationary_model::fixtures::{diverging_pair, five_level};
use annealing_core::stationary_model::{random_msg, MonotoneStationaryGraph, RandomMsgParams};
use annealing_core::temperature_grid::{coarse_grid, fine_grid, geometric_grid, DEFAULT_GRID_CAP};
use annealing_core::{CoolingSchedule, GraphBuilder, ScoreMode, Temperature};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, u64, fn() -> Outcome);

const SEED: u64 = 20_240_601;
const STATE_CAP: u64 = 1 << 22;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn differing_family() -> Outcome {
    let f = InstanceFamily::new(8, diverging_pair().to_vec()).map_err(|e| e.to_string())?;
    let ident = identical_paths(&f);
    let sep = separate_paths_exact(&f.with_budget(5), STATE_CAP).map_err(|e| e.to_string())?;
    ensure(
        ident.counts == [4, 4] && sep.counts == [1, 4] && sep.reached == [2, 2],
        format!("identical(m=8) counts {:?}, separate(m=5) counts {:?}", ident.counts, sep.counts),
    )
}

fn five_level_optimum() -> Outcome {
    let f = InstanceFamily::new(9, vec![five_level()]).map_err(|e| e.to_string())?;
    let brute = brute_force_optimal(&f, BruteCaps::default()).map_err(|e| e.to_string())?;
    let sep = separate_paths_exact(&f, STATE_CAP).map_err(|e| e.to_string())?;
    let want = [3, 0, 0, 0, 6];
    ensure(
        brute.counts == want && sep.counts == want,
        format!("brute {:?}, separate {:?}", brute.counts, sep.counts),
    )
}

fn optimizer_parity() -> Outcome {
    let mut r = rng::rng(SEED ^ 3);
    let mut mismatches = Vec::new();
    for i in 0..200 {
        let n = r.random_range(1..=3);
        let k = r.random_range(1..=4);
        let m = r.random_range(0..=10);
        let f = random_family(n, k, 5, m, &mut r);
        let brute = brute_force_optimal(&f, BruteCaps::default()).map_err(|e| e.to_string())?;
        let sep = separate_paths_exact(&f, STATE_CAP).map_err(|e| e.to_string())?;
        let ident = identical_paths(&f);
        if sep.avg_score != brute.avg_score
            || ident.avg_score > sep.avg_score
            || ident.avg_score > brute.avg_score
        {
            mismatches.push(i);
        }
    }
    ensure(mismatches.is_empty(), format!("200 families, mismatches at {mismatches:?}"))
}

fn acceptability_equivalence() -> Outcome {
    let mut r = rng::rng(SEED ^ 4);
    let mut bad = 0u64;
    for _ in 0..1000 {
        let k = r.random_range(1..=6);
        let p = RandomMsgParams { k, max_reps: 6, edge_prob: 0.4, min_gap: 0.0 };
        let g = random_msg(&p, &mut r);
        for _ in 0..1000 {
            let counts: Vec<u64> = (0..k).map(|_| r.random_range(0..=7)).collect();
            if g.is_acceptable(&counts) != (g.reachable_index(&counts) == k) {
                bad += 1;
            }
        }
    }
    ensure(bad == 0, format!("10^6 model/schedule pairs, {bad} discrepancies"))
}

fn key_success() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for m_prime in [400, 2500] {
        let spec = GadgetSpec::new(1, m_prime, 100);
        let g = build_gadget(&spec).map_err(|e| e.to_string())?;
        let s = exact_score(&g, &build_key(&spec), ScoreMode::Absorbing);
        ok &= s >= 0.9;
        parts.push(format!("m'={m_prime}: {s:.6}"));
    }
    ensure(ok, format!("key success {} (need >= 0.9)", parts.join(", ")))
}

fn far_failure() -> Outcome {
    let spec = GadgetSpec::new(1, 2500, 100);
    let p = far_schedule_failure(&spec, spec.key_len()).map_err(|e| e.to_string())?;
    ensure(p <= 0.1, format!("far schedule success {p:.6} (need <= 0.1)"))
}

fn walk_reach() -> Outcome {
    let (k, c, trials) = (10_000u64, 100.0, 100_000u64);
    let stats = walk_max_stats(WalkParams::symmetric(k), trials, SEED ^ 7).map_err(|e| e.to_string())?;
    let thr = reach_threshold(k, c);
    let freq = stats.freq_at_least(thr);
    let need = 0.95 - 3.0 * (0.95f64 * 0.05 / trials as f64).sqrt();
    ensure(freq >= need, format!("Pr[max >= {thr}] = {freq:.5} (need >= {need:.5})"))
}

fn inequality_suite() -> Outcome {
    let reports = verify_all(0.01, 100_000, SEED ^ 8);
    let mut lines = Vec::new();
    let mut ok = true;
    for r in &reports {
        if r.name != "ajib1" {
            ok &= r.all_passed();
        }
        lines.push(format!("{} {}/{} worst {:.3e}", r.name, r.passed, r.checked, r.worst_slack));
    }
    let stated = reports.iter().find(|r| r.name == "ajib1").unwrap();
    lines.push(format!(
        "stated min(p,1-p) form {}",
        if stated.all_passed() { "holds" } else { "fails; the (p - p^2) identity is the valid form" }
    ));
    ensure(ok, lines.join("; "))
}

fn snapping_gap() -> Outcome {
    let mut r = rng::rng(SEED ^ 9);
    let (mut coarse, mut finer) = (Vec::new(), Vec::new());
    for _ in 0..500 {
        let n = r.random_range(2..=12);
        let e_max = r.random_range(1..=8);
        let m = r.random_range(2..=64);
        let g = random_graph(n, e_max, r.random_range(1..=3), &mut r);
        let (t_min, t_max) = (1.0 / 100f64.ln(), e_max as f64 / (1.0 / 0.99f64).ln());
        let temps = (0..m)
            .map(|_| Temperature::new(t_min * (t_max / t_min).powf(r.random::<f64>())).unwrap())
            .collect();
        let sched = CoolingSchedule::from_multiset(temps);
        for (eps, out) in [(0.5, &mut coarse), (0.25, &mut finer)] {
            let grid = coarse_grid(m, eps, t_min, t_max, DEFAULT_GRID_CAP).map_err(|e| e.to_string())?;
            let gap = snap_gap_empirical(&g, &sched, &grid, ScoreMode::EndState).map_err(|e| e.to_string())?;
            out.push(gap.gap);
        }
    }
    let median = |v: &mut Vec<f64>| {
        v.sort_by(f64::total_cmp);
        v[v.len() / 2]
    };
    let worst = coarse.iter().cloned().fold(0.0, f64::max);
    let (mc, mf) = (median(&mut coarse), median(&mut finer));
    ensure(
        worst <= 0.5 && mf < mc,
        format!("max gap {worst:.3e}, median gap eps=0.5 {mc:.3e} vs eps=0.25 {mf:.3e}"),
    )
}

fn rounding() -> Outcome {
    let mut r = rng::rng(SEED ^ 10);
    let rounds = 200u64;
    let mut failures = Vec::new();
    let mut worst_ratio = 0.0f64;
    let mut worst_margin = f64::INFINITY;
    for fam in 0..100 {
        let n = r.random_range(1..=8);
        let k = r.random_range(1..=6);
        let f = random_feasible_family(n, k, 6, &mut r);
        let cover = covering_lp_solve(&f).map_err(|e| e.to_string())?;
        let alpha = ((n * k) as f64).ln() + 3.0;
        let mut hits = 0u64;
        let mut total_len = 0u64;
        for s in 0..rounds {
            let out = lp_round(&f, &cover, alpha, rng::stream_seed(SEED, fam * rounds + s))
                .map_err(|e| e.to_string())?;
            hits += out.all_acceptable as u64;
            total_len += out.result.length;
        }
        let p = 1.0 - (n * k) as f64 * (-alpha).exp();
        let sigma = (p * (1.0 - p) / rounds as f64).sqrt();
        let freq = hits as f64 / rounds as f64;
        let mean_len = total_len as f64 / rounds as f64;
        let ratio = mean_len / (alpha * f.m as f64);
        worst_ratio = worst_ratio.max(ratio);
        worst_margin = worst_margin.min(freq - (p - 3.0 * sigma));
        if freq < p - 3.0 * sigma || ratio > 1.1 {
            failures.push(fam);
        }
    }
    ensure(
        failures.is_empty(),
        format!(
            "100 families; worst frequency margin {worst_margin:.4}, worst length/(alpha m) {worst_ratio:.4}; failing {failures:?}"
        ),
    )
}

fn grid_exactness() -> Outcome {
    let mut worst_exact = 0.0f64;
    let (mut worst_fine, mut worst_geo) = (0.0f64, 0.0f64);
    let mut bad = Vec::new();
    for e_max in 1..=16u64 {
        for delta in [0.1, 0.05] {
            let fine = fine_grid(e_max, delta, DEFAULT_GRID_CAP).map_err(|e| e.to_string())?;
            let geo = geometric_grid(e_max, delta, DEFAULT_GRID_CAP).map_err(|e| e.to_string())?;
            let levels = annealing_core::temperature_grid::geometric_levels(e_max, delta);
            for (grid, js) in [(&fine, (1..=e_max).map(|j| j as f64).collect::<Vec<_>>()), (&geo, levels)] {
                for t in grid.finite() {
                    let err = js
                        .iter()
                        .map(|&j| {
                            let a = (-j / t.value()).exp() / delta;
                            (a - a.round()).abs() * delta
                        })
                        .fold(f64::INFINITY, f64::min);
                    worst_exact = worst_exact.max(err);
                }
            }
            let lo = 0.5 * fine.min().value();
            let hi = 10.0 * fine.finite().last().unwrap().value();
            let ef = fine.max_net_error(e_max, lo, hi, 2000);
            let eg = geo.max_net_error(e_max, lo, hi, 2000);
            worst_fine = worst_fine.max(ef / delta);
            worst_geo = worst_geo.max(eg / delta);
            if ef > delta + 1e-12 || eg > 3.0 * delta + 1e-12 {
                bad.push((e_max, delta));
            }
        }
    }
    ensure(
        worst_exact <= 1e-12 && bad.is_empty(),
        format!(
            "worst lattice error {worst_exact:.2e}; net error / delta: fine {worst_fine:.3}, geometric {worst_geo:.3}; failing {bad:?}"
        ),
    )
}

fn learner_config(msg: &MonotoneStationaryGraph, m: u64, gap: f64) -> LearnerConfig {
    LearnerConfig {
        temps: msg.temps().to_vec(),
        m,
        gap,
        trials_per_query: LearnerConfig::recommended_trials(gap),
        max_queries: None,
    }
}

fn learner() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    let planted = five_level();
    for (label, m) in [("five-level m=16", 16), ("five-level m=9", 9)] {
        let cfg = learner_config(&planted, m, 0.1);
        let out = learn_msg(&mut PlantedOracle { msg: &planted }, &cfg).map_err(|e| e.to_string())?;
        let exact = out.msg.equivalent(&planted);
        let within = out.queries <= query_bound(planted.k(), m);
        ok &= exact && within;
        notes.push(format!("{label}: exact {exact}, {} queries (bound {})", out.queries, query_bound(planted.k(), m)));
    }
    let mut r = rng::rng(SEED ^ 12);
    let (mut recovered, mut over_budget) = (0, 0);
    for i in 0..50u64 {
        let k = r.random_range(2..=6);
        let gap = 0.05;
        let p = RandomMsgParams { k, max_reps: 8, edge_prob: 0.4, min_gap: gap };
        let msg = random_msg(&p, &mut r);
        let cfg = learner_config(&msg, 8, gap);
        let noise = gap / 5.0;
        let mut oracle = NoisyOracle::new(&msg, noise, rng::stream_seed(SEED, i));
        if let Ok(out) = learn_msg(&mut oracle, &cfg) {
            recovered += out.msg.equivalent_within(&msg, noise) as u32;
            over_budget += (out.queries > query_bound(k, 8)) as u32;
        }
    }
    ok &= recovered >= 48 && over_budget == 0;
    notes.push(format!("noisy: {recovered}/50 recovered, {over_budget} over the query bound"));
    ensure(ok, notes.join("; "))
}

fn counterexample() -> Outcome {
    let params = SearchParams::new(6, Metric::L1, (0.15, 0.55, 0.95), SEED, 100_000);
    let found = convergence_lab::search_counterexample(&params).map_err(|e| e.to_string())?;
    let Some(c) = found else {
        return Err("no violation within 10^5 candidates".into());
    };
    let json = serde_json::to_string(&c).map_err(|e| e.to_string())?;
    let back: convergence_lab::Counterexample = serde_json::from_str(&json).map_err(|e| e.to_string())?;
    let replay = convergence_lab::replay(&back, params.tol, params.step_cap).map_err(|e| e.to_string())?;
    let again = convergence_lab::search_counterexample(&params).map_err(|e| e.to_string())?;
    ensure(
        back == c && replay == c.report && again.as_ref() == Some(&c),
        format!(
            "candidate {}: steps from p=0.95 {}, from p=0.55 {}; replay identical {}",
            c.candidate,
            c.report.steps_high,
            c.report.steps_mid,
            replay == c.report
        ),
    )
}

fn monte_carlo() -> Outcome {
    let mut b = GraphBuilder::new();
    let ids: Vec<usize> = [1u64, 2, 1, 3, 4].iter().enumerate().map(|(i, &e)| b.node(format!("v{i}"), e)).collect();
    for &(u, v) in &[(0, 1), (1, 0), (1, 2), (2, 3), (3, 1), (3, 4), (4, 3), (2, 0), (0, 3)] {
        b.edge(ids[u], ids[v]);
    }
    b.solution(ids[4]);
    let g = b.build().map_err(|e| e.to_string())?;
    let temps = [4.0, 3.0, 2.0, 2.0, 1.5, 1.0, 1.0, 0.7, 0.5, 0.5]
        .iter()
        .map(|&t| Temperature::new(t).unwrap())
        .collect();
    let sched = CoolingSchedule::new(temps).map_err(|e| e.to_string())?;
    let exact = exact_score(&g, &sched, ScoreMode::EndState);
    let trials = hoeffding_trials(0.05, 0.99).map_err(|e| e.to_string())?;
    let mut inside = 0;
    for i in 0..500 {
        let est = estimate_score(&g, &sched, ScoreMode::EndState, trials, 0.99, rng::stream_seed(SEED, i))
            .map_err(|e| e.to_string())?;
        inside += ((est.mean - exact).abs() <= 3.0 * est.half_width) as u32;
    }
    ensure(
        inside >= 495 && trials == 1060,
        format!("{inside}/500 estimates within 3 half-widths of {exact:.6}; hoeffding_trials(0.05, 0.99) = {trials}"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 14] = [
        ("01 diverging-pair schedules", 1, differing_family),
        ("02 five-level optimum", 1, five_level_optimum),
        ("03 optimizer parity", 120, optimizer_parity),
        ("04 acceptability equivalence", 120, acceptability_equivalence),
        ("05 gadget key success", 60, key_success),
        ("06 far schedule failure", 60, far_failure),
        ("07 symmetric walk reach", 30, walk_reach),
        ("08 inequality suite", 60, inequality_suite),
        ("09 coarse snapping gap", 300, snapping_gap),
        ("10 covering LP rounding", 180, rounding),
        ("11 grid exactness", 60, grid_exactness),
        ("12 stationary graph learner", 120, learner),
        ("13 convergence counterexample", 300, counterexample),
        ("14 Monte Carlo coherence", 120, monte_carlo),
    ];
    let mut failed = 0;
    for (name, limit, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let slow = took > Duration::from_secs(limit);
        let (status, detail) = match &outcome {
            Ok(d) if !slow => ("PASS", d.clone()),
            Ok(d) => ("FAIL", format!("{d}; took {took:.2?}, limit {limit}s")),
            Err(d) => ("FAIL", d.clone()),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("{status} {name} ({took:.2?}): {detail}");
    }
    println!("{} of 14 criteria passed", 14 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

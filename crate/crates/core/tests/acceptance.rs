//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any failure.

mod common;

use std::cell::Cell;
use std::time::{Duration, Instant};

use mmcrp::colgen::{max_reduced_saving, relative_gap, run, CgOptions, CgResult, Heuristic, Scheme};
use mmcrp::edgeform::solve_edge;
use mmcrp::experiments::{compare, fleet_sweep};
use mmcrp::instgen::with_fleet;
use mmcrp::milp::{solve_ip, solve_lp, IpStatus, LpStatus, MilpProblem, Sense};
use mmcrp::model::Instance;
use mmcrp::oracle::brute_force;
use mmcrp::plan::{check_plan, RouteKind};
use mmcrp::ridegraph::{EnumCaps, TimeSpaceGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const IP_LIMIT: Duration = Duration::from_secs(60);

thread_local! {
    static PRICING: Cell<(usize, usize)> = const { Cell::new((0, 0)) };
}

/// Column generation with the pricing counter check recorded for criterion 6.
fn cg(instance: &Instance, graph: &TimeSpaceGraph, opts: &CgOptions) -> CgResult {
    let r = run(instance, graph, opts).expect("column generation");
    PRICING.with(|p| {
        let (runs, bad) = p.get();
        p.set((runs + 1, bad + usize::from(!r.pricing_visits_ok)));
    });
    r
}

fn opts(scheme: Scheme, heuristic: Heuristic) -> CgOptions {
    CgOptions {
        ip_time_limit: Some(IP_LIMIT),
        ..CgOptions::new(scheme, heuristic)
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len().max(1) as f64
}

fn oracle_equivalence() -> (bool, String) {
    let t = Instant::now();
    let mut bad = Vec::new();
    let (mut accepted, mut refused) = (0, 0);
    for seed in 0..500 {
        if accepted == 30 {
            break;
        }
        let inst = common::tiny(seed);
        let (_, g) = common::graph(&inst);
        let Ok(oracle) = brute_force(&inst, &g) else {
            refused += 1;
            continue;
        };
        accepted += 1;
        let truth = oracle.value.expect("balanced depots admit the idle plan");
        let edge = solve_edge(&g, &inst, None).expect("edge model").objective;
        let r = cg(&inst, &g, &CgOptions::default());
        if !close(edge, truth, 1e-9) || r.lp_bound < truth - 1e-6 || r.ip_value > truth + 1e-6 {
            bad.push(format!("seed {seed}: oracle {truth} edge {edge} lp {} ip {}", r.lp_bound, r.ip_value));
        }
    }
    let secs = t.elapsed().as_secs_f64();
    (
        bad.is_empty() && accepted == 30 && secs < 60.0,
        format!("{accepted} instances ({refused} refused by the oracle guard) in {secs:.1}s; mismatches {bad:?}"),
    )
}

fn scheme_invariance() -> (bool, String) {
    let t = Instant::now();
    let mut spread = 0.0f64;
    for seed in 0..10 {
        let inst = common::sized(20, 4, seed);
        let (_, g) = common::graph(&inst);
        let mut bounds = Vec::new();
        for s in Scheme::ALL {
            for h in Heuristic::ALL {
                bounds.push(cg(&inst, &g, &opts(s, h)).lp_bound);
            }
        }
        let lo = bounds.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = bounds.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        spread = spread.max(hi - lo);
    }
    let secs = t.elapsed().as_secs_f64();
    (spread <= 1e-6 && secs < 600.0, format!("max lp_bound spread {spread:.2e} over 16 combinations x 10 instances in {secs:.1}s"))
}

fn gap_quality() -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for m in [2u32, 4, 10] {
        let mut gaps = Vec::new();
        for seed in 0..10 {
            let inst = common::sized(50, m, seed);
            let (_, g) = common::graph(&inst);
            gaps.push(cg(&inst, &g, &opts(Scheme::Multiple, Heuristic::None)).ip_gap);
        }
        let avg = mean(&gaps);
        let zero = gaps.iter().filter(|&&x| x <= 1e-6).count();
        ok &= avg <= 0.02;
        if m == 2 {
            ok &= zero >= 8;
        }
        parts.push(format!("m={m}: avg {:.3}% zero {zero}/10", 100.0 * avg));
    }
    (ok, parts.join("; "))
}

fn edge_vs_colgen() -> (bool, String) {
    let mut gaps = Vec::new();
    let mut below = 0;
    for seed in 0..10 {
        let inst = common::sized(20, 4, seed);
        let (_, g) = common::graph(&inst);
        let e = solve_edge(&g, &inst, Some(IP_LIMIT)).expect("edge model");
        let r = cg(&inst, &g, &opts(Scheme::Best, Heuristic::None));
        below += usize::from(e.objective < r.ip_value - 1e-6 && !e.time_limit_hit);
        gaps.push(relative_gap(e.objective, r.ip_value));
    }
    let avg = mean(&gaps);
    let max = gaps.iter().copied().fold(0.0, f64::max);
    (avg <= 0.03 && below == 0, format!("avg {:.3}% max {:.3}%; edge below colgen IP on {below}", 100.0 * avg, 100.0 * max))
}

fn early_termination() -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for seed in 0..3 {
        let inst = common::sized(150, 20, seed);
        let (_, g) = common::graph(&inst);
        let base = opts(Scheme::Best, Heuristic::None);
        let t = Instant::now();
        let full = cg(&inst, &g, &base);
        let t_full = t.elapsed().as_secs_f64();
        let t = Instant::now();
        let early = cg(
            &inst,
            &g,
            &CgOptions {
                early_stop_iters: Some(50),
                ..base
            },
        );
        let t_early = t.elapsed().as_secs_f64();
        let dev = (full.lp_bound - early.ip_value) / full.lp_bound.abs().max(1e-9);
        let speedup = t_full / t_early.max(1e-9);
        ok &= dev <= 0.10 && speedup >= 2.0;
        parts.push(format!("seed {seed}: deviation {:.2}% speedup {speedup:.1}x", 100.0 * dev));
    }
    (ok, parts.join("; "))
}

fn invariants() -> (bool, String) {
    let mut failures = Vec::new();
    for seed in 0..100u64 {
        let inst = common::sized(3 + (seed % 23) as usize, 1 + (seed % 6) as u32, 1000 + seed);
        let (_, g) = common::graph(&inst);
        let scheme = Scheme::ALL[(seed % 4) as usize];
        let heuristic = Heuristic::ALL[(seed / 4 % 4) as usize];
        let r = cg(&inst, &g, &opts(scheme, heuristic));
        let mut why = Vec::new();
        if let Err(e) = g.check_structure() {
            why.push(e);
        }
        if let Err(e) = check_plan(&inst, &g.variants, &r.plan) {
            why.push(e);
        }
        // pricing is not elementary; only the selected plan must cover each leg once
        let mut cover = vec![0usize; g.num_legs];
        for it in &r.plan.itineraries {
            for &v in &it.variants {
                for &q in &g.variants[v].covered_idx {
                    cover[q] += 1;
                }
            }
        }
        if cover.iter().any(|&c| c > 1) {
            why.push("plan covers a leg twice".into());
        }
        for col in r.columns.iter().filter(|c| c.kind == RouteKind::Ride) {
            let sum: f64 = col.variants.iter().map(|&v| g.variants[v].saving_eur).sum();
            if (sum - col.saving).abs() > 1e-9 {
                why.push(format!("route saving {} recomputes to {sum}", col.saving));
            }
        }
        if r.log.windows(2).any(|w| w[1].lp_objective < w[0].lp_objective - 1e-7) {
            why.push("restricted LP decreased".into());
        }
        match max_reduced_saving(&g, &r.final_duals) {
            Some((v, _, _)) if v > 1e-6 => why.push(format!("route with reduced saving {v} remains")),
            _ => {}
        }
        if !r.converged {
            why.push("did not converge".into());
        }
        if !why.is_empty() {
            failures.push(format!("seed {seed}: {}", why.join(", ")));
        }
    }
    (failures.is_empty(), format!("100 instances; failures {failures:?}"))
}

fn fleet_monotonicity_and_ratios() -> ((bool, String), (bool, String)) {
    let fleets = [0u32, 1, 2, 4, 8];
    let mut drops = Vec::new();
    let mut ratio_bad = Vec::new();
    let (mut r1, mut r2) = (Vec::new(), Vec::new());
    for seed in 0..10 {
        let inst = common::sized(20, 0, 500 + seed);
        let rows = fleet_sweep(&inst, &fleets, &EnumCaps::default(), &opts(Scheme::Best, Heuristic::None)).expect("sweep");
        for w in rows.windows(2) {
            if w[1].ip_value < w[0].ip_value - 1e-6 {
                drops.push(format!("seed {seed}: m={} {} < m={} {}", w[1].fleet, w[1].ip_value, w[0].fleet, w[0].ip_value));
            }
        }
        for &m in &fleets {
            let c = compare(&with_fleet(&inst, m), &EnumCaps::default(), &opts(Scheme::Best, Heuristic::None)).expect("compare");
            if c.ratio_car_sharing < 1.0 - 1e-6 || c.ratio_user_dependent < c.ratio_car_sharing - 1e-6 {
                ratio_bad.push(format!("seed {seed} m={m}: {:.4} {:.4}", c.ratio_car_sharing, c.ratio_user_dependent));
            }
            if m > 0 {
                r1.push(c.ratio_car_sharing);
                r2.push(c.ratio_user_dependent);
            }
        }
    }
    let finite = |v: &[f64]| mean(&v.iter().copied().filter(|x| x.is_finite()).collect::<Vec<_>>());
    (
        (drops.is_empty(), format!("10 sweeps over m in {fleets:?}; decreases {drops:?}")),
        (
            ratio_bad.is_empty(),
            format!("50 comparisons; mean ratio car-sharing {:.3}, user-dependent {:.3}; violations {ratio_bad:?}", finite(&r1), finite(&r2)),
        ),
    )
}

fn pricing_counter() -> (bool, String) {
    let (runs, bad) = PRICING.with(Cell::get);
    (runs > 0 && bad == 0, format!("{runs} runs checked, {bad} with a pricing call not visiting every edge once"))
}

fn random_bounded_lp(rng: &mut ChaCha8Rng) -> MilpProblem {
    let (m, n) = (rng.gen_range(2..8), rng.gen_range(2..10));
    let mut p = MilpProblem::new();
    for _ in 0..m {
        let sense = if rng.gen_bool(0.3) { Sense::Eq } else { Sense::Le };
        p.add_row(sense, rng.gen_range(0.0..10.0));
    }
    for _ in 0..n {
        let mut entries = Vec::new();
        for i in 0..m {
            if rng.gen_bool(0.6) {
                entries.push((i, rng.gen_range(-2.0..4.0)));
            }
        }
        p.add_column(rng.gen_range(-5.0..5.0), entries, rng.gen_range(1.0..6.0), false);
    }
    // slack columns keep every equality reachable from zero
    for i in 0..m {
        p.add_column(-100.0, vec![(i, 1.0)], f64::INFINITY, false);
        p.add_column(-100.0, vec![(i, -1.0)], f64::INFINITY, false);
    }
    p
}

fn lp_kernel() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst: f64 = 0.0;
    let mut not_optimal = 0;
    for _ in 0..200 {
        let p = random_bounded_lp(&mut rng);
        let s = solve_lp(&p);
        if s.status != LpStatus::Optimal {
            not_optimal += 1;
            continue;
        }
        let yb: f64 = p.rows().iter().zip(&s.duals).map(|(r, y)| r.rhs * y).sum();
        let bound: f64 = p
            .columns()
            .iter()
            .zip(&s.reduced_costs)
            .map(|(c, d)| if c.upper.is_finite() && *d > 0.0 { d * c.upper } else { 0.0 })
            .sum();
        worst = worst.max((s.objective - yb - bound).abs());
    }
    let mut bnb_bad = 0;
    for _ in 0..50 {
        let mut p = MilpProblem::new();
        for _ in 0..3 {
            p.add_row(Sense::Le, rng.gen_range(5.0..20.0));
        }
        for _ in 0..12 {
            let entries = (0..3).map(|i| (i, rng.gen_range(0.0..8.0))).collect();
            p.add_column(rng.gen_range(-2.0..10.0), entries, 1.0, true);
        }
        let best = (0u32..1 << 12)
            .map(|mask| (0..12).map(|j| f64::from((mask >> j) & 1)).collect::<Vec<_>>())
            .filter(|x| p.max_violation(x) <= 1e-9)
            .map(|x| p.objective_value(&x))
            .fold(f64::NEG_INFINITY, f64::max);
        let ip = solve_ip(&p, None);
        bnb_bad += usize::from(ip.status != IpStatus::Optimal || (ip.objective - best).abs() > 1e-6);
    }
    (
        worst <= 1e-6 && not_optimal == 0 && bnb_bad == 0,
        format!("max |c.x - y.b - bound terms| {worst:.2e} on 200 LPs ({not_optimal} not optimal); B&B mismatches {bnb_bad}/50"),
    )
}

fn main() {
    let mut results: Vec<(usize, &str, (bool, String))> = Vec::new();
    let mut report = |n: usize, name: &'static str, r: (bool, String)| {
        println!("criterion {n:>2} {:<4} {name}: {}", if r.0 { "PASS" } else { "FAIL" }, r.1);
        results.push((n, name, r));
    };
    report(1, "oracle equivalence", oracle_equivalence());
    report(2, "scheme invariance", scheme_invariance());
    report(3, "gap quality", gap_quality());
    report(4, "edge vs colgen", edge_vs_colgen());
    report(5, "early termination", early_termination());
    report(7, "structural invariants", invariants());
    let (monotone, ratios) = fleet_monotonicity_and_ratios();
    report(8, "monotone fleet", monotone);
    report(9, "baseline ratios", ratios);
    report(6, "pricing complexity", pricing_counter());
    report(10, "lp kernel", lp_kernel());
    let failed: Vec<usize> = results.iter().filter(|r| !r.2 .0).map(|r| r.0).collect();
    if failed.is_empty() {
        println!("acceptance: all criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}

mod common;

use mmcrp::colgen::{max_reduced_saving, run, CgOptions, Heuristic, Master, Scheme};
use mmcrp::plan::{check_plan, Route, RouteKind};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn run_invariants_hold(seed in 0u64..10_000, scheme_ix in 0usize..4, heur_ix in 0usize..4) {
        let inst = common::sized(4 + (seed % 12) as usize, 1 + (seed % 4) as u32, seed);
        let (_, g) = common::graph(&inst);
        let opts = CgOptions::new(Scheme::ALL[scheme_ix], Heuristic::ALL[heur_ix]);
        let r = run(&inst, &g, &opts).unwrap();
        prop_assert!(r.converged);
        prop_assert!(r.pricing_visits_ok);
        for w in r.log.windows(2) {
            prop_assert!(w[1].lp_objective >= w[0].lp_objective - 1e-7);
        }
        let cert = max_reduced_saving(&g, &r.final_duals).unwrap();
        prop_assert!(cert.0 <= 1e-6, "route with reduced saving {} left", cert.0);
        prop_assert!(r.ip_value <= r.lp_bound + 1e-6);
        prop_assert!(check_plan(&inst, &g.variants, &r.plan).is_ok());
        prop_assert!((r.plan.objective - r.ip_value).abs() <= 1e-6 * (1.0 + r.ip_value.abs()));
        for col in &r.columns {
            prop_assert!(col.check(&g.variants).is_ok());
            if col.kind == RouteKind::Ride {
                let sum: f64 = col.variants.iter().map(|&v| g.variants[v].saving_eur).sum();
                prop_assert!((col.saving - sum).abs() <= 1e-9);
            }
        }
        let plain = run(&inst, &g, &CgOptions::default()).unwrap();
        prop_assert!((plain.lp_bound - r.lp_bound).abs() <= 1e-6 * (1.0 + r.lp_bound.abs()));
    }
}

#[test]
fn master_rejects_duplicate_columns() {
    let inst = common::sized(6, 2, 5);
    let (vs, _) = common::graph(&inst);
    let mut m = Master::new(&inst).unwrap();
    let r = Route::from_variants(&vs.all, &[0]).unwrap();
    assert!(m.add_route(r.clone()));
    assert!(!m.add_route(r.clone()));
    assert!(m.contains(&r));
    assert_eq!(m.num_ride_columns(), 1);
}

#[test]
fn iteration_limit_stops_after_that_many_master_solves() {
    let inst = common::sized(30, 4, 2);
    let (_, g) = common::graph(&inst);
    let mut opts = CgOptions::new(Scheme::Best, Heuristic::None);
    opts.max_iters = Some(5);
    let r = run(&inst, &g, &opts).unwrap();
    assert_eq!(r.iterations, 5);
    assert!(!r.converged);
    assert_eq!(r.log.len(), 5);
    opts.max_iters = None;
    opts.early_stop_iters = Some(7);
    assert_eq!(run(&inst, &g, &opts).unwrap().iterations, 7);
}

mod common;

use mmcrp::model::{
    cheapest_other_mot, leg_plan_saving, leg_saving_plain, leg_saving_share, other_leg_cost, trip_saving, Instance,
    LegPlan, LegRef, Location, Mot, Seconds, ShareRule,
};
use mmcrp::ridegraph::{feasible_share, leg_times, LegTimes};
use proptest::prelude::*;

fn loc() -> impl Strategy<Value = Location> {
    (0.0..20.0f64, 0.0..20.0f64).prop_map(|(x, y)| Location::new(x, y))
}

/// Drives the share leg second by second from a given departure.
fn simulate(instance: &Instance, driver_leg: LegRef, rider_leg: LegRef, depart: Seconds) -> Option<Seconds> {
    let (i1, j1) = instance.leg_stops(driver_leg);
    let (i2, j2) = instance.leg_stops(rider_leg);
    let mut t = depart + instance.detour_time(&i1.loc, &i2.loc);
    while t < i2.earliest_departure_s {
        t += 1;
    }
    t += instance.travel_time(&i2.loc, &j2.loc, Mot::Car);
    if t > j2.latest_arrival_s {
        return None;
    }
    t += instance.detour_time(&j2.loc, &j1.loc);
    (t <= j1.latest_arrival_s).then_some(t)
}

fn all_legs(instance: &Instance) -> Vec<LegRef> {
    instance.legs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn distance_and_time_are_symmetric(a in loc(), b in loc()) {
        let inst = common::tiny(0);
        prop_assert_eq!(a.distance_km(&b), b.distance_km(&a));
        for mot in Mot::ALL {
            prop_assert_eq!(inst.travel_time(&a, &b, mot), inst.travel_time(&b, &a, mot));
            prop_assert!((inst.leg_cost(&a, &b, mot) - inst.leg_cost(&b, &a, mot)).abs() < 1e-12);
        }
    }

    #[test]
    fn travel_time_grows_with_distance(a in loc(), b in loc(), c in loc()) {
        let inst = common::tiny(0);
        let (near, far) = if a.distance_km(&b) <= a.distance_km(&c) { (b, c) } else { (c, b) };
        for mot in Mot::ALL {
            prop_assert!(inst.travel_time(&a, &near, mot) <= inst.travel_time(&a, &far, mot));
            prop_assert!(inst.travel_time(&a, &a, mot) == inst.mots.get(mot).extra_time_s);
        }
    }

    #[test]
    fn later_deadlines_never_cost_more(a in loc(), b in loc(), depart in 21_600i64..60_000, slack in 0i64..20_000, extra in 0i64..5_000) {
        let inst = common::tiny(3);
        let user = &inst.users[0];
        let (_, early) = cheapest_other_mot(&inst, user, &a, &b, depart, depart + slack);
        let (_, late) = cheapest_other_mot(&inst, user, &a, &b, depart, depart + slack + extra);
        prop_assert!(late <= early + 1e-9);
        prop_assert!(early <= late + inst.costs.penalty_eur + 1e-9);
    }

    #[test]
    fn penalty_raises_infeasible_alternatives(seed in 0u64..500) {
        let inst = common::tiny(seed);
        let mut raised = inst.clone();
        raised.costs.penalty_eur *= 2.0;
        for leg in all_legs(&inst) {
            let (m, c) = other_leg_cost(&inst, leg);
            let (m2, c2) = other_leg_cost(&raised, leg);
            prop_assert!(c2 >= c - 1e-9);
            if c < inst.costs.penalty_eur {
                prop_assert_eq!(m, m2);
                prop_assert!((c - c2).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn share_saving_decomposes(seed in 0u64..500) {
        let inst = common::tiny(seed);
        for d in all_legs(&inst) {
            for r in all_legs(&inst) {
                if d.user == r.user {
                    continue;
                }
                let (di, dj) = inst.leg_stops(d);
                let (ri, rj) = inst.leg_stops(r);
                let added_car = inst.leg_cost(&ri.loc, &rj.loc, Mot::Car)
                    + inst.detour_cost(&di.loc, &ri.loc)
                    + inst.detour_cost(&rj.loc, &dj.loc)
                    - inst.leg_cost(&di.loc, &dj.loc, Mot::Car);
                let expect = leg_saving_plain(&inst, d) + other_leg_cost(&inst, r).1 - added_car;
                prop_assert!((leg_saving_share(&inst, d, r) - expect).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn joint_rule_never_exceeds_per_leg(seed in 0u64..500) {
        let per_leg = common::tiny(seed);
        let mut joint = per_leg.clone();
        joint.costs.share_rule = ShareRule::JointK;
        for d in all_legs(&per_leg) {
            for r in all_legs(&per_leg) {
                if d.user != r.user {
                    prop_assert!(leg_saving_share(&joint, d, r) >= leg_saving_share(&per_leg, d, r) - 1e-9);
                }
            }
        }
    }

    #[test]
    fn share_timeline_matches_simulation(seed in 0u64..300) {
        let inst = common::sized(6, 2, seed);
        for d in all_legs(&inst) {
            let (i1, _) = inst.leg_stops(d);
            for r in all_legs(&inst) {
                if d.user == r.user {
                    prop_assert!(!feasible_share(&inst, d, r));
                    continue;
                }
                let sim = simulate(&inst, d, r, i1.earliest_departure_s);
                prop_assert_eq!(feasible_share(&inst, d, r), sim.is_some());
                let plan = LegPlan::Share { rider: r.user, rider_leg: r.leg };
                if let Some(LegTimes { earliest_arrival, latest_departure }) = leg_times(&inst, d, plan) {
                    prop_assert_eq!(Some(earliest_arrival), sim);
                    prop_assert!(simulate(&inst, d, r, latest_departure).is_some());
                    prop_assert!(simulate(&inst, d, r, latest_departure + 1).is_none());
                }
            }
        }
    }

    #[test]
    fn variant_saving_is_sum_of_leg_savings(seed in 0u64..200) {
        let inst = common::sized(8, 2, seed);
        let (vs, _) = common::graph(&inst);
        for v in &vs.all {
            let sum: f64 = v.legs.iter().enumerate().map(|(k, &p)| leg_plan_saving(&inst, v.driver, k, p)).sum();
            prop_assert!((v.saving_eur - sum).abs() <= 1e-9);
            prop_assert!((trip_saving(&inst, v) - v.saving_eur).abs() <= 1e-9);
            let base = &vs.all[vs.by_user[v.driver][0]];
            prop_assert!(base.is_base());
            prop_assert!(v.saving_eur >= base.saving_eur - 1e-9);
        }
    }
}

#[test]
fn mode_names_round_trip() {
    for mot in Mot::ALL {
        let json = serde_json::to_string(&mot).unwrap();
        assert_eq!(json, format!("\"{}\"", mot.name()));
        assert_eq!(serde_json::from_str::<Mot>(&json).unwrap(), mot);
    }
}

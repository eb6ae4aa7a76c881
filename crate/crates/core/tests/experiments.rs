mod common;

use mmcrp::colgen::CgOptions;
use mmcrp::experiments::{compare, fleet_sweep, savings_ratio, write_sweep_csv};
use mmcrp::ridegraph::EnumCaps;

#[test]
fn sweep_is_monotone_and_starts_at_zero() {
    let inst = common::sized(15, 2, 7);
    let rows = fleet_sweep(&inst, &[0, 1, 2, 4], &EnumCaps::default(), &CgOptions::default()).unwrap();
    assert_eq!(rows[0].ip_value, 0.0);
    for w in rows.windows(2) {
        assert!(w[1].ip_value >= w[0].ip_value - 1e-6);
    }
    let mut buf = Vec::new();
    write_sweep_csv(&rows, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.starts_with("m,lp_bound,ip_value"));
}

#[test]
fn baselines_are_ordered() {
    for seed in 0..4 {
        let inst = common::sized(15, 3, seed);
        let c = compare(&inst, &EnumCaps::default(), &CgOptions::default()).unwrap();
        assert!(c.mmcrp.ip_value >= c.car_sharing.ip_value - 1e-6);
        assert!(c.car_sharing.ip_value >= c.user_dependent.ip_value - 1e-6);
        assert!(c.ratio_car_sharing >= 1.0 - 1e-6);
        assert!(c.ratio_user_dependent >= c.ratio_car_sharing - 1e-6);
    }
}

#[test]
fn without_shares_the_first_ratio_is_one() {
    let inst = common::sized(10, 2, 3);
    let caps = EnumCaps::no_shares();
    let c = compare(&inst, &caps, &CgOptions::default()).unwrap();
    assert!((c.ratio_car_sharing - 1.0).abs() <= 1e-9);
    assert_eq!(savings_ratio(0.0, 0.0), 1.0);
}

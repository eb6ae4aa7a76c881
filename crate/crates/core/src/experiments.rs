//! Fleet-size sweeps and baseline comparisons built on column generation.

use serde::Serialize;

use crate::colgen::{run_seeded, solve_fixed, user_dependent_routes, CgOptions, CgResult, ColgenError};
use crate::instgen::with_fleet;
use crate::model::Instance;
use crate::plan::{remap_routes, PlanStats, Route, RouteKind};
use crate::ridegraph::{build_graph, enumerate_variants, EnumCaps, GraphError, TimeSpaceGraph, Variants};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Colgen(#[from] ColgenError),
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub fleet: u32,
    pub lp_bound: f64,
    pub ip_value: f64,
    pub ip_gap: f64,
    pub iterations: usize,
    pub total_s: f64,
    pub stats: PlanStats,
}

fn ride_columns(r: &CgResult) -> Vec<Route> {
    r.columns.iter().filter(|c| c.kind == RouteKind::Ride).cloned().collect()
}

/// Solves the instance once per fleet size, split evenly over the depots.
/// Each run starts from the columns of the previous one, so the earlier
/// plan stays available when fleets are given in increasing order.
pub fn fleet_sweep(instance: &Instance, fleets: &[u32], caps: &EnumCaps, opts: &CgOptions) -> Result<Vec<SweepRow>, ExperimentError> {
    let variants = enumerate_variants(instance, caps);
    let mut seed: Vec<Route> = Vec::new();
    let mut rows = Vec::new();
    for &m in fleets {
        let inst = with_fleet(instance, m);
        let graph = build_graph(&inst, &variants)?;
        let r = run_seeded(&inst, &graph, opts, &seed)?;
        seed = ride_columns(&r);
        rows.push(SweepRow {
            fleet: m,
            lp_bound: r.lp_bound,
            ip_value: r.ip_value,
            ip_gap: r.ip_gap,
            iterations: r.iterations,
            total_s: r.timings.total_s,
            stats: r.plan.stats.clone(),
        });
    }
    Ok(rows)
}

pub fn write_sweep_csv<W: std::io::Write>(rows: &[SweepRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "m,lp_bound,ip_value,gap_pct,iterations,rides_per_car,shares_per_ride")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{:.4},{},{:.4},{:.4}",
            r.fleet,
            r.lp_bound,
            r.ip_value,
            100.0 * r.ip_gap,
            r.iterations,
            r.stats.rides_per_car,
            r.stats.shares_per_ride
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct BaselineValue {
    pub lp_bound: f64,
    pub ip_value: f64,
    pub stats: PlanStats,
}

#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub mmcrp: BaselineValue,
    pub car_sharing: BaselineValue,
    pub user_dependent: BaselineValue,
    /// MMCRP savings over car-sharing only.
    pub ratio_car_sharing: f64,
    /// MMCRP savings over the user-dependent assignment.
    pub ratio_user_dependent: f64,
}

/// `a / b`, with 1 when both are zero.
pub fn savings_ratio(a: f64, b: f64) -> f64 {
    if b.abs() <= 1e-9 {
        if a.abs() <= 1e-9 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        a / b
    }
}

fn graph_for(instance: &Instance, caps: &EnumCaps) -> Result<(Variants, TimeSpaceGraph), ExperimentError> {
    let v = enumerate_variants(instance, caps);
    let g = build_graph(instance, &v)?;
    Ok((v, g))
}

/// Solves the user-dependent assignment, car-sharing without ride shares,
/// and the full problem, each seeded with the columns of the previous one.
pub fn compare(instance: &Instance, caps: &EnumCaps, opts: &CgOptions) -> Result<Comparison, ExperimentError> {
    let (plain_vs, plain_g) = graph_for(instance, &EnumCaps { allow_shares: false, ..*caps })?;
    let ud_routes = user_dependent_routes(instance, &plain_vs);
    let (ud, _) = solve_fixed(instance, &plain_g, &ud_routes, opts.ip_time_limit)?;

    let cs = run_seeded(instance, &plain_g, opts, &ud_routes)?;
    let (full_vs, full_g) = graph_for(instance, caps)?;
    let seed = remap_routes(&ride_columns(&cs), &plain_vs.all, &full_vs.all);
    let full = run_seeded(instance, &full_g, opts, &seed)?;

    let value = |lp_bound: f64, ip_value: f64, stats: &PlanStats| BaselineValue {
        lp_bound,
        ip_value,
        stats: stats.clone(),
    };
    Ok(Comparison {
        ratio_car_sharing: savings_ratio(full.ip_value, cs.ip_value),
        ratio_user_dependent: savings_ratio(full.ip_value, ud.ip_value),
        mmcrp: value(full.lp_bound, full.ip_value, &full.plan.stats),
        car_sharing: value(cs.lp_bound, cs.ip_value, &cs.plan.stats),
        user_dependent: value(ud.lp_bound, ud.ip_value, &ud.plan.stats),
    })
}

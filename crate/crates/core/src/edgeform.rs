//! Direct edge formulation: one variable per graph edge, flow conservation at
//! inner nodes, depot inventories at sources and sinks, at most one cover per leg.

use std::time::{Duration, Instant};

use milp::{solve_ip, solve_lp, IpStatus, LpStatus, MilpProblem, Sense};
use serde::Serialize;

use crate::model::Instance;
use crate::plan::{Itinerary, Plan};
use crate::ridegraph::{EdgeKind, TimeSpaceGraph};

/// Largest model the dense simplex is asked to handle.
pub const MAX_ROWS: usize = 4000;
pub const MAX_COLUMNS: usize = 60_000;

#[derive(Debug, Clone)]
pub struct EdgeModel {
    pub problem: MilpProblem,
    /// Column of each graph edge.
    pub edge_col: Vec<usize>,
    pub num_flow_rows: usize,
    pub num_depot_rows: usize,
    pub num_leg_rows: usize,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EdgeFormError {
    #[error("edge model with {rows} rows and {columns} columns exceeds the limit of {MAX_ROWS} rows and {MAX_COLUMNS} columns")]
    TooLarge { rows: usize, columns: usize },
    #[error("edge model is infeasible")]
    Infeasible,
    #[error("no integer solution found within the time limit")]
    NoSolution,
}

pub fn build_edge_model(graph: &TimeSpaceGraph, instance: &Instance) -> EdgeModel {
    let mut p = MilpProblem::new();
    let nd = graph.num_depots();
    let mut node_row = vec![None; graph.nodes.len()];
    let mut num_flow_rows = 0;
    for v in 0..graph.nodes.len() {
        if !graph.sources.contains(&v) && !graph.sinks.contains(&v) {
            node_row[v] = Some(p.add_row(Sense::Eq, 0.0));
            num_flow_rows += 1;
        }
    }
    let start_rows: Vec<usize> = (0..nd)
        .map(|d| p.add_named_row(&format!("start_{d}"), Sense::Eq, instance.depots[d].vehicles_start as f64))
        .collect();
    let end_rows: Vec<usize> = (0..nd)
        .map(|d| p.add_named_row(&format!("end_{d}"), Sense::Eq, instance.depots[d].vehicles_end as f64))
        .collect();
    let leg_rows: Vec<usize> = (0..graph.num_legs).map(|q| p.add_named_row(&format!("leg_{q}"), Sense::Le, 1.0)).collect();
    let fleet = instance.fleet_size() as f64;
    let mut edge_col = Vec::with_capacity(graph.edges.len());
    for (id, e) in graph.edges.iter().enumerate() {
        let mut entries = Vec::new();
        if let Some(r) = node_row[e.tail] {
            entries.push((r, -1.0));
        }
        if let Some(r) = node_row[e.head] {
            entries.push((r, 1.0));
        }
        if let Some(d) = graph.sources.iter().position(|&s| s == e.tail) {
            entries.push((start_rows[d], 1.0));
        }
        if let Some(d) = graph.sinks.iter().position(|&s| s == e.head) {
            entries.push((end_rows[d], 1.0));
        }
        let (upper, name) = match e.kind {
            EdgeKind::Ride { variant } => {
                for &q in &graph.variants[variant].covered_idx {
                    entries.push((leg_rows[q], 1.0));
                }
                (1.0, format!("ride_{variant}"))
            }
            EdgeKind::Wait => (fleet, format!("wait_{id}")),
        };
        let col = p.add_column(e.saving, entries, upper, true);
        p.set_column_name(col, &name);
        edge_col.push(col);
    }
    EdgeModel {
        problem: p,
        edge_col,
        num_flow_rows,
        num_depot_rows: 2 * nd,
        num_leg_rows: graph.num_legs,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EdgeResult {
    pub objective: f64,
    pub lp_bound: f64,
    pub best_bound: f64,
    pub gap_open: bool,
    pub time_limit_hit: bool,
    pub nodes: usize,
    pub rows: usize,
    pub columns: usize,
    pub solve_s: f64,
    pub plan: Plan,
}

/// Splits an integral edge flow into one itinerary per vehicle.
pub fn decode_flow(graph: &TimeSpaceGraph, instance: &Instance, flow: &[f64]) -> Plan {
    let mut left: Vec<u32> = flow.iter().map(|x| x.round().max(0.0) as u32).collect();
    let mut its = Vec::new();
    for d in 0..graph.num_depots() {
        for _ in 0..instance.depots[d].vehicles_start {
            let mut v = graph.sources[d];
            let mut variants = Vec::new();
            let mut saving = 0.0;
            while let Some(&e) = graph.out_edges[v].iter().find(|&&e| left[e] > 0) {
                left[e] -= 1;
                if let Some(var) = graph.edges[e].variant() {
                    variants.push(var);
                    saving += graph.variants[var].saving_eur;
                }
                v = graph.edges[e].head;
            }
            its.push(Itinerary {
                start_depot: d,
                end_depot: graph.nodes[v].depot,
                variants,
                saving,
                relocation: false,
            });
        }
    }
    Plan::from_itineraries(instance, &graph.variants, its)
}

pub fn solve_edge(graph: &TimeSpaceGraph, instance: &Instance, time_limit: Option<Duration>) -> Result<EdgeResult, EdgeFormError> {
    let model = build_edge_model(graph, instance);
    let (rows, columns) = (model.problem.num_rows(), model.problem.num_columns());
    if rows > MAX_ROWS || columns > MAX_COLUMNS {
        return Err(EdgeFormError::TooLarge { rows, columns });
    }
    let start = Instant::now();
    let lp = solve_lp(&model.problem);
    if lp.status == LpStatus::Infeasible {
        return Err(EdgeFormError::Infeasible);
    }
    let ip = solve_ip(&model.problem, time_limit);
    match ip.status {
        IpStatus::Infeasible => return Err(EdgeFormError::Infeasible),
        IpStatus::NoSolution | IpStatus::Unbounded => return Err(EdgeFormError::NoSolution),
        IpStatus::Optimal | IpStatus::Feasible => {}
    }
    let flow: Vec<f64> = model.edge_col.iter().map(|&c| ip.values[c]).collect();
    let plan = decode_flow(graph, instance, &flow);
    Ok(EdgeResult {
        objective: ip.objective,
        lp_bound: lp.objective,
        best_bound: ip.best_bound,
        gap_open: ip.gap_open(),
        time_limit_hit: ip.time_limit_hit,
        nodes: ip.nodes,
        rows,
        columns,
        solve_s: start.elapsed().as_secs_f64(),
        plan,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::{all_mots, depots, instance, task, user};
    use crate::plan::check_plan;
    use crate::ridegraph::{build_graph, enumerate_variants, EnumCaps};

    #[test]
    fn zero_users_gives_only_waiting_columns() {
        let inst = Instance {
            users: Vec::new(),
            ..instance(depots(2, 1), vec![user(0, 0, vec![task(1.0, 1.0, 30_000, 31_000)], all_mots())])
        };
        let g = build_graph(&inst, &enumerate_variants(&inst, &EnumCaps::default())).unwrap();
        let r = solve_edge(&g, &inst, None).unwrap();
        assert_eq!(r.objective, 0.0);
        assert_eq!(r.columns, 2);
        assert!(check_plan(&inst, &g.variants, &r.plan).is_ok());
    }

    #[test]
    fn row_count_formula() {
        let inst = instance(
            depots(2, 1),
            vec![
                user(0, 0, vec![task(4.0, 3.0, 30_000, 33_000)], all_mots()),
                user(1, 1, vec![task(4.5, 3.0, 30_000, 33_000), task(9.0, 1.0, 36_000, 38_000)], all_mots()),
            ],
        );
        let g = build_graph(&inst, &enumerate_variants(&inst, &EnumCaps::default())).unwrap();
        let m = build_edge_model(&g, &inst);
        assert_eq!(m.problem.num_rows(), g.nodes.len() - 4 + 4 + inst.num_legs());
        assert_eq!(m.num_flow_rows, g.nodes.len() - 4);
        let r = solve_edge(&g, &inst, None).unwrap();
        assert!(check_plan(&inst, &g.variants, &r.plan).is_ok());
        assert!((r.plan.objective - r.objective).abs() < 1e-6);
        assert!(r.lp_bound >= r.objective - 1e-6);
    }

    #[test]
    fn no_vehicles_no_savings() {
        let inst = instance(depots(1, 0), vec![user(0, 0, vec![task(4.0, 3.0, 30_000, 33_000)], all_mots())]);
        let g = build_graph(&inst, &enumerate_variants(&inst, &EnumCaps::default())).unwrap();
        let r = solve_edge(&g, &inst, None).unwrap();
        assert_eq!(r.objective, 0.0);
        assert!(r.plan.itineraries.is_empty());
    }
}

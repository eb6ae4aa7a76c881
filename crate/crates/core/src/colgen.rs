//! Path formulation solved by delayed column generation.
//!
//! The restricted master holds one column per known vehicle route, with a
//! covering row per leg and start/end inventory rows per depot. Pricing is a
//! longest-path pass over the time-space graph in topological order, once
//! per start depot. Optionally a reduced graph is priced first until it
//! yields nothing, then pricing switches to the exact graph for good.

use std::collections::HashSet;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::{Duration, Instant};

use milp::{solve_ip, IpStatus, LpStatus, MilpProblem, Sense, Simplex};
use rayon::prelude::*;
use serde::Serialize;

use crate::model::{Instance, Seconds};
use crate::plan::{DualPrices, Plan, Route, RouteKind};
use crate::ridegraph::{drop_negative, reduce_prune, reduce_statespace, TimeSpaceGraph, Variants};

/// Reduced saving a column needs to enter the master.
pub const POSITIVE_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// The single column with the largest reduced saving.
    Best,
    /// The first column found with positive reduced saving.
    First,
    /// The best column of every (start, end) depot pair, if positive.
    FirstDep,
    /// Every positive label reaching a depot, completed by waiting.
    Multiple,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Best, Scheme::First, Scheme::FirstDep, Scheme::Multiple];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Best => "best",
            Scheme::First => "first",
            Scheme::FirstDep => "firstdep",
            Scheme::Multiple => "multiple",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Heuristic {
    None,
    /// Price without negative-saving ride edges.
    HeurEdges,
    /// Price with one edge per driver.
    HeurPrun,
    /// Price on a graph with nodes merged into time buckets.
    StateSpace,
}

impl Heuristic {
    pub const ALL: [Heuristic; 4] = [Heuristic::None, Heuristic::HeurEdges, Heuristic::HeurPrun, Heuristic::StateSpace];

    pub fn name(self) -> &'static str {
        match self {
            Heuristic::None => "none",
            Heuristic::HeurEdges => "heuredges",
            Heuristic::HeurPrun => "heurprun",
            Heuristic::StateSpace => "statespace",
        }
    }
}

macro_rules! named_enum {
    ($t:ty) => {
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $t {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, String> {
                <$t>::ALL
                    .into_iter()
                    .find(|x| x.name() == s)
                    .ok_or_else(|| format!("unknown value `{s}`"))
            }
        }
    };
}

named_enum!(Scheme);
named_enum!(Heuristic);

#[derive(Debug, Clone, PartialEq)]
pub struct CgOptions {
    pub scheme: Scheme,
    pub heuristic: Heuristic,
    pub max_iters: Option<usize>,
    /// Stop after this many master solves and go to the integer step.
    pub early_stop_iters: Option<usize>,
    pub time_limit: Option<Duration>,
    pub ip_time_limit: Option<Duration>,
    /// Bucket width of the state-space reduction.
    pub bucket_s: Seconds,
    /// Price start depots concurrently.
    pub parallel: bool,
}

impl Default for CgOptions {
    fn default() -> Self {
        CgOptions {
            scheme: Scheme::Best,
            heuristic: Heuristic::None,
            max_iters: None,
            early_stop_iters: None,
            time_limit: None,
            ip_time_limit: None,
            bucket_s: 600,
            parallel: true,
        }
    }
}

impl CgOptions {
    pub fn new(scheme: Scheme, heuristic: Heuristic) -> Self {
        CgOptions {
            scheme,
            heuristic,
            ..CgOptions::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ColgenError {
    #[error("vehicles at start ({start}) and end ({end}) of the horizon differ")]
    Unbalanced { start: u64, end: u64 },
    #[error("restricted master LP ended with status {0:?}")]
    Lp(LpStatus),
    #[error("restricted integer program ended with status {0:?}")]
    Ip(IpStatus),
}

type RouteKey = (usize, usize, Vec<usize>, u64);

fn route_key(r: &Route) -> RouteKey {
    (r.start_depot, r.end_depot, r.covered.clone(), r.saving.to_bits())
}

/// Restricted path-formulation master.
pub struct Master {
    problem: MilpProblem,
    simplex: Simplex,
    pub routes: Vec<Route>,
    keys: HashSet<RouteKey>,
    num_legs: usize,
    num_depots: usize,
}

impl Master {
    /// Covering and inventory rows with one idle column per depot and one
    /// relocation column per ordered depot pair.
    pub fn new(instance: &Instance) -> Result<Self, ColgenError> {
        let start: u64 = instance.depots.iter().map(|d| d.vehicles_start as u64).sum();
        let end: u64 = instance.depots.iter().map(|d| d.vehicles_end as u64).sum();
        if start != end {
            return Err(ColgenError::Unbalanced { start, end });
        }
        let num_legs = instance.num_legs();
        let nd = instance.depots.len();
        let mut problem = MilpProblem::new();
        for q in 0..num_legs {
            problem.add_named_row(format!("leg_{q}"), Sense::Le, 1.0);
        }
        for d in &instance.depots {
            problem.add_named_row(format!("start_{}", d.id), Sense::Eq, d.vehicles_start as f64);
        }
        for d in &instance.depots {
            problem.add_named_row(format!("end_{}", d.id), Sense::Eq, d.vehicles_end as f64);
        }
        let simplex = Simplex::new(&problem);
        let mut m = Master {
            problem,
            simplex,
            routes: Vec::new(),
            keys: HashSet::new(),
            num_legs,
            num_depots: nd,
        };
        for d in 0..nd {
            m.add_route(Route::idle(d));
        }
        for a in 0..nd {
            for b in 0..nd {
                if a != b {
                    m.add_route(Route::relocation(a, b));
                }
            }
        }
        Ok(m)
    }

    fn entries(&self, r: &Route) -> Vec<(usize, f64)> {
        let mut e: Vec<(usize, f64)> = Vec::with_capacity(r.covered.len() + 2);
        for &q in &r.covered {
            match e.last_mut() {
                Some((row, a)) if *row == q => *a += 1.0,
                _ => e.push((q, 1.0)),
            }
        }
        e.push((self.num_legs + r.start_depot, 1.0));
        e.push((self.num_legs + self.num_depots + r.end_depot, 1.0));
        e
    }

    /// Adds a column unless an identical one exists.
    pub fn add_route(&mut self, r: Route) -> bool {
        if !self.keys.insert(route_key(&r)) {
            return false;
        }
        let entries = self.entries(&r);
        let col = self.problem.add_column(r.saving, entries.clone(), f64::INFINITY, true);
        self.problem.set_column_name(col, format!("route_{col}"));
        self.simplex.add_column(r.saving, entries, f64::INFINITY);
        self.routes.push(r);
        true
    }

    pub fn contains(&self, r: &Route) -> bool {
        self.keys.contains(&route_key(r))
    }

    pub fn problem(&self) -> &MilpProblem {
        &self.problem
    }

    pub fn num_ride_columns(&self) -> usize {
        self.routes.iter().filter(|r| r.kind == RouteKind::Ride).count()
    }

    pub fn solve_lp(&mut self) -> Result<(f64, DualPrices), ColgenError> {
        let status = self.simplex.solve();
        if status != LpStatus::Optimal {
            return Err(ColgenError::Lp(status));
        }
        let y = self.simplex.duals();
        let (l, d) = (self.num_legs, self.num_depots);
        Ok((
            self.simplex.objective(),
            DualPrices {
                alpha: y[..l].to_vec(),
                beta: y[l..l + d].to_vec(),
                delta: y[l + d..].to_vec(),
            },
        ))
    }

    pub fn lp_values(&self) -> Vec<f64> {
        self.simplex.primal()
    }

    /// Solves the master over its current columns with integer variables.
    pub fn solve_ip(&self, instance: &Instance, variants: &[crate::ridegraph::TripVariant], limit: Option<Duration>) -> Result<IpOutcome, ColgenError> {
        let ip = solve_ip(&self.problem, limit);
        if !matches!(ip.status, IpStatus::Optimal | IpStatus::Feasible) {
            return Err(ColgenError::Ip(ip.status));
        }
        let chosen: Vec<(Route, usize)> = ip
            .values
            .iter()
            .enumerate()
            .filter(|(_, &x)| x > 0.5)
            .map(|(j, &x)| (self.routes[j].clone(), x.round() as usize))
            .collect();
        Ok(IpOutcome {
            value: ip.objective,
            gap_open: ip.gap_open(),
            time_limit_hit: ip.time_limit_hit,
            nodes: ip.nodes,
            plan: Plan::from_routes(instance, variants, &chosen),
        })
    }
}

pub struct IpOutcome {
    pub value: f64,
    pub gap_open: bool,
    pub time_limit_hit: bool,
    pub nodes: usize,
    pub plan: Plan,
}

pub fn reduced_saving(route: &Route, duals: &DualPrices) -> f64 {
    route.reduced_saving(duals)
}

/// Edge weights for pricing: ride saving minus the covering duals of its legs.
pub fn edge_weights(graph: &TimeSpaceGraph, duals: &DualPrices) -> Vec<f64> {
    graph
        .edges
        .iter()
        .map(|e| match e.variant() {
            Some(v) => e.saving - graph.variants[v].covered_idx.iter().map(|&q| duals.alpha[q]).sum::<f64>(),
            None => 0.0,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Label {
    pub reduced_saving: f64,
    pub end_depot: usize,
    /// Variant ids along the path.
    pub variants: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PricingResult {
    pub start_depot: usize,
    /// Best path into each depot's sink, if reachable.
    pub best_per_end: Vec<Option<Label>>,
    /// With `all_labels`: best path into every node entered by a ride edge,
    /// completed by waiting at that depot.
    pub labels: Vec<Label>,
    pub edge_visits: usize,
}

/// Longest path from `(start_depot, σ)` over the graph in topological order.
pub fn price(graph: &TimeSpaceGraph, weights: &[f64], duals: &DualPrices, start_depot: usize, all_labels: bool) -> PricingResult {
    let n = graph.nodes.len();
    let mut f = vec![f64::NEG_INFINITY; n];
    let mut pred = vec![usize::MAX; n];
    f[graph.sources[start_depot]] = 0.0;
    let mut edge_visits = 0;
    for &e in &graph.topo_order {
        edge_visits += 1;
        let edge = &graph.edges[e];
        let ft = f[edge.tail];
        if ft == f64::NEG_INFINITY {
            continue;
        }
        let cand = ft + weights[e];
        if cand > f[edge.head] {
            f[edge.head] = cand;
            pred[edge.head] = e;
        }
    }
    let path = |mut v: usize| {
        let mut out = Vec::new();
        while pred[v] != usize::MAX {
            let e = &graph.edges[pred[v]];
            if let Some(var) = e.variant() {
                out.push(var);
            }
            v = e.tail;
        }
        out.reverse();
        out
    };
    let constant = |d: usize| duals.beta[start_depot] + duals.delta[d];
    let best_per_end = (0..graph.num_depots())
        .map(|d| {
            let v = graph.sinks[d];
            (f[v] > f64::NEG_INFINITY).then(|| Label {
                reduced_saving: f[v] - constant(d),
                end_depot: d,
                variants: path(v),
            })
        })
        .collect();
    let mut labels = Vec::new();
    if all_labels {
        for v in 0..n {
            if pred[v] != usize::MAX && graph.edges[pred[v]].variant().is_some() {
                let d = graph.nodes[v].depot;
                labels.push(Label {
                    reduced_saving: f[v] - constant(d),
                    end_depot: d,
                    variants: path(v),
                });
            }
        }
    }
    PricingResult {
        start_depot,
        best_per_end,
        labels,
        edge_visits,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Heuristic,
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationLog {
    pub iteration: usize,
    pub phase: Phase,
    pub lp_objective: f64,
    pub columns_added: usize,
    pub pricing_ms: f64,
    pub master_ms: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Timings {
    pub pricing_s: f64,
    pub master_s: f64,
    pub ip_s: f64,
    pub total_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CgResult {
    pub lp_bound: f64,
    pub ip_value: f64,
    pub ip_gap: f64,
    pub ip_gap_open: bool,
    pub ip_time_limit_hit: bool,
    pub iterations: usize,
    pub heuristic_iterations: usize,
    /// Ride columns added by pricing.
    pub columns_generated: usize,
    pub columns_total: usize,
    /// True when pricing proved the LP bound optimal.
    pub converged: bool,
    pub time_limit_hit: bool,
    pub pricing_calls: usize,
    /// Every pricing call visited each edge of its graph exactly once.
    pub pricing_visits_ok: bool,
    /// Routes from a reduced graph that were not time-feasible on the exact graph.
    pub dropped_infeasible: usize,
    pub log: Vec<IterationLog>,
    pub timings: Timings,
    pub plan: Plan,
    #[serde(skip)]
    pub columns: Vec<Route>,
    #[serde(skip)]
    pub final_duals: DualPrices,
}

/// Relative gap between an upper bound and an incumbent.
pub fn relative_gap(lp: f64, ip: f64) -> f64 {
    let diff = lp - ip;
    if diff.abs() <= 1e-9 * (1.0 + lp.abs()) {
        0.0
    } else {
        diff / ip.abs().max(1e-9)
    }
}

#[derive(Default)]
struct PricingStats {
    calls: usize,
    visits_ok: bool,
    dropped: usize,
}

fn price_all(graph: &TimeSpaceGraph, duals: &DualPrices, all_labels: bool, parallel: bool, stats: &mut PricingStats) -> Vec<PricingResult> {
    let w = edge_weights(graph, duals);
    let run = |s: usize| price(graph, &w, duals, s, all_labels);
    let res: Vec<PricingResult> = if parallel {
        (0..graph.num_depots()).into_par_iter().map(run).collect()
    } else {
        (0..graph.num_depots()).map(run).collect()
    };
    for r in &res {
        stats.calls += 1;
        stats.visits_ok &= r.edge_visits == graph.edges.len();
    }
    res
}

fn to_route(graph: &TimeSpaceGraph, start: usize, label: &Label, stats: &mut PricingStats) -> Option<Route> {
    if label.variants.is_empty() {
        return None;
    }
    match Route::from_variants(&graph.variants, &label.variants) {
        Some(r) if r.start_depot == start && r.end_depot == label.end_depot => Some(r),
        _ => {
            stats.dropped += 1;
            None
        }
    }
}

/// Prices per the scheme and adds new columns; returns how many were added.
fn pricing_round(master: &mut Master, graph: &TimeSpaceGraph, duals: &DualPrices, opts: &CgOptions, stats: &mut PricingStats) -> usize {
    let positive = |l: &Label| l.reduced_saving > POSITIVE_EPS;
    match opts.scheme {
        Scheme::First => {
            let w = edge_weights(graph, duals);
            for s in 0..graph.num_depots() {
                let r = price(graph, &w, duals, s, false);
                stats.calls += 1;
                stats.visits_ok &= r.edge_visits == graph.edges.len();
                for l in r.best_per_end.iter().flatten().filter(|l| positive(l)) {
                    if let Some(route) = to_route(graph, s, l, stats) {
                        if master.add_route(route) {
                            return 1;
                        }
                    }
                }
            }
            0
        }
        Scheme::Best | Scheme::FirstDep => {
            let res = price_all(graph, duals, false, opts.parallel, stats);
            let mut cands: Vec<(f64, usize, usize, &Label)> = res
                .iter()
                .flat_map(|r| r.best_per_end.iter().flatten().map(move |l| (l.reduced_saving, r.start_depot, l.end_depot, l)))
                .filter(|c| positive(c.3))
                .collect();
            cands.sort_by(|a, b| b.0.total_cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));
            let mut added = 0;
            for (_, s, _, l) in cands {
                if let Some(route) = to_route(graph, s, l, stats) {
                    if master.add_route(route) {
                        added += 1;
                        if opts.scheme == Scheme::Best {
                            break;
                        }
                    }
                }
            }
            added
        }
        Scheme::Multiple => {
            let res = price_all(graph, duals, true, opts.parallel, stats);
            let mut seen = HashSet::new();
            let mut added = 0;
            for r in &res {
                let mut labels: Vec<&Label> = r.best_per_end.iter().flatten().chain(r.labels.iter()).filter(|l| positive(l)).collect();
                labels.sort_by(|a, b| b.reduced_saving.total_cmp(&a.reduced_saving).then(a.variants.cmp(&b.variants)));
                for l in labels {
                    if !seen.insert((r.start_depot, l.end_depot, l.variants.clone())) {
                        continue;
                    }
                    if let Some(route) = to_route(graph, r.start_depot, l, stats) {
                        added += master.add_route(route) as usize;
                    }
                }
            }
            added
        }
    }
}

/// Column generation from the idle and relocation columns alone.
pub fn run(instance: &Instance, graph: &TimeSpaceGraph, opts: &CgOptions) -> Result<CgResult, ColgenError> {
    run_seeded(instance, graph, opts, &[])
}

/// Column generation with extra starting columns, e.g. from a related run.
pub fn run_seeded(instance: &Instance, graph: &TimeSpaceGraph, opts: &CgOptions, seed: &[Route]) -> Result<CgResult, ColgenError> {
    let t0 = Instant::now();
    let mut master = Master::new(instance)?;
    for r in seed {
        if r.kind == RouteKind::Ride && r.check(&graph.variants).is_ok() {
            master.add_route(r.clone());
        }
    }
    let seeded = master.routes.len();
    let reduced = match opts.heuristic {
        Heuristic::None => None,
        Heuristic::HeurEdges => Some(drop_negative(graph)),
        Heuristic::HeurPrun => Some(reduce_prune(graph)),
        Heuristic::StateSpace => Some(reduce_statespace(graph, opts.bucket_s)),
    };
    let mut heuristic_phase = reduced.is_some();
    let mut stats = PricingStats {
        visits_ok: true,
        ..PricingStats::default()
    };
    let mut timings = Timings::default();
    let mut log = Vec::new();
    let mut iterations = 0;
    let mut heuristic_iterations = 0;
    let mut converged = false;
    let mut time_limit_hit = false;
    let (mut lp_bound, mut duals);
    loop {
        let tm = Instant::now();
        (lp_bound, duals) = master.solve_lp()?;
        let master_s = tm.elapsed().as_secs_f64();
        timings.master_s += master_s;
        iterations += 1;
        let mut entry = IterationLog {
            iteration: iterations,
            phase: if heuristic_phase { Phase::Heuristic } else { Phase::Exact },
            lp_objective: lp_bound,
            columns_added: 0,
            pricing_ms: 0.0,
            master_ms: master_s * 1e3,
        };
        let stop_iters = opts.early_stop_iters.into_iter().chain(opts.max_iters).min();
        if stop_iters.is_some_and(|n| iterations >= n) {
            log.push(entry);
            break;
        }
        if opts.time_limit.is_some_and(|l| t0.elapsed() >= l) {
            time_limit_hit = true;
            log.push(entry);
            break;
        }
        let tp = Instant::now();
        let added = loop {
            let g = if heuristic_phase { reduced.as_ref().unwrap() } else { graph };
            let added = pricing_round(&mut master, g, &duals, opts, &mut stats);
            if added > 0 || !heuristic_phase {
                break added;
            }
            heuristic_phase = false;
            entry.phase = Phase::Exact;
        };
        if entry.phase == Phase::Heuristic {
            heuristic_iterations += 1;
        }
        let pricing_s = tp.elapsed().as_secs_f64();
        timings.pricing_s += pricing_s;
        entry.pricing_ms = pricing_s * 1e3;
        entry.columns_added = added;
        log::debug!(
            "iteration {} ({:?}): lp {:.6}, {} columns added",
            entry.iteration,
            entry.phase,
            entry.lp_objective,
            added
        );
        log.push(entry);
        if added == 0 {
            converged = true;
            break;
        }
    }
    let ti = Instant::now();
    let ip = master.solve_ip(instance, &graph.variants, opts.ip_time_limit)?;
    timings.ip_s = ti.elapsed().as_secs_f64();
    log::info!(
        "{} iterations, lp bound {:.6}, ip {:.6}, {} columns",
        iterations,
        lp_bound,
        ip.value,
        master.routes.len()
    );
    timings.total_s = t0.elapsed().as_secs_f64();
    Ok(CgResult {
        lp_bound,
        ip_value: ip.value,
        ip_gap: relative_gap(lp_bound, ip.value),
        ip_gap_open: ip.gap_open,
        ip_time_limit_hit: ip.time_limit_hit,
        iterations,
        heuristic_iterations,
        columns_generated: master.routes.len() - seeded,
        columns_total: master.routes.len(),
        converged,
        time_limit_hit,
        pricing_calls: stats.calls,
        pricing_visits_ok: stats.visits_ok,
        dropped_infeasible: stats.dropped,
        log,
        timings,
        plan: ip.plan,
        columns: master.routes,
        final_duals: duals,
    })
}

/// Best reduced saving over all start and end depots on `graph`.
pub fn max_reduced_saving(graph: &TimeSpaceGraph, duals: &DualPrices) -> Option<(f64, usize, Label)> {
    let w = edge_weights(graph, duals);
    (0..graph.num_depots())
        .flat_map(|s| {
            price(graph, &w, duals, s, false)
                .best_per_end
                .into_iter()
                .flatten()
                .map(move |l| (l.reduced_saving, s, l))
        })
        .max_by(|a, b| a.0.total_cmp(&b.0))
}

/// One route per employee over its whole day of share-free trips: the car
/// is bound to that employee. Employees with a trip that cannot be driven get none.
pub fn user_dependent_routes(instance: &Instance, variants: &Variants) -> Vec<Route> {
    let mut days: Vec<(usize, Vec<usize>)> = Vec::new();
    for u in &instance.users {
        let base = variants.by_user[u.user_id].first().copied();
        match days.iter_mut().find(|(o, _)| *o == u.origin_user) {
            Some((_, ids)) => ids.extend(base),
            None => days.push((u.origin_user, base.into_iter().collect())),
        }
    }
    days.into_iter()
        .filter(|(o, ids)| {
            let trips = instance.users.iter().filter(|u| u.origin_user == *o).count();
            ids.len() == trips
        })
        .filter_map(|(_, ids)| Route::from_variants(&variants.all, &ids))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct FixedResult {
    pub lp_bound: f64,
    pub ip_value: f64,
    pub plan: Plan,
}

/// Solves the master over a fixed column set without pricing.
pub fn solve_fixed(instance: &Instance, graph: &TimeSpaceGraph, routes: &[Route], ip_time_limit: Option<Duration>) -> Result<(FixedResult, Vec<Route>), ColgenError> {
    let mut master = Master::new(instance)?;
    for r in routes {
        master.add_route(r.clone());
    }
    let (lp_bound, _) = master.solve_lp()?;
    let ip = master.solve_ip(instance, &graph.variants, ip_time_limit)?;
    Ok((
        FixedResult {
            lp_bound,
            ip_value: ip.value,
            plan: ip.plan,
        },
        master.routes,
    ))
}

pub fn write_convergence_csv<W: Write>(log: &[IterationLog], mut w: W) -> std::io::Result<()> {
    writeln!(w, "iteration,lp_objective,columns_added,pricing_ms,master_ms")?;
    for e in log {
        writeln!(
            w,
            "{},{},{},{:.3},{:.3}",
            e.iteration, e.lp_objective, e.columns_added, e.pricing_ms, e.master_ms
        )?;
    }
    Ok(())
}

//! Trip variants with ride-share insertions and the time-space graph built
//! from them, plus the graph reductions used by heuristic pricing.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashSet};
use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::model::{leg_plan_saving, Instance, LegPlan, LegRef, Mot, Seconds};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Share {
    pub driver_leg: usize,
    pub rider: usize,
    pub rider_leg: usize,
}

/// One depot-to-depot trip of a driver with fixed ride-share insertions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TripVariant {
    pub id: usize,
    pub driver: usize,
    pub start_depot: usize,
    pub end_depot: usize,
    pub depart_s: Seconds,
    pub arrive_s: Seconds,
    pub saving_eur: f64,
    /// Plan for each driver leg, depot legs included.
    pub legs: Vec<LegPlan>,
    pub shares: Vec<Share>,
    /// Covered legs: every driver leg plus the shared rider legs, sorted.
    pub covered: Vec<LegRef>,
    /// `covered` as positions in [`Instance::legs`].
    pub covered_idx: Vec<usize>,
}

impl TripVariant {
    pub fn is_base(&self) -> bool {
        self.shares.is_empty()
    }

    #[cfg(test)]
    pub(crate) fn for_tests(driver: usize, legs: Vec<LegPlan>) -> Self {
        TripVariant {
            id: 0,
            driver,
            start_depot: 0,
            end_depot: 0,
            depart_s: 0,
            arrive_s: 1,
            saving_eur: 0.0,
            legs,
            shares: Vec::new(),
            covered: Vec::new(),
            covered_idx: Vec::new(),
        }
    }
}

/// Earliest arrival at the leg's destination when departing its origin at
/// the earliest departure, and the latest departure that still meets all
/// deadlines. `None` if the leg cannot be driven in time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LegTimes {
    pub earliest_arrival: Seconds,
    pub latest_departure: Seconds,
}

pub fn leg_times(instance: &Instance, leg: LegRef, plan: LegPlan) -> Option<LegTimes> {
    let (i1, j1) = instance.leg_stops(leg);
    match plan {
        LegPlan::Plain => {
            let tt = instance.travel_time(&i1.loc, &j1.loc, Mot::Car);
            let arrival = i1.earliest_departure_s + tt;
            (arrival <= j1.latest_arrival_s).then_some(LegTimes {
                earliest_arrival: arrival,
                latest_departure: j1.latest_arrival_s - tt,
            })
        }
        LegPlan::Share { rider, rider_leg } => {
            let (i2, j2) = instance.leg_stops(LegRef {
                user: rider,
                leg: rider_leg,
            });
            let to_pickup = instance.detour_time(&i1.loc, &i2.loc);
            let ride = instance.travel_time(&i2.loc, &j2.loc, Mot::Car);
            let from_drop = instance.detour_time(&j2.loc, &j1.loc);
            let mut t = i1.earliest_departure_s + to_pickup;
            t = t.max(i2.earliest_departure_s) + ride;
            if t > j2.latest_arrival_s {
                return None;
            }
            t += from_drop;
            if t > j1.latest_arrival_s {
                return None;
            }
            let latest_pickup = (j1.latest_arrival_s - from_drop).min(j2.latest_arrival_s) - ride;
            Some(LegTimes {
                earliest_arrival: t,
                latest_departure: latest_pickup - to_pickup,
            })
        }
    }
}

/// Whether the driver can serve the rider's leg during its own leg: leave at
/// the driver's earliest departure, wait for the rider if early, and meet the
/// rider's and then the driver's deadline.
pub fn feasible_share(instance: &Instance, driver_leg: LegRef, rider_leg: LegRef) -> bool {
    driver_leg.user != rider_leg.user
        && leg_times(
            instance,
            driver_leg,
            LegPlan::Share {
                rider: rider_leg.user,
                rider_leg: rider_leg.leg,
            },
        )
        .is_some()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumCaps {
    pub max_shares_per_trip: Option<usize>,
    pub max_variants_per_user: Option<usize>,
    /// With `false` only base variants are produced (pure car-sharing).
    pub allow_shares: bool,
}

impl Default for EnumCaps {
    fn default() -> Self {
        EnumCaps {
            max_shares_per_trip: Some(3),
            max_variants_per_user: Some(200),
            allow_shares: true,
        }
    }
}

impl EnumCaps {
    pub fn unlimited() -> Self {
        EnumCaps {
            max_shares_per_trip: None,
            max_variants_per_user: None,
            allow_shares: true,
        }
    }

    pub fn no_shares() -> Self {
        EnumCaps {
            allow_shares: false,
            ..EnumCaps::default()
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EnumStats {
    pub drivers: usize,
    /// Users whose own trip cannot be driven in time.
    pub infeasible_base: usize,
    pub share_options: usize,
    pub variants: usize,
    /// Users whose variant list was cut by a cap.
    pub truncated_users: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variants {
    /// All variants, indexed by id.
    pub all: Vec<TripVariant>,
    /// Variant ids per user.
    pub by_user: Vec<Vec<usize>>,
    pub stats: EnumStats,
}

#[derive(Debug, Clone, Copy)]
struct LegOption {
    plan: LegPlan,
    saving: f64,
    times: LegTimes,
}

fn leg_options(instance: &Instance, driver: usize, leg: usize, allow_shares: bool) -> (Vec<LegOption>, usize) {
    let dleg = LegRef { user: driver, leg };
    let Some(times) = leg_times(instance, dleg, LegPlan::Plain) else {
        return (Vec::new(), 0);
    };
    let plain = LegOption {
        plan: LegPlan::Plain,
        saving: leg_plan_saving(instance, driver, leg, LegPlan::Plain),
        times,
    };
    let mut opts = vec![plain];
    let mut feasible = 0;
    if allow_shares {
        let origin = instance.users[driver].origin_user;
        for rider in &instance.users {
            // one person split into several trips cannot ride with themselves
            if rider.user_id == driver || rider.origin_user == origin {
                continue;
            }
            for rider_leg in 0..rider.num_legs() {
                let plan = LegPlan::Share {
                    rider: rider.user_id,
                    rider_leg,
                };
                let Some(times) = leg_times(instance, dleg, plan) else {
                    continue;
                };
                feasible += 1;
                let saving = leg_plan_saving(instance, driver, leg, plan);
                // a share that saves no more than driving alone is dominated:
                // it covers more and its departure/arrival times are no better
                if saving > plain.saving {
                    opts.push(LegOption { plan, saving, times });
                }
            }
        }
    }
    opts.sort_by(|a, b| b.saving.total_cmp(&a.saving).then(a.plan.cmp(&b.plan)));
    (opts, feasible)
}

#[derive(Debug)]
struct HeapItem {
    saving: f64,
    pos: Vec<u32>,
    last: usize,
}

impl PartialEq for HeapItem {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapItem {}
impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        self.saving
            .total_cmp(&other.saving)
            .then_with(|| other.pos.cmp(&self.pos))
    }
}

struct UserVariants {
    variants: Vec<TripVariant>,
    feasible_shares: usize,
    truncated: bool,
    infeasible_base: bool,
}

fn make_variant(instance: &Instance, driver: usize, opts: &[&LegOption], offsets: &[usize]) -> TripVariant {
    let u = &instance.users[driver];
    let n = opts.len();
    let mut covered: Vec<LegRef> = (0..n).map(|leg| LegRef { user: driver, leg }).collect();
    let mut shares = Vec::new();
    for (k, o) in opts.iter().enumerate() {
        if let LegPlan::Share { rider, rider_leg } = o.plan {
            shares.push(Share {
                driver_leg: k,
                rider,
                rider_leg,
            });
            covered.push(LegRef { user: rider, leg: rider_leg });
        }
    }
    covered.sort();
    let covered_idx = covered.iter().map(|l| offsets[l.user] + l.leg).collect();
    TripVariant {
        id: 0,
        driver,
        start_depot: u.start_depot,
        end_depot: u.end_depot,
        depart_s: opts[0].times.latest_departure,
        arrive_s: opts[n - 1].times.earliest_arrival,
        saving_eur: opts.iter().map(|o| o.saving).sum(),
        legs: opts.iter().map(|o| o.plan).collect(),
        shares,
        covered,
        covered_idx,
    }
}

fn user_variants(instance: &Instance, driver: usize, caps: &EnumCaps, offsets: &[usize]) -> UserVariants {
    let u = &instance.users[driver];
    let mut out = UserVariants {
        variants: Vec::new(),
        feasible_shares: 0,
        truncated: false,
        infeasible_base: false,
    };
    if !u.can_drive() {
        return out;
    }
    let n = u.num_legs();
    let mut options = Vec::with_capacity(n);
    for leg in 0..n {
        let (opts, feasible) = leg_options(instance, driver, leg, caps.allow_shares);
        if opts.is_empty() {
            out.infeasible_base = true;
            return out;
        }
        out.feasible_shares += feasible;
        options.push(opts);
    }
    let plain_pos: Vec<u32> = options
        .iter()
        .map(|o| o.iter().position(|x| x.plan == LegPlan::Plain).unwrap() as u32)
        .collect();
    let base: Vec<&LegOption> = options.iter().zip(&plain_pos).map(|(o, &p)| &o[p as usize]).collect();
    out.variants.push(make_variant(instance, driver, &base, offsets));

    let max_variants = caps.max_variants_per_user.unwrap_or(usize::MAX);
    let max_pops = caps.max_variants_per_user.map_or(usize::MAX, |k| 50 * k + 1000);
    let total_combos = options.iter().fold(1usize, |acc, o| acc.saturating_mul(o.len()));
    let mut heap = BinaryHeap::new();
    heap.push(HeapItem {
        saving: options.iter().map(|o| o[0].saving).sum(),
        pos: vec![0; n],
        last: 0,
    });
    let mut pops = 0;
    while let Some(item) = heap.pop() {
        pops += 1;
        for i in item.last..n {
            let next = item.pos[i] as usize + 1;
            if next < options[i].len() {
                let mut pos = item.pos.clone();
                pos[i] = next as u32;
                let saving = item.saving - options[i][next - 1].saving + options[i][next].saving;
                heap.push(HeapItem { saving, pos, last: i });
            }
        }
        if item.pos != plain_pos && combo_allowed(&options, &item.pos, caps) {
            if out.variants.len() >= max_variants {
                out.truncated = true;
                break;
            }
            let chosen: Vec<&LegOption> = options.iter().zip(&item.pos).map(|(o, &p)| &o[p as usize]).collect();
            out.variants.push(make_variant(instance, driver, &chosen, offsets));
        }
        if pops >= max_pops {
            out.truncated = pops < total_combos;
            break;
        }
    }
    out
}

fn combo_allowed(options: &[Vec<LegOption>], pos: &[u32], caps: &EnumCaps) -> bool {
    let mut riders = HashSet::new();
    for (o, &p) in options.iter().zip(pos) {
        if let LegPlan::Share { rider, rider_leg } = o[p as usize].plan {
            if !riders.insert((rider, rider_leg)) {
                return false;
            }
        }
    }
    caps.max_shares_per_trip.is_none_or(|k| riders.len() <= k)
}

/// Enumerates the trip variants of every user that can drive. The share-free
/// base variant comes first; further variants follow in order of decreasing
/// saving, with at most one rider per driver leg.
pub fn enumerate_variants(instance: &Instance, caps: &EnumCaps) -> Variants {
    let offsets = instance.leg_offsets();
    let per_user: Vec<UserVariants> = (0..instance.users.len())
        .into_par_iter()
        .map(|p| user_variants(instance, p, caps, &offsets))
        .collect();
    let mut all = Vec::new();
    let mut by_user = Vec::with_capacity(per_user.len());
    let mut stats = EnumStats::default();
    for (p, uv) in per_user.into_iter().enumerate() {
        if instance.users[p].can_drive() {
            stats.drivers += 1;
        }
        stats.infeasible_base += uv.infeasible_base as usize;
        stats.truncated_users += uv.truncated as usize;
        stats.share_options += uv.feasible_shares;
        let mut ids = Vec::with_capacity(uv.variants.len());
        for mut v in uv.variants {
            v.id = all.len();
            ids.push(v.id);
            all.push(v);
        }
        by_user.push(ids);
    }
    stats.variants = all.len();
    Variants { all, by_user, stats }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Node {
    pub depot: usize,
    pub time: Seconds,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EdgeKind {
    Ride { variant: usize },
    Wait,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
    pub kind: EdgeKind,
    pub saving: f64,
}

impl Edge {
    pub fn variant(&self) -> Option<usize> {
        match self.kind {
            EdgeKind::Ride { variant } => Some(variant),
            EdgeKind::Wait => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GraphError {
    #[error("variant {variant} runs from {depart} to {arrive}, outside the horizon {sigma}..{tau}")]
    OutsideHorizon {
        variant: usize,
        depart: Seconds,
        arrive: Seconds,
        sigma: Seconds,
        tau: Seconds,
    },
    #[error("variant {variant} does not move forward in time")]
    NotForward { variant: usize },
    #[error("variant {variant} references unknown depot")]
    UnknownDepot { variant: usize },
}

/// Time-space multigraph over (depot, time) nodes. Ride edges carry trip
/// variants, waiting edges link consecutive nodes of one depot.
#[derive(Debug, Clone)]
pub struct TimeSpaceGraph {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    /// Edge ids sorted by tail time, then tail depot, then id.
    pub topo_order: Vec<usize>,
    pub out_edges: Vec<Vec<usize>>,
    pub in_edges: Vec<Vec<usize>>,
    /// Node of `(d, σ)` per depot.
    pub sources: Vec<usize>,
    /// Node of `(d, τ)` per depot.
    pub sinks: Vec<usize>,
    /// Nodes of each depot in time order.
    pub depot_nodes: Vec<Vec<usize>>,
    pub variants: Arc<Vec<TripVariant>>,
    pub horizon: (Seconds, Seconds),
    pub num_legs: usize,
}

struct RideSpec {
    tail: Node,
    head: Node,
    variant: usize,
    saving: f64,
}

impl TimeSpaceGraph {
    /// Waiting chains go from each depot's `source` to its `sink` node
    /// through every node the ride edges touch at that depot.
    fn assemble(
        n_depots: usize,
        terminals: &[(Node, Node)],
        rides: Vec<RideSpec>,
        variants: Arc<Vec<TripVariant>>,
        horizon: (Seconds, Seconds),
        num_legs: usize,
    ) -> Self {
        let mut per_depot: Vec<BTreeMap<Seconds, usize>> = vec![BTreeMap::new(); n_depots];
        for (d, (s, t)) in terminals.iter().enumerate() {
            per_depot[d].insert(s.time, 0);
            per_depot[d].insert(t.time, 0);
        }
        for r in &rides {
            per_depot[r.tail.depot].insert(r.tail.time, 0);
            per_depot[r.head.depot].insert(r.head.time, 0);
        }
        let mut nodes = Vec::new();
        let mut depot_nodes = vec![Vec::new(); n_depots];
        for (d, times) in per_depot.iter_mut().enumerate() {
            for (&time, id) in times.iter_mut() {
                *id = nodes.len();
                depot_nodes[d].push(nodes.len());
                nodes.push(Node { depot: d, time });
            }
        }
        let mut edges = Vec::with_capacity(rides.len() + nodes.len());
        for r in &rides {
            edges.push(Edge {
                tail: per_depot[r.tail.depot][&r.tail.time],
                head: per_depot[r.head.depot][&r.head.time],
                kind: EdgeKind::Ride { variant: r.variant },
                saving: r.saving,
            });
        }
        for chain in &depot_nodes {
            for w in chain.windows(2) {
                edges.push(Edge {
                    tail: w[0],
                    head: w[1],
                    kind: EdgeKind::Wait,
                    saving: 0.0,
                });
            }
        }
        let mut out_edges = vec![Vec::new(); nodes.len()];
        let mut in_edges = vec![Vec::new(); nodes.len()];
        for (id, e) in edges.iter().enumerate() {
            out_edges[e.tail].push(id);
            in_edges[e.head].push(id);
        }
        let mut topo_order: Vec<usize> = (0..edges.len()).collect();
        topo_order.sort_by_key(|&id| {
            let t = &nodes[edges[id].tail];
            (t.time, t.depot, id)
        });
        let sources = terminals.iter().map(|(s, _)| per_depot[s.depot][&s.time]).collect();
        let sinks = terminals.iter().map(|(_, t)| per_depot[t.depot][&t.time]).collect();
        TimeSpaceGraph {
            nodes,
            edges,
            topo_order,
            out_edges,
            in_edges,
            sources,
            sinks,
            depot_nodes,
            variants,
            horizon,
            num_legs,
        }
    }

    pub fn num_depots(&self) -> usize {
        self.sources.len()
    }

    pub fn ride_edges(&self) -> impl Iterator<Item = (usize, &Edge)> {
        self.edges.iter().enumerate().filter(|(_, e)| e.variant().is_some())
    }

    pub fn num_ride_edges(&self) -> usize {
        self.ride_edges().count()
    }

    /// Edges covering each leg, by leg position.
    pub fn edges_by_leg(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_legs];
        for (id, e) in self.ride_edges() {
            for &q in &self.variants[e.variant().unwrap()].covered_idx {
                out[q].push(id);
            }
        }
        out
    }

    /// Ride edge id of each variant present in this graph.
    pub fn edge_of_variant(&self) -> Vec<Option<usize>> {
        let mut map = vec![None; self.variants.len()];
        for (id, e) in self.ride_edges() {
            map[e.variant().unwrap()] = Some(id);
        }
        map
    }

    /// Checks acyclicity through the time order and the terminal degrees.
    pub fn check_structure(&self) -> Result<(), String> {
        for (id, e) in self.edges.iter().enumerate() {
            if self.nodes[e.tail].time >= self.nodes[e.head].time {
                return Err(format!("edge {id} does not move forward in time"));
            }
        }
        let mut pos = vec![0; self.edges.len()];
        for (k, &e) in self.topo_order.iter().enumerate() {
            pos[e] = k;
        }
        for v in 0..self.nodes.len() {
            for &a in &self.in_edges[v] {
                for &b in &self.out_edges[v] {
                    if pos[a] >= pos[b] {
                        return Err(format!("edges {a} and {b} out of topological order"));
                    }
                }
            }
        }
        for d in 0..self.num_depots() {
            if !self.in_edges[self.sources[d]].is_empty() {
                return Err(format!("source of depot {d} has in-edges"));
            }
            if !self.out_edges[self.sinks[d]].is_empty() {
                return Err(format!("sink of depot {d} has out-edges"));
            }
            let chain = &self.depot_nodes[d];
            if chain.first() != Some(&self.sources[d]) || chain.last() != Some(&self.sinks[d]) {
                return Err(format!("waiting chain of depot {d} does not span source to sink"));
            }
        }
        Ok(())
    }

    /// Writes ride edges as CSV for debugging.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "tail_depot,tail_s,head_depot,head_s,variant_id,saving_eur")?;
        for (_, e) in self.ride_edges() {
            let (t, h) = (self.nodes[e.tail], self.nodes[e.head]);
            writeln!(
                w,
                "{},{},{},{},{},{}",
                t.depot,
                t.time,
                h.depot,
                h.time,
                e.variant().unwrap(),
                e.saving
            )?;
        }
        Ok(())
    }

    fn terminals(&self) -> Vec<(Node, Node)> {
        (0..self.num_depots())
            .map(|d| (self.nodes[self.sources[d]], self.nodes[self.sinks[d]]))
            .collect()
    }

    fn rebuild(&self, terminals: &[(Node, Node)], rides: Vec<RideSpec>) -> Self {
        Self::assemble(
            self.num_depots(),
            terminals,
            rides,
            self.variants.clone(),
            self.horizon,
            self.num_legs,
        )
    }
}

/// Builds the graph with one ride edge per variant.
pub fn build_graph(instance: &Instance, variants: &Variants) -> Result<TimeSpaceGraph, GraphError> {
    let (sigma, tau) = (instance.horizon.sigma_s, instance.horizon.tau_s);
    let mut rides = Vec::with_capacity(variants.all.len());
    for v in &variants.all {
        if v.start_depot >= instance.depots.len() || v.end_depot >= instance.depots.len() {
            return Err(GraphError::UnknownDepot { variant: v.id });
        }
        if v.depart_s < sigma || v.arrive_s > tau {
            return Err(GraphError::OutsideHorizon {
                variant: v.id,
                depart: v.depart_s,
                arrive: v.arrive_s,
                sigma,
                tau,
            });
        }
        if v.depart_s >= v.arrive_s {
            return Err(GraphError::NotForward { variant: v.id });
        }
        rides.push(RideSpec {
            tail: Node {
                depot: v.start_depot,
                time: v.depart_s,
            },
            head: Node {
                depot: v.end_depot,
                time: v.arrive_s,
            },
            variant: v.id,
            saving: v.saving_eur,
        });
    }
    let terminals: Vec<(Node, Node)> = (0..instance.depots.len())
        .map(|d| (Node { depot: d, time: sigma }, Node { depot: d, time: tau }))
        .collect();
    Ok(TimeSpaceGraph::assemble(
        instance.depots.len(),
        &terminals,
        rides,
        Arc::new(variants.all.clone()),
        (sigma, tau),
        instance.num_legs(),
    ))
}

/// Keeps, among parallel ride edges, the one with the largest saving (lowest
/// variant id on ties).
fn keep_best_parallel(rides: Vec<RideSpec>) -> Vec<RideSpec> {
    let mut best: BTreeMap<(usize, Seconds, usize, Seconds), RideSpec> = BTreeMap::new();
    for r in rides {
        let key = (r.tail.depot, r.tail.time, r.head.depot, r.head.time);
        match best.get(&key) {
            Some(b) if b.saving > r.saving || (b.saving == r.saving && b.variant < r.variant) => {}
            _ => {
                best.insert(key, r);
            }
        }
    }
    let mut out: Vec<RideSpec> = best.into_values().collect();
    out.sort_by_key(|r| r.variant);
    out
}

/// Merges nodes of one depot that fall into the same `bucket_s` interval.
/// A merged node takes the latest time it contains.
pub fn reduce_statespace(graph: &TimeSpaceGraph, bucket_s: Seconds) -> TimeSpaceGraph {
    let bucket_s = bucket_s.max(1);
    let mut target = vec![0; graph.nodes.len()];
    for chain in &graph.depot_nodes {
        let mut k = 0;
        while k < chain.len() {
            let b = graph.nodes[chain[k]].time.div_euclid(bucket_s);
            let mut end = k;
            while end + 1 < chain.len() && graph.nodes[chain[end + 1]].time.div_euclid(bucket_s) == b {
                end += 1;
            }
            let merged = graph.nodes[chain[end]].time;
            for &v in &chain[k..=end] {
                target[v] = merged;
            }
            k = end + 1;
        }
    }
    let moved = |v: usize| Node {
        depot: graph.nodes[v].depot,
        time: target[v],
    };
    let terminals: Vec<(Node, Node)> = (0..graph.num_depots())
        .map(|d| (moved(graph.sources[d]), moved(graph.sinks[d])))
        .collect();
    let rides = graph
        .ride_edges()
        .map(|(_, e)| RideSpec {
            tail: moved(e.tail),
            head: moved(e.head),
            variant: e.variant().unwrap(),
            saving: e.saving,
        })
        .filter(|r| r.tail.time < r.head.time)
        .collect();
    graph.rebuild(&terminals, keep_best_parallel(rides))
}

/// Keeps one edge per driver: the variant with the largest saving, spanning
/// the earliest departure to the latest arrival over all of that driver's
/// variants. Any path in the result is time-feasible with the kept variants.
pub fn reduce_prune(graph: &TimeSpaceGraph) -> TimeSpaceGraph {
    let mut per_driver: BTreeMap<usize, (usize, f64, Seconds, Seconds)> = BTreeMap::new();
    for (_, e) in graph.ride_edges() {
        let v = e.variant().unwrap();
        let (g, h) = (graph.nodes[e.tail].time, graph.nodes[e.head].time);
        let driver = graph.variants[v].driver;
        per_driver
            .entry(driver)
            .and_modify(|(best, saving, lo, hi)| {
                if e.saving > *saving || (e.saving == *saving && v < *best) {
                    *best = v;
                    *saving = e.saving;
                }
                *lo = (*lo).min(g);
                *hi = (*hi).max(h);
            })
            .or_insert((v, e.saving, g, h));
    }
    let rides = per_driver
        .into_values()
        .map(|(v, saving, lo, hi)| {
            let var = &graph.variants[v];
            RideSpec {
                tail: Node {
                    depot: var.start_depot,
                    time: lo,
                },
                head: Node {
                    depot: var.end_depot,
                    time: hi,
                },
                variant: v,
                saving,
            }
        })
        .collect();
    graph.rebuild(&graph.terminals(), rides)
}

/// Removes ride edges with negative saving; nodes and waiting edges stay.
pub fn drop_negative(graph: &TimeSpaceGraph) -> TimeSpaceGraph {
    let edges: Vec<Edge> = graph
        .edges
        .iter()
        .filter(|e| e.variant().is_none() || e.saving >= 0.0)
        .copied()
        .collect();
    let mut out_edges = vec![Vec::new(); graph.nodes.len()];
    let mut in_edges = vec![Vec::new(); graph.nodes.len()];
    for (id, e) in edges.iter().enumerate() {
        out_edges[e.tail].push(id);
        in_edges[e.head].push(id);
    }
    let mut topo_order: Vec<usize> = (0..edges.len()).collect();
    topo_order.sort_by_key(|&id| {
        let t = &graph.nodes[edges[id].tail];
        (t.time, t.depot, id)
    });
    TimeSpaceGraph {
        edges,
        topo_order,
        out_edges,
        in_edges,
        ..graph.clone()
    }
}

//! Exhaustive search over vehicle assignments for tiny instances.

use crate::model::Instance;
use crate::ridegraph::TimeSpaceGraph;

pub const MAX_RIDE_EDGES: usize = 25;
pub const MAX_FLEET: u32 = 3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("oracle limited to {MAX_RIDE_EDGES} ride edges and {MAX_FLEET} vehicles, got {ride_edges} and {fleet}")]
    TooLarge { ride_edges: usize, fleet: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OraclePath {
    pub start_depot: usize,
    pub end_depot: usize,
    /// Ride edge ids in driving order.
    pub edges: Vec<usize>,
    pub covered: Vec<usize>,
    pub saving: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// `None` when no assignment meets the depot inventories.
    pub value: Option<f64>,
    pub paths: Vec<OraclePath>,
    pub enumerated_paths: usize,
}

/// All vehicle paths: sequences of ride edges joined by waiting at a depot,
/// including the empty path at each depot. Paths covering a leg twice are skipped.
fn all_paths(graph: &TimeSpaceGraph) -> Vec<OraclePath> {
    let rides: Vec<usize> = graph.ride_edges().map(|(id, _)| id).collect();
    let mut out = Vec::new();
    for d in 0..graph.num_depots() {
        out.push(OraclePath {
            start_depot: d,
            end_depot: d,
            edges: Vec::new(),
            covered: Vec::new(),
            saving: 0.0,
        });
        let mut stack = Vec::new();
        extend(graph, &rides, d, graph.nodes[graph.sources[d]].time, d, &mut stack, &mut out);
    }
    out
}

fn extend(
    graph: &TimeSpaceGraph,
    rides: &[usize],
    start: usize,
    time: i64,
    depot: usize,
    stack: &mut Vec<usize>,
    out: &mut Vec<OraclePath>,
) {
    for &e in rides {
        let edge = &graph.edges[e];
        let tail = graph.nodes[edge.tail];
        if tail.depot != depot || tail.time < time {
            continue;
        }
        stack.push(e);
        let mut covered: Vec<usize> = stack
            .iter()
            .flat_map(|&x| graph.variants[graph.edges[x].variant().unwrap()].covered_idx.iter().copied())
            .collect();
        covered.sort_unstable();
        let before = covered.len();
        covered.dedup();
        if covered.len() == before {
            let head = graph.nodes[edge.head];
            out.push(OraclePath {
                start_depot: start,
                end_depot: head.depot,
                edges: stack.clone(),
                covered,
                saving: stack.iter().map(|&x| graph.edges[x].saving).sum(),
            });
            extend(graph, rides, start, head.time, head.depot, stack, out);
        }
        stack.pop();
    }
}

/// Best total saving over all assignments of one path per vehicle that
/// respect the depot inventories and cover every leg at most once.
pub fn brute_force(instance: &Instance, graph: &TimeSpaceGraph) -> Result<OracleResult, OracleError> {
    let ride_edges = graph.num_ride_edges();
    let fleet = instance.fleet_size();
    if ride_edges > MAX_RIDE_EDGES || fleet > MAX_FLEET {
        return Err(OracleError::TooLarge { ride_edges, fleet });
    }
    let paths = all_paths(graph);
    let vehicles: Vec<usize> = instance
        .depots
        .iter()
        .flat_map(|d| std::iter::repeat_n(d.id, d.vehicles_start as usize))
        .collect();
    let mut search = Search {
        paths: &paths,
        vehicles: &vehicles,
        ends_wanted: instance.depots.iter().map(|d| d.vehicles_end).collect(),
        ends: vec![0; instance.depots.len()],
        used: vec![false; graph.num_legs],
        chosen: Vec::new(),
        best: None,
    };
    search.go(0, 0, 0.0);
    let (value, paths_chosen) = match search.best {
        Some((v, idx)) => (Some(v), idx.iter().map(|&i| paths[i].clone()).collect()),
        None => (None, Vec::new()),
    };
    Ok(OracleResult {
        value,
        paths: paths_chosen,
        enumerated_paths: paths.len(),
    })
}

struct Search<'a> {
    paths: &'a [OraclePath],
    vehicles: &'a [usize],
    ends_wanted: Vec<u32>,
    ends: Vec<u32>,
    used: Vec<bool>,
    chosen: Vec<usize>,
    best: Option<(f64, Vec<usize>)>,
}

impl Search<'_> {
    /// Vehicles from one depot pick paths in nondecreasing index order, so
    /// each multiset of paths is visited once.
    fn go(&mut self, k: usize, min_path: usize, value: f64) {
        if k == self.vehicles.len() {
            if self.ends == self.ends_wanted && self.best.as_ref().is_none_or(|(b, _)| value > *b) {
                self.best = Some((value, self.chosen.clone()));
            }
            return;
        }
        let depot = self.vehicles[k];
        for i in min_path..self.paths.len() {
            let p = &self.paths[i];
            if p.start_depot != depot || p.covered.iter().any(|&q| self.used[q]) {
                continue;
            }
            for &q in &p.covered {
                self.used[q] = true;
            }
            self.ends[p.end_depot] += 1;
            self.chosen.push(i);
            let next_min = if self.vehicles.get(k + 1) == Some(&depot) { i } else { 0 };
            self.go(k + 1, next_min, value + p.saving);
            self.chosen.pop();
            self.ends[p.end_depot] -= 1;
            for &q in &p.covered {
                self.used[q] = false;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::{all_mots, depots, instance, task, user};
    use crate::ridegraph::{build_graph, enumerate_variants, EnumCaps};

    #[test]
    fn no_vehicles_is_zero() {
        let inst = instance(depots(1, 0), vec![user(0, 0, vec![task(4.0, 3.0, 30_000, 33_000)], all_mots())]);
        let g = build_graph(&inst, &enumerate_variants(&inst, &EnumCaps::default())).unwrap();
        assert_eq!(brute_force(&inst, &g).unwrap().value, Some(0.0));
    }

    #[test]
    fn single_positive_edge_is_taken() {
        // far meeting without a taxi: the alternatives are slow and costly
        let mots = [crate::model::Mot::Car, crate::model::Mot::Walk].into_iter().collect();
        let inst = instance(depots(1, 1), vec![user(0, 0, vec![task(8.0, 6.0, 30_000, 33_000)], mots)]);
        let g = build_graph(&inst, &enumerate_variants(&inst, &EnumCaps::default())).unwrap();
        let s = g.ride_edges().next().unwrap().1.saving;
        assert!(s > 0.0);
        let r = brute_force(&inst, &g).unwrap();
        assert_eq!(r.value, Some(s));
        assert_eq!(r.paths[0].edges.len(), 1);
    }

    #[test]
    fn guard_refuses_large_fleets() {
        let inst = instance(depots(1, 4), vec![user(0, 0, vec![task(4.0, 3.0, 30_000, 33_000)], all_mots())]);
        let g = build_graph(&inst, &enumerate_variants(&inst, &EnumCaps::default())).unwrap();
        assert!(matches!(brute_force(&inst, &g), Err(OracleError::TooLarge { fleet: 4, .. })));
    }
}

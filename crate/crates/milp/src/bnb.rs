use std::collections::HashMap;
use std::rc::Rc;
use std::time::{Duration, Instant};

use crate::problem::MilpProblem;
use crate::simplex::{Basis, LpStatus, Simplex};
use crate::{INTEGRALITY_TOL, OPTIMALITY_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IpStatus {
    /// Incumbent proven optimal.
    Optimal,
    /// Limit reached with an incumbent; `best_bound` may exceed its value.
    Feasible,
    Infeasible,
    Unbounded,
    /// Limit reached before any integral point was found.
    NoSolution,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IpSolution {
    pub status: IpStatus,
    pub objective: f64,
    pub values: Vec<f64>,
    pub best_bound: f64,
    pub root_bound: f64,
    pub nodes: usize,
    pub time_limit_hit: bool,
}

impl IpSolution {
    pub fn gap_open(&self) -> bool {
        self.best_bound - self.objective > OPTIMALITY_TOL
    }
}

#[derive(Debug, Clone)]
struct Node {
    changes: Vec<(usize, f64, f64)>,
    bound: f64,
    /// Sequence number of the solved parent and its optimal basis.
    parent: usize,
    basis: Option<Rc<Basis>>,
}

fn most_fractional(x: &[f64], integer: &[bool]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (j, (&v, &int)) in x.iter().zip(integer).enumerate() {
        if !int {
            continue;
        }
        let frac = v - v.floor();
        if frac <= INTEGRALITY_TOL || frac >= 1.0 - INTEGRALITY_TOL {
            continue;
        }
        let score = (frac - 0.5).abs();
        // strict comparison keeps the lowest index on ties
        if best.is_none_or(|(_, s)| score < s - 1e-12) {
            best = Some((j, score));
        }
    }
    best.map(|(j, _)| j)
}

/// Depth-first branch-and-bound on the most fractional integer column
/// (ties by lowest index), exploring the up branch first. Node LPs are
/// re-solved with the dual simplex from the parent's optimal basis. Whenever the
/// incumbent improves, root reduced costs fix columns that cannot lead to a
/// better solution.
pub fn solve_ip(problem: &MilpProblem, time_limit: Option<Duration>) -> IpSolution {
    let start = Instant::now();
    let integer: Vec<bool> = problem.columns().iter().map(|c| c.integer).collect();
    let root_bounds: Vec<(f64, f64)> = problem.columns().iter().map(|c| (0.0, c.upper)).collect();
    let mut lp = Simplex::new(problem);

    let root = lp.solve();
    let mut out = IpSolution {
        status: IpStatus::NoSolution,
        objective: f64::NEG_INFINITY,
        values: Vec::new(),
        best_bound: f64::INFINITY,
        root_bound: f64::NAN,
        nodes: 1,
        time_limit_hit: false,
    };
    match root {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => {
            out.status = IpStatus::Infeasible;
            out.best_bound = f64::NEG_INFINITY;
            return out;
        }
        LpStatus::Unbounded => {
            out.status = IpStatus::Unbounded;
            return out;
        }
        LpStatus::IterationLimit => {
            out.time_limit_hit = true;
            return out;
        }
    }
    out.root_bound = lp.objective();
    let root_x = lp.primal();
    let root_d = lp.reduced_costs(&lp.duals());
    let mut root_bounds = root_bounds;

    let mut applied: HashMap<usize, (f64, f64)> = HashMap::new();
    let mut stack = vec![Node {
        changes: Vec::new(),
        bound: out.root_bound,
        parent: 0,
        basis: None,
    }];
    let mut solved = 0usize;
    let mut first = true;
    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let prune_tol = |inc: f64| OPTIMALITY_TOL.max(1e-9 * inc.abs());

    while let Some(node) = stack.pop() {
        if let Some((inc, _)) = &incumbent {
            if node.bound <= inc + prune_tol(*inc) {
                continue;
            }
        }
        if time_limit.is_some_and(|tl| start.elapsed() >= tl) {
            stack.push(node);
            out.time_limit_hit = true;
            break;
        }
        let status = if first {
            first = false;
            LpStatus::Optimal
        } else {
            out.nodes += 1;
            // bring the solver to this node's bounds
            let mut target: HashMap<usize, (f64, f64)> = HashMap::new();
            let mut conflict = false;
            for &(j, l, u) in &node.changes {
                let (rl, ru) = root_bounds[j];
                let (l, u) = (l.max(rl), u.min(ru));
                conflict |= l > u;
                target.insert(j, (l, u));
            }
            if conflict {
                continue;
            }
            let stale: Vec<usize> = applied
                .keys()
                .copied()
                .filter(|j| !target.contains_key(j))
                .collect();
            for j in stale {
                let (l, u) = root_bounds[j];
                lp.set_bounds(j, l, u);
            }
            for (&j, &(l, u)) in &target {
                if applied.get(&j) != Some(&(l, u)) {
                    lp.set_bounds(j, l, u);
                }
            }
            applied = target;
            if node.parent != solved {
                if let Some(b) = &node.basis {
                    lp.set_basis(b);
                }
            }
            lp.solve()
        };
        solved += 1;
        match status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => {
                out.status = IpStatus::Unbounded;
                return out;
            }
            LpStatus::IterationLimit => continue,
        }
        let bound = lp.objective();
        if let Some((inc, _)) = &incumbent {
            if bound <= inc + prune_tol(*inc) {
                continue;
            }
        }
        let x = lp.primal();
        match most_fractional(&x, &integer) {
            None => {
                let vals: Vec<f64> = x
                    .iter()
                    .zip(&integer)
                    .map(|(&v, &int)| if int { v.round() } else { v })
                    .collect();
                let obj = problem.objective_value(&vals);
                if incumbent.as_ref().is_none_or(|(inc, _)| obj > *inc) {
                    incumbent = Some((obj, vals));
                    let limit = obj + prune_tol(obj) - out.root_bound;
                    for j in 0..root_bounds.len() {
                        let (l, u) = root_bounds[j];
                        let fixed = if root_x[j] <= l + INTEGRALITY_TOL && root_d[j] < limit.min(0.0) {
                            (l, l)
                        } else if u.is_finite() && root_x[j] >= u - INTEGRALITY_TOL && -root_d[j] < limit.min(0.0) {
                            (u, u)
                        } else {
                            continue;
                        };
                        if !integer[j] || fixed == (l, u) {
                            continue;
                        }
                        root_bounds[j] = fixed;
                        if !applied.contains_key(&j) {
                            lp.set_bounds(j, fixed.0, fixed.1);
                        }
                    }
                }
            }
            Some(j) => {
                let v = x[j];
                let (lo, hi) = node
                    .changes
                    .iter()
                    .rev()
                    .find(|c| c.0 == j)
                    .map(|c| (c.1, c.2))
                    .unwrap_or(root_bounds[j]);
                let mut down = node.changes.clone();
                down.retain(|c| c.0 != j);
                let mut up = down.clone();
                down.push((j, lo, v.floor()));
                up.push((j, v.ceil(), hi));
                let basis = lp.basis().map(Rc::new);
                stack.push(Node {
                    changes: down,
                    bound,
                    parent: solved,
                    basis: basis.clone(),
                });
                stack.push(Node {
                    changes: up,
                    bound,
                    parent: solved,
                    basis,
                });
            }
        }
    }

    let open_bound = stack
        .iter()
        .map(|n| n.bound)
        .fold(f64::NEG_INFINITY, f64::max);
    match incumbent {
        Some((obj, vals)) => {
            out.objective = obj;
            out.values = vals;
            out.best_bound = obj.max(open_bound);
            out.status = if out.time_limit_hit && open_bound > obj + prune_tol(obj) {
                IpStatus::Feasible
            } else {
                IpStatus::Optimal
            };
            if out.status == IpStatus::Optimal {
                out.best_bound = obj;
            }
        }
        None => {
            if out.time_limit_hit {
                out.status = IpStatus::NoSolution;
                out.best_bound = open_bound;
            } else {
                out.status = IpStatus::Infeasible;
                out.best_bound = f64::NEG_INFINITY;
            }
        }
    }
    out
}

//! Bounded revised simplex over a dense explicit basis inverse.
//!
//! Variables are laid out as `[slacks (m) | artificials (m) | structurals (n)]`.
//! Row `i` reads `a_i·x + s_i + σ_i·t_i = b_i`, where the slack `s_i` has
//! bounds `[0, ∞)` on `Le` rows and `[0, 0]` on `Eq` rows, and the artificial
//! `t_i` is only unfixed during phase one of a cold start.
//!
//! The solver keeps its basis between calls, so columns can be appended
//! (column generation, primal warm start) and bounds can be changed
//! (branch-and-bound, dual warm start).

use crate::problem::{MilpProblem, Sense};
use crate::{FEASIBILITY_TOL, OPTIMALITY_TOL};

const PIVOT_TOL: f64 = 1e-9;
const HARRIS_TOL: f64 = 1e-9;
const SINGULAR_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

/// Result of an LP solve. Duals follow the max-form convention: `Le` rows
/// carry `y ≥ 0`, `Eq` rows are free, and the reduced cost of column `j`
/// is `c_j − y·A_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective: f64,
    pub primal: Vec<f64>,
    pub duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic,
    AtLower,
    AtUpper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    One,
    Two,
}

#[derive(Debug)]
struct Singular;

/// Basis snapshot for restoring a previously optimal vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    basis: Vec<usize>,
    state: Vec<VarState>,
}

#[derive(Debug, Clone)]
pub struct Simplex {
    m: usize,
    rhs: Vec<f64>,
    senses: Vec<Sense>,
    cols: Vec<Vec<(usize, f64)>>,
    art_sign: Vec<f64>,
    obj: Vec<f64>,
    cost: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    state: Vec<VarState>,
    basis: Vec<usize>,
    x: Vec<f64>,
    binv: Vec<f64>,
    updates: usize,
    iterations: usize,
    phase: Phase,
    warm: bool,
    bland_pivots: usize,
}

impl Simplex {
    pub fn new(problem: &MilpProblem) -> Self {
        let m = problem.num_rows();
        let mut s = Simplex {
            m,
            rhs: problem.rows().iter().map(|r| r.rhs).collect(),
            senses: problem.rows().iter().map(|r| r.sense).collect(),
            cols: Vec::with_capacity(problem.num_columns()),
            art_sign: vec![1.0; m],
            obj: vec![0.0; 2 * m],
            cost: vec![0.0; 2 * m],
            lower: vec![0.0; 2 * m],
            upper: vec![0.0; 2 * m],
            state: vec![VarState::AtLower; 2 * m],
            basis: (0..m).collect(),
            x: vec![0.0; 2 * m],
            binv: Vec::new(),
            updates: 0,
            iterations: 0,
            phase: Phase::Two,
            warm: false,
            bland_pivots: 0,
        };
        for i in 0..m {
            s.upper[i] = match s.senses[i] {
                Sense::Le => f64::INFINITY,
                Sense::Eq => 0.0,
            };
        }
        for col in problem.columns() {
            s.push_column(col.obj, col.entries.clone(), col.upper);
        }
        s
    }

    fn push_column(&mut self, obj: f64, mut entries: Vec<(usize, f64)>, upper: f64) -> usize {
        entries.retain(|&(_, a)| a != 0.0);
        self.cols.push(entries);
        self.obj.push(obj);
        self.cost.push(if self.phase == Phase::Two { obj } else { 0.0 });
        self.lower.push(0.0);
        self.upper.push(upper);
        self.state.push(VarState::AtLower);
        self.x.push(0.0);
        self.cols.len() - 1
    }

    /// Appends a structural column, nonbasic at zero. The current basis stays
    /// primal feasible, so the next [`Simplex::solve`] continues from it.
    pub fn add_column(&mut self, obj: f64, entries: Vec<(usize, f64)>, upper: f64) -> usize {
        debug_assert!(entries.iter().all(|&(r, _)| r < self.m));
        self.push_column(obj, entries, upper)
    }

    pub fn num_rows(&self) -> usize {
        self.m
    }

    pub fn num_columns(&self) -> usize {
        self.cols.len()
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn bland_pivots(&self) -> usize {
        self.bland_pivots
    }

    fn structural(&self, j: usize) -> usize {
        2 * self.m + j
    }

    pub fn bounds(&self, j: usize) -> (f64, f64) {
        let v = self.structural(j);
        (self.lower[v], self.upper[v])
    }

    /// Changes the bounds of structural column `j`. A nonbasic column keeps
    /// its side when that side is finite; basic values are updated so the
    /// basis stays consistent (possibly primal infeasible).
    pub fn set_bounds(&mut self, j: usize, lower: f64, upper: f64) {
        let v = self.structural(j);
        self.lower[v] = lower;
        self.upper[v] = upper;
        if !self.warm || self.state[v] == VarState::Basic {
            return;
        }
        let target = if self.state[v] == VarState::AtUpper && upper.is_finite() {
            upper
        } else {
            self.state[v] = VarState::AtLower;
            lower
        };
        self.move_nonbasic(v, target);
    }

    fn move_nonbasic(&mut self, v: usize, target: f64) {
        let delta = target - self.x[v];
        if delta != 0.0 {
            let w = self.ftran(v);
            for (i, wi) in w.iter().enumerate() {
                if *wi != 0.0 {
                    let b = self.basis[i];
                    self.x[b] -= delta * wi;
                }
            }
        }
        self.x[v] = target;
    }

    // ---- linear algebra -------------------------------------------------

    fn dot_col(&self, v: &[f64], var: usize) -> f64 {
        let m = self.m;
        if var < m {
            v[var]
        } else if var < 2 * m {
            self.art_sign[var - m] * v[var - m]
        } else {
            self.cols[var - 2 * m].iter().map(|&(r, a)| v[r] * a).sum()
        }
    }

    /// `B⁻¹ a_var`.
    fn ftran(&self, var: usize) -> Vec<f64> {
        let m = self.m;
        let mut w = vec![0.0; m];
        let mut axpy = |k: usize, a: f64| {
            for (r, wr) in w.iter_mut().enumerate() {
                *wr += self.binv[r * m + k] * a;
            }
        };
        if var < m {
            axpy(var, 1.0);
        } else if var < 2 * m {
            axpy(var - m, self.art_sign[var - m]);
        } else {
            for &(k, a) in &self.cols[var - 2 * m] {
                axpy(k, a);
            }
        }
        w
    }

    /// `c_B B⁻¹`.
    fn duals_vec(&self) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for i in 0..m {
            let c = self.cost[self.basis[i]];
            if c != 0.0 {
                let row = &self.binv[i * m..(i + 1) * m];
                for (yk, bk) in y.iter_mut().zip(row) {
                    *yk += c * bk;
                }
            }
        }
        y
    }

    fn pivot(&mut self, r: usize, w: &[f64]) {
        let m = self.m;
        let piv = w[r];
        {
            let row = &mut self.binv[r * m..(r + 1) * m];
            for v in row.iter_mut() {
                *v /= piv;
            }
        }
        let (head, tail) = self.binv.split_at_mut(r * m);
        let (prow, rest) = tail.split_at_mut(m);
        for (i, &f) in w.iter().enumerate() {
            if i == r || f == 0.0 {
                continue;
            }
            let row = if i < r {
                &mut head[i * m..(i + 1) * m]
            } else {
                let k = i - r - 1;
                &mut rest[k * m..(k + 1) * m]
            };
            for (a, b) in row.iter_mut().zip(prow.iter()) {
                *a -= f * b;
            }
        }
        self.updates += 1;
    }

    fn refactor(&mut self) -> Result<(), Singular> {
        let m = self.m;
        // dense B, row-major: bmat[k*m + i] = (a_{basis[i]})_k
        let mut bmat = vec![0.0; m * m];
        for i in 0..m {
            let var = self.basis[i];
            if var < m {
                bmat[var * m + i] = 1.0;
            } else if var < 2 * m {
                bmat[(var - m) * m + i] = self.art_sign[var - m];
            } else {
                for &(k, a) in &self.cols[var - 2 * m] {
                    bmat[k * m + i] += a;
                }
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for c in 0..m {
            let mut p = c;
            let mut best = bmat[c * m + c].abs();
            for r in c + 1..m {
                let v = bmat[r * m + c].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best < SINGULAR_TOL {
                return Err(Singular);
            }
            if p != c {
                for k in 0..m {
                    bmat.swap(c * m + k, p * m + k);
                    inv.swap(c * m + k, p * m + k);
                }
            }
            let piv = bmat[c * m + c];
            for k in 0..m {
                bmat[c * m + k] /= piv;
                inv[c * m + k] /= piv;
            }
            for r in 0..m {
                if r == c {
                    continue;
                }
                let f = bmat[r * m + c];
                if f == 0.0 {
                    continue;
                }
                for k in 0..m {
                    bmat[r * m + k] -= f * bmat[c * m + k];
                    inv[r * m + k] -= f * inv[c * m + k];
                }
            }
        }
        // Gauss-Jordan on the rows of B yields B⁻¹ with rows indexed by basis position.
        self.binv = inv;
        self.updates = 0;
        self.recompute_basic_values();
        Ok(())
    }

    fn recompute_basic_values(&mut self) {
        let m = self.m;
        let mut r = self.rhs.clone();
        for var in 0..self.x.len() {
            if self.state[var] == VarState::Basic {
                continue;
            }
            let v = self.x[var];
            if v == 0.0 {
                continue;
            }
            if var < m {
                r[var] -= v;
            } else if var < 2 * m {
                r[var - m] -= self.art_sign[var - m] * v;
            } else {
                for &(k, a) in &self.cols[var - 2 * m] {
                    r[k] -= a * v;
                }
            }
        }
        for i in 0..m {
            let row = &self.binv[i * m..(i + 1) * m];
            let v: f64 = row.iter().zip(&r).map(|(b, rv)| b * rv).sum();
            let b = self.basis[i];
            self.x[b] = v;
        }
    }

    /// Row residuals of `x` and basic reduced costs are within tolerance.
    fn residuals_small(&self) -> bool {
        let m = self.m;
        let mut r = self.rhs.clone();
        for (var, &v) in self.x.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            if var < m {
                r[var] -= v;
            } else if var < 2 * m {
                r[var - m] -= self.art_sign[var - m] * v;
            } else {
                for &(k, a) in &self.cols[var - 2 * m] {
                    r[k] -= a * v;
                }
            }
        }
        let scale = 1.0 + self.rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        if r.iter().any(|v| v.abs() > 1e-9 * scale) {
            return false;
        }
        let y = self.duals_vec();
        self.basis.iter().all(|&b| (self.cost[b] - self.dot_col(&y, b)).abs() <= 1e-9 * (1.0 + self.cost[b].abs()))
    }

    fn refactor_interval(&self) -> usize {
        self.m.max(64)
    }

    fn iteration_limit(&self) -> usize {
        50 * (self.m + self.cols.len()) + 20_000
    }

    // ---- start ------------------------------------------------------------

    fn cold_start(&mut self) {
        let m = self.m;
        let n_all = self.x.len();
        for var in 2 * m..n_all {
            self.state[var] = VarState::AtLower;
            self.x[var] = self.lower[var];
        }
        let mut r = self.rhs.clone();
        for j in 0..self.cols.len() {
            let v = self.x[2 * m + j];
            if v != 0.0 {
                for &(k, a) in &self.cols[j] {
                    r[k] -= a * v;
                }
            }
        }
        self.binv = vec![0.0; m * m];
        for i in 0..m {
            let slack = i;
            let art = m + i;
            if self.senses[i] == Sense::Le && r[i] >= 0.0 {
                self.basis[i] = slack;
                self.state[slack] = VarState::Basic;
                self.x[slack] = r[i];
                self.state[art] = VarState::AtLower;
                self.lower[art] = 0.0;
                self.upper[art] = 0.0;
                self.x[art] = 0.0;
                self.art_sign[i] = 1.0;
                self.binv[i * m + i] = 1.0;
            } else {
                let sign = if r[i] >= 0.0 { 1.0 } else { -1.0 };
                self.art_sign[i] = sign;
                self.basis[i] = art;
                self.state[art] = VarState::Basic;
                self.lower[art] = 0.0;
                self.upper[art] = f64::INFINITY;
                self.x[art] = r[i].abs();
                self.state[slack] = VarState::AtLower;
                self.x[slack] = 0.0;
                self.binv[i * m + i] = sign;
            }
        }
        self.updates = 0;
        self.warm = true;
    }

    fn set_phase(&mut self, phase: Phase) {
        self.phase = phase;
        let m = self.m;
        for var in 0..self.x.len() {
            self.cost[var] = match phase {
                Phase::Two => self.obj[var],
                Phase::One => {
                    if var >= m && var < 2 * m && self.upper[var] > 0.0 {
                        -1.0
                    } else {
                        0.0
                    }
                }
            };
        }
    }

    fn solve_cold(&mut self) -> LpStatus {
        self.cold_start();
        self.set_phase(Phase::One);
        let st = self.run_primal();
        if st == LpStatus::IterationLimit {
            return st;
        }
        let m = self.m;
        let infeas: f64 = (m..2 * m).map(|v| self.x[v].max(0.0)).sum();
        let scale = 1.0 + self.rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        for v in m..2 * m {
            self.upper[v] = 0.0;
            if self.state[v] != VarState::Basic {
                self.x[v] = 0.0;
            }
        }
        if infeas > FEASIBILITY_TOL * scale {
            self.set_phase(Phase::Two);
            return LpStatus::Infeasible;
        }
        for v in m..2 * m {
            if self.state[v] == VarState::Basic {
                self.x[v] = 0.0;
            }
        }
        self.set_phase(Phase::Two);
        self.run_primal()
    }

    /// Solves from the current basis: primal simplex when the basis is primal
    /// feasible, dual simplex when it is dual feasible, cold two-phase start
    /// otherwise.
    pub fn solve(&mut self) -> LpStatus {
        let mut status = if !self.warm {
            self.solve_cold()
        } else {
            if self.phase != Phase::Two {
                self.set_phase(Phase::Two);
            }
            if self.primal_feasible() {
                self.run_primal()
            } else if self.make_dual_feasible() {
                match self.dual() {
                    LpStatus::Optimal => self.run_primal(),
                    other => other,
                }
            } else {
                self.solve_cold()
            }
        };
        // Verify on a fresh factorization unless the updated inverse still
        // reproduces the rows and basic reduced costs; drift gets a second pass.
        for _ in 0..3 {
            if status != LpStatus::Optimal {
                break;
            }
            if self.updates > 0 && self.residuals_small() && self.primal_feasible() && self.dual_feasible() {
                break;
            }
            if self.refactor().is_err() {
                status = self.solve_cold();
                continue;
            }
            if self.primal_feasible() && self.dual_feasible() {
                break;
            }
            status = if self.primal_feasible() {
                self.run_primal()
            } else if self.make_dual_feasible() {
                match self.dual() {
                    LpStatus::Optimal => self.run_primal(),
                    other => other,
                }
            } else {
                self.solve_cold()
            };
        }
        status
    }

    /// Snapshot of the current basis, or `None` before the first solve.
    pub fn basis(&self) -> Option<Basis> {
        self.warm.then(|| Basis {
            basis: self.basis.clone(),
            state: self.state.clone(),
        })
    }

    /// Reinstates a snapshot taken on this solver with the same columns,
    /// placing nonbasic columns at their current bounds. Falls back to a
    /// cold start on the next solve if the basis is singular.
    pub fn set_basis(&mut self, b: &Basis) {
        if b.state.len() != self.state.len() {
            self.warm = false;
            return;
        }
        self.basis.clone_from(&b.basis);
        self.state.clone_from(&b.state);
        for v in 0..self.x.len() {
            match self.state[v] {
                VarState::Basic => {}
                VarState::AtUpper if self.upper[v].is_finite() => self.x[v] = self.upper[v],
                _ => {
                    self.state[v] = VarState::AtLower;
                    self.x[v] = self.lower[v];
                }
            }
        }
        self.set_phase(Phase::Two);
        self.warm = self.refactor().is_ok();
    }

    /// Forgets the basis; the next solve starts from scratch.
    pub fn reset(&mut self) {
        self.warm = false;
    }

    fn primal_feasible(&self) -> bool {
        self.basis.iter().all(|&b| {
            self.x[b] >= self.lower[b] - FEASIBILITY_TOL && self.x[b] <= self.upper[b] + FEASIBILITY_TOL
        })
    }

    fn dual_feasible(&self) -> bool {
        let y = self.duals_vec();
        (0..self.x.len()).all(|v| {
            if self.state[v] == VarState::Basic || self.lower[v] == self.upper[v] {
                return true;
            }
            let d = self.cost[v] - self.dot_col(&y, v);
            match self.state[v] {
                VarState::AtLower => d <= OPTIMALITY_TOL,
                VarState::AtUpper => d >= -OPTIMALITY_TOL,
                VarState::Basic => true,
            }
        })
    }

    /// Flips boxed nonbasic variables to the bound their reduced cost asks
    /// for. Returns false when an unboxed variable has the wrong sign.
    fn make_dual_feasible(&mut self) -> bool {
        let y = self.duals_vec();
        let mut flips = Vec::new();
        for v in 0..self.x.len() {
            if self.state[v] == VarState::Basic || self.lower[v] == self.upper[v] {
                continue;
            }
            let d = self.cost[v] - self.dot_col(&y, v);
            match self.state[v] {
                VarState::AtLower if d > OPTIMALITY_TOL => {
                    if self.upper[v].is_finite() {
                        flips.push((v, VarState::AtUpper, self.upper[v]));
                    } else {
                        return false;
                    }
                }
                VarState::AtUpper if d < -OPTIMALITY_TOL => {
                    flips.push((v, VarState::AtLower, self.lower[v]));
                }
                _ => {}
            }
        }
        for (v, st, target) in flips {
            self.state[v] = st;
            self.move_nonbasic(v, target);
        }
        true
    }

    // ---- primal simplex ---------------------------------------------------

    fn run_primal(&mut self) -> LpStatus {
        let m = self.m;
        let limit = self.iteration_limit();
        let mut degenerate = 0usize;
        let mut bland = false;
        let mut local = 0usize;
        loop {
            if local >= limit {
                return LpStatus::IterationLimit;
            }
            if self.updates >= self.refactor_interval() && self.refactor().is_err() {
                return self.solve_cold();
            }
            let y = self.duals_vec();
            let mut enter: Option<(usize, f64)> = None;
            for v in 0..self.x.len() {
                if self.state[v] == VarState::Basic || self.lower[v] == self.upper[v] {
                    continue;
                }
                let d = self.cost[v] - self.dot_col(&y, v);
                let eligible = match self.state[v] {
                    VarState::AtLower => d > OPTIMALITY_TOL,
                    VarState::AtUpper => d < -OPTIMALITY_TOL,
                    VarState::Basic => false,
                };
                if !eligible {
                    continue;
                }
                if bland {
                    enter = Some((v, d));
                    break;
                }
                if enter.is_none_or(|(_, bd)| d.abs() > bd.abs()) {
                    enter = Some((v, d));
                }
            }
            let Some((q, _)) = enter else {
                return LpStatus::Optimal;
            };
            let dir = if self.state[q] == VarState::AtLower { 1.0 } else { -1.0 };
            let w = self.ftran(q);
            let flip = self.upper[q] - self.lower[q];

            // ratio test (Harris two-pass, or textbook min with lowest index under Bland)
            let step = |i: usize, tol: f64| -> Option<f64> {
                let dw = dir * w[i];
                let b = self.basis[i];
                if dw > PIVOT_TOL && self.lower[b].is_finite() {
                    Some(((self.x[b] - self.lower[b] + tol) / dw).max(0.0))
                } else if dw < -PIVOT_TOL && self.upper[b].is_finite() {
                    Some(((self.upper[b] - self.x[b] + tol) / -dw).max(0.0))
                } else {
                    None
                }
            };
            let mut leave: Option<usize> = None;
            let mut theta = flip;
            if bland {
                for i in 0..m {
                    if let Some(t) = step(i, 0.0) {
                        let better = match leave {
                            None => t < theta,
                            Some(l) => t < theta - 1e-12 || (t <= theta + 1e-12 && self.basis[i] < self.basis[l]),
                        };
                        if better {
                            theta = t;
                            leave = Some(i);
                        }
                    }
                }
            } else {
                let mut bound = f64::INFINITY;
                for i in 0..m {
                    if let Some(t) = step(i, HARRIS_TOL) {
                        bound = bound.min(t);
                    }
                }
                if bound < flip {
                    let mut best_piv = 0.0;
                    for i in 0..m {
                        if let Some(t) = step(i, 0.0) {
                            if t <= bound && w[i].abs() > best_piv {
                                best_piv = w[i].abs();
                                leave = Some(i);
                                theta = t;
                            }
                        }
                    }
                }
            }
            if leave.is_none() && !flip.is_finite() {
                return LpStatus::Unbounded;
            }
            self.iterations += 1;
            local += 1;

            self.x[q] += dir * theta;
            for i in 0..m {
                if w[i] != 0.0 {
                    let b = self.basis[i];
                    self.x[b] -= dir * theta * w[i];
                }
            }
            match leave {
                None => {
                    if self.state[q] == VarState::AtLower {
                        self.state[q] = VarState::AtUpper;
                        self.x[q] = self.upper[q];
                    } else {
                        self.state[q] = VarState::AtLower;
                        self.x[q] = self.lower[q];
                    }
                }
                Some(r) => {
                    let b = self.basis[r];
                    if dir * w[r] > 0.0 {
                        self.state[b] = VarState::AtLower;
                        self.x[b] = self.lower[b];
                    } else {
                        self.state[b] = VarState::AtUpper;
                        self.x[b] = self.upper[b];
                    }
                    self.pivot(r, &w);
                    self.basis[r] = q;
                    self.state[q] = VarState::Basic;
                }
            }
            if bland {
                self.bland_pivots += 1;
            }
            if theta < 1e-12 {
                degenerate += 1;
                if degenerate > 3 * m {
                    bland = true;
                }
            } else {
                degenerate = 0;
                bland = false;
            }
        }
    }

    // ---- dual simplex -----------------------------------------------------

    fn dual(&mut self) -> LpStatus {
        let m = self.m;
        let limit = self.iteration_limit();
        let mut local = 0usize;
        loop {
            if local >= limit {
                return LpStatus::IterationLimit;
            }
            if self.updates >= self.refactor_interval() && self.refactor().is_err() {
                return self.solve_cold();
            }
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..m {
                let b = self.basis[i];
                let viol = if self.x[b] < self.lower[b] - FEASIBILITY_TOL {
                    self.lower[b] - self.x[b]
                } else if self.x[b] > self.upper[b] + FEASIBILITY_TOL {
                    self.x[b] - self.upper[b]
                } else {
                    continue;
                };
                if leave.is_none_or(|(_, bv)| viol > bv) {
                    leave = Some((i, viol));
                }
            }
            let Some((r, _)) = leave else {
                return LpStatus::Optimal;
            };
            let b = self.basis[r];
            let below = self.x[b] < self.lower[b];
            let rho: Vec<f64> = self.binv[r * m..(r + 1) * m].to_vec();
            let y = self.duals_vec();

            let mut cands: Vec<(usize, f64, f64)> = Vec::new();
            for v in 0..self.x.len() {
                if self.state[v] == VarState::Basic || self.lower[v] == self.upper[v] {
                    continue;
                }
                let alpha = self.dot_col(&rho, v);
                let ok = match (self.state[v], below) {
                    (VarState::AtLower, true) => alpha < -PIVOT_TOL,
                    (VarState::AtUpper, true) => alpha > PIVOT_TOL,
                    (VarState::AtLower, false) => alpha > PIVOT_TOL,
                    (VarState::AtUpper, false) => alpha < -PIVOT_TOL,
                    _ => false,
                };
                if !ok {
                    continue;
                }
                let d = self.cost[v] - self.dot_col(&y, v);
                let slack = match self.state[v] {
                    VarState::AtLower => (-d).max(0.0),
                    _ => d.max(0.0),
                };
                cands.push((v, slack, alpha));
            }
            if cands.is_empty() {
                return LpStatus::Infeasible;
            }
            let bound = cands
                .iter()
                .map(|&(_, s, a)| (s + HARRIS_TOL) / a.abs())
                .fold(f64::INFINITY, f64::min);
            let mut q = None;
            let mut best = 0.0;
            for &(v, s, a) in &cands {
                if s / a.abs() <= bound && a.abs() > best {
                    best = a.abs();
                    q = Some(v);
                }
            }
            let q = q.expect("nonempty candidate set");
            let w = self.ftran(q);
            if w[r].abs() < PIVOT_TOL {
                // inconsistent with rho after drift: refactor and retry
                if self.refactor().is_err() {
                    return self.solve_cold();
                }
                local += 1;
                continue;
            }
            let target = if below { self.lower[b] } else { self.upper[b] };
            let delta = (self.x[b] - target) / w[r];
            self.iterations += 1;
            local += 1;
            self.x[q] += delta;
            for i in 0..m {
                if w[i] != 0.0 {
                    let bi = self.basis[i];
                    self.x[bi] -= delta * w[i];
                }
            }
            self.x[b] = target;
            self.state[b] = if below {
                VarState::AtLower
            } else {
                VarState::AtUpper
            };
            self.pivot(r, &w);
            self.basis[r] = q;
            self.state[q] = VarState::Basic;
        }
    }

    // ---- results ----------------------------------------------------------

    pub fn objective(&self) -> f64 {
        let off = 2 * self.m;
        (0..self.cols.len()).map(|j| self.obj[off + j] * self.x[off + j]).sum()
    }

    pub fn primal(&self) -> Vec<f64> {
        let off = 2 * self.m;
        self.x[off..].to_vec()
    }

    pub fn value(&self, j: usize) -> f64 {
        self.x[2 * self.m + j]
    }

    pub fn duals(&self) -> Vec<f64> {
        let mut y = self.duals_vec();
        for (i, yi) in y.iter_mut().enumerate() {
            if self.senses[i] == Sense::Le && *yi < 0.0 && *yi > -FEASIBILITY_TOL {
                *yi = 0.0;
            }
        }
        y
    }

    pub fn reduced_costs(&self, duals: &[f64]) -> Vec<f64> {
        let off = 2 * self.m;
        (0..self.cols.len())
            .map(|j| self.obj[off + j] - self.dot_col(duals, off + j))
            .collect()
    }

    pub fn solution(&self, status: LpStatus) -> LpSolution {
        if status != LpStatus::Optimal {
            return LpSolution {
                status,
                objective: f64::NAN,
                primal: Vec::new(),
                duals: Vec::new(),
                reduced_costs: Vec::new(),
            };
        }
        let duals = self.duals();
        let reduced_costs = self.reduced_costs(&duals);
        LpSolution {
            status,
            objective: self.objective(),
            primal: self.primal(),
            duals,
            reduced_costs,
        }
    }
}

/// Solves the LP relaxation of `problem` (integrality flags are ignored).
pub fn solve_lp(problem: &MilpProblem) -> LpSolution {
    let mut s = Simplex::new(problem);
    let st = s.solve();
    s.solution(st)
}

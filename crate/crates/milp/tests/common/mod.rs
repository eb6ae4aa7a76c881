//! Independent reference solvers used only by tests.

#![allow(dead_code)]

use milp::{MilpProblem, Sense};
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RefStatus {
    Optimal(f64),
    Infeasible,
    Unbounded,
}

/// Textbook two-phase tableau simplex with Bland's rule on a dense matrix.
/// Finite upper bounds become explicit `x_j ≤ u_j` rows.
pub fn tableau_solve(p: &MilpProblem) -> RefStatus {
    let n = p.num_columns();
    // rows: (coefs, sense, rhs)
    let mut rows: Vec<(Vec<f64>, Sense, f64)> = p
        .rows()
        .iter()
        .map(|r| (vec![0.0; n], r.sense, r.rhs))
        .collect();
    for (j, c) in p.columns().iter().enumerate() {
        for &(r, a) in &c.entries {
            rows[r].0[j] += a;
        }
    }
    for (j, c) in p.columns().iter().enumerate() {
        if c.upper.is_finite() {
            let mut coef = vec![0.0; n];
            coef[j] = 1.0;
            rows.push((coef, Sense::Le, c.upper));
        }
    }
    let m = rows.len();
    // columns: n structural, one slack/surplus per Le row, one artificial per row
    let n_slack = rows.iter().filter(|r| r.1 == Sense::Le).count();
    let total = n + n_slack + m;
    let mut t = vec![vec![0.0; total + 1]; m];
    let mut basis = vec![0usize; m];
    let mut s_idx = n;
    for (i, (coef, sense, rhs)) in rows.iter().enumerate() {
        let flip = if *rhs < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i][j] = flip * coef[j];
        }
        if *sense == Sense::Le {
            t[i][s_idx] = flip;
            s_idx += 1;
        }
        t[i][n + n_slack + i] = 1.0;
        t[i][total] = flip * rhs;
        basis[i] = n + n_slack + i;
    }
    // phase one: maximize -sum(artificials)
    let mut c1 = vec![0.0; total];
    for i in 0..m {
        c1[n + n_slack + i] = -1.0;
    }
    if bland_run(&mut t, &mut basis, &c1, total).is_none() {
        return RefStatus::Unbounded;
    }
    let infeas: f64 = (0..m)
        .filter(|&i| basis[i] >= n + n_slack)
        .map(|i| t[i][total])
        .sum();
    if infeas > 1e-7 {
        return RefStatus::Infeasible;
    }
    // drive out artificials where possible, then forbid them
    for i in 0..m {
        if basis[i] >= n + n_slack {
            if let Some(j) = (0..n + n_slack).find(|&j| t[i][j].abs() > 1e-9) {
                pivot(&mut t, i, j);
                basis[i] = j;
            }
        }
    }
    let mut c2 = vec![0.0; total];
    for (j, c) in p.columns().iter().enumerate() {
        c2[j] = c.obj;
    }
    for row in t.iter_mut() {
        for a in n + n_slack..total {
            row[a] = 0.0;
        }
    }
    match bland_run(&mut t, &mut basis, &c2, n + n_slack) {
        None => RefStatus::Unbounded,
        Some(()) => {
            let obj: f64 = (0..m)
                .filter(|&i| basis[i] < total)
                .map(|i| c2[basis[i]] * t[i][total])
                .sum();
            RefStatus::Optimal(obj)
        }
    }
}

fn pivot(t: &mut [Vec<f64>], r: usize, q: usize) {
    let piv = t[r][q];
    for v in t[r].iter_mut() {
        *v /= piv;
    }
    let prow = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i != r {
            let f = row[q];
            if f != 0.0 {
                for (a, b) in row.iter_mut().zip(&prow) {
                    *a -= f * b;
                }
            }
        }
    }
}

fn bland_run(t: &mut [Vec<f64>], basis: &mut [usize], c: &[f64], allowed: usize) -> Option<()> {
    let m = t.len();
    let rhs = t[0].len() - 1;
    for _ in 0..100_000 {
        let mut enter = None;
        for j in 0..allowed {
            if basis.contains(&j) {
                continue;
            }
            let d = c[j] - (0..m).map(|i| c[basis[i]] * t[i][j]).sum::<f64>();
            if d > 1e-9 {
                enter = Some(j);
                break;
            }
        }
        let Some(q) = enter else { return Some(()) };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            if t[i][q] > 1e-9 {
                let ratio = t[i][rhs] / t[i][q];
                let better = match leave {
                    None => true,
                    Some((l, best)) => {
                        ratio < best - 1e-12 || (ratio <= best + 1e-12 && basis[i] < basis[l])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let (r, _) = leave?;
        pivot(t, r, q);
        basis[r] = q;
    }
    panic!("reference tableau did not terminate");
}

/// Random LP mixing Le/Eq rows, signs and bounds. Feasibility is not guaranteed.
pub fn random_lp(rng: &mut impl Rng) -> MilpProblem {
    let n = rng.gen_range(2..=7);
    let m = rng.gen_range(1..=6);
    let mut p = MilpProblem::new();
    let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(0..4) as f64).collect();
    let mut coefs = vec![vec![0.0; n]; m];
    for row in coefs.iter_mut() {
        for a in row.iter_mut() {
            if rng.gen_bool(0.7) {
                *a = rng.gen_range(-3..=5) as f64;
            }
        }
    }
    for row in &coefs {
        let act: f64 = row.iter().zip(&x0).map(|(a, x)| a * x).sum();
        if rng.gen_bool(0.25) {
            p.add_row(Sense::Eq, act);
        } else {
            let slack = rng.gen_range(-2..=6) as f64;
            p.add_row(Sense::Le, act + slack);
        }
    }
    for j in 0..n {
        let entries: Vec<(usize, f64)> = (0..m)
            .filter(|&i| coefs[i][j] != 0.0)
            .map(|i| (i, coefs[i][j]))
            .collect();
        let upper = if rng.gen_bool(0.4) {
            rng.gen_range(1..=6) as f64
        } else {
            f64::INFINITY
        };
        p.add_column(rng.gen_range(-4..=6) as f64, entries, upper, false);
    }
    p
}

/// Random feasible and bounded LP without finite column bounds, so `y·b`
/// reproduces the optimum exactly.
pub fn random_bounded_lp(rng: &mut impl Rng) -> MilpProblem {
    let n = rng.gen_range(2..=10);
    let m = rng.gen_range(1..=8);
    let mut p = MilpProblem::new();
    let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..3.0)).collect();
    let mut coefs = vec![vec![0.0; n]; m + 1];
    for row in coefs.iter_mut().take(m) {
        for a in row.iter_mut() {
            if rng.gen_bool(0.6) {
                *a = rng.gen_range(-2.0..4.0);
            }
        }
    }
    // a dense nonnegative cap row keeps the region bounded
    for a in coefs[m].iter_mut() {
        *a = rng.gen_range(0.5..2.0);
    }
    for (i, row) in coefs.iter().enumerate() {
        let act: f64 = row.iter().zip(&x0).map(|(a, x)| a * x).sum();
        if i < m && rng.gen_bool(0.2) {
            p.add_row(Sense::Eq, act);
        } else {
            p.add_row(Sense::Le, act + rng.gen_range(0.0..5.0));
        }
    }
    for j in 0..n {
        let entries: Vec<(usize, f64)> = (0..=m)
            .filter(|&i| coefs[i][j] != 0.0)
            .map(|i| (i, coefs[i][j]))
            .collect();
        p.add_column(rng.gen_range(-3.0..5.0), entries, f64::INFINITY, false);
    }
    p
}

/// Random 0/1 problem with `n` binaries and a few knapsack rows.
pub fn random_binary(rng: &mut impl Rng, n: usize) -> MilpProblem {
    let m = rng.gen_range(1..=3);
    let mut p = MilpProblem::new();
    let mut coefs = vec![vec![0.0; n]; m];
    for (i, row) in coefs.iter_mut().enumerate() {
        let mut total = 0.0;
        for a in row.iter_mut() {
            *a = rng.gen_range(1..=20) as f64;
            total += *a;
        }
        let _ = i;
        p.add_row(Sense::Le, (total * rng.gen_range(0.2..0.6)).floor());
    }
    for j in 0..n {
        let entries: Vec<(usize, f64)> = (0..m).map(|i| (i, coefs[i][j])).collect();
        p.add_column(rng.gen_range(1..=30) as f64, entries, 1.0, true);
    }
    p
}

/// Best objective over all `2^n` binary points satisfying the rows.
pub fn enumerate_binary(p: &MilpProblem) -> Option<f64> {
    let n = p.num_columns();
    let mut best: Option<f64> = None;
    for mask in 0u32..(1u32 << n) {
        let x: Vec<f64> = (0..n).map(|j| ((mask >> j) & 1) as f64).collect();
        if p.max_violation(&x) <= 1e-9 {
            let v = p.objective_value(&x);
            if best.is_none_or(|b| v > b) {
                best = Some(v);
            }
        }
    }
    best
}

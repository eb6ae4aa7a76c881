use std::fmt::Write;

use crate::problem::{MilpProblem, Sense};

fn col_name(problem: &MilpProblem, j: usize) -> String {
    problem.columns()[j]
        .name
        .clone()
        .unwrap_or_else(|| format!("x{j}"))
}

fn row_name(problem: &MilpProblem, i: usize) -> String {
    problem.rows()[i]
        .name
        .clone()
        .unwrap_or_else(|| format!("r{i}"))
}

fn term(out: &mut String, first: &mut bool, coef: f64, name: &str) {
    if coef < 0.0 {
        let _ = write!(out, " - {} {}", -coef, name);
    } else if *first {
        let _ = write!(out, " {coef} {name}");
    } else {
        let _ = write!(out, " + {coef} {name}");
    }
    *first = false;
}

/// Renders the problem in CPLEX LP text format (objective sense MAX).
pub fn to_lp_string(problem: &MilpProblem) -> String {
    let mut out = String::from("\\ exported by mmcrp-milp\nMaximize\n obj:");
    let mut first = true;
    for (j, c) in problem.columns().iter().enumerate() {
        if c.obj != 0.0 {
            term(&mut out, &mut first, c.obj, &col_name(problem, j));
        }
    }
    if first {
        out.push_str(" 0");
    }
    out.push_str("\nSubject To\n");

    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); problem.num_rows()];
    for (j, c) in problem.columns().iter().enumerate() {
        for &(r, a) in &c.entries {
            rows[r].push((j, a));
        }
    }
    for (i, row) in problem.rows().iter().enumerate() {
        let _ = write!(out, " {}:", row_name(problem, i));
        let mut first = true;
        for &(j, a) in &rows[i] {
            term(&mut out, &mut first, a, &col_name(problem, j));
        }
        if first {
            out.push_str(" 0 x0");
        }
        let op = match row.sense {
            Sense::Le => "<=",
            Sense::Eq => "=",
        };
        let _ = writeln!(out, " {op} {}", row.rhs);
    }

    out.push_str("Bounds\n");
    for (j, c) in problem.columns().iter().enumerate() {
        let name = col_name(problem, j);
        if c.upper.is_finite() {
            let _ = writeln!(out, " 0 <= {name} <= {}", c.upper);
        } else {
            let _ = writeln!(out, " {name} >= 0");
        }
    }
    let ints: Vec<String> = problem
        .columns()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.integer)
        .map(|(j, _)| col_name(problem, j))
        .collect();
    if !ints.is_empty() {
        out.push_str("General\n");
        for chunk in ints.chunks(8) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
    }
    out.push_str("End\n");
    out
}

//! Embedded linear and mixed-integer programming for desk-scale models.
//!
//! Problems are stated in max form with `≤` and `=` rows and column bounds
//! `[0, u]`. [`solve_lp`] runs a bounded revised simplex on a dense basis
//! inverse and reports row duals; [`solve_ip`] wraps it in a depth-first
//! branch-and-bound. [`Simplex`] is exposed for callers that need warm
//! starts across column additions.

mod bnb;
mod lpfile;
mod problem;
mod simplex;

pub use bnb::{solve_ip, IpSolution, IpStatus};
pub use lpfile::to_lp_string;
pub use problem::{Column, MilpProblem, Row, Sense};
pub use simplex::{solve_lp, Basis, LpSolution, LpStatus, Simplex};

/// Primal feasibility tolerance.
pub const FEASIBILITY_TOL: f64 = 1e-7;
/// Reduced-cost tolerance.
pub const OPTIMALITY_TOL: f64 = 1e-6;
/// Integrality tolerance.
pub const INTEGRALITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MilpError {
    #[error("row {row} has a non-finite right-hand side")]
    NonFiniteRhs { row: usize },
    #[error("column {column} has a non-finite objective coefficient")]
    NonFiniteObjective { column: usize },
    #[error("column {column} has invalid upper bound {upper}")]
    BadUpperBound { column: usize, upper: f64 },
    #[error("column {column} references row {row}, but the problem has {rows} rows")]
    RowOutOfRange {
        column: usize,
        row: usize,
        rows: usize,
    },
    #[error("column {column} has a non-finite coefficient in row {row}")]
    NonFiniteCoefficient { column: usize, row: usize },
}

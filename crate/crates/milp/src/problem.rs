use crate::MilpError;

/// Row sense of a maximization problem. Greater-or-equal rows are not
/// needed by any caller and are expressed by negating a `Le` row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub sense: Sense,
    pub rhs: f64,
    pub name: Option<String>,
}

/// One column: objective coefficient, sparse row entries and bounds `[0, upper]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub obj: f64,
    pub entries: Vec<(usize, f64)>,
    pub upper: f64,
    pub integer: bool,
    pub name: Option<String>,
}

/// A linear program `max c·x  s.t.  A x (≤|=) b,  0 ≤ x ≤ u`, optionally
/// with integrality flags on some columns.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MilpProblem {
    rows: Vec<Row>,
    columns: Vec<Column>,
}

impl MilpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_row(&mut self, sense: Sense, rhs: f64) -> usize {
        self.rows.push(Row {
            sense,
            rhs,
            name: None,
        });
        self.rows.len() - 1
    }

    pub fn add_named_row(&mut self, name: impl Into<String>, sense: Sense, rhs: f64) -> usize {
        let id = self.add_row(sense, rhs);
        self.rows[id].name = Some(name.into());
        id
    }

    /// Adds a column with bounds `[0, upper]`. `upper` may be `f64::INFINITY`.
    pub fn add_column(
        &mut self,
        obj: f64,
        entries: Vec<(usize, f64)>,
        upper: f64,
        integer: bool,
    ) -> usize {
        self.columns.push(Column {
            obj,
            entries,
            upper,
            integer,
            name: None,
        });
        self.columns.len() - 1
    }

    pub fn set_column_name(&mut self, col: usize, name: impl Into<String>) {
        self.columns[col].name = Some(name.into());
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn set_integer(&mut self, col: usize, integer: bool) {
        self.columns[col].integer = integer;
    }

    pub fn set_objective(&mut self, col: usize, obj: f64) {
        self.columns[col].obj = obj;
    }

    /// Objective value of a primal vector.
    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.columns.iter().zip(x).map(|(c, v)| c.obj * v).sum()
    }

    /// Row activities `A x`.
    pub fn activities(&self, x: &[f64]) -> Vec<f64> {
        let mut act = vec![0.0; self.rows.len()];
        for (col, &v) in self.columns.iter().zip(x) {
            if v != 0.0 {
                for &(r, a) in &col.entries {
                    act[r] += a * v;
                }
            }
        }
        act
    }

    /// Largest violation of rows or bounds by `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let act = self.activities(x);
        let mut worst: f64 = 0.0;
        for (row, a) in self.rows.iter().zip(&act) {
            let v = match row.sense {
                Sense::Le => a - row.rhs,
                Sense::Eq => (a - row.rhs).abs(),
            };
            worst = worst.max(v);
        }
        for (col, &v) in self.columns.iter().zip(x) {
            worst = worst.max(-v).max(v - col.upper);
        }
        worst
    }

    pub fn validate(&self) -> Result<(), MilpError> {
        for (i, row) in self.rows.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(MilpError::NonFiniteRhs { row: i });
            }
        }
        for (j, col) in self.columns.iter().enumerate() {
            if !col.obj.is_finite() {
                return Err(MilpError::NonFiniteObjective { column: j });
            }
            if col.upper.is_nan() || col.upper < 0.0 {
                return Err(MilpError::BadUpperBound {
                    column: j,
                    upper: col.upper,
                });
            }
            for &(r, a) in &col.entries {
                if r >= self.rows.len() {
                    return Err(MilpError::RowOutOfRange {
                        column: j,
                        row: r,
                        rows: self.rows.len(),
                    });
                }
                if !a.is_finite() {
                    return Err(MilpError::NonFiniteCoefficient { column: j, row: r });
                }
            }
        }
        Ok(())
    }
}

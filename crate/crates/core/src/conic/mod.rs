//! Standard-form linear / second-order cone programs and a dense interior-point solver.
//!
//! A [`ConicProblem`] is
//!
//! ```text
//!     minimize    c'z
//!     subject to  A z = b
//!                 lo <= z <= hi               (per variable, may be infinite)
//!                 z[head] >= ||z[tail]||      (for each SOC block)
//! ```
//!
//! and [`solve`] returns a [`Solution`] whose status faithfully reports what happened.

mod cone;
mod ipm;

use thiserror::Error;

pub use ipm::solve;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConicError {
    #[error("column {col} out of range (problem has {n_vars} variables)")]
    IndexOutOfRange { col: usize, n_vars: usize },
    #[error("variable {0} is already the head of another cone")]
    DuplicateHead(usize),
    #[error("cone block with head {0} has an empty tail")]
    EmptyCone(usize),
    #[error("invalid bounds on variable {col}: [{lo}, {hi}]")]
    InvalidBounds { col: usize, lo: f64, hi: f64 },
    #[error("non-finite coefficient in {0}")]
    NonFinite(&'static str),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Second-order cone block `z[head] >= ||(z[tail[0]], z[tail[1]], ...)||`.
#[derive(Debug, Clone, PartialEq)]
pub struct SocBlock {
    pub head: usize,
    pub tail: Vec<usize>,
}

/// Sparse linear equality row `sum coef * z[col] = rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct EqRow {
    pub coefs: Vec<(usize, f64)>,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConicProblem {
    objective: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    eq_rows: Vec<EqRow>,
    soc_blocks: Vec<SocBlock>,
}

impl ConicProblem {
    /// `n_vars` free variables, zero objective, no constraints.
    pub fn new(n_vars: usize) -> Self {
        ConicProblem {
            objective: vec![0.0; n_vars],
            lower: vec![f64::NEG_INFINITY; n_vars],
            upper: vec![f64::INFINITY; n_vars],
            eq_rows: Vec::new(),
            soc_blocks: Vec::new(),
        }
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    /// Appends a variable with the given bounds and returns its column.
    pub fn add_var(&mut self, lo: f64, hi: f64) -> usize {
        self.objective.push(0.0);
        self.lower.push(lo);
        self.upper.push(hi);
        self.objective.len() - 1
    }

    fn check_col(&self, col: usize) -> Result<(), ConicError> {
        if col >= self.n_vars() {
            return Err(ConicError::IndexOutOfRange {
                col,
                n_vars: self.n_vars(),
            });
        }
        Ok(())
    }

    pub fn set_bounds(&mut self, col: usize, lo: f64, hi: f64) -> Result<(), ConicError> {
        self.check_col(col)?;
        if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
            return Err(ConicError::InvalidBounds { col, lo, hi });
        }
        self.lower[col] = lo;
        self.upper[col] = hi;
        Ok(())
    }

    pub fn bounds(&self, col: usize) -> (f64, f64) {
        (self.lower[col], self.upper[col])
    }

    /// Replaces the objective with `sum coef * z[col]`.
    pub fn set_objective(&mut self, coefs: &[(usize, f64)]) -> Result<(), ConicError> {
        for &(col, v) in coefs {
            self.check_col(col)?;
            if !v.is_finite() {
                return Err(ConicError::NonFinite("objective"));
            }
        }
        self.objective.iter_mut().for_each(|c| *c = 0.0);
        for &(col, v) in coefs {
            self.objective[col] += v;
        }
        Ok(())
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn add_eq(&mut self, coefs: Vec<(usize, f64)>, rhs: f64) -> Result<usize, ConicError> {
        for &(col, v) in &coefs {
            self.check_col(col)?;
            if !v.is_finite() {
                return Err(ConicError::NonFinite("equality row"));
            }
        }
        if !rhs.is_finite() {
            return Err(ConicError::NonFinite("equality rhs"));
        }
        self.eq_rows.push(EqRow { coefs, rhs });
        Ok(self.eq_rows.len() - 1)
    }

    /// Adds `sum coef * z[col] <= rhs` through a fresh nonnegative slack column.
    pub fn add_le(&mut self, mut coefs: Vec<(usize, f64)>, rhs: f64) -> Result<usize, ConicError> {
        let slack = self.add_var(0.0, f64::INFINITY);
        coefs.push((slack, 1.0));
        self.add_eq(coefs, rhs)?;
        Ok(slack)
    }

    pub fn add_soc(&mut self, head: usize, tail: Vec<usize>) -> Result<(), ConicError> {
        self.check_col(head)?;
        for &t in &tail {
            self.check_col(t)?;
        }
        if tail.is_empty() {
            return Err(ConicError::EmptyCone(head));
        }
        if self.soc_blocks.iter().any(|b| b.head == head) {
            return Err(ConicError::DuplicateHead(head));
        }
        self.soc_blocks.push(SocBlock { head, tail });
        Ok(())
    }

    /// Removes the cone block headed by `head`; returns whether one existed.
    pub fn remove_soc(&mut self, head: usize) -> bool {
        let before = self.soc_blocks.len();
        self.soc_blocks.retain(|b| b.head != head);
        self.soc_blocks.len() != before
    }

    pub fn eq_rows(&self) -> &[EqRow] {
        &self.eq_rows
    }

    pub fn soc_blocks(&self) -> &[SocBlock] {
        &self.soc_blocks
    }

    /// Dense copy of the equality system `(A, b)`.
    pub fn eq_matrix(&self) -> (nalgebra::DMatrix<f64>, nalgebra::DVector<f64>) {
        let mut a = nalgebra::DMatrix::zeros(self.eq_rows.len(), self.n_vars());
        let mut b = nalgebra::DVector::zeros(self.eq_rows.len());
        for (i, row) in self.eq_rows.iter().enumerate() {
            for &(j, v) in &row.coefs {
                a[(i, j)] += v;
            }
            b[i] = row.rhs;
        }
        (a, b)
    }

    /// Re-checks all structural invariants.
    pub fn validate(&self) -> Result<(), ConicError> {
        let n = self.n_vars();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(ConicError::DimensionMismatch("bounds length".into()));
        }
        for col in 0..n {
            let (lo, hi) = (self.lower[col], self.upper[col]);
            if lo.is_nan() || hi.is_nan() || lo > hi {
                return Err(ConicError::InvalidBounds { col, lo, hi });
            }
        }
        let mut heads = std::collections::BTreeSet::new();
        for blk in &self.soc_blocks {
            self.check_col(blk.head)?;
            for &t in &blk.tail {
                self.check_col(t)?;
            }
            if !heads.insert(blk.head) {
                return Err(ConicError::DuplicateHead(blk.head));
            }
        }
        for row in &self.eq_rows {
            for &(col, _) in &row.coefs {
                self.check_col(col)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    MaxIter,
    NumericalFailure,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::MaxIter => "max_iter",
            SolveStatus::NumericalFailure => "numerical_failure",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub tol_feas: f64,
    pub tol_gap: f64,
    pub max_iter: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            tol_feas: 1e-8,
            tol_gap: 1e-10,
            max_iter: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub status: SolveStatus,
    /// Primal vector, one entry per problem column.
    pub x: Vec<f64>,
    pub objective_value: f64,
    /// Largest absolute violation of equalities, bounds and cones seen by the solver.
    pub primal_residual: f64,
    /// Stationarity residual scaled by `1 + ||c||inf`.
    pub dual_residual: f64,
    /// Complementarity `s'z` relative to `max(1, |c'x|)`.
    pub gap: f64,
    pub iterations: usize,
}

impl Solution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

/// Feasibility audit computed directly from the problem data.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ResidualReport {
    pub eq_residual: f64,
    pub bound_violation: f64,
    pub cone_violation: f64,
}

impl ResidualReport {
    pub fn max(&self) -> f64 {
        self.eq_residual
            .max(self.bound_violation)
            .max(self.cone_violation)
    }
}

pub fn check_solution(problem: &ConicProblem, x: &[f64]) -> ResidualReport {
    assert_eq!(x.len(), problem.n_vars(), "primal vector length");
    let eq_residual = problem
        .eq_rows
        .iter()
        .map(|row| {
            let lhs: f64 = row.coefs.iter().map(|&(j, v)| v * x[j]).sum();
            (lhs - row.rhs).abs()
        })
        .fold(0.0, f64::max);
    let bound_violation = (0..problem.n_vars())
        .map(|j| {
            (problem.lower[j] - x[j])
                .max(x[j] - problem.upper[j])
                .max(0.0)
        })
        .fold(0.0, f64::max);
    let cone_violation = problem
        .soc_blocks
        .iter()
        .map(|blk| {
            let norm = blk.tail.iter().map(|&j| x[j] * x[j]).sum::<f64>().sqrt();
            (norm - x[blk.head]).max(0.0)
        })
        .fold(0.0, f64::max);
    ResidualReport {
        eq_residual,
        bound_violation,
        cone_violation,
    }
}

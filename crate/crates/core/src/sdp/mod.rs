//! Dense semidefinite programming in primal standard form
//!
//! ```text
//! minimize   Σ_b <C_b, X_b>
//! subject to Σ_b <A_kb, X_b> = b_k,   X_b ⪰ 0
//! ```
//!
//! with dual `maximize b·y  s.t.  S_b = C_b - Σ_k y_k A_kb ⪰ 0`.
//! Complex Hermitian programs go through [`HermitianProgram`].

mod hermitian;
mod solver;

use std::fmt;
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use hermitian::{HermitianProgram, HermitianSolution, Term, VarId, VarValue};
pub use solver::solve;

/// Largest real block the solver accepts.
pub const MAX_BLOCK_DIM: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    MaxIterations,
    /// The Newton system became numerically singular before convergence.
    Stalled,
}

impl fmt::Display for SdpStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SdpStatus::Optimal => "optimal",
            SdpStatus::Infeasible => "infeasible",
            SdpStatus::MaxIterations => "max_iterations",
            SdpStatus::Stalled => "stalled",
        })
    }
}

#[derive(Clone, Debug)]
pub struct Constraint {
    /// `(block, A_kb)`; blocks not listed have a zero coefficient.
    pub terms: Vec<(usize, DMatrix<f64>)>,
    pub rhs: f64,
}

#[derive(Clone, Debug)]
pub struct SdpProblem {
    blocks: Vec<usize>,
    objective: Vec<DMatrix<f64>>,
    constraints: Vec<Constraint>,
}

impl SdpProblem {
    pub fn new(blocks: Vec<usize>) -> Result<Self> {
        if let Some(&n) = blocks.iter().find(|&&n| n == 0 || n > MAX_BLOCK_DIM) {
            return Err(Error::MalformedSdp(format!(
                "block size {n} outside 1..={MAX_BLOCK_DIM}"
            )));
        }
        let objective = blocks.iter().map(|&n| DMatrix::zeros(n, n)).collect();
        Ok(SdpProblem {
            blocks,
            objective,
            constraints: Vec::new(),
        })
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn objective(&self) -> &[DMatrix<f64>] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn set_objective(&mut self, block: usize, c: DMatrix<f64>) -> Result<()> {
        self.check_coefficient(block, &c)?;
        self.objective[block] = c;
        Ok(())
    }

    pub fn add_constraint(&mut self, terms: Vec<(usize, DMatrix<f64>)>, rhs: f64) -> Result<()> {
        for (b, a) in &terms {
            self.check_coefficient(*b, a)?;
        }
        if !rhs.is_finite() {
            return Err(Error::MalformedSdp("non-finite right-hand side".into()));
        }
        self.constraints.push(Constraint { terms, rhs });
        Ok(())
    }

    fn check_coefficient(&self, block: usize, a: &DMatrix<f64>) -> Result<()> {
        let n = *self
            .blocks
            .get(block)
            .ok_or_else(|| Error::MalformedSdp(format!("no block {block}")))?;
        if a.nrows() != n || a.ncols() != n {
            return Err(Error::MalformedSdp(format!(
                "coefficient is {}x{} for block {block} of size {n}",
                a.nrows(),
                a.ncols()
            )));
        }
        let asym = (a - a.transpose()).amax();
        if asym > 1e-12 * (1.0 + a.amax()) || a.iter().any(|x| !x.is_finite()) {
            return Err(Error::MalformedSdp(format!(
                "coefficient for block {block} is not symmetric (defect {asym:.3e})"
            )));
        }
        Ok(())
    }

    /// `Σ_b <C_b, X_b>`.
    pub fn primal_objective(&self, x: &[DMatrix<f64>]) -> f64 {
        self.objective.iter().zip(x).map(|(c, x)| c.dot(x)).sum()
    }

    /// `max_k |Σ_b <A_kb, X_b> - b_k|`.
    pub fn primal_residual(&self, x: &[DMatrix<f64>]) -> f64 {
        self.constraints
            .iter()
            .map(|con| {
                let lhs: f64 = con.terms.iter().map(|(b, a)| a.dot(&x[*b])).sum();
                (lhs - con.rhs).abs()
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SolverSettings {
    pub gap_tol: f64,
    pub feas_tol: f64,
    pub max_iters: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            gap_tol: 1e-7,
            feas_tol: 1e-8,
            max_iters: 200,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SdpReport {
    pub status: SdpStatus,
    pub primal_value: f64,
    pub dual_value: f64,
    /// `|primal_value - dual_value|`.
    pub gap: f64,
    pub primal_solution: Vec<DMatrix<f64>>,
    /// Multipliers `y`.
    pub dual_solution: DVector<f64>,
    /// Dual slacks `S_b`.
    pub dual_slack: Vec<DMatrix<f64>>,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
}

impl SdpReport {
    /// Turns every non-optimal status into [`Error::Solver`].
    pub fn into_optimal(self) -> Result<Self> {
        if self.status == SdpStatus::Optimal {
            Ok(self)
        } else {
            Err(Error::Solver {
                status: self.status,
                iterations: self.iterations,
                gap: self.gap,
            })
        }
    }
}

static SOLVES: AtomicUsize = AtomicUsize::new(0);
static MAX_DUALITY_EXCESS: AtomicU64 = AtomicU64::new(0);

/// Process-wide bookkeeping over every optimal solve.
#[derive(Clone, Copy, Debug)]
pub struct SolveStatistics {
    pub optimal_solves: usize,
    /// Largest observed `dual_value - primal_value` (0 if never positive).
    pub max_weak_duality_excess: f64,
}

pub fn solve_statistics() -> SolveStatistics {
    SolveStatistics {
        optimal_solves: SOLVES.load(Ordering::Relaxed),
        max_weak_duality_excess: f64::from_bits(MAX_DUALITY_EXCESS.load(Ordering::Relaxed)),
    }
}

pub(crate) fn record_solve(report: &SdpReport) {
    if report.status != SdpStatus::Optimal {
        return;
    }
    SOLVES.fetch_add(1, Ordering::Relaxed);
    let excess = (report.dual_value - report.primal_value).max(0.0);
    // Non-negative floats order like their bit patterns.
    MAX_DUALITY_EXCESS.fetch_max(excess.to_bits(), Ordering::Relaxed);
}

//! Infeasible primal-dual path-following (HKM search direction with a
//! Mehrotra predictor-corrector step).

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use super::{record_solve, SdpProblem, SdpReport, SdpStatus, SolverSettings};
use crate::error::{Error, Result};

/// Fraction of the distance to the cone boundary taken per step.
const STEP_FRACTION: f64 = 0.95;
/// Objective or iterate magnitude past which the problem is declared infeasible.
const DIVERGENCE_BOUND: f64 = 1e8;

struct Operator<'a> {
    problem: &'a SdpProblem,
    /// `by_block[b]` lists `(k, A_kb)` for every constraint touching block `b`.
    by_block: Vec<Vec<(usize, &'a DMatrix<f64>)>>,
}

impl<'a> Operator<'a> {
    fn new(problem: &'a SdpProblem) -> Self {
        let mut by_block = vec![Vec::new(); problem.blocks.len()];
        for (k, con) in problem.constraints.iter().enumerate() {
            for (b, a) in &con.terms {
                by_block[*b].push((k, a));
            }
        }
        Operator { problem, by_block }
    }

    fn m(&self) -> usize {
        self.problem.constraints.len()
    }

    /// `A(X)_k = Σ_b <A_kb, X_b>`.
    fn apply(&self, x: &[DMatrix<f64>]) -> DVector<f64> {
        let mut out = DVector::zeros(self.m());
        for (b, terms) in self.by_block.iter().enumerate() {
            for (k, a) in terms {
                out[*k] += a.dot(&x[b]);
            }
        }
        out
    }

    /// `A^T(y)_b = Σ_k y_k A_kb`.
    fn adjoint(&self, y: &DVector<f64>) -> Vec<DMatrix<f64>> {
        self.by_block
            .iter()
            .zip(&self.problem.blocks)
            .map(|(terms, &n)| {
                let mut acc = DMatrix::zeros(n, n);
                for (k, a) in terms {
                    acc += *a * y[*k];
                }
                acc
            })
            .collect()
    }

    /// `M_ij = Σ_b <A_ib, X_b A_jb S_b^{-1}>`.
    fn schur(&self, x: &[DMatrix<f64>], s_inv: &[DMatrix<f64>]) -> DMatrix<f64> {
        let m = self.m();
        let mut out = DMatrix::zeros(m, m);
        for (b, terms) in self.by_block.iter().enumerate() {
            for (j, aj) in terms {
                let p = &x[b] * *aj * &s_inv[b];
                for (i, ai) in terms {
                    out[(*i, *j)] += ai.dot(&p);
                }
            }
        }
        (&out + out.transpose()) * 0.5
    }
}

fn sym(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// Largest `α` with `X + α dX ⪰ 0` (infinite if `dX ⪰ 0`), or `None` if
/// `X` itself is not positive definite.
fn max_step(x: &DMatrix<f64>, dx: &DMatrix<f64>) -> Option<f64> {
    let l = Cholesky::new(x.clone())?.l();
    let y = l.solve_lower_triangular(dx)?;
    let w = l.solve_lower_triangular(&y.transpose())?;
    let min = SymmetricEigen::new(sym(w)).eigenvalues.min();
    Some(if min >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / min
    })
}

fn solve_schur(m: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    if let Some(ch) = Cholesky::new(m.clone()) {
        return Some(ch.solve(rhs));
    }
    let scale = m.diagonal().amax().max(1.0);
    let mut reg = m.clone();
    for i in 0..reg.nrows() {
        reg[(i, i)] += 1e-13 * scale;
    }
    if let Some(ch) = Cholesky::new(reg) {
        return Some(ch.solve(rhs));
    }
    m.clone().lu().solve(rhs)
}

struct Direction {
    dx: Vec<DMatrix<f64>>,
    dy: DVector<f64>,
    ds: Vec<DMatrix<f64>>,
}

/// Solves the HKM Newton system for target `G_b = σμ S_b^{-1} - X_b - corr_b`.
fn direction(
    op: &Operator<'_>,
    schur: &DMatrix<f64>,
    x: &[DMatrix<f64>],
    s_inv: &[DMatrix<f64>],
    rp: &DVector<f64>,
    rd: &[DMatrix<f64>],
    g: &[DMatrix<f64>],
) -> Option<Direction> {
    let x_rd_sinv: Vec<DMatrix<f64>> = (0..x.len()).map(|b| &x[b] * &rd[b] * &s_inv[b]).collect();
    let rhs = rp - op.apply(g) + op.apply(&x_rd_sinv);
    let dy = solve_schur(schur, &rhs)?;
    let at_dy = op.adjoint(&dy);
    let ds: Vec<DMatrix<f64>> = rd.iter().zip(&at_dy).map(|(r, a)| r - a).collect();
    let dx = (0..x.len())
        .map(|b| &g[b] - sym(&x[b] * &ds[b] * &s_inv[b]))
        .collect();
    Some(Direction { dx, dy, ds })
}

fn step_lengths(x: &[DMatrix<f64>], s: &[DMatrix<f64>], d: &Direction) -> Option<(f64, f64)> {
    let mut ap = f64::INFINITY;
    let mut ad = f64::INFINITY;
    for b in 0..x.len() {
        ap = ap.min(max_step(&x[b], &d.dx[b])?);
        ad = ad.min(max_step(&s[b], &d.ds[b])?);
    }
    Some(((STEP_FRACTION * ap).min(1.0), (STEP_FRACTION * ad).min(1.0)))
}

fn inner(a: &[DMatrix<f64>], b: &[DMatrix<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

pub fn solve(problem: &SdpProblem, settings: &SolverSettings) -> Result<SdpReport> {
    if problem.constraints.is_empty() {
        return Err(Error::MalformedSdp("problem has no constraints".into()));
    }
    let op = Operator::new(problem);
    let blocks = &problem.blocks;
    let c = &problem.objective;
    let bvec = DVector::from_iterator(op.m(), problem.constraints.iter().map(|k| k.rhs));
    let n_total: usize = blocks.iter().sum();

    let mut x = Vec::with_capacity(blocks.len());
    let mut s = Vec::with_capacity(blocks.len());
    for (b, &n) in blocks.iter().enumerate() {
        let nf = n as f64;
        let a_norms = op.by_block[b].iter().map(|(k, a)| (k, a.norm()));
        let mut xi = 10f64.max(nf.sqrt());
        let mut eta = 10f64.max(nf.sqrt()).max(c[b].norm());
        for (k, an) in a_norms {
            xi = xi.max(nf * (1.0 + bvec[*k].abs()) / (1.0 + an));
            eta = eta.max(an);
        }
        x.push(DMatrix::identity(n, n) * xi);
        s.push(DMatrix::identity(n, n) * eta);
    }
    let mut y = DVector::zeros(op.m());

    let mut iterations = 0;
    let mut tiny_steps = 0;
    let status = loop {
        let rp = &bvec - op.apply(&x);
        let at_y = op.adjoint(&y);
        let rd: Vec<DMatrix<f64>> = (0..blocks.len())
            .map(|b| &c[b] - &at_y[b] - &s[b])
            .collect();
        let pobj = inner(c, &x);
        let dobj = bvec.dot(&y);
        let xs = inner(&x, &s);
        let pres = rp.amax();
        let dres = rd.iter().map(|r| r.amax()).fold(0.0, f64::max);

        if pres <= settings.feas_tol
            && dres <= settings.feas_tol
            && (pobj - dobj).abs() <= settings.gap_tol
            && xs <= settings.gap_tol
        {
            break SdpStatus::Optimal;
        }
        let magnitude = x.iter().chain(&s).map(|m| m.amax()).fold(0.0, f64::max);
        if iterations > 5
            && (dobj > DIVERGENCE_BOUND || pobj < -DIVERGENCE_BOUND || magnitude > DIVERGENCE_BOUND)
        {
            break SdpStatus::Infeasible;
        }
        if iterations >= settings.max_iters {
            break SdpStatus::MaxIterations;
        }
        if tiny_steps >= 5 {
            break SdpStatus::Stalled;
        }
        iterations += 1;

        let s_inv: Option<Vec<DMatrix<f64>>> = s
            .iter()
            .map(|sb| Cholesky::new(sb.clone()).map(|ch| ch.inverse()))
            .collect();
        let Some(s_inv) = s_inv else {
            break SdpStatus::Stalled;
        };
        let schur = op.schur(&x, &s_inv);
        let mu = xs / n_total as f64;

        let g_pred: Vec<DMatrix<f64>> = x.iter().map(|xb| -xb).collect();
        let Some(pred) = direction(&op, &schur, &x, &s_inv, &rp, &rd, &g_pred) else {
            break SdpStatus::Stalled;
        };
        let Some((ap, ad)) = step_lengths(&x, &s, &pred) else {
            break SdpStatus::Stalled;
        };
        let mu_aff = (0..blocks.len())
            .map(|b| (&x[b] + &pred.dx[b] * ap).dot(&(&s[b] + &pred.ds[b] * ad)))
            .sum::<f64>()
            / n_total as f64;
        let sigma = (mu_aff.max(0.0) / mu).powi(3).min(1.0);

        let g_corr: Vec<DMatrix<f64>> = (0..blocks.len())
            .map(|b| &s_inv[b] * (sigma * mu) - &x[b] - sym(&pred.dx[b] * &pred.ds[b] * &s_inv[b]))
            .collect();
        let Some(corr) = direction(&op, &schur, &x, &s_inv, &rp, &rd, &g_corr) else {
            break SdpStatus::Stalled;
        };
        let Some((ap, ad)) = step_lengths(&x, &s, &corr) else {
            break SdpStatus::Stalled;
        };
        if ap.max(ad) < 1e-10 {
            tiny_steps += 1;
        } else {
            tiny_steps = 0;
        }
        for b in 0..blocks.len() {
            x[b] = sym(&x[b] + &corr.dx[b] * ap);
            s[b] = sym(&s[b] + &corr.ds[b] * ad);
        }
        y += &corr.dy * ad;
    };

    let at_y = op.adjoint(&y);
    let dual_residual = (0..blocks.len())
        .map(|b| (&c[b] - &at_y[b] - &s[b]).amax())
        .fold(0.0, f64::max);
    let primal_value = inner(c, &x);
    let dual_value = bvec.dot(&y);
    let report = SdpReport {
        status,
        primal_value,
        dual_value,
        gap: (primal_value - dual_value).abs(),
        primal_residual: (&bvec - op.apply(&x)).amax(),
        dual_residual,
        primal_solution: x,
        dual_solution: y,
        dual_slack: s,
        iterations,
    };
    record_solve(&report);
    Ok(report)
}

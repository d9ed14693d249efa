//! Complex Hermitian programs, solved through the real embedding
//! `H ↦ [[Re H, -Im H], [Im H, Re H]]`.
//!
//! The embedding doubles every inner product, `<emb(E), emb(H)> = 2 Tr(E H)`,
//! so every coefficient enters as `½ emb(E)`. Nothing outside this file
//! needs to know about the factor.

use nalgebra::DMatrix;

use super::{solve, SdpProblem, SdpReport, SolverSettings};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_coordinate_functionals, ComplexMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct VarId(usize);

/// One summand of a linear functional.
#[derive(Clone, Debug)]
pub enum Term {
    /// `Tr(E H)` for a Hermitian variable `H` and Hermitian `E`.
    Matrix(VarId, ComplexMatrix),
    /// `c t` for a non-negative scalar variable `t`.
    Scalar(VarId, f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum VarKind {
    Hermitian(usize),
    Scalar,
}

#[derive(Clone, Debug, PartialEq)]
pub enum VarValue {
    Hermitian(ComplexMatrix),
    Scalar(f64),
}

impl VarValue {
    /// Panics on a scalar value.
    pub fn matrix(&self) -> &ComplexMatrix {
        match self {
            VarValue::Hermitian(m) => m,
            VarValue::Scalar(_) => panic!("scalar variable has no matrix value"),
        }
    }

    /// Panics on a matrix value.
    pub fn scalar(&self) -> f64 {
        match self {
            VarValue::Scalar(t) => *t,
            VarValue::Hermitian(_) => panic!("matrix variable has no scalar value"),
        }
    }
}

/// Minimise a real linear functional of PSD Hermitian matrices and
/// non-negative scalars subject to real linear equalities.
#[derive(Clone, Debug, Default)]
pub struct HermitianProgram {
    vars: Vec<VarKind>,
    objective: Vec<Term>,
    constraints: Vec<(Vec<Term>, f64)>,
}

#[derive(Clone, Debug)]
pub struct HermitianSolution {
    pub report: SdpReport,
    values: Vec<VarValue>,
    duals: Vec<VarValue>,
}

impl HermitianSolution {
    pub fn value(&self, v: VarId) -> &VarValue {
        &self.values[v.0]
    }

    /// The dual slack paired with `v`.
    pub fn dual(&self, v: VarId) -> &VarValue {
        &self.duals[v.0]
    }

    pub fn values(&self) -> &[VarValue] {
        &self.values
    }
}

impl HermitianProgram {
    pub fn new() -> Self {
        Self::default()
    }

    /// A PSD `n x n` Hermitian variable.
    pub fn hermitian(&mut self, n: usize) -> VarId {
        self.vars.push(VarKind::Hermitian(n));
        VarId(self.vars.len() - 1)
    }

    /// A non-negative scalar variable.
    pub fn scalar(&mut self) -> VarId {
        self.vars.push(VarKind::Scalar);
        VarId(self.vars.len() - 1)
    }

    pub fn minimize(&mut self, terms: Vec<Term>) {
        self.objective = terms;
    }

    pub fn equal(&mut self, terms: Vec<Term>, rhs: f64) {
        self.constraints.push((terms, rhs));
    }

    /// Imposes a Hermitian `n x n` matrix identity `L(vars) = R` through its
    /// `n^2` real coordinates. `terms(E)` must return the summands of
    /// `Tr(E L(vars))` for a coordinate functional `E`.
    pub fn matrix_equal(
        &mut self,
        n: usize,
        terms: impl Fn(&ComplexMatrix) -> Vec<Term>,
        rhs: &ComplexMatrix,
    ) {
        for e in hermitian_coordinate_functionals(n) {
            let r = e.matmul(rhs).trace().re;
            self.equal(terms(&e), r);
        }
    }

    fn embedded_coefficient(&self, t: &Term) -> Result<(usize, DMatrix<f64>)> {
        match t {
            Term::Matrix(v, e) => {
                let VarKind::Hermitian(n) = self.kind(*v)? else {
                    return Err(Error::MalformedSdp("matrix coefficient on a scalar".into()));
                };
                if e.rows() != n || e.cols() != n || !e.is_hermitian(1e-12) {
                    return Err(Error::MalformedSdp(format!(
                        "coefficient must be a Hermitian {n}x{n} matrix"
                    )));
                }
                Ok((v.0, embed(e) * 0.5))
            }
            Term::Scalar(v, c) => match self.kind(*v)? {
                VarKind::Scalar => Ok((v.0, DMatrix::from_element(1, 1, *c))),
                VarKind::Hermitian(_) => {
                    Err(Error::MalformedSdp("scalar coefficient on a matrix".into()))
                }
            },
        }
    }

    fn kind(&self, v: VarId) -> Result<VarKind> {
        self.vars
            .get(v.0)
            .copied()
            .ok_or_else(|| Error::MalformedSdp(format!("unknown variable {}", v.0)))
    }

    fn merged(&self, terms: &[Term]) -> Result<Vec<(usize, DMatrix<f64>)>> {
        let mut out: Vec<(usize, DMatrix<f64>)> = Vec::new();
        for t in terms {
            let (b, a) = self.embedded_coefficient(t)?;
            match out.iter_mut().find(|(ob, _)| *ob == b) {
                Some((_, acc)) => *acc += a,
                None => out.push((b, a)),
            }
        }
        Ok(out)
    }

    pub fn to_real(&self) -> Result<SdpProblem> {
        let blocks = self
            .vars
            .iter()
            .map(|k| match k {
                VarKind::Hermitian(n) => 2 * n,
                VarKind::Scalar => 1,
            })
            .collect();
        let mut p = SdpProblem::new(blocks)?;
        for (b, c) in self.merged(&self.objective)? {
            p.set_objective(b, c)?;
        }
        for (terms, rhs) in &self.constraints {
            p.add_constraint(self.merged(terms)?, *rhs)?;
        }
        Ok(p)
    }

    pub fn solve(&self, settings: &SolverSettings) -> Result<HermitianSolution> {
        let report = solve(&self.to_real()?, settings)?;
        let values = self
            .vars
            .iter()
            .zip(&report.primal_solution)
            .map(|(k, x)| unembed_value(*k, x, 1.0))
            .collect();
        let duals = self
            .vars
            .iter()
            .zip(&report.dual_slack)
            .map(|(k, s)| unembed_value(*k, s, 2.0))
            .collect();
        Ok(HermitianSolution {
            report,
            values,
            duals,
        })
    }

    fn evaluate(&self, terms: &[Term], values: &[VarValue]) -> f64 {
        terms
            .iter()
            .map(|t| match t {
                Term::Matrix(v, e) => e.matmul(values[v.0].matrix()).trace().re,
                Term::Scalar(v, c) => c * values[v.0].scalar(),
            })
            .sum()
    }

    /// The objective evaluated in complex arithmetic.
    pub fn objective_value(&self, values: &[VarValue]) -> f64 {
        self.evaluate(&self.objective, values)
    }

    /// Largest violation of any equality at `values`.
    pub fn equality_residual(&self, values: &[VarValue]) -> f64 {
        self.constraints
            .iter()
            .map(|(terms, rhs)| (self.evaluate(terms, values) - rhs).abs())
            .fold(0.0, f64::max)
    }
}

/// `scale` applies to matrix blocks only; scalar blocks are not embedded.
fn unembed_value(kind: VarKind, x: &DMatrix<f64>, scale: f64) -> VarValue {
    match kind {
        VarKind::Hermitian(_) => VarValue::Hermitian(unembed(x).scale_real(scale)),
        VarKind::Scalar => VarValue::Scalar(x[(0, 0)]),
    }
}

pub(crate) fn embed(h: &ComplexMatrix) -> DMatrix<f64> {
    let n = h.rows();
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let z = h[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Nearest complex preimage of a real `2n x 2n` matrix under [`embed`].
pub(crate) fn unembed(x: &DMatrix<f64>) -> ComplexMatrix {
    let n = x.nrows() / 2;
    ComplexMatrix::from_fn(n, n, |i, j| {
        let re = 0.5 * (x[(i, j)] + x[(i + n, j + n)]);
        let im = 0.5 * (x[(i + n, j)] - x[(i, j + n)]);
        C64::new(re, im)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron, ONE};
    use crate::sdp::SdpStatus;

    #[test]
    fn embedding_round_trip_and_inner_product() {
        let h = ComplexMatrix::from_complex_rows(&[
            vec![C64::new(1.0, 0.0), C64::new(0.3, -0.7)],
            vec![C64::new(0.3, 0.7), C64::new(-2.0, 0.0)],
        ])
        .unwrap();
        let e = ComplexMatrix::from_complex_rows(&[
            vec![C64::new(0.5, 0.0), C64::new(0.0, 1.0)],
            vec![C64::new(0.0, -1.0), C64::new(2.0, 0.0)],
        ])
        .unwrap();
        assert!(unembed(&embed(&h)).approx_eq(&h, 1e-15));
        let real = (embed(&e) * 0.5).dot(&embed(&h));
        assert!((real - e.matmul(&h).trace().re).abs() < 1e-14);
    }

    #[test]
    fn complex_trace_norm() {
        // ‖H‖_1 = min Tr(P + Q) s.t. P - Q = H.
        let h = ComplexMatrix::from_complex_rows(&[
            vec![C64::new(0.0, 0.0), C64::new(0.0, -1.0)],
            vec![C64::new(0.0, 1.0), C64::new(0.0, 0.0)],
        ])
        .unwrap();
        let mut prog = HermitianProgram::new();
        let p = prog.hermitian(2);
        let q = prog.hermitian(2);
        let id = ComplexMatrix::identity(2);
        prog.minimize(vec![Term::Matrix(p, id.clone()), Term::Matrix(q, id)]);
        prog.matrix_equal(
            2,
            |e| vec![Term::Matrix(p, e.clone()), Term::Matrix(q, -e)],
            &h,
        );
        let sol = prog.solve(&SolverSettings::default()).unwrap();
        assert_eq!(sol.report.status, SdpStatus::Optimal);
        assert!((sol.report.primal_value - 2.0).abs() < 1e-7);
        let complex = prog.objective_value(sol.values());
        assert!((complex - sol.report.primal_value).abs() < 1e-7);
        assert!(prog.equality_residual(sol.values()) < 1e-7);
    }

    #[test]
    fn partial_trace_constraint_with_scalar() {
        // min t s.t. Tr_B M = I_2, t >= Tr M ... with equality t = Tr M: t = 2.
        let mut prog = HermitianProgram::new();
        let m = prog.hermitian(4);
        let t = prog.scalar();
        prog.minimize(vec![Term::Scalar(t, 1.0)]);
        prog.matrix_equal(
            2,
            |e| vec![Term::Matrix(m, kron(e, &ComplexMatrix::identity(2)))],
            &ComplexMatrix::identity(2),
        );
        prog.equal(
            vec![
                Term::Scalar(t, 1.0),
                Term::Matrix(m, ComplexMatrix::identity(4).scale(-ONE)),
            ],
            0.0,
        );
        let sol = prog.solve(&SolverSettings::default()).unwrap();
        assert_eq!(sol.report.status, SdpStatus::Optimal);
        assert!((sol.value(t).scalar() - 2.0).abs() < 1e-7);
    }

    #[test]
    fn malformed_terms_are_rejected() {
        let mut prog = HermitianProgram::new();
        let m = prog.hermitian(2);
        let t = prog.scalar();
        prog.minimize(vec![Term::Scalar(m, 1.0)]);
        assert!(prog.to_real().is_err());
        prog.minimize(vec![Term::Matrix(t, ComplexMatrix::identity(1))]);
        assert!(prog.to_real().is_err());
        prog.minimize(vec![Term::Matrix(m, ComplexMatrix::unit(2, 0, 1))]);
        assert!(prog.to_real().is_err());
    }
}

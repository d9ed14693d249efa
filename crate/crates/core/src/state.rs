use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, pauli, ComplexMatrix, C64, ONE, STRUCTURAL_TOL};

/// A Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, positivity and normalisation within `tol`.
    pub fn new(matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidState(format!(
                "{}x{} matrix is not square",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let defect = matrix.hermiticity_defect();
        if defect > tol {
            return Err(Error::NotHermitian { deviation: defect });
        }
        let matrix = matrix.hermitian_part();
        let tr = matrix.trace().re;
        if (tr - 1.0).abs() > tol {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = *hermitian_eigenvalues(&matrix)?
            .last()
            .expect("nonempty spectrum");
        if min < -tol {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        Ok(Self { matrix })
    }

    pub fn from_matrix(matrix: ComplexMatrix) -> Result<Self> {
        Self::new(matrix, STRUCTURAL_TOL)
    }

    /// Wraps a matrix known to be a state up to rounding; Hermitises it.
    pub(crate) fn from_matrix_unchecked(matrix: ComplexMatrix) -> Self {
        Self {
            matrix: matrix.hermitian_part(),
        }
    }

    /// `|psi><psi|` for a (not necessarily normalised) nonzero vector.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if psi.is_empty() || norm == 0.0 {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let unit: Vec<C64> = psi.iter().map(|z| z / norm).collect();
        Ok(Self::from_matrix_unchecked(ComplexMatrix::outer(
            &unit, &unit,
        )))
    }

    pub fn basis(dim: usize, i: usize) -> Self {
        Self::from_matrix_unchecked(ComplexMatrix::unit(dim, i, i))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::from_matrix_unchecked(ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64))
    }

    /// The uniform superposition `|+><+|` in dimension `dim`.
    pub fn plus(dim: usize) -> Self {
        Self::pure(&vec![ONE; dim]).expect("nonzero")
    }

    /// Qubit state with Bloch vector `(x, y, z)`, which must lie in the unit ball.
    pub fn from_bloch(x: f64, y: f64, z: f64) -> Result<Self> {
        let r2 = x * x + y * y + z * z;
        if r2 > 1.0 + STRUCTURAL_TOL {
            return Err(Error::InvalidState(format!(
                "Bloch vector length {} exceeds 1",
                r2.sqrt()
            )));
        }
        Ok(Self::from_bloch_unchecked([x, y, z]))
    }

    pub(crate) fn from_bloch_unchecked([x, y, z]: [f64; 3]) -> Self {
        let h = 0.5;
        Self {
            matrix: ComplexMatrix::from_fn(2, 2, |i, j| match (i, j) {
                (0, 0) => C64::new(h * (1.0 + z), 0.0),
                (1, 1) => C64::new(h * (1.0 - z), 0.0),
                (0, 1) => C64::new(h * x, -h * y),
                _ => C64::new(h * x, h * y),
            }),
        }
    }

    /// Bloch vector of a qubit state.
    pub fn bloch_vector(&self) -> Option<[f64; 3]> {
        if self.dim() != 2 {
            return None;
        }
        let [sx, sy, sz] = pauli();
        Some([
            sx.matmul(&self.matrix).trace().re,
            sy.matmul(&self.matrix).trace().re,
            sz.matmul(&self.matrix).trace().re,
        ])
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// `Tr(ρ^2)`.
    pub fn purity(&self) -> f64 {
        self.matrix.as_slice().iter().map(|z| z.norm_sqr()).sum()
    }

    /// Convex combination `t ρ + (1 - t) σ`.
    pub fn mix(&self, other: &Self, t: f64) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::dims(
                "mix",
                format!("{} vs {}", self.dim(), other.dim()),
            ));
        }
        Ok(Self::from_matrix_unchecked(
            &self.matrix.scale_real(t) + &other.matrix.scale_real(1.0 - t),
        ))
    }

    /// `U ρ U^dag`.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Self {
        Self::from_matrix_unchecked(u.sandwich(&self.matrix))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(DensityMatrix::from_matrix(ComplexMatrix::diag_real(&[0.5, 0.5])).is_ok());
        assert!(DensityMatrix::from_matrix(ComplexMatrix::diag_real(&[1.2, -0.2])).is_err());
        assert!(DensityMatrix::from_matrix(ComplexMatrix::diag_real(&[0.5, 0.4])).is_err());
        assert!(DensityMatrix::from_bloch(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn bloch_round_trip() {
        let rho = DensityMatrix::from_bloch(0.3, -0.4, 0.5).unwrap();
        let r = rho.bloch_vector().unwrap();
        assert!(
            (r[0] - 0.3).abs() < 1e-15 && (r[1] + 0.4).abs() < 1e-15 && (r[2] - 0.5).abs() < 1e-15
        );
        assert!((rho.purity() - 0.5 * (1.0 + 0.5)).abs() < 1e-15);
    }
}

//! Dense complex linear algebra at the sizes this crate works with (Choi
//! matrices of qubit and qutrit channels, a few dozen rows at most).
//!
//! Storage is row-major. Spectral and singular value decompositions are
//! delegated to `nalgebra`.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Tolerance used for structural checks (Hermiticity, exact identities).
pub const STRUCTURAL_TOL: f64 = 1e-10;
/// Tolerance used for numerical comparisons of computed quantities.
pub const NUMERICAL_TOL: f64 = 1e-8;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major data. Fails when the length does not
    /// match `rows * cols`.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::dims(
                "from_row_major",
                format!("{} entries for a {rows}x{cols} matrix", data.len()),
            ));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from real rows. Panics on ragged input; meant for literals.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self::from_fn(r, c, |i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn from_complex_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
            return Err(Error::dims("from_complex_rows", "empty or ragged rows"));
        }
        Ok(Self::from_fn(r, c, |i, j| rows[i][j]))
    }

    pub fn diag(entries: &[C64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = e;
        }
        m
    }

    pub fn diag_real(entries: &[f64]) -> Self {
        let c: Vec<C64> = entries.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::diag(&c)
    }

    /// `|u><v|`.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    /// `|i><j|` in dimension `n`.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m[(i, j)] = ONE;
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Hilbert-Schmidt inner product `Tr(A^dag B)`.
    pub fn inner(&self, other: &Self) -> C64 {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Equality of shape and entries within an absolute tolerance.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(a, b)| (a - b).norm() <= tol)
    }

    /// Frobenius norm of the anti-Hermitian part, `||M - M^dag||_F`.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut acc = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                acc += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// `(M + M^dag) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }

    /// The sub-block of rows `r0..r0+nr` and columns `c0..c0+nc`.
    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Self {
        Self::from_fn(nr, nc, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(
            self.cols, other.rows,
            "matmul of {}x{} by {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    /// `A X A^dag`.
    pub fn sandwich(&self, x: &Self) -> Self {
        self.matmul(x).matmul(&self.adjoint())
    }

    pub fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

fn zip_with(a: &ComplexMatrix, b: &ComplexMatrix, f: impl Fn(C64, C64) -> C64) -> ComplexMatrix {
    assert_eq!(
        (a.rows, a.cols),
        (b.rows, b.cols),
        "elementwise op on mismatched shapes"
    );
    ComplexMatrix {
        rows: a.rows,
        cols: a.cols,
        data: a.data.iter().zip(&b.data).map(|(&x, &y)| f(x, y)).collect(),
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: Self) -> ComplexMatrix {
        zip_with(self, rhs, |a, b| a + b)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: Self) -> ComplexMatrix {
        zip_with(self, rhs, |a, b| a - b)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: Self) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (br, bc) = (b.rows, b.cols);
    ComplexMatrix::from_fn(a.rows * br, a.cols * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

/// Which factor of a bipartite space survives a partial trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Partial trace over one factor of `C^{dA} ⊗ C^{dB}`; `keep` names the factor that
/// remains.
pub fn partial_trace(
    m: &ComplexMatrix,
    (da, db): (usize, usize),
    keep: Subsystem,
) -> Result<ComplexMatrix> {
    let n = da * db;
    if m.rows != n || m.cols != n {
        return Err(Error::dims(
            "partial_trace",
            format!("{}x{} matrix on a {da}x{db} bipartition", m.rows, m.cols),
        ));
    }
    Ok(match keep {
        Subsystem::A => ComplexMatrix::from_fn(da, da, |i, j| {
            (0..db).map(|k| m[(i * db + k, j * db + k)]).sum()
        }),
        Subsystem::B => ComplexMatrix::from_fn(db, db, |i, j| {
            (0..da).map(|k| m[(k * db + i, k * db + j)]).sum()
        }),
    })
}

/// Completely dephasing map in the computational basis: keeps the diagonal.
pub fn dephase(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::dims(
            "dephase",
            format!("{}x{} is not square", m.rows, m.cols),
        ));
    }
    Ok(ComplexMatrix::from_fn(m.rows, m.cols, |i, j| {
        if i == j {
            m[(i, i)]
        } else {
            ZERO
        }
    }))
}

/// Spectral decomposition of a Hermitian matrix, eigenvalues in descending order.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let d = ComplexMatrix::diag_real(&self.eigenvalues);
        v.matmul(&d).matmul(&v.adjoint())
    }

    /// Applies `f` to the spectrum: `V f(Λ) V^dag`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let vals: Vec<f64> = self.eigenvalues.iter().map(|&x| f(x)).collect();
        v.matmul(&ComplexMatrix::diag_real(&vals))
            .matmul(&v.adjoint())
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }
}

fn check_hermitian(m: &ComplexMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::dims(
            "hermitian_eig",
            format!("{}x{} is not square", m.rows, m.cols),
        ));
    }
    let defect = m.hermiticity_defect();
    if defect > STRUCTURAL_TOL * m.frobenius_norm().max(1.0) {
        return Err(Error::NotHermitian { deviation: defect });
    }
    Ok(())
}

pub fn hermitian_eig(m: &ComplexMatrix) -> Result<HermitianEigen> {
    check_hermitian(m)?;
    let eig = m.hermitian_part().to_nalgebra().symmetric_eigen();
    let mut order: Vec<usize> = (0..m.rows).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors =
        ComplexMatrix::from_fn(m.rows, m.rows, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(HermitianEigen {
        eigenvalues,
        eigenvectors,
    })
}

/// Eigenvalues only, descending. Closed form for 1x1 and 2x2.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    check_hermitian(m)?;
    match m.rows {
        1 => Ok(vec![m[(0, 0)].re]),
        2 => {
            let a = m[(0, 0)].re;
            let d = m[(1, 1)].re;
            let b = (m[(0, 1)] + m[(1, 0)].conj()) * 0.5;
            let mean = 0.5 * (a + d);
            let r = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
            Ok(vec![mean + r, mean - r])
        }
        _ => Ok(hermitian_eig(m)?.eigenvalues),
    }
}

/// Singular value decomposition `M = U diag(s) V^dag`, singular values descending.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

pub fn svd(m: &ComplexMatrix) -> Svd {
    let k = m.rows.min(m.cols);
    let dec = m.to_nalgebra().svd(true, true);
    let u = dec.u.expect("requested U");
    let v_t = dec.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| dec.singular_values[b].total_cmp(&dec.singular_values[a]));
    Svd {
        u: ComplexMatrix::from_fn(m.rows, k, |i, j| u[(i, order[j])]),
        singular_values: order.iter().map(|&j| dec.singular_values[j]).collect(),
        v: ComplexMatrix::from_fn(m.cols, k, |i, j| v_t[(order[j], i)].conj()),
    }
}

/// Schatten-1 norm. Hermitian input goes through the eigenvalues, anything
/// else through singular values.
pub fn trace_norm(m: &ComplexMatrix) -> f64 {
    if m.is_square() && m.is_hermitian(STRUCTURAL_TOL * m.frobenius_norm().max(1.0)) {
        if let Ok(vals) = hermitian_eigenvalues(m) {
            return vals.iter().map(|x| x.abs()).sum();
        }
    }
    svd(m).singular_values.iter().sum()
}

/// Operator norm (largest singular value).
pub fn spectral_norm(m: &ComplexMatrix) -> f64 {
    svd(m).singular_values.first().copied().unwrap_or(0.0)
}

/// Pauli matrices `σ_x, σ_y, σ_z`.
pub fn pauli() -> [ComplexMatrix; 3] {
    [
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]),
        ComplexMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => -I,
            (1, 0) => I,
            _ => ZERO,
        }),
        ComplexMatrix::diag_real(&[1.0, -1.0]),
    ]
}

/// Real-coordinate functionals on `n x n` Hermitian matrices: `Tr(E H)`
/// returns, in order, each `H_ii`, then `Re H_ij` and `Im H_ij` for `i < j`.
/// There are exactly `n^2` of them and together they determine `H`.
pub fn hermitian_coordinate_functionals(n: usize) -> Vec<ComplexMatrix> {
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        out.push(ComplexMatrix::unit(n, i, i));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let mut re = ComplexMatrix::zeros(n, n);
            re[(i, j)] = C64::new(0.5, 0.0);
            re[(j, i)] = C64::new(0.5, 0.0);
            out.push(re);
            let mut im = ComplexMatrix::zeros(n, n);
            im[(i, j)] = C64::new(0.0, 0.5);
            im[(j, i)] = C64::new(0.0, -0.5);
            out.push(im);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_matrix(n: usize, seed: u64) -> ComplexMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        ComplexMatrix::from_fn(n, n, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    #[test]
    fn kron_examples() {
        let i2 = ComplexMatrix::identity(2);
        assert!(kron(&i2, &i2).approx_eq(&ComplexMatrix::identity(4), 0.0));
        let z = &pauli()[2];
        assert!(kron(z, &i2).approx_eq(&ComplexMatrix::diag_real(&[1.0, 1.0, -1.0, -1.0]), 0.0));

        let a = random_matrix(2, 1);
        let b = random_matrix(3, 2);
        let k = kron(&a, &b);
        assert_eq!((k.rows(), k.cols()), (6, 6));
        for i in 0..2 {
            for j in 0..2 {
                let blk = k.block(3 * i, 3 * j, 3, 3);
                assert!(blk.approx_eq(&b.scale(a[(i, j)]), 1e-15));
            }
        }
    }

    #[test]
    fn partial_trace_examples() {
        let phi = ComplexMatrix::from_fn(
            4,
            4,
            |r, c| {
                if r % 3 == 0 && c % 3 == 0 {
                    ONE
                } else {
                    ZERO
                }
            },
        );
        let red = partial_trace(&phi, (2, 2), Subsystem::A).unwrap();
        assert!(red.approx_eq(&ComplexMatrix::identity(2), 1e-15));

        let a = random_matrix(2, 3);
        let b = random_matrix(3, 4);
        let ab = kron(&a, &b);
        let tr_a = partial_trace(&ab, (2, 3), Subsystem::B).unwrap();
        assert!(tr_a.approx_eq(&b.scale(a.trace()), 1e-12));
        let tr_b = partial_trace(&ab, (2, 3), Subsystem::A).unwrap();
        assert!(tr_b.approx_eq(&a.scale(b.trace()), 1e-12));

        assert!(partial_trace(&a, (2, 3), Subsystem::A).is_err());
    }

    #[test]
    fn dephase_examples() {
        let m = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert_eq!(dephase(&m).unwrap(), ComplexMatrix::diag_real(&[1.0, 4.0]));
        let d = ComplexMatrix::diag_real(&[0.3, 0.7]);
        assert_eq!(dephase(&d).unwrap(), d);
        let r = random_matrix(4, 9);
        let once = dephase(&r).unwrap();
        assert_eq!(dephase(&once).unwrap(), once);
        assert!(dephase(&ComplexMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn trace_norm_examples() {
        assert!((trace_norm(&ComplexMatrix::diag_real(&[1.0, -1.0])) - 2.0).abs() < 1e-14);
        let x = ComplexMatrix::from_real_rows(&[&[0.0, 0.5], &[0.5, 0.0]]);
        assert!((trace_norm(&x) - 1.0).abs() < 1e-14);
        assert_eq!(trace_norm(&ComplexMatrix::zeros(3, 3)), 0.0);
    }

    #[test]
    fn eig_and_svd_examples() {
        let e = hermitian_eig(&pauli()[2]).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, -1.0]);

        let s = svd(&ComplexMatrix::diag_real(&[3.0, -2.0]));
        assert!((s.singular_values[0] - 3.0).abs() < 1e-14);
        assert!((s.singular_values[1] - 2.0).abs() < 1e-14);

        let z = svd(&ComplexMatrix::zeros(2, 2));
        assert!(z.singular_values.iter().all(|&x| x == 0.0));

        assert!(matches!(
            hermitian_eig(&ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]])),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn svd_reconstructs() {
        let m = random_matrix(4, 11);
        let s = svd(&m);
        let back =
            s.u.matmul(&ComplexMatrix::diag_real(&s.singular_values))
                .matmul(&s.v.adjoint());
        assert!(back.approx_eq(&m, 1e-12));
        assert!(s.singular_values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn coordinate_functionals_recover_hermitian() {
        let h = random_matrix(3, 5).hermitian_part();
        let coords: Vec<f64> = hermitian_coordinate_functionals(3)
            .iter()
            .map(|e| e.matmul(&h).trace().re)
            .collect();
        assert_eq!(coords.len(), 9);
        assert!((coords[0] - h[(0, 0)].re).abs() < 1e-15);
        assert!((coords[3] - h[(0, 1)].re).abs() < 1e-15);
        assert!((coords[4] - h[(0, 1)].im).abs() < 1e-15);
    }
}

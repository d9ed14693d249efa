//! Quantum channels in Kraus and Choi form.
//!
//! Choi convention, used by every SDP builder in the crate:
//! `J(N) = Σ_ij |i><j| ⊗ N(|i><j|)`, input factor first. Row index of `J` is
//! `i * dim_out + a` for input index `i` and output index `a`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    dephase, hermitian_eig, kron, partial_trace, ComplexMatrix, Subsystem, C64, NUMERICAL_TOL, ONE,
    STRUCTURAL_TOL, ZERO,
};
use crate::state::DensityMatrix;

/// Default threshold below which a selective branch is dropped.
pub const BRANCH_DROP_THRESHOLD: f64 = 1e-12;
/// Eigenvalues of a Choi matrix below this are discarded when extracting Kraus operators.
pub const KRAUS_EIGEN_CUTOFF: f64 = 1e-10;
/// Default trace-preservation tolerance for channel files.
pub const DEFAULT_FILE_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct KrausChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<ComplexMatrix>,
    validation_tol: f64,
}

/// One branch of a selective (post-selected) channel application.
#[derive(Clone, Debug)]
pub struct Branch {
    pub probability: f64,
    pub state: DensityMatrix,
}

impl KrausChannel {
    /// Validates shapes and trace preservation `Σ K^dag K = I` within `tol`.
    pub fn new(kraus: Vec<ComplexMatrix>, tol: f64) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::dims("KrausChannel::new", "no Kraus operators"))?;
        let (dim_out, dim_in) = (first.rows(), first.cols());
        if dim_in == 0 || dim_out == 0 {
            return Err(Error::dims("KrausChannel::new", "empty Kraus operator"));
        }
        if let Some(bad) = kraus
            .iter()
            .find(|k| k.rows() != dim_out || k.cols() != dim_in)
        {
            return Err(Error::dims(
                "KrausChannel::new",
                format!(
                    "operator of shape {}x{} among {dim_out}x{dim_in} operators",
                    bad.rows(),
                    bad.cols()
                ),
            ));
        }
        let ch = Self {
            dim_in,
            dim_out,
            kraus,
            validation_tol: tol,
        };
        let deviation = ch.trace_preservation_defect();
        if deviation > tol {
            return Err(Error::NotTracePreserving { deviation, tol });
        }
        Ok(ch)
    }

    /// `max_ij |(Σ K^dag K - I)_ij|`.
    pub fn trace_preservation_defect(&self) -> f64 {
        let mut acc = ComplexMatrix::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            acc = &acc + &k.adjoint().matmul(k);
        }
        (&acc - &ComplexMatrix::identity(self.dim_in)).max_abs()
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn validation_tol(&self) -> f64 {
        self.validation_tol
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_trusted(vec![ComplexMatrix::identity(dim)])
    }

    /// Single-Kraus channel `ρ ↦ U ρ U^dag`; `u` must be unitary.
    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        if !u.is_square() {
            return Err(Error::dims("unitary", "operator is not square"));
        }
        Self::new(vec![u], STRUCTURAL_TOL)
    }

    /// Completely dephasing channel with Kraus operators `|i><i|`.
    pub fn dephasing(dim: usize) -> Self {
        Self::from_trusted((0..dim).map(|i| ComplexMatrix::unit(dim, i, i)).collect())
    }

    /// Qubit dephasing written as the mixed unitary `½ρ + ½ZρZ`.
    pub fn dephasing_mixed_unitary() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_trusted(vec![
            ComplexMatrix::identity(2).scale_real(h),
            ComplexMatrix::diag_real(&[h, -h]),
        ])
    }

    /// `ρ ↦ p ρ + (1 - p) Δ(ρ)`.
    pub fn partial_dephasing(dim: usize, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::OutOfRange {
                name: "p",
                value: p,
                range: "[0, 1]",
            });
        }
        let id = Self::identity(dim);
        let deph = Self::dephasing(dim);
        Self::mixture(&[(p, &id), (1.0 - p, &deph)])
    }

    pub fn hadamard() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_trusted(vec![ComplexMatrix::from_real_rows(&[&[h, h], &[h, -h]])])
    }

    pub fn pauli_x() -> Self {
        Self::from_trusted(vec![crate::linalg::pauli()[0].clone()])
    }

    pub fn pauli_y() -> Self {
        Self::from_trusted(vec![crate::linalg::pauli()[1].clone()])
    }

    pub fn pauli_z() -> Self {
        Self::from_trusted(vec![crate::linalg::pauli()[2].clone()])
    }

    /// Unitary that sends `|i>` to `|perm[i]>`.
    pub fn permutation(perm: &[usize]) -> Result<Self> {
        let d = perm.len();
        let mut seen = vec![false; d];
        for &p in perm {
            if p >= d || std::mem::replace(&mut seen[p], true) {
                return Err(Error::dims(
                    "permutation",
                    format!("{perm:?} is not a permutation"),
                ));
            }
        }
        let mut u = ComplexMatrix::zeros(d, d);
        for (i, &p) in perm.iter().enumerate() {
            u[(p, i)] = ONE;
        }
        Ok(Self::from_trusted(vec![u]))
    }

    /// Amplitude damping with decay probability `eta`:
    /// `K0 = diag(1, √(1-η))`, `K1 = √η |0><1|`.
    pub fn amplitude_damping(eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::OutOfRange {
                name: "eta",
                value: eta,
                range: "[0, 1]",
            });
        }
        let k0 = ComplexMatrix::diag_real(&[1.0, (1.0 - eta).sqrt()]);
        let k1 = ComplexMatrix::from_real_rows(&[&[0.0, eta.sqrt()], &[0.0, 0.0]]);
        Ok(Self::from_trusted(vec![k0, k1]))
    }

    /// The two-Kraus qubit channel of the worked SDP example, entries as printed
    /// to four decimals. Trace preservation only holds to about 1e-4, so the
    /// channel carries a validation tolerance of 1e-3.
    pub fn appendix_example() -> Self {
        let k0 = ComplexMatrix::from_real_rows(&[&[0.2096, -0.3956], &[-0.2564, -0.3719]]);
        let k1 = ComplexMatrix::from_real_rows(&[&[-0.6197, 0.6418], &[-0.7116, -0.5415]]);
        Self::new(vec![k0, k1], 1e-3).expect("printed example is CPTP at 1e-3")
    }

    /// The trace map `C^dim -> C`, Kraus operators `<i|`.
    pub fn trace_map(dim: usize) -> Self {
        Self::from_trusted(
            (0..dim)
                .map(|i| ComplexMatrix::from_fn(1, dim, |_, c| if c == i { ONE } else { ZERO }))
                .collect(),
        )
    }

    /// Builds from Kraus operators that are CPTP by construction.
    pub(crate) fn from_trusted(kraus: Vec<ComplexMatrix>) -> Self {
        let (dim_out, dim_in) = (kraus[0].rows(), kraus[0].cols());
        Self {
            dim_in,
            dim_out,
            kraus,
            validation_tol: STRUCTURAL_TOL,
        }
    }

    fn check_input(&self, op: &'static str, dim: usize) -> Result<()> {
        if dim != self.dim_in {
            return Err(Error::dims(
                op,
                format!(
                    "state of dimension {dim} into channel with input dimension {}",
                    self.dim_in
                ),
            ));
        }
        Ok(())
    }

    /// `Σ K X K^dag` for an arbitrary operator `X`.
    pub fn apply_operator(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.rows() != self.dim_in || x.cols() != self.dim_in {
            return Err(Error::dims(
                "apply_operator",
                format!(
                    "{}x{} operator, input dimension {}",
                    x.rows(),
                    x.cols(),
                    self.dim_in
                ),
            ));
        }
        let mut out = ComplexMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out = &out + &k.sandwich(x);
        }
        Ok(out)
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.check_input("apply", rho.dim())?;
        Ok(DensityMatrix::from_matrix_unchecked(
            self.apply_operator(rho.matrix())?,
        ))
    }

    /// Selective application with the default drop threshold.
    pub fn apply_selective(&self, rho: &DensityMatrix) -> Result<Vec<Branch>> {
        self.apply_selective_with(rho, BRANCH_DROP_THRESHOLD)
    }

    /// Branches `(p_n, K_n ρ K_n^dag / p_n)` in Kraus order; branches with
    /// `p_n < drop` are omitted.
    pub fn apply_selective_with(&self, rho: &DensityMatrix, drop: f64) -> Result<Vec<Branch>> {
        self.check_input("apply_selective", rho.dim())?;
        Ok(self
            .kraus
            .iter()
            .filter_map(|k| {
                let unnormalised = k.sandwich(rho.matrix());
                let p = unnormalised.trace().re;
                (p >= drop).then(|| Branch {
                    probability: p,
                    state: DensityMatrix::from_matrix_unchecked(unnormalised.scale_real(1.0 / p)),
                })
            })
            .collect())
    }

    pub fn to_choi(&self) -> ChoiMatrix {
        let (din, dout) = (self.dim_in, self.dim_out);
        let mut j = ComplexMatrix::zeros(din * dout, din * dout);
        // J = Σ_n vec(K_n) vec(K_n)^dag with vec(K)_{i*dout + a} = K[a, i]
        for k in &self.kraus {
            let v: Vec<C64> = (0..din * dout).map(|r| k[(r % dout, r / dout)]).collect();
            for r in 0..v.len() {
                if v[r] == ZERO {
                    continue;
                }
                for c in 0..v.len() {
                    j[(r, c)] += v[r] * v[c].conj();
                }
            }
        }
        ChoiMatrix {
            dim_in: din,
            dim_out: dout,
            matrix: j,
        }
    }

    /// `after ∘ before`, Kraus set `{A_m B_n}`.
    pub fn compose(after: &Self, before: &Self) -> Result<Self> {
        if after.dim_in != before.dim_out {
            return Err(Error::dims(
                "compose",
                format!("output {} into input {}", before.dim_out, after.dim_in),
            ));
        }
        let kraus = after
            .kraus
            .iter()
            .flat_map(|a| before.kraus.iter().map(move |b| a.matmul(b)))
            .collect();
        Ok(Self {
            dim_in: before.dim_in,
            dim_out: after.dim_out,
            kraus,
            validation_tol: after.validation_tol.max(before.validation_tol),
        })
    }

    /// `a ⊗ b`, Kraus set `{A_m ⊗ B_n}`.
    pub fn tensor(a: &Self, b: &Self) -> Self {
        let kraus = a
            .kraus
            .iter()
            .flat_map(|x| b.kraus.iter().map(move |y| kron(x, y)))
            .collect();
        Self {
            dim_in: a.dim_in * b.dim_in,
            dim_out: a.dim_out * b.dim_out,
            kraus,
            validation_tol: a.validation_tol.max(b.validation_tol),
        }
    }

    /// `Tr ∘ self`: the channel followed by discarding its output.
    pub fn trace_out(&self) -> Self {
        Self::compose(&Self::trace_map(self.dim_out), self).expect("dimensions agree")
    }

    /// Probabilistic mixture `Σ q_i N_i`, realised by concatenating the Kraus
    /// sets scaled by `√q_i`. Weights must be nonnegative and sum to one.
    pub fn mixture(parts: &[(f64, &Self)]) -> Result<Self> {
        let (_, first) = parts
            .first()
            .ok_or_else(|| Error::dims("mixture", "no channels"))?;
        let total: f64 = parts.iter().map(|(q, _)| q).sum();
        if parts.iter().any(|(q, _)| *q < 0.0) || (total - 1.0).abs() > STRUCTURAL_TOL {
            return Err(Error::OutOfRange {
                name: "mixture weight sum",
                value: total,
                range: "nonnegative weights summing to 1",
            });
        }
        let mut kraus = Vec::new();
        for (q, ch) in parts {
            if ch.dim_in != first.dim_in || ch.dim_out != first.dim_out {
                return Err(Error::dims("mixture", "channels of different shapes"));
            }
            if *q > 0.0 {
                kraus.extend(ch.kraus.iter().map(|k| k.scale_real(q.sqrt())));
            }
        }
        Ok(Self {
            dim_in: first.dim_in,
            dim_out: first.dim_out,
            kraus,
            validation_tol: parts
                .iter()
                .map(|(_, c)| c.validation_tol)
                .fold(0.0, f64::max),
        })
    }

    pub fn is_mio(&self, variant: MioVariant, tol: f64) -> bool {
        self.to_choi().is_mio(variant, tol)
    }

    pub fn to_file(&self) -> ChannelFile {
        ChannelFile {
            dim_in: self.dim_in,
            dim_out: self.dim_out,
            kraus: self
                .kraus
                .iter()
                .map(|k| {
                    (0..k.rows())
                        .map(|r| {
                            (0..k.cols())
                                .map(|c| [k[(r, c)].re, k[(r, c)].im])
                                .collect()
                        })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("serialisable")
    }

    /// Parses a channel document and validates trace preservation within `tol`.
    pub fn from_json(text: &str, tol: f64) -> Result<Self> {
        let file: ChannelFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        file.into_channel(tol)
    }
}

/// On-disk channel description: each Kraus operator is a list of rows and
/// each entry a `[re, im]` pair.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ChannelFile {
    pub dim_in: usize,
    pub dim_out: usize,
    pub kraus: Vec<Vec<Vec<[f64; 2]>>>,
}

impl ChannelFile {
    pub fn into_channel(self, tol: f64) -> Result<KrausChannel> {
        if self.kraus.is_empty() {
            return Err(Error::Parse("`kraus` is empty".into()));
        }
        let mut ops = Vec::with_capacity(self.kraus.len());
        for (n, rows) in self.kraus.iter().enumerate() {
            if rows.len() != self.dim_out || rows.iter().any(|r| r.len() != self.dim_in) {
                return Err(Error::Parse(format!(
                    "Kraus operator {n} is not {}x{} (dim_out x dim_in)",
                    self.dim_out, self.dim_in
                )));
            }
            let data = rows
                .iter()
                .flatten()
                .map(|&[re, im]| C64::new(re, im))
                .collect();
            ops.push(ComplexMatrix::from_row_major(
                self.dim_out,
                self.dim_in,
                data,
            )?);
        }
        KrausChannel::new(ops, tol)
    }
}

/// Which Choi-matrix constraint defines the maximally incoherent operations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MioVariant {
    /// `Tr_A J - Δ(Tr_A J) = 0`, i.e. only `N(I)` is required to be diagonal.
    Paper,
    /// Every `N(|i><i|)` is diagonal.
    #[default]
    Strict,
}

impl fmt::Display for MioVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MioVariant::Paper => "paper",
            MioVariant::Strict => "strict",
        })
    }
}

impl FromStr for MioVariant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "paper" => Ok(MioVariant::Paper),
            "strict" => Ok(MioVariant::Strict),
            other => Err(format!(
                "unknown MIO variant `{other}` (expected paper|strict)"
            )),
        }
    }
}

/// Choi matrix of a CPTP map, input factor first.
#[derive(Clone, Debug)]
pub struct ChoiMatrix {
    dim_in: usize,
    dim_out: usize,
    matrix: ComplexMatrix,
}

impl ChoiMatrix {
    /// Validates complete positivity and trace preservation within `tol`.
    pub fn new(dim_in: usize, dim_out: usize, matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        let n = dim_in * dim_out;
        if matrix.rows() != n || matrix.cols() != n {
            return Err(Error::dims(
                "ChoiMatrix::new",
                format!(
                    "{}x{} for dims {dim_in}->{dim_out}",
                    matrix.rows(),
                    matrix.cols()
                ),
            ));
        }
        let defect = matrix.hermiticity_defect();
        if defect > tol {
            return Err(Error::NotHermitian { deviation: defect });
        }
        let matrix = matrix.hermitian_part();
        let min = hermitian_eig(&matrix)?.min();
        if min < -tol {
            return Err(Error::NotCompletelyPositive {
                min_eigenvalue: min,
            });
        }
        let reduced = partial_trace(&matrix, (dim_in, dim_out), Subsystem::A)?;
        let deviation = (&reduced - &ComplexMatrix::identity(dim_in)).max_abs();
        if deviation > tol {
            return Err(Error::NotTracePreserving { deviation, tol });
        }
        Ok(Self {
            dim_in,
            dim_out,
            matrix,
        })
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// `N(|i><j|)`, the `(i, j)` block of `J`.
    pub fn block(&self, i: usize, j: usize) -> ComplexMatrix {
        let d = self.dim_out;
        self.matrix.block(i * d, j * d, d, d)
    }

    /// `N(ρ) = Tr_in[(ρ^T ⊗ I) J]`.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.rows() != self.dim_in || rho.cols() != self.dim_in {
            return Err(Error::dims("ChoiMatrix::apply", "input dimension"));
        }
        let lifted = kron(&rho.transpose(), &ComplexMatrix::identity(self.dim_out));
        partial_trace(
            &lifted.matmul(&self.matrix),
            (self.dim_in, self.dim_out),
            Subsystem::B,
        )
    }

    pub fn is_mio(&self, variant: MioVariant, tol: f64) -> bool {
        match variant {
            MioVariant::Paper => {
                let out = partial_trace(&self.matrix, (self.dim_in, self.dim_out), Subsystem::B)
                    .expect("shape checked at construction");
                (&out - &dephase(&out).expect("square")).max_abs() <= tol
            }
            MioVariant::Strict => (0..self.dim_in).all(|i| {
                let b = self.block(i, i);
                (&b - &dephase(&b).expect("square")).max_abs() <= tol
            }),
        }
    }

    /// Kraus operators from the eigendecomposition of `J`, discarding
    /// eigenvalues below [`KRAUS_EIGEN_CUTOFF`].
    pub fn to_kraus(&self, tol: f64) -> Result<KrausChannel> {
        let eig = hermitian_eig(&self.matrix)?;
        if eig.min() < -tol.max(NUMERICAL_TOL) {
            return Err(Error::NotCompletelyPositive {
                min_eigenvalue: eig.min(),
            });
        }
        let (din, dout) = (self.dim_in, self.dim_out);
        let kraus: Vec<ComplexMatrix> = eig
            .eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > KRAUS_EIGEN_CUTOFF)
            .map(|(k, &l)| {
                let s = l.sqrt();
                ComplexMatrix::from_fn(dout, din, |a, i| eig.eigenvectors[(i * dout + a, k)] * s)
            })
            .collect();
        if kraus.is_empty() {
            return Err(Error::NotCompletelyPositive {
                min_eigenvalue: eig.min(),
            });
        }
        KrausChannel::new(kraus, tol)
    }
}

/// `kraus_from_choi` under the name used elsewhere in the crate.
pub fn kraus_from_choi(j: &ChoiMatrix, tol: f64) -> Result<KrausChannel> {
    j.to_kraus(tol)
}

/// The elementary free superoperations a free superchannel is composed of.
#[derive(Clone, Debug)]
pub enum ElementarySuperop {
    /// `N ↦ Tr ∘ N`.
    Trace,
    /// `N ↦ Φ ∘ N`.
    PostCompose(KrausChannel),
    /// `N ↦ Φ ⊗ N`.
    TensorLeft(KrausChannel),
    /// `N ↦ N ∘ Φ`.
    PreCompose(KrausChannel),
    /// `N ↦ N ⊗ Φ`.
    TensorRight(KrausChannel),
}

impl ElementarySuperop {
    pub fn apply(&self, n: &KrausChannel) -> Result<KrausChannel> {
        match self {
            ElementarySuperop::Trace => Ok(n.trace_out()),
            ElementarySuperop::PostCompose(phi) => KrausChannel::compose(phi, n),
            ElementarySuperop::TensorLeft(phi) => Ok(KrausChannel::tensor(phi, n)),
            ElementarySuperop::PreCompose(phi) => KrausChannel::compose(n, phi),
            ElementarySuperop::TensorRight(phi) => Ok(KrausChannel::tensor(n, phi)),
        }
    }
}

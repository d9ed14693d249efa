//! Unconstrained real parametrisations of density matrices and pure states.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{ComplexMatrix, C64};
use crate::state::DensityMatrix;

/// Real parameters -> density matrix, onto the whole state space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StateParametrization {
    /// Qubit: `(x, y, z)` radially projected onto the unit ball.
    Bloch,
    /// Qudit: `ρ = G G^dag / Tr(G G^dag)` for a complex `dim x dim` matrix `G`
    /// given by `2 dim^2` reals.
    Factor { dim: usize },
}

impl StateParametrization {
    pub fn for_dim(dim: usize) -> Self {
        if dim == 2 {
            StateParametrization::Bloch
        } else {
            StateParametrization::Factor { dim }
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            StateParametrization::Bloch => 2,
            StateParametrization::Factor { dim } => dim,
        }
    }

    pub fn n_params(&self) -> usize {
        match *self {
            StateParametrization::Bloch => 3,
            StateParametrization::Factor { dim } => 2 * dim * dim,
        }
    }

    pub fn to_state(&self, p: &[f64]) -> DensityMatrix {
        match *self {
            StateParametrization::Bloch => DensityMatrix::from_bloch_unchecked(project_to_ball(p)),
            StateParametrization::Factor { dim } => {
                let g = factor_matrix(dim, p);
                let m = g.matmul(&g.adjoint());
                let tr = m.trace().re;
                if tr <= f64::MIN_POSITIVE {
                    DensityMatrix::maximally_mixed(dim)
                } else {
                    DensityMatrix::from_matrix_unchecked(m.scale_real(1.0 / tr))
                }
            }
        }
    }

    /// Parameters that map to `rho` (or, for the factor mode, to a state
    /// equal to it).
    pub fn params_for(&self, rho: &DensityMatrix) -> Vec<f64> {
        match *self {
            StateParametrization::Bloch => rho.bloch_vector().expect("qubit state").to_vec(),
            StateParametrization::Factor { .. } => {
                let sqrt = crate::linalg::hermitian_eig(rho.matrix())
                    .expect("Hermitian")
                    .map(|x| x.max(0.0).sqrt());
                sqrt.as_slice().iter().flat_map(|z| [z.re, z.im]).collect()
            }
        }
    }

    pub fn random_params(&self, rng: &mut impl Rng) -> Vec<f64> {
        match *self {
            StateParametrization::Bloch => loop {
                let p: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
                if p.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
                    break p;
                }
            },
            StateParametrization::Factor { dim } => (0..2 * dim * dim)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect(),
        }
    }

    /// Computational basis states and the equal-weight superpositions
    /// `(|i> + e^{iφ}|j>)/√2` for `φ ∈ {0, π/2, π, 3π/2}`, plus the uniform
    /// superposition.
    pub fn special_states(&self) -> Vec<DensityMatrix> {
        let d = self.dim();
        let mut out: Vec<DensityMatrix> = (0..d).map(|i| DensityMatrix::basis(d, i)).collect();
        let phases = [
            C64::new(1.0, 0.0),
            C64::new(0.0, 1.0),
            C64::new(-1.0, 0.0),
            C64::new(0.0, -1.0),
        ];
        for i in 0..d {
            for j in (i + 1)..d {
                for ph in phases {
                    let mut psi = vec![C64::new(0.0, 0.0); d];
                    psi[i] = C64::new(1.0, 0.0);
                    psi[j] = ph;
                    out.push(DensityMatrix::pure(&psi).expect("nonzero"));
                }
            }
        }
        if d > 2 {
            out.push(DensityMatrix::plus(d));
        }
        out
    }
}

pub(crate) fn project_to_ball(p: &[f64]) -> [f64; 3] {
    let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    if r <= 1.0 {
        [p[0], p[1], p[2]]
    } else {
        [p[0] / r, p[1] / r, p[2] / r]
    }
}

fn factor_matrix(dim: usize, p: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, dim, |i, j| {
        let k = 2 * (i * dim + j);
        C64::new(p[k], p[k + 1])
    })
}

/// Unit vector in `C^dim` from `2 dim` reals (zero maps to `|0>`).
pub fn unit_vector(p: &[f64]) -> Vec<C64> {
    let v: Vec<C64> = p.chunks_exact(2).map(|c| C64::new(c[0], c[1])).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm <= f64::MIN_POSITIVE {
        let mut e = vec![C64::new(0.0, 0.0); v.len()];
        e[0] = C64::new(1.0, 0.0);
        return e;
    }
    v.into_iter().map(|z| z / norm).collect()
}

//! Seeded generators for random states, unitaries and channels.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::KrausChannel;
use crate::linalg::{hermitian_eig, ComplexMatrix, C64};
use crate::state::DensityMatrix;

fn gaussian(rng: &mut impl Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn ginibre(rows: usize, cols: usize, rng: &mut impl Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

pub fn random_hermitian(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    ginibre(dim, dim, rng).hermitian_part()
}

/// Haar-random pure state.
pub fn random_pure_state(dim: usize, rng: &mut impl Rng) -> DensityMatrix {
    let psi: Vec<C64> = (0..dim).map(|_| gaussian(rng)).collect();
    DensityMatrix::pure(&psi).expect("nonzero with probability one")
}

/// Hilbert-Schmidt random mixed state.
pub fn random_density_matrix(dim: usize, rng: &mut impl Rng) -> DensityMatrix {
    let g = ginibre(dim, dim, rng);
    let m = g.matmul(&g.adjoint());
    let tr = m.trace().re;
    DensityMatrix::from_matrix_unchecked(m.scale_real(1.0 / tr))
}

/// `G (G^dag G)^{-1/2}`: an isometry from a full-column-rank matrix.
fn orthonormalise_columns(g: &ComplexMatrix) -> ComplexMatrix {
    let gram = g.adjoint().matmul(g);
    let inv_sqrt = hermitian_eig(&gram)
        .expect("Gram matrix is Hermitian")
        .map(|x| 1.0 / x.sqrt());
    g.matmul(&inv_sqrt)
}

pub fn random_unitary(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    orthonormalise_columns(&ginibre(dim, dim, rng))
}

/// Random CPTP channel with `n_kraus` Kraus operators, from a random
/// isometry `C^{dim_in} -> C^{n_kraus} ⊗ C^{dim_out}`.
/// Panics if `n_kraus * dim_out < dim_in`, when no such isometry exists.
pub fn random_channel(
    dim_in: usize,
    dim_out: usize,
    n_kraus: usize,
    rng: &mut impl Rng,
) -> KrausChannel {
    assert!(
        n_kraus * dim_out >= dim_in,
        "{n_kraus} Kraus operators of size {dim_out}x{dim_in} cannot be trace preserving"
    );
    let v = orthonormalise_columns(&ginibre(n_kraus * dim_out, dim_in, rng));
    let kraus = (0..n_kraus)
        .map(|k| v.block(k * dim_out, 0, dim_out, dim_in))
        .collect();
    KrausChannel::from_trusted(kraus)
}

fn random_stochastic_column(dim: usize, rng: &mut impl Rng) -> Vec<f64> {
    let w: Vec<f64> = (0..dim)
        .map(|_| -rng.random::<f64>().max(1e-300).ln())
        .collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

/// Random maximally incoherent channel: a mixture of a phase-randomised
/// classical stochastic map and a diagonal unitary after partial dephasing,
/// followed by a random basis permutation.
pub fn random_mio(dim: usize, rng: &mut impl Rng) -> KrausChannel {
    let mut classical = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        let col = random_stochastic_column(dim, rng);
        for (j, p) in col.into_iter().enumerate() {
            let mut k = ComplexMatrix::zeros(dim, dim);
            k[(j, i)] = C64::from_polar(p.sqrt(), rng.random_range(0.0..std::f64::consts::TAU));
            classical.push(k);
        }
    }
    let classical = KrausChannel::from_trusted(classical);

    let phases: Vec<C64> = (0..dim)
        .map(|_| C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU)))
        .collect();
    let phase = KrausChannel::from_trusted(vec![ComplexMatrix::diag(&phases)]);
    let deph = KrausChannel::partial_dephasing(dim, rng.random()).expect("p in [0, 1)");
    let coherent = KrausChannel::compose(&phase, &deph).expect("same dimension");

    let q: f64 = rng.random();
    let mixed = KrausChannel::mixture(&[(q, &classical), (1.0 - q, &coherent)]).expect("valid");

    let mut perm: Vec<usize> = (0..dim).collect();
    for i in (1..dim).rev() {
        perm.swap(i, rng.random_range(0..=i));
    }
    let p = KrausChannel::permutation(&perm).expect("permutation");
    KrausChannel::compose(&p, &mixed).expect("same dimension")
}

/// A random element of the fixed free family used by the monotonicity
/// checks: a basis permutation or the completely dephasing channel.
pub fn random_free_fixture(dim: usize, rng: &mut impl Rng) -> KrausChannel {
    if rng.random_bool(0.5) {
        KrausChannel::dephasing(dim)
    } else {
        let mut perm: Vec<usize> = (0..dim).collect();
        if dim > 1 {
            perm.rotate_left(rng.random_range(1..dim));
        }
        KrausChannel::permutation(&perm).expect("rotation is a permutation")
    }
}

//! Static coherence measures in the computational basis.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::linalg::{dephase, hermitian_eigenvalues};
use crate::state::DensityMatrix;

/// Eigenvalues below this contribute nothing to the von Neumann entropy.
pub const ENTROPY_CUTOFF: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StaticMeasure {
    L1,
    RelativeEntropy,
    L2Total,
}

impl StaticMeasure {
    pub fn evaluate(self, rho: &DensityMatrix) -> f64 {
        match self {
            StaticMeasure::L1 => c_l1(rho),
            StaticMeasure::RelativeEntropy => c_rel_ent(rho),
            StaticMeasure::L2Total => c_l2_total(rho),
        }
    }
}

impl fmt::Display for StaticMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StaticMeasure::L1 => "l1",
            StaticMeasure::RelativeEntropy => "rel-ent",
            StaticMeasure::L2Total => "l2-total",
        })
    }
}

impl FromStr for StaticMeasure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "l1" => Ok(StaticMeasure::L1),
            "rel-ent" | "relative-entropy" => Ok(StaticMeasure::RelativeEntropy),
            "l2-total" | "l2" => Ok(StaticMeasure::L2Total),
            other => Err(format!(
                "unknown measure `{other}` (expected l1|rel-ent|l2-total)"
            )),
        }
    }
}

/// Sum of the moduli of the off-diagonal entries.
pub fn c_l1(rho: &DensityMatrix) -> f64 {
    let m = rho.matrix();
    let d = rho.dim();
    let mut acc = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                acc += m[(i, j)].norm();
            }
        }
    }
    acc
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    let vals = hermitian_eigenvalues(rho.matrix()).expect("density matrices are Hermitian");
    entropy_of(vals.into_iter())
}

fn entropy_of(probs: impl Iterator<Item = f64>) -> f64 {
    probs
        .filter(|&p| p > ENTROPY_CUTOFF)
        .map(|p| -p * p.log2())
        .sum()
}

/// Relative entropy of coherence `S(Δρ) - S(ρ)`, in bits.
pub fn c_rel_ent(rho: &DensityMatrix) -> f64 {
    let diag = dephase(rho.matrix()).expect("square");
    let s_diag = entropy_of((0..rho.dim()).map(|i| diag[(i, i)].re));
    (s_diag - von_neumann_entropy(rho)).max(0.0)
}

/// `Tr ρ^2 - 1/d`, the l2 distance to the maximally mixed state squared.
pub fn c_l2_total(rho: &DensityMatrix) -> f64 {
    rho.purity() - 1.0 / rho.dim() as f64
}

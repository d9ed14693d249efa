//! Violation-based dynamical coherence measures, the l2 total dynamical
//! coherence and its closed forms.

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use crate::channel::KrausChannel;
use crate::coherence::StaticMeasure;
use crate::error::{Error, Result};
use crate::linalg::{pauli, ComplexMatrix};
use crate::optimize::{maximize_over_states, OptimizerConfig, StateOptimum};
use crate::state::DensityMatrix;

/// Distance from 1 below which a singular value of the affine map counts
/// as unitary-like and the closed form is abandoned.
pub const SINGULAR_GUARD: f64 = 1e-6;

fn check_square(ch: &KrausChannel, op: &'static str) -> Result<()> {
    if ch.dim_in() != ch.dim_out() {
        return Err(Error::dims(
            op,
            format!("channel maps dimension {} to {}", ch.dim_in(), ch.dim_out()),
        ));
    }
    Ok(())
}

/// `max_ρ C(N(ρ)) - C(ρ)`, unclamped.
pub fn delta_m_np(
    ch: &KrausChannel,
    measure: StaticMeasure,
    cfg: &OptimizerConfig,
) -> Result<StateOptimum> {
    let f = |rho: &DensityMatrix| {
        let out = ch
            .apply(rho)
            .expect("input dimension fixed by the optimizer");
        measure.evaluate(&out) - measure.evaluate(rho)
    };
    maximize_over_states(ch.dim_in(), &f, cfg)
}

/// `max_ρ Σ_n p_n C(ρ_n) - C(ρ)` over the selective branches, unclamped.
pub fn delta_m_p(
    ch: &KrausChannel,
    measure: StaticMeasure,
    cfg: &OptimizerConfig,
) -> Result<StateOptimum> {
    let f = |rho: &DensityMatrix| {
        let branches = ch
            .apply_selective(rho)
            .expect("input dimension fixed by the optimizer");
        let out: f64 = branches
            .iter()
            .map(|b| b.probability * measure.evaluate(&b.state))
            .sum();
        out - measure.evaluate(rho)
    };
    maximize_over_states(ch.dim_in(), &f, cfg)
}

/// `max{ΔM, 0}` with or without post-selection.
pub fn t_tilde(
    ch: &KrausChannel,
    measure: StaticMeasure,
    cfg: &OptimizerConfig,
    selective: bool,
) -> Result<f64> {
    let opt = if selective {
        delta_m_p(ch, measure, cfg)?
    } else {
        delta_m_np(ch, measure, cfg)?
    };
    Ok(opt.value.max(0.0))
}

/// `max_ρ Σ_n Tr[(K_n ρ K_n^dag)^2] / p_n - Tr ρ^2`, unclamped.
pub fn delta_l2_post(ch: &KrausChannel, cfg: &OptimizerConfig) -> Result<StateOptimum> {
    check_square(ch, "delta_l2_post")?;
    let f = |rho: &DensityMatrix| {
        let branches = ch
            .apply_selective(rho)
            .expect("input dimension fixed by the optimizer");
        let out: f64 = branches
            .iter()
            .map(|b| b.probability * b.state.purity())
            .sum();
        out - rho.purity()
    };
    maximize_over_states(ch.dim_in(), &f, cfg)
}

/// `max_ρ Tr[N(ρ)^2] - Tr ρ^2`, unclamped.
pub fn delta_l2_nonpost(ch: &KrausChannel, cfg: &OptimizerConfig) -> Result<StateOptimum> {
    check_square(ch, "delta_l2_nonpost")?;
    let f = |rho: &DensityMatrix| {
        ch.apply(rho)
            .expect("input dimension fixed by the optimizer")
            .purity()
            - rho.purity()
    };
    maximize_over_states(ch.dim_in(), &f, cfg)
}

pub fn t_l2_post(ch: &KrausChannel, cfg: &OptimizerConfig) -> Result<f64> {
    Ok(delta_l2_post(ch, cfg)?.value.max(0.0))
}

pub fn t_l2_nonpost(ch: &KrausChannel, cfg: &OptimizerConfig) -> Result<f64> {
    Ok(delta_l2_nonpost(ch, cfg)?.value.max(0.0))
}

/// A qubit channel as the Bloch-ball map `r ↦ M r + a`.
#[derive(Clone, Debug, Serialize)]
pub struct QubitAffineForm {
    pub a: [f64; 3],
    pub m: [[f64; 3]; 3],
    /// Singular values of `m`, descending.
    pub xi: [f64; 3],
    /// Left singular vectors, as columns, in the order of `xi`.
    pub u: [[f64; 3]; 3],
    /// `U^T a`.
    pub a_tilde: [f64; 3],
}

impl QubitAffineForm {
    /// `a_i = ½ Tr[σ_i N(I)]`, `M_ij = ½ Tr[σ_i N(σ_j)]`.
    pub fn from_channel(ch: &KrausChannel) -> Result<Self> {
        if ch.dim_in() != 2 || ch.dim_out() != 2 {
            return Err(Error::dims(
                "QubitAffineForm",
                format!(
                    "need a qubit channel, got {} -> {}",
                    ch.dim_in(),
                    ch.dim_out()
                ),
            ));
        }
        let s = pauli();
        let n_id = ch.apply_operator(&ComplexMatrix::identity(2))?;
        let a: [f64; 3] = std::array::from_fn(|i| 0.5 * s[i].matmul(&n_id).trace().re);
        let mut m = [[0.0; 3]; 3];
        for (j, sj) in s.iter().enumerate() {
            let out = ch.apply_operator(sj)?;
            for (i, si) in s.iter().enumerate() {
                m[i][j] = 0.5 * si.matmul(&out).trace().re;
            }
        }

        let svd = Matrix3::from_fn(|i, j| m[i][j]).svd(true, false);
        let u_mat = svd.u.expect("requested U");
        let mut order = [0usize, 1, 2];
        order.sort_by(|&p, &q| svd.singular_values[q].total_cmp(&svd.singular_values[p]));
        let xi = order.map(|k| svd.singular_values[k]);
        let u: [[f64; 3]; 3] = std::array::from_fn(|i| order.map(|k| u_mat[(i, k)]));
        let av = Vector3::from(a);
        let a_tilde = order.map(|k| u_mat.column(k).dot(&av));
        Ok(QubitAffineForm {
            a,
            m,
            xi,
            u,
            a_tilde,
        })
    }

    /// `Σ_i ξ_i^2 ã_i^2 / (2(1 - ξ_i^2)) + a_i^2 / 2`, or `None` when some
    /// `ξ_i > 1 - guard`.
    pub fn closed_form_value(&self, guard: f64) -> Option<f64> {
        if self.xi.iter().any(|&x| x > 1.0 - guard) {
            return None;
        }
        Some(
            (0..3)
                .map(|i| {
                    let x2 = self.xi[i] * self.xi[i];
                    x2 * self.a_tilde[i].powi(2) / (2.0 * (1.0 - x2)) + self.a[i].powi(2) / 2.0
                })
                .sum(),
        )
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct T2Value {
    pub value: f64,
    /// True when the closed form was singular and direct optimisation was used.
    pub fallback: bool,
    pub form: QubitAffineForm,
}

/// The non-post-selective l2 total dynamical coherence of a qubit channel
/// from its affine form, falling back to [`t_l2_nonpost`] near unitarity.
pub fn t2_closed_form(ch: &KrausChannel, cfg: &OptimizerConfig) -> Result<T2Value> {
    let form = QubitAffineForm::from_channel(ch)?;
    match form.closed_form_value(SINGULAR_GUARD) {
        Some(v) => Ok(T2Value {
            value: v.max(0.0),
            fallback: false,
            form,
        }),
        None => Ok(T2Value {
            value: t_l2_nonpost(ch, cfg)?,
            fallback: true,
            form,
        }),
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::OutOfRange {
            name: "eta",
            value: eta,
            range: "[0, 1]",
        });
    }
    Ok(())
}

/// Maximiser `z*` of the post-selective amplitude-damping objective
/// (at `x = y = 0`), written as `1 - 4/(s + 3)` with `s = √(9 - 8η)`.
pub fn ad_optimal_z(eta: f64) -> Result<f64> {
    check_eta(eta)?;
    let s = (9.0 - 8.0 * eta).sqrt();
    Ok(1.0 - 4.0 / (s + 3.0))
}

/// Post-selective l2 dynamical coherence of amplitude damping,
/// `16η(s + 1)/(s + 3)^3` with `s = √(9 - 8η)`.
///
/// Algebraically identical to [`ad_analytic_printed`] but free of the
/// `0/0` cancellation as `η → 0`.
pub fn ad_analytic(eta: f64) -> Result<f64> {
    check_eta(eta)?;
    let s = (9.0 - 8.0 * eta).sqrt();
    Ok(16.0 * eta * (s + 1.0) / (s + 3.0).powi(3))
}

/// `[9(s - 3) - 4η(2η + 2s - 9)] / (4η^2)`, evaluated literally.
pub fn ad_analytic_printed(eta: f64) -> Result<f64> {
    check_eta(eta)?;
    let s = (9.0 - 8.0 * eta).sqrt();
    Ok((9.0 * (s - 3.0) - 4.0 * eta * (2.0 * eta + 2.0 * s - 9.0)) / (4.0 * eta * eta))
}

/// The post-selective objective for amplitude damping at Bloch point
/// `(x, y, z)`.
pub fn ad_post_objective(eta: f64, x: f64, y: f64, z: f64) -> f64 {
    let t = x * x + y * y;
    ((1.0 + z).powi(2) + (1.0 - eta).powi(2) * (1.0 - z).powi(2) + 2.0 * (1.0 - eta) * t)
        / (2.0 * (2.0 - eta + eta * z))
        + eta * (1.0 - z) / 2.0
        - (1.0 + t + z * z) / 2.0
}

/// Non-post-selective l2 dynamical coherence of amplitude damping,
/// `η^2/2 + (1 - η)^2 η / (2(2 - η))`.
pub fn ad_nonpost_analytic(eta: f64) -> Result<f64> {
    check_eta(eta)?;
    Ok(eta * eta / 2.0 + (1.0 - eta).powi(2) * eta / (2.0 * (2.0 - eta)))
}

/// The damping parameter if `ch` equals `amplitude_damping(η)` as a map.
pub fn recognize_amplitude_damping(ch: &KrausChannel) -> Option<f64> {
    if ch.dim_in() != 2 || ch.dim_out() != 2 {
        return None;
    }
    let out = ch.apply_operator(&ComplexMatrix::unit(2, 1, 1)).ok()?;
    let eta = out[(0, 0)].re;
    if !(0.0..=1.0 + 1e-9).contains(&eta) {
        return None;
    }
    let eta = eta.min(1.0);
    let reference = KrausChannel::amplitude_damping(eta).ok()?;
    ch.to_choi()
        .matrix()
        .approx_eq(reference.to_choi().matrix(), 1e-9)
        .then_some(eta)
}

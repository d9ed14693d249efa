//! Diamond-norm and trace-norm distances from a channel to the maximally
//! incoherent operations, as joint semidefinite programs.

use rand::{Rng, SeedableRng};

use crate::channel::{ChoiMatrix, KrausChannel, MioVariant};
use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_coordinate_functionals, hermitian_eig, kron, partial_trace, trace_norm,
    ComplexMatrix, Subsystem,
};
use crate::optimize::{multistart_maximize, unit_vector, OptimizerConfig};
use crate::sdp::{HermitianProgram, HermitianSolution, SolverSettings, Term, VarId};

/// Tolerance for accepting the solver's free channel as CPTP.
pub const FREE_CHANNEL_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct DiamondNorm {
    pub value: f64,
    pub dual_value: f64,
    pub gap: f64,
    /// Normalised dual multiplier of the norm constraint: the reduced state
    /// of an optimal input on the reference system.
    pub input_reduced: ComplexMatrix,
    pub iterations: usize,
}

#[derive(Clone, Debug)]
pub struct DistanceReport {
    pub value: f64,
    pub dual_value: f64,
    pub gap: f64,
    pub optimal_free_channel: ChoiMatrix,
    pub mio_variant: MioVariant,
    pub iterations: usize,
    /// Strict-feasibility witness for the program (diamond-norm distance only).
    pub slater: Option<SlaterCheck>,
}

fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n)
}

struct NormVars {
    a: VarId,
    s1: VarId,
}

/// `min a  s.t.  a I - 2 Tr_B Z ⪰ 0,  Z ⪰ 0,  Z - target + Σ extra ⪰ 0`,
/// whose optimum is the diamond norm of the map with Choi matrix
/// `target - Σ extra` when that map annihilates traces.
fn norm_program(
    prog: &mut HermitianProgram,
    din: usize,
    dout: usize,
    target: &ComplexMatrix,
    extra: &[VarId],
) -> NormVars {
    let n = din * dout;
    let a = prog.scalar();
    let z = prog.hermitian(n);
    let s1 = prog.hermitian(din);
    let s2 = prog.hermitian(n);
    prog.minimize(vec![Term::Scalar(a, 1.0)]);
    let id_b = identity(dout);
    prog.matrix_equal(
        din,
        |e| {
            vec![
                Term::Matrix(s1, e.clone()),
                Term::Scalar(a, -e.trace().re),
                Term::Matrix(z, kron(e, &id_b).scale_real(2.0)),
            ]
        },
        &ComplexMatrix::zeros(din, din),
    );
    prog.matrix_equal(
        n,
        |e| {
            let mut t = vec![Term::Matrix(s2, e.clone()), Term::Matrix(z, -e)];
            t.extend(extra.iter().map(|&m| Term::Matrix(m, -e)));
            t
        },
        &-target,
    );
    NormVars { a, s1 }
}

/// `Tr_B M = I_A` plus the incoherence condition of `variant`.
fn add_mio_constraints(
    prog: &mut HermitianProgram,
    m: VarId,
    din: usize,
    dout: usize,
    variant: MioVariant,
) {
    let id_b = identity(dout);
    prog.matrix_equal(
        din,
        |e| vec![Term::Matrix(m, kron(e, &id_b))],
        &identity(din),
    );
    let off_diagonal: Vec<ComplexMatrix> = hermitian_coordinate_functionals(dout)
        .into_iter()
        .skip(dout)
        .collect();
    match variant {
        MioVariant::Paper => {
            for e in &off_diagonal {
                prog.equal(vec![Term::Matrix(m, kron(&identity(din), e))], 0.0);
            }
        }
        MioVariant::Strict => {
            for i in 0..din {
                let p = ComplexMatrix::unit(din, i, i);
                for e in &off_diagonal {
                    prog.equal(vec![Term::Matrix(m, kron(&p, e))], 0.0);
                }
            }
        }
    }
}

fn solve_optimal(prog: &HermitianProgram) -> Result<HermitianSolution> {
    let mut sol = prog.solve(&SolverSettings::default())?;
    sol.report = sol.report.into_optimal()?;
    Ok(sol)
}

/// Diamond norm of the trace-annihilating map with (input-first) Choi
/// matrix `delta`, e.g. a difference of two channels.
pub fn diamond_norm(delta: &ComplexMatrix, dim_in: usize, dim_out: usize) -> Result<DiamondNorm> {
    let n = dim_in * dim_out;
    if delta.rows() != n || delta.cols() != n {
        return Err(Error::dims(
            "diamond_norm",
            format!(
                "{}x{} Choi matrix for {dim_in} -> {dim_out}",
                delta.rows(),
                delta.cols()
            ),
        ));
    }
    if !delta.is_hermitian(1e-9) {
        return Err(Error::NotHermitian {
            deviation: delta.hermiticity_defect(),
        });
    }
    let mut prog = HermitianProgram::new();
    let vars = norm_program(&mut prog, dim_in, dim_out, &delta.hermitian_part(), &[]);
    let sol = solve_optimal(&prog)?;
    let w = sol.dual(vars.s1).matrix().hermitian_part();
    let tr = w.trace().re;
    let input_reduced = if tr > 1e-12 {
        w.scale_real(1.0 / tr)
    } else {
        identity(dim_in).scale_real(1.0 / dim_in as f64)
    };
    Ok(DiamondNorm {
        value: sol.value(vars.a).scalar(),
        dual_value: sol.report.dual_value,
        gap: sol.report.gap,
        input_reduced,
        iterations: sol.report.iterations,
    })
}

/// Diamond norm of `a - b`.
pub fn diamond_distance(a: &KrausChannel, b: &KrausChannel) -> Result<DiamondNorm> {
    check_same_dims(a, b, "diamond_distance")?;
    let delta = a.to_choi().matrix() - b.to_choi().matrix();
    diamond_norm(&delta, a.dim_in(), a.dim_out())
}

fn check_same_dims(a: &KrausChannel, b: &KrausChannel, op: &'static str) -> Result<()> {
    if a.dim_in() != b.dim_in() || a.dim_out() != b.dim_out() {
        return Err(Error::dims(
            op,
            format!(
                "{} -> {} versus {} -> {}",
                a.dim_in(),
                a.dim_out(),
                b.dim_in(),
                b.dim_out()
            ),
        ));
    }
    Ok(())
}

fn free_channel(sol: &HermitianSolution, m: VarId, din: usize, dout: usize) -> Result<ChoiMatrix> {
    ChoiMatrix::new(
        din,
        dout,
        sol.value(m).matrix().hermitian_part(),
        FREE_CHANNEL_TOL,
    )
}

/// `min_{F ∈ MIO} ‖N - F‖_⋄` as one program over `(Z, M, a)`.
pub fn t_diamond_mio(ch: &KrausChannel, variant: MioVariant) -> Result<DistanceReport> {
    let (din, dout) = (ch.dim_in(), ch.dim_out());
    let choi = ch.to_choi();
    let mut prog = HermitianProgram::new();
    let m = prog.hermitian(din * dout);
    let vars = norm_program(&mut prog, din, dout, choi.matrix(), &[m]);
    add_mio_constraints(&mut prog, m, din, dout, variant);

    let slater = check_slater_point(&choi, &slater_point(&choi), variant)?;
    let sol = solve_optimal(&prog)?;
    Ok(DistanceReport {
        value: sol.value(vars.a).scalar(),
        dual_value: sol.report.dual_value,
        gap: sol.report.gap,
        optimal_free_channel: free_channel(&sol, m, din, dout)?,
        mio_variant: variant,
        iterations: sol.report.iterations,
        slater: Some(slater),
    })
}

/// `min_{F ∈ MIO} max_i ‖(N - F)(|i><i|)‖_1`, the trace-norm distance of
/// the dephasing-assisted maps `NΔ` and `FΔ`.
pub fn t_a_non(ch: &KrausChannel, variant: MioVariant) -> Result<DistanceReport> {
    let (din, dout) = (ch.dim_in(), ch.dim_out());
    let mut prog = HermitianProgram::new();
    let t = prog.scalar();
    let m = prog.hermitian(din * dout);
    prog.minimize(vec![Term::Scalar(t, 1.0)]);
    let id_b = identity(dout);
    for i in 0..din {
        let p = prog.hermitian(dout);
        let q = prog.hermitian(dout);
        let slack = prog.scalar();
        let proj = ComplexMatrix::unit(din, i, i);
        let target = ch.apply_operator(&proj)?;
        prog.matrix_equal(
            dout,
            |e| {
                vec![
                    Term::Matrix(p, e.clone()),
                    Term::Matrix(q, -e),
                    Term::Matrix(m, kron(&proj, e)),
                ]
            },
            &target,
        );
        prog.equal(
            vec![
                Term::Matrix(p, id_b.clone()),
                Term::Matrix(q, id_b.clone()),
                Term::Scalar(slack, 1.0),
                Term::Scalar(t, -1.0),
            ],
            0.0,
        );
    }
    add_mio_constraints(&mut prog, m, din, dout, variant);
    let sol = solve_optimal(&prog)?;
    Ok(DistanceReport {
        value: sol.value(t).scalar(),
        dual_value: sol.report.dual_value,
        gap: sol.report.gap,
        optimal_free_channel: free_channel(&sol, m, din, dout)?,
        mio_variant: variant,
        iterations: sol.report.iterations,
        slater: None,
    })
}

/// A strictly feasible point of the diamond-norm distance program:
/// `Z = I + J(N)`, `M = I / d_out`.
#[derive(Clone, Debug)]
pub struct SlaterPoint {
    pub z: ComplexMatrix,
    pub m: ComplexMatrix,
}

pub fn slater_point(choi: &ChoiMatrix) -> SlaterPoint {
    let n = choi.dim_in() * choi.dim_out();
    SlaterPoint {
        z: &identity(n) + choi.matrix(),
        m: identity(n).scale_real(1.0 / choi.dim_out() as f64),
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SlaterCheck {
    pub min_eig_z: f64,
    pub min_eig_m: f64,
    /// `λ_min(Z - J(N) + M)`.
    pub min_eig_margin: f64,
    /// `max |Tr_B M - I|` together with the incoherence equalities.
    pub equality_residual: f64,
}

impl SlaterCheck {
    pub fn is_strictly_feasible(&self) -> bool {
        self.min_eig_z > 0.0
            && self.min_eig_m > 0.0
            && self.min_eig_margin > 0.0
            && self.equality_residual < 1e-12
    }
}

pub fn check_slater_point(
    choi: &ChoiMatrix,
    point: &SlaterPoint,
    variant: MioVariant,
) -> Result<SlaterCheck> {
    let (din, dout) = (choi.dim_in(), choi.dim_out());
    let margin = &(&point.z - choi.matrix()) + &point.m;
    let tr_b = partial_trace(&point.m, (din, dout), Subsystem::A)?;
    let mut residual = (&tr_b - &identity(din)).max_abs();
    let m_choi = ChoiMatrix::new(din, dout, point.m.clone(), 1e-9)?;
    if !m_choi.is_mio(variant, 1e-12) {
        residual = residual.max(1.0);
    }
    Ok(SlaterCheck {
        min_eig_z: hermitian_eig(&point.z)?.min(),
        min_eig_m: hermitian_eig(&point.m)?.min(),
        min_eig_margin: hermitian_eig(&margin)?.min(),
        equality_residual: residual,
    })
}

/// `max ‖(A - B)(|ψ><φ|)‖_1` over unit vectors: a lower bound on the
/// induced trace norm of `A - B` found by multistart search.
pub fn induced_trace_norm(
    a: &KrausChannel,
    b: &KrausChannel,
    cfg: &OptimizerConfig,
) -> Result<f64> {
    check_same_dims(a, b, "induced_trace_norm")?;
    let d = a.dim_in();
    let f = |p: &[f64]| {
        let psi = unit_vector(&p[..2 * d]);
        let phi = unit_vector(&p[2 * d..]);
        let x = ComplexMatrix::outer(&psi, &phi);
        let diff = &a.apply_operator(&x).expect("dimension checked")
            - &b.apply_operator(&x).expect("dimension checked");
        trace_norm(&diff)
    };
    let basis = |i: usize| -> Vec<f64> {
        let mut v = vec![0.0; 2 * d];
        v[2 * i] = 1.0;
        v
    };
    let plus: Vec<f64> = (0..d).flat_map(|_| [1.0, 0.0]).collect();
    let mut seeds = Vec::new();
    for i in 0..d {
        for j in 0..d {
            seeds.push(([basis(i), basis(j)].concat(), 0.3));
        }
        seeds.push(([basis(i), plus.clone()].concat(), 0.3));
        seeds.push(([plus.clone(), basis(i)].concat(), 0.3));
    }
    seeds.push(([plus.clone(), plus].concat(), 0.3));
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.starts.saturating_sub(seeds.len()).max(4) {
        let p: Vec<f64> = (0..4 * d).map(|_| rng.random_range(-1.0..1.0)).collect();
        seeds.push((p, 0.3));
    }
    Ok(multistart_maximize(&f, &seeds, cfg)?.value)
}

/// `(I ⊗ Φ)(|u><u|)` for the purification `|u> = Σ_i √ρ|i> ⊗ |i>` of the
/// reference state `ρ`, where `Φ` has Choi matrix `delta`.
pub fn apply_to_purification(
    delta: &ComplexMatrix,
    dim_out: usize,
    rho: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    let sqrt = hermitian_eig(rho)?.map(|x| x.max(0.0).sqrt());
    let s = kron(&sqrt, &identity(dim_out));
    Ok(s.matmul(delta).matmul(&s.adjoint()))
}

//! Two-channel discrimination game: optimal success probability and a
//! Monte-Carlo replay of the optimal strategy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::KrausChannel;
use crate::distance::{apply_to_purification, diamond_distance};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, trace_norm, ComplexMatrix, C64};
use crate::optimize::{multistart_maximize, unit_vector, OptimizerConfig};
use crate::state::DensityMatrix;

/// Trials per independently seeded batch.
const BATCH: u64 = 8192;
/// Allowed disagreement between the extracted input's trace distance and the
/// diamond norm before falling back to a direct search.
const EXTRACTION_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct GameSpec {
    pub n1: KrausChannel,
    pub n2: KrausChannel,
    /// Probability λ that the referee picks `n1`.
    pub prior: f64,
    pub trials: u64,
    pub seed: u64,
    /// Send half of an entangled state and keep a reference of dimension `dim_in`.
    pub use_reference: bool,
}

impl GameSpec {
    /// Equal priors, with reference.
    pub fn new(n1: KrausChannel, n2: KrausChannel, trials: u64, seed: u64) -> Result<Self> {
        let spec = GameSpec {
            n1,
            n2,
            prior: 0.5,
            trials,
            seed,
            use_reference: true,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n1.dim_in() != self.n2.dim_in() || self.n1.dim_out() != self.n2.dim_out() {
            return Err(Error::dims("GameSpec", "channels must share dimensions"));
        }
        check_prior(self.prior)?;
        if self.trials == 0 {
            return Err(Error::OutOfRange {
                name: "trials",
                value: 0.0,
                range: ">= 1",
            });
        }
        Ok(())
    }
}

fn check_prior(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::OutOfRange {
            name: "lambda",
            value: lambda,
            range: "(0, 1)",
        });
    }
    Ok(())
}

fn check_dims(a: &DensityMatrix, b: &DensityMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::dims(
            "helstrom",
            format!("dimensions {} and {}", a.dim(), b.dim()),
        ));
    }
    Ok(())
}

/// Best probability of telling `rho1` (prior λ) from `rho2` (prior 1 - λ):
/// `½ + ½‖λρ₁ - (1-λ)ρ₂‖₁`.
pub fn helstrom(rho1: &DensityMatrix, rho2: &DensityMatrix, lambda: f64) -> Result<f64> {
    check_prior(lambda)?;
    check_dims(rho1, rho2)?;
    let gamma = &rho1.matrix().scale_real(lambda) - &rho2.matrix().scale_real(1.0 - lambda);
    Ok(0.5 + 0.5 * trace_norm(&gamma))
}

/// Projector onto the positive part of `λρ₁ - (1-λ)ρ₂`; observing it means
/// "guess channel 1".
pub fn helstrom_projector(
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    lambda: f64,
) -> Result<ComplexMatrix> {
    check_prior(lambda)?;
    check_dims(rho1, rho2)?;
    let gamma = &rho1.matrix().scale_real(lambda) - &rho2.matrix().scale_real(1.0 - lambda);
    Ok(hermitian_eig(&gamma)?.map(|x| if x > 0.0 { 1.0 } else { 0.0 }))
}

/// `½ + ¼‖N₁ - N₂‖_⋄`, the optimal equal-prior success probability.
pub fn optimal_success(n1: &KrausChannel, n2: &KrausChannel) -> Result<f64> {
    Ok(0.5 + 0.25 * diamond_distance(n1, n2)?.value)
}

/// The state sent, the two possible received states and the measurement.
#[derive(Clone, Debug)]
pub struct Strategy {
    pub input: DensityMatrix,
    pub output1: DensityMatrix,
    pub output2: DensityMatrix,
    pub projector: ComplexMatrix,
    /// Exact success probability of this strategy.
    pub success: f64,
    /// True if the input came from the direct search rather than the SDP dual.
    pub searched: bool,
}

fn purification(rho: &ComplexMatrix) -> Result<DensityMatrix> {
    let d = rho.rows();
    let sqrt = hermitian_eig(rho)?.map(|x| x.max(0.0).sqrt());
    let mut psi = vec![C64::new(0.0, 0.0); d * d];
    for i in 0..d {
        for r in 0..d {
            psi[r * d + i] = sqrt[(r, i)];
        }
    }
    DensityMatrix::pure(&psi)
}

fn with_reference(ch: &KrausChannel) -> KrausChannel {
    KrausChannel::tensor(&KrausChannel::identity(ch.dim_in()), ch)
}

/// Pure input maximising `‖(A - B)(ψ)‖₁`.
fn search_input(a: &KrausChannel, b: &KrausChannel, seed: u64) -> Result<DensityMatrix> {
    let d = a.dim_in();
    let f = |p: &[f64]| {
        let psi = unit_vector(p);
        let x = ComplexMatrix::outer(&psi, &psi);
        trace_norm(&(&a.apply_operator(&x).expect("dims") - &b.apply_operator(&x).expect("dims")))
    };
    let cfg = OptimizerConfig {
        seed,
        ..OptimizerConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seeds: Vec<(Vec<f64>, f64)> = (0..d)
        .map(|i| {
            let mut v = vec![0.0; 2 * d];
            v[2 * i] = 1.0;
            (v, 0.3)
        })
        .collect();
    for _ in 0..cfg.starts {
        seeds.push((
            (0..2 * d).map(|_| rng.random_range(-1.0..1.0)).collect(),
            0.3,
        ));
    }
    let opt = multistart_maximize(&f, &seeds, &cfg)?;
    DensityMatrix::pure(&unit_vector(&opt.params))
}

fn finish(
    spec: &GameSpec,
    a: &KrausChannel,
    b: &KrausChannel,
    input: DensityMatrix,
    searched: bool,
) -> Result<Strategy> {
    let output1 = a.apply(&input)?;
    let output2 = b.apply(&input)?;
    let projector = helstrom_projector(&output1, &output2, spec.prior)?;
    let success = helstrom(&output1, &output2, spec.prior)?;
    Ok(Strategy {
        input,
        output1,
        output2,
        projector,
        success,
        searched,
    })
}

/// Optimal input and measurement. With a reference the input is the
/// purification of the diamond-norm dual state, checked against the norm
/// itself; without one it is found by direct search over pure inputs.
pub fn optimal_strategy(spec: &GameSpec) -> Result<Strategy> {
    spec.validate()?;
    if !spec.use_reference {
        let input = search_input(&spec.n1, &spec.n2, spec.seed)?;
        return finish(spec, &spec.n1, &spec.n2, input, true);
    }
    let a = with_reference(&spec.n1);
    let b = with_reference(&spec.n2);
    let dout = spec.n1.dim_out();
    let delta = spec.n1.to_choi().matrix() - spec.n2.to_choi().matrix();
    let norm = diamond_distance(&spec.n1, &spec.n2)?;
    for rho in [norm.input_reduced.clone(), norm.input_reduced.transpose()] {
        let out = apply_to_purification(&delta, dout, &rho)?;
        if (trace_norm(&out) - norm.value).abs() <= EXTRACTION_TOL {
            return finish(spec, &a, &b, purification(&rho)?, false);
        }
    }
    let input = search_input(&a, &b, spec.seed)?;
    finish(spec, &a, &b, input, true)
}

#[derive(Clone, Debug, Serialize)]
pub struct SimulationResult {
    pub empirical_rate: f64,
    /// Binomial standard error `√(p̂(1 - p̂)/n)`.
    pub std_error: f64,
    pub trials: u64,
    /// Exact success probability of the strategy that was played.
    pub strategy_success: f64,
}

/// Plays `spec.trials` rounds of the game with the optimal strategy,
/// sampling outcomes from their Born probabilities.
pub fn simulate(spec: &GameSpec) -> Result<SimulationResult> {
    let strategy = optimal_strategy(spec)?;
    let born = |rho: &DensityMatrix| {
        strategy
            .projector
            .matmul(rho.matrix())
            .trace()
            .re
            .clamp(0.0, 1.0)
    };
    let q1 = born(&strategy.output1);
    let q2 = born(&strategy.output2);
    let batches = spec.trials.div_ceil(BATCH);
    let successes: u64 = (0..batches)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(k);
            let n = BATCH.min(spec.trials - k * BATCH);
            (0..n)
                .filter(|_| {
                    if rng.random_bool(spec.prior) {
                        rng.random_bool(q1)
                    } else {
                        !rng.random_bool(q2)
                    }
                })
                .count() as u64
        })
        .sum();
    let n = spec.trials as f64;
    let p = successes as f64 / n;
    Ok(SimulationResult {
        empirical_rate: p,
        std_error: (p * (1.0 - p) / n).sqrt(),
        trials: spec.trials,
        strategy_success: strategy.success,
    })
}

/// Output state of `(I ⊗ N)` on `|u><u|` for reference-first inputs; exposed
/// for cross-checks.
pub fn reference_output(ch: &KrausChannel, input: &DensityMatrix) -> Result<DensityMatrix> {
    with_reference(ch).apply(input)
}

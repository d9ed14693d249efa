//! Multistart maximisation of functionals over the state space.

mod nelder_mead;
mod params;

pub use nelder_mead::{NelderMead, NmResult};
pub use params::{unit_vector, StateParametrization};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::DensityMatrix;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Total number of local searches (seeded + random).
    pub starts: usize,
    /// Points per axis of the coarse Bloch-ball grid used to seed qubit searches.
    pub grid_points: usize,
    pub max_iters: usize,
    pub f_tol: f64,
    pub x_tol: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            starts: 32,
            grid_points: 41,
            max_iters: 2000,
            f_tol: 1e-9,
            x_tol: 1e-8,
            seed: 0x5eed,
        }
    }
}

impl OptimizerConfig {
    /// Smaller budget for inner loops of property tests.
    pub fn quick(seed: u64) -> Self {
        OptimizerConfig {
            starts: 12,
            grid_points: 15,
            seed,
            ..Default::default()
        }
    }

    fn nelder_mead(&self) -> NelderMead {
        NelderMead {
            max_iters: self.max_iters,
            f_tol: self.f_tol,
            x_tol: self.x_tol,
        }
    }
}

/// Best point found by a multistart search.
#[derive(Clone, Debug)]
pub struct Optimum {
    pub value: f64,
    pub params: Vec<f64>,
    pub converged_starts: usize,
    pub starts: usize,
}

/// Maximises `f` from every seed `(x0, step)` and returns the best local
/// optimum. Fails if not a single local search converged.
pub fn multistart_maximize<F>(
    f: &F,
    seeds: &[(Vec<f64>, f64)],
    config: &OptimizerConfig,
) -> Result<Optimum>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let nm = config.nelder_mead();
    let neg = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            -v
        }
    };
    let results: Vec<NmResult> = seeds
        .par_iter()
        .map(|(x0, step)| {
            let first = nm.minimize(neg, x0, *step);
            // A restart from the local optimum catches simplex collapse.
            let polish = nm.minimize(neg, &first.x, (step * 1e-2).max(1e-4));
            if polish.value <= first.value {
                NmResult {
                    iterations: first.iterations + polish.iterations,
                    ..polish
                }
            } else {
                first
            }
        })
        .collect();

    let converged_starts = results.iter().filter(|r| r.converged).count();
    if converged_starts == 0 {
        return Err(Error::NoConvergence {
            starts: seeds.len(),
        });
    }
    let best = results
        .iter()
        .filter(|r| r.value.is_finite())
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .ok_or(Error::NoConvergence {
            starts: seeds.len(),
        })?;
    Ok(Optimum {
        value: -best.value,
        params: best.x.clone(),
        converged_starts,
        starts: seeds.len(),
    })
}

/// Maximiser over density matrices.
#[derive(Clone, Debug)]
pub struct StateOptimum {
    pub value: f64,
    pub state: DensityMatrix,
    pub params: Vec<f64>,
    pub converged_starts: usize,
    pub starts: usize,
}

/// Maximises `f` over all `dim`-dimensional density matrices.
///
/// Qubit searches are seeded from the best points of a Bloch-ball grid,
/// qudit searches from basis states and two-level superpositions. Both
/// are topped up with random starts drawn from `config.seed`.
pub fn maximize_over_states<F>(dim: usize, f: &F, config: &OptimizerConfig) -> Result<StateOptimum>
where
    F: Fn(&DensityMatrix) -> f64 + Sync,
{
    let param = StateParametrization::for_dim(dim);
    let g = |p: &[f64]| f(&param.to_state(p));
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut seeds: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut sampled_best: Option<(f64, Vec<f64>)> = None;
    let mut consider = |v: f64, p: &[f64]| {
        if v.is_finite() && sampled_best.as_ref().is_none_or(|(b, _)| v > *b) {
            sampled_best = Some((v, p.to_vec()));
        }
    };

    if param == StateParametrization::Bloch && config.grid_points >= 2 {
        let spacing = 2.0 / (config.grid_points - 1) as f64;
        let grid = bloch_grid(config.grid_points);
        let mut scored: Vec<(f64, [f64; 3])> = grid.par_iter().map(|p| (g(p), *p)).collect();
        scored.retain(|(v, _)| v.is_finite());
        scored.sort_by(|a, b| b.0.total_cmp(&a.0));
        if let Some((v, p)) = scored.first() {
            consider(*v, p);
        }
        let want = config.starts.div_ceil(2);
        let mut picked: Vec<[f64; 3]> = Vec::new();
        for (_, p) in &scored {
            if picked.len() >= want {
                break;
            }
            if picked.iter().all(|q| dist3(p, q) > 2.5 * spacing) {
                picked.push(*p);
            }
        }
        seeds.extend(picked.into_iter().map(|p| (p.to_vec(), spacing)));
    }

    for s in param.special_states() {
        let p = param.params_for(&s);
        consider(g(&p), &p);
        seeds.push((p, 0.2));
    }
    let random_starts = config
        .starts
        .saturating_sub(seeds.len())
        .max(config.starts / 4);
    for _ in 0..random_starts {
        seeds.push((param.random_params(&mut rng), 0.3));
    }

    let opt = multistart_maximize(&g, &seeds, config)?;
    let (value, params) = match sampled_best {
        Some((v, p)) if v > opt.value => (v, p),
        _ => (opt.value, opt.params),
    };
    let (value, params) = match param {
        StateParametrization::Bloch => {
            let start = params::project_to_ball(&params);
            let (v, p) = refine_near_surface(
                &|r: [f64; 3]| f(&DensityMatrix::from_bloch_unchecked(r)),
                start,
                config,
            );
            if v > value {
                (v, p.to_vec())
            } else {
                (value, start.to_vec())
            }
        }
        StateParametrization::Factor { .. } => (value, params),
    };
    Ok(StateOptimum {
        value,
        state: param.to_state(&params),
        params,
        converged_starts: opt.converged_starts,
        starts: opt.starts,
    })
}

/// Local search around the Bloch vector `start` in the chart
/// `(a, b, s) ↦ tanh(s) · normalise(n + a e1 + b e2)`, where `n, e1, e2` is
/// an orthonormal frame with `n ∥ start`. The radius is on a logarithmic
/// scale near the surface, where entropic objectives have unbounded slope.
fn refine_near_surface<F>(f: &F, start: [f64; 3], config: &OptimizerConfig) -> (f64, [f64; 3])
where
    F: Fn([f64; 3]) -> f64,
{
    let r0 = (start[0] * start[0] + start[1] * start[1] + start[2] * start[2]).sqrt();
    let n = if r0 > 1e-12 {
        start.map(|x| x / r0)
    } else {
        [0.0, 0.0, 1.0]
    };
    let helper = if n[0].abs() < 0.9 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    let e1 = normalise3(cross(n, helper));
    let e2 = cross(n, e1);
    let point = |p: &[f64]| {
        let d = normalise3(std::array::from_fn(|i| n[i] + p[0] * e1[i] + p[1] * e2[i]));
        let r = p[2].tanh();
        d.map(|x| r * x)
    };
    let neg = |p: &[f64]| {
        let v = f(point(p));
        if v.is_nan() {
            f64::INFINITY
        } else {
            -v
        }
    };
    let nm = config.nelder_mead();
    // Starting on the surface itself would leave the radius frozen.
    let x0 = [0.0, 0.0, r0.min(1.0 - 1e-3).atanh()];
    let first = nm.minimize(neg, &x0, 0.1);
    let second = nm.minimize(neg, &first.x, 0.01);
    let best = if second.value <= first.value {
        second
    } else {
        first
    };
    (-best.value, point(&best.x))
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn normalise3(v: [f64; 3]) -> [f64; 3] {
    let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    v.map(|x| x / r)
}

/// Points of a regular `n^3` grid on `[-1, 1]^3` inside the unit ball.
pub fn bloch_grid(n: usize) -> Vec<[f64; 3]> {
    let step = 2.0 / (n - 1) as f64;
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let p = [
                    -1.0 + i as f64 * step,
                    -1.0 + j as f64 * step,
                    -1.0 + k as f64 * step,
                ];
                if p.iter().map(|x| x * x).sum::<f64>() <= 1.0 + 1e-12 {
                    out.push(p);
                }
            }
        }
    }
    out
}

fn dist3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

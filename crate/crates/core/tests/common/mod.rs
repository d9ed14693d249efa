#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use rni_coherence::sdp::SdpProblem;

/// A random SDP built around a known strictly complementary primal-dual
/// pair, together with its optimal value.
pub struct Planted {
    pub problem: SdpProblem,
    pub value: f64,
    pub x: Vec<DMatrix<f64>>,
}

fn random_symmetric(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let g = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    (&g + g.transpose()) * 0.5
}

fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let g = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    g.qr().q()
}

/// Blocks of the given sizes and `m` equality constraints. Each block gets
/// `X = Q diag(x) Qᵀ`, `S = Q diag(s) Qᵀ` with complementary supports;
/// `b = A(X)` and `C = A*(y) + S` make `(X, y, S)` optimal.
pub fn planted(blocks: &[usize], m: usize, rng: &mut ChaCha8Rng) -> Planted {
    let mut x = Vec::new();
    let mut s = Vec::new();
    for &n in blocks {
        let q = random_orthogonal(n, rng);
        let rank = rng.random_range(1..=n);
        let mut dx = DMatrix::<f64>::zeros(n, n);
        let mut ds = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            if i < rank {
                dx[(i, i)] = rng.random_range(0.5..2.0);
            } else {
                ds[(i, i)] = rng.random_range(0.5..2.0);
            }
        }
        x.push(&q * dx * q.transpose());
        s.push(&q * ds * q.transpose());
    }
    let y: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
    let mut c: Vec<DMatrix<f64>> = s.clone();
    let mut problem = SdpProblem::new(blocks.to_vec()).expect("small blocks");
    for &yk in &y {
        let terms: Vec<(usize, DMatrix<f64>)> = blocks
            .iter()
            .enumerate()
            .map(|(b, &n)| (b, random_symmetric(n, rng)))
            .collect();
        let rhs: f64 = terms.iter().map(|(b, a)| a.dot(&x[*b])).sum();
        for (b, a) in &terms {
            c[*b] += a * yk;
        }
        problem.add_constraint(terms, rhs).expect("well formed");
    }
    let value = c.iter().zip(&x).map(|(ci, xi)| ci.dot(xi)).sum();
    for (b, cb) in c.into_iter().enumerate() {
        problem.set_objective(b, cb).expect("well formed");
    }
    Planted { problem, value, x }
}

use rni_coherence::channel::{KrausChannel, MioVariant};
use rni_coherence::coherence::StaticMeasure;
use rni_coherence::distance::{t_a_non, t_diamond_mio};
use rni_coherence::optimize::OptimizerConfig;
use rni_coherence::random::{random_channel, random_free_fixture, random_mio};
use rni_coherence::rni::t_tilde;

/// A dynamical coherence measure under test.
#[derive(Clone, Copy, Debug)]
pub enum Dynamical {
    Violation {
        measure: StaticMeasure,
        selective: bool,
    },
    Diamond,
    DephasingAssisted,
}

impl Dynamical {
    pub fn all() -> Vec<Dynamical> {
        let mut v = Vec::new();
        for measure in [
            StaticMeasure::L1,
            StaticMeasure::RelativeEntropy,
            StaticMeasure::L2Total,
        ] {
            for selective in [false, true] {
                v.push(Dynamical::Violation { measure, selective });
            }
        }
        v.push(Dynamical::Diamond);
        v.push(Dynamical::DephasingAssisted);
        v
    }

    pub fn name(&self) -> String {
        match self {
            Dynamical::Violation { measure, selective } => {
                format!(
                    "t_tilde[{measure}, {}]",
                    if *selective { "post" } else { "nonpost" }
                )
            }
            Dynamical::Diamond => "t_diamond_mio[strict]".into(),
            Dynamical::DephasingAssisted => "t_a_non[strict]".into(),
        }
    }

    pub fn eval(&self, ch: &KrausChannel, cfg: &OptimizerConfig) -> f64 {
        match self {
            Dynamical::Violation { measure, selective } => {
                t_tilde(ch, *measure, cfg, *selective).unwrap()
            }
            Dynamical::Diamond => t_diamond_mio(ch, MioVariant::Strict).unwrap().value,
            Dynamical::DephasingAssisted => t_a_non(ch, MioVariant::Strict).unwrap().value,
        }
    }

    /// A free channel of the theory the measure belongs to. Total coherence
    /// is only monotone under mixed-unitary maps, so its dephasing is given
    /// by the Kraus pair `{I, Z}/√2` rather than by projectors.
    pub fn free_channel(&self, rng: &mut ChaCha8Rng) -> KrausChannel {
        match self {
            Dynamical::Violation {
                measure: StaticMeasure::L2Total,
                ..
            } => {
                if rng.random_bool(0.5) {
                    KrausChannel::dephasing_mixed_unitary()
                } else {
                    KrausChannel::pauli_x()
                }
            }
            Dynamical::Violation { .. } => random_free_fixture(2, rng),
            Dynamical::Diamond | Dynamical::DephasingAssisted => random_mio(2, rng),
        }
    }
}

/// Largest violation of the three axioms on one random instance:
/// post-composition, pre-composition and convexity.
pub struct AxiomExcess {
    pub post: f64,
    pub pre: f64,
    pub convex: f64,
}

impl AxiomExcess {
    pub fn max(&self) -> f64 {
        self.post.max(self.pre).max(self.convex)
    }
}

pub fn random_qubit_channel(rng: &mut ChaCha8Rng) -> KrausChannel {
    let k = rng.random_range(1..=4);
    random_channel(2, 2, k, rng)
}

pub fn axiom_excess(d: &Dynamical, rng: &mut ChaCha8Rng, cfg: &OptimizerConfig) -> AxiomExcess {
    let n = random_qubit_channel(rng);
    let m = random_qubit_channel(rng);
    let theta = d.free_channel(rng);
    let t = [0.25, 0.5, 0.75][rng.random_range(0..3)];
    let vn = d.eval(&n, cfg);
    let vm = d.eval(&m, cfg);
    let post = d.eval(&KrausChannel::compose(&theta, &n).unwrap(), cfg) - vn;
    let pre = d.eval(&KrausChannel::compose(&n, &theta).unwrap(), cfg) - vn;
    let mix = KrausChannel::mixture(&[(t, &n), (1.0 - t, &m)]).unwrap();
    let convex = d.eval(&mix, cfg) - (t * vn + (1.0 - t) * vm);
    AxiomExcess { post, pre, convex }
}

//! Derivative-free simplex search (Nelder-Mead with dimension-adaptive
//! coefficients).

#[derive(Clone, Copy, Debug)]
pub struct NelderMead {
    pub max_iters: usize,
    /// Stop once the spread of objective values over the simplex is below this.
    pub f_tol: f64,
    /// ... and every vertex is within this distance of the best one.
    pub x_tol: f64,
}

#[derive(Clone, Debug)]
pub struct NmResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl NelderMead {
    /// Minimises `f` from `x0` with an axis-aligned initial simplex of edge `step`.
    pub fn minimize(&self, f: impl Fn(&[f64]) -> f64, x0: &[f64], step: f64) -> NmResult {
        let n = x0.len();
        let nf = n as f64;
        let (alpha, beta) = (1.0, 1.0 + 2.0 / nf);
        let gamma = 0.75 - 1.0 / (2.0 * nf);
        let delta = 1.0 - 1.0 / nf.max(2.0);

        let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        simplex.push(x0.to_vec());
        for i in 0..n {
            let mut v = x0.to_vec();
            v[i] += step;
            simplex.push(v);
        }
        let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();

        let mut iterations = 0;
        let mut converged = false;
        while iterations < self.max_iters {
            let mut order: Vec<usize> = (0..=n).collect();
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            simplex = order.iter().map(|&i| simplex[i].clone()).collect();
            values = order.iter().map(|&i| values[i]).collect();

            let spread = values[n] - values[0];
            let diameter = simplex[1..]
                .iter()
                .map(|v| dist(v, &simplex[0]))
                .fold(0.0, f64::max);
            if spread <= self.f_tol && diameter <= self.x_tol {
                converged = true;
                break;
            }
            iterations += 1;

            let centroid: Vec<f64> = (0..n)
                .map(|k| simplex[..n].iter().map(|v| v[k]).sum::<f64>() / nf)
                .collect();
            let toward = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&simplex[n])
                    .map(|(c, w)| c + t * (c - w))
                    .collect()
            };

            let xr = toward(alpha);
            let fr = f(&xr);
            if fr < values[0] {
                let xe = toward(alpha * beta);
                let fe = f(&xe);
                if fe < fr {
                    simplex[n] = xe;
                    values[n] = fe;
                } else {
                    simplex[n] = xr;
                    values[n] = fr;
                }
                continue;
            }
            if fr < values[n - 1] {
                simplex[n] = xr;
                values[n] = fr;
                continue;
            }
            let (xc, fc) = if fr < values[n] {
                let xc = toward(alpha * gamma);
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc = toward(-gamma);
                let fc = f(&xc);
                (xc, fc)
            };
            if fc < values[n].min(fr) {
                simplex[n] = xc;
                values[n] = fc;
                continue;
            }
            let best = simplex[0].clone();
            for i in 1..=n {
                for (x, b) in simplex[i].iter_mut().zip(&best) {
                    *x = b + delta * (*x - b);
                }
                values[i] = f(&simplex[i]);
            }
        }

        let best = (0..=n)
            .min_by(|&a, &b| values[a].total_cmp(&values[b]))
            .expect("nonempty simplex");
        NmResult {
            x: simplex[best].clone(),
            value: values[best],
            iterations,
            converged,
        }
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

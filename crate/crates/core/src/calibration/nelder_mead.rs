//! Nelder-Mead simplex search on an unconstrained space.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    /// Budget of objective evaluations.
    pub max_evaluations: usize,
    /// Stop once every vertex is within `rel_tol * max(1, |x_best|)` of
    /// the best vertex in each coordinate.
    pub rel_tol: f64,
    /// Edge length of the initial simplex.
    pub initial_step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexOutcome {
    pub x: Vec<f64>,
    pub fx: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    /// Best objective after each iteration, starting with the initial simplex.
    pub history: Vec<f64>,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

struct Counter<F> {
    f: F,
    evaluations: usize,
}

impl<F: FnMut(&[f64]) -> f64> Counter<F> {
    fn call(&mut self, x: &[f64]) -> f64 {
        self.evaluations += 1;
        let v = (self.f)(x);
        // NaN would break the ordering
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }
}

fn diameter(simplex: &[Vec<f64>]) -> f64 {
    let best = &simplex[0];
    let scale = best.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    simplex[1..].iter().flat_map(|v| v.iter().zip(best).map(|(a, b)| (a - b).abs())).fold(0.0, f64::max) / scale
}

fn sort(simplex: &mut [Vec<f64>], values: &mut [f64]) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    // stable: ties keep their earlier position
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let s: Vec<_> = order.iter().map(|&i| simplex[i].clone()).collect();
    let v: Vec<_> = order.iter().map(|&i| values[i]).collect();
    simplex.clone_from_slice(&s);
    values.copy_from_slice(&v);
}

fn affine(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
}

/// Minimize `f` starting from `x0`. With an empty `x0` the objective is
/// evaluated once and no iterations run.
pub fn minimize<F: FnMut(&[f64]) -> f64>(f: F, x0: &[f64], opts: &SimplexOptions) -> SimplexOutcome {
    let n = x0.len();
    let mut counter = Counter { f, evaluations: 0 };
    let f0 = counter.call(x0);
    if n == 0 {
        return SimplexOutcome {
            x: Vec::new(),
            fx: f0,
            iterations: 0,
            evaluations: 1,
            converged: true,
            history: vec![f0],
        };
    }

    let mut simplex = vec![x0.to_vec()];
    let mut values = vec![f0];
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += opts.initial_step;
        values.push(counter.call(&v));
        simplex.push(v);
    }
    sort(&mut simplex, &mut values);
    let mut history = vec![values[0]];
    let mut iterations = 0;
    let mut converged = false;

    while counter.evaluations < opts.max_evaluations {
        if diameter(&simplex) < opts.rel_tol {
            converged = true;
            break;
        }
        iterations += 1;
        let centroid: Vec<f64> = (0..n).map(|j| simplex[..n].iter().map(|v| v[j]).sum::<f64>() / n as f64).collect();
        let worst = simplex[n].clone();
        let xr = affine(&centroid, &worst, -REFLECT);
        let fr = counter.call(&xr);

        if fr < values[0] {
            let xe = affine(&centroid, &worst, -EXPAND);
            let fe = counter.call(&xe);
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
        } else {
            // contract toward the better of the reflected and worst points
            let (xc, fc) = if fr < values[n] {
                let xc = affine(&centroid, &xr, CONTRACT);
                let fc = counter.call(&xc);
                (xc, fc)
            } else {
                let xc = affine(&centroid, &worst, CONTRACT);
                let fc = counter.call(&xc);
                (xc, fc)
            };
            if fc < values[n].min(fr) {
                simplex[n] = xc;
                values[n] = fc;
            } else {
                for i in 1..=n {
                    simplex[i] = affine(&simplex[0], &simplex[i], SHRINK);
                    values[i] = counter.call(&simplex[i]);
                }
            }
        }
        sort(&mut simplex, &mut values);
        history.push(values[0]);
    }

    SimplexOutcome {
        x: simplex.swap_remove(0),
        fx: values[0],
        iterations,
        evaluations: counter.evaluations,
        converged,
        history,
    }
}

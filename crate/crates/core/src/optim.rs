//! Derivative-free Nelder–Mead simplex minimisation.

use std::cell::Cell;

/// Outcome of a simplex search.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    /// The simplex collapsed below the diameter tolerance.
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct NelderMead {
    /// Stop once every vertex lies within this distance of the best one.
    pub diameter_tol: f64,
    pub max_evaluations: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self { diameter_tol: 1e-8, max_evaluations: 5000 }
    }
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

impl NelderMead {
    /// Minimises `f` from `start`, building the initial simplex by
    /// offsetting one coordinate at a time by `steps[i]`.
    ///
    /// `f` may return `+inf` (or NaN, treated as `+inf`) to reject a point.
    pub fn minimize<F>(&self, mut f: F, start: &[f64], steps: &[f64]) -> Minimum
    where
        F: FnMut(&[f64]) -> f64,
    {
        let dim = start.len();
        assert_eq!(steps.len(), dim, "one step per coordinate");
        let evaluations = Cell::new(0usize);
        let mut eval = |x: &[f64]| {
            evaluations.set(evaluations.get() + 1);
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };

        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
        simplex.push((start.to_vec(), eval(start)));
        for i in 0..dim {
            let mut v = start.to_vec();
            v[i] += steps[i];
            let fv = eval(&v);
            simplex.push((v, fv));
        }

        let mut converged = false;
        let mut centroid = vec![0.0; dim];
        let mut trial = vec![0.0; dim];
        let mut trial2 = vec![0.0; dim];
        loop {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            if diameter(&simplex) < self.diameter_tol {
                converged = true;
                break;
            }
            if evaluations.get() >= self.max_evaluations {
                break;
            }

            centroid.iter_mut().for_each(|c| *c = 0.0);
            for (v, _) in &simplex[..dim] {
                for (c, x) in centroid.iter_mut().zip(v) {
                    *c += x / dim as f64;
                }
            }
            let (worst, f_worst) = simplex[dim].clone();
            let f_best = simplex[0].1;
            let f_second_worst = simplex[dim - 1].1;

            affine(&centroid, &worst, -REFLECT, &mut trial);
            let f_reflect = eval(&trial);

            if f_reflect < f_best {
                affine(&centroid, &worst, -EXPAND, &mut trial2);
                let f_expand = eval(&trial2);
                simplex[dim] =
                    if f_expand < f_reflect { (trial2.clone(), f_expand) } else { (trial.clone(), f_reflect) };
                continue;
            }
            if f_reflect < f_second_worst {
                simplex[dim] = (trial.clone(), f_reflect);
                continue;
            }
            // Contract towards the better of the worst and reflected points.
            let (toward, f_toward) = if f_reflect < f_worst { (trial.clone(), f_reflect) } else { (worst, f_worst) };
            affine(&centroid, &toward, CONTRACT, &mut trial2);
            let f_contract = eval(&trial2);
            if f_contract < f_toward {
                simplex[dim] = (trial2.clone(), f_contract);
                continue;
            }
            let best = simplex[0].0.clone();
            for (v, fv) in simplex.iter_mut().skip(1) {
                for (x, b) in v.iter_mut().zip(&best) {
                    *x = b + SHRINK * (*x - b);
                }
                *fv = eval(v);
            }
        }

        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (x, value) = simplex.swap_remove(0);
        Minimum { x, value, evaluations: evaluations.get(), converged }
    }
}

/// `out = c + t (p - c)`.
fn affine(c: &[f64], p: &[f64], t: f64, out: &mut [f64]) {
    for ((o, ci), pi) in out.iter_mut().zip(c).zip(p) {
        *o = ci + t * (pi - ci);
    }
}

fn diameter(simplex: &[(Vec<f64>, f64)]) -> f64 {
    let best = &simplex[0].0;
    simplex[1..]
        .iter()
        .map(|(v, _)| v.iter().zip(best).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let nm = NelderMead { diameter_tol: 1e-10, max_evaluations: 20_000 };
        let m = nm.minimize(|x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2), &[-1.2, 1.0], &[0.1, 0.1]);
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-6 && (m.x[1] - 1.0).abs() < 1e-6, "{:?}", m.x);
    }

    #[test]
    fn respects_infinite_barrier() {
        let nm = NelderMead::default();
        let m = nm.minimize(
            |x| if x[0] < 0.5 { f64::INFINITY } else { (x[0] - 0.2).powi(2) + x[1] * x[1] },
            &[2.0, 1.0],
            &[0.5, 0.5],
        );
        assert!(m.x[0] >= 0.5);
        assert!((m.x[0] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn evaluation_budget_reported_as_not_converged() {
        let nm = NelderMead { diameter_tol: 0.0, max_evaluations: 50 };
        let m = nm.minimize(|x| x[0] * x[0] + x[1] * x[1], &[3.0, 3.0], &[1.0, 1.0]);
        assert!(!m.converged);
        assert!(m.evaluations >= 50);
    }
}

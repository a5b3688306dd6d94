//! Derivative-free minimization by the Nelder-Mead simplex method.

use std::cell::Cell;

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadOptions {
    /// Budget on objective evaluations, restarts included.
    pub max_evals: usize,
    /// Converged when the simplex spread in `f` is below
    /// `f_rel_tol * |f_best| + f_abs_tol` ...
    pub f_rel_tol: f64,
    pub f_abs_tol: f64,
    /// ... and every vertex is within `x_tol` of the best one.
    pub x_tol: f64,
    /// Edge length of the initial simplex.
    pub initial_step: f64,
    /// Fresh simplices built around the best point after convergence.
    pub restarts: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_evals: 2000,
            f_rel_tol: 1e-9,
            f_abs_tol: 1e-14,
            x_tol: 1e-7,
            initial_step: 0.5,
            restarts: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Minimizes `f` from `x0`. Non-finite objective values count as `+inf`.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], opts: &NelderMeadOptions) -> Minimum {
    let dim = x0.len();
    let evals = Cell::new(0usize);
    let mut eval = |x: &[f64]| {
        evals.set(evals.get() + 1);
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let mut best = x0.to_vec();
    let mut best_f = eval(&best);
    if dim == 0 {
        return Minimum {
            x: best,
            f: best_f,
            evaluations: evals.get(),
            converged: true,
        };
    }

    let mut converged = false;
    let mut step = opts.initial_step;
    for round in 0..=opts.restarts {
        let (x, fx, ok) = simplex_run(&mut eval, &best, best_f, step, opts, &|| evals.get());
        let improved = fx < best_f;
        if fx <= best_f {
            best = x;
            best_f = fx;
        }
        converged = ok;
        if !ok || evals.get() >= opts.max_evals || (round > 0 && !improved) {
            break;
        }
        step = (step * 0.1).max(opts.x_tol * 100.0);
    }
    Minimum {
        x: best,
        f: best_f,
        evaluations: evals.get(),
        converged,
    }
}

fn simplex_run<E: FnMut(&[f64]) -> f64, C: Fn() -> usize>(
    eval: &mut E,
    start: &[f64],
    start_f: f64,
    step: f64,
    opts: &NelderMeadOptions,
    count: &C,
) -> (Vec<f64>, f64, bool) {
    const ALPHA: f64 = 1.0;
    const GAMMA: f64 = 2.0;
    const RHO: f64 = 0.5;
    const SIGMA: f64 = 0.5;

    let dim = start.len();
    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    let mut vals: Vec<f64> = Vec::with_capacity(dim + 1);
    pts.push(start.to_vec());
    vals.push(start_f);
    for i in 0..dim {
        let mut p = start.to_vec();
        p[i] += step;
        vals.push(eval(&p));
        pts.push(p);
    }

    loop {
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(a.cmp(&b)));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();

        let f_spread = vals[dim] - vals[0];
        let x_spread = pts[1..]
            .iter()
            .flat_map(|p| p.iter().zip(&pts[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if vals[0].is_finite()
            && f_spread <= opts.f_rel_tol * vals[0].abs() + opts.f_abs_tol
            && x_spread <= opts.x_tol
        {
            return (pts[0].clone(), vals[0], true);
        }
        if count() >= opts.max_evals {
            return (pts[0].clone(), vals[0], false);
        }

        let mut centroid = vec![0.0; dim];
        for p in &pts[..dim] {
            for (c, v) in centroid.iter_mut().zip(p) {
                *c += v / dim as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&pts[dim])
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let xr = along(ALPHA);
        let fr = eval(&xr);
        if fr < vals[0] {
            let xe = along(GAMMA);
            let fe = eval(&xe);
            if fe < fr {
                pts[dim] = xe;
                vals[dim] = fe;
            } else {
                pts[dim] = xr;
                vals[dim] = fr;
            }
            continue;
        }
        if fr < vals[dim - 1] {
            pts[dim] = xr;
            vals[dim] = fr;
            continue;
        }
        // outside contraction when the reflection helped at all
        let xc = if fr < vals[dim] { along(RHO) } else { along(-RHO) };
        let fc = eval(&xc);
        if fc < vals[dim].min(fr) {
            pts[dim] = xc;
            vals[dim] = fc;
            continue;
        }
        for i in 1..=dim {
            let p: Vec<f64> = pts[0]
                .iter()
                .zip(&pts[i])
                .map(|(b, x)| b + SIGMA * (x - b))
                .collect();
            vals[i] = eval(&p);
            pts[i] = p;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let m = nelder_mead(
            |x| (x[0] - 1.0).powi(2) + 10.0 * (x[1] + 2.0).powi(2),
            &[0.0, 0.0],
            &NelderMeadOptions::default(),
        );
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-6 && (m.x[1] + 2.0).abs() < 1e-6);
        assert!(m.f < 1e-12);
    }

    #[test]
    fn rosenbrock() {
        let m = nelder_mead(
            |x| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2),
            &[-1.2, 1.0],
            &NelderMeadOptions::default(),
        );
        assert!((m.x[0] - 1.0).abs() < 1e-5, "{m:?}");
        assert!((m.x[1] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn budget_is_respected() {
        let opts = NelderMeadOptions {
            max_evals: 30,
            ..Default::default()
        };
        let m = nelder_mead(|x| x.iter().map(|v| (v - 3.0).powi(2)).sum(), &[0.0; 4], &opts);
        assert!(!m.converged);
        assert!(m.evaluations <= 30 + 5);
    }

    #[test]
    fn infeasible_region_is_avoided() {
        let m = nelder_mead(
            |x| if x[0] < 0.5 { f64::NAN } else { (x[0] - 0.7).powi(2) },
            &[1.0],
            &NelderMeadOptions::default(),
        );
        assert!((m.x[0] - 0.7).abs() < 1e-6);
    }

    #[test]
    fn zero_dimensional() {
        let m = nelder_mead(|_| 4.0, &[], &NelderMeadOptions::default());
        assert_eq!(m.f, 4.0);
        assert_eq!(m.evaluations, 1);
    }
}

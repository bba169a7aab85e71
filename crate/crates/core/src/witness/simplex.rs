//! Box-projected Nelder–Mead simplex minimizer with an evaluation budget.

/// Best point and value reached by one run.
#[derive(Clone, Debug)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub evaluations: usize,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

fn project(x: &mut [f64], bounds: &[[f64; 2]]) {
    for (xi, b) in x.iter_mut().zip(bounds) {
        *xi = xi.clamp(b[0], b[1]);
    }
}

/// Minimizes `f` starting from `x0`, never evaluating outside `bounds`.
///
/// Non-finite values count as `+∞`. Stops after `budget` evaluations or once both the
/// spread of simplex values and its diameter fall below `tol`.
pub fn minimize<F>(
    mut f: F,
    x0: &[f64],
    bounds: &[[f64; 2]],
    step: f64,
    budget: usize,
    tol: f64,
) -> SimplexResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    let mut start = x0.to_vec();
    project(&mut start, bounds);
    simplex.push(start.clone());
    for i in 0..n {
        let mut v = start.clone();
        let width = bounds[i][1] - bounds[i][0];
        let h = step * width;
        // step inward if the vertex would leave the box
        v[i] = if v[i] + h <= bounds[i][1] {
            v[i] + h
        } else {
            v[i] - h
        };
        project(&mut v, bounds);
        simplex.push(v);
    }
    let mut fv: Vec<f64> = Vec::with_capacity(n + 1);
    for v in &simplex {
        if evals >= budget {
            break;
        }
        fv.push(eval(v, &mut evals));
    }
    if fv.len() < n + 1 {
        let (i, &f) = fv
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .unwrap_or((0, &f64::INFINITY));
        return SimplexResult {
            x: simplex[i].clone(),
            f,
            evaluations: evals,
        };
    }

    while evals < budget {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| fv[a].total_cmp(&fv[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        fv = order.iter().map(|&i| fv[i]).collect();

        let spread = (fv[n] - fv[0]).abs();
        let diam = simplex[1..]
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if (spread.is_finite() && spread <= tol && diam <= tol.sqrt()) || diam <= 1e-14 {
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|v| v[j]).sum::<f64>() / n as f64)
            .collect();
        let along = |c: f64| {
            let mut x: Vec<f64> = centroid
                .iter()
                .zip(&simplex[n])
                .map(|(m, w)| m + c * (m - w))
                .collect();
            project(&mut x, bounds);
            x
        };

        let xr = along(REFLECT);
        let fr = eval(&xr, &mut evals);
        if fr < fv[0] {
            if evals >= budget {
                simplex[n] = xr;
                fv[n] = fr;
                break;
            }
            let xe = along(EXPAND);
            let fe = eval(&xe, &mut evals);
            if fe < fr {
                simplex[n] = xe;
                fv[n] = fe;
            } else {
                simplex[n] = xr;
                fv[n] = fr;
            }
            continue;
        }
        if fr < fv[n - 1] {
            simplex[n] = xr;
            fv[n] = fr;
            continue;
        }
        if evals >= budget {
            break;
        }
        let (xc, fc) = if fr < fv[n] {
            let x = along(CONTRACT * REFLECT);
            let fx = eval(&x, &mut evals);
            (x, fx)
        } else {
            let x = along(-CONTRACT);
            let fx = eval(&x, &mut evals);
            (x, fx)
        };
        if fc < fv[n].min(fr) {
            simplex[n] = xc;
            fv[n] = fc;
            continue;
        }
        for i in 1..=n {
            if evals >= budget {
                break;
            }
            let mut x: Vec<f64> = simplex[0]
                .iter()
                .zip(&simplex[i])
                .map(|(b, v)| b + SHRINK * (v - b))
                .collect();
            project(&mut x, bounds);
            fv[i] = eval(&x, &mut evals);
            simplex[i] = x;
        }
    }

    let best = (0..fv.len()).min_by(|&a, &b| fv[a].total_cmp(&fv[b])).unwrap();
    SimplexResult {
        x: simplex[best].clone(),
        f: fv[best],
        evaluations: evals,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let r = minimize(f, &[-1.2, 1.0], &[[-5.0, 5.0], [-5.0, 5.0]], 0.05, 5000, 1e-14);
        assert!(
            (r.x[0] - 1.0).abs() < 1e-4 && (r.x[1] - 1.0).abs() < 1e-4,
            "{r:?}"
        );
    }

    #[test]
    fn respects_box_and_budget() {
        let mut calls = Vec::new();
        let r = minimize(
            |x: &[f64]| {
                calls.push(x.to_vec());
                x[0] + x[1]
            },
            &[0.5, 0.5],
            &[[0.0, 1.0], [0.2, 1.0]],
            0.1,
            60,
            1e-12,
        );
        assert!(r.evaluations <= 60);
        assert!(calls
            .iter()
            .all(|x| (0.0..=1.0).contains(&x[0]) && (0.2..=1.0).contains(&x[1])));
        assert!(r.x[0] < 1e-3 && (r.x[1] - 0.2).abs() < 1e-3, "{r:?}");
    }

    #[test]
    fn infinite_values_are_avoided() {
        let f = |x: &[f64]| {
            if x[0] > 0.3 {
                f64::NAN
            } else {
                (x[0] - 0.2).powi(2)
            }
        };
        let r = minimize(f, &[0.0], &[[-1.0, 1.0]], 0.1, 200, 1e-14);
        assert!((r.x[0] - 0.2).abs() < 1e-5);
    }
}

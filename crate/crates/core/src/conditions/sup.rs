//! Supremum over `t ∈ (0, ∞)` of a positive function given in log form.

use crate::Result;

pub const SUP_GRID_MIN: f64 = 1e-6;
pub const SUP_GRID_MAX: f64 = 1e6;
pub const SUP_GRID_NODES: usize = 121;
/// Log-log slope above which monotone growth into a grid edge is read as divergence.
pub const EDGE_SLOPE: f64 = 0.02;
const REFINED_PEAKS: usize = 3;
const GOLDEN_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Supremum {
    /// `ln sup g`, `+inf` when unbounded.
    pub ln_value: f64,
    /// Where the supremum is attained (an edge of the grid when unbounded).
    pub t_star: f64,
}

impl Supremum {
    pub fn value(&self) -> f64 {
        self.ln_value.exp()
    }

    pub fn is_infinite(&self) -> bool {
        self.ln_value == f64::INFINITY
    }
}

/// `sup_t g(t)` where `ln_g` maps `ln t` to `ln g(t)`.
///
/// A coarse scan on a log grid over `[1e-6, 1e6]` is followed by golden-section
/// refinement of the largest local maxima. The supremum is `+∞` if any node is `+∞` or
/// if the last three scanned segments rise monotonically into either edge with
/// log-log slope above [`EDGE_SLOPE`].
pub fn sup_over_t<F>(ln_g: F) -> Result<Supremum>
where
    F: Fn(f64) -> Result<f64>,
{
    let (a, b) = (SUP_GRID_MIN.ln(), SUP_GRID_MAX.ln());
    let n = SUP_GRID_NODES;
    let h = (b - a) / (n - 1) as f64;
    let u: Vec<f64> = (0..n).map(|i| a + h * i as f64).collect();
    let mut y = Vec::with_capacity(n);
    for &ui in &u {
        let v = ln_g(ui)?;
        if v.is_nan() {
            return Err(crate::Error::Quadrature(format!(
                "supremand is NaN at t = {:e}",
                ui.exp()
            )));
        }
        if v == f64::INFINITY {
            return Ok(Supremum {
                ln_value: f64::INFINITY,
                t_star: ui.exp(),
            });
        }
        y.push(v);
    }

    let rising_right = (n - 4..n - 1).all(|i| y[i + 1] > y[i]) && (y[n - 1] - y[n - 2]) / h > EDGE_SLOPE;
    if rising_right {
        return Ok(Supremum {
            ln_value: f64::INFINITY,
            t_star: SUP_GRID_MAX,
        });
    }
    let rising_left = (0..3).all(|i| y[i] > y[i + 1]) && (y[0] - y[1]) / h > EDGE_SLOPE;
    if rising_left {
        return Ok(Supremum {
            ln_value: f64::INFINITY,
            t_star: SUP_GRID_MIN,
        });
    }

    // Candidate peaks: interior local maxima, largest first.
    let mut peaks: Vec<usize> = (1..n - 1)
        .filter(|&i| y[i] >= y[i - 1] && y[i] >= y[i + 1] && y[i] > f64::NEG_INFINITY)
        .collect();
    peaks.sort_by(|&i, &j| y[j].total_cmp(&y[i]).then(i.cmp(&j)));
    peaks.truncate(REFINED_PEAKS);

    let (mut best_u, mut best) =
        (0..n).map(|i| (u[i], y[i])).fold(
            (u[0], f64::NEG_INFINITY),
            |acc, c| if c.1 > acc.1 { c } else { acc },
        );
    for i in peaks {
        let (uu, v) = golden_max(&ln_g, u[i - 1], u[i + 1], (u[i], y[i]))?;
        if v > best {
            best = v;
            best_u = uu;
        }
    }
    Ok(Supremum {
        ln_value: best,
        t_star: best_u.exp(),
    })
}

fn golden_max<F>(f: &F, mut lo: f64, mut hi: f64, seed: (f64, f64)) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut best = seed;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > GOLDEN_TOL {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2)?;
        }
        for c in [(x1, f1), (x2, f2)] {
            if c.1 > best.1 {
                best = c;
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn constant() {
        let s = sup_over_t(|_| Ok(-0.5 * 2f64.ln())).unwrap();
        assert_relative_eq!(s.value(), 0.5f64.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn net_positive_slope_is_unbounded() {
        // t^{1/2} t^{-1} t^{3/4}
        let s = sup_over_t(|u| Ok(0.25 * u)).unwrap();
        assert!(s.is_infinite());
        let s = sup_over_t(|u| Ok(-0.1 * u)).unwrap();
        assert!(s.is_infinite());
        assert_eq!(s.t_star, SUP_GRID_MIN);
    }

    #[test]
    fn interior_maximum() {
        // t e^{-t}
        let s = sup_over_t(|u| Ok(u - u.exp())).unwrap();
        assert_relative_eq!(s.value(), (-1.0f64).exp(), max_relative = 1e-12);
        assert_relative_eq!(s.t_star, 1.0, max_relative = 1e-4);
    }

    #[test]
    fn infinite_node() {
        let s = sup_over_t(|u| Ok(if u > 3.0 { f64::INFINITY } else { 0.0 })).unwrap();
        assert!(s.is_infinite());
    }

    #[test]
    fn gentle_slope_is_bounded() {
        let s = sup_over_t(|u| Ok(0.01 * u)).unwrap();
        assert!(!s.is_infinite());
    }
}

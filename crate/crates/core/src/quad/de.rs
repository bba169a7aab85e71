//! Double-exponential rules evaluated entirely in log space.

use std::f64::consts::{FRAC_PI_2, PI};

use super::{softplus, Abscissa, LogIntegrand, LogSum, QuadConfig};

const H0: f64 = 0.5;
const X_MAX: f64 = 12.0;
const MIN_LEVEL: u32 = 3;
/// Terms this far (in ln) below the largest one are dropped from the level-0 window.
const WINDOW_DEPTH: f64 = 80.0;

#[derive(Clone, Copy, Debug)]
pub(crate) enum Map {
    /// tanh-sinh on `(lo, hi)`.
    Finite { lo: f64, hi: f64 },
    /// tanh-sinh in `u = ln t` on `(ln lo, ln hi)`.
    LogFinite { ln_lo: f64, ln_hi: f64 },
    /// exp-sinh on `(lo, ∞)`: `t = lo + scale·exp(π/2·sinh x)`.
    Tail { lo: f64, ln_lo: f64, ln_scale: f64 },
}

impl Map {
    pub fn log_finite(lo: f64, hi: f64) -> Self {
        Map::LogFinite {
            ln_lo: lo.ln(),
            ln_hi: hi.ln(),
        }
    }

    pub fn tail(lo: f64, scale: f64) -> Self {
        Map::Tail {
            lo,
            ln_lo: lo.ln(),
            ln_scale: scale.ln(),
        }
    }

    /// Abscissa and `ln dt/dx` at `x`.
    fn node(&self, x: f64) -> (Abscissa, f64) {
        match *self {
            Map::Finite { lo, hi } => {
                let (ln_s, ln_c, ln_jac) = tanh_sinh(x);
                let width = hi - lo;
                let ln_t = if lo == 0.0 {
                    hi.ln() + ln_s
                } else if x <= 0.0 {
                    (lo + width * ln_s.exp()).ln()
                } else {
                    (hi - width * ln_c.exp()).ln()
                };
                (Abscissa::from_ln(ln_t), ln_jac + width.ln())
            }
            Map::LogFinite { ln_lo, ln_hi } => {
                let (ln_s, ln_c, ln_jac) = tanh_sinh(x);
                let width = ln_hi - ln_lo;
                let u = if x <= 0.0 {
                    ln_lo + width * ln_s.exp()
                } else {
                    ln_hi - width * ln_c.exp()
                };
                (Abscissa::from_ln(u), ln_jac + width.ln() + u)
            }
            Map::Tail { lo, ln_lo, ln_scale } => {
                let v = FRAC_PI_2 * x.sinh();
                let ln_rest = ln_scale + v;
                let ln_t = if lo == 0.0 {
                    ln_rest
                } else {
                    super::ln_add(ln_lo, ln_rest)
                };
                let ln_jac = ln_rest + FRAC_PI_2.ln() + x.cosh().ln();
                (Abscissa::from_ln(ln_t), ln_jac)
            }
        }
    }
}

/// `(ln s, ln(1-s), ln ds/dx)` for `s = (1 + tanh(π/2 sinh x))/2`.
#[inline]
fn tanh_sinh(x: f64) -> (f64, f64, f64) {
    let w = FRAC_PI_2 * x.sinh();
    let ln_s = -softplus(-2.0 * w);
    let ln_c = -softplus(2.0 * w);
    (ln_s, ln_c, PI.ln() + x.cosh().ln() + ln_s + ln_c)
}

pub(crate) struct DeOutput {
    pub ln_value: f64,
    pub rel_err: f64,
}

pub(crate) fn integrate(
    map: &Map,
    f: &LogIntegrand,
    cfg: &QuadConfig,
    abs_tol: f64,
) -> Result<DeOutput, String> {
    let term = |x: f64| -> Result<f64, String> {
        let (a, ln_jac) = map.node(x);
        let v = f.ln_at(a);
        if a.t == f64::INFINITY && !v.is_finite() {
            // Far tail past overflow; the endpoint was classified integrable beforehand.
            return Ok(f64::NEG_INFINITY);
        }
        if v.is_nan() {
            return Err(format!("integrand is NaN at t = {:e}", a.t));
        }
        if v == f64::INFINITY {
            return Err(format!("integrand is infinite at t = {:e}", a.t));
        }
        Ok(v + ln_jac)
    };

    // Level 0 fixes the summation window.
    let k_max = (X_MAX / H0) as i64;
    let mut level0 = Vec::with_capacity((2 * k_max + 1) as usize);
    for k in -k_max..=k_max {
        level0.push(term(k as f64 * H0)?);
    }
    let peak = level0.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if peak == f64::NEG_INFINITY {
        return Ok(DeOutput {
            ln_value: f64::NEG_INFINITY,
            rel_err: 0.0,
        });
    }
    let keep = |v: &f64| *v > peak - WINDOW_DEPTH;
    let first = level0.iter().position(keep).unwrap();
    let last = level0.iter().rposition(keep).unwrap();
    let x_lo = ((first as i64 - k_max - 1) as f64 * H0).max(-X_MAX);
    let x_hi = ((last as i64 - k_max + 1) as f64 * H0).min(X_MAX);

    let mut sum = LogSum::default();
    for (i, v) in level0.iter().enumerate() {
        let x = (i as i64 - k_max) as f64 * H0;
        if x >= x_lo && x <= x_hi {
            sum.add(*v);
        }
    }
    let mut h = H0;
    let mut ln_prev = sum.ln() + h.ln();
    let mut rel_change = f64::INFINITY;

    for level in 1..=cfg.max_depth {
        h *= 0.5;
        let n = ((x_hi - x_lo) / h).round() as i64;
        for j in (1..n).step_by(2) {
            sum.add(term(x_lo + j as f64 * h)?);
        }
        let ln_cur = sum.ln() + h.ln();
        rel_change = (ln_cur - ln_prev).exp_m1().abs();
        let abs_change = ln_cur.exp() * rel_change;
        ln_prev = ln_cur;
        if level >= MIN_LEVEL && (rel_change <= cfg.rel_tol || abs_change <= abs_tol) {
            // The rule converges quadratically, so the last change bounds the
            // current error with a wide margin.
            return Ok(DeOutput {
                ln_value: ln_cur,
                rel_err: rel_change,
            });
        }
    }
    if rel_change <= cfg.rel_tol.sqrt() {
        Ok(DeOutput {
            ln_value: ln_prev,
            rel_err: rel_change,
        })
    } else {
        Err(format!(
            "no convergence after {} halvings (relative change {rel_change:.3e})",
            cfg.max_depth
        ))
    }
}

//! Memoized cumulative integrals `K(t) = ∫_0^t g` (head) and `K(t) = ∫_t^∞ g` (tail).
//!
//! `ln K` is tabulated on a log grid and interpolated by monotone cubic Hermite pieces
//! in `u = ln t`, using the exact derivative `dK/dt = ±g`. When `g` grows or decays
//! exponentially, `ρ t` is subtracted first so that the tabulated curve stays smooth
//! in `u`. Intervals whose midpoint misses the directly integrated value by more than
//! [`REFINE_TOL`] are split until the node budget is exhausted. Outside the grid the
//! leading asymptote of `g` extends the table.

use super::{
    classify_endpoint, integrate_impl, ln_add, sniff::estimate_asymptote, Abscissa, Asymptote, Endpoint,
    EndpointClass, EndpointHints, Known, LnQuad, LogIntegrand, LogSum, MonotoneCubic, QuadConfig,
    EXPONENT_TOL,
};
use crate::{Error, Result};
use gauss_quad::GaussLegendre;
use std::sync::OnceLock;

pub const MEMO_GRID_MIN: f64 = 1e-6;
pub const MEMO_GRID_MAX: f64 = 1e6;
pub const MEMO_GRID_NODES: usize = 512;
pub const MEMO_MAX_NODES: usize = 4096;
/// Target absolute interpolation error in `ln K`.
pub const REFINE_TOL: f64 = 1e-10;
/// Where `|ln K|` is huge, rounding in `ρt` and in the abscissae sets a relative floor.
const LN_REL_FLOOR: f64 = 1e-13;
/// Intervals narrower than this in `u` are not split further; below it the midpoint
/// values are dominated by rounding rather than by interpolation error.
const MIN_SPLIT_WIDTH: f64 = 1e-6;
/// Above this estimated rounding error the exact slope is replaced by a difference quotient.
const SLOPE_NOISE_MAX: f64 = 1e-9;
/// Segment integrals must sit well below [`REFINE_TOL`] or refinement chases noise.
const SEGMENT_REL_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// `∫_0^t g`
    Head,
    /// `∫_t^∞ g`
    Tail,
}

#[derive(Clone, Debug)]
pub struct Cumulative {
    dir: Direction,
    g: LogIntegrand,
    hints: EndpointHints,
    table: Option<Table>,
}

#[derive(Clone, Debug)]
struct Table {
    interp: MonotoneCubic,
    /// exponential rate removed before interpolation
    rho: f64,
    ln_k_first: f64,
    ln_k_last: f64,
    ln_g_first: f64,
    ln_g_last: f64,
    g_zero: Option<f64>,
    g_inf: Option<Asymptote>,
    max_err: f64,
}

impl Cumulative {
    /// Tabulates the cumulative integral of `g`. A divergent defining integral gives a
    /// kernel that is `+∞` everywhere.
    pub fn new(g: LogIntegrand, dir: Direction, cfg: &QuadConfig) -> Result<Self> {
        cfg.validate()?;
        let (endpoint, anchor) = match dir {
            Direction::Head => (Endpoint::Zero, MEMO_GRID_MIN),
            Direction::Tail => (Endpoint::Infinity, MEMO_GRID_MAX),
        };
        match classify_endpoint(&g, endpoint, anchor, cfg) {
            EndpointClass::Integrable => {}
            EndpointClass::Divergent => {
                return Ok(Self {
                    dir,
                    g,
                    hints: EndpointHints::default(),
                    table: None,
                })
            }
            EndpointClass::Undetermined(diagnostic) => {
                return Err(Error::Undetermined { endpoint, diagnostic })
            }
        }

        let g_zero = g
            .hints
            .zero
            .or_else(|| estimate_asymptote(&g, Endpoint::Zero, MEMO_GRID_MIN, cfg).map(|a| a.power));
        let g_inf = g
            .hints
            .infinity
            .or_else(|| estimate_asymptote(&g, Endpoint::Infinity, MEMO_GRID_MAX, cfg));
        let rho = match (dir, g_inf) {
            (Direction::Tail, Some(a)) if a.rate < -EXPONENT_TOL => a.rate,
            (Direction::Head, Some(a)) if a.rate > EXPONENT_TOL => a.rate,
            _ => 0.0,
        };
        let hints = kernel_hints(dir, g_zero, g_inf);

        let table = build_table(&g, dir, rho, g_zero, g_inf, cfg)?;
        Ok(Self {
            dir,
            g,
            hints,
            table: Some(table),
        })
    }

    pub fn direction(&self) -> Direction {
        self.dir
    }

    pub fn is_infinite(&self) -> bool {
        self.table.is_none()
    }

    /// Leading behaviour of `K` itself at both ends.
    pub fn hints(&self) -> EndpointHints {
        self.hints
    }

    pub fn integrand(&self) -> &LogIntegrand {
        &self.g
    }

    /// Number of tabulated nodes (0 for an infinite kernel).
    pub fn node_count(&self) -> usize {
        self.table.as_ref().map_or(0, |t| t.interp.nodes().len())
    }

    /// Largest midpoint discrepancy seen when the table was accepted.
    pub fn interpolation_error(&self) -> f64 {
        self.table.as_ref().map_or(0.0, |t| t.max_err)
    }

    pub fn ln_at_t(&self, t: f64) -> f64 {
        self.ln_at(Abscissa::new(t))
    }

    /// `ln K(t)`; `+inf` for a divergent kernel.
    pub fn ln_at(&self, a: Abscissa) -> f64 {
        let Some(tb) = &self.table else {
            return f64::INFINITY;
        };
        let u = a.ln_t;
        let nodes = tb.interp.nodes();
        let (u0, un) = (nodes[0], nodes[nodes.len() - 1]);
        if u >= u0 && u <= un {
            return tb.interp.eval(u) + tb.rho * a.t;
        }
        if u < u0 {
            let e = tb.g_zero.unwrap_or(0.0) + 1.0;
            match self.dir {
                Direction::Head => tb.ln_k_first + e * (u - u0),
                Direction::Tail => {
                    let piece = tb.ln_g_first + u0 + ln_unit_power_integral(-e, u0 - u);
                    ln_add(tb.ln_k_first, piece)
                }
            }
        } else {
            let asym = tb.g_inf.unwrap_or(Asymptote::power(-1.0));
            let x = u - un;
            match self.dir {
                Direction::Tail => {
                    if tb.rho != 0.0 {
                        tb.ln_k_last + self.g.ln_at(a) - tb.ln_g_last
                    } else {
                        tb.ln_k_last + (asym.power + 1.0) * x
                    }
                }
                Direction::Head => {
                    let piece = if asym.is_exponential() {
                        let ln_g = self.g.ln_at(a);
                        let (hi, lo) = if asym.rate > 0.0 {
                            (ln_g, tb.ln_g_last)
                        } else {
                            (tb.ln_g_last, ln_g)
                        };
                        hi + (-(lo - hi).exp()).ln_1p() - asym.rate.abs().ln()
                    } else {
                        tb.ln_g_last + un + ln_unit_power_integral(asym.power + 1.0, x)
                    };
                    ln_add(tb.ln_k_last, piece)
                }
            }
        }
    }
}

/// `ln ∫_1^{e^x} s^{e-1} ds` for `x > 0`.
pub(crate) fn ln_unit_power_integral(e: f64, x: f64) -> f64 {
    let z = e * x;
    if z.abs() < 1e-12 {
        return x.ln() + 0.5 * z;
    }
    if z > 30.0 {
        z + (-(-z).exp()).ln_1p() - e.ln()
    } else {
        (z.exp_m1() / e).ln()
    }
}

fn kernel_hints(dir: Direction, g_zero: Option<f64>, g_inf: Option<Asymptote>) -> EndpointHints {
    match dir {
        Direction::Head => EndpointHints {
            zero: g_zero.map(|a| a + 1.0),
            infinity: g_inf.map(|a| {
                if a.rate > EXPONENT_TOL {
                    a
                } else if a.integrable_at_infinity() {
                    Asymptote::power(0.0)
                } else {
                    // t^{-1} gives a logarithm, counted as power 0
                    Asymptote::power((a.power + 1.0).max(0.0))
                }
            }),
        },
        Direction::Tail => EndpointHints {
            zero: g_zero.map(|a| (a + 1.0).min(0.0)),
            infinity: g_inf.map(|a| {
                if a.rate < -EXPONENT_TOL {
                    a
                } else {
                    Asymptote::power(a.power + 1.0)
                }
            }),
        },
    }
}

fn grid() -> Vec<f64> {
    let (a, b) = (MEMO_GRID_MIN.ln(), MEMO_GRID_MAX.ln());
    let n = MEMO_GRID_NODES;
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn gauss_pair() -> &'static [Vec<(f64, f64)>; 2] {
    static RULES: OnceLock<[Vec<(f64, f64)>; 2]> = OnceLock::new();
    RULES.get_or_init(|| {
        [12, 20].map(|n| {
            GaussLegendre::new(n)
                .expect("degree is at least 2")
                .into_iter()
                .collect()
        })
    })
}

/// Gauss–Legendre in `u` on one rule; `None` if a node value is not finite.
fn gauss_ln(g: &LogIntegrand, rule: &[(f64, f64)], u_lo: f64, u_hi: f64) -> Option<f64> {
    let (mid, half) = (0.5 * (u_lo + u_hi), 0.5 * (u_hi - u_lo));
    let mut sum = LogSum::default();
    for &(x, w) in rule {
        let u = mid + half * x;
        let v = g.ln_at(Abscissa::from_ln(u));
        if !v.is_finite() {
            return None;
        }
        sum.add(v + u + w.ln());
    }
    Some(sum.ln() + half.ln())
}

fn segment(g: &LogIntegrand, u_lo: f64, u_hi: f64, cfg: &QuadConfig) -> Result<f64> {
    // Most segments are smooth in u; two Gauss rules that agree settle them cheaply.
    let [low, high] = gauss_pair();
    if let (Some(a), Some(b)) = (gauss_ln(g, low, u_lo, u_hi), gauss_ln(g, high, u_lo, u_hi)) {
        if (a - b).abs() <= SEGMENT_REL_TOL {
            return Ok(b);
        }
    }
    let known = Known {
        zero: true,
        infinity: true,
    };
    let tight = QuadConfig {
        rel_tol: cfg.rel_tol.min(SEGMENT_REL_TOL),
        ..*cfg
    };
    match integrate_impl(g, u_lo.exp(), u_hi.exp(), &tight, 0.0, known) {
        LnQuad::Value { ln_value, .. } => Ok(ln_value),
        LnQuad::Divergent(e) => Err(Error::Quadrature(format!("segment diverges at {e}"))),
        LnQuad::Undetermined(d) => Err(Error::Quadrature(d)),
    }
}

/// Second-order derivative estimate on a nonuniform grid.
fn three_point(u: &[f64], y: &[f64], i: usize) -> f64 {
    let n = u.len();
    let (a, b, c) = if i == 0 {
        (0, 1, 2)
    } else if i + 1 == n {
        (n - 3, n - 2, n - 1)
    } else {
        (i - 1, i, i + 1)
    };
    let x = u[i];
    // derivative of the Lagrange interpolant through a, b, c evaluated at x
    let (xa, xb, xc) = (u[a], u[b], u[c]);
    y[a] * ((x - xb) + (x - xc)) / ((xa - xb) * (xa - xc))
        + y[b] * ((x - xa) + (x - xc)) / ((xb - xa) * (xb - xc))
        + y[c] * ((x - xa) + (x - xb)) / ((xc - xa) * (xc - xb))
}

fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

fn build_table(
    g: &LogIntegrand,
    dir: Direction,
    rho: f64,
    g_zero: Option<f64>,
    g_inf: Option<Asymptote>,
    cfg: &QuadConfig,
) -> Result<Table> {
    let mut u = grid();
    let n = u.len();
    let segs: Vec<Result<f64>> = map_indexed(n - 1, |i| segment(g, u[i], u[i + 1], cfg));
    let segs: Vec<f64> = segs.into_iter().collect::<Result<_>>()?;

    let known = Known {
        zero: true,
        infinity: true,
    };
    let base = match dir {
        Direction::Head => integrate_impl(g, 0.0, MEMO_GRID_MIN, cfg, 0.0, known),
        Direction::Tail => integrate_impl(g, MEMO_GRID_MAX, f64::INFINITY, cfg, 0.0, known),
    };
    let base = match base {
        LnQuad::Value { ln_value, .. } => ln_value,
        LnQuad::Divergent(e) => {
            return Err(Error::Quadrature(format!("kernel base integral diverges at {e}")))
        }
        LnQuad::Undetermined(d) => return Err(Error::Quadrature(d)),
    };

    let mut ln_k = vec![0.0; n];
    match dir {
        Direction::Head => {
            let mut acc = LogSum::default();
            acc.add(base);
            ln_k[0] = acc.ln();
            for i in 1..n {
                acc.add(segs[i - 1]);
                ln_k[i] = acc.ln();
            }
        }
        Direction::Tail => {
            let mut acc = LogSum::default();
            acc.add(base);
            ln_k[n - 1] = acc.ln();
            for i in (0..n - 1).rev() {
                acc.add(segs[i]);
                ln_k[i] = acc.ln();
            }
        }
    }
    if ln_k.iter().any(|v| !v.is_finite()) {
        return Err(Error::Quadrature(
            "kernel vanishes or overflows on the memo grid".into(),
        ));
    }

    let sign = match dir {
        Direction::Head => 1.0,
        Direction::Tail => -1.0,
    };
    let ln_g_at = |ui: f64| g.ln_at(Abscissa::from_ln(ui));
    let slope = |ui: f64, lk: f64, lg: f64| sign * (ui + lg - lk).exp() - rho * ui.exp();

    let mut ln_g: Vec<f64> = u.iter().map(|&ui| ln_g_at(ui)).collect();
    let mut verified = vec![false; n - 1];
    let mut max_err = 0.0f64;
    loop {
        let y: Vec<f64> = (0..u.len()).map(|i| ln_k[i] - rho * u[i].exp()).collect();
        let d: Vec<f64> = (0..u.len())
            .map(|i| {
                let exact = slope(u[i], ln_k[i], ln_g[i]);
                // t·g/K comes from ln g − ln K; at large |ln K| its rounding is amplified by t.
                let noise = 8.0
                    * f64::EPSILON
                    * (u[i] + ln_g[i] - ln_k[i]).exp()
                    * (ln_g[i].abs() + ln_k[i].abs() + u[i].abs());
                if noise > SLOPE_NOISE_MAX {
                    three_point(&u, &y, i)
                } else {
                    exact
                }
            })
            .collect();
        let interp = MonotoneCubic::new(u.clone(), y, Some(d));

        let todo: Vec<usize> = (0..u.len() - 1).filter(|&i| !verified[i]).collect();
        if todo.is_empty() || u.len() >= MEMO_MAX_NODES {
            return Ok(Table {
                interp,
                rho,
                ln_k_first: ln_k[0],
                ln_k_last: ln_k[ln_k.len() - 1],
                ln_g_first: ln_g[0],
                ln_g_last: ln_g[ln_g.len() - 1],
                g_zero,
                g_inf,
                max_err,
            });
        }
        let checks: Vec<Result<(f64, f64, f64)>> = map_indexed(todo.len(), |j| {
            let i = todo[j];
            let um = 0.5 * (u[i] + u[i + 1]);
            let exact = match dir {
                Direction::Head => ln_add(ln_k[i], segment(g, u[i], um, cfg)?),
                Direction::Tail => ln_add(ln_k[i + 1], segment(g, um, u[i + 1], cfg)?),
            };
            let approx = interp.eval(um) + rho * um.exp();
            Ok((um, exact, (approx - exact).abs()))
        });

        let mut pending: Vec<Option<Result<(f64, f64, f64)>>> = vec![None; u.len() - 1];
        for (&i, res) in todo.iter().zip(checks) {
            pending[i] = Some(res);
        }
        let mut new_u = Vec::with_capacity(u.len() * 2);
        let mut new_k = Vec::with_capacity(u.len() * 2);
        let mut new_g = Vec::with_capacity(u.len() * 2);
        let mut new_verified = Vec::with_capacity(u.len() * 2);
        let mut budget = MEMO_MAX_NODES - u.len();
        for i in 0..u.len() {
            new_u.push(u[i]);
            new_k.push(ln_k[i]);
            new_g.push(ln_g[i]);
            if i + 1 == u.len() {
                break;
            }
            let Some(res) = pending[i].take() else {
                new_verified.push(true);
                continue;
            };
            let (um, exact, err) = res?;
            let tol = REFINE_TOL.max(LN_REL_FLOOR * (exact.abs() + (rho * um.exp()).abs()));
            if err > tol && budget > 0 && u[i + 1] - u[i] > MIN_SPLIT_WIDTH {
                budget -= 1;
                new_verified.push(false);
                new_u.push(um);
                new_k.push(exact);
                new_g.push(ln_g_at(um));
                new_verified.push(false);
            } else {
                max_err = max_err.max(err);
                new_verified.push(true);
            }
        }
        u = new_u;
        ln_k = new_k;
        ln_g = new_g;
        verified = new_verified;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn power(a: f64) -> LogIntegrand {
        LogIntegrand::from_fn(
            move |x: Abscissa| a * x.ln_t,
            EndpointHints::new(a, Asymptote::power(a)),
        )
    }

    #[test]
    fn tail_of_cubic_decay() {
        let k = Cumulative::new(power(-3.0), Direction::Tail, &QuadConfig::default()).unwrap();
        for t in [1e-9, 1e-3, 0.5, 2.0, 77.0, 1e8] {
            assert_relative_eq!(k.ln_at_t(t).exp(), 0.5 / (t * t), max_relative = 1e-10);
        }
        assert_eq!(k.hints().zero, Some(-2.0));
    }

    #[test]
    fn head_of_constant_and_divergence() {
        let cfg = QuadConfig::default();
        let k = Cumulative::new(power(0.0), Direction::Head, &cfg).unwrap();
        assert_relative_eq!(k.ln_at_t(0.3).exp(), 0.3, max_relative = 1e-10);
        assert_relative_eq!(k.ln_at_t(3e7).exp(), 3e7, max_relative = 1e-10);
        let k = Cumulative::new(power(-1.0), Direction::Tail, &cfg).unwrap();
        assert!(k.is_infinite());
        assert_eq!(k.ln_at_t(5.0), f64::INFINITY);
    }

    #[test]
    fn sinh_weight_tail_is_accurate() {
        // ∫_t^∞ sinh(s)^{-2} ds = coth t - 1
        let g = LogIntegrand::from_fn(
            |a: Abscissa| -2.0 * crate::quad::ln_sinh(a.t, a.ln_t),
            EndpointHints::new(-2.0, Asymptote::exponential(-2.0, 0.0)),
        );
        let k = Cumulative::new(g, Direction::Tail, &QuadConfig::default()).unwrap();
        for t in [0.01f64, 0.3, 1.0, 2.5, 10.0, 40.0] {
            let exact = 2.0 / (2.0 * t).exp_m1();
            assert_relative_eq!(k.ln_at_t(t).exp(), exact, max_relative = 1e-9);
        }
        let exact_ln = (2.0f64).ln() - 2.0 * 1e7;
        assert_relative_eq!(k.ln_at_t(1e7), exact_ln, max_relative = 1e-9);
    }

    #[test]
    fn head_of_exponential_growth() {
        // ∫_0^t e^{s} ds = e^t - 1
        let g = LogIntegrand::from_fn(
            |a: Abscissa| a.t,
            EndpointHints::new(0.0, Asymptote::exponential(1.0, 0.0)),
        );
        let k = Cumulative::new(g, Direction::Head, &QuadConfig::default()).unwrap();
        for t in [1e-4f64, 0.5, 3.0, 30.0, 500.0] {
            assert_relative_eq!(k.ln_at_t(t), t.exp_m1().ln(), max_relative = 1e-9);
        }
    }

    #[test]
    fn unit_power_integral_matches_closed_forms() {
        for &(e, x) in &[
            (2.0f64, 0.5f64),
            (-1.5, 3.0),
            (0.0, 2.0),
            (40.0, 2.0),
            (1e-13, 1.0),
        ] {
            let exact = if e == 0.0 || e == 1e-13 {
                x
            } else {
                ((e * x).exp() - 1.0) / e
            };
            assert_relative_eq!(
                ln_unit_power_integral(e, x),
                exact.ln(),
                epsilon = 1e-12,
                max_relative = 1e-11
            );
        }
    }
}

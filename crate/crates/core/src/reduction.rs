//! The half-line reduction of the ball-restricted bilinear Hardy inequality.
//!
//! For radial `f` the averaging integral over the ball `B(a, |x|)` only depends on
//! `F = f Λ`, so the space inequality and the half-line inequality with weights `Ũ`,
//! `Ṽ_i` share their best constant. `project` and `lift` move test functions between
//! the two sides; `lhs_*` and `rhs_*` evaluate both sides of each inequality.

use std::fmt;
use std::sync::Arc;

use crate::conditions::ExponentSystem;
use crate::geometry::RadialGeometry;
use crate::quad::{
    integrate_ln, ln_unit_power_integral, Abscissa, EndpointHints, LnFn, LnQuad, LogIntegrand, LogSum,
    QuadConfig,
};
use crate::weights::{LineWeights, RadialWeight, WeightTriple};
use crate::{Error, Result};

/// A nonnegative function on `(0, ∞)` with bounded support.
#[derive(Clone)]
pub enum LineFunction {
    Zero,
    /// `c·t^a` on `(lo, hi)`, zero elsewhere; `ln_c = ln c`.
    PowerTrunc {
        a: f64,
        lo: f64,
        hi: f64,
        ln_c: f64,
    },
    Custom {
        ln_eval: LnFn,
        lo: f64,
        hi: f64,
        /// power exponent at `0⁺`, used when `lo = 0`
        zero_exponent: Option<f64>,
    },
}

/// Radial functions on the space share the representation of line functions.
pub type RadialFunction = LineFunction;

impl fmt::Debug for LineFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LineFunction::Zero => write!(f, "0"),
            LineFunction::PowerTrunc { a, lo, hi, ln_c } => {
                write!(f, "{}·t^{a} on ({lo}, {hi})", ln_c.exp())
            }
            LineFunction::Custom { lo, hi, .. } => write!(f, "custom on ({lo}, {hi})"),
        }
    }
}

impl LineFunction {
    pub fn power_trunc(a: f64, lo: f64, hi: f64) -> Result<Self> {
        if !(lo >= 0.0 && lo < hi && hi.is_finite() && a.is_finite()) {
            return Err(Error::Domain(format!(
                "truncated power needs 0 ≤ lo < hi < ∞, got ({lo}, {hi})"
            )));
        }
        Ok(LineFunction::PowerTrunc { a, lo, hi, ln_c: 0.0 })
    }

    /// Indicator of `(lo, hi)`.
    pub fn indicator(lo: f64, hi: f64) -> Result<Self> {
        Self::power_trunc(0.0, lo, hi)
    }

    pub fn scaled(&self, c: f64) -> Self {
        match self {
            LineFunction::Zero => LineFunction::Zero,
            _ if c == 0.0 => LineFunction::Zero,
            LineFunction::PowerTrunc { a, lo, hi, ln_c } => LineFunction::PowerTrunc {
                a: *a,
                lo: *lo,
                hi: *hi,
                ln_c: ln_c + c.ln(),
            },
            LineFunction::Custom {
                ln_eval,
                lo,
                hi,
                zero_exponent,
            } => {
                let inner = ln_eval.clone();
                let lc = c.ln();
                LineFunction::Custom {
                    ln_eval: Arc::new(move |x| inner(x) + lc),
                    lo: *lo,
                    hi: *hi,
                    zero_exponent: *zero_exponent,
                }
            }
        }
    }

    pub fn support(&self) -> Option<(f64, f64)> {
        match *self {
            LineFunction::Zero => None,
            LineFunction::PowerTrunc { lo, hi, .. } | LineFunction::Custom { lo, hi, .. } => Some((lo, hi)),
        }
    }

    fn zero_exponent(&self) -> Option<f64> {
        match *self {
            LineFunction::Zero => None,
            LineFunction::PowerTrunc { a, .. } => Some(a),
            LineFunction::Custom { zero_exponent, .. } => zero_exponent,
        }
    }

    /// `ln F(t)`, `-inf` off the support.
    pub fn ln_at(&self, x: Abscissa) -> f64 {
        match self {
            LineFunction::Zero => f64::NEG_INFINITY,
            LineFunction::PowerTrunc { a, lo, hi, ln_c } => {
                if inside(x, *lo, *hi) {
                    ln_c + a * x.ln_t
                } else {
                    f64::NEG_INFINITY
                }
            }
            LineFunction::Custom { ln_eval, lo, hi, .. } => {
                if inside(x, *lo, *hi) {
                    ln_eval(x)
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.ln_at(Abscissa::new(t)).exp()
    }

    /// `ln ∫_0^τ F`, exact for truncated powers.
    pub fn ln_cumulative(&self, tau: Abscissa, cfg: &QuadConfig) -> Result<f64> {
        match self {
            LineFunction::Zero => Ok(f64::NEG_INFINITY),
            LineFunction::PowerTrunc { a, lo, hi, ln_c } => {
                if tau.ln_t <= lo.ln() {
                    return Ok(f64::NEG_INFINITY);
                }
                let ln_x = if tau.t < *hi { tau.ln_t } else { hi.ln() };
                let e = a + 1.0;
                if *lo == 0.0 {
                    if e <= 0.0 {
                        return Ok(f64::INFINITY);
                    }
                    return Ok(ln_c + e * ln_x - e.ln());
                }
                let ln_lo = lo.ln();
                Ok(ln_c + e * ln_lo + ln_unit_power_integral(e, ln_x - ln_lo))
            }
            LineFunction::Custom { lo, hi, .. } => {
                if tau.ln_t <= lo.ln() {
                    return Ok(f64::NEG_INFINITY);
                }
                let x = tau.t.min(*hi);
                let g = self.as_integrand();
                quad_ln(&g, *lo, x, cfg)
            }
        }
    }

    fn as_integrand(&self) -> LogIntegrand {
        let me = self.clone();
        let hints = EndpointHints {
            zero: self.zero_exponent(),
            infinity: None,
        };
        LogIntegrand::from_fn(move |x| me.ln_at(x), hints)
    }
}

/// Support test in logarithms, so abscissae that underflow to `t = 0` still count.
fn inside(x: Abscissa, lo: f64, hi: f64) -> bool {
    x.ln_t > lo.ln() && x.t < hi
}

fn quad_ln(g: &LogIntegrand, lo: f64, hi: f64, cfg: &QuadConfig) -> Result<f64> {
    match integrate_ln(g, lo, hi, cfg) {
        LnQuad::Value { ln_value, .. } => Ok(ln_value),
        LnQuad::Divergent(_) => Ok(f64::INFINITY),
        LnQuad::Undetermined(d) => Err(Error::Quadrature(d)),
    }
}

/// `F(s) = f(s) Λ(s)`.
pub fn project(f: &RadialFunction, geo: &RadialGeometry) -> LineFunction {
    let Some((lo, hi)) = f.support() else {
        return LineFunction::Zero;
    };
    let g = *geo;
    let inner = f.clone();
    LineFunction::Custom {
        ln_eval: Arc::new(move |x| inner.ln_at(x) + g.ln_surface_density(x)),
        lo,
        hi,
        zero_exponent: f.zero_exponent().map(|a| a + geo.dim - 1.0),
    }
}

/// `f = F v_i^{1-p_i'} Ṽ_i^{1/(p_i-1)}`, the extremal lift used in the reduction.
pub fn lift(
    big_f: &LineFunction,
    geo: &RadialGeometry,
    weights: &WeightTriple,
    exps: &ExponentSystem,
    i: usize,
) -> Result<RadialFunction> {
    let Some((lo, hi)) = big_f.support() else {
        return Ok(LineFunction::Zero);
    };
    let p = exps.p(i);
    let e = 1.0 - exps.p_conj(i);
    let v = weights.v(i).clone();
    let g = *geo;
    // ln Ṽ_i = (1 - p) ln(v^{1-p'} Λ)
    let ln_v_tilde = move |x: Abscissa| (1.0 - p) * (e * v.ln_at(x) + g.ln_surface_density(x));
    let a = if lo > 0.0 { lo } else { hi * 1e-12 };
    for k in 0..=32 {
        let t = (a.ln() + (hi.ln() - a.ln()) * k as f64 / 32.0).exp();
        let lv = ln_v_tilde(Abscissa::new(t));
        if !lv.is_finite() {
            return Err(Error::Lift(format!("Ṽ_{i} is {} at t = {t:e}", lv.exp())));
        }
    }
    let inner = big_f.clone();
    let v = weights.v(i).clone();
    let zero_exponent = big_f.zero_exponent().map(|a| a - (geo.dim - 1.0));
    Ok(LineFunction::Custom {
        ln_eval: Arc::new(move |x| inner.ln_at(x) + e * v.ln_at(x) + ln_v_tilde(x) / (p - 1.0)),
        lo,
        hi,
        zero_exponent,
    })
}

fn breakpoints(fs: &[&LineFunction]) -> Vec<f64> {
    let mut b: Vec<f64> = fs
        .iter()
        .filter_map(|f| f.support())
        .flat_map(|(lo, hi)| [lo, hi])
        .collect();
    b.sort_by(f64::total_cmp);
    b.dedup();
    b
}

/// Generic `(∫_0^∞ C1(τ)^q C2(τ)^q w(τ) dτ)^{1/q}` where `C_i` are cumulatives that stop
/// growing beyond the last breakpoint.
fn bilinear_lhs(
    c1: Arc<dyn Fn(Abscissa) -> Result<f64> + Send + Sync>,
    c2: Arc<dyn Fn(Abscissa) -> Result<f64> + Send + Sync>,
    zero_exp: Option<f64>,
    weight: &LogIntegrand,
    breaks: &[f64],
    start: f64,
    q: f64,
    cfg: &QuadConfig,
) -> Result<f64> {
    let last = *breaks.last().unwrap();
    let mut acc = LogSum::default();
    let mut cuts: Vec<f64> = breaks.iter().cloned().filter(|&b| b > start).collect();
    cuts.insert(0, start);
    let err = Arc::new(std::sync::Mutex::new(None::<Error>));
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let (c1, c2, wt, err2) = (c1.clone(), c2.clone(), weight.clone(), err.clone());
        let hints = EndpointHints {
            zero: zero_exp.zip(weight.hints.zero).map(|(a, b)| a + b),
            infinity: None,
        };
        let g = LogIntegrand::from_fn(
            move |x| match (c1(x), c2(x)) {
                (Ok(a), Ok(b)) => q * a + q * b + wt.ln_at(x),
                (Err(e), _) | (_, Err(e)) => {
                    *err2.lock().unwrap() = Some(e);
                    f64::NAN
                }
            },
            hints,
        );
        let piece = quad_ln(&g, lo, hi, cfg);
        if let Some(e) = err.lock().unwrap().take() {
            return Err(e);
        }
        let piece = piece?;
        if piece == f64::INFINITY {
            return Ok(f64::INFINITY);
        }
        acc.add(piece);
    }
    // Beyond the last breakpoint both cumulatives are constant.
    let end = Abscissa::new(last);
    let tail = quad_ln(weight, last, f64::INFINITY, cfg)?;
    if tail == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    acc.add(q * c1(end)? + q * c2(end)? + tail);
    Ok(acc.ln() / q)
}

/// `(∫_0^∞ (∫_0^τ F1)^q (∫_0^τ F2)^q Ũ(τ) dτ)^{1/q}`, returned as its logarithm.
pub fn ln_lhs_line(f1: &LineFunction, f2: &LineFunction, lw: &LineWeights, cfg: &QuadConfig) -> Result<f64> {
    let (Some((lo1, _)), Some((lo2, _))) = (f1.support(), f2.support()) else {
        return Ok(f64::NEG_INFINITY);
    };
    let q = lw.exps.q;
    let start = lo1.max(lo2);
    let zero_exp = if start == 0.0 {
        f1.zero_exponent()
            .zip(f2.zero_exponent())
            .map(|(a, b)| q * (a + 1.0) + q * (b + 1.0))
    } else {
        None
    };
    let (g1, g2) = (f1.clone(), f2.clone());
    let (cfg1, cfg2) = (*cfg, *cfg);
    bilinear_lhs(
        Arc::new(move |x| g1.ln_cumulative(x, &cfg1)),
        Arc::new(move |x| g2.ln_cumulative(x, &cfg2)),
        zero_exp,
        lw.u_tilde(),
        &breakpoints(&[f1, f2]),
        start,
        q,
        cfg,
    )
}

pub fn lhs_line(f1: &LineFunction, f2: &LineFunction, lw: &LineWeights, cfg: &QuadConfig) -> Result<f64> {
    Ok(ln_lhs_line(f1, f2, lw, cfg)?.exp())
}

/// `ln (∫ F^p Ṽ_i)^{1/p}`
pub fn ln_rhs_line(f: &LineFunction, lw: &LineWeights, i: usize, cfg: &QuadConfig) -> Result<f64> {
    let Some((lo, hi)) = f.support() else {
        return Ok(f64::NEG_INFINITY);
    };
    let p = lw.exps.p(i);
    let ff = f.clone();
    let w = lw.w(i).clone();
    let hints = EndpointHints {
        zero: f
            .zero_exponent()
            .zip(w.hints.zero)
            .map(|(a, b)| p * a + (1.0 - p) * b),
        infinity: None,
    };
    let g = LogIntegrand::from_fn(move |x| p * ff.ln_at(x) + (1.0 - p) * w.ln_at(x), hints);
    Ok(quad_ln(&g, lo, hi, cfg)? / p)
}

pub fn rhs_line(f: &LineFunction, lw: &LineWeights, i: usize, cfg: &QuadConfig) -> Result<f64> {
    Ok(ln_rhs_line(f, lw, i, cfg)?.exp())
}

/// Space-side left-hand side: `(∫_X (H^B f1)^q (H^B f2)^q u)^{1/q}` through polar
/// coordinates, with the ball integrals computed by quadrature.
pub fn lhs_space(
    f1: &RadialFunction,
    f2: &RadialFunction,
    geo: &RadialGeometry,
    u: &RadialWeight,
    q: f64,
    cfg: &QuadConfig,
) -> Result<f64> {
    let (Some((lo1, _)), Some((lo2, _))) = (f1.support(), f2.support()) else {
        return Ok(0.0);
    };
    let g = *geo;
    let ball = |f: &RadialFunction| {
        let f = f.clone();
        let (lo, hi) = f.support().unwrap();
        let zero = f.zero_exponent().map(|a| a + g.dim - 1.0);
        let integrand = LogIntegrand::from_fn(
            {
                let f = f.clone();
                move |x| f.ln_at(x) + g.ln_surface_density(x)
            },
            EndpointHints { zero, infinity: None },
        );
        let cfg = *cfg;
        Arc::new(move |x: Abscissa| -> Result<f64> {
            if x.ln_t <= lo.ln() {
                return Ok(f64::NEG_INFINITY);
            }
            quad_ln(&integrand, lo, x.t.min(hi), &cfg)
        }) as Arc<dyn Fn(Abscissa) -> Result<f64> + Send + Sync>
    };
    let uu = u.clone();
    let weight = LogIntegrand::from_fn(
        move |x| uu.ln_at(x) + g.ln_surface_density(x),
        u.hints().map(|h| h.add(geo.hints())).unwrap_or_default(),
    );
    let start = lo1.max(lo2);
    let zero_exp = if start == 0.0 {
        f1.zero_exponent()
            .zip(f2.zero_exponent())
            .map(|(a, b)| q * (a + geo.dim) + q * (b + geo.dim))
    } else {
        None
    };
    let ln = bilinear_lhs(
        ball(f1),
        ball(f2),
        zero_exp,
        &weight,
        &breakpoints(&[f1, f2]),
        start,
        q,
        cfg,
    )?;
    Ok(ln.exp())
}

/// Space-side right-hand side `(∫_X f^p v)^{1/p}`.
pub fn rhs_space(
    f: &RadialFunction,
    geo: &RadialGeometry,
    v: &RadialWeight,
    p: f64,
    cfg: &QuadConfig,
) -> Result<f64> {
    let Some((lo, hi)) = f.support() else {
        return Ok(0.0);
    };
    let (ff, vv, g) = (f.clone(), v.clone(), *geo);
    let zero = f
        .zero_exponent()
        .zip(v.hints().and_then(|h| h.zero))
        .map(|(a, b)| p * a + b + geo.dim - 1.0);
    let integrand = LogIntegrand::from_fn(
        move |x| p * ff.ln_at(x) + vv.ln_at(x) + g.ln_surface_density(x),
        EndpointHints { zero, infinity: None },
    );
    Ok((quad_ln(&integrand, lo, hi, cfg)? / p).exp())
}

/// `lhs / (rhs_1 rhs_2)`, a lower bound for the best constant.
pub fn ratio(f1: &LineFunction, f2: &LineFunction, lw: &LineWeights, cfg: &QuadConfig) -> Result<f64> {
    Ok(ln_ratio(f1, f2, lw, cfg)?.exp())
}

pub fn ln_ratio(f1: &LineFunction, f2: &LineFunction, lw: &LineWeights, cfg: &QuadConfig) -> Result<f64> {
    let r1 = ln_rhs_line(f1, lw, 1, cfg)?;
    let r2 = ln_rhs_line(f2, lw, 2, cfg)?;
    for (i, r) in [(1, r1), (2, r2)] {
        if !r.is_finite() {
            let what = if r > 0.0 { "infinite" } else { "zero" };
            return Err(Error::Ratio(format!("right-hand side {i} is {what}")));
        }
    }
    let l = ln_lhs_line(f1, f2, lw, cfg)?;
    if l == f64::INFINITY {
        return Err(Error::Ratio("left-hand side diverges".into()));
    }
    Ok(l - r1 - r2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cfg() -> QuadConfig {
        QuadConfig::default()
    }

    fn balanced() -> (RadialGeometry, WeightTriple, ExponentSystem, LineWeights) {
        let geo = RadialGeometry::homogeneous(4.0, 1.0).unwrap();
        let w = WeightTriple::powers(-6.0, 3.0, 3.0);
        let e = ExponentSystem::new(2.0, 2.0, 2.0).unwrap();
        let lw = crate::weights::build_line_weights(&geo, &w, e).unwrap();
        (geo, w, e, lw)
    }

    #[test]
    fn lhs_line_examples() {
        let (_, _, _, lw) = balanced();
        let one = LineFunction::indicator(0.0, 1.0).unwrap();
        assert_relative_eq!(
            lhs_line(&one, &one, &lw, &cfg()).unwrap(),
            1.0,
            max_relative = 1e-10
        );
        assert_eq!(lhs_line(&LineFunction::Zero, &one, &lw, &cfg()).unwrap(), 0.0);
        let e = ExponentSystem::new(2.0, 2.0, 2.0).unwrap();
        let slow = LineWeights::powers(-1.0, 0.0, 0.0, e);
        assert_eq!(lhs_line(&one, &one, &slow, &cfg()).unwrap(), f64::INFINITY);
    }

    #[test]
    fn ratio_of_indicators_is_one() {
        let (_, _, _, lw) = balanced();
        let one = LineFunction::indicator(0.0, 1.0).unwrap();
        assert_relative_eq!(rhs_line(&one, &lw, 1, &cfg()).unwrap(), 1.0, max_relative = 1e-12);
        assert_relative_eq!(ratio(&one, &one, &lw, &cfg()).unwrap(), 1.0, max_relative = 1e-10);
        for c in [0.1, 7.0] {
            let r = ratio(&one.scaled(c), &one, &lw, &cfg()).unwrap();
            assert_relative_eq!(r, 1.0, max_relative = 1e-10);
        }
    }

    #[test]
    fn project_examples() {
        let geo = RadialGeometry::homogeneous(4.0, 1.0).unwrap();
        let f = LineFunction::power_trunc(-2.0, 1.0, 2.0).unwrap();
        let big_f = project(&f, &geo);
        for t in [0.5, 1.2, 1.9, 2.5] {
            let want = if (1.0..2.0).contains(&t) && t > 1.0 {
                t
            } else {
                0.0
            };
            assert_relative_eq!(big_f.eval(t), want, max_relative = 1e-14);
        }
        let h = RadialGeometry::hyperbolic(2.0).unwrap();
        let big_f = project(&LineFunction::indicator(0.0, 1.0).unwrap(), &h);
        let want = 2.0 * std::f64::consts::PI * 0.4f64.sinh();
        assert_relative_eq!(big_f.eval(0.4), want, max_relative = 1e-14);
        assert!(project(&LineFunction::Zero, &h).support().is_none());
    }

    #[test]
    fn lift_round_trip() {
        let (geo, w, e, _) = balanced();
        let big_f = LineFunction::power_trunc(0.5, 0.1, 10.0).unwrap();
        let f = lift(&big_f, &geo, &w, &e, 1).unwrap();
        let back = project(&f, &geo);
        for k in 0..50 {
            let t = 0.1 * 100f64.powf((k as f64 + 0.5) / 50.0);
            assert_relative_eq!(back.eval(t), big_f.eval(t), max_relative = 1e-12);
            // Ṽ ≡ 1 here, so the lift is F/Λ
            assert_relative_eq!(f.eval(t), big_f.eval(t) / t.powi(3), max_relative = 1e-12);
        }
    }

    #[test]
    fn lifted_rhs_matches() {
        let (geo, w, e, lw) = balanced();
        let big_f = LineFunction::power_trunc(0.3, 0.2, 5.0).unwrap();
        let f = lift(&big_f, &geo, &w, &e, 1).unwrap();
        let a = rhs_space(&f, &geo, &w.v1, 2.0, &cfg()).unwrap();
        let b = rhs_line(&big_f, &lw, 1, &cfg()).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-8);
    }

    #[test]
    fn space_lhs_of_projected_indicator() {
        let (geo, w, _, lw) = balanced();
        // f = 1_{(0,1)}/Λ projects to 1_{(0,1)}
        let f = LineFunction::Custom {
            ln_eval: Arc::new(|x: Abscissa| -3.0 * x.ln_t),
            lo: 0.0,
            hi: 1.0,
            zero_exponent: Some(-3.0),
        };
        let a = lhs_space(&f, &f, &geo, &w.u, 2.0, &cfg()).unwrap();
        let one = LineFunction::indicator(0.0, 1.0).unwrap();
        let b = lhs_line(&one, &one, &lw, &cfg()).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-9);
    }
}

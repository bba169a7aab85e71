//! Quadrature on `(0,T)`, `(T,∞)` and `(0,∞)` with divergence classification.
//!
//! Integrands are supplied as natural logarithms of nonnegative functions and are
//! evaluated at an [`Abscissa`] that carries both `t` and `ln t`. This keeps the engine
//! usable far outside the f64 range of `t` itself (exponential weights on hyperbolic
//! space, near-critical power singularities at the origin).
//!
//! The engine is double-exponential: finite pieces use the tanh-sinh rule, the
//! semi-infinite piece uses the exp-sinh rule, and refinement halves the step until two
//! successive levels agree. Endpoint behaviour is classified before any summation,
//! either from declared [`EndpointHints`] or by slope sniffing.

mod cumulative;
mod de;
mod pchip;
mod sniff;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub(crate) use cumulative::ln_unit_power_integral;
pub use cumulative::{Cumulative, Direction, MEMO_GRID_MAX, MEMO_GRID_MIN, MEMO_GRID_NODES};
pub use pchip::MonotoneCubic;
pub use sniff::{classify_endpoint, EndpointClass};

/// Width of the undecidable band around the critical exponent `-1` used by sniffing.
pub const GUARD_BAND: f64 = 0.02;

/// Tolerance used when comparing declared (symbolic) exponents against `-1`.
pub const EXPONENT_TOL: f64 = 1e-9;

/// Coverage factor `K`: a converged `Value(v, e)` brackets the true integral in
/// `[v - K e, v + K e]`.
pub const COVERAGE_FACTOR: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Endpoint {
    Zero,
    Infinity,
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::Zero => write!(f, "0"),
            Endpoint::Infinity => write!(f, "infinity"),
        }
    }
}

/// A point of `(0,∞)` given together with its logarithm.
///
/// `t` may underflow to zero or overflow to infinity while `ln_t` stays exact, so
/// evaluators should prefer `ln_t` for anything power-like.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Abscissa {
    pub t: f64,
    pub ln_t: f64,
}

impl Abscissa {
    pub fn new(t: f64) -> Self {
        Self { t, ln_t: t.ln() }
    }

    pub fn from_ln(ln_t: f64) -> Self {
        Self { t: ln_t.exp(), ln_t }
    }
}

/// `ln f` as a shareable closure. Must return `-inf` where `f = 0`.
pub type LnFn = Arc<dyn Fn(Abscissa) -> f64 + Send + Sync>;

/// Leading behaviour `C t^power e^{rate t}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Asymptote {
    pub power: f64,
    pub rate: f64,
}

impl Asymptote {
    pub const fn power(power: f64) -> Self {
        Self { power, rate: 0.0 }
    }

    pub const fn exponential(rate: f64, power: f64) -> Self {
        Self { power, rate }
    }

    pub fn add(self, other: Self) -> Self {
        Self {
            power: self.power + other.power,
            rate: self.rate + other.rate,
        }
    }

    pub fn scale(self, k: f64) -> Self {
        Self {
            power: self.power * k,
            rate: self.rate * k,
        }
    }

    pub fn is_exponential(&self) -> bool {
        self.rate.abs() > EXPONENT_TOL
    }

    pub fn integrable_at_infinity(&self) -> bool {
        if self.rate < -EXPONENT_TOL {
            true
        } else if self.rate > EXPONENT_TOL {
            false
        } else {
            self.power < -1.0 - EXPONENT_TOL
        }
    }
}

pub fn integrable_at_zero(power: f64) -> bool {
    power > -1.0 + EXPONENT_TOL
}

/// Declared endpoint behaviour of an integrand. `zero` is the power exponent at `0⁺`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EndpointHints {
    pub zero: Option<f64>,
    pub infinity: Option<Asymptote>,
}

impl EndpointHints {
    pub const NONE: Self = Self {
        zero: None,
        infinity: None,
    };

    pub fn new(zero: f64, infinity: Asymptote) -> Self {
        Self {
            zero: Some(zero),
            infinity: Some(infinity),
        }
    }

    /// Hints of a product of two functions.
    pub fn add(self, other: Self) -> Self {
        Self {
            zero: self.zero.zip(other.zero).map(|(a, b)| a + b),
            infinity: self.infinity.zip(other.infinity).map(|(a, b)| a.add(b)),
        }
    }

    /// Hints of `f^k`.
    pub fn scale(self, k: f64) -> Self {
        Self {
            zero: self.zero.map(|a| a * k),
            infinity: self.infinity.map(|a| a.scale(k)),
        }
    }
}

/// Relative width below which a finite interval is integrated by the midpoint rule.
const TINY_WIDTH: f64 = 1e-10;

/// Smallest `t` at which plain functions are evaluated directly.
const LINEAR_FLOOR: f64 = 1e-300;

/// A nonnegative integrand in log form, optionally with endpoint hints.
#[derive(Clone)]
pub struct LogIntegrand {
    ln_f: LnFn,
    pub hints: EndpointHints,
}

impl fmt::Debug for LogIntegrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LogIntegrand")
            .field("hints", &self.hints)
            .finish_non_exhaustive()
    }
}

impl LogIntegrand {
    pub fn new(ln_f: LnFn, hints: EndpointHints) -> Self {
        Self { ln_f, hints }
    }

    pub fn from_fn<F>(f: F, hints: EndpointHints) -> Self
    where
        F: Fn(Abscissa) -> f64 + Send + Sync + 'static,
    {
        Self::new(Arc::new(f), hints)
    }

    /// Wraps a plain (linear) nonnegative function.
    pub fn from_linear<F>(f: F, hints: EndpointHints) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::from_fn(
            move |a: Abscissa| {
                if a.t >= LINEAR_FLOOR {
                    return f(a.t).ln();
                }
                // Below the floor t itself is unreliable or zero; continue the local power law.
                let (l0, l1) = (f(LINEAR_FLOOR).ln(), f(LINEAR_FLOOR * 1e10).ln());
                if !(l0.is_finite() && l1.is_finite()) {
                    return l0;
                }
                let e = (l1 - l0) / 1e10f64.ln();
                l0 + e * (a.ln_t - LINEAR_FLOOR.ln())
            },
            hints,
        )
    }

    #[inline]
    pub fn ln_at(&self, a: Abscissa) -> f64 {
        (self.ln_f)(a)
    }

    #[inline]
    pub fn ln_at_t(&self, t: f64) -> f64 {
        (self.ln_f)(Abscissa::new(t))
    }

    pub fn ln_fn(&self) -> &LnFn {
        &self.ln_f
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum number of step halvings of the double-exponential rule.
    pub max_depth: u32,
    pub sniff_points: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_depth: 10,
            sniff_points: 12,
        }
    }
}

impl QuadConfig {
    pub fn validate(&self) -> crate::Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(crate::Error::Domain(
                "quadrature tolerances must be positive".into(),
            ));
        }
        if self.max_depth == 0 || self.sniff_points < 6 {
            return Err(crate::Error::Domain(
                "max_depth must be positive and sniff_points at least 6".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum QuadResult {
    Value { value: f64, err_estimate: f64 },
    Divergent(Endpoint),
    Undetermined(String),
}

impl QuadResult {
    pub fn value(&self) -> Option<f64> {
        match self {
            QuadResult::Value { value, .. } => Some(*value),
            _ => None,
        }
    }
}

/// Log-domain outcome: `ln_value` is `ln ∫ f` and `rel_err` its relative error estimate.
#[derive(Clone, Debug, PartialEq)]
pub enum LnQuad {
    Value { ln_value: f64, rel_err: f64 },
    Divergent(Endpoint),
    Undetermined(String),
}

impl LnQuad {
    /// `ln ∫ f`, with `+inf` for divergence.
    pub fn into_ln(self) -> crate::Result<f64> {
        match self {
            LnQuad::Value { ln_value, .. } => Ok(ln_value),
            LnQuad::Divergent(_) => Ok(f64::INFINITY),
            LnQuad::Undetermined(d) => Err(crate::Error::Quadrature(d)),
        }
    }
}

/// Integrates a nonnegative `f` over `(lo, hi)`; `hi` may be `f64::INFINITY`.
pub fn integrate<F>(f: F, lo: f64, hi: f64, cfg: &QuadConfig, hints: Option<EndpointHints>) -> QuadResult
where
    F: Fn(f64) -> f64 + Send + Sync + 'static,
{
    let integrand = LogIntegrand::from_linear(f, hints.unwrap_or_default());
    match integrate_impl(&integrand, lo, hi, cfg, cfg.abs_tol, Known::default()) {
        LnQuad::Value { ln_value, rel_err } => {
            let value = ln_value.exp();
            QuadResult::Value {
                value,
                err_estimate: value * rel_err,
            }
        }
        LnQuad::Divergent(e) => QuadResult::Divergent(e),
        LnQuad::Undetermined(d) => QuadResult::Undetermined(d),
    }
}

/// Integrates `exp(ln_f)` over `(lo, hi)` to relative accuracy `cfg.rel_tol`.
pub fn integrate_ln(integrand: &LogIntegrand, lo: f64, hi: f64, cfg: &QuadConfig) -> LnQuad {
    integrate_impl(integrand, lo, hi, cfg, 0.0, Known::default())
}

/// Endpoints already known to be integrable, so classification can be skipped.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Known {
    pub zero: bool,
    pub infinity: bool,
}

pub(crate) fn integrate_impl(
    integrand: &LogIntegrand,
    lo: f64,
    hi: f64,
    cfg: &QuadConfig,
    abs_tol: f64,
    known: Known,
) -> LnQuad {
    if !(lo >= 0.0) || hi.is_nan() || lo.is_infinite() {
        return LnQuad::Undetermined(format!("invalid range ({lo}, {hi})"));
    }
    if hi <= lo {
        return LnQuad::Value {
            ln_value: f64::NEG_INFINITY,
            rel_err: 0.0,
        };
    }

    if lo == 0.0 && !known.zero {
        match classify_endpoint(integrand, Endpoint::Zero, hi, cfg) {
            EndpointClass::Integrable => {}
            EndpointClass::Divergent => return LnQuad::Divergent(Endpoint::Zero),
            EndpointClass::Undetermined(d) => return LnQuad::Undetermined(format!("at 0: {d}")),
        }
    }
    if hi.is_infinite() && !known.infinity {
        match classify_endpoint(integrand, Endpoint::Infinity, lo, cfg) {
            EndpointClass::Integrable => {}
            EndpointClass::Divergent => return LnQuad::Divergent(Endpoint::Infinity),
            EndpointClass::Undetermined(d) => return LnQuad::Undetermined(format!("at infinity: {d}")),
        }
    }

    if hi.is_finite() && lo > 0.0 && hi - lo <= TINY_WIDTH * hi {
        // A few ulps wide: the rule's nodes would collapse, while the midpoint rule
        // is already exact to O(width²).
        let mid = Abscissa::new(0.5 * (lo + hi));
        let v = integrand.ln_at(mid);
        if v.is_nan() || v == f64::INFINITY {
            return LnQuad::Undetermined(format!("integrand is {v} at t = {:e}", mid.t));
        }
        return LnQuad::Value {
            ln_value: v + (hi - lo).ln(),
            rel_err: 0.0,
        };
    }

    let mut pieces = Vec::with_capacity(2);
    if hi.is_infinite() {
        let mut scale = if lo > 0.0 { lo } else { 1.0 };
        if let Some(a) = integrand.hints.infinity {
            if a.is_exponential() {
                scale = scale.min(1.0 / a.rate.abs());
            }
        }
        pieces.push(de::Map::tail(lo, scale));
    } else if lo == 0.0 {
        if hi <= 1.0 {
            pieces.push(de::Map::Finite { lo: 0.0, hi });
        } else {
            pieces.push(de::Map::Finite { lo: 0.0, hi: 1.0 });
            pieces.push(de::Map::log_finite(1.0, hi));
        }
    } else if hi / lo > 4.0 {
        pieces.push(de::Map::log_finite(lo, hi));
    } else {
        pieces.push(de::Map::Finite { lo, hi });
    }

    let mut acc = LogSum::default();
    let mut err_acc = LogSum::default();
    for map in &pieces {
        match de::integrate(map, integrand, cfg, abs_tol) {
            Ok(out) => {
                acc.add(out.ln_value);
                if out.rel_err > 0.0 {
                    err_acc.add(out.ln_value + out.rel_err.ln());
                }
            }
            Err(d) => return LnQuad::Undetermined(d),
        }
    }
    let ln_value = acc.ln();
    let rel_err = if ln_value == f64::NEG_INFINITY {
        0.0
    } else {
        (err_acc.ln() - ln_value).exp()
    };
    LnQuad::Value { ln_value, rel_err }
}

/// Running `ln Σ exp(x_i)` without overflow.
#[derive(Clone, Copy, Debug)]
pub(crate) struct LogSum {
    max: f64,
    scaled: f64,
}

impl Default for LogSum {
    fn default() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }
}

impl LogSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x > self.max {
            self.scaled = self.scaled * (self.max - x).exp() + 1.0;
            self.max = x;
        } else {
            self.scaled += (x - self.max).exp();
        }
    }

    pub fn ln(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled.ln()
        }
    }
}

/// `ln(e^a + e^b)`.
pub fn ln_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    if hi == f64::INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(1 + e^z)`.
#[inline]
pub(crate) fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Numerically stable `ln sinh x` for `x > 0`, usable when `x` itself is subnormal
/// (pass `ln_x`) or infinite.
pub fn ln_sinh(x: f64, ln_x: f64) -> f64 {
    if x < 1e-5 {
        ln_x + x * x / 6.0
    } else if x < 20.0 {
        x.sinh().ln()
    } else if x.is_infinite() {
        f64::INFINITY
    } else {
        x - std::f64::consts::LN_2 + (-(-2.0 * x).exp()).ln_1p()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn power_on_unit_tail() {
        let r = integrate(|t| t.powi(-3), 1.0, f64::INFINITY, &QuadConfig::default(), None);
        assert_relative_eq!(r.value().unwrap(), 0.5, max_relative = 1e-12);
    }

    #[test]
    fn reciprocal_diverges_at_zero() {
        let r = integrate(|t| 1.0 / t, 0.0, 1.0, &QuadConfig::default(), None);
        assert_eq!(r, QuadResult::Divergent(Endpoint::Zero));
    }

    #[test]
    fn reciprocal_sinh_tail() {
        // ∫_1^∞ dt / sinh t = 2 artanh(e^{-1})
        let exact = 2.0 * (-1.0f64).exp().atanh();
        assert_relative_eq!(exact, 0.7719, epsilon = 1e-4);
        let r = integrate(
            |t| 1.0 / t.sinh(),
            1.0,
            f64::INFINITY,
            &QuadConfig::default(),
            None,
        );
        assert_relative_eq!(r.value().unwrap(), exact, max_relative = 1e-10);
    }

    #[test]
    fn near_critical_singularity_with_hint() {
        // ∫_0^1 t^{-0.99} dt = 100, most of the mass far below f64's range of t.
        let hints = EndpointHints {
            zero: Some(-0.99),
            infinity: None,
        };
        let f = LogIntegrand::from_fn(|a: Abscissa| -0.99 * a.ln_t, hints);
        let r = integrate_ln(&f, 0.0, 1.0, &QuadConfig::default());
        let LnQuad::Value { ln_value, .. } = r else {
            panic!("{r:?}")
        };
        assert_relative_eq!(ln_value.exp(), 100.0, max_relative = 1e-9);
    }

    #[test]
    fn guard_band_is_undetermined_without_hints() {
        let r = integrate(|t| t.powf(-1.005), 0.0, 1.0, &QuadConfig::default(), None);
        assert!(matches!(r, QuadResult::Undetermined(_)), "{r:?}");
    }

    #[test]
    fn ln_sinh_regimes() {
        for &x in &[1e-300f64, 1e-8, 0.3, 5.0, 19.99, 20.01, 300.0] {
            let direct = if x < 700.0 { x.sinh().ln() } else { f64::NAN };
            if direct.is_finite() {
                assert_relative_eq!(ln_sinh(x, x.ln()), direct, max_relative = 1e-13);
            }
        }
        assert_relative_eq!(ln_sinh(1e4, 1e4f64.ln()), 1e4 - std::f64::consts::LN_2);
    }

    #[test]
    fn log_sum_matches_direct() {
        let mut s = LogSum::default();
        for x in [0.1f64, 3.0, 2.0, 0.5] {
            s.add(x.ln());
        }
        assert_relative_eq!(s.ln().exp(), 5.6, max_relative = 1e-14);
    }
}

//! Radial weights, the reduced line weights and their cumulative kernels.
//!
//! For a radial weight triple `(u, v1, v2)` on a geometry with surface density `Λ`:
//!
//! * `Ũ(τ) = u(τ) Λ(τ)`
//! * `W_i(τ) = v_i(τ)^{1-p_i'} Λ(τ)`, which is `Ṽ_i^{1-p_i'}`; hence `Ṽ_i = W_i^{1-p_i}`
//! * `U1(t) = ∫_t^∞ Ũ` and `V1i(t) = ∫_0^t W_i`
//!
//! Everything is carried in logarithms.

use std::fmt;
use std::sync::Arc;

use crate::conditions::ExponentSystem;
use crate::geometry::RadialGeometry;
use crate::quad::{
    ln_sinh, Abscissa, Asymptote, Cumulative, Direction, EndpointHints, LnFn, LogIntegrand, QuadConfig,
};
use crate::{Error, Result};

#[derive(Clone)]
pub enum RadialWeight {
    /// `r^alpha`
    Power {
        alpha: f64,
    },
    /// `sinh(scale·r)^alpha`
    SinhPower {
        alpha: f64,
        scale: f64,
    },
    Custom(CustomWeight),
}

/// A user-supplied weight, given by `ln w`.
#[derive(Clone)]
pub struct CustomWeight {
    pub name: String,
    pub ln_eval: LnFn,
    /// Declared endpoint behaviour; `None` leaves classification to slope sniffing.
    pub hints: Option<EndpointHints>,
}

impl fmt::Debug for RadialWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RadialWeight::Power { alpha } => write!(f, "r^{alpha}"),
            RadialWeight::SinhPower { alpha, scale } => write!(f, "sinh({scale} r)^{alpha}"),
            RadialWeight::Custom(c) => write!(f, "custom({})", c.name),
        }
    }
}

impl RadialWeight {
    pub fn power(alpha: f64) -> Self {
        RadialWeight::Power { alpha }
    }

    pub fn sinh_power(alpha: f64, scale: f64) -> Self {
        RadialWeight::SinhPower { alpha, scale }
    }

    pub fn custom<F>(name: &str, ln_eval: F, hints: Option<EndpointHints>) -> Self
    where
        F: Fn(Abscissa) -> f64 + Send + Sync + 'static,
    {
        RadialWeight::Custom(CustomWeight {
            name: name.to_owned(),
            ln_eval: Arc::new(ln_eval),
            hints,
        })
    }

    /// `r^a (1+r)^b`
    pub fn broken_power(a: f64, b: f64, declare_hints: bool) -> Self {
        let hints = declare_hints.then(|| EndpointHints::new(a, Asymptote::power(a + b)));
        Self::custom(
            "broken_power",
            move |r: Abscissa| {
                let ln_1p = if r.ln_t > 40.0 {
                    r.ln_t + (-r.ln_t).exp()
                } else {
                    r.t.ln_1p()
                };
                a * r.ln_t + b * ln_1p
            },
            hints,
        )
    }

    /// `r^a e^{-c r}`
    pub fn power_exp(a: f64, c: f64, declare_hints: bool) -> Self {
        let hints = declare_hints.then(|| EndpointHints::new(a, Asymptote::exponential(-c, a)));
        Self::custom("power_exp", move |r: Abscissa| a * r.ln_t - c * r.t, hints)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            RadialWeight::Power { alpha } if !alpha.is_finite() => Err(Error::Domain(format!(
                "power exponent must be finite, got {alpha}"
            ))),
            RadialWeight::SinhPower { alpha, scale } if !(alpha.is_finite() && *scale > 0.0) => {
                Err(Error::Domain(format!(
                    "sinh-power weight needs a finite exponent and positive scale, got ({alpha}, {scale})"
                )))
            }
            _ => Ok(()),
        }
    }

    pub fn ln_at(&self, r: Abscissa) -> f64 {
        match self {
            RadialWeight::Power { alpha } => alpha * r.ln_t,
            RadialWeight::SinhPower { alpha, scale } => alpha * ln_sinh(scale * r.t, scale.ln() + r.ln_t),
            RadialWeight::Custom(c) => (c.ln_eval)(r),
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.ln_at(Abscissa::new(r)).exp()
    }

    pub fn hints(&self) -> Option<EndpointHints> {
        match *self {
            RadialWeight::Power { alpha } => Some(EndpointHints::new(alpha, Asymptote::power(alpha))),
            RadialWeight::SinhPower { alpha, scale } => Some(EndpointHints::new(
                alpha,
                Asymptote::exponential(alpha * scale, 0.0),
            )),
            RadialWeight::Custom(ref c) => c.hints,
        }
    }

    pub fn as_power(&self) -> Option<f64> {
        match *self {
            RadialWeight::Power { alpha } => Some(alpha),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct WeightTriple {
    pub u: RadialWeight,
    pub v1: RadialWeight,
    pub v2: RadialWeight,
}

impl WeightTriple {
    pub fn new(u: RadialWeight, v1: RadialWeight, v2: RadialWeight) -> Self {
        Self { u, v1, v2 }
    }

    pub fn powers(alpha: f64, beta1: f64, beta2: f64) -> Self {
        Self::new(
            RadialWeight::power(alpha),
            RadialWeight::power(beta1),
            RadialWeight::power(beta2),
        )
    }

    pub fn v(&self, i: usize) -> &RadialWeight {
        match i {
            1 => &self.v1,
            2 => &self.v2,
            _ => panic!("index must be 1 or 2"),
        }
    }

    /// `(u, v2, v1)`
    pub fn swapped(&self) -> Self {
        Self::new(self.u.clone(), self.v2.clone(), self.v1.clone())
    }
}

/// Line weights `Ũ` and `W_i = Ṽ_i^{1-p_i'}` of the reduced one-dimensional problem.
#[derive(Clone, Debug)]
pub struct LineWeights {
    pub exps: ExponentSystem,
    u_tilde: LogIntegrand,
    w: [LogIntegrand; 2],
}

impl LineWeights {
    /// Line weights given directly on the half-line.
    pub fn from_line(
        u_tilde: LogIntegrand,
        w1: LogIntegrand,
        w2: LogIntegrand,
        exps: ExponentSystem,
    ) -> Self {
        Self {
            exps,
            u_tilde,
            w: [w1, w2],
        }
    }

    /// Line weights with `Ũ = t^a` and `W_i = t^{b_i}`.
    pub fn powers(a: f64, b1: f64, b2: f64, exps: ExponentSystem) -> Self {
        let pw = |e: f64| {
            LogIntegrand::from_fn(
                move |x: Abscissa| e * x.ln_t,
                EndpointHints::new(e, Asymptote::power(e)),
            )
        };
        Self::from_line(pw(a), pw(b1), pw(b2), exps)
    }

    pub fn u_tilde(&self) -> &LogIntegrand {
        &self.u_tilde
    }

    /// `Ṽ_i^{1-p_i'} = v_i^{1-p_i'} Λ`
    pub fn w(&self, i: usize) -> &LogIntegrand {
        &self.w[i - 1]
    }

    /// `ln Ṽ_i = (1 - p_i) ln W_i`
    pub fn ln_v_tilde(&self, i: usize, t: Abscissa) -> f64 {
        (1.0 - self.exps.p(i)) * self.w(i).ln_at(t)
    }

    /// Exchanges the roles of the indices, including the exponents.
    pub fn swapped(&self) -> Self {
        Self {
            exps: self.exps.swapped(),
            u_tilde: self.u_tilde.clone(),
            w: [self.w[1].clone(), self.w[0].clone()],
        }
    }
}

pub fn build_line_weights(
    geo: &RadialGeometry,
    w: &WeightTriple,
    exps: ExponentSystem,
) -> Result<LineWeights> {
    let exps = ExponentSystem::new(exps.p1, exps.p2, exps.q)?;
    geo.validated()?;
    for wt in [&w.u, &w.v1, &w.v2] {
        wt.validate()?;
    }
    let lam_hints = geo.hints();
    let combine = |h: Option<EndpointHints>, k: f64| h.map(|h| h.scale(k).add(lam_hints));

    let g = *geo;
    let u = w.u.clone();
    let u_tilde = LogIntegrand::from_fn(
        move |a: Abscissa| u.ln_at(a) + g.ln_surface_density(a),
        combine(w.u.hints(), 1.0).unwrap_or_default(),
    );
    let line_w = |i: usize| {
        let v = w.v(i).clone();
        let e = 1.0 - exps.p_conj(i);
        LogIntegrand::from_fn(
            move |a: Abscissa| e * v.ln_at(a) + g.ln_surface_density(a),
            combine(w.v(i).hints(), e).unwrap_or_default(),
        )
    };
    Ok(LineWeights::from_line(u_tilde, line_w(1), line_w(2), exps))
}

/// `U1 = ∫_t^∞ Ũ`, `V11 = ∫_0^t W_1`, `V12 = ∫_0^t W_2`, each possibly `+∞`.
#[derive(Clone, Debug)]
pub struct CumulativeKernels {
    pub u1: Arc<Cumulative>,
    pub v1: [Arc<Cumulative>; 2],
}

impl CumulativeKernels {
    pub fn v(&self, i: usize) -> &Cumulative {
        &self.v1[i - 1]
    }

    pub fn swapped(&self) -> Self {
        Self {
            u1: self.u1.clone(),
            v1: [self.v1[1].clone(), self.v1[0].clone()],
        }
    }
}

pub fn kernels(lw: &LineWeights, cfg: &QuadConfig) -> Result<CumulativeKernels> {
    let u1 = Cumulative::new(lw.u_tilde().clone(), Direction::Tail, cfg)?;
    let v11 = Cumulative::new(lw.w(1).clone(), Direction::Head, cfg)?;
    let v12 = Cumulative::new(lw.w(2).clone(), Direction::Head, cfg)?;
    Ok(CumulativeKernels {
        u1: Arc::new(u1),
        v1: [Arc::new(v11), Arc::new(v12)],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn q4() -> RadialGeometry {
        RadialGeometry::homogeneous(4.0, 1.0).unwrap()
    }

    #[test]
    fn reduced_weights_of_balanced_datum() {
        let exps = ExponentSystem::new(2.0, 2.0, 2.0).unwrap();
        let lw = build_line_weights(&q4(), &WeightTriple::powers(-6.0, 3.0, 3.0), exps).unwrap();
        for t in [0.1, 1.0, 10.0] {
            let a = Abscissa::new(t);
            assert_relative_eq!(lw.u_tilde().ln_at(a).exp(), t.powi(-3), max_relative = 1e-14);
            assert_relative_eq!(lw.w(1).ln_at(a).exp(), 1.0, epsilon = 1e-14);
            assert_relative_eq!(lw.ln_v_tilde(1, a).exp(), 1.0, epsilon = 1e-14);
        }
        assert_eq!(
            lw.u_tilde().hints,
            EndpointHints::new(-3.0, Asymptote::power(-3.0))
        );
    }

    #[test]
    fn hyperbolic_sinh_weight() {
        let geo = RadialGeometry::hyperbolic(2.0).unwrap();
        let alpha = -2.5;
        let w = WeightTriple::new(
            RadialWeight::sinh_power(alpha, 1.0),
            RadialWeight::power(0.0),
            RadialWeight::power(0.0),
        );
        let lw = build_line_weights(&geo, &w, ExponentSystem::new(2.0, 2.0, 2.0).unwrap()).unwrap();
        for t in [0.01f64, 0.7, 3.0, 25.0] {
            let exact = 2.0 * std::f64::consts::PI * t.sinh().powf(alpha + 1.0);
            assert_relative_eq!(lw.u_tilde().ln_at_t(t).exp(), exact, max_relative = 1e-13);
        }
    }

    #[test]
    fn kernel_examples() {
        let exps = ExponentSystem::new(2.0, 2.0, 2.0).unwrap();
        let cfg = QuadConfig::default();
        let k = kernels(&LineWeights::powers(-3.0, 0.0, 0.0, exps), &cfg).unwrap();
        assert_relative_eq!(k.u1.ln_at_t(2.0).exp(), 0.125, max_relative = 1e-9);
        assert_relative_eq!(k.v(1).ln_at_t(0.3).exp(), 0.3, max_relative = 1e-9);
        let k = kernels(&LineWeights::powers(-1.0, 0.0, 0.0, exps), &cfg).unwrap();
        assert!(k.u1.is_infinite());
    }

    #[test]
    fn custom_weights_evaluate() {
        let w = RadialWeight::broken_power(-1.0, 2.0, true);
        assert_relative_eq!(w.eval(3.0), 16.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(w.ln_at(Abscissa::from_ln(100.0)), 100.0, max_relative = 1e-12);
        let w = RadialWeight::power_exp(2.0, 0.5, false);
        assert_relative_eq!(w.eval(2.0), 4.0 * (-1.0f64).exp(), max_relative = 1e-14);
        assert!(w.hints().is_none());
    }
}

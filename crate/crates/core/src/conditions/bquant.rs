//! The weight quantities `B1`–`B6`, evaluated from tabulated kernels.
//!
//! All functions return `ln B`, with `+inf` for a divergent quantity.

use std::sync::Arc;

use super::sup::sup_over_t;
use crate::quad::{integrate_ln, Abscissa, Cumulative, Direction, LnQuad, LogIntegrand, QuadConfig};
use crate::weights::{CumulativeKernels, LineWeights};
use crate::{Error, Result};

/// Which outer exponent to use in `B6`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum B6Reading {
    /// `k/r2`, as displayed.
    Printed,
    /// `k/r1`, the reading that mirrors `B5` under `1 ↔ 2`.
    Symmetric,
}

/// `Π K_j^{c_j} · base`, in log form, with combined endpoint hints.
fn product(terms: &[(Arc<Cumulative>, f64)], base: &LogIntegrand) -> LogIntegrand {
    let mut hints = base.hints;
    for (k, c) in terms {
        hints = hints.add(k.hints().scale(*c));
    }
    let terms: Vec<_> = terms.to_vec();
    let base = base.clone();
    LogIntegrand::from_fn(
        move |a: Abscissa| {
            let mut s = base.ln_at(a);
            for (k, c) in &terms {
                s += c * k.ln_at(a);
            }
            s
        },
        hints,
    )
}

fn missing(what: &str) -> Error {
    Error::Exponent(format!("{what} is undefined for these exponents"))
}

/// `sup_t U1^{1/q} V11^{1/p1'} V12^{1/p2'}`
pub fn eval_b1(k: &CumulativeKernels, lw: &LineWeights) -> Result<f64> {
    let e = &lw.exps;
    if k.u1.is_infinite() || k.v(1).is_infinite() || k.v(2).is_infinite() {
        return Ok(f64::INFINITY);
    }
    let (c0, c1, c2) = (1.0 / e.q, 1.0 / e.p_conj(1), 1.0 / e.p_conj(2));
    let s = sup_over_t(|u| {
        let a = Abscissa::from_ln(u);
        Ok(c0 * k.u1.ln_at(a) + c1 * k.v(1).ln_at(a) + c2 * k.v(2).ln_at(a))
    })?;
    Ok(s.ln_value)
}

/// `T_j(t) = ∫_t^∞ U1^{r_j/q} V1j^{r_j/q'} W_j`, or `None` when a factor is infinite.
pub fn inner_tail(
    k: &CumulativeKernels,
    lw: &LineWeights,
    j: usize,
    cfg: &QuadConfig,
) -> Result<Option<Cumulative>> {
    let e = &lw.exps;
    let r = e.r(j).ok_or_else(|| missing(&format!("r{j}")))?;
    let qc = e.q_conj().ok_or_else(|| missing("q'"))?;
    if k.u1.is_infinite() || k.v(j).is_infinite() {
        return Ok(None);
    }
    let g = product(&[(k.u1.clone(), r / e.q), (k.v1[j - 1].clone(), r / qc)], lw.w(j));
    let t = Cumulative::new(g, Direction::Tail, cfg)?;
    Ok((!t.is_infinite()).then_some(t))
}

/// `B2` for `(i, j) = (1, 2)`, `B3` for `(2, 1)`:
/// `sup_t V1i^{1/pi'}(t) (∫_t^∞ U1^{rj/q} V1j^{rj/q'} W_j)^{1/rj}`.
fn eval_b23(k: &CumulativeKernels, lw: &LineWeights, i: usize, j: usize, cfg: &QuadConfig) -> Result<f64> {
    let e = &lw.exps;
    let r = e.r(j).ok_or_else(|| missing(&format!("r{j}")))?;
    if k.v(i).is_infinite() {
        return Ok(f64::INFINITY);
    }
    let Some(t) = inner_tail(k, lw, j, cfg)? else {
        return Ok(f64::INFINITY);
    };
    let ci = 1.0 / e.p_conj(i);
    let s = sup_over_t(|u| {
        let a = Abscissa::from_ln(u);
        Ok(ci * k.v(i).ln_at(a) + t.ln_at(a) / r)
    })?;
    Ok(s.ln_value)
}

pub fn eval_b2(k: &CumulativeKernels, lw: &LineWeights, cfg: &QuadConfig) -> Result<f64> {
    eval_b23(k, lw, 1, 2, cfg)
}

pub fn eval_b3(k: &CumulativeKernels, lw: &LineWeights, cfg: &QuadConfig) -> Result<f64> {
    eval_b23(k, lw, 2, 1, cfg)
}

fn outer_integral(g: &LogIntegrand, root: f64, cfg: &QuadConfig) -> Result<f64> {
    match integrate_ln(g, 0.0, f64::INFINITY, cfg) {
        LnQuad::Value { ln_value, .. } => Ok(ln_value / root),
        LnQuad::Divergent(_) => Ok(f64::INFINITY),
        LnQuad::Undetermined(d) => Err(Error::Quadrature(d)),
    }
}

/// `(∫_0^∞ U1^{k/p1+k/p2} V11^{k/p1'} V12^{k/p2'} Ũ)^{1/k}`
pub fn eval_b4(k: &CumulativeKernels, lw: &LineWeights, cfg: &QuadConfig) -> Result<f64> {
    let e = &lw.exps;
    let kk = e.k().ok_or_else(|| missing("k"))?;
    if k.u1.is_infinite() || k.v(1).is_infinite() || k.v(2).is_infinite() {
        return Ok(f64::INFINITY);
    }
    let g = product(
        &[
            (k.u1.clone(), kk / e.p1 + kk / e.p2),
            (k.v1[0].clone(), kk / e.p_conj(1)),
            (k.v1[1].clone(), kk / e.p_conj(2)),
        ],
        lw.u_tilde(),
    );
    outer_integral(&g, kk, cfg)
}

/// `B5` for `(i, j) = (1, 2)`:
/// `(∫_0^∞ T_j^{k/s} V1i^{k/rj'} W_i)^{1/k}` with `s = rj`; `B6` is `(2, 1)` with
/// `s` chosen by the reading.
fn eval_b56(
    k: &CumulativeKernels,
    lw: &LineWeights,
    i: usize,
    j: usize,
    outer_r: f64,
    cfg: &QuadConfig,
) -> Result<f64> {
    let e = &lw.exps;
    let kk = e.k().ok_or_else(|| missing("k"))?;
    let rj = e.r(j).ok_or_else(|| missing(&format!("r{j}")))?;
    let rj_conj = rj / (rj - 1.0);
    if k.v(i).is_infinite() {
        return Ok(f64::INFINITY);
    }
    let Some(t) = inner_tail(k, lw, j, cfg)? else {
        return Ok(f64::INFINITY);
    };
    let g = product(
        &[(Arc::new(t), kk / outer_r), (k.v1[i - 1].clone(), kk / rj_conj)],
        lw.w(i),
    );
    outer_integral(&g, kk, cfg)
}

pub fn eval_b5(k: &CumulativeKernels, lw: &LineWeights, cfg: &QuadConfig) -> Result<f64> {
    let r2 = lw.exps.r(2).ok_or_else(|| missing("r2"))?;
    eval_b56(k, lw, 1, 2, r2, cfg)
}

pub fn eval_b6(k: &CumulativeKernels, lw: &LineWeights, reading: B6Reading, cfg: &QuadConfig) -> Result<f64> {
    let s = match reading {
        B6Reading::Printed => lw.exps.r(2).ok_or_else(|| missing("r2"))?,
        B6Reading::Symmetric => lw.exps.r(1).ok_or_else(|| missing("r1"))?,
    };
    eval_b56(k, lw, 2, 1, s, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::ExponentSystem;
    use crate::weights::kernels;
    use approx::assert_relative_eq;

    fn setup(a: f64, b1: f64, b2: f64, p1: f64, p2: f64, q: f64) -> (CumulativeKernels, LineWeights) {
        let e = ExponentSystem::new(p1, p2, q).unwrap();
        let lw = LineWeights::powers(a, b1, b2, e);
        (kernels(&lw, &QuadConfig::default()).unwrap(), lw)
    }

    #[test]
    fn b1_closed_form() {
        let (k, lw) = setup(-3.0, 0.0, 0.0, 2.0, 2.0, 2.0);
        assert_relative_eq!(
            eval_b1(&k, &lw).unwrap().exp(),
            0.5f64.sqrt(),
            max_relative = 1e-9
        );
        let (k, lw) = setup(-5.0, 0.0, 0.0, 2.0, 2.0, 2.0);
        assert_eq!(eval_b1(&k, &lw).unwrap(), f64::INFINITY);
    }

    #[test]
    fn b2_unbalanced_is_infinite() {
        // inner = 1/(4t), B2 = sup t^{1/4}/√2
        let cfg = QuadConfig::default();
        let (k, lw) = setup(-3.0, 0.0, 0.0, 2.0, 4.0, 2.0);
        let t = inner_tail(&k, &lw, 2, &cfg).unwrap().unwrap();
        assert_relative_eq!(t.ln_at_t(3.0).exp(), 1.0 / 12.0, max_relative = 1e-9);
        assert_eq!(eval_b2(&k, &lw, &cfg).unwrap(), f64::INFINITY);
    }

    #[test]
    fn b2_balanced_power() {
        // Ũ = s^{-4}, W1 = 1, W2 = s^{b}; p1 = 2, p2 = 4, q = 2, r2 = 4, q' = 2.
        // U1 = s^{-3}/3, V12 = s^{b+1}/(b+1); inner integrand s^{-6} s^{2(b+1)} s^b /(9 (b+1)^2)
        // exponent 3b - 4; tail ∝ t^{3b-3}; B2 ∝ t^{1/2} t^{(3b-3)/4}: balanced at b = 1/3.
        let cfg = QuadConfig::default();
        let b = 1.0 / 3.0;
        let (k, lw) = setup(-4.0, 0.0, b, 2.0, 4.0, 2.0);
        let c = 1.0 / (9.0 * (b + 1.0) * (b + 1.0) * (3.0 - 3.0 * b));
        let exact = c.powf(0.25);
        assert_relative_eq!(eval_b2(&k, &lw, &cfg).unwrap().exp(), exact, max_relative = 1e-8);
    }

    #[test]
    fn symmetric_data_b2_equals_b3() {
        let cfg = QuadConfig::default();
        let (k, lw) = setup(-4.0, 0.5, 0.5, 3.0, 3.0, 2.0);
        let b2 = eval_b2(&k, &lw, &cfg).unwrap();
        let b3 = eval_b3(&k, &lw, &cfg).unwrap();
        assert_eq!(b2, b3);
    }
}

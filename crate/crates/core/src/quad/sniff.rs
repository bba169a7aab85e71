//! Endpoint classification: declared hints first, slope sniffing otherwise.

use super::{integrable_at_zero, Abscissa, Asymptote, Endpoint, LogIntegrand, QuadConfig, GUARD_BAND};

/// Samples are spaced by this many decades.
const DECADES_PER_STEP: f64 = 1.5;
/// Maximum spread of the deepest slopes for a power-law verdict.
const SLOPE_SPREAD: f64 = 0.02;
const TAIL_SLOPES: usize = 4;
/// Slopes this close to `-1` on every deep segment are read as an exact `t^{-1}`.
const CRITICAL_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub enum EndpointClass {
    Integrable,
    Divergent,
    Undetermined(String),
}

/// Decides whether `f` is integrable near `endpoint`. `anchor` is the other end of the
/// range and bounds where samples may be taken.
pub fn classify_endpoint(
    f: &LogIntegrand,
    endpoint: Endpoint,
    anchor: f64,
    cfg: &QuadConfig,
) -> EndpointClass {
    match endpoint {
        Endpoint::Zero => {
            if let Some(a) = f.hints.zero {
                return if integrable_at_zero(a) {
                    EndpointClass::Integrable
                } else {
                    EndpointClass::Divergent
                };
            }
        }
        Endpoint::Infinity => {
            if let Some(a) = f.hints.infinity {
                return if a.integrable_at_infinity() {
                    EndpointClass::Integrable
                } else {
                    EndpointClass::Divergent
                };
            }
        }
    }
    let s = sample(f, endpoint, anchor, cfg.sniff_points);
    verdict(&s, endpoint)
}

/// Estimates the leading behaviour of `f` at `endpoint` from samples.
pub(crate) fn estimate_asymptote(
    f: &LogIntegrand,
    endpoint: Endpoint,
    anchor: f64,
    cfg: &QuadConfig,
) -> Option<Asymptote> {
    let s = sample(f, endpoint, anchor, cfg.sniff_points);
    let slopes = s.slopes();
    if slopes.len() < TAIL_SLOPES {
        return None;
    }
    let deep = &slopes[slopes.len() - TAIL_SLOPES..];
    let (lo, hi) = min_max(deep);
    if hi - lo <= SLOPE_SPREAD {
        return Some(Asymptote::power(mean(deep)));
    }
    if endpoint == Endpoint::Infinity {
        let rates = s.rates();
        let deep = &rates[rates.len() - TAIL_SLOPES..];
        let (lo, hi) = min_max(deep);
        let m = mean(deep);
        if m != 0.0 && (hi - lo) <= SLOPE_SPREAD * m.abs() {
            return Some(Asymptote::exponential(m, 0.0));
        }
    }
    None
}

struct Samples {
    ln_t: Vec<f64>,
    t: Vec<f64>,
    ln_f: Vec<f64>,
}

impl Samples {
    fn slopes(&self) -> Vec<f64> {
        (1..self.ln_f.len())
            .map(|j| (self.ln_f[j] - self.ln_f[j - 1]) / (self.ln_t[j] - self.ln_t[j - 1]))
            .collect()
    }

    fn rates(&self) -> Vec<f64> {
        (1..self.ln_f.len())
            .map(|j| (self.ln_f[j] - self.ln_f[j - 1]) / (self.t[j] - self.t[j - 1]))
            .collect()
    }
}

fn sample(f: &LogIntegrand, endpoint: Endpoint, anchor: f64, n: usize) -> Samples {
    let step = DECADES_PER_STEP * std::f64::consts::LN_10;
    let (start, dir) = match endpoint {
        Endpoint::Zero => ((anchor.min(1.0) * 0.1).ln(), -1.0),
        Endpoint::Infinity => ((anchor.max(1.0) * 10.0).ln(), 1.0),
    };
    let mut s = Samples {
        ln_t: Vec::with_capacity(n),
        t: Vec::with_capacity(n),
        ln_f: Vec::with_capacity(n),
    };
    for j in 0..n {
        let a = Abscissa::from_ln(start + dir * step * j as f64);
        s.ln_t.push(a.ln_t);
        s.t.push(a.t);
        s.ln_f.push(f.ln_at(a));
    }
    s
}

fn verdict(s: &Samples, endpoint: Endpoint) -> EndpointClass {
    let n = s.ln_f.len();
    if s.ln_f.iter().any(|v| v.is_nan()) {
        return EndpointClass::Undetermined("integrand is NaN near the endpoint".into());
    }
    let deep = &s.ln_f[n - TAIL_SLOPES..];
    if deep.iter().all(|v| *v == f64::NEG_INFINITY) {
        // identically zero near the endpoint
        return EndpointClass::Integrable;
    }
    if deep.contains(&f64::INFINITY) {
        return EndpointClass::Divergent;
    }
    if deep.iter().any(|v| v.is_infinite()) {
        // A decaying function that underflows stays at zero from then on.
        let first_zero = s.ln_f.iter().position(|v| *v == f64::NEG_INFINITY).unwrap();
        let zero_after = s.ln_f[first_zero..].iter().all(|v| *v == f64::NEG_INFINITY);
        let finite = &s.ln_f[..first_zero];
        let decaying = finite.len() >= 2 && finite[finite.len() - 1] < finite[finite.len() - 2];
        if zero_after && decaying {
            return EndpointClass::Integrable;
        }
        return EndpointClass::Undetermined("integrand vanishes intermittently".into());
    }

    // Integrability threshold on the slope d ln f / d ln t.
    let sign = match endpoint {
        Endpoint::Zero => 1.0,
        Endpoint::Infinity => -1.0,
    };
    let slopes = s.slopes();
    let deep = &slopes[slopes.len() - TAIL_SLOPES..];
    let (lo, hi) = min_max(deep);
    let classify = |slope_lo: f64, slope_hi: f64| {
        // Zero: integrable iff slope > -1. Infinity: iff slope < -1.
        let (good, bad) = if sign > 0.0 {
            (slope_lo >= -1.0 + GUARD_BAND, slope_hi <= -1.0 - GUARD_BAND)
        } else {
            (slope_hi <= -1.0 - GUARD_BAND, slope_lo >= -1.0 + GUARD_BAND)
        };
        if good {
            Some(EndpointClass::Integrable)
        } else if bad {
            Some(EndpointClass::Divergent)
        } else {
            None
        }
    };
    if hi - lo <= SLOPE_SPREAD {
        let m = mean(deep);
        if (lo + 1.0).abs() <= CRITICAL_TOL && (hi + 1.0).abs() <= CRITICAL_TOL {
            // a clean t^{-1}: logarithmic divergence
            return EndpointClass::Divergent;
        }
        return classify(m, m).unwrap_or_else(|| {
            EndpointClass::Undetermined(format!("log-log slope {m:.4} lies in the guard band around -1"))
        });
    }
    if endpoint == Endpoint::Infinity {
        let rates = s.rates();
        let deep = &rates[rates.len() - TAIL_SLOPES..];
        if deep.iter().all(|r| *r < 0.0) && hi < -1.0 - GUARD_BAND {
            return EndpointClass::Integrable;
        }
        if deep.iter().all(|r| *r > 0.0) {
            return EndpointClass::Divergent;
        }
    }
    // Slopes drift, but may still sit on one side of the threshold.
    classify(lo, hi).unwrap_or_else(|| {
        EndpointClass::Undetermined(format!(
            "log-log slopes inconsistent across scales (range {lo:.3}..{hi:.3})"
        ))
    })
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
        (a.min(x), b.max(x))
    })
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::EndpointHints;

    fn sniff(e: Endpoint, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> EndpointClass {
        let g = LogIntegrand::from_fn(move |a: Abscissa| f(a.t, a.ln_t), EndpointHints::NONE);
        classify_endpoint(&g, e, 1.0, &QuadConfig::default())
    }

    #[test]
    fn power_family_at_zero() {
        for (e, ok) in [
            (-2.0, false),
            (-1.1, false),
            (-0.9, true),
            (0.0, true),
            (3.0, true),
        ] {
            let want = if ok {
                EndpointClass::Integrable
            } else {
                EndpointClass::Divergent
            };
            assert_eq!(sniff(Endpoint::Zero, move |_, lt| e * lt), want, "e = {e}");
        }
    }

    #[test]
    fn exponentials_at_infinity() {
        assert_eq!(sniff(Endpoint::Infinity, |t, _| -t), EndpointClass::Integrable);
        assert_eq!(
            sniff(Endpoint::Infinity, |t, lt| 2.0 * t - 9.0 * lt),
            EndpointClass::Divergent
        );
        assert_eq!(
            sniff(Endpoint::Infinity, |t, lt| 30.0 * lt - 0.01 * t),
            EndpointClass::Integrable
        );
    }

    #[test]
    fn log_corrected_power_is_undetermined() {
        // t^{-1} (ln t)^{-1/2} diverges, but no finite sample can tell.
        let r = sniff(Endpoint::Infinity, |_, lt| -lt - 0.5 * lt.ln());
        assert!(matches!(r, EndpointClass::Undetermined(_)), "{r:?}");
    }

    #[test]
    fn estimate_recovers_power_and_rate() {
        let g = LogIntegrand::from_fn(|a: Abscissa| 2.5 * a.ln_t, EndpointHints::NONE);
        let a = estimate_asymptote(&g, Endpoint::Zero, 1.0, &QuadConfig::default()).unwrap();
        assert!((a.power - 2.5).abs() < 1e-12);
        let g = LogIntegrand::from_fn(|a: Abscissa| -3.0 * a.t, EndpointHints::NONE);
        let a = estimate_asymptote(&g, Endpoint::Infinity, 1.0, &QuadConfig::default()).unwrap();
        assert!((a.rate + 3.0).abs() < 1e-9);
    }
}

//! Empirical lower bounds on the best constant, dilation certificates and the
//! classical one-dimensional calibration.

mod simplex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classify::power_balance;
use crate::conditions::ExponentSystem;
use crate::geometry::{GeometryKind, RadialGeometry};
use crate::quad::{integrate_ln, EndpointHints, LnQuad, LogIntegrand, QuadConfig};
use crate::reduction::{ln_lhs_line, ln_ratio, LineFunction};
use crate::weights::{LineWeights, WeightTriple};
use crate::{Error, Result};

pub use simplex::{minimize, SimplexResult};

/// Below this a power balance counts as exactly zero.
pub const BALANCE_TOL: f64 = 1e-9;

/// Offset from the critical net power `-1` used for balance-informed starts.
const CRITICAL_OFFSET: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WitnessSearchConfig {
    /// Total number of ratio evaluations over all restarts.
    pub budget: usize,
    pub restarts: usize,
    /// Bounds for `(a1, a2, ln t_lo, w)` with `t_hi = t_lo e^w`.
    pub param_box: [[f64; 2]; 4],
    pub seed: u64,
}

impl Default for WitnessSearchConfig {
    fn default() -> Self {
        Self {
            budget: 2000,
            restarts: 8,
            param_box: [[-4.0, 4.0], [-4.0, 4.0], [-12.0, 6.0], [1e-3, 18.0]],
            seed: 0,
        }
    }
}

impl WitnessSearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.budget == 0 || self.restarts == 0 {
            return Err(Error::Domain("budget and restarts must be positive".into()));
        }
        for (i, b) in self.param_box.iter().enumerate() {
            if !(b[0].is_finite() && b[1].is_finite() && b[0] <= b[1]) {
                return Err(Error::Domain(format!(
                    "param_box[{i}] = {b:?} is not an interval"
                )));
            }
        }
        if self.param_box[3][0] <= 0.0 {
            return Err(Error::Domain(
                "the support width w must be bounded below by a positive number".into(),
            ));
        }
        Ok(())
    }
}

/// Parameters of the truncated-power pair `F_i = t^{a_i} 1_{(t_lo, t_hi)}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessParams {
    pub a1: f64,
    pub a2: f64,
    pub log_tlo: f64,
    pub log_thi: f64,
}

impl WitnessParams {
    fn from_box(x: &[f64]) -> Self {
        Self {
            a1: x[0],
            a2: x[1],
            log_tlo: x[2],
            log_thi: x[2] + x[3],
        }
    }

    pub fn functions(&self) -> Result<(LineFunction, LineFunction)> {
        let (lo, hi) = (self.log_tlo.exp(), self.log_thi.exp());
        Ok((
            LineFunction::power_trunc(self.a1, lo, hi)?,
            LineFunction::power_trunc(self.a2, lo, hi)?,
        ))
    }

    fn key(&self) -> [f64; 4] {
        [self.a1, self.a2, self.log_tlo, self.log_thi]
    }
}

/// One row of the search trace; `ratio` is absent for invalid evaluations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub eval_index: usize,
    pub a1: f64,
    pub a2: f64,
    pub log_tlo: f64,
    pub log_thi: f64,
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioWitness {
    pub ratio: f64,
    pub params: WitnessParams,
    pub evaluations: usize,
    #[serde(skip)]
    pub trace: Vec<TraceRow>,
}

/// Ratio of the truncated-power pair, a lower bound for the best constant.
pub fn witness_ratio(params: &WitnessParams, lw: &LineWeights, cfg: &QuadConfig) -> Result<f64> {
    let (f1, f2) = params.functions()?;
    Ok(ln_ratio(&f1, &f2, lw, cfg)?.exp())
}

/// Starting exponents putting `F_i^{p_i} Ṽ_i` at net power `-1 ± 0.1` near an endpoint.
fn balance_starts(lw: &LineWeights, bx: &[[f64; 2]; 4]) -> Vec<[f64; 4]> {
    let e = lw.exps;
    let a_for = |i: usize, w_power: f64, net: f64| {
        let p = e.p(i);
        (net - (1.0 - p) * w_power) / p
    };
    let mid = |j: usize| 0.5 * (bx[j][0] + bx[j][1]);
    let mut out = Vec::new();
    let (h1, h2) = (lw.w(1).hints, lw.w(2).hints);
    if let (Some(z1), Some(z2)) = (h1.zero, h2.zero) {
        let net = -1.0 + CRITICAL_OFFSET;
        out.push([a_for(1, z1, net), a_for(2, z2, net), bx[2][0], mid(3)]);
    }
    if let (Some(i1), Some(i2)) = (h1.infinity, h2.infinity) {
        if !i1.is_exponential() && !i2.is_exponential() {
            let net = -1.0 - CRITICAL_OFFSET;
            out.push([a_for(1, i1.power, net), a_for(2, i2.power, net), mid(2), bx[3][1]]);
        }
    }
    if let (Some(z1), Some(z2)) = (h1.zero, h2.zero) {
        let net = -1.0 + 3.0 * CRITICAL_OFFSET;
        out.push([a_for(1, z1, net), a_for(2, z2, net), bx[2][0], mid(3)]);
    }
    for s in &mut out {
        for (x, b) in s.iter_mut().zip(bx) {
            *x = x.clamp(b[0], b[1]);
        }
    }
    out
}

fn start_points(lw: &LineWeights, cfg: &WitnessSearchConfig) -> Vec<[f64; 4]> {
    let mut starts = balance_starts(lw, &cfg.param_box);
    starts.truncate(cfg.restarts);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    while starts.len() < cfg.restarts {
        let mut x = [0.0; 4];
        for (xi, b) in x.iter_mut().zip(&cfg.param_box) {
            *xi = if b[0] < b[1] {
                rng.gen_range(b[0]..=b[1])
            } else {
                b[0]
            };
        }
        starts.push(x);
    }
    starts
}

struct RunOutput {
    best: Option<(f64, WitnessParams)>,
    trace: Vec<TraceRow>,
}

fn run_restart(
    lw: &LineWeights,
    start: [f64; 4],
    budget: usize,
    bx: &[[f64; 2]; 4],
    qcfg: &QuadConfig,
) -> RunOutput {
    let mut trace = Vec::with_capacity(budget);
    let mut best: Option<(f64, WitnessParams)> = None;
    simplex::minimize(
        |x| {
            let p = WitnessParams::from_box(x);
            let r = witness_ratio(&p, lw, qcfg).ok().filter(|r| r.is_finite());
            trace.push(TraceRow {
                eval_index: 0,
                a1: p.a1,
                a2: p.a2,
                log_tlo: p.log_tlo,
                log_thi: p.log_thi,
                ratio: r,
            });
            match r {
                Some(r) => {
                    if best.is_none_or(|(b, bp)| better(r, &p, b, &bp)) {
                        best = Some((r, p));
                    }
                    -r.ln()
                }
                None => f64::INFINITY,
            }
        },
        &start,
        bx,
        0.1,
        budget,
        1e-12,
    );
    RunOutput { best, trace }
}

/// Larger ratio wins; ties go to the lexicographically smaller parameter vector.
fn better(r: f64, p: &WitnessParams, best: f64, bp: &WitnessParams) -> bool {
    if r != best {
        return r > best;
    }
    p.key()
        .iter()
        .zip(bp.key().iter())
        .map(|(a, b)| a.total_cmp(b))
        .find(|o| o.is_ne())
        .is_some_and(|o| o.is_lt())
}

/// Multi-start simplex search for the largest ratio over truncated-power pairs.
///
/// The evaluation budget is split evenly over the restarts. Results do not depend on
/// how restarts are scheduled.
pub fn search_best_ratio(
    lw: &LineWeights,
    cfg: &WitnessSearchConfig,
    qcfg: &QuadConfig,
) -> Result<RatioWitness> {
    cfg.validate()?;
    qcfg.validate()?;
    let starts = start_points(lw, cfg);
    let per = (cfg.budget / starts.len()).max(1);
    let bx = cfg.param_box;

    #[cfg(feature = "parallel")]
    let runs: Vec<RunOutput> = {
        use rayon::prelude::*;
        starts
            .par_iter()
            .map(|s| run_restart(lw, *s, per, &bx, qcfg))
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let runs: Vec<RunOutput> = starts
        .iter()
        .map(|s| run_restart(lw, *s, per, &bx, qcfg))
        .collect();

    let mut trace = Vec::new();
    let mut best: Option<(f64, WitnessParams)> = None;
    for run in runs {
        if let Some((r, p)) = run.best {
            if best.is_none_or(|(b, bp)| better(r, &p, b, &bp)) {
                best = Some((r, p));
            }
        }
        trace.extend(run.trace);
    }
    for (i, row) in trace.iter_mut().enumerate() {
        row.eval_index = i;
    }
    let (ratio, params) = best.ok_or_else(|| {
        Error::SearchFailure(format!(
            "all {} evaluations were invalid over the parameter box",
            trace.len()
        ))
    })?;
    Ok(RatioWitness {
        ratio,
        params,
        evaluations: trace.len(),
        trace,
    })
}

/// Exponent `s` with `ratio(F(·/λ)) = λ^s ratio(F)` for truncated powers on a
/// homogeneous space with power weights.
///
/// `s` equals the power balance and does not depend on the family exponents.
pub fn dilation_exponent(
    geo: &RadialGeometry,
    w: &WeightTriple,
    exps: &ExponentSystem,
    a1: f64,
    a2: f64,
) -> Result<f64> {
    if geo.kind != GeometryKind::Homogeneous {
        return Err(Error::Unsupported("dilation needs a homogeneous geometry".into()));
    }
    let (Some(alpha), Some(b1), Some(b2)) = (w.u.as_power(), w.v1.as_power(), w.v2.as_power()) else {
        return Err(Error::Unsupported("dilation needs power weights".into()));
    };
    if !(a1.is_finite() && a2.is_finite()) {
        return Err(Error::Domain("family exponents must be finite".into()));
    }
    let s = power_balance(geo.dim, alpha, b1, b2, exps);
    Ok(if s.abs() < BALANCE_TOL { 0.0 } else { s })
}

/// `∫_0^∞ (∫_0^x f)^p x^{ε-p} dx / ∫_0^∞ f^p x^ε dx` for `f = x^s 1_{(0,1)}`,
/// `s = (δ - 1 - ε)/p`, evaluated through the line pipeline.
pub fn classic_hardy_calibration(p: f64, eps: f64, delta: f64, cfg: &QuadConfig) -> Result<f64> {
    if !(p > 1.0 && eps < p - 1.0 && delta.is_finite()) {
        return Err(Error::Domain(format!(
            "need p > 1 and ε < p - 1, got p = {p}, ε = {eps}"
        )));
    }
    let s = (delta - 1.0 - eps) / p;
    let f = LineFunction::power_trunc(s, 0.0, 1.0)?;
    let den = LogIntegrand::from_fn(
        move |x| p * s * x.ln_t + eps * x.ln_t,
        EndpointHints {
            zero: Some(p * s + eps),
            infinity: None,
        },
    );
    let ln_den = match integrate_ln(&den, 0.0, 1.0, cfg) {
        LnQuad::Value { ln_value, .. } => ln_value,
        LnQuad::Divergent(_) => return Err(Error::Calibration("∫ f^p x^ε".into())),
        LnQuad::Undetermined(d) => return Err(Error::Quadrature(d)),
    };
    // (∫_0^x f)^p as the square of (∫_0^x f)^{p/2}, so the bilinear left side applies
    let half = p / 2.0;
    let exps = ExponentSystem::new(p, p, half)?;
    let w = eps - p;
    let lw = LineWeights::powers(w, 0.0, 0.0, exps);
    let ln_num = half * ln_lhs_line(&f, &f, &lw, cfg)?;
    if ln_num == f64::INFINITY {
        return Err(Error::Calibration("∫ (∫_0^x f)^p x^{ε-p}".into()));
    }
    Ok((ln_num - ln_den).exp())
}

/// Column names of the trace CSV.
pub fn trace_header() -> [&'static str; 6] {
    ["eval_index", "a1", "a2", "log_tlo", "log_thi", "ratio"]
}

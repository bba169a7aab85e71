use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use bihardy::classify::{classify, Outcome, PowerDatum, Verdict};
use bihardy::conditions::{eval_report, CaseId, ConditionReport, ExponentSystem};
use bihardy::geometry::RadialGeometry;
use bihardy::quad::QuadConfig;
use bihardy::reduction::{lhs_line, lhs_space, lift, project, rhs_line, rhs_space, LineFunction};
use bihardy::weights::{build_line_weights, WeightTriple};
use bihardy::witness::{classic_hardy_calibration, search_best_ratio, trace_header};

use crate::config::RunConfig;

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_FAILS: u8 = 2;
pub const EXIT_NOT_COVERED: u8 = 3;
pub const EXIT_UNKNOWN: u8 = 4;

const TRANSFER_TOL: f64 = 1e-6;
const ROUND_TRIP_TOL: f64 = 1e-12;

pub struct Output {
    pub json: bool,
    pub out: Option<std::path::PathBuf>,
}

impl Output {
    fn emit<T: Serialize>(&self, value: &T, table: impl FnOnce() -> String) -> Result<()> {
        if self.json {
            println!("{}", to_json(value)?);
        } else {
            print!("{}", table());
        }
        Ok(())
    }

    fn write_json<T: Serialize>(&self, value: &T) -> Result<()> {
        if let Some(p) = &self.out {
            std::fs::write(p, to_json(value)? + "\n").with_context(|| format!("writing {}", p.display()))?;
        }
        Ok(())
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

/// Five significant digits, `inf` for divergent values.
pub fn num(x: f64) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 || x.is_nan() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-4..6).contains(&mag) {
        return format!("{x:.4e}");
    }
    format!("{x:.*}", (4 - mag).max(0) as usize)
}

fn row(s: &mut String, key: &str, value: impl std::fmt::Display) {
    let _ = writeln!(s, "{key:<14}{value}");
}

pub fn check(cfg: &RunConfig, quad: &QuadConfig, out: &Output) -> Result<u8> {
    let geo = cfg.geometry()?;
    let exps = cfg.exponents()?;
    let w = cfg.weights(&geo)?;
    let report = eval_report(&geo, &w, exps, quad)?;
    out.write_json(&report)?;
    out.emit(&report, || report_table(&report))?;
    Ok(check_code(&report))
}

pub fn check_code(r: &ConditionReport) -> u8 {
    match r.case {
        CaseId::NotCovered { .. } => EXIT_NOT_COVERED,
        _ if !r.diagnostics.is_empty() => EXIT_ERROR,
        _ if r.holds => EXIT_OK,
        _ => EXIT_FAILS,
    }
}

fn report_table(r: &ConditionReport) -> String {
    let mut s = String::new();
    row(&mut s, "case", &r.case);
    for (name, v) in r.values() {
        let mark = if r.required.iter().any(|n| n == name) {
            ""
        } else {
            "  (not required)"
        };
        row(&mut s, name, format!("{}{mark}", num(v)));
    }
    if let Some((lo, hi)) = r.bracket() {
        row(&mut s, "bracket", format!("[{}, {}]", num(lo), num(hi)));
    }
    row(&mut s, "holds", r.holds);
    for n in &r.notes {
        row(&mut s, "note", n);
    }
    for d in &r.diagnostics {
        row(&mut s, "diagnostic", d);
    }
    s
}

#[derive(Serialize)]
struct SweepRow {
    alpha: f64,
    #[serde(flatten)]
    verdict: Verdict,
}

pub fn classify_cmd(cfg: &RunConfig, out: &Output) -> Result<u8> {
    let datum = cfg.power_datum()?;
    let sweep = &cfg.classify;
    match (sweep.alpha_range, sweep.grid) {
        (None, None) => {
            let v = classify(&datum);
            out.write_json(&v)?;
            out.emit(&v, || verdict_table(&v))?;
            Ok(verdict_code(&v))
        }
        (Some([lo, hi]), Some(n)) if n >= 2 && lo < hi => {
            let rows: Vec<SweepRow> = (0..n)
                .map(|k| {
                    let alpha = lo + (hi - lo) * k as f64 / (n - 1) as f64;
                    let verdict = classify(&PowerDatum { alpha, ..datum });
                    SweepRow { alpha, verdict }
                })
                .collect();
            out.write_json(&rows)?;
            out.emit(&rows, || {
                let mut s = String::new();
                for r in &rows {
                    row(&mut s, &num(r.alpha), verdict_line(&r.verdict));
                }
                s
            })?;
            Ok(EXIT_OK)
        }
        _ => bail!("classify: alpha_range = [lo, hi] with lo < hi and grid ≥ 2 must be given together"),
    }
}

pub fn verdict_code(v: &Verdict) -> u8 {
    match v.outcome {
        Outcome::Holds | Outcome::HoldsSufficient { .. } => EXIT_OK,
        Outcome::Fails { .. } => EXIT_FAILS,
        Outcome::NotCovered { .. } => EXIT_NOT_COVERED,
        Outcome::Unknown { .. } => EXIT_UNKNOWN,
    }
}

fn verdict_line(v: &Verdict) -> String {
    match &v.outcome {
        Outcome::Fails { violated, .. } => format!("fails: {}", violated.join(", ")),
        Outcome::HoldsSufficient { rule } => format!("holds by sufficient rule {rule}"),
        Outcome::Unknown { reason } => format!("unknown: {reason}"),
        Outcome::NotCovered { case } => format!("{case}"),
        Outcome::Holds => "holds".into(),
    }
}

fn verdict_table(v: &Verdict) -> String {
    let mut s = String::new();
    row(&mut s, "verdict", verdict_line(v));
    for c in &v.conditions {
        let ok = match c.satisfied {
            Some(true) => "ok",
            Some(false) => "violated",
            None => "borderline",
        };
        let _ = writeln!(
            s,
            "  {:<22}{:>12}  slack {:>12}  {ok}",
            c.name,
            num(c.value),
            num(c.slack)
        );
    }
    s
}

pub fn witness(
    cfg: &RunConfig,
    quad: &QuadConfig,
    search: &bihardy::witness::WitnessSearchConfig,
    out: &Output,
) -> Result<u8> {
    let geo = cfg.geometry()?;
    let exps = cfg.exponents()?;
    let w = cfg.weights(&geo)?;
    let lw = build_line_weights(&geo, &w, exps)?;
    let best = search_best_ratio(&lw, search, quad)?;
    if let Some(p) = &out.out {
        let mut csv = csv::Writer::from_path(p).with_context(|| format!("writing {}", p.display()))?;
        csv.write_record(trace_header())?;
        for r in &best.trace {
            csv.serialize((r.eval_index, r.a1, r.a2, r.log_tlo, r.log_thi, r.ratio))?;
        }
        csv.flush()?;
    }
    out.emit(&best, || {
        let mut s = String::new();
        row(&mut s, "ratio", num(best.ratio));
        row(
            &mut s,
            "a1, a2",
            format!("{}, {}", num(best.params.a1), num(best.params.a2)),
        );
        row(
            &mut s,
            "support",
            format!("(e^{}, e^{})", num(best.params.log_tlo), num(best.params.log_thi)),
        );
        row(&mut s, "evaluations", best.evaluations);
        s
    })?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub datum: String,
    pub pair: usize,
    pub identity: String,
    pub rel_err: f64,
    pub tol: f64,
    pub pass: bool,
}

struct Datum {
    name: String,
    geo: RadialGeometry,
    w: WeightTriple,
    exps: ExponentSystem,
}

fn default_suite() -> Result<Vec<Datum>> {
    use bihardy::weights::RadialWeight as W;
    Ok(vec![
        Datum {
            name: "homogeneous Q=4".into(),
            geo: RadialGeometry::homogeneous(4.0, 1.0)?,
            w: WeightTriple::powers(-6.0, 3.0, 3.0),
            exps: ExponentSystem::new(2.0, 2.0, 2.0)?,
        },
        Datum {
            name: "homogeneous Q=2.5".into(),
            geo: RadialGeometry::homogeneous(2.5, 0.7)?,
            w: WeightTriple::powers(-4.0, 0.5, -1.0),
            exps: ExponentSystem::new(1.5, 3.0, 2.5)?,
        },
        Datum {
            name: "hyperbolic n=3".into(),
            geo: RadialGeometry::hyperbolic(3.0)?,
            w: WeightTriple::new(
                W::sinh_power(-4.0, 1.0),
                W::sinh_power(0.5, 1.0),
                W::sinh_power(-0.5, 1.0),
            ),
            exps: ExponentSystem::new(2.0, 3.0, 2.5)?,
        },
        Datum {
            name: "Cartan-Hadamard n=2, b=2".into(),
            geo: RadialGeometry::cartan_hadamard(2.0, 2.0)?,
            w: WeightTriple::new(
                W::broken_power(-3.0, -1.0, true),
                W::power(0.5),
                W::power_exp(0.0, 0.3, true),
            ),
            exps: ExponentSystem::new(3.0, 2.0, 1.5)?,
        },
    ])
}

fn pairs() -> Vec<[LineFunction; 2]> {
    let pt = |a, lo, hi| LineFunction::power_trunc(a, lo, hi).expect("valid truncation");
    vec![
        [pt(0.5, 0.1, 10.0), pt(-0.3, 0.2, 5.0)],
        [pt(-1.2, 0.5, 3.0), pt(1.5, 0.05, 1.0)],
        [pt(0.0, 1.0, 40.0), pt(0.0, 2.0, 8.0)],
    ]
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn verify_datum(d: &Datum, quad: &QuadConfig) -> Result<Vec<IdentityCheck>> {
    let lw = build_line_weights(&d.geo, &d.w, d.exps)?;
    let mut out = Vec::new();
    let mut push = |pair: usize, identity: String, rel_err: f64, tol: f64| {
        out.push(IdentityCheck {
            datum: d.name.clone(),
            pair,
            identity,
            rel_err,
            tol,
            pass: rel_err <= tol,
        })
    };
    for (k, big) in pairs().iter().enumerate() {
        let f1 = lift(&big[0], &d.geo, &d.w, &d.exps, 1)?;
        let f2 = lift(&big[1], &d.geo, &d.w, &d.exps, 2)?;
        let ls = lhs_space(&f1, &f2, &d.geo, &d.w.u, d.exps.q, quad)?;
        let ll = lhs_line(&big[0], &big[1], &lw, quad)?;
        push(k, "lhs_space = lhs_line".into(), rel(ls, ll), TRANSFER_TOL);
        for (i, (f, g)) in [(&f1, &big[0]), (&f2, &big[1])].into_iter().enumerate() {
            let i = i + 1;
            let rs = rhs_space(f, &d.geo, d.w.v(i), d.exps.p(i), quad)?;
            let rl = rhs_line(g, &lw, i, quad)?;
            push(
                k,
                format!("rhs_space = rhs_line (F{i})"),
                rel(rs, rl),
                TRANSFER_TOL,
            );
            let back = project(f, &d.geo);
            let (lo, hi) = g.support().expect("truncated powers have a support");
            let worst = (0..50)
                .map(|j| {
                    let t = lo * (hi / lo).powf((j as f64 + 0.5) / 50.0);
                    rel(back.eval(t), g.eval(t))
                })
                .fold(0.0, f64::max);
            push(k, format!("project(lift F{i}) = F{i}"), worst, ROUND_TRIP_TOL);
        }
    }
    Ok(out)
}

pub fn reduce_verify(cfg: &RunConfig, quad: &QuadConfig, out: &Output) -> Result<u8> {
    let suite = if cfg.geometry.is_some() || cfg.weights.is_some() || cfg.exponents.is_some() {
        let geo = cfg.geometry()?;
        vec![Datum {
            name: "configured datum".into(),
            w: cfg.weights(&geo)?,
            exps: cfg.exponents()?,
            geo,
        }]
    } else {
        default_suite()?
    };
    let mut checks = Vec::new();
    for d in &suite {
        checks.extend(verify_datum(d, quad).with_context(|| d.name.clone())?);
    }
    out.write_json(&checks)?;
    out.emit(&checks, || {
        let mut s = String::new();
        for c in &checks {
            let verdict = if c.pass { "PASS" } else { "FAIL" };
            let _ = writeln!(
                s,
                "{verdict}  {:<26} pair {}  {:<30} rel err {:.1e}",
                c.datum, c.pair, c.identity, c.rel_err
            );
        }
        let passed = checks.iter().filter(|c| c.pass).count();
        let _ = writeln!(s, "{passed} of {} identities hold", checks.len());
        s
    })?;
    Ok(if checks.iter().all(|c| c.pass) {
        EXIT_OK
    } else {
        EXIT_FAILS
    })
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CalibrationRow {
    pub delta: f64,
    pub ratio: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CalibrationTable {
    pub p: f64,
    pub eps: f64,
    /// `(p/(p-1-ε))^p`
    pub ceiling: f64,
    pub rows: Vec<CalibrationRow>,
}

pub fn calibrate(cfg: &RunConfig, quad: &QuadConfig, out: &Output) -> Result<u8> {
    let c = &cfg.calibrate;
    if c.deltas.is_empty() {
        bail!("calibrate.deltas: at least one value needed");
    }
    let rows = c
        .deltas
        .iter()
        .map(|&delta| {
            let ratio =
                classic_hardy_calibration(c.p, c.eps, delta, quad).with_context(|| format!("δ = {delta}"))?;
            Ok(CalibrationRow { delta, ratio })
        })
        .collect::<Result<Vec<_>>>()?;
    let table = CalibrationTable {
        p: c.p,
        eps: c.eps,
        ceiling: (c.p / (c.p - 1.0 - c.eps)).powf(c.p),
        rows,
    };
    out.write_json(&table)?;
    out.emit(&table, || {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "p = {}, eps = {}, ceiling {}",
            table.p,
            table.eps,
            num(table.ceiling)
        );
        let _ = writeln!(s, "{:>10}  {:>10}  {:>8}", "delta", "ratio", "share");
        for r in &table.rows {
            let _ = writeln!(
                s,
                "{:>10}  {:>10}  {:>7.2}%",
                r.delta,
                num(r.ratio),
                100.0 * r.ratio / table.ceiling
            );
        }
        s
    })?;
    Ok(EXIT_OK)
}

pub fn load(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

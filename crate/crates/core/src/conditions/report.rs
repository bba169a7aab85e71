use serde::{Deserialize, Serialize};

use super::bquant::{eval_b1, eval_b2, eval_b3, eval_b4, eval_b5, eval_b6, B6Reading};
use super::{bracket_constant, CaseId, ExponentSystem};
use crate::geometry::RadialGeometry;
use crate::quad::QuadConfig;
use crate::weights::{build_line_weights, kernels, LineWeights, WeightTriple};
use crate::Result;

/// Outcome of the weight conditions for one datum.
///
/// Unevaluated quantities are `None`; divergent ones are `+∞` and serialize as `"inf"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub case: CaseId,
    #[serde(rename = "B1", with = "b_value")]
    pub b1: Option<f64>,
    #[serde(rename = "B2", with = "b_value")]
    pub b2: Option<f64>,
    #[serde(rename = "B3", with = "b_value")]
    pub b3: Option<f64>,
    #[serde(rename = "B4", with = "b_value")]
    pub b4: Option<f64>,
    #[serde(rename = "B5", with = "b_value")]
    pub b5: Option<f64>,
    /// `B6` with outer exponent `k/r2`, as displayed.
    #[serde(rename = "B6", with = "b_value")]
    pub b6: Option<f64>,
    /// `B6` with outer exponent `k/r1`.
    #[serde(rename = "B6_alt", with = "b_value")]
    pub b6_alt: Option<f64>,
    pub c_low: Option<f64>,
    pub c_high: Option<f64>,
    pub holds: bool,
    /// Quantities the active case requires to be finite.
    pub required: Vec<String>,
    pub notes: Vec<String>,
    pub diagnostics: Vec<String>,
}

impl ConditionReport {
    fn empty(case: CaseId) -> Self {
        Self {
            case,
            b1: None,
            b2: None,
            b3: None,
            b4: None,
            b5: None,
            b6: None,
            b6_alt: None,
            c_low: None,
            c_high: None,
            holds: false,
            required: Vec::new(),
            notes: Vec::new(),
            diagnostics: Vec::new(),
        }
    }

    pub fn bracket(&self) -> Option<(f64, f64)> {
        self.c_low.zip(self.c_high)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        match name {
            "B1" => self.b1,
            "B2" => self.b2,
            "B3" => self.b3,
            "B4" => self.b4,
            "B5" => self.b5,
            "B6" => self.b6,
            "B6_alt" => self.b6_alt,
            _ => None,
        }
    }

    /// `(name, value)` for every evaluated quantity.
    pub fn values(&self) -> Vec<(&'static str, f64)> {
        ["B1", "B2", "B3", "B4", "B5", "B6", "B6_alt"]
            .into_iter()
            .filter_map(|n| self.get(n).map(|v| (n, v)))
            .collect()
    }
}

/// Full pipeline for radial data: line weights, kernels, case, quantities, bracket.
pub fn eval_report(
    geo: &RadialGeometry,
    weights: &WeightTriple,
    exps: ExponentSystem,
    cfg: &QuadConfig,
) -> Result<ConditionReport> {
    let case = exps.dispatch();
    if let CaseId::NotCovered { reason } = &case {
        let mut r = ConditionReport::empty(case.clone());
        r.diagnostics.push(reason.clone());
        return Ok(r);
    }
    let lw = build_line_weights(geo, weights, exps)?;
    eval_report_line(&lw, cfg)
}

/// The same pipeline for weights given directly on the half-line.
pub fn eval_report_line(lw: &LineWeights, cfg: &QuadConfig) -> Result<ConditionReport> {
    cfg.validate()?;
    let case = lw.exps.dispatch();
    let mut r = ConditionReport::empty(case.clone());
    let lw = match case {
        CaseId::NotCovered { ref reason } => {
            r.diagnostics.push(reason.clone());
            return Ok(r);
        }
        CaseId::CaseII { swapped: true } => {
            r.notes
                .push("p2 ≤ q < p1: indices 1 and 2 exchanged; B values refer to the exchanged datum".into());
            lw.swapped()
        }
        _ => lw.clone(),
    };
    let k = kernels(&lw, cfg)?;
    let e = lw.exps;

    let mut eval = |name: &str, f: &dyn Fn() -> Result<f64>| -> Option<f64> {
        match f() {
            Ok(ln_b) => Some(ln_b.exp()),
            Err(err) => {
                r.diagnostics.push(format!("{name}: {err}"));
                None
            }
        }
    };
    let (b1, b2, b3, b4, b5, b6, b6_alt);
    let required: &[&str];
    match case {
        CaseId::CaseI => {
            b1 = eval("B1", &|| eval_b1(&k, &lw));
            (b2, b3, b4, b5, b6, b6_alt) = (None, None, None, None, None, None);
            required = &["B1"];
        }
        CaseId::CaseII { .. } => {
            b1 = eval("B1", &|| eval_b1(&k, &lw));
            b2 = eval("B2", &|| eval_b2(&k, &lw, cfg));
            (b3, b4, b5, b6, b6_alt) = (None, None, None, None, None);
            required = &["B1", "B2"];
        }
        CaseId::CaseIII => {
            b1 = eval("B1", &|| eval_b1(&k, &lw));
            b2 = eval("B2", &|| eval_b2(&k, &lw, cfg));
            b3 = eval("B3", &|| eval_b3(&k, &lw, cfg));
            (b4, b5, b6, b6_alt) = (None, None, None, None);
            required = &["B1", "B2", "B3"];
        }
        CaseId::CaseIV => {
            b4 = eval("B4", &|| eval_b4(&k, &lw, cfg));
            b5 = eval("B5", &|| eval_b5(&k, &lw, cfg));
            b6 = eval("B6", &|| eval_b6(&k, &lw, B6Reading::Printed, cfg));
            b6_alt = eval("B6_alt", &|| eval_b6(&k, &lw, B6Reading::Symmetric, cfg));
            (b1, b2, b3) = (None, None, None);
            required = &["B4", "B5", "B6", "B6_alt"];
        }
        CaseId::NotCovered { .. } => unreachable!(),
    }
    r.b1 = b1;
    r.b2 = b2;
    r.b3 = b3;
    r.b4 = b4;
    r.b5 = b5;
    r.b6 = b6;
    r.b6_alt = b6_alt;
    r.required = required.iter().map(|s| s.to_string()).collect();

    if let (Some(x), Some(y)) = (b6, b6_alt) {
        if x.is_finite() != y.is_finite() {
            r.diagnostics.push(format!(
                "B6 readings disagree on finiteness (k/r2: {x}, k/r1: {y}); no verdict"
            ));
        }
    }
    let all_finite = r.required.iter().all(|n| r.get(n).is_some_and(f64::is_finite));
    r.holds = all_finite && r.diagnostics.is_empty();
    if matches!(case, CaseId::CaseII { .. }) {
        r.notes.push("bracket read as max{…} ≤ C ≤ 8(…)".into());
    }
    if r.holds {
        if let Some((lo, hi)) = bracket_constant(&case, [r.b1, r.b2, r.b3], &e) {
            r.c_low = Some(lo);
            r.c_high = Some(hi);
        }
    }
    Ok(r)
}

/// `Option<f64>` as `null`, a number, or `"inf"`.
mod b_value {
    use serde::de::{self, Deserializer, Visitor};
    use serde::Serializer;
    use std::fmt;

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            None => s.serialize_none(),
            Some(x) if x.is_infinite() && *x > 0.0 => s.serialize_str("inf"),
            Some(x) => s.serialize_f64(*x),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Option<f64>;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number, \"inf\" or null")
            }
            fn visit_none<E: de::Error>(self) -> Result<Self::Value, E> {
                Ok(None)
            }
            fn visit_unit<E: de::Error>(self) -> Result<Self::Value, E> {
                Ok(None)
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Self::Value, E> {
                Ok(Some(v))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Self::Value, E> {
                Ok(Some(v as f64))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Self::Value, E> {
                Ok(Some(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Self::Value, E> {
                match v {
                    "inf" => Ok(Some(f64::INFINITY)),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }
        d.deserialize_any(V)
    }
}

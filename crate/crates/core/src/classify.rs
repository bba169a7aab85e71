//! Closed-form classifiers for power-type weights.
//!
//! Homogeneous spaces use the two-sided power criteria; hyperbolic space uses the
//! sufficient sinh-power criteria (A)/(B) plus the necessary convergence conditions.
//! Cartan–Hadamard manifolds of constant curvature delegate to one or the other.

use serde::{Deserialize, Serialize};

use crate::conditions::{CaseId, ExponentSystem};
use crate::geometry::{GeometryKind, RadialGeometry};
use crate::weights::{RadialWeight, WeightTriple};

/// Slack below which a condition sits on its boundary.
pub const BORDER_TOL: f64 = 1e-9;

/// `(α+Q)/q + Σ (β_i(1-p_i')+Q)/p_i'`
pub fn power_balance(dim: f64, alpha: f64, beta1: f64, beta2: f64, exps: &ExponentSystem) -> f64 {
    (alpha + dim) / exps.q
        + c_i(dim, beta1, exps.p_conj(1)) / exps.p_conj(1)
        + c_i(dim, beta2, exps.p_conj(2)) / exps.p_conj(2)
}

fn c_i(dim: f64, beta: f64, pc: f64) -> f64 {
    beta * (1.0 - pc) + dim
}

/// Power (or sinh-power) weights `u = ρ^α`, `v_i = ρ^{β_i}` on a geometry, where `ρ`
/// is `r` on flat backends and `sinh(√b r)` on curved ones.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerDatum {
    pub geometry: RadialGeometry,
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub exps: ExponentSystem,
}

impl PowerDatum {
    pub fn new(geometry: RadialGeometry, alpha: f64, beta1: f64, beta2: f64, exps: ExponentSystem) -> Self {
        Self {
            geometry,
            alpha,
            beta1,
            beta2,
            exps,
        }
    }

    fn is_flat(&self) -> bool {
        self.geometry.sinh_scale() == 0.0
    }

    /// The weight triple the classifier speaks about.
    pub fn weights(&self) -> WeightTriple {
        if self.is_flat() {
            return WeightTriple::powers(self.alpha, self.beta1, self.beta2);
        }
        let s = self.geometry.sinh_scale();
        WeightTriple::new(
            RadialWeight::sinh_power(self.alpha, s),
            RadialWeight::sinh_power(self.beta1, s),
            RadialWeight::sinh_power(self.beta2, s),
        )
    }

    pub fn balance(&self) -> f64 {
        power_balance(self.geometry.dim, self.alpha, self.beta1, self.beta2, &self.exps)
    }

    fn swapped(&self) -> Self {
        Self {
            beta1: self.beta2,
            beta2: self.beta1,
            exps: self.exps.swapped(),
            ..*self
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<0")]
    Negative,
    #[serde(rename = ">0")]
    Positive,
    #[serde(rename = "<=0")]
    NonPositive,
    #[serde(rename = ">=0")]
    NonNegative,
    #[serde(rename = "=0")]
    Zero,
}

/// One evaluated condition `value ⋈ 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    /// Signed distance to the boundary, positive when satisfied.
    pub slack: f64,
    /// `None` on the boundary of a strict inequality.
    pub satisfied: Option<bool>,
    /// Quantity that is infinite when this condition fails, if the condition is necessary.
    pub quantity: Option<String>,
}

impl ConditionCheck {
    fn new(name: &str, value: f64, relation: Relation, quantity: Option<&str>) -> Self {
        let slack = match relation {
            Relation::Negative | Relation::NonPositive => -value,
            Relation::Positive | Relation::NonNegative => value,
            Relation::Zero => -value.abs(),
        };
        let satisfied = match relation {
            Relation::Zero => Some(value.abs() < BORDER_TOL),
            _ if slack.abs() <= BORDER_TOL => match relation {
                Relation::NonPositive | Relation::NonNegative => Some(true),
                _ => None,
            },
            _ => Some(slack > 0.0),
        };
        Self {
            name: name.to_owned(),
            value,
            relation,
            slack,
            satisfied,
            quantity: quantity.map(str::to_owned),
        }
    }

    fn borderline(mut self) -> Self {
        self.satisfied = None;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Outcome {
    Holds,
    /// `violated` lists the failed conditions in order; `quantity` is the one that is
    /// infinite because of the first of them.
    Fails {
        violated: Vec<String>,
        quantity: String,
    },
    HoldsSufficient {
        rule: String,
    },
    Unknown {
        reason: String,
    },
    NotCovered {
        case: CaseId,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    #[serde(flatten)]
    pub outcome: Outcome,
    pub conditions: Vec<ConditionCheck>,
}

impl Verdict {
    fn not_covered(case: CaseId) -> Self {
        Self {
            outcome: Outcome::NotCovered { case },
            conditions: Vec::new(),
        }
    }

    pub fn label(&self) -> &'static str {
        match self.outcome {
            Outcome::Holds => "holds",
            Outcome::Fails { .. } => "fails",
            Outcome::HoldsSufficient { .. } => "holds (sufficient)",
            Outcome::Unknown { .. } => "unknown",
            Outcome::NotCovered { .. } => "not covered",
        }
    }

    /// Whether the verdict asserts boundedness.
    pub fn asserts_bounded(&self) -> bool {
        matches!(self.outcome, Outcome::Holds | Outcome::HoldsSufficient { .. })
    }
}

fn failures(checks: &[ConditionCheck]) -> Option<Outcome> {
    let bad: Vec<&ConditionCheck> = checks.iter().filter(|c| c.satisfied == Some(false)).collect();
    let first = bad.first()?;
    Some(Outcome::Fails {
        violated: bad.iter().map(|c| c.name.clone()).collect(),
        quantity: first.quantity.clone().unwrap_or_else(|| "B1".into()),
    })
}

fn borderline(checks: &[ConditionCheck]) -> Option<Outcome> {
    let names: Vec<&str> = checks
        .iter()
        .filter(|c| c.satisfied.is_none())
        .map(|c| c.name.as_str())
        .collect();
    (!names.is_empty()).then(|| Outcome::Unknown {
        reason: format!("on the boundary of {}", names.join(", ")),
    })
}

/// Two-sided criteria for `u = |x|^α`, `v_i = |x|^{β_i}` in cases I and II.
pub fn classify_homogeneous(d: &PowerDatum) -> Verdict {
    let case = d.exps.dispatch();
    let d = match case {
        CaseId::CaseI | CaseId::CaseII { swapped: false } => *d,
        CaseId::CaseII { swapped: true } => d.swapped(),
        other => return Verdict::not_covered(other),
    };
    let q_dim = d.geometry.dim;
    let e = d.exps;
    let (pc1, pc2) = (e.p_conj(1), e.p_conj(2));
    let (c1, c2) = (c_i(q_dim, d.beta1, pc1), c_i(q_dim, d.beta2, pc2));
    let mut checks = vec![
        ConditionCheck::new("alpha+Q<0", d.alpha + q_dim, Relation::Negative, Some("B1")),
        ConditionCheck::new("beta1(1-p1')+Q>0", c1, Relation::Positive, Some("B1")),
        ConditionCheck::new("beta2(1-p2')+Q>0", c2, Relation::Positive, Some("B1")),
    ];
    if let (CaseId::CaseII { .. }, Some(r2), Some(qc)) = (&case, e.r(2), e.q_conj()) {
        let tail = (d.alpha + q_dim) * r2 / e.q + c2 * r2 / qc + c2;
        checks.push(ConditionCheck::new(
            "r2-tail<0",
            tail,
            Relation::Negative,
            Some("B2"),
        ));
    }
    checks.push(ConditionCheck::new(
        "balance=0",
        d.balance(),
        Relation::Zero,
        Some("B1"),
    ));
    let outcome = failures(&checks)
        .or_else(|| borderline(&checks))
        .unwrap_or(Outcome::Holds);
    Verdict {
        outcome,
        conditions: checks,
    }
}

/// Sufficient criteria (A)/(B) for `u = sinh^α`, `v_i = sinh^{β_i}` in case I, with the
/// necessary convergence conditions reported as failures.
pub fn classify_hyperbolic(d: &PowerDatum) -> Verdict {
    let case = d.exps.dispatch();
    if case != CaseId::CaseI {
        return Verdict::not_covered(case);
    }
    let n = d.geometry.dim;
    let e = d.exps;
    let (pc1, pc2) = (e.p_conj(1), e.p_conj(2));
    let (c1, c2) = (c_i(n, d.beta1, pc1), c_i(n, d.beta2, pc2));
    let an = d.alpha + n;
    let s = an / e.q + c1 / pc1 + c2 / pc2;
    let sigma = 1.0 / e.q + 1.0 / pc1 + 1.0 / pc2;

    // Growth rate of the B1 integrand as r → ∞. A head integral of sinh^{c-1} stays
    // bounded when c < 1, so only c > 1 contributes.
    let tail = (an - 1.0) / e.q + (c1 - 1.0).max(0.0) / pc1 + (c2 - 1.0).max(0.0) / pc2;
    let mut tail_check = ConditionCheck::new("exp-tail<=0", tail, Relation::NonPositive, Some("B1"));
    if tail.abs() <= BORDER_TOL && ((c1 - 1.0).abs() <= BORDER_TOL || (c2 - 1.0).abs() <= BORDER_TOL) {
        tail_check = tail_check.borderline();
    }
    let mut checks = vec![
        ConditionCheck::new("alpha+n-1<0", an - 1.0, Relation::Negative, Some("B1")),
        ConditionCheck::new("beta1(1-p1')+n>0", c1, Relation::Positive, Some("B1")),
        ConditionCheck::new("beta2(1-p2')+n>0", c2, Relation::Positive, Some("B1")),
        tail_check,
    ];
    if let Some(f) = failures(&checks) {
        return Verdict {
            outcome: f,
            conditions: checks,
        };
    }
    let necessary_border = borderline(&checks);

    let rule_checks = if an >= 0.0 {
        vec![ConditionCheck::new(
            "(A) S<=sum",
            s - sigma,
            Relation::NonPositive,
            None,
        )]
    } else {
        vec![
            ConditionCheck::new("(B) S>=0", s, Relation::NonNegative, None),
            ConditionCheck::new("(B) S<=sum", s - sigma, Relation::NonPositive, None),
        ]
    };
    let rule = if an >= 0.0 { "A" } else { "B" };
    let met = rule_checks.iter().all(|c| c.satisfied == Some(true));
    checks.extend(rule_checks);
    let outcome = match (met, necessary_border) {
        (true, None) => Outcome::HoldsSufficient { rule: rule.into() },
        (_, Some(b)) => b,
        (false, None) => Outcome::Unknown {
            reason: format!("outside ({rule}); the criteria are sufficient only"),
        },
    };
    Verdict {
        outcome,
        conditions: checks,
    }
}

/// Constant curvature `-b`: flat rules at `b = 0`, hyperbolic rules for `b > 0`.
pub fn classify_cartan_hadamard(d: &PowerDatum) -> Verdict {
    let case = d.exps.dispatch();
    if case != CaseId::CaseI {
        return Verdict::not_covered(case);
    }
    if d.geometry.curvature_b == 0.0 {
        classify_homogeneous(d)
    } else {
        classify_hyperbolic(d)
    }
}

/// Dispatches on the geometry kind.
pub fn classify(d: &PowerDatum) -> Verdict {
    match d.geometry.kind {
        GeometryKind::Homogeneous => classify_homogeneous(d),
        GeometryKind::Hyperbolic => classify_hyperbolic(d),
        GeometryKind::CartanHadamardConst => classify_cartan_hadamard(d),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::eval_report;
    use crate::quad::QuadConfig;

    fn exps(p1: f64, p2: f64, q: f64) -> ExponentSystem {
        ExponentSystem::new(p1, p2, q).unwrap()
    }

    fn hom(alpha: f64, b1: f64, b2: f64, e: ExponentSystem) -> PowerDatum {
        PowerDatum::new(RadialGeometry::homogeneous(4.0, 1.0).unwrap(), alpha, b1, b2, e)
    }

    fn hyp(n: f64, alpha: f64, b1: f64, b2: f64, e: ExponentSystem) -> PowerDatum {
        PowerDatum::new(RadialGeometry::hyperbolic(n).unwrap(), alpha, b1, b2, e)
    }

    #[test]
    fn homogeneous_examples() {
        let e = exps(2.0, 2.0, 2.0);
        assert_eq!(
            classify_homogeneous(&hom(-6.0, 3.0, 3.0, e)).outcome,
            Outcome::Holds
        );
        match classify_homogeneous(&hom(-5.0, 3.0, 3.0, e)).outcome {
            Outcome::Fails { violated, quantity } => {
                assert_eq!(violated, vec!["balance=0".to_string()]);
                assert_eq!(quantity, "B1");
            }
            o => panic!("{o:?}"),
        }
        let v = classify_homogeneous(&hom(-6.0, 3.0, 3.0, exps(2.0, 2.0, 0.8)));
        assert!(matches!(v.outcome, Outcome::NotCovered { .. }));
    }

    #[test]
    fn second_case_tail_condition() {
        // p1 = 2, q = 2.5, p2 = 4. With the balance in force the tail expression equals
        // -r2 (β1(1-p1')+Q)/p1', so it can only fail together with a sign condition.
        let e = exps(2.0, 4.0, 2.5);
        let (r2, qc) = (e.r(2).unwrap(), e.q_conj().unwrap());
        let (alpha, b2) = (-5.0, 1.0);
        let c2 = b2 * (1.0 - e.p_conj(2)) + 4.0;
        // solve the balance for β1
        let c1 = -e.p_conj(1) * ((alpha + 4.0) / e.q + c2 / e.p_conj(2));
        let b1 = (c1 - 4.0) / (1.0 - e.p_conj(1));
        let d = hom(alpha, b1, b2, e);
        assert!(d.balance().abs() < 1e-12);
        let tail = (alpha + 4.0) * r2 / e.q + c2 * r2 / qc + c2;
        assert!(tail > 0.0);
        match classify_homogeneous(&d).outcome {
            Outcome::Fails { violated, .. } => {
                assert_eq!(
                    violated,
                    vec!["beta1(1-p1')+Q>0".to_string(), "r2-tail<0".to_string()]
                );
            }
            o => panic!("{o:?}"),
        }
        // a balanced tuple with positive c1 satisfies the tail condition
        let (c1, c2) = (1.0, 1.0 * (1.0 - e.p_conj(2)) + 4.0);
        let alpha = -e.q * (c1 / e.p_conj(1) + c2 / e.p_conj(2)) - 4.0;
        let d = hom(alpha, 3.0, 1.0, e);
        assert!(d.balance().abs() < 1e-12);
        assert_eq!(classify_homogeneous(&d).outcome, Outcome::Holds);
        let v = classify_homogeneous(&d);
        let tail = v.conditions.iter().find(|c| c.name == "r2-tail<0").unwrap();
        assert_eq!(tail.satisfied, Some(true));
    }

    #[test]
    fn hyperbolic_examples() {
        let e = exps(2.0, 2.0, 2.0);
        let v = classify_hyperbolic(&hyp(2.0, -2.0, 1.0, 1.0, e));
        assert_eq!(v.outcome, Outcome::HoldsSufficient { rule: "A".into() });
        let v = classify_hyperbolic(&hyp(2.0, 1.0, 1.0, 1.0, e));
        match v.outcome {
            Outcome::Fails { violated, .. } => assert_eq!(violated[0], "alpha+n-1<0"),
            o => panic!("{o:?}"),
        }
        // n = 3, α = -5, c_i = 0.5: S = -1 + 0.25 + 0.25 < 0
        let v = classify_hyperbolic(&hyp(3.0, -5.0, 2.5, 2.5, e));
        assert!(matches!(v.outcome, Outcome::Unknown { .. }), "{v:?}");
        let v = classify_hyperbolic(&hyp(3.0, -5.0, 3.0, 3.0, exps(2.0, 4.0, 3.0)));
        assert!(matches!(v.outcome, Outcome::NotCovered { .. }));
    }

    #[test]
    fn bounded_head_integral_breaks_rule_a() {
        // c1 = 0.2 < 1 keeps V11 bounded while V12 grows like e^{t/2}; the large-radius
        // product grows like e^{0.2 t} even though S = 1.3 ≤ 1.5.
        let e = exps(2.0, 2.0, 2.0);
        let d = hyp(2.0, -1.1, 1.8, 0.5, e);
        let v = classify_hyperbolic(&d);
        match &v.outcome {
            Outcome::Fails { violated, .. } => assert_eq!(violated, &vec!["exp-tail<=0".to_string()]),
            o => panic!("{o:?}"),
        }
        let r = eval_report(&d.geometry, &d.weights(), e, &QuadConfig::default()).unwrap();
        assert_eq!(r.b1, Some(f64::INFINITY));
    }

    #[test]
    fn cartan_hadamard_delegation() {
        let e = exps(2.0, 2.0, 2.0);
        let flat = PowerDatum::new(
            RadialGeometry::cartan_hadamard(4.0, 0.0).unwrap(),
            -6.0,
            3.0,
            3.0,
            e,
        );
        assert_eq!(classify_cartan_hadamard(&flat).outcome, Outcome::Holds);
        let curved = PowerDatum::new(
            RadialGeometry::cartan_hadamard(2.0, 2.0).unwrap(),
            -2.0,
            1.0,
            1.0,
            e,
        );
        assert_eq!(
            classify_cartan_hadamard(&curved).outcome,
            Outcome::HoldsSufficient { rule: "A".into() }
        );
    }

    #[test]
    fn verdict_json() {
        let v = classify_hyperbolic(&hyp(2.0, -2.0, 1.0, 1.0, exps(2.0, 2.0, 2.0)));
        let s = serde_json::to_string(&v).unwrap();
        assert!(s.contains("\"verdict\":\"holds_sufficient\""), "{s}");
        assert!(s.contains("\"slack\""), "{s}");
        let back: Verdict = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }
}

//! Run configuration read from a TOML file. Unknown keys are rejected everywhere.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;

use bihardy::classify::PowerDatum;
use bihardy::conditions::ExponentSystem;
use bihardy::geometry::RadialGeometry;
use bihardy::quad::QuadConfig;
use bihardy::weights::{RadialWeight, WeightTriple};
use bihardy::witness::WitnessSearchConfig;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: Option<GeometryBlock>,
    pub exponents: Option<ExponentBlock>,
    pub weights: Option<WeightsBlock>,
    #[serde(default)]
    pub quadrature: QuadBlock,
    #[serde(default)]
    pub witness: WitnessBlock,
    #[serde(default)]
    pub classify: ClassifyBlock,
    #[serde(default)]
    pub calibrate: CalibrateBlock,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Homogeneous,
    Hyperbolic,
    CartanHadamard,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryBlock {
    pub kind: Kind,
    pub dim: f64,
    pub b: Option<f64>,
    /// Defaults to 1 on homogeneous spaces and to the Euclidean unit sphere area otherwise.
    pub sphere_area: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentBlock {
    pub p1: f64,
    pub p2: f64,
    pub q: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsBlock {
    pub u: WeightSpec,
    pub v1: WeightSpec,
    pub v2: WeightSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    Power {
        exponent: f64,
    },
    /// `scale` defaults to the geometry's `√b` (1 on flat spaces).
    SinhPower {
        exponent: f64,
        scale: Option<f64>,
    },
    Custom {
        name: String,
        #[serde(default)]
        params: Vec<f64>,
        /// Declare the endpoint asymptotics instead of sniffing them.
        #[serde(default = "yes")]
        hints: bool,
    },
}

fn yes() -> bool {
    true
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadBlock {
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub max_depth: Option<u32>,
    pub sniff_points: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessBlock {
    pub budget: Option<usize>,
    pub restarts: Option<usize>,
    pub seed: Option<u64>,
    pub param_box: Option<[[f64; 2]; 4]>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyBlock {
    /// Sweep `alpha` over this interval instead of classifying the configured datum.
    pub alpha_range: Option<[f64; 2]>,
    pub grid: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrateBlock {
    pub p: f64,
    pub eps: f64,
    pub deltas: Vec<f64>,
}

impl Default for CalibrateBlock {
    fn default() -> Self {
        Self {
            p: 2.0,
            eps: 0.0,
            deltas: vec![0.5, 0.1, 0.01],
        }
    }
}

/// Signature of a builtin custom weight: parameters and whether to declare hints.
type Builtin = fn(&[f64], bool) -> RadialWeight;

const BUILTINS: &[(&str, usize, Builtin)] = &[
    ("broken_power", 2, |p, h| {
        RadialWeight::broken_power(p[0], p[1], h)
    }),
    ("power_exp", 2, |p, h| RadialWeight::power_exp(p[0], p[1], h)),
];

pub fn builtin_names() -> Vec<&'static str> {
    BUILTINS.iter().map(|b| b.0).collect()
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn geometry(&self) -> Result<RadialGeometry> {
        let g = self
            .geometry
            .as_ref()
            .ok_or_else(|| anyhow!("missing [geometry] block"))?;
        let geo = match (g.kind, g.b) {
            (Kind::Homogeneous, None) => RadialGeometry::homogeneous(g.dim, 1.0),
            (Kind::Hyperbolic, None) => RadialGeometry::hyperbolic(g.dim),
            (Kind::CartanHadamard, Some(b)) => RadialGeometry::cartan_hadamard(g.dim, b),
            (Kind::CartanHadamard, None) => bail!("geometry.b: required for kind = \"cartan_hadamard\""),
            (_, Some(_)) => bail!("geometry.b: only meaningful for kind = \"cartan_hadamard\""),
        };
        let mut geo = geo.context("geometry")?;
        if let Some(s) = g.sphere_area {
            geo.sphere_area = s;
            geo = geo.validated().context("geometry.sphere_area")?;
        }
        Ok(geo)
    }

    pub fn exponents(&self) -> Result<ExponentSystem> {
        let e = self
            .exponents
            .as_ref()
            .ok_or_else(|| anyhow!("missing [exponents] block"))?;
        ExponentSystem::new(e.p1, e.p2, e.q).context("exponents")
    }

    pub fn weights(&self, geo: &RadialGeometry) -> Result<WeightTriple> {
        let w = self
            .weights
            .as_ref()
            .ok_or_else(|| anyhow!("missing [weights] block"))?;
        let one = |s: &WeightSpec| -> Result<RadialWeight> {
            let r = match s {
                WeightSpec::Power { exponent } => RadialWeight::power(*exponent),
                WeightSpec::SinhPower { exponent, scale } => {
                    let natural = geo.sinh_scale();
                    let scale = scale.unwrap_or(if natural > 0.0 { natural } else { 1.0 });
                    RadialWeight::sinh_power(*exponent, scale)
                }
                WeightSpec::Custom {
                    name: fname,
                    params,
                    hints,
                } => {
                    let (_, arity, make) = BUILTINS.iter().find(|b| b.0 == fname).ok_or_else(|| {
                        anyhow!("unknown builtin {fname:?}; known: {}", builtin_names().join(", "))
                    })?;
                    if params.len() != *arity {
                        bail!("builtin {fname:?} takes {arity} params, got {}", params.len());
                    }
                    make(params, *hints)
                }
            };
            r.validate()?;
            Ok(r)
        };
        let field = |n: &str, s: &WeightSpec| one(s).with_context(|| format!("weights.{n}"));
        Ok(WeightTriple::new(
            field("u", &w.u)?,
            field("v1", &w.v1)?,
            field("v2", &w.v2)?,
        ))
    }

    /// The datum as the classifier sees it: power weights on flat spaces,
    /// powers of `sinh(√b r)` on curved ones.
    pub fn power_datum(&self) -> Result<PowerDatum> {
        let geo = self.geometry()?;
        let exps = self.exponents()?;
        let w = self
            .weights
            .as_ref()
            .ok_or_else(|| anyhow!("missing [weights] block"))?;
        let flat = geo.sinh_scale() == 0.0;
        let exponent = |n: &str, s: &WeightSpec| -> Result<f64> {
            match (s, flat) {
                (WeightSpec::Power { exponent }, true) => Ok(*exponent),
                (WeightSpec::SinhPower { exponent, scale }, false)
                    if scale.is_none_or(|s| s == geo.sinh_scale()) =>
                {
                    Ok(*exponent)
                }
                _ if flat => bail!("weights.{n}: the classifier needs form = \"power\" on this geometry"),
                _ => bail!(
                    "weights.{n}: the classifier needs form = \"sinh_power\" with scale {} on this geometry",
                    geo.sinh_scale()
                ),
            }
        };
        Ok(PowerDatum::new(
            geo,
            exponent("u", &w.u)?,
            exponent("v1", &w.v1)?,
            exponent("v2", &w.v2)?,
            exps,
        ))
    }

    pub fn quad(&self) -> Result<QuadConfig> {
        let q = &self.quadrature;
        let d = QuadConfig::default();
        let cfg = QuadConfig {
            rel_tol: q.rel_tol.unwrap_or(d.rel_tol),
            abs_tol: q.abs_tol.unwrap_or(d.abs_tol),
            max_depth: q.max_depth.unwrap_or(d.max_depth),
            sniff_points: q.sniff_points.unwrap_or(d.sniff_points),
        };
        cfg.validate().context("quadrature")?;
        Ok(cfg)
    }

    pub fn search(&self) -> Result<WitnessSearchConfig> {
        let w = &self.witness;
        let d = WitnessSearchConfig::default();
        let cfg = WitnessSearchConfig {
            budget: w.budget.unwrap_or(d.budget),
            restarts: w.restarts.unwrap_or(d.restarts),
            param_box: w.param_box.unwrap_or(d.param_box),
            seed: w.seed.unwrap_or(d.seed),
        };
        cfg.validate().context("witness")?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BALANCED: &str = r#"
        [geometry]
        kind = "homogeneous"
        dim = 4
        [exponents]
        p1 = 2
        p2 = 2
        q = 2
        [weights]
        u = { form = "power", exponent = -6 }
        v1 = { form = "power", exponent = 3 }
        v2 = { form = "custom", name = "broken_power", params = [3, 0] }
    "#;

    #[test]
    fn parses_a_full_datum() {
        let c = RunConfig::parse(BALANCED).unwrap();
        let geo = c.geometry().unwrap();
        assert_eq!(geo.sphere_area, 1.0);
        let w = c.weights(&geo).unwrap();
        assert_eq!(w.u.as_power(), Some(-6.0));
        assert!(c.power_datum().is_err(), "custom weights are not power data");
    }

    #[test]
    fn unknown_keys_are_rejected_with_a_location() {
        let bad = BALANCED.replace("dim = 4", "dim = 4\n        dimension = 4");
        let e = format!("{:#}", RunConfig::parse(&bad).unwrap_err());
        assert!(
            e.contains("unknown field `dimension`") && e.contains("line"),
            "{e}"
        );
        let bad = BALANCED.replace("exponent = 3 }", "exponent = 3, scal = 2 }");
        assert!(RunConfig::parse(&bad).is_err());
    }

    #[test]
    fn semantic_errors_name_the_field() {
        let c = RunConfig::parse(&BALANCED.replace("params = [3, 0]", "params = [3]")).unwrap();
        let e = format!("{:#}", c.weights(&c.geometry().unwrap()).unwrap_err());
        assert!(e.starts_with("weights.v2"), "{e}");
        let c = RunConfig::parse(&BALANCED.replace("p1 = 2", "p1 = 1")).unwrap();
        assert!(format!("{:#}", c.exponents().unwrap_err()).starts_with("exponents"));
    }

    #[test]
    fn sinh_scale_follows_the_geometry() {
        let text = r#"
            [geometry]
            kind = "cartan_hadamard"
            dim = 3
            b = 4
            [exponents]
            p1 = 2
            p2 = 2
            q = 2
            [weights]
            u = { form = "sinh_power", exponent = -3 }
            v1 = { form = "sinh_power", exponent = 1 }
            v2 = { form = "sinh_power", exponent = 1, scale = 2 }
        "#;
        let c = RunConfig::parse(text).unwrap();
        let d = c.power_datum().unwrap();
        assert_eq!((d.alpha, d.beta1, d.beta2), (-3.0, 1.0, 1.0));
    }
}

//! Browser bindings. Every export takes and returns a JSON string so the page needs
//! no generated type glue beyond `wasm-bindgen`'s string passing.

use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

use bihardy::classify::{classify, PowerDatum};
use bihardy::conditions::{eval_b1, ExponentSystem};
use bihardy::geometry::RadialGeometry;
use bihardy::quad::QuadConfig;
use bihardy::weights::{build_line_weights, kernels};

/// Power data: `u = ρ^α`, `v_i = ρ^{β_i}` with `ρ = r` or `sinh(√b r)`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Datum {
    pub kind: String,
    pub dim: f64,
    #[serde(default)]
    pub b: f64,
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub p1: f64,
    pub p2: f64,
    pub q: f64,
}

impl Datum {
    fn power_datum(&self) -> Result<PowerDatum, String> {
        let geo = match self.kind.as_str() {
            "homogeneous" => RadialGeometry::homogeneous(self.dim, 1.0),
            "hyperbolic" => RadialGeometry::hyperbolic(self.dim),
            "cartan_hadamard" => RadialGeometry::cartan_hadamard(self.dim, self.b),
            k => return Err(format!("unknown geometry {k:?}")),
        }
        .map_err(|e| e.to_string())?;
        let e = ExponentSystem::new(self.p1, self.p2, self.q).map_err(|e| e.to_string())?;
        Ok(PowerDatum::new(geo, self.alpha, self.beta1, self.beta2, e))
    }
}

#[derive(Debug, Serialize)]
pub struct Curves {
    pub ln_t: Vec<f64>,
    pub ln_u1: Vec<f64>,
    pub ln_v11: Vec<f64>,
    pub ln_v12: Vec<f64>,
    /// `ln(U1^{1/q} V11^{1/p1'} V12^{1/p2'})`, whose supremum is `ln B1`.
    pub ln_product: Vec<f64>,
    /// `null` unless `b1_status` is `"finite"`; JSON has no infinity.
    pub b1: Option<f64>,
    /// `"finite"`, `"infinite"` or the pipeline's error message.
    pub b1_status: String,
}

/// Kernels sampled at `points` log-spaced abscissae in `[1e-4, 1e4]`.
pub fn curves(d: &Datum, points: usize) -> Result<Curves, String> {
    let pd = d.power_datum()?;
    let lw = build_line_weights(&pd.geometry, &pd.weights(), pd.exps).map_err(|e| e.to_string())?;
    let k = kernels(&lw, &QuadConfig::default()).map_err(|e| e.to_string())?;
    let e = pd.exps;
    let n = points.clamp(2, 2000);
    let mut c = Curves {
        ln_t: Vec::with_capacity(n),
        ln_u1: Vec::with_capacity(n),
        ln_v11: Vec::with_capacity(n),
        ln_v12: Vec::with_capacity(n),
        ln_product: Vec::with_capacity(n),
        b1: None,
        b1_status: "finite".into(),
    };
    match eval_b1(&k, &lw) {
        Ok(b) if b.is_finite() => c.b1 = Some(b.exp()),
        Ok(_) => c.b1_status = "infinite".into(),
        Err(e) => c.b1_status = e.to_string(),
    }
    let span = 4.0 * std::f64::consts::LN_10;
    for j in 0..n {
        let u = -span + 2.0 * span * j as f64 / (n - 1) as f64;
        let t = u.exp();
        let (a, b1, b2) = (k.u1.ln_at_t(t), k.v(1).ln_at_t(t), k.v(2).ln_at_t(t));
        c.ln_t.push(u);
        c.ln_u1.push(a);
        c.ln_v11.push(b1);
        c.ln_v12.push(b2);
        c.ln_product.push(a / e.q + b1 / e.p_conj(1) + b2 / e.p_conj(2));
    }
    Ok(c)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapRequest {
    pub datum: Datum,
    /// Range of the first swept parameter.
    pub x: [f64; 2],
    /// Range of the second swept parameter.
    pub y: [f64; 2],
    pub n: usize,
}

#[derive(Debug, Serialize)]
pub struct Map<T> {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Row-major, `values[iy * x.len() + ix]`.
    pub values: Vec<T>,
}

fn axis(r: [f64; 2], n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| r[0] + (r[1] - r[0]) * k as f64 / (n - 1) as f64)
        .collect()
}

fn sweep<T>(req: &MapRequest, mut f: impl FnMut(f64, f64) -> T) -> Map<T> {
    let n = req.n.clamp(2, 200);
    let (x, y) = (axis(req.x, n), axis(req.y, n));
    let mut values = Vec::with_capacity(n * n);
    for &b in &y {
        for &a in &x {
            values.push(f(a, b));
        }
    }
    Map { x, y, values }
}

/// `log10 B1` over `(β1, β2)`; `null` where `B1 = ∞` or the pipeline fails.
pub fn b1_map(req: &MapRequest) -> Map<Option<f64>> {
    let cfg = QuadConfig::default();
    sweep(req, |beta1, beta2| {
        let d = Datum {
            beta1,
            beta2,
            ..req.datum.clone()
        };
        let pd = d.power_datum().ok()?;
        let lw = build_line_weights(&pd.geometry, &pd.weights(), pd.exps).ok()?;
        let k = kernels(&lw, &cfg).ok()?;
        let b = eval_b1(&k, &lw).ok()?;
        b.is_finite().then(|| b / std::f64::consts::LN_10)
    })
}

/// Classifier verdict over `(α, β)` with `β1 = β2 = β`.
pub fn classify_map(req: &MapRequest) -> Map<String> {
    sweep(req, |alpha, beta| {
        let d = Datum {
            alpha,
            beta1: beta,
            beta2: beta,
            ..req.datum.clone()
        };
        match d.power_datum() {
            Ok(pd) => classify(&pd).label().to_owned(),
            Err(_) => "invalid".into(),
        }
    })
}

fn respond<T: Serialize>(r: Result<T, String>) -> Result<String, JsValue> {
    r.and_then(|v| serde_json::to_string(&v).map_err(|e| e.to_string()))
        .map_err(|e| JsValue::from_str(&e))
}

fn parse<'a, T: Deserialize<'a>>(json: &'a str) -> Result<T, String> {
    serde_json::from_str(json).map_err(|e| e.to_string())
}

#[wasm_bindgen(js_name = kernelCurves)]
pub fn kernel_curves(datum_json: &str, points: usize) -> Result<String, JsValue> {
    respond(parse(datum_json).and_then(|d: Datum| curves(&d, points)))
}

#[wasm_bindgen(js_name = b1Map)]
pub fn b1_map_json(request_json: &str) -> Result<String, JsValue> {
    respond(parse(request_json).map(|r: MapRequest| b1_map(&r)))
}

#[wasm_bindgen(js_name = classifyMap)]
pub fn classify_map_json(request_json: &str) -> Result<String, JsValue> {
    respond(parse(request_json).map(|r: MapRequest| classify_map(&r)))
}

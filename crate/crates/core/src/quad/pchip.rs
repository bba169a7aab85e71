/// Piecewise cubic Hermite interpolant with Fritsch–Carlson monotonicity limiting.
///
/// Slopes are either supplied (exact derivatives, then only limited where they would
/// break monotonicity of monotone data) or estimated by the harmonic-mean rule.
#[derive(Clone, Debug)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl MonotoneCubic {
    /// `x` must be strictly increasing with at least two points.
    pub fn new(x: Vec<f64>, y: Vec<f64>, slopes: Option<Vec<f64>>) -> Self {
        let n = x.len();
        assert!(n >= 2 && y.len() == n, "need at least two matching nodes");
        debug_assert!(x.windows(2).all(|w| w[0] < w[1]));
        let secant: Vec<f64> = (0..n - 1)
            .map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i]))
            .collect();
        let mut d = match slopes {
            Some(d) => {
                assert_eq!(d.len(), n);
                d
            }
            None => estimate_slopes(&x, &secant),
        };
        limit(&secant, &mut d);
        Self { x, y, d }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    pub fn eval(&self, xv: f64) -> f64 {
        let n = self.x.len();
        let i = match self.x.partition_point(|&v| v <= xv) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        let h = self.x[i + 1] - self.x[i];
        let s = (xv - self.x[i]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.y[i] + h * h10 * self.d[i] + h01 * self.y[i + 1] + h * h11 * self.d[i + 1]
    }
}

fn estimate_slopes(x: &[f64], secant: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut d = vec![0.0; n];
    if n == 2 {
        d[0] = secant[0];
        d[1] = secant[0];
        return d;
    }
    for i in 1..n - 1 {
        let (a, b) = (secant[i - 1], secant[i]);
        if a * b > 0.0 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            let w1 = 2.0 * h1 + h0;
            let w2 = h1 + 2.0 * h0;
            d[i] = (w1 + w2) / (w1 / a + w2 / b);
        }
    }
    d[0] = end_slope(x[1] - x[0], x[2] - x[1], secant[0], secant[1]);
    d[n - 1] = end_slope(
        x[n - 1] - x[n - 2],
        x[n - 2] - x[n - 3],
        secant[n - 2],
        secant[n - 3],
    );
    d
}

// three-point end formula, shape preserving
fn end_slope(h0: f64, h1: f64, s0: f64, s1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
    if d * s0 <= 0.0 {
        0.0
    } else if s0 * s1 <= 0.0 && d.abs() > 3.0 * s0.abs() {
        3.0 * s0
    } else {
        d
    }
}

fn limit(secant: &[f64], d: &mut [f64]) {
    for (i, &s) in secant.iter().enumerate() {
        if s == 0.0 {
            continue;
        }
        let a = d[i] / s;
        let b = d[i + 1] / s;
        if a < 0.0 || b < 0.0 {
            // The data turns here; keep its own slopes.
            continue;
        }
        let r = a * a + b * b;
        if r > 9.0 {
            let tau = 3.0 / r.sqrt();
            d[i] = tau * a * s;
            d[i + 1] = tau * b * s;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn reproduces_lines_exactly() {
        let x: Vec<f64> = (0..10).map(|i| (i as f64).powf(1.3)).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 3.0 * v).collect();
        let p = MonotoneCubic::new(x, y, None);
        for k in 0..50 {
            let xv = k as f64 * 0.41;
            assert_relative_eq!(p.eval(xv), 2.0 - 3.0 * xv, epsilon = 1e-12);
        }
    }

    #[test]
    fn monotone_data_stays_monotone() {
        let x = vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        let y = vec![0.0, 0.0, 0.1, 5.0, 5.0, 5.1];
        let p = MonotoneCubic::new(x, y, None);
        let mut prev = f64::NEG_INFINITY;
        for k in 0..=500 {
            let v = p.eval(k as f64 * 0.01);
            assert!(v >= prev - 1e-14);
            prev = v;
        }
    }

    #[test]
    fn exact_slopes_give_fourth_order() {
        let f = |x: f64| x.exp();
        let err = |n: usize| {
            let x: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
            let y = x.iter().map(|v| f(*v)).collect();
            let d = x.iter().map(|v| f(*v)).collect();
            let p = MonotoneCubic::new(x, y, Some(d));
            (0..1000)
                .map(|k| (p.eval(k as f64 / 1000.0) - f(k as f64 / 1000.0)).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(10) / err(20);
        assert!(ratio > 14.0, "order ratio {ratio}");
    }
}

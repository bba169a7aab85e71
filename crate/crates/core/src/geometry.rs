//! Radial measure backends.
//!
//! Every geometry is reduced to its surface density `Λ(r)`, the total polar density on
//! the level set at distance `r` from the base point, so that `∫_X g = ∫_0^∞ g(r) Λ(r) dr`
//! for radial `g`.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::quad::{ln_sinh, Abscissa, Asymptote, EndpointHints};
use crate::{Error, Result};

/// Below this value of `√b·r` the Jacobian factor uses its Taylor series.
const J_SERIES_CUTOFF: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometryKind {
    Homogeneous,
    Hyperbolic,
    CartanHadamardConst,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialGeometry {
    pub kind: GeometryKind,
    /// Homogeneous dimension `Q`, or manifold dimension `n`.
    pub dim: f64,
    /// `b` with sectional curvature `-b`; only read for Cartan–Hadamard.
    pub curvature_b: f64,
    pub sphere_area: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Growth {
    PowerLaw(f64),
    Exponential(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailProfile {
    pub exponent_at_zero: f64,
    pub growth_at_infinity: Growth,
}

/// `ω_{n-1} = 2π^{n/2}/Γ(n/2)`, the area of the unit sphere in `R^n`.
pub fn unit_sphere_area(n: f64) -> f64 {
    ln_unit_sphere_area(n).exp()
}

fn ln_unit_sphere_area(n: f64) -> f64 {
    LN_2 + 0.5 * n * PI.ln() - libm::lgamma(0.5 * n)
}

impl RadialGeometry {
    pub fn homogeneous(q: f64, sigma: f64) -> Result<Self> {
        Self {
            kind: GeometryKind::Homogeneous,
            dim: q,
            curvature_b: 0.0,
            sphere_area: sigma,
        }
        .validated()
    }

    pub fn hyperbolic(n: f64) -> Result<Self> {
        Self {
            kind: GeometryKind::Hyperbolic,
            dim: n,
            curvature_b: 1.0,
            sphere_area: unit_sphere_area(n),
        }
        .validated()
    }

    pub fn cartan_hadamard(n: f64, b: f64) -> Result<Self> {
        Self {
            kind: GeometryKind::CartanHadamardConst,
            dim: n,
            curvature_b: b,
            sphere_area: unit_sphere_area(n),
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.dim > 0.0 && self.dim.is_finite()) {
            return Err(Error::Domain(format!(
                "dimension must be positive, got {}",
                self.dim
            )));
        }
        if !(self.sphere_area > 0.0 && self.sphere_area.is_finite()) {
            return Err(Error::Domain(format!(
                "sphere area must be positive, got {}",
                self.sphere_area
            )));
        }
        if !(self.curvature_b >= 0.0 && self.curvature_b.is_finite()) {
            return Err(Error::Domain(format!(
                "curvature b must be nonnegative, got {}",
                self.curvature_b
            )));
        }
        Ok(self)
    }

    /// Scale of the sinh argument (`1` for hyperbolic space, `√b` for Cartan–Hadamard,
    /// `0` where the density is a pure power).
    pub fn sinh_scale(&self) -> f64 {
        match self.kind {
            GeometryKind::Homogeneous => 0.0,
            GeometryKind::Hyperbolic => 1.0,
            GeometryKind::CartanHadamardConst => self.curvature_b.sqrt(),
        }
    }

    pub fn surface_density(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("radius must be positive, got {r}")));
        }
        Ok(self.ln_surface_density(Abscissa::new(r)).exp())
    }

    /// `ln Λ(r)`; finite for every representable `r > 0`, including radii where `Λ`
    /// itself overflows.
    pub fn ln_surface_density(&self, r: Abscissa) -> f64 {
        let m = self.dim - 1.0;
        match self.kind {
            GeometryKind::Homogeneous => self.sphere_area.ln() + m * r.ln_t,
            GeometryKind::Hyperbolic => self.sphere_area.ln() + m * ln_sinh(r.t, r.ln_t),
            GeometryKind::CartanHadamardConst => self.sphere_area.ln() + self.ln_jacobian(r) + m * r.ln_t,
        }
    }

    /// `ln J(r)` with `J = (sinh(√b r)/(√b r))^{n-1}`.
    fn ln_jacobian(&self, r: Abscissa) -> f64 {
        let b = self.curvature_b;
        if b == 0.0 {
            return 0.0;
        }
        let m = self.dim - 1.0;
        let sb = b.sqrt();
        let x = sb * r.t;
        if x < J_SERIES_CUTOFF {
            // ln(sinh x / x) = x²/6 - x⁴/180 + ...
            let x2 = x * x;
            m * x2 * (1.0 / 6.0 - x2 / 180.0)
        } else {
            let ln_x = sb.ln() + r.ln_t;
            m * (ln_sinh(x, ln_x) - ln_x)
        }
    }

    pub fn tail_profile(&self) -> TailProfile {
        let m = self.dim - 1.0;
        let growth_at_infinity = match self.kind {
            GeometryKind::Homogeneous => Growth::PowerLaw(m),
            GeometryKind::CartanHadamardConst if self.curvature_b == 0.0 => Growth::PowerLaw(m),
            _ => Growth::Exponential(m * self.sinh_scale()),
        };
        TailProfile {
            exponent_at_zero: m,
            growth_at_infinity,
        }
    }

    /// Endpoint behaviour of `Λ` for the quadrature engine.
    pub fn hints(&self) -> EndpointHints {
        let p = self.tail_profile();
        let inf = match p.growth_at_infinity {
            Growth::PowerLaw(e) => Asymptote::power(e),
            Growth::Exponential(rate) => Asymptote::exponential(rate, 0.0),
        };
        EndpointHints::new(p.exponent_at_zero, inf)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn homogeneous_cube() {
        let g = RadialGeometry::homogeneous(4.0, 1.0).unwrap();
        assert_relative_eq!(g.surface_density(2.0).unwrap(), 8.0, max_relative = 1e-15);
    }

    #[test]
    fn flat_cartan_hadamard_is_euclidean() {
        let ch = RadialGeometry::cartan_hadamard(3.0, 0.0).unwrap();
        let h = RadialGeometry::homogeneous(3.0, unit_sphere_area(3.0)).unwrap();
        assert_eq!(ch.surface_density(1.7).unwrap(), h.surface_density(1.7).unwrap());
    }

    #[test]
    fn small_radius_hyperbolic_plane() {
        let g = RadialGeometry::hyperbolic(2.0).unwrap();
        let exact = 2.0 * PI * 1e-6f64.sinh();
        assert_relative_eq!(g.surface_density(1e-6).unwrap(), exact, max_relative = 1e-14);
        assert_relative_eq!(
            g.surface_density(1e-6).unwrap(),
            2.0 * PI * 1e-6,
            max_relative = 1e-12
        );
    }

    #[test]
    fn sphere_areas() {
        assert_relative_eq!(unit_sphere_area(2.0), 2.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(unit_sphere_area(3.0), 4.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(unit_sphere_area(4.0), 2.0 * PI * PI, max_relative = 1e-14);
    }

    #[test]
    fn profiles() {
        let p = RadialGeometry::homogeneous(4.0, 1.0).unwrap().tail_profile();
        assert_eq!(p.exponent_at_zero, 3.0);
        assert_eq!(p.growth_at_infinity, Growth::PowerLaw(3.0));
        let p = RadialGeometry::hyperbolic(3.0).unwrap().tail_profile();
        assert_eq!(p.growth_at_infinity, Growth::Exponential(2.0));
        let p = RadialGeometry::cartan_hadamard(2.0, 4.0).unwrap().tail_profile();
        assert_eq!(
            (p.exponent_at_zero, p.growth_at_infinity),
            (1.0, Growth::Exponential(2.0))
        );
    }

    #[test]
    fn jacobian_series_matches_closed_form_at_cutoff() {
        let g = RadialGeometry::cartan_hadamard(5.0, 4.0).unwrap();
        let r = J_SERIES_CUTOFF / 2.0;
        let below = g.ln_jacobian(Abscissa::new(r * (1.0 - 1e-9)));
        let above = g.ln_jacobian(Abscissa::new(r * (1.0 + 1e-9)));
        assert_relative_eq!(below, above, max_relative = 1e-6);
        let x = 2.0 * r;
        assert_relative_eq!(below, 4.0 * x * x / 6.0, max_relative = 1e-6);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(RadialGeometry::homogeneous(0.0, 1.0).is_err());
        assert!(RadialGeometry::homogeneous(3.0, -1.0).is_err());
        assert!(RadialGeometry::cartan_hadamard(3.0, -0.1).is_err());
        let g = RadialGeometry::hyperbolic(2.0).unwrap();
        assert!(g.surface_density(0.0).is_err());
        assert!(g.surface_density(-1.0).is_err());
    }
}

//! Geodesic distance kernels on the unit sphere.
//!
//! The central object is the equal-latitude offset `sigma(phi0, dtheta)`: the
//! geodesic (great-circle) distance between two points that sit on the same
//! latitude circle `phi0` and differ by `dtheta` in longitude,
//!
//! ```text
//! sigma(phi0, dtheta) = arccos(sin^2(phi0) + cos^2(phi0) * cos(dtheta)).
//! ```
//!
//! An equivalent arcsine form, `2 * asin(cos(phi0) * |sin(dtheta/2)|)`, is
//! exposed separately as a cross-check, together with two-sided bounds and
//! the leading-order expansion `cos(phi0) * |dtheta|`.

use crate::{Error, Result};
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

/// Below this longitudinal offset, `arccos` of an argument near 1 loses
/// precision (the relative error grows like eps / offset^2, exceeding 1e-13
/// under ~0.05 rad); the arcsine identity is well-conditioned there, so the
/// kernel switches forms.
const STABLE_OFFSET: f64 = 0.06;

/// Wraps an angle into `(-pi, pi]`. In-range values pass through unchanged,
/// so already-wrapped angles keep their exact bits.
pub fn wrap_to_pi(angle: f64) -> f64 {
    if angle > -PI && angle <= PI {
        return angle;
    }
    let r = angle.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Wraps an angle into `[0, 2*pi)`. In-range values pass through unchanged.
pub fn wrap_to_2pi(angle: f64) -> f64 {
    if (0.0..TAU).contains(&angle) {
        return angle;
    }
    let r = angle.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// A latitude in `[0, pi/2)`, measured from the equator.
///
/// Negative latitudes are not represented here: the offset kernel depends
/// only on `|phi0|`, and the two-circle model tags each codebook entry with
/// its supporting circle instead.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct Latitude(f64);

impl Latitude {
    /// The equator, `phi0 = 0`.
    pub const EQUATOR: Latitude = Latitude(0.0);

    pub fn new(radians: f64) -> Result<Self> {
        if !radians.is_finite() || !(0.0..FRAC_PI_2).contains(&radians) {
            return Err(Error::InvalidArgument(format!(
                "latitude {radians} out of range: must satisfy 0 <= phi0 < pi/2"
            )));
        }
        Ok(Latitude(radians))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_equator(self) -> bool {
        self.0 == 0.0
    }
}

/// A longitudinal offset normalized to `(-pi, pi]` at construction, so
/// downstream code never re-wraps.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct AngularOffset(f64);

impl AngularOffset {
    pub fn new(radians: f64) -> Result<Self> {
        if !radians.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "angular offset must be finite, got {radians}"
            )));
        }
        Ok(AngularOffset(wrap_to_pi(radians)))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// A point on the unit sphere in latitude/longitude coordinates.
///
/// `phi` is the latitude in `[-pi/2, pi/2]` measured from the equator;
/// `theta` is the longitude, normalized to `[0, 2*pi)` at construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpherePoint {
    pub phi: f64,
    pub theta: f64,
}

impl SpherePoint {
    pub fn new(phi: f64, theta: f64) -> Result<Self> {
        if !phi.is_finite() || !(-FRAC_PI_2..=FRAC_PI_2).contains(&phi) {
            return Err(Error::InvalidArgument(format!(
                "latitude {phi} out of range [-pi/2, pi/2]"
            )));
        }
        if !theta.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "longitude must be finite, got {theta}"
            )));
        }
        Ok(SpherePoint {
            phi,
            theta: wrap_to_2pi(theta),
        })
    }

    /// The embedded unit vector `(cos(phi)cos(theta), cos(phi)sin(theta), sin(phi))`.
    pub fn unit_vector(self) -> [f64; 3] {
        let (sp, cp) = self.phi.sin_cos();
        let (st, ct) = self.theta.sin_cos();
        [cp * ct, cp * st, sp]
    }
}

/// Cached `sin^2`, `cos^2`, and `cos` of one latitude, for evaluating many
/// offsets at that latitude without recomputing the trigonometry.
#[derive(Debug, Clone, Copy)]
pub struct LatitudeKernel {
    phi0: f64,
    sin2: f64,
    cos2: f64,
    cos_phi: f64,
}

impl LatitudeKernel {
    pub fn new(phi0: Latitude) -> Self {
        let (s, c) = phi0.value().sin_cos();
        LatitudeKernel {
            phi0: phi0.value(),
            sin2: s * s,
            cos2: c * c,
            cos_phi: c,
        }
    }

    pub fn latitude(&self) -> f64 {
        self.phi0
    }

    pub fn cos_phi(&self) -> f64 {
        self.cos_phi
    }

    /// Geodesic distance between two points on this latitude circle separated
    /// by `dtheta` in longitude. Even in `dtheta`; `dtheta` need not be
    /// pre-wrapped.
    pub fn sigma(&self, dtheta: f64) -> f64 {
        if self.sin2 == 0.0 {
            // On the equator the distance is the wrapped offset itself.
            return wrap_to_pi(dtheta).abs();
        }
        let dt = dtheta.abs();
        if dt < STABLE_OFFSET {
            2.0 * (self.cos_phi * (0.5 * dt).sin()).asin()
        } else {
            let u = self.sin2 + self.cos2 * dt.cos();
            u.clamp(-1.0, 1.0).acos()
        }
    }

    /// Squared offset distance, the quantity summed in distortion totals.
    pub fn sigma_sq(&self, dtheta: f64) -> f64 {
        let s = self.sigma(dtheta);
        s * s
    }

    /// Geodesic distance from a point on this circle to a point on the
    /// antipodal circle at latitude `-phi0`, separated by `dtheta` in
    /// longitude: `arccos(-sin^2(phi0) + cos^2(phi0) * cos(dtheta))`.
    pub fn sigma_cross(&self, dtheta: f64) -> f64 {
        let u = -self.sin2 + self.cos2 * dtheta.abs().cos();
        u.clamp(-1.0, 1.0).acos()
    }
}

/// Geodesic (great-circle) distance `arccos(a . b)` between two sphere
/// points, with the dot product clipped to `[-1, 1]` so rounding noise never
/// reaches `arccos`. Result lies in `[0, pi]`.
pub fn geodesic_distance(a: SpherePoint, b: SpherePoint) -> f64 {
    let u = a.unit_vector();
    let v = b.unit_vector();
    let dot = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    dot.clamp(-1.0, 1.0).acos()
}

/// Equal-latitude geodesic offset `sigma(phi0, dtheta)`.
///
/// Equals [`geodesic_distance`] between two points at latitude `phi0`
/// separated by `dtheta` in longitude; even in `dtheta`, and bounded by
/// `pi - 2*phi0`.
pub fn sigma(phi0: Latitude, dtheta: AngularOffset) -> f64 {
    LatitudeKernel::new(phi0).sigma(dtheta.value())
}

/// Arcsine form of the offset distance: `2 * asin(cos(phi0) * |sin(dtheta/2)|)`.
///
/// Algebraically identical to [`sigma`]; kept as an independent evaluation
/// route for cross-checking.
pub fn sigma_arcsin(phi0: Latitude, dtheta: AngularOffset) -> f64 {
    let c = phi0.value().cos();
    2.0 * (c * (0.5 * dtheta.value()).sin().abs()).asin()
}

/// Two-sided bounds `2*cos(phi0)*|sin(dtheta/2)| <= sigma <= |dtheta|`,
/// returned as `(lower, upper)`. The upper bound is attained exactly on the
/// equator or at zero offset.
pub fn sigma_bounds(phi0: Latitude, dtheta: AngularOffset) -> (f64, f64) {
    let c = phi0.value().cos();
    let lower = 2.0 * c * (0.5 * dtheta.value()).sin().abs();
    (lower, dtheta.value().abs())
}

/// Leading-order expansion `cos(phi0) * |dtheta|` of the offset distance.
///
/// The remainder is cubic in the offset: `|sigma - sigma_local| / |dtheta|^3`
/// stays bounded as `dtheta -> 0`.
pub fn sigma_local(phi0: Latitude, dtheta: AngularOffset) -> f64 {
    phi0.value().cos() * dtheta.value().abs()
}

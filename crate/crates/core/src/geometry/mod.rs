//! Convex cores and outer domains: implicit functions, normals, tangent
//! frames, and the boundary projection used as retraction by the
//! finite-difference calculus.
//!
//! All values are immutable after construction and every operation is a
//! pure function of its inputs, so everything here is safe to share and
//! evaluate concurrently.

mod convex;
mod outer;

pub use convex::{ConvexCore, CorePoint, ShapeKind, TangentFrame};
pub use outer::{OuterDomain, OuterPoint, Profile};

use crate::Vec3;

/// Absolute tolerance on implicit-function values for on-surface checks.
pub const SURFACE_TOLERANCE: f64 = 1e-10;

/// Polar angle of a point in the xy-plane, in [0, 2π).
pub fn polar_angle(p: &Vec3) -> f64 {
    let a = p.y.atan2(p.x);
    if a < 0.0 {
        a + std::f64::consts::TAU
    } else {
        a
    }
}

/// Spherical angles (polar from +z, azimuth in [0, 2π)) of a nonzero vector.
pub fn spherical_angles(p: &Vec3) -> (f64, f64) {
    let r = p.norm();
    let polar = (p.z / r).clamp(-1.0, 1.0).acos();
    (polar, polar_angle(p))
}

/// Unit direction for spherical angles (polar from +z, azimuth).
pub fn direction_from_angles(polar: f64, azimuth: f64) -> Vec3 {
    Vec3::new(
        polar.sin() * azimuth.cos(),
        polar.sin() * azimuth.sin(),
        polar.cos(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn angle_round_trips() {
        let w = direction_from_angles(0.7, 5.1);
        let (polar, azimuth) = spherical_angles(&w);
        assert!((polar - 0.7).abs() < 1e-12);
        assert!((azimuth - 5.1).abs() < 1e-12);
    }

    #[test]
    fn polar_angle_wraps_into_tau() {
        assert!((polar_angle(&Vec3::new(0.0, -1.0, 0.0)) - 3.0 * FRAC_PI_2).abs() < 1e-12);
        assert!((polar_angle(&Vec3::new(-2.0, 0.0, 0.0)) - PI).abs() < 1e-12);
    }
}

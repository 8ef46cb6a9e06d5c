use crate::error::{Error, Result};
use crate::sampling;
use crate::Vec3;

use super::SURFACE_TOLERANCE;

/// Shape catalog for the convex core. Restricting to quadrics keeps the
/// boundary C² by construction, with no need for a convexity checker.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeKind {
    Circle,
    Ellipse,
    Sphere,
    Ellipsoid,
}

/// Smooth compact convex body centered at the origin, given by the implicit
/// function g(x) = Σ (x_i / a_i)² − 1 over the ambient dimension.
#[derive(Debug, Clone)]
pub struct ConvexCore {
    kind: ShapeKind,
    semi_axes: Vec3,
    dim: usize,
}

/// A validated point on the core boundary (|g| ≤ `SURFACE_TOLERANCE`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorePoint {
    pos: Vec3,
}

impl CorePoint {
    pub fn position(&self) -> Vec3 {
        self.pos
    }
}

/// Orthonormal frame at a core boundary point: outward unit normal plus
/// `ambient_dim − 1` tangent vectors spanning the tangent space.
#[derive(Debug, Clone, Copy)]
pub struct TangentFrame {
    base: CorePoint,
    normal: Vec3,
    tangents: [Vec3; 2],
    n_tangents: usize,
}

impl TangentFrame {
    pub fn base(&self) -> &CorePoint {
        &self.base
    }

    pub fn normal(&self) -> Vec3 {
        self.normal
    }

    pub fn tangents(&self) -> &[Vec3] {
        &self.tangents[..self.n_tangents]
    }

    pub fn tangent_dim(&self) -> usize {
        self.n_tangents
    }

    /// Embed tangent-frame coefficients as an ambient vector.
    pub fn embed(&self, coeffs: &[f64]) -> Vec3 {
        let mut v = Vec3::zeros();
        for (c, t) in coeffs.iter().zip(self.tangents()) {
            v += *c * t;
        }
        v
    }

    /// Frame with the tangent pair rotated by `angle` in the tangent plane.
    /// Only meaningful for 3D frames; 2D frames are returned unchanged.
    pub fn rotated(&self, angle: f64) -> TangentFrame {
        if self.n_tangents < 2 {
            return *self;
        }
        let (s, c) = angle.sin_cos();
        let t0 = c * self.tangents[0] + s * self.tangents[1];
        let t1 = -s * self.tangents[0] + c * self.tangents[1];
        TangentFrame {
            tangents: [t0, t1],
            ..*self
        }
    }
}

impl ConvexCore {
    pub fn circle(radius: f64) -> Result<Self> {
        Self::new(ShapeKind::Circle, Vec3::new(radius, radius, 1.0), 2)
    }

    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        Self::new(ShapeKind::Ellipse, Vec3::new(a, b, 1.0), 2)
    }

    pub fn sphere(radius: f64) -> Result<Self> {
        Self::new(ShapeKind::Sphere, Vec3::new(radius, radius, radius), 3)
    }

    pub fn ellipsoid(a: f64, b: f64, c: f64) -> Result<Self> {
        Self::new(ShapeKind::Ellipsoid, Vec3::new(a, b, c), 3)
    }

    fn new(kind: ShapeKind, semi_axes: Vec3, dim: usize) -> Result<Self> {
        for i in 0..dim {
            if !semi_axes[i].is_finite() || semi_axes[i] <= 0.0 {
                return Err(Error::InvalidParameter {
                    name: "semi_axes".into(),
                    reason: format!("axis {} must be positive and finite, got {}", i, semi_axes[i]),
                });
            }
        }
        Ok(Self {
            kind,
            semi_axes,
            dim,
        })
    }

    pub fn kind(&self) -> ShapeKind {
        self.kind
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn tangent_dim(&self) -> usize {
        self.dim - 1
    }

    pub fn semi_axes(&self) -> &[f64] {
        &self.semi_axes.as_slice()[..self.dim]
    }

    /// Characteristic length of the core (largest semi-axis).
    pub fn scale(&self) -> f64 {
        self.semi_axes()
            .iter()
            .fold(0.0_f64, |acc, a| acc.max(*a))
    }

    pub fn implicit_value(&self, p: &Vec3) -> f64 {
        let mut s = -1.0;
        for i in 0..self.dim {
            let q = p[i] / self.semi_axes[i];
            s += q * q;
        }
        s
    }

    pub fn implicit_gradient(&self, p: &Vec3) -> Vec3 {
        let mut g = Vec3::zeros();
        for i in 0..self.dim {
            g[i] = 2.0 * p[i] / (self.semi_axes[i] * self.semi_axes[i]);
        }
        g
    }

    /// Validate that `p` lies on the boundary and wrap it as a `CorePoint`.
    pub fn surface_point(&self, p: Vec3) -> Result<CorePoint> {
        if self.dim == 2 && p.z.abs() > SURFACE_TOLERANCE {
            return Err(Error::NotOnSurface {
                x: p.x,
                y: p.y,
                z: p.z,
                value: p.z.abs(),
                tolerance: SURFACE_TOLERANCE,
            });
        }
        let g = self.implicit_value(&p);
        if g.abs() > SURFACE_TOLERANCE {
            return Err(Error::NotOnSurface {
                x: p.x,
                y: p.y,
                z: p.z,
                value: g.abs(),
                tolerance: SURFACE_TOLERANCE,
            });
        }
        let mut q = p;
        if self.dim == 2 {
            q.z = 0.0;
        }
        Ok(CorePoint { pos: q })
    }

    /// Project `p` onto the boundary along the ray from the centroid.
    /// Exact for the quadric catalog: scale `p` so that g = 0.
    pub fn project_to_core(&self, p: Vec3) -> Result<CorePoint> {
        let mut q = p;
        if self.dim == 2 {
            q.z = 0.0;
        }
        let mut s2 = 0.0;
        for i in 0..self.dim {
            let r = q[i] / self.semi_axes[i];
            s2 += r * r;
        }
        if s2 < 1e-24 {
            return Err(Error::UndefinedProjectionDirection);
        }
        Ok(CorePoint {
            pos: q / s2.sqrt(),
        })
    }

    /// Boundary point hit by the ray from the centroid along `dir`.
    pub fn boundary_point_in_direction(&self, dir: &Vec3) -> Result<CorePoint> {
        self.project_to_core(*dir)
    }

    /// Outward unit normal ∇g/|∇g| at a boundary point.
    pub fn outward_normal(&self, c: &CorePoint) -> Result<Vec3> {
        let g = self.implicit_gradient(&c.pos);
        let n = g.norm();
        if n < 1e-12 {
            return Err(Error::SingularSurfacePoint(c.pos.x, c.pos.y, c.pos.z));
        }
        let nu = g / n;
        debug_assert!(nu.dot(&c.pos) > 0.0, "normal must point away from the centroid");
        Ok(nu)
    }

    /// Deterministic orthonormal tangent frame at `c`.
    ///
    /// 2D: the tangent is the normal rotated by +90°. 3D: Gram–Schmidt
    /// seeded with the global axis least aligned with the normal (ties
    /// broken in x, y, z order), completed by the cross product.
    pub fn tangent_frame(&self, c: &CorePoint) -> Result<TangentFrame> {
        let normal = self.outward_normal(c)?;
        let mut tangents = [Vec3::zeros(); 2];
        let n_tangents = self.tangent_dim();
        if self.dim == 2 {
            tangents[0] = Vec3::new(-normal.y, normal.x, 0.0);
        } else {
            let axes = [Vec3::x(), Vec3::y(), Vec3::z()];
            let mut seed = 0;
            let mut best = f64::INFINITY;
            for (i, axis) in axes.iter().enumerate() {
                let align = axis.dot(&normal).abs();
                if align < best {
                    best = align;
                    seed = i;
                }
            }
            let t0 = axes[seed] - axes[seed].dot(&normal) * normal;
            tangents[0] = t0 / t0.norm();
            tangents[1] = normal.cross(&tangents[0]);
        }
        Ok(TangentFrame {
            base: *c,
            normal,
            tangents,
            n_tangents,
        })
    }

    /// Deterministic low-discrepancy boundary sample. Uniform angles on
    /// planar shapes, Fibonacci lattice directions on 3D shapes.
    pub fn sample_boundary(&self, n: usize) -> Vec<CorePoint> {
        sampling::directions(self.dim, n)
            .iter()
            .map(|w| {
                self.boundary_point_in_direction(w)
                    .expect("sample directions are nonzero")
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_3, PI};

    #[test]
    fn sphere_normal_is_radial() {
        let core = ConvexCore::sphere(1.0).unwrap();
        let c = core.surface_point(Vec3::new(1.0, 0.0, 0.0)).unwrap();
        let nu = core.outward_normal(&c).unwrap();
        assert!((nu - Vec3::new(1.0, 0.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn circle_normal_is_radial() {
        let core = ConvexCore::circle(1.0).unwrap();
        let th = FRAC_PI_3;
        let c = core
            .surface_point(Vec3::new(th.cos(), th.sin(), 0.0))
            .unwrap();
        let nu = core.outward_normal(&c).unwrap();
        assert!((nu - Vec3::new(th.cos(), th.sin(), 0.0)).norm() < 1e-12);
    }

    #[test]
    fn ellipse_normal_at_apex() {
        let core = ConvexCore::ellipse(2.0, 1.0).unwrap();
        let c = core.surface_point(Vec3::new(2.0, 0.0, 0.0)).unwrap();
        let nu = core.outward_normal(&c).unwrap();
        assert!((nu - Vec3::new(1.0, 0.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn frame_convention_in_2d() {
        let core = ConvexCore::circle(1.0).unwrap();
        let c = core.surface_point(Vec3::new(1.0, 0.0, 0.0)).unwrap();
        let f = core.tangent_frame(&c).unwrap();
        assert_eq!(f.tangent_dim(), 1);
        assert!((f.tangents()[0] - Vec3::new(0.0, 1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn frame_convention_at_sphere_pole_and_equator() {
        let core = ConvexCore::sphere(1.0).unwrap();

        let pole = core.surface_point(Vec3::new(0.0, 0.0, 1.0)).unwrap();
        let f = core.tangent_frame(&pole).unwrap();
        for t in f.tangents() {
            assert!(t.z.abs() < 1e-14, "pole tangents must span the xy-plane");
        }

        // Seed axis at (1,0,0) is y (least aligned, ties broken in order),
        // so the frame is {(0,1,0), (0,0,1)}.
        let eq = core.surface_point(Vec3::new(1.0, 0.0, 0.0)).unwrap();
        let f = core.tangent_frame(&eq).unwrap();
        assert!((f.tangents()[0] - Vec3::new(0.0, 1.0, 0.0)).norm() < 1e-14);
        assert!((f.tangents()[1] - Vec3::new(0.0, 0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn projection_examples() {
        let circle = ConvexCore::circle(1.0).unwrap();
        let p = circle.project_to_core(Vec3::new(2.0, 0.0, 0.0)).unwrap();
        assert!((p.position() - Vec3::new(1.0, 0.0, 0.0)).norm() < 1e-15);

        let sphere = ConvexCore::sphere(1.0).unwrap();
        let p = sphere.project_to_core(Vec3::new(0.3, 0.4, 0.0)).unwrap();
        assert!((p.position() - Vec3::new(0.6, 0.8, 0.0)).norm() < 1e-15);

        let ellipse = ConvexCore::ellipse(2.0, 1.0).unwrap();
        let p = ellipse.project_to_core(Vec3::new(2.0, 2.0, 0.0)).unwrap();
        let expected = 2.0 / 5.0_f64.sqrt();
        assert!((p.position() - Vec3::new(expected, expected, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn projection_from_centroid_fails() {
        let core = ConvexCore::sphere(1.0).unwrap();
        let err = core.project_to_core(Vec3::zeros()).unwrap_err();
        assert!(matches!(err, Error::UndefinedProjectionDirection));
    }

    #[test]
    fn planar_surface_point_rejects_out_of_plane() {
        let core = ConvexCore::circle(1.0).unwrap();
        assert!(core.surface_point(Vec3::new(1.0, 0.0, 0.5)).is_err());
    }

    #[test]
    fn nonpositive_semi_axis_rejected() {
        assert!(ConvexCore::ellipse(2.0, 0.0).is_err());
        assert!(ConvexCore::ellipsoid(1.0, -1.0, 1.0).is_err());
    }

    fn catalog_shape(which: u8) -> ConvexCore {
        match which % 4 {
            0 => ConvexCore::circle(1.0).unwrap(),
            1 => ConvexCore::ellipse(2.0, 1.0).unwrap(),
            2 => ConvexCore::sphere(1.0).unwrap(),
            _ => ConvexCore::ellipsoid(1.5, 1.0, 0.8).unwrap(),
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn frames_are_orthonormal_and_deterministic(
            which in 0u8..4,
            polar in 0.01..PI - 0.01,
            azimuth in 0.0..2.0 * PI,
        ) {
            let core = catalog_shape(which);
            let dir = if core.ambient_dim() == 2 {
                Vec3::new(azimuth.cos(), azimuth.sin(), 0.0)
            } else {
                super::super::direction_from_angles(polar, azimuth)
            };
            let c = core.boundary_point_in_direction(&dir).unwrap();
            let f = core.tangent_frame(&c).unwrap();

            prop_assert!((f.normal().norm() - 1.0).abs() < 1e-12);
            prop_assert!(f.normal().dot(&c.position()) > 0.0);
            for t in f.tangents() {
                prop_assert!((t.norm() - 1.0).abs() < 1e-12);
                prop_assert!(t.dot(&f.normal()).abs() < 1e-12);
            }
            if f.tangent_dim() == 2 {
                prop_assert!(f.tangents()[0].dot(&f.tangents()[1]).abs() < 1e-12);
            }

            // Bit-for-bit determinism.
            let g = core.tangent_frame(&c).unwrap();
            prop_assert_eq!(f.normal(), g.normal());
            for (a, b) in f.tangents().iter().zip(g.tangents()) {
                prop_assert_eq!(a, b);
            }
        }

        #[test]
        fn projection_is_idempotent(
            which in 0u8..4,
            polar in 0.01..PI - 0.01,
            azimuth in 0.0..2.0 * PI,
            radius in 0.2..5.0,
        ) {
            let core = catalog_shape(which);
            let dir = if core.ambient_dim() == 2 {
                Vec3::new(azimuth.cos(), azimuth.sin(), 0.0)
            } else {
                super::super::direction_from_angles(polar, azimuth)
            };
            let p = core.project_to_core(radius * dir).unwrap();
            let q = core.project_to_core(p.position()).unwrap();
            prop_assert!((p.position() - q.position()).norm() < 1e-12);
        }
    }
}

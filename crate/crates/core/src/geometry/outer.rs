use crate::error::{Error, Result};
use crate::sampling;
use crate::Vec3;

use super::SURFACE_TOLERANCE;

/// Radial bump profile f evaluated on unit directions, with closed-form
/// ambient gradients so normals never go through spherical coordinates
/// (no pole singularities). Profiles compose by summation.
#[derive(Debug, Clone)]
pub enum Profile {
    /// f(ω) = c.
    Constant(f64),
    /// f(ω) = ω·e_axis — the cosine of the angle to that axis.
    AxisCosine { axis: usize },
    /// f(ω) = amplitude · exp(−κ |ω − center|²), `center` a unit vector.
    Bump {
        center: Vec3,
        kappa: f64,
        amplitude: f64,
    },
    /// f(ω) = coeff · ω_x^p ω_y^q ω_z^r.
    Monomial { coeff: f64, powers: [u32; 3] },
    /// Pointwise sum of the parts.
    Sum(Vec<Profile>),
}

impl Profile {
    pub fn value(&self, w: &Vec3) -> f64 {
        match self {
            Profile::Constant(c) => *c,
            Profile::AxisCosine { axis } => w[*axis],
            Profile::Bump {
                center,
                kappa,
                amplitude,
            } => amplitude * (-kappa * (w - center).norm_squared()).exp(),
            Profile::Monomial { coeff, powers } => {
                let mut v = *coeff;
                for i in 0..3 {
                    v *= w[i].powi(powers[i] as i32);
                }
                v
            }
            Profile::Sum(parts) => parts.iter().map(|p| p.value(w)).sum(),
        }
    }

    /// Gradient of the natural smooth extension of f, evaluated at a unit
    /// direction. Callers project it tangentially where needed.
    pub fn ambient_gradient(&self, w: &Vec3) -> Vec3 {
        match self {
            Profile::Constant(_) => Vec3::zeros(),
            Profile::AxisCosine { axis } => {
                let mut g = Vec3::zeros();
                g[*axis] = 1.0;
                g
            }
            Profile::Bump {
                center,
                kappa,
                amplitude,
            } => {
                let d = w - center;
                let v = amplitude * (-kappa * d.norm_squared()).exp();
                -2.0 * kappa * v * d
            }
            Profile::Monomial { coeff, powers } => {
                let mut g = Vec3::zeros();
                for i in 0..3 {
                    if powers[i] == 0 {
                        continue;
                    }
                    let mut v = *coeff * powers[i] as f64 * w[i].powi(powers[i] as i32 - 1);
                    for j in 0..3 {
                        if j != i {
                            v *= w[j].powi(powers[j] as i32);
                        }
                    }
                    g[i] += v;
                }
                g
            }
            Profile::Sum(parts) => parts.iter().map(|p| p.ambient_gradient(w)).sum(),
        }
    }

    /// Upper bound on |f| over unit directions.
    pub fn bound(&self) -> f64 {
        match self {
            Profile::Constant(c) => c.abs(),
            Profile::AxisCosine { .. } => 1.0,
            Profile::Bump { amplitude, .. } => amplitude.abs(),
            Profile::Monomial { coeff, .. } => coeff.abs(),
            Profile::Sum(parts) => parts.iter().map(|p| p.bound()).sum(),
        }
    }

    fn valid_for_dim(&self, dim: usize) -> Result<()> {
        match self {
            Profile::Constant(_) => Ok(()),
            Profile::AxisCosine { axis } => {
                if *axis >= dim {
                    return Err(Error::InvalidParameter {
                        name: "profile.axis".into(),
                        reason: format!("axis {axis} out of range for ambient dimension {dim}"),
                    });
                }
                Ok(())
            }
            Profile::Bump { center, kappa, .. } => {
                if (center.norm() - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidParameter {
                        name: "profile.center".into(),
                        reason: "bump center must be a unit vector".into(),
                    });
                }
                if dim == 2 && center.z.abs() > 1e-12 {
                    return Err(Error::InvalidParameter {
                        name: "profile.center".into(),
                        reason: "bump center must lie in the xy-plane for planar domains".into(),
                    });
                }
                if kappa.is_nan() || *kappa <= 0.0 {
                    return Err(Error::InvalidParameter {
                        name: "profile.kappa".into(),
                        reason: format!("kappa must be positive, got {kappa}"),
                    });
                }
                Ok(())
            }
            Profile::Monomial { powers, .. } => {
                if dim == 2 && powers[2] != 0 {
                    return Err(Error::InvalidParameter {
                        name: "profile.powers".into(),
                        reason: "z power must be zero for planar domains".into(),
                    });
                }
                Ok(())
            }
            Profile::Sum(parts) => {
                for p in parts {
                    p.valid_for_dim(dim)?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone)]
enum Representation {
    /// Boundary is the radial graph r(ω) = ρ (1 + ε f(ω)).
    RadialGraph {
        base_radius: f64,
        amplitude: f64,
        profile: Profile,
    },
    /// Boundary is the quadric Σ (x_i / a_i)² = 1.
    Quadric { semi_axes: Vec3 },
}

/// The admissible open set Ω enclosing the core, as Ω = {g < 0}. Radial
/// graphs are exposed through the same implicit form as quadrics so one
/// gradient/normal code path serves both representations.
#[derive(Debug, Clone)]
pub struct OuterDomain {
    rep: Representation,
    dim: usize,
}

/// A validated point on the outer boundary (|g| ≤ `SURFACE_TOLERANCE`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuterPoint {
    pos: Vec3,
}

impl OuterPoint {
    pub fn position(&self) -> Vec3 {
        self.pos
    }
}

impl OuterDomain {
    /// Radial graph r(ω) = ρ (1 + ε f(ω)). Requires |ε|·sup|f| < 1 so the
    /// graph radius stays positive.
    pub fn radial_graph(dim: usize, base_radius: f64, amplitude: f64, profile: Profile) -> Result<Self> {
        if !base_radius.is_finite() || base_radius <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "base_radius".into(),
                reason: format!("must be positive and finite, got {base_radius}"),
            });
        }
        if !amplitude.is_finite() || amplitude.abs() * profile.bound() >= 1.0 {
            return Err(Error::InvalidParameter {
                name: "amplitude".into(),
                reason: format!(
                    "|amplitude| * sup|f| = {} must be < 1 for a well-defined radial graph",
                    amplitude.abs() * profile.bound()
                ),
            });
        }
        profile.valid_for_dim(dim)?;
        Ok(Self {
            rep: Representation::RadialGraph {
                base_radius,
                amplitude,
                profile,
            },
            dim,
        })
    }

    /// Quadric outer boundary with the given semi-axes.
    pub fn quadric(dim: usize, semi_axes: Vec3) -> Result<Self> {
        for i in 0..dim {
            if !semi_axes[i].is_finite() || semi_axes[i] <= 0.0 {
                return Err(Error::InvalidParameter {
                    name: "semi_axes".into(),
                    reason: format!("axis {} must be positive and finite, got {}", i, semi_axes[i]),
                });
            }
        }
        Ok(Self {
            rep: Representation::Quadric { semi_axes },
            dim,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn implicit_value(&self, p: &Vec3) -> f64 {
        match &self.rep {
            Representation::RadialGraph {
                base_radius,
                amplitude,
                profile,
            } => {
                let r = p.norm();
                if r < 1e-12 {
                    // Deep interior; the direction is irrelevant there.
                    return -base_radius;
                }
                let w = p / r;
                r - base_radius * (1.0 + amplitude * profile.value(&w))
            }
            Representation::Quadric { semi_axes } => {
                let mut s = -1.0;
                for i in 0..self.dim {
                    let q = p[i] / semi_axes[i];
                    s += q * q;
                }
                s
            }
        }
    }

    pub fn implicit_gradient(&self, p: &Vec3) -> Result<Vec3> {
        match &self.rep {
            Representation::RadialGraph {
                base_radius,
                amplitude,
                profile,
            } => {
                let r = p.norm();
                if r < 1e-12 {
                    return Err(Error::UndefinedDirection);
                }
                let w = p / r;
                let df = profile.ambient_gradient(&w);
                let tangential = df - df.dot(&w) * w;
                Ok(w - (base_radius * amplitude / r) * tangential)
            }
            Representation::Quadric { semi_axes } => {
                let mut g = Vec3::zeros();
                for i in 0..self.dim {
                    g[i] = 2.0 * p[i] / (semi_axes[i] * semi_axes[i]);
                }
                Ok(g)
            }
        }
    }

    /// Inward unit normal −∇g/|∇g| at a boundary point; moving along it
    /// decreases g, i.e. enters Ω.
    pub fn inward_normal(&self, x: &OuterPoint) -> Result<Vec3> {
        let g = self.implicit_gradient(&x.pos)?;
        let n = g.norm();
        if n < 1e-12 {
            return Err(Error::SingularOuterPoint(x.pos.x, x.pos.y, x.pos.z));
        }
        Ok(-g / n)
    }

    /// Validate that `p` lies on the boundary and wrap it as an `OuterPoint`.
    pub fn surface_point(&self, p: Vec3) -> Result<OuterPoint> {
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
        Ok(OuterPoint { pos: q })
    }

    /// Boundary point in the (nonzero) direction `dir` from the origin.
    pub fn boundary_point_in_direction(&self, dir: &Vec3) -> Result<OuterPoint> {
        let mut d = *dir;
        if self.dim == 2 {
            d.z = 0.0;
        }
        let n = d.norm();
        if n < 1e-12 {
            return Err(Error::UndefinedDirection);
        }
        let w = d / n;
        match &self.rep {
            Representation::RadialGraph {
                base_radius,
                amplitude,
                profile,
            } => {
                let r = base_radius * (1.0 + amplitude * profile.value(&w));
                Ok(OuterPoint { pos: r * w })
            }
            Representation::Quadric { semi_axes } => {
                let mut s2 = 0.0;
                for i in 0..self.dim {
                    let q = w[i] / semi_axes[i];
                    s2 += q * q;
                }
                Ok(OuterPoint {
                    pos: w / s2.sqrt(),
                })
            }
        }
    }

    /// Radius of a ball centered at the origin guaranteed to contain ∂Ω.
    pub fn circumscribed_radius(&self) -> f64 {
        match &self.rep {
            Representation::RadialGraph {
                base_radius,
                amplitude,
                profile,
            } => base_radius * (1.0 + amplitude.abs() * profile.bound()),
            Representation::Quadric { semi_axes } => {
                let mut r = 0.0_f64;
                for i in 0..self.dim {
                    r = r.max(semi_axes[i]);
                }
                r
            }
        }
    }

    /// Deterministic low-discrepancy boundary sample.
    pub fn sample_boundary(&self, n: usize) -> Vec<OuterPoint> {
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

    fn fd_gradient(outer: &OuterDomain, p: &Vec3) -> Vec3 {
        let h = 1e-6;
        let mut g = Vec3::zeros();
        for i in 0..3 {
            let mut pp = *p;
            let mut pm = *p;
            pp[i] += h;
            pm[i] -= h;
            g[i] = (outer.implicit_value(&pp) - outer.implicit_value(&pm)) / (2.0 * h);
        }
        g
    }

    #[test]
    fn concentric_sphere_inward_normal() {
        let outer = OuterDomain::radial_graph(3, 2.0, 0.0, Profile::Constant(0.0)).unwrap();
        let x = outer.surface_point(Vec3::new(2.0, 0.0, 0.0)).unwrap();
        let n = outer.inward_normal(&x).unwrap();
        assert!((n - Vec3::new(-1.0, 0.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn unperturbed_inward_normal_is_antiradial() {
        let outer = OuterDomain::radial_graph(3, 1.7, 0.0, Profile::Constant(0.0)).unwrap();
        for x in outer.sample_boundary(32) {
            let n = outer.inward_normal(&x).unwrap();
            let w = x.position() / x.position().norm();
            assert!((n + w).norm() < 1e-10);
        }
    }

    #[test]
    fn cosine_graph_gradient_matches_finite_differences() {
        let outer =
            OuterDomain::radial_graph(2, 1.5, 0.1, Profile::AxisCosine { axis: 0 }).unwrap();
        // θ = 0, radius 1.5 · 1.1 = 1.65.
        let x = outer.surface_point(Vec3::new(1.65, 0.0, 0.0)).unwrap();
        let grad = outer.implicit_gradient(&x.position()).unwrap();
        let fd = fd_gradient(&outer, &x.position());
        assert!((grad - fd).norm() < 1e-6);

        let n = outer.inward_normal(&x).unwrap();
        assert!(n.dot(&x.position()) < 0.0, "inward normal points inward");

        // Moving along the inward normal must decrease g.
        let step = 1e-6;
        let inside = outer.implicit_value(&(x.position() + step * n));
        assert!(inside < -0.5 * step);
    }

    #[test]
    fn bump_and_monomial_gradients_match_finite_differences() {
        let profile = Profile::Sum(vec![
            Profile::Bump {
                center: Vec3::new(0.0, 0.0, 1.0),
                kappa: 1.5,
                amplitude: -1.0,
            },
            Profile::Monomial {
                coeff: 0.3,
                powers: [1, 1, 0],
            },
        ]);
        let outer = OuterDomain::radial_graph(3, 1.4, 0.05, profile).unwrap();
        let dirs = [
            Vec3::new(0.3, 0.5, 0.8),
            Vec3::new(-0.7, 0.2, 0.4),
            Vec3::new(0.1, -0.9, -0.3),
        ];
        for d in dirs {
            let x = outer.boundary_point_in_direction(&d).unwrap();
            let grad = outer.implicit_gradient(&x.position()).unwrap();
            let fd = fd_gradient(&outer, &x.position());
            assert!((grad - fd).norm() < 1e-6, "mismatch at {d:?}");
        }
    }

    #[test]
    fn quadric_and_radial_graph_agree_on_concentric_circle() {
        let rg = OuterDomain::radial_graph(2, 2.0, 0.0, Profile::Constant(0.0)).unwrap();
        let q = OuterDomain::quadric(2, Vec3::new(2.0, 2.0, 1.0)).unwrap();
        for th in [0.0, 0.9, 2.4, 4.0] {
            let w = Vec3::new(f64::cos(th), f64::sin(th), 0.0);
            let a = rg.boundary_point_in_direction(&w).unwrap();
            let b = q.boundary_point_in_direction(&w).unwrap();
            assert!((a.position() - b.position()).norm() < 1e-12);
        }
    }

    #[test]
    fn overlarge_amplitude_rejected() {
        let err = OuterDomain::radial_graph(2, 1.5, 1.2, Profile::AxisCosine { axis: 0 });
        assert!(err.is_err());
    }

    #[test]
    fn gradient_at_origin_is_undefined_for_radial_graph() {
        let outer = OuterDomain::radial_graph(2, 1.5, 0.0, Profile::Constant(0.0)).unwrap();
        assert!(matches!(
            outer.implicit_gradient(&Vec3::zeros()),
            Err(Error::UndefinedDirection)
        ));
    }
}

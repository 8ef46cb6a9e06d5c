//! The thickness function and the boundary maps built on it.
//!
//! `thickness` casts a ray from a core point along the outward normal and
//! finds the first exit through the outer boundary; `radial_map` is that
//! exit point. `reciprocal_map` casts from an outer point along the inward
//! normal and lands on the core at the first entry root. `return_map`
//! advances a core point by the thickness-weighted descent step
//! c − 2 d(c) ∇d(c), retracted back to the core boundary — the normal form
//! of the boundary round trip whose dynamics the rest of the crate studies.
//!
//! Root finding: a coarse ray march brackets the first sign change of the
//! implicit value, then bisection with safeguarded Newton steps polishes
//! the root. First-root correctness matters more than speed here; Newton
//! alone can skip the first crossing.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{ConvexCore, CorePoint, OuterDomain, OuterPoint, TangentFrame};
use crate::Vec3;

/// Coarse march step relative to the scenario length scale.
pub const MARCH_STEP_REL: f64 = 1e-2;
/// Ray horizon relative to the outer circumscribed radius. Beyond it the
/// search declares failure rather than loop.
pub const HORIZON_FACTOR: f64 = 10.0;
/// Target on the implicit value at an accepted root.
pub const ROOT_VALUE_TOL: f64 = 1e-12;
/// Target on the ray parameter at an accepted root.
pub const ROOT_PARAM_TOL: f64 = 1e-10;

/// Thickness measurement at a core point: the distance d(c) to the outer
/// boundary along the outward normal and the exit point c + d·ν(c).
#[derive(Debug, Clone, Copy)]
pub struct ThicknessSample {
    pub base: CorePoint,
    pub thickness: f64,
    pub exit_point: OuterPoint,
}

/// First return from an outer boundary point to the core along the inward
/// normal: landing = start + return_time · n(start).
#[derive(Debug, Clone, Copy)]
pub struct ReciprocalResult {
    pub start: OuterPoint,
    pub return_time: f64,
    pub landing: CorePoint,
}

/// Sampled admissibility screening report.
#[derive(Debug, Clone)]
pub struct AdmissibilityReport {
    pub boundary_samples: usize,
    pub core_samples: usize,
    /// Outer boundary points whose inward-normal ray misses the core.
    pub normal_property_failures: Vec<Vec3>,
    /// Core points whose outward ray meets Ω in more than one interval.
    pub connectivity_failures: Vec<Vec3>,
    pub verdict: bool,
}

impl AdmissibilityReport {
    pub fn samples_checked(&self) -> usize {
        self.boundary_samples + self.core_samples
    }
}

/// Characteristic length of a scenario, used to scale march steps and
/// finite-difference steps.
pub fn scenario_scale(core: &ConvexCore, outer: &OuterDomain) -> f64 {
    outer.circumscribed_radius().max(core.scale())
}

struct NoCrossing;

/// First root of `g` along a ray, from a start point of known sign.
/// Marches with `step` to bracket the first sign change, then refines by
/// bisection with safeguarded Newton steps, polishing the residual to the
/// machine floor so downstream differences of thickness values are clean.
fn first_root(
    g: impl Fn(f64) -> f64,
    dg: impl Fn(f64) -> f64,
    step: f64,
    horizon: f64,
) -> std::result::Result<f64, NoCrossing> {
    let g0 = g(0.0);
    if g0 == 0.0 {
        return Ok(0.0);
    }
    let negative_side = g0 < 0.0;

    let mut lo = 0.0;
    let mut hi;
    let mut t = step;
    loop {
        if t > horizon {
            return Err(NoCrossing);
        }
        let gt = g(t);
        if gt == 0.0 {
            return Ok(t);
        }
        if (gt < 0.0) != negative_side {
            hi = t;
            break;
        }
        lo = t;
        t += step;
    }

    let mut t = 0.5 * (lo + hi);
    let mut gt = g(t);
    let mut best_t = t;
    let mut best_g = gt.abs();
    let mut stall = 0;
    for _ in 0..200 {
        if gt == 0.0 {
            return Ok(t);
        }
        if (gt < 0.0) == negative_side {
            lo = t;
        } else {
            hi = t;
        }
        let width = hi - lo;
        let converged = best_g <= 1e-15 || (width <= ROOT_PARAM_TOL && best_g <= ROOT_VALUE_TOL);
        if converged || stall >= 4 {
            break;
        }
        let slope = dg(t);
        let newton = t - gt / slope;
        t = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        gt = g(t);
        if gt.abs() < best_g {
            best_g = gt.abs();
            best_t = t;
            stall = 0;
        } else {
            stall += 1;
        }
    }
    Ok(best_t)
}

/// Thickness d(c): first exit of the outward-normal ray through ∂Ω.
pub fn thickness(core: &ConvexCore, outer: &OuterDomain, c: &CorePoint) -> Result<ThicknessSample> {
    let nu = core.outward_normal(c)?;
    let p0 = c.position();
    if outer.implicit_value(&p0) >= 0.0 {
        return Err(Error::NotInsideOuter(p0.x, p0.y, p0.z));
    }
    let scale = scenario_scale(core, outer);
    let horizon = HORIZON_FACTOR * outer.circumscribed_radius();
    let g = |t: f64| outer.implicit_value(&(p0 + t * nu));
    let dg = |t: f64| match outer.implicit_gradient(&(p0 + t * nu)) {
        Ok(grad) => grad.dot(&nu),
        Err(_) => f64::NAN,
    };
    let d = first_root(g, dg, MARCH_STEP_REL * scale, horizon)
        .map_err(|_| Error::OuterBoundaryNotReached { horizon })?;
    if d <= 0.0 {
        return Err(Error::NotInsideOuter(p0.x, p0.y, p0.z));
    }
    let exit_point = outer.surface_point(p0 + d * nu)?;
    Ok(ThicknessSample {
        base: *c,
        thickness: d,
        exit_point,
    })
}

/// Radial map Φ(c) = c + d(c) ν(c), the exit point on ∂Ω.
pub fn radial_map(core: &ConvexCore, outer: &OuterDomain, c: &CorePoint) -> Result<OuterPoint> {
    Ok(thickness(core, outer, c)?.exit_point)
}

/// Reciprocal map π(x) = x + t(x) n(x): first entry of the inward-normal
/// ray into the core. A ray that never meets the core within the horizon
/// is a geometric-normal-property failure and is reported, not patched.
pub fn reciprocal_map(
    core: &ConvexCore,
    outer: &OuterDomain,
    x: &OuterPoint,
) -> Result<ReciprocalResult> {
    let n = outer.inward_normal(x)?;
    let p0 = x.position();
    let g0 = core.implicit_value(&p0);
    if g0 < -crate::geometry::SURFACE_TOLERANCE {
        return Err(Error::InsideCore(p0.x, p0.y, p0.z));
    }
    if g0 <= ROOT_VALUE_TOL {
        // Boundaries touch at this point; the return is immediate.
        let landing = core.project_to_core(p0)?;
        return Ok(ReciprocalResult {
            start: *x,
            return_time: 0.0,
            landing,
        });
    }
    let scale = scenario_scale(core, outer);
    let horizon = HORIZON_FACTOR * outer.circumscribed_radius();
    let g = |t: f64| core.implicit_value(&(p0 + t * n));
    let dg = |t: f64| core.implicit_gradient(&(p0 + t * n)).dot(&n);
    let t = first_root(g, dg, MARCH_STEP_REL * scale, horizon)
        .map_err(|_| Error::NormalPropertyViolated(p0.x, p0.y, p0.z))?;
    let landing = core.surface_point(p0 + t * n)?;
    Ok(ReciprocalResult {
        start: *x,
        return_time: t,
        landing,
    })
}

/// Central-difference tangential gradient of the thickness over retracted
/// probes, with the realized step measured as half the chord between the
/// probes. Shared by the calculus layer and the return step.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RawGradient {
    pub frame: TangentFrame,
    pub coeffs: [f64; 2],
}

impl RawGradient {
    pub fn embed(&self) -> Vec3 {
        self.frame.embed(&self.coeffs[..self.frame.tangent_dim()])
    }

    pub fn norm(&self) -> f64 {
        self.coeffs[..self.frame.tangent_dim()]
            .iter()
            .map(|c| c * c)
            .sum::<f64>()
            .sqrt()
    }
}

pub(crate) fn thickness_gradient_in_frame(
    core: &ConvexCore,
    outer: &OuterDomain,
    frame: &TangentFrame,
    step: f64,
) -> Result<RawGradient> {
    let c = frame.base().position();
    let mut coeffs = [0.0; 2];
    for (i, tangent) in frame.tangents().iter().enumerate() {
        let plus = core.project_to_core(c + step * tangent)?;
        let minus = core.project_to_core(c - step * tangent)?;
        let half_chord = 0.5 * (plus.position() - minus.position()).norm();
        let d_plus = thickness(core, outer, &plus)
            .map_err(|e| e.at(format!("thickness probe +{i} near ({:.6}, {:.6}, {:.6})", c.x, c.y, c.z)))?
            .thickness;
        let d_minus = thickness(core, outer, &minus)
            .map_err(|e| e.at(format!("thickness probe -{i} near ({:.6}, {:.6}, {:.6})", c.x, c.y, c.z)))?
            .thickness;
        coeffs[i] = (d_plus - d_minus) / (2.0 * half_chord);
    }
    Ok(RawGradient {
        frame: *frame,
        coeffs,
    })
}

pub(crate) fn thickness_gradient(
    core: &ConvexCore,
    outer: &OuterDomain,
    c: &CorePoint,
    step: f64,
) -> Result<RawGradient> {
    let frame = core.tangent_frame(c)?;
    thickness_gradient_in_frame(core, outer, &frame, step)
}

/// One descent step of the round trip: retract c − 2 d ∇d to the core.
pub(crate) fn descent_step(core: &ConvexCore, c: &CorePoint, d: f64, grad: &Vec3) -> Result<CorePoint> {
    core.project_to_core(c.position() - 2.0 * d * grad)
}

/// Return map F: the thickness-weighted descent step of the round trip.
///
/// F(c) = retract(c − 2 d(c) ∇d(c)); fixed points are exactly the critical
/// points of the thickness, and concentric scenarios give F = identity.
pub fn return_map(core: &ConvexCore, outer: &OuterDomain, c: &CorePoint) -> Result<CorePoint> {
    let sample = thickness(core, outer, c)?;
    let grad = thickness_gradient(core, outer, c, crate::calculus::default_gradient_step(core))?;
    descent_step(core, c, sample.thickness, &grad.embed())
}

/// Sampled admissibility screening.
///
/// Every sampled outer point must send its inward-normal ray into the core
/// (geometric normal property); every sampled core point must meet Ω in a
/// single interval along its outward ray (connectivity), checked at the
/// ray-march resolution. Failures are report content, not errors.
pub fn check_admissibility(
    core: &ConvexCore,
    outer: &OuterDomain,
    n_boundary_samples: usize,
    n_core_samples: usize,
) -> AdmissibilityReport {
    let scale = scenario_scale(core, outer);
    let step = MARCH_STEP_REL * scale;
    let horizon = HORIZON_FACTOR * outer.circumscribed_radius();

    let normal_property_failures: Vec<Vec3> = outer
        .sample_boundary(n_boundary_samples)
        .par_iter()
        .filter_map(|x| {
            let n = match outer.inward_normal(x) {
                Ok(n) => n,
                Err(_) => return Some(x.position()),
            };
            let p0 = x.position();
            let mut t = 0.0;
            while t <= horizon {
                if core.implicit_value(&(p0 + t * n)) <= 0.0 {
                    return None;
                }
                t += step;
            }
            Some(p0)
        })
        .collect();

    let connectivity_failures: Vec<Vec3> = core
        .sample_boundary(n_core_samples)
        .par_iter()
        .filter_map(|c| {
            let nu = match core.outward_normal(c) {
                Ok(nu) => nu,
                Err(_) => return Some(c.position()),
            };
            let p0 = c.position();
            if outer.implicit_value(&p0) >= 0.0 {
                return Some(p0);
            }
            let mut exited = false;
            let mut t = step;
            while t <= horizon {
                let inside = outer.implicit_value(&(p0 + t * nu)) < 0.0;
                if exited && inside {
                    return Some(p0);
                }
                if !inside {
                    exited = true;
                }
                t += step;
            }
            None
        })
        .collect();

    let verdict = normal_property_failures.is_empty() && connectivity_failures.is_empty();
    AdmissibilityReport {
        boundary_samples: n_boundary_samples,
        core_samples: n_core_samples,
        normal_property_failures,
        connectivity_failures,
        verdict,
    }
}

/// Sampled thickness range (d_min, d_max) over a boundary grid.
pub fn thickness_bounds(
    core: &ConvexCore,
    outer: &OuterDomain,
    n_samples: usize,
) -> Result<(f64, f64)> {
    let samples = core.sample_boundary(n_samples);
    let values: Result<Vec<f64>> = samples
        .par_iter()
        .map(|c| thickness(core, outer, c).map(|s| s.thickness))
        .collect();
    let values = values?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok((lo, hi))
}

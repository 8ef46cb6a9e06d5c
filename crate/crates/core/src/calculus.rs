//! Finite-difference differential operators on the core boundary: the
//! tangential gradient and Hessian of the thickness function, and the
//! numerical Jacobian of the return step restricted to a tangent frame.
//!
//! Probes are retracted to the boundary by centroid-ray projection (exact
//! for the quadric catalog) and the realized step is measured as half the
//! chord between the retracted probes, correcting first-order retraction
//! distortion. The Hessian needs a larger default step than the gradient
//! to beat root-finding noise in the thickness values.

use crate::error::Result;
use crate::geometry::{ConvexCore, CorePoint, OuterDomain, TangentFrame};
use crate::maps;
use crate::Vec3;

/// Default gradient step relative to the core scale.
pub const H_GRAD_REL: f64 = 1e-5;
/// Default Hessian/Jacobian step relative to the core scale.
pub const H_HESS_REL: f64 = 1e-3;

pub fn default_gradient_step(core: &ConvexCore) -> f64 {
    H_GRAD_REL * core.scale()
}

pub fn default_hessian_step(core: &ConvexCore) -> f64 {
    H_HESS_REL * core.scale()
}

/// Tangent vector expressed as coefficients in a frame.
#[derive(Debug, Clone)]
pub struct TangentVector {
    frame: TangentFrame,
    coeffs: [f64; 2],
}

impl TangentVector {
    pub fn frame(&self) -> &TangentFrame {
        &self.frame
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs[..self.frame.tangent_dim()]
    }

    pub fn norm(&self) -> f64 {
        self.coefficients().iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Ambient embedding Σ coeff_i · tangent_i.
    pub fn embed(&self) -> Vec3 {
        self.frame.embed(self.coefficients())
    }
}

/// Small dense matrix over a tangent frame (1×1 or 2×2).
#[derive(Debug, Clone)]
pub struct TangentMatrix {
    frame: TangentFrame,
    entries: [[f64; 2]; 2],
}

impl TangentMatrix {
    pub fn frame(&self) -> &TangentFrame {
        &self.frame
    }

    pub fn dim(&self) -> usize {
        self.frame.tangent_dim()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[i][j]
    }

    /// max |m_ij − m_ji| over off-diagonal pairs.
    pub fn asymmetry(&self) -> f64 {
        if self.dim() < 2 {
            0.0
        } else {
            (self.entries[0][1] - self.entries[1][0]).abs()
        }
    }

    pub fn symmetrized(&self) -> TangentMatrix {
        let mut m = self.clone();
        if self.dim() == 2 {
            let avg = 0.5 * (self.entries[0][1] + self.entries[1][0]);
            m.entries[0][1] = avg;
            m.entries[1][0] = avg;
        }
        m
    }

    /// Eigenvalues of a symmetric matrix, ascending. Closed form; the
    /// dimension never exceeds 2.
    pub fn symmetric_eigenvalues(&self) -> Vec<f64> {
        match self.dim() {
            1 => vec![self.entries[0][0]],
            _ => {
                let a = self.entries[0][0];
                let d = self.entries[1][1];
                let b = 0.5 * (self.entries[0][1] + self.entries[1][0]);
                let mean = 0.5 * (a + d);
                let disc = (0.5 * (a - d)).hypot(b);
                vec![mean - disc, mean + disc]
            }
        }
    }

    /// Moduli of the (possibly complex) eigenvalues of a general matrix,
    /// ascending, via the characteristic polynomial.
    pub fn eigenvalue_moduli(&self) -> Vec<f64> {
        match self.dim() {
            1 => vec![self.entries[0][0].abs()],
            _ => {
                let tr = self.entries[0][0] + self.entries[1][1];
                let det = self.entries[0][0] * self.entries[1][1]
                    - self.entries[0][1] * self.entries[1][0];
                let disc = tr * tr - 4.0 * det;
                let mut out = if disc >= 0.0 {
                    let s = disc.sqrt();
                    vec![(0.5 * (tr - s)).abs(), (0.5 * (tr + s)).abs()]
                } else {
                    let m = det.sqrt();
                    vec![m, m]
                };
                out.sort_by(f64::total_cmp);
                out
            }
        }
    }

    /// Identity deviation ‖M − I‖_max, handy for degeneracy checks.
    pub fn max_identity_deviation(&self) -> f64 {
        let n = self.dim();
        let mut dev = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((self.entries[i][j] - target).abs());
            }
        }
        dev
    }
}

/// Symmetrized tangential Hessian plus the raw asymmetry diagnostic;
/// large asymmetry flags a geometry bug.
#[derive(Debug, Clone)]
pub struct HessianEstimate {
    pub matrix: TangentMatrix,
    pub raw_asymmetry: f64,
}

/// Tangential gradient ∇d over retracted probes, second-order accurate in
/// the step.
pub fn tangential_gradient(
    core: &ConvexCore,
    outer: &OuterDomain,
    c: &CorePoint,
    step: f64,
) -> Result<TangentVector> {
    let frame = core.tangent_frame(c)?;
    tangential_gradient_in_frame(core, outer, &frame, step)
}

/// As `tangential_gradient`, but in a caller-supplied frame.
pub fn tangential_gradient_in_frame(
    core: &ConvexCore,
    outer: &OuterDomain,
    frame: &TangentFrame,
    step: f64,
) -> Result<TangentVector> {
    let raw = maps::thickness_gradient_in_frame(core, outer, frame, step)?;
    Ok(TangentVector {
        frame: raw.frame,
        coeffs: raw.coeffs,
    })
}

/// Tangential Hessian of the thickness: central differences of the
/// embedded gradient over retracted probes, projected onto the frame at
/// `c` and symmetrized.
pub fn tangential_hessian(
    core: &ConvexCore,
    outer: &OuterDomain,
    c: &CorePoint,
    step: f64,
) -> Result<HessianEstimate> {
    let frame = core.tangent_frame(c)?;
    tangential_hessian_in_frame(core, outer, &frame, step)
}

/// As `tangential_hessian`, but in a caller-supplied frame.
pub fn tangential_hessian_in_frame(
    core: &ConvexCore,
    outer: &OuterDomain,
    frame: &TangentFrame,
    step: f64,
) -> Result<HessianEstimate> {
    let c = frame.base().position();
    let mut entries = [[0.0; 2]; 2];
    for (j, tangent) in frame.tangents().iter().enumerate() {
        let plus = core.project_to_core(c + step * tangent)?;
        let minus = core.project_to_core(c - step * tangent)?;
        let half_chord = 0.5 * (plus.position() - minus.position()).norm();
        let grad_plus = maps::thickness_gradient(core, outer, &plus, step)?.embed();
        let grad_minus = maps::thickness_gradient(core, outer, &minus, step)?.embed();
        let column = (grad_plus - grad_minus) / (2.0 * half_chord);
        for (i, t) in frame.tangents().iter().enumerate() {
            entries[i][j] = t.dot(&column);
        }
    }
    let raw = TangentMatrix {
        frame: *frame,
        entries,
    };
    let raw_asymmetry = raw.asymmetry();
    Ok(HessianEstimate {
        matrix: raw.symmetrized(),
        raw_asymmetry,
    })
}

/// Numerical Jacobian of the return step in the tangent frame at `c`:
/// column j is the frame projection of [F(p₊ⱼ) − F(p₋ⱼ)] / (2 h′ⱼ).
pub fn return_map_jacobian(
    core: &ConvexCore,
    outer: &OuterDomain,
    c: &CorePoint,
    step: f64,
) -> Result<TangentMatrix> {
    let frame = core.tangent_frame(c)?;
    let p = c.position();
    let mut entries = [[0.0; 2]; 2];
    for (j, tangent) in frame.tangents().iter().enumerate() {
        let plus = core.project_to_core(p + step * tangent)?;
        let minus = core.project_to_core(p - step * tangent)?;
        let half_chord = 0.5 * (plus.position() - minus.position()).norm();
        let f_plus = maps::return_map(core, outer, &plus)?;
        let f_minus = maps::return_map(core, outer, &minus)?;
        let column = (f_plus.position() - f_minus.position()) / (2.0 * half_chord);
        for (i, t) in frame.tangents().iter().enumerate() {
            entries[i][j] = t.dot(&column);
        }
    }
    Ok(TangentMatrix {
        frame,
        entries,
    })
}

//! Critical points of the thickness landscape, their stability under the
//! return step, basins of attraction, and verification of the first-order
//! expansion F(c) ≈ c − 2d∇d.

pub mod svg;

use rayon::prelude::*;

use crate::calculus::{self, TangentMatrix};
use crate::dynamics::{self, IterateOptions, Termination};
use crate::error::{Error, Result};
use crate::geometry::{ConvexCore, CorePoint, OuterDomain};
use crate::maps;
use crate::sampling;
use crate::Vec3;

/// Gradient residual required of an accepted critical point.
pub const CRITICAL_TOLERANCE: f64 = 1e-9;
/// Hessian eigenvalues below this are treated as degenerate.
pub const DEGENERACY_FLOOR: f64 = 1e-4;
/// Multiplier moduli within this margin of 1 are not classified.
pub const HYPERBOLICITY_MARGIN: f64 = 1e-3;
/// sup ‖∇d‖ below this over the multistart set marks the scenario as
/// globally critical (the concentric degeneracy).
pub const GLOBALLY_CRITICAL_THRESHOLD: f64 = 1e-7;

/// Distinct critical points closer than this merge into one.
pub fn merge_radius(core: &ConvexCore) -> f64 {
    1e-5 * core.scale()
}

/// Trajectory limits match a critical point within this radius.
pub fn basin_match_radius(core: &ConvexCore) -> f64 {
    1e-3 * core.scale()
}

/// Stability class of a fixed point, decided on multiplier moduli only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Attracting,
    Repelling,
    Saddle,
    Nonhyperbolic,
}

impl std::fmt::Display for Stability {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Stability::Attracting => "attracting",
            Stability::Repelling => "repelling",
            Stability::Saddle => "saddle",
            Stability::Nonhyperbolic => "nonhyperbolic",
        };
        f.write_str(s)
    }
}

/// A located critical point with its tangential Hessian spectrum, the
/// induced return-step multipliers μ_i = 1 − 2d·λ_i, and the stability
/// class. `jacobian_mismatch` is the independent cross-check against the
/// numerical Jacobian's eigenvalue moduli.
#[derive(Debug, Clone)]
pub struct CriticalPointRecord {
    pub location: CorePoint,
    pub thickness_at: f64,
    pub hessian_eigs: Vec<f64>,
    pub map_eigs: Vec<f64>,
    pub stability: Stability,
    pub grad_residual: f64,
    pub jacobian_mismatch: f64,
}

/// Result of a critical-point search. Concentric-style scenarios, where
/// every point is critical, report the degenerate flag instead of a list.
#[derive(Debug, Clone)]
pub enum CriticalSet {
    GloballyCritical,
    Points(Vec<CriticalPointRecord>),
}

#[derive(Debug, Clone)]
pub struct CriticalSearch {
    pub result: CriticalSet,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct SearchOptions {
    pub n_starts: usize,
    pub critical_tolerance: f64,
    /// Iteration budget for the descent/ascent sweeps feeding candidates.
    pub iteration_budget: usize,
    pub newton_iters: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            n_starts: 64,
            critical_tolerance: CRITICAL_TOLERANCE,
            iteration_budget: 2000,
            newton_iters: 40,
        }
    }
}

/// Newton refinement of ∇d = 0 in the tangent frame. Returns the refined
/// point once the gradient residual meets `tol`, or None.
fn newton_refine(
    core: &ConvexCore,
    outer: &OuterDomain,
    start: CorePoint,
    tol: f64,
    max_iters: usize,
) -> Result<Option<CorePoint>> {
    let h_grad = calculus::default_gradient_step(core);
    let h_hess = calculus::default_hessian_step(core);
    let step_cap = 0.2 * core.scale();
    let mut c = start;
    for _ in 0..max_iters {
        let grad = calculus::tangential_gradient(core, outer, &c, h_grad)?;
        if grad.norm() <= tol {
            return Ok(Some(c));
        }
        let hess = calculus::tangential_hessian(core, outer, &c, h_hess)?.matrix;
        let g = grad.coefficients();
        let delta = match hess.dim() {
            1 => {
                let h00 = hess.entry(0, 0);
                if h00.abs() < 1e-14 {
                    return Ok(None);
                }
                [-g[0] / h00, 0.0]
            }
            _ => {
                let (a, b, cc, d) = (
                    hess.entry(0, 0),
                    hess.entry(0, 1),
                    hess.entry(1, 0),
                    hess.entry(1, 1),
                );
                let det = a * d - b * cc;
                if det.abs() < 1e-14 {
                    return Ok(None);
                }
                [
                    (-g[0] * d + g[1] * b) / det,
                    (g[0] * cc - g[1] * a) / det,
                ]
            }
        };
        let mut step_vec = grad.frame().embed(&delta[..hess.dim()]);
        let norm = step_vec.norm();
        if norm > step_cap {
            step_vec *= step_cap / norm;
        }
        c = core.project_to_core(c.position() + step_vec)?;
    }
    Ok(None)
}

/// Multistart critical-point search.
///
/// Descent sweeps locate attractors, ascent sweeps (the reversed step
/// c ← c + 2d∇d) locate repellers, and tangent-frame Newton from every
/// start picks up saddles. Candidates are merged within the merge radius,
/// refined by Newton to `critical_tolerance`, classified, and sorted by
/// thickness then position.
pub fn find_critical_points(
    core: &ConvexCore,
    outer: &OuterDomain,
    opts: &SearchOptions,
) -> Result<CriticalSearch> {
    let starts = core.sample_boundary(opts.n_starts.max(1));
    let h_grad = calculus::default_gradient_step(core);
    let mut warnings = Vec::new();

    let grads: Result<Vec<f64>> = starts
        .par_iter()
        .map(|c| Ok(maps::thickness_gradient(core, outer, c, h_grad)?.norm()))
        .collect();
    let max_grad = grads?.into_iter().fold(0.0_f64, f64::max);
    if max_grad <= GLOBALLY_CRITICAL_THRESHOLD {
        return Ok(CriticalSearch {
            result: CriticalSet::GloballyCritical,
            warnings,
        });
    }

    // Sweep tolerance only needs to deliver candidates inside Newton's
    // convergence zone.
    let seed_tol = 1e-6;
    let sweep = |ascent: bool| -> Vec<CorePoint> {
        starts
            .par_iter()
            .filter_map(|start| {
                let mut c = *start;
                for _ in 0..opts.iteration_budget {
                    let (d, grad) = match maps::thickness(core, outer, &c).and_then(|s| {
                        maps::thickness_gradient(core, outer, &c, h_grad)
                            .map(|g| (s.thickness, g))
                    }) {
                        Ok(pair) => pair,
                        Err(_) => return None,
                    };
                    if grad.norm() <= seed_tol {
                        break;
                    }
                    let sign = if ascent { 1.0 } else { -1.0 };
                    c = match core.project_to_core(c.position() + sign * 2.0 * d * grad.embed()) {
                        Ok(p) => p,
                        Err(_) => return None,
                    };
                }
                Some(c)
            })
            .collect()
    };

    let mut candidates: Vec<CorePoint> = sweep(false);
    candidates.extend(sweep(true));

    let newton_hits: Vec<CorePoint> = starts
        .par_iter()
        .filter_map(|start| {
            newton_refine(core, outer, *start, opts.critical_tolerance, opts.newton_iters)
                .ok()
                .flatten()
        })
        .collect();
    if newton_hits.is_empty() {
        warnings.push("Newton search converged from no start; saddle points may be missing".into());
    }
    candidates.extend(newton_hits);

    // Refine every candidate to the acceptance residual, then merge.
    let refined: Vec<CorePoint> = candidates
        .par_iter()
        .filter_map(|c| {
            newton_refine(core, outer, *c, opts.critical_tolerance, opts.newton_iters)
                .ok()
                .flatten()
        })
        .collect();

    let merge = merge_radius(core);
    let mut distinct: Vec<CorePoint> = Vec::new();
    for c in refined {
        if distinct
            .iter()
            .all(|p| (p.position() - c.position()).norm() > merge)
        {
            distinct.push(c);
        }
    }

    let mut records = Vec::with_capacity(distinct.len());
    for c in &distinct {
        records.push(classify(core, outer, c, opts.critical_tolerance)?);
    }
    records.sort_by(|p, q| {
        p.thickness_at
            .total_cmp(&q.thickness_at)
            .then(p.location.position().x.total_cmp(&q.location.position().x))
            .then(p.location.position().y.total_cmp(&q.location.position().y))
            .then(p.location.position().z.total_cmp(&q.location.position().z))
    });

    Ok(CriticalSearch {
        result: CriticalSet::Points(records),
        warnings,
    })
}

/// Classify a critical point from its tangential Hessian.
///
/// Multipliers are μ_i = 1 − 2d·λ_i by construction; the numerical
/// Jacobian provides the independent eigenvalue-modulus cross-check
/// recorded in the result. Degenerate Hessian directions and moduli
/// inside the hyperbolicity margin yield `Nonhyperbolic`.
pub fn classify(
    core: &ConvexCore,
    outer: &OuterDomain,
    location: &CorePoint,
    critical_tolerance: f64,
) -> Result<CriticalPointRecord> {
    let h_grad = calculus::default_gradient_step(core);
    let h_hess = calculus::default_hessian_step(core);
    let grad_residual =
        calculus::tangential_gradient(core, outer, location, h_grad)?.norm();
    if grad_residual > critical_tolerance {
        return Err(Error::NotCritical {
            grad: grad_residual,
            tolerance: critical_tolerance,
        });
    }
    let thickness_at = maps::thickness(core, outer, location)?.thickness;
    let hessian = calculus::tangential_hessian(core, outer, location, h_hess)?;
    let hessian_eigs = hessian.matrix.symmetric_eigenvalues();
    let map_eigs: Vec<f64> = hessian_eigs
        .iter()
        .map(|l| 1.0 - 2.0 * thickness_at * l)
        .collect();

    let jacobian = calculus::return_map_jacobian(core, outer, location, h_hess)?;
    let jacobian_mismatch = eigenvalue_modulus_mismatch(&jacobian, &map_eigs);

    let degenerate = hessian_eigs.iter().any(|l| l.abs() < DEGENERACY_FLOOR);
    let marginal = map_eigs
        .iter()
        .any(|m| (m.abs() - 1.0).abs() <= HYPERBOLICITY_MARGIN);
    let stability = if degenerate || marginal {
        Stability::Nonhyperbolic
    } else if map_eigs.iter().all(|m| m.abs() < 1.0) {
        Stability::Attracting
    } else if map_eigs.iter().all(|m| m.abs() > 1.0) {
        Stability::Repelling
    } else {
        Stability::Saddle
    };

    Ok(CriticalPointRecord {
        location: *location,
        thickness_at,
        hessian_eigs,
        map_eigs,
        stability,
        grad_residual,
        jacobian_mismatch,
    })
}

fn eigenvalue_modulus_mismatch(jacobian: &TangentMatrix, map_eigs: &[f64]) -> f64 {
    let mut numeric = jacobian.eigenvalue_moduli();
    let mut predicted: Vec<f64> = map_eigs.iter().map(|m| m.abs()).collect();
    numeric.sort_by(f64::total_cmp);
    predicted.sort_by(f64::total_cmp);
    numeric
        .iter()
        .zip(&predicted)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0_f64, f64::max)
}

/// Label assigned to a basin seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedLabel {
    /// Index into the critical-point list passed to `compute_basins`.
    Critical(usize),
    /// Budget exhausted, or the limit matched no critical point.
    Unresolved,
    /// The map failed along the trajectory.
    Failed,
}

/// Seed-grid geometry, kept for export.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridShape {
    CircleAngles { n: usize },
    Equirect { rows: usize, cols: usize },
}

/// Basin-of-attraction decomposition over a seed grid. Labels are
/// disjoint by construction (one per seed); on healthy scenarios the
/// resolved fraction approaches 1 and saddle/repeller stable sets surface
/// only as unresolved or boundary seeds.
#[derive(Debug, Clone)]
pub struct BasinMap {
    pub seeds: Vec<CorePoint>,
    pub labels: Vec<SeedLabel>,
    /// Seed count per critical-point index.
    pub counts: Vec<usize>,
    pub unresolved: usize,
    pub failed: usize,
    pub shape: GridShape,
    pub iteration_budget: usize,
}

impl BasinMap {
    pub fn resolved_fraction(&self) -> f64 {
        if self.seeds.is_empty() {
            return 0.0;
        }
        let resolved: usize = self.counts.iter().sum();
        resolved as f64 / self.seeds.len() as f64
    }
}

#[derive(Debug, Clone)]
pub struct BasinOptions {
    pub iteration_budget: usize,
    pub grad_tolerance: f64,
    pub gradient_step: f64,
}

impl BasinOptions {
    pub fn for_core(core: &ConvexCore) -> Self {
        Self {
            iteration_budget: 5000,
            grad_tolerance: dynamics::default_grad_tolerance(core),
            gradient_step: calculus::default_gradient_step(core),
        }
    }
}

/// Seed grid for basin computation: `resolution` uniform angles on planar
/// scenarios, a `resolution × 2·resolution` cell-centered equirectangular
/// grid on spheres.
pub fn basin_seed_grid(core: &ConvexCore, resolution: usize) -> (Vec<CorePoint>, GridShape) {
    if core.ambient_dim() == 2 {
        let seeds = core.sample_boundary(resolution);
        (seeds, GridShape::CircleAngles { n: resolution })
    } else {
        let rows = resolution;
        let cols = 2 * resolution;
        let seeds = sampling::equirect_directions(rows, cols)
            .iter()
            .map(|w| {
                core.boundary_point_in_direction(w)
                    .expect("grid directions are nonzero")
            })
            .collect();
        (seeds, GridShape::Equirect { rows, cols })
    }
}

/// Iterate every seed to convergence and label it by the nearest critical
/// point within the basin match radius.
pub fn compute_basins(
    core: &ConvexCore,
    outer: &OuterDomain,
    resolution: usize,
    critical_points: &[CriticalPointRecord],
    opts: &BasinOptions,
) -> BasinMap {
    let (seeds, shape) = basin_seed_grid(core, resolution);
    let match_radius = basin_match_radius(core);
    let iter_opts = IterateOptions {
        max_iters: opts.iteration_budget,
        grad_tolerance: opts.grad_tolerance,
        gradient_step: opts.gradient_step,
    };
    let targets: Vec<Vec3> = critical_points
        .iter()
        .map(|r| r.location.position())
        .collect();

    let labels: Vec<SeedLabel> = seeds
        .par_iter()
        .map(|seed| {
            let traj = dynamics::iterate(core, outer, *seed, &iter_opts);
            match traj.termination {
                Termination::Converged(limit) => {
                    let mut best: Option<(usize, f64)> = None;
                    for (i, t) in targets.iter().enumerate() {
                        let dist = (limit.position() - t).norm();
                        if dist <= match_radius && best.is_none_or(|(_, b)| dist < b) {
                            best = Some((i, dist));
                        }
                    }
                    match best {
                        Some((i, _)) => SeedLabel::Critical(i),
                        None => SeedLabel::Unresolved,
                    }
                }
                Termination::MaxIters => SeedLabel::Unresolved,
                Termination::Error { .. } => SeedLabel::Failed,
            }
        })
        .collect();

    let mut counts = vec![0usize; critical_points.len()];
    let mut unresolved = 0;
    let mut failed = 0;
    for label in &labels {
        match label {
            SeedLabel::Critical(i) => counts[*i] += 1,
            SeedLabel::Unresolved => unresolved += 1,
            SeedLabel::Failed => failed += 1,
        }
    }
    BasinMap {
        seeds,
        labels,
        counts,
        unresolved,
        failed,
        shape,
        iteration_budget: opts.iteration_budget,
    }
}

/// Per-point expansion residual: remainder ‖F(c) − c + 2d∇d‖ against the
/// bound driver d‖∇d‖².
#[derive(Debug, Clone, Copy)]
pub struct ExpansionSample {
    pub point: CorePoint,
    pub remainder: f64,
    pub driver: f64,
}

/// Expansion statistics over one grid. `k_hat` is the empirical envelope
/// max(remainder/driver); points with driver below 1e−14 are excluded
/// from the envelope (and `k_hat` is None if none remain).
#[derive(Debug, Clone)]
pub struct ExpansionStats {
    pub samples: Vec<ExpansionSample>,
    pub k_hat: Option<f64>,
    pub max_remainder: f64,
    pub envelope_points: usize,
}

const DRIVER_FLOOR: f64 = 1e-14;

pub fn expansion_stats(
    core: &ConvexCore,
    outer: &OuterDomain,
    points: &[CorePoint],
    gradient_step: f64,
) -> Result<ExpansionStats> {
    let samples: Result<Vec<ExpansionSample>> = points
        .par_iter()
        .map(|c| {
            let grad = maps::thickness_gradient(core, outer, c, gradient_step)?;
            let d = maps::thickness(core, outer, c)?.thickness;
            let g = grad.embed();
            let f = maps::descent_step(core, c, d, &g)?;
            let remainder = (f.position() - c.position() + 2.0 * d * g).norm();
            let gn = grad.norm();
            Ok(ExpansionSample {
                point: *c,
                remainder,
                driver: d * gn * gn,
            })
        })
        .collect();
    let samples = samples?;
    let mut k_hat: Option<f64> = None;
    let mut max_remainder = 0.0_f64;
    let mut envelope_points = 0;
    for s in &samples {
        max_remainder = max_remainder.max(s.remainder);
        if s.driver >= DRIVER_FLOOR {
            envelope_points += 1;
            let ratio = s.remainder / s.driver;
            k_hat = Some(k_hat.map_or(ratio, |k: f64| k.max(ratio)));
        }
    }
    Ok(ExpansionStats {
        samples,
        k_hat,
        max_remainder,
        envelope_points,
    })
}

/// Expansion report across a perturbation-scale family (largest first):
/// max-remainder ratios between consecutive scales and the log-log slope
/// of max remainder against scale. Quadratic-order remainders give ratios
/// near 4 per halving and slope near 2.
#[derive(Debug, Clone)]
pub struct ExpansionReport {
    pub per_scale: Vec<(f64, ExpansionStats)>,
    pub max_remainder_ratios: Vec<f64>,
    pub loglog_slope: Option<f64>,
}

pub fn verify_expansion<'a>(
    family: impl IntoIterator<Item = (f64, &'a ConvexCore, &'a OuterDomain)>,
    grid_size: usize,
    gradient_step: f64,
) -> Result<ExpansionReport> {
    let mut per_scale = Vec::new();
    for (scale, core, outer) in family {
        let grid = core.sample_boundary(grid_size);
        let stats = expansion_stats(core, outer, &grid, gradient_step)?;
        per_scale.push((scale, stats));
    }
    let max_remainder_ratios = per_scale
        .windows(2)
        .map(|w| w[0].1.max_remainder / w[1].1.max_remainder)
        .collect();
    let loglog_slope = if per_scale.len() >= 2 {
        let pts: Vec<(f64, f64)> = per_scale
            .iter()
            .filter(|(s, st)| *s > 0.0 && st.max_remainder > 0.0)
            .map(|(s, st)| (s.ln(), st.max_remainder.ln()))
            .collect();
        if pts.len() >= 2 {
            let n = pts.len() as f64;
            let sx: f64 = pts.iter().map(|p| p.0).sum();
            let sy: f64 = pts.iter().map(|p| p.1).sum();
            let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
            let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
            Some((n * sxy - sx * sy) / (n * sxx - sx * sx))
        } else {
            None
        }
    } else {
        None
    };
    Ok(ExpansionReport {
        per_scale,
        max_remainder_ratios,
        loglog_slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{polar_angle, Profile};
    use std::f64::consts::PI;

    fn unit_circle() -> ConvexCore {
        ConvexCore::circle(1.0).unwrap()
    }

    fn cosine_scenario() -> (ConvexCore, OuterDomain) {
        let outer =
            OuterDomain::radial_graph(2, 1.5, 0.1 / 1.5, Profile::AxisCosine { axis: 0 }).unwrap();
        (unit_circle(), outer)
    }

    fn concentric_scenario() -> (ConvexCore, OuterDomain) {
        let outer = OuterDomain::radial_graph(2, 2.0, 0.0, Profile::Constant(0.0)).unwrap();
        (unit_circle(), outer)
    }

    #[test]
    fn cosine_circle_has_two_classified_critical_points() {
        let (core, outer) = cosine_scenario();
        let search = find_critical_points(&core, &outer, &SearchOptions::default()).unwrap();
        let records = match search.result {
            CriticalSet::Points(r) => r,
            CriticalSet::GloballyCritical => panic!("not globally critical"),
        };
        assert_eq!(records.len(), 2);

        // Sorted by thickness: the minimum (θ = π) first.
        let minimum = &records[0];
        assert!((polar_angle(&minimum.location.position()) - PI).abs() < 1e-6);
        assert!((minimum.thickness_at - 0.4).abs() < 1e-8);
        assert_eq!(minimum.stability, Stability::Attracting);
        assert!((minimum.map_eigs[0] - 0.92).abs() < 0.01);
        assert!(minimum.grad_residual <= CRITICAL_TOLERANCE);
        assert!(minimum.jacobian_mismatch <= 1e-3);

        let maximum = &records[1];
        let th = polar_angle(&maximum.location.position());
        assert!(th.min(2.0 * PI - th) < 1e-6);
        assert!((maximum.thickness_at - 0.6).abs() < 1e-8);
        assert_eq!(maximum.stability, Stability::Repelling);
        assert!((maximum.map_eigs[0] - 1.12).abs() < 0.01);
        assert!(maximum.jacobian_mismatch <= 1e-3);
    }

    #[test]
    fn attracting_records_have_positive_hessian_spectrum() {
        let (core, outer) = cosine_scenario();
        let search = find_critical_points(&core, &outer, &SearchOptions::default()).unwrap();
        if let CriticalSet::Points(records) = search.result {
            for r in records {
                if r.stability == Stability::Attracting {
                    assert!(r.hessian_eigs.iter().all(|l| *l > 0.0));
                }
            }
        }
    }

    #[test]
    fn concentric_scenario_is_globally_critical() {
        let (core, outer) = concentric_scenario();
        let search = find_critical_points(&core, &outer, &SearchOptions::default()).unwrap();
        assert!(matches!(search.result, CriticalSet::GloballyCritical));
    }

    #[test]
    fn concentric_classify_is_nonhyperbolic() {
        let (core, outer) = concentric_scenario();
        let c = core.surface_point(crate::Vec3::new(0.0, 1.0, 0.0)).unwrap();
        let record = classify(&core, &outer, &c, CRITICAL_TOLERANCE).unwrap();
        assert_eq!(record.stability, Stability::Nonhyperbolic);
        assert!(record.hessian_eigs[0].abs() < DEGENERACY_FLOOR);
    }

    #[test]
    fn classify_rejects_noncritical_points() {
        let (core, outer) = cosine_scenario();
        let c = core
            .surface_point(crate::Vec3::new(0.0, 1.0, 0.0))
            .unwrap();
        assert!(matches!(
            classify(&core, &outer, &c, CRITICAL_TOLERANCE),
            Err(Error::NotCritical { .. })
        ));
    }

    #[test]
    fn sphere_height_profile_classifies_poles() {
        let core = ConvexCore::sphere(1.0).unwrap();
        let outer =
            OuterDomain::radial_graph(3, 1.5, 0.1 / 1.5, Profile::AxisCosine { axis: 2 }).unwrap();
        let search = find_critical_points(&core, &outer, &SearchOptions::default()).unwrap();
        let records = match search.result {
            CriticalSet::Points(r) => r,
            _ => panic!("expected points"),
        };
        assert_eq!(records.len(), 2);

        let minimum = &records[0];
        assert!((minimum.location.position().z + 1.0).abs() < 1e-6);
        assert_eq!(minimum.stability, Stability::Attracting);
        for (l, m) in minimum.hessian_eigs.iter().zip(&minimum.map_eigs) {
            assert!((l - 0.1).abs() < 1e-3);
            assert!((m - 0.92).abs() < 0.01);
        }

        let maximum = &records[1];
        assert!((maximum.location.position().z - 1.0).abs() < 1e-6);
        assert_eq!(maximum.stability, Stability::Repelling);
        for m in &maximum.map_eigs {
            assert!((m - 1.12).abs() < 0.01);
        }
    }

    #[test]
    fn basins_on_cosine_circle_resolve_to_the_minimum() {
        let (core, outer) = cosine_scenario();
        let search = find_critical_points(&core, &outer, &SearchOptions::default()).unwrap();
        let records = match search.result {
            CriticalSet::Points(r) => r,
            _ => panic!("expected points"),
        };
        let map = compute_basins(&core, &outer, 512, &records, &BasinOptions::for_core(&core));
        assert!(map.resolved_fraction() >= 0.999);
        assert_eq!(map.failed, 0);

        let attractor_idx = records
            .iter()
            .position(|r| r.stability == Stability::Attracting)
            .unwrap();
        for (seed, label) in map.seeds.iter().zip(&map.labels) {
            let th = polar_angle(&seed.position());
            let dist_to_repeller = th.min(2.0 * PI - th);
            if dist_to_repeller > 1e-3 {
                assert_eq!(*label, SeedLabel::Critical(attractor_idx), "seed at θ = {th}");
            }
        }
    }

    #[test]
    fn expansion_remainder_vanishes_on_concentric() {
        let (core, outer) = concentric_scenario();
        let grid = core.sample_boundary(128);
        let stats =
            expansion_stats(&core, &outer, &grid, calculus::default_gradient_step(&core)).unwrap();
        assert!(stats.max_remainder <= 1e-9);
        assert!(stats.k_hat.is_none(), "no driver exceeds the floor");
    }

    #[test]
    fn expansion_envelope_bounds_a_finer_shifted_grid() {
        let (core, outer) = cosine_scenario();
        let h = calculus::default_gradient_step(&core);
        let grid = core.sample_boundary(128);
        let stats = expansion_stats(&core, &outer, &grid, h).unwrap();
        let k_hat = stats.k_hat.expect("finite envelope");
        assert!(k_hat.is_finite() && k_hat > 0.0);

        // Shifted, finer grid: the envelope may grow, but at most 2×.
        let shifted: Vec<CorePoint> = crate::sampling::circle_angles(257)
            .into_iter()
            .map(|th| {
                let th = th + 0.003;
                core.surface_point(crate::Vec3::new(th.cos(), th.sin(), 0.0))
                    .unwrap()
            })
            .collect();
        let fine = expansion_stats(&core, &outer, &shifted, h).unwrap();
        for s in &fine.samples {
            if s.driver >= DRIVER_FLOOR {
                assert!(s.remainder <= 2.0 * k_hat * s.driver);
            }
        }
    }
}

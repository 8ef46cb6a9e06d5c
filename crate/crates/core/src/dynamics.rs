//! Trajectory iteration of the return step with a Lyapunov monitor,
//! cycle detection, and empirical estimation of the descent constants.

use rayon::prelude::*;

use crate::calculus;
use crate::error::{Error, Result};
use crate::geometry::{ConvexCore, CorePoint, OuterDomain};
use crate::maps;

/// Default iteration cap.
pub const DEFAULT_MAX_ITERS: usize = 100_000;
/// Allowed uphill slack in the energy before a step counts as a Lyapunov
/// violation; absorbs root-finding noise. A genuine increase beyond it is
/// treated as a bug signal, not tolerated silently.
pub const LYAPUNOV_SLACK: f64 = 1e-10;
/// Gradient floor below which a point counts as numerically critical when
/// estimating descent constants.
pub const CONSTANT_FIT_GRADIENT_FLOOR: f64 = 1e-8;

/// Convergence is declared on gradient smallness, not displacement
/// smallness: displacement ≈ 2d‖∇d‖ conflates step size with slope.
pub fn default_grad_tolerance(core: &ConvexCore) -> f64 {
    1e-8 / core.scale()
}

#[derive(Debug, Clone)]
pub struct IterateOptions {
    pub max_iters: usize,
    pub grad_tolerance: f64,
    pub gradient_step: f64,
}

impl IterateOptions {
    pub fn for_core(core: &ConvexCore) -> Self {
        Self {
            max_iters: DEFAULT_MAX_ITERS,
            grad_tolerance: default_grad_tolerance(core),
            gradient_step: calculus::default_gradient_step(core),
        }
    }
}

/// Per-iterate record. `displacement` is the step to the next iterate and
/// stays zero on the final record.
#[derive(Debug, Clone, Copy)]
pub struct TrajectoryStep {
    pub point: CorePoint,
    pub thickness: f64,
    pub energy: f64,
    pub grad_norm: f64,
    pub displacement: f64,
}

#[derive(Debug, Clone)]
pub enum Termination {
    /// Gradient dropped below tolerance at the recorded limit point.
    Converged(CorePoint),
    MaxIters,
    Error { step: usize, message: String },
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub steps: Vec<TrajectoryStep>,
    pub termination: Termination,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn final_step(&self) -> Option<&TrajectoryStep> {
        self.steps.last()
    }

    pub fn converged(&self) -> bool {
        matches!(self.termination, Termination::Converged(_))
    }

    /// Number of steps whose energy increased beyond `slack`.
    pub fn lyapunov_violations(&self, slack: f64) -> usize {
        self.steps
            .windows(2)
            .filter(|w| w[1].energy > w[0].energy + slack)
            .count()
    }

    /// Sum of squared gradient norms over the recorded iterates.
    pub fn gradient_square_sum(&self) -> f64 {
        self.steps.iter().map(|s| s.grad_norm * s.grad_norm).sum()
    }
}

/// Iterate the return step from `c0`.
///
/// Stops when the tangential gradient of the thickness drops below the
/// tolerance (converged) or the iteration cap is reached. Every iterate
/// records thickness, energy V = d²/2, gradient norm, and displacement.
/// An energy increase beyond `LYAPUNOV_SLACK` terminates with an error
/// that preserves the offending pair of records.
pub fn iterate(
    core: &ConvexCore,
    outer: &OuterDomain,
    c0: CorePoint,
    opts: &IterateOptions,
) -> Trajectory {
    let mut steps: Vec<TrajectoryStep> = Vec::new();
    let mut c = c0;
    loop {
        let k = steps.len();
        let (d, grad) = match maps::thickness(core, outer, &c).and_then(|s| {
            maps::thickness_gradient(core, outer, &c, opts.gradient_step).map(|g| (s.thickness, g))
        }) {
            Ok(pair) => pair,
            Err(e) => {
                return Trajectory {
                    steps,
                    termination: Termination::Error {
                        step: k,
                        message: e.to_string(),
                    },
                }
            }
        };
        let energy = 0.5 * d * d;
        let grad_norm = grad.norm();
        steps.push(TrajectoryStep {
            point: c,
            thickness: d,
            energy,
            grad_norm,
            displacement: 0.0,
        });

        if k > 0 {
            let prev = steps[k - 1].energy;
            if energy > prev + LYAPUNOV_SLACK {
                return Trajectory {
                    steps,
                    termination: Termination::Error {
                        step: k,
                        message: format!(
                            "Lyapunov violation: V rose from {prev:.17e} to {energy:.17e}"
                        ),
                    },
                };
            }
        }

        if grad_norm <= opts.grad_tolerance {
            return Trajectory {
                steps,
                termination: Termination::Converged(c),
            };
        }
        if k >= opts.max_iters {
            return Trajectory {
                steps,
                termination: Termination::MaxIters,
            };
        }

        let next = match maps::descent_step(core, &c, d, &grad.embed()) {
            Ok(p) => p,
            Err(e) => {
                return Trajectory {
                    steps,
                    termination: Termination::Error {
                        step: k,
                        message: e.to_string(),
                    },
                }
            }
        };
        steps[k].displacement = (next.position() - c.position()).norm();
        c = next;
    }
}

/// Iterate a batch of seeds in parallel.
pub fn sweep(
    core: &ConvexCore,
    outer: &OuterDomain,
    seeds: &[CorePoint],
    opts: &IterateOptions,
) -> Vec<Trajectory> {
    seeds
        .par_iter()
        .map(|c0| iterate(core, outer, *c0, opts))
        .collect()
}

/// A detected nontrivial cycle.
#[derive(Debug, Clone)]
pub struct CycleReport {
    pub period: usize,
    pub start_index: usize,
    pub points: Vec<CorePoint>,
}

/// Scan a trajectory for nontrivial cycles: indices j < k with
/// |c_j − c_k| ≤ `spatial_tol` and some intermediate iterate at least
/// 10·`spatial_tol` away from c_j. The displacement guard excludes plain
/// convergence and constant tails. Returns the minimal period found.
pub fn detect_cycles(traj: &Trajectory, spatial_tol: f64) -> Option<CycleReport> {
    let pts: Vec<_> = traj.steps.iter().map(|s| s.point.position()).collect();
    let n = pts.len();
    let mut best: Option<(usize, usize)> = None;
    for j in 0..n {
        let mut moved_away = false;
        for k in j + 1..n {
            if moved_away && (pts[j] - pts[k]).norm() <= spatial_tol {
                let period = k - j;
                if best.is_none_or(|(bp, _)| period < bp) {
                    best = Some((period, j));
                }
                break;
            }
            if (pts[j] - pts[k]).norm() >= 10.0 * spatial_tol {
                moved_away = true;
            }
        }
    }
    best.map(|(period, start_index)| CycleReport {
        period,
        start_index,
        points: traj.steps[start_index..start_index + period]
            .iter()
            .map(|s| s.point)
            .collect(),
    })
}

/// Empirical descent constants fitted from per-point energy drops.
#[derive(Debug, Clone)]
pub struct DescentConstants {
    /// min (−ΔV)/‖∇d‖² over the grid; positive on healthy scenarios.
    pub eta_hat: f64,
    /// Least-squares coefficient of ‖∇d‖² in −ΔV (constrained ≥ 0).
    pub a_hat: f64,
    /// Least-squares coefficient of ‖∇d‖⁴ in −ΔV.
    pub b_hat: f64,
    /// Observed sup ‖∇d‖ over the grid.
    pub epsilon0: f64,
    pub sample_count: usize,
    /// Set when b̂·ε₀² ≥ â, i.e. the quartic term is not dominated.
    pub quartic_dominates: bool,
}

/// Fit −ΔV ≈ a‖∇d‖² + b‖∇d‖⁴ over a grid of boundary points.
///
/// Points with gradient below `CONSTANT_FIT_GRADIENT_FLOOR` are excluded;
/// if every point falls below it the scenario is globally critical and
/// the constants are undefined.
pub fn estimate_descent_constants(
    core: &ConvexCore,
    outer: &OuterDomain,
    grid: &[CorePoint],
    gradient_step: f64,
) -> Result<DescentConstants> {
    let samples: Result<Vec<Option<(f64, f64)>>> = grid
        .par_iter()
        .map(|c| {
            let grad = maps::thickness_gradient(core, outer, c, gradient_step)?;
            let g = grad.norm();
            if g <= CONSTANT_FIT_GRADIENT_FLOOR {
                return Ok(None);
            }
            let d = maps::thickness(core, outer, c)?.thickness;
            let next = maps::descent_step(core, c, d, &grad.embed())?;
            let d_next = maps::thickness(core, outer, &next)?.thickness;
            let delta_v = 0.5 * d_next * d_next - 0.5 * d * d;
            Ok(Some((g, -delta_v)))
        })
        .collect();
    let samples: Vec<(f64, f64)> = samples?.into_iter().flatten().collect();
    if samples.is_empty() {
        return Err(Error::GloballyCritical);
    }

    let (mut sx2, mut sx3, mut sx4, mut sxy, mut sx2y) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let mut eta = f64::INFINITY;
    let mut eps0 = 0.0_f64;
    for &(g, y) in &samples {
        let x = g * g;
        sx2 += x * x;
        sx3 += x * x * x;
        sx4 += x * x * x * x;
        sxy += x * y;
        sx2y += x * x * y;
        eta = eta.min(y / x);
        eps0 = eps0.max(g);
    }
    let det = sx2 * sx4 - sx3 * sx3;
    let (mut a, mut b) = if det.abs() > 1e-300 && det.is_finite() {
        (
            (sxy * sx4 - sx2y * sx3) / det,
            (sx2 * sx2y - sx3 * sxy) / det,
        )
    } else {
        (sxy / sx2, 0.0)
    };
    if a < 0.0 {
        a = 0.0;
        b = if sx4 > 0.0 { sx2y / sx4 } else { 0.0 };
    }
    Ok(DescentConstants {
        eta_hat: eta,
        a_hat: a,
        b_hat: b,
        epsilon0: eps0,
        sample_count: samples.len(),
        quartic_dominates: b * eps0 * eps0 >= a,
    })
}

/// Uniform-descent diagnostics outside explicit neighborhoods of the
/// critical points: ε_U = min ‖∇d‖ and γ_U = min (V − V∘F) over grid
/// points farther than `radius` from every critical point.
#[derive(Debug, Clone)]
pub struct NeighborhoodConstants {
    pub gamma_u: f64,
    pub epsilon_u: f64,
    /// Grid points excluded because they fall inside a neighborhood.
    pub excluded: usize,
}

pub fn estimate_neighborhood_constants(
    core: &ConvexCore,
    outer: &OuterDomain,
    grid: &[CorePoint],
    critical_points: &[crate::Vec3],
    radius: f64,
    gradient_step: f64,
) -> Result<NeighborhoodConstants> {
    let kept: Vec<&CorePoint> = grid
        .iter()
        .filter(|c| {
            critical_points
                .iter()
                .all(|cp| (c.position() - cp).norm() > radius)
        })
        .collect();
    let excluded = grid.len() - kept.len();
    if kept.is_empty() {
        return Err(Error::InvalidParameter {
            name: "radius".into(),
            reason: "every grid point falls inside a critical-point neighborhood".into(),
        });
    }
    let stats: Result<Vec<(f64, f64)>> = kept
        .par_iter()
        .map(|c| {
            let grad = maps::thickness_gradient(core, outer, c, gradient_step)?;
            let d = maps::thickness(core, outer, c)?.thickness;
            let next = maps::descent_step(core, c, d, &grad.embed())?;
            let d_next = maps::thickness(core, outer, &next)?.thickness;
            Ok((grad.norm(), 0.5 * d * d - 0.5 * d_next * d_next))
        })
        .collect();
    let stats = stats?;
    let mut epsilon_u = f64::INFINITY;
    let mut gamma_u = f64::INFINITY;
    for (g, drop) in stats {
        epsilon_u = epsilon_u.min(g);
        gamma_u = gamma_u.min(drop);
    }
    Ok(NeighborhoodConstants {
        gamma_u,
        epsilon_u,
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{polar_angle, Profile};
    use crate::Vec3;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn cosine_scenario() -> (ConvexCore, OuterDomain) {
        let core = ConvexCore::circle(1.0).unwrap();
        let outer =
            OuterDomain::radial_graph(2, 1.5, 0.1 / 1.5, Profile::AxisCosine { axis: 0 }).unwrap();
        (core, outer)
    }

    fn concentric_scenario() -> (ConvexCore, OuterDomain) {
        let core = ConvexCore::circle(1.0).unwrap();
        let outer = OuterDomain::radial_graph(2, 2.0, 0.0, Profile::Constant(0.0)).unwrap();
        (core, outer)
    }

    #[test]
    fn concentric_converges_immediately() {
        let (core, outer) = concentric_scenario();
        let c0 = core.surface_point(Vec3::new(0.0, 1.0, 0.0)).unwrap();
        let traj = iterate(&core, &outer, c0, &IterateOptions::for_core(&core));
        assert!(traj.converged());
        assert_eq!(traj.len(), 1);
        assert_eq!(traj.final_step().unwrap().displacement, 0.0);
    }

    #[test]
    fn cosine_circle_converges_to_pi_with_monotone_energy() {
        let (core, outer) = cosine_scenario();
        let c0 = core
            .surface_point(Vec3::new(FRAC_PI_2.cos(), FRAC_PI_2.sin(), 0.0))
            .unwrap();
        let traj = iterate(&core, &outer, c0, &IterateOptions::for_core(&core));
        assert!(traj.converged());
        let last = traj.final_step().unwrap();
        assert!(last.grad_norm <= 1e-8);
        assert!((polar_angle(&last.point.position()) - PI).abs() < 1e-4);
        assert_eq!(traj.lyapunov_violations(LYAPUNOV_SLACK), 0);
    }

    #[test]
    fn gradient_square_sum_bounded_by_energy_drop() {
        let (core, outer) = cosine_scenario();
        let c0 = core
            .surface_point(Vec3::new(FRAC_PI_2.cos(), FRAC_PI_2.sin(), 0.0))
            .unwrap();
        let traj = iterate(&core, &outer, c0, &IterateOptions::for_core(&core));
        let grid = core.sample_boundary(64);
        let constants = estimate_descent_constants(
            &core,
            &outer,
            &grid,
            calculus::default_gradient_step(&core),
        )
        .unwrap();
        let v0 = traj.steps.first().unwrap().energy;
        let v_final = traj.final_step().unwrap().energy;
        let bound = (v0 - v_final) / constants.eta_hat * 1.1;
        assert!(traj.gradient_square_sum() <= bound);
    }

    #[test]
    fn located_fixed_point_is_fixed() {
        let (core, outer) = cosine_scenario();
        let c0 = core
            .surface_point(Vec3::new(FRAC_PI_2.cos(), FRAC_PI_2.sin(), 0.0))
            .unwrap();
        let traj = iterate(&core, &outer, c0, &IterateOptions::for_core(&core));
        let limit = match traj.termination {
            Termination::Converged(p) => p,
            _ => panic!("expected convergence"),
        };
        let f = maps::return_map(&core, &outer, &limit).unwrap();
        assert!((f.position() - limit.position()).norm() <= 1e-7);
    }

    #[test]
    fn synthetic_alternation_detected_as_period_two() {
        let core = ConvexCore::circle(1.0).unwrap();
        let a = core.surface_point(Vec3::new(1.0, 0.0, 0.0)).unwrap();
        let th = 0.1_f64;
        let b = core
            .surface_point(Vec3::new(th.cos(), th.sin(), 0.0))
            .unwrap();
        let mk = |p: CorePoint| TrajectoryStep {
            point: p,
            thickness: 1.0,
            energy: 0.5,
            grad_norm: 1.0,
            displacement: 0.1,
        };
        let traj = Trajectory {
            steps: vec![mk(a), mk(b), mk(a), mk(b), mk(a)],
            termination: Termination::MaxIters,
        };
        let cycle = detect_cycles(&traj, 1e-6).expect("period-2 cycle");
        assert_eq!(cycle.period, 2);
    }

    #[test]
    fn constant_sequence_is_not_a_cycle() {
        let core = ConvexCore::circle(1.0).unwrap();
        let a = core.surface_point(Vec3::new(1.0, 0.0, 0.0)).unwrap();
        let steps = vec![
            TrajectoryStep {
                point: a,
                thickness: 1.0,
                energy: 0.5,
                grad_norm: 0.0,
                displacement: 0.0,
            };
            6
        ];
        let traj = Trajectory {
            steps,
            termination: Termination::MaxIters,
        };
        assert!(detect_cycles(&traj, 1e-6).is_none());
    }

    #[test]
    fn converged_trajectory_has_no_cycles() {
        let (core, outer) = cosine_scenario();
        let c0 = core
            .surface_point(Vec3::new(0.2_f64.cos(), 0.2_f64.sin(), 0.0))
            .unwrap();
        let traj = iterate(&core, &outer, c0, &IterateOptions::for_core(&core));
        assert!(detect_cycles(&traj, 1e-6 * core.scale()).is_none());
    }

    #[test]
    fn concentric_constants_are_undefined() {
        let (core, outer) = concentric_scenario();
        let grid = core.sample_boundary(32);
        let err = estimate_descent_constants(
            &core,
            &outer,
            &grid,
            calculus::default_gradient_step(&core),
        )
        .unwrap_err();
        assert!(matches!(err, Error::GloballyCritical));
    }

    #[test]
    fn cosine_family_constants_are_positive_and_calibrated() {
        let core = ConvexCore::circle(1.0).unwrap();
        for amp in [0.02, 0.05, 0.1] {
            let outer =
                OuterDomain::radial_graph(2, 1.5, amp / 1.5, Profile::AxisCosine { axis: 0 })
                    .unwrap();
            let grid = core.sample_boundary(64);
            let k = estimate_descent_constants(
                &core,
                &outer,
                &grid,
                calculus::default_gradient_step(&core),
            )
            .unwrap();
            assert!(k.eta_hat > 0.0, "amp {amp}: eta_hat = {}", k.eta_hat);
            let reference = 2.0 * (0.5 - amp) * (0.5 - amp);
            assert!(
                k.a_hat >= reference / 2.0 && k.a_hat <= reference * 2.0,
                "amp {amp}: a_hat = {} vs 2·(min d)² = {reference}",
                k.a_hat
            );
            assert!(!k.quartic_dominates);
            assert!((k.epsilon0 - amp).abs() < 0.02 * amp + 1e-6);
        }
    }

    #[test]
    fn sphere_dimple_constants_match_leading_coefficient() {
        // −ΔV ≈ 2d²‖∇d‖² to leading order, so the fitted a_hat sits within
        // a factor 2 of 2·(min d)².
        let core = ConvexCore::sphere(1.0).unwrap();
        let profile = Profile::Bump {
            center: Vec3::z(),
            kappa: 1.0,
            amplitude: -1.0,
        };
        let outer = OuterDomain::radial_graph(3, 1.4, 0.05 / 1.4, profile).unwrap();
        let grid = core.sample_boundary(128);
        let k = estimate_descent_constants(
            &core,
            &outer,
            &grid,
            calculus::default_gradient_step(&core),
        )
        .unwrap();
        assert!(k.eta_hat > 0.0);
        let reference = 2.0 * 0.35 * 0.35;
        assert!(k.a_hat >= reference / 2.0 && k.a_hat <= reference * 2.0, "a_hat = {}", k.a_hat);
    }

    #[test]
    fn neighborhood_constants_positive_outside_critical_set() {
        let (core, outer) = cosine_scenario();
        let grid = core.sample_boundary(64);
        let cps = [Vec3::new(1.0, 0.0, 0.0), Vec3::new(-1.0, 0.0, 0.0)];
        let k = estimate_neighborhood_constants(
            &core,
            &outer,
            &grid,
            &cps,
            0.3,
            calculus::default_gradient_step(&core),
        )
        .unwrap();
        assert!(k.epsilon_u > 0.0);
        assert!(k.gamma_u > 0.0);
        assert!(k.excluded > 0);
    }
}

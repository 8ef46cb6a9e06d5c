//! Named, parameterized scenario constructors with closed-form thickness
//! oracles, so every worked example in the test suite and the CLI is
//! reproducible by name.
//!
//! Cores are unit circles/spheres and outer boundaries are radial graphs
//! r(ω) = ρ(1 + ε f(ω)), so the outward normals are radial and the
//! thickness is exactly d(ω) = ρ(1 + ε f(ω)) − 1.
//!
//! Amplitude convention: the primary parameter `amp` is the bump
//! amplitude *in the thickness*, i.e. d(ω) = (ρ − 1) + amp·f₀(ω) with a
//! unit-peak profile f₀, realized internally as ε = amp/ρ. The raw `eps`
//! is accepted as an alternative key (then amp = ρ·eps).

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geometry::{ConvexCore, OuterDomain, Profile};
use crate::maps;
use crate::sampling;
use crate::Vec3;

/// Catalog names.
pub const SCENARIO_NAMES: [&str; 7] = [
    "concentric_circle",
    "concentric_sphere",
    "perturbed_circle_cosine",
    "perturbed_sphere_height",
    "perturbed_sphere_single_bump",
    "perturbed_sphere_two_bumps",
    "pathological_fold",
];

/// Samples used for the construction-time admissibility screen.
const BUILD_ADMISSIBILITY_SAMPLES: usize = 1500;
/// Grid size for the construction-time oracle self-validation.
const ORACLE_CHECK_GRID: usize = 100;
const ORACLE_CHECK_TOL: f64 = 1e-8;

/// Key–value scenario parameters (`rho`, `amp` or `eps`, `kappa`).
#[derive(Debug, Clone, Default)]
pub struct ScenarioParams {
    values: BTreeMap<String, f64>,
}

impl ScenarioParams {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(mut self, key: &str, value: f64) -> Self {
        self.values.insert(key.to_string(), value);
        self
    }

    pub fn from_pairs(pairs: &[(String, f64)]) -> Self {
        let mut p = Self::new();
        for (k, v) in pairs {
            p.values.insert(k.clone(), *v);
        }
        p
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&str, f64)> {
        self.values.iter().map(|(k, v)| (k.as_str(), *v))
    }

    fn get(&self, key: &str) -> Option<f64> {
        self.values.get(key).copied()
    }

    fn check_known(&self, allowed: &[&str]) -> Result<()> {
        for key in self.values.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(Error::InvalidParameter {
                    name: key.clone(),
                    reason: format!("unknown parameter; expected one of {allowed:?}"),
                });
            }
        }
        Ok(())
    }
}

/// A critical point known in closed form, with the Hessian eigenvalues of
/// the thickness there.
#[derive(Debug, Clone)]
pub struct OracleCriticalPoint {
    pub direction: Vec3,
    pub hessian_eigs: Vec<f64>,
    pub is_minimum: bool,
}

/// Closed forms available for radial-graph scenarios over unit cores.
#[derive(Debug, Clone)]
pub struct AnalyticOracles {
    rho: f64,
    eps: f64,
    profile: Profile,
    pub critical_points: Vec<OracleCriticalPoint>,
    /// Human-readable d(ω) formula for reports.
    pub thickness_formula: String,
}

impl AnalyticOracles {
    /// Exact thickness along the (unit-normalized) direction `w`.
    pub fn thickness_in_direction(&self, w: &Vec3) -> f64 {
        let w = w / w.norm();
        self.rho * (1.0 + self.eps * self.profile.value(&w)) - 1.0
    }
}

/// A validated scenario: core, outer domain, provenance notes, optional
/// closed forms, and the construction-time admissibility verdict.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub core: ConvexCore,
    pub outer: OuterDomain,
    pub provenance_notes: String,
    pub oracles: Option<AnalyticOracles>,
    pub admissible: bool,
    /// Resolved parameters, for reproducible output headers.
    pub resolved_params: Vec<(String, f64)>,
}

impl Scenario {
    pub fn ambient_dim(&self) -> usize {
        self.core.ambient_dim()
    }
}

fn resolve_amp(params: &ScenarioParams, rho: f64, default_amp: f64) -> Result<f64> {
    match (params.get("amp"), params.get("eps")) {
        (Some(_), Some(_)) => Err(Error::InvalidParameter {
            name: "amp".into(),
            reason: "give either amp (amplitude in d) or eps (raw), not both".into(),
        }),
        (Some(a), None) => Ok(a),
        (None, Some(e)) => Ok(rho * e),
        (None, None) => Ok(default_amp),
    }
}

/// Build a named scenario. Perturbed entries attach exact thickness
/// oracles; every scenario is screened for admissibility at construction
/// (the pathological fold records its expected failure instead of
/// erroring).
pub fn build_scenario(name: &str, params: &ScenarioParams) -> Result<Scenario> {
    match name {
        "concentric_circle" => concentric(name, params, 2),
        "concentric_sphere" => concentric(name, params, 3),
        "perturbed_circle_cosine" => cosine_like(name, params, 2, 0),
        "perturbed_sphere_height" => cosine_like(name, params, 3, 2),
        "perturbed_sphere_single_bump" => single_bump(name, params),
        "perturbed_sphere_two_bumps" => two_bumps(name, params),
        "pathological_fold" => pathological_fold(name, params),
        _ => Err(Error::UnknownScenario(name.to_string())),
    }
}

fn concentric(name: &str, params: &ScenarioParams, dim: usize) -> Result<Scenario> {
    params.check_known(&["rho"])?;
    let rho = params.get("rho").unwrap_or(2.0);
    let core = unit_core(dim)?;
    let outer = OuterDomain::radial_graph(dim, rho, 0.0, Profile::Constant(0.0))?;
    let oracles = AnalyticOracles {
        rho,
        eps: 0.0,
        profile: Profile::Constant(0.0),
        critical_points: Vec::new(),
        thickness_formula: format!("d = {:.*}", 3, rho - 1.0),
    };
    finish(
        name,
        core,
        outer,
        Some(oracles),
        format!("concentric shells: constant thickness d = ρ − 1 = {}", rho - 1.0),
        vec![("rho".into(), rho)],
        false,
    )
}

/// Single-axis cosine profile f₀(ω) = ω_axis: d = (ρ−1) + amp·ω_axis,
/// giving one minimum (−axis) and one maximum (+axis) with Hessian
/// eigenvalues ±amp.
fn cosine_like(name: &str, params: &ScenarioParams, dim: usize, axis: usize) -> Result<Scenario> {
    params.check_known(&["rho", "amp", "eps"])?;
    let rho = params.get("rho").unwrap_or(1.5);
    let amp = resolve_amp(params, rho, 0.1)?;
    validate_positive_thickness(rho, amp)?;
    let eps = amp / rho;
    let profile = Profile::AxisCosine { axis };
    let core = unit_core(dim)?;
    let outer = OuterDomain::radial_graph(dim, rho, eps, profile.clone())?;

    let mut plus = Vec3::zeros();
    plus[axis] = 1.0;
    let tangent_count = dim - 1;
    let critical_points = vec![
        OracleCriticalPoint {
            direction: -plus,
            hessian_eigs: vec![amp; tangent_count],
            is_minimum: true,
        },
        OracleCriticalPoint {
            direction: plus,
            hessian_eigs: vec![-amp; tangent_count],
            is_minimum: false,
        },
    ];
    let axis_name = ["x", "y", "z"][axis];
    let formula = format!("d(ω) = {} + {}·ω_{}", fmt(rho - 1.0), fmt(amp), axis_name);
    let oracles = AnalyticOracles {
        rho,
        eps,
        profile,
        critical_points,
        thickness_formula: formula.clone(),
    };
    finish(
        name,
        core,
        outer,
        Some(oracles),
        format!("cosine landscape, exact {formula}; minimum at −{axis_name}, maximum at +{axis_name}"),
        vec![("rho".into(), rho), ("amp".into(), amp)],
        false,
    )
}

/// One radial dimple: f₀(ω) = −exp(−κ|ω−ω₀|²) with ω₀ = +z, so the
/// thickness has a single nondegenerate minimum at ω₀ (Hessian 2κ·amp·I)
/// and a shallow nondegenerate maximum at the antipode
/// (Hessian −2κ·amp·e^(−4κ)·I).
fn single_bump(name: &str, params: &ScenarioParams) -> Result<Scenario> {
    params.check_known(&["rho", "amp", "eps", "kappa"])?;
    let rho = params.get("rho").unwrap_or(1.4);
    let amp = resolve_amp(params, rho, 0.05)?;
    let kappa = params.get("kappa").unwrap_or(1.0);
    validate_positive_thickness(rho, amp)?;
    let eps = amp / rho;
    let center = Vec3::z();
    let profile = Profile::Bump {
        center,
        kappa,
        amplitude: -1.0,
    };
    let core = unit_core(3)?;
    let outer = OuterDomain::radial_graph(3, rho, eps, profile.clone())?;

    let antipodal_curvature = -2.0 * kappa * amp * (-4.0 * kappa).exp();
    let critical_points = vec![
        OracleCriticalPoint {
            direction: center,
            hessian_eigs: vec![2.0 * kappa * amp; 2],
            is_minimum: true,
        },
        OracleCriticalPoint {
            direction: -center,
            hessian_eigs: vec![antipodal_curvature; 2],
            is_minimum: false,
        },
    ];
    let formula = format!(
        "d(ω) = {} − {}·exp(−{}·|ω − e_z|²)",
        fmt(rho - 1.0),
        fmt(amp),
        fmt(kappa)
    );
    let oracles = AnalyticOracles {
        rho,
        eps,
        profile,
        critical_points,
        thickness_formula: formula.clone(),
    };
    finish(
        name,
        core,
        outer,
        Some(oracles),
        format!("single radial dimple, exact {formula}; unique nondegenerate minimum at +z (global attractor)"),
        vec![("rho".into(), rho), ("amp".into(), amp), ("kappa".into(), kappa)],
        false,
    )
}

/// Two radial dimples 90° apart (+z and +x): two nondegenerate minima, a
/// saddle between them, and a shallow maximum on the far side.
fn two_bumps(name: &str, params: &ScenarioParams) -> Result<Scenario> {
    params.check_known(&["rho", "amp", "eps", "kappa"])?;
    let rho = params.get("rho").unwrap_or(1.5);
    let amp = resolve_amp(params, rho, 0.05)?;
    let kappa = params.get("kappa").unwrap_or(1.0);
    // Each dimple has unit peak; the combined profile stays within [−2, 0].
    validate_positive_thickness(rho, 2.0 * amp)?;
    let eps = amp / rho;
    let centers = [Vec3::z(), Vec3::x()];
    let profile = Profile::Sum(
        centers
            .iter()
            .map(|c| Profile::Bump {
                center: *c,
                kappa,
                amplitude: -1.0,
            })
            .collect(),
    );
    let core = unit_core(3)?;
    let outer = OuterDomain::radial_graph(3, rho, eps, profile.clone())?;
    let formula = format!(
        "d(ω) = {} − {}·[exp(−{}·|ω − e_z|²) + exp(−{}·|ω − e_x|²)]",
        fmt(rho - 1.0),
        fmt(amp),
        fmt(kappa),
        fmt(kappa)
    );
    // The wells interact, so the critical points are located numerically;
    // only the thickness formula is attached.
    let oracles = AnalyticOracles {
        rho,
        eps,
        profile,
        critical_points: Vec::new(),
        thickness_formula: formula.clone(),
    };
    finish(
        name,
        core,
        outer,
        Some(oracles),
        format!("two radial dimples 90° apart, exact {formula}; two attracting minima separated by a saddle"),
        vec![("rho".into(), rho), ("amp".into(), amp), ("kappa".into(), kappa)],
        false,
    )
}

/// Steep planar bump whose flanks tilt the outer inward normals enough to
/// miss the core: a deliberate geometric-normal-property failure.
fn pathological_fold(name: &str, params: &ScenarioParams) -> Result<Scenario> {
    params.check_known(&["rho", "amp", "eps", "kappa"])?;
    let rho = params.get("rho").unwrap_or(1.5);
    let amp = resolve_amp(params, rho, 0.5)?;
    let kappa = params.get("kappa").unwrap_or(20.0);
    let eps = amp / rho;
    let profile = Profile::Bump {
        center: Vec3::x(),
        kappa,
        amplitude: 1.0,
    };
    let core = unit_core(2)?;
    let outer = OuterDomain::radial_graph(2, rho, eps, profile.clone())?;
    let oracles = AnalyticOracles {
        rho,
        eps,
        profile,
        critical_points: Vec::new(),
        thickness_formula: format!(
            "d(θ) = {} + {}·exp(−{}·|ω − e_x|²)",
            fmt(rho - 1.0),
            fmt(amp),
            fmt(kappa)
        ),
    };
    finish(
        name,
        core,
        outer,
        Some(oracles),
        "steep fold: inward normals on the bump flanks miss the core".to_string(),
        vec![("rho".into(), rho), ("amp".into(), amp), ("kappa".into(), kappa)],
        true,
    )
}

fn unit_core(dim: usize) -> Result<ConvexCore> {
    if dim == 2 {
        ConvexCore::circle(1.0)
    } else {
        ConvexCore::sphere(1.0)
    }
}

fn fmt(v: f64) -> String {
    // Trim trailing zeros for readable formulas.
    let s = format!("{v}");
    s
}

fn validate_positive_thickness(rho: f64, amp_total: f64) -> Result<()> {
    if rho <= 1.0 {
        return Err(Error::InvalidParameter {
            name: "rho".into(),
            reason: format!("outer base radius must exceed the unit core, got {rho}"),
        });
    }
    if amp_total.abs() >= rho - 1.0 {
        return Err(Error::InvalidParameter {
            name: "amp".into(),
            reason: format!(
                "|amp| = {} must stay below ρ − 1 = {} so the shell keeps positive thickness",
                amp_total.abs(),
                rho - 1.0
            ),
        });
    }
    Ok(())
}

fn finish(
    name: &str,
    core: ConvexCore,
    outer: OuterDomain,
    oracles: Option<AnalyticOracles>,
    mut notes: String,
    resolved_params: Vec<(String, f64)>,
    failure_expected: bool,
) -> Result<Scenario> {
    // Containment screen: the outer domain must strictly contain the core.
    for c in core.sample_boundary(512) {
        if outer.implicit_value(&c.position()) >= 0.0 {
            return Err(Error::InvalidParameter {
                name: "amp".into(),
                reason: "outer boundary does not strictly contain the core".into(),
            });
        }
    }

    let report = maps::check_admissibility(
        &core,
        &outer,
        BUILD_ADMISSIBILITY_SAMPLES,
        BUILD_ADMISSIBILITY_SAMPLES,
    );
    if !report.verdict && !failure_expected {
        return Err(Error::InvalidParameter {
            name: "amp".into(),
            reason: format!(
                "scenario fails admissibility screening ({} normal-property, {} connectivity failures at {} samples)",
                report.normal_property_failures.len(),
                report.connectivity_failures.len(),
                report.samples_checked()
            ),
        });
    }
    notes.push_str(&format!(
        "; admissibility verdict at construction: {} ({} normal-property, {} connectivity failures over {} samples)",
        report.verdict,
        report.normal_property_failures.len(),
        report.connectivity_failures.len(),
        report.samples_checked()
    ));

    // Oracle self-validation on a boundary grid.
    if let Some(oracles) = &oracles {
        for dir in sampling::directions(core.ambient_dim(), ORACLE_CHECK_GRID) {
            let c = core.boundary_point_in_direction(&dir)?;
            let numeric = maps::thickness(&core, &outer, &c)?.thickness;
            let analytic = oracles.thickness_in_direction(&c.position());
            if (numeric - analytic).abs() > ORACLE_CHECK_TOL {
                return Err(Error::InvalidParameter {
                    name: "oracle".into(),
                    reason: format!(
                        "analytic thickness disagrees with the ray cast at {dir:?}: {numeric} vs {analytic}"
                    ),
                });
            }
        }
    }

    Ok(Scenario {
        name: name.to_string(),
        core,
        outer,
        provenance_notes: notes,
        oracles,
        admissible: report.verdict,
        resolved_params,
    })
}

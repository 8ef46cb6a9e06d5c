//! Command implementations. Each command builds the named scenario,
//! runs the corresponding library operation, prints a short report, and
//! writes header-stamped data files into the output directory.

use std::fmt::Write as _;

use anyhow::{anyhow, bail, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use shellmap::analysis::{self, CriticalSet, SeedLabel};
use shellmap::calculus;
use shellmap::catalog::{build_scenario, Scenario, ScenarioParams};
use shellmap::dynamics::{self, IterateOptions, Termination};
use shellmap::geometry::{direction_from_angles, polar_angle, spherical_angles, CorePoint};
use shellmap::{maps, Vec3};

use crate::config::Settings;
use crate::output::{ensure_out_dir, full, write_file, Header};

fn scenario_from(settings: &Settings) -> Result<Scenario> {
    let name = settings.scenario_name()?;
    let params = ScenarioParams::from_pairs(&settings.params);
    build_scenario(name, &params).map_err(|e| anyhow!("cannot build scenario '{name}': {e}"))
}

fn require_admissible(scenario: &Scenario, command: &str) -> Result<()> {
    if !scenario.admissible {
        bail!(
            "scenario '{}' failed admissibility screening; `{command}` needs an admissible scenario — \
             inspect it with `shellmap check-admissibility --scenario {}`",
            scenario.name,
            scenario.name
        );
    }
    Ok(())
}

/// Seed point from --seed-point ("θ" or "polar,azimuth") or, when absent,
/// a direction drawn from the run seed.
fn resolve_seed_point(settings: &Settings, scenario: &Scenario) -> Result<(CorePoint, String)> {
    let core = &scenario.core;
    if let Some(spec) = &settings.seed_point {
        let spec_trim = spec.trim().trim_start_matches('(').trim_end_matches(')');
        let parts: Vec<&str> = spec_trim.split(',').map(str::trim).collect();
        let dir = match (core.ambient_dim(), parts.as_slice()) {
            (2, [theta]) => {
                let th: f64 = theta
                    .parse()
                    .map_err(|_| anyhow!("--seed-point: invalid angle '{theta}'"))?;
                Vec3::new(th.cos(), th.sin(), 0.0)
            }
            (3, [polar, azimuth]) => {
                let u: f64 = polar
                    .parse()
                    .map_err(|_| anyhow!("--seed-point: invalid polar angle '{polar}'"))?;
                let v: f64 = azimuth
                    .parse()
                    .map_err(|_| anyhow!("--seed-point: invalid azimuth '{azimuth}'"))?;
                direction_from_angles(u, v)
            }
            (2, _) => bail!("--seed-point for a planar scenario is a single angle θ"),
            _ => bail!("--seed-point for a sphere scenario is `polar,azimuth`"),
        };
        let point = core
            .boundary_point_in_direction(&dir)
            .map_err(|e| anyhow!("--seed-point: {e}"))?;
        Ok((point, format!("seed_point: {spec}")))
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(settings.seed.unwrap_or(0));
        let dir = loop {
            let v = Vec3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                if core.ambient_dim() == 3 {
                    rng.gen_range(-1.0..1.0)
                } else {
                    0.0
                },
            );
            if v.norm() > 1e-3 {
                break v;
            }
        };
        let point = core
            .boundary_point_in_direction(&dir)
            .map_err(|e| anyhow!("random seed point: {e}"))?;
        Ok((
            point,
            format!("seed_point: random from seed {}", settings.seed.unwrap_or(0)),
        ))
    }
}

fn angles_of(point: &CorePoint, dim: usize) -> String {
    if dim == 2 {
        format!("theta={}", full(polar_angle(&point.position())))
    } else {
        let (u, v) = spherical_angles(&point.position());
        format!("polar={} azimuth={}", full(u), full(v))
    }
}

fn iterate_options(settings: &Settings, scenario: &Scenario) -> IterateOptions {
    let mut opts = IterateOptions::for_core(&scenario.core);
    if let Some(m) = settings.max_iters {
        opts.max_iters = m;
    }
    if let Some(t) = settings.grad_tol {
        opts.grad_tolerance = t;
    }
    opts
}

fn trajectory_csv(traj: &dynamics::Trajectory, header: &Header) -> String {
    let mut out = header.render("#");
    out.push_str("# columns: k,x,y,z,d,V,grad_norm,displacement\n");
    for (k, s) in traj.steps.iter().enumerate() {
        let p = s.point.position();
        let _ = writeln!(
            out,
            "{k},{},{},{},{},{},{},{}",
            full(p.x),
            full(p.y),
            full(p.z),
            full(s.thickness),
            full(s.energy),
            full(s.grad_norm),
            full(s.displacement)
        );
    }
    out
}

fn termination_text(t: &Termination) -> String {
    match t {
        Termination::Converged(_) => "converged".to_string(),
        Termination::MaxIters => "max_iters".to_string(),
        Termination::Error { step, message } => format!("error at step {step}: {message}"),
    }
}

pub fn simulate(settings: &Settings) -> Result<()> {
    let scenario = scenario_from(settings)?;
    require_admissible(&scenario, "simulate")?;
    let out_dir = ensure_out_dir(settings)?;
    let opts = iterate_options(settings, &scenario);

    if let Some(n) = settings.sweep {
        let seeds = scenario.core.sample_boundary(n);
        let trajectories = dynamics::sweep(&scenario.core, &scenario.outer, &seeds, &opts);

        let mut header = Header::new("simulate --sweep", settings, &scenario);
        header.push(format!("sweep: {n}"));
        header.push(format!(
            "tolerances: grad_tol={} max_iters={} lyapunov_slack={}",
            opts.grad_tolerance,
            opts.max_iters,
            dynamics::LYAPUNOV_SLACK
        ));
        let mut csv = header.render("#");
        csv.push_str(
            "# columns: seed_index,x0,y0,z0,termination,steps,xf,yf,zf,final_grad,lyapunov_violations,cycle\n",
        );
        let mut converged = 0usize;
        let mut violations = 0usize;
        let mut cycles = 0usize;
        for (i, traj) in trajectories.iter().enumerate() {
            let first = traj.steps.first().context("empty trajectory")?;
            let last = traj.final_step().context("empty trajectory")?;
            let p0 = first.point.position();
            let pf = last.point.position();
            let v = traj.lyapunov_violations(dynamics::LYAPUNOV_SLACK);
            violations += v;
            if traj.converged() {
                converged += 1;
            }
            let cycle = dynamics::detect_cycles(traj, 1e-6 * scenario.core.scale());
            let cycle_text = match &cycle {
                Some(c) => {
                    cycles += 1;
                    format!("period_{}", c.period)
                }
                None => "none".to_string(),
            };
            let _ = writeln!(
                csv,
                "{i},{},{},{},{},{},{},{},{},{},{v},{cycle_text}",
                full(p0.x),
                full(p0.y),
                full(p0.z),
                termination_text(&traj.termination),
                traj.len(),
                full(pf.x),
                full(pf.y),
                full(pf.z),
                full(last.grad_norm),
            );
        }
        write_file(&out_dir.join("sweep.csv"), &csv)?;
        println!(
            "sweep: {converged}/{n} converged, {violations} Lyapunov violations, {cycles} cycles detected"
        );
        return Ok(());
    }

    let (seed_point, seed_note) = resolve_seed_point(settings, &scenario)?;
    let traj = dynamics::iterate(&scenario.core, &scenario.outer, seed_point, &opts);

    let mut header = Header::new("simulate", settings, &scenario);
    header.push(seed_note);
    header.push(format!(
        "tolerances: grad_tol={} max_iters={} lyapunov_slack={}",
        opts.grad_tolerance,
        opts.max_iters,
        dynamics::LYAPUNOV_SLACK
    ));
    write_file(&out_dir.join("trajectory.csv"), &trajectory_csv(&traj, &header))?;

    let last = traj.final_step().context("empty trajectory")?;
    let cycle = dynamics::detect_cycles(&traj, 1e-6 * scenario.core.scale());
    let mut summary = header.render("#");
    let _ = writeln!(summary, "termination: {}", termination_text(&traj.termination));
    let _ = writeln!(summary, "steps: {}", traj.len());
    let _ = writeln!(summary, "final_point: {}", angles_of(&last.point, scenario.ambient_dim()));
    let _ = writeln!(summary, "final_thickness: {}", full(last.thickness));
    let _ = writeln!(summary, "final_energy: {}", full(last.energy));
    let _ = writeln!(summary, "final_grad_norm: {}", full(last.grad_norm));
    let _ = writeln!(
        summary,
        "lyapunov_violations: {}",
        traj.lyapunov_violations(dynamics::LYAPUNOV_SLACK)
    );
    let _ = writeln!(
        summary,
        "cycles: {}",
        match &cycle {
            Some(c) => format!("period {} starting at step {}", c.period, c.start_index),
            None => "none".to_string(),
        }
    );
    write_file(&out_dir.join("summary.txt"), &summary)?;
    println!(
        "simulate: {} after {} steps, final grad {:.3e}",
        termination_text(&traj.termination),
        traj.len(),
        last.grad_norm
    );
    Ok(())
}

fn critical_table(records: &[analysis::CriticalPointRecord], dim: usize, header: &Header) -> String {
    let mut out = header.render("#");
    if dim == 2 {
        out.push_str(
            "# columns: index,x,y,z,d,lambda_1,mu_1,stability,grad_residual,jacobian_mismatch\n",
        );
    } else {
        out.push_str(
            "# columns: index,x,y,z,d,lambda_1,lambda_2,mu_1,mu_2,stability,grad_residual,jacobian_mismatch\n",
        );
    }
    for (i, r) in records.iter().enumerate() {
        let p = r.location.position();
        let lambdas: Vec<String> = r.hessian_eigs.iter().map(|l| full(*l)).collect();
        let mus: Vec<String> = r.map_eigs.iter().map(|m| full(*m)).collect();
        let _ = writeln!(
            out,
            "{i},{},{},{},{},{},{},{},{},{}",
            full(p.x),
            full(p.y),
            full(p.z),
            full(r.thickness_at),
            lambdas.join(","),
            mus.join(","),
            r.stability,
            full(r.grad_residual),
            full(r.jacobian_mismatch)
        );
    }
    out
}

pub fn critical_points(settings: &Settings) -> Result<()> {
    let scenario = scenario_from(settings)?;
    let out_dir = ensure_out_dir(settings)?;
    let mut opts = analysis::SearchOptions::default();
    if let Some(s) = settings.starts {
        opts.n_starts = s;
    }
    let search = analysis::find_critical_points(&scenario.core, &scenario.outer, &opts)
        .map_err(|e| anyhow!("critical-point search failed: {e}"))?;
    for w in &search.warnings {
        eprintln!("warning: {w}");
    }

    let mut header = Header::new("critical-points", settings, &scenario);
    header.push(format!(
        "tolerances: critical_tolerance={} starts={} merge_radius={}",
        opts.critical_tolerance,
        opts.n_starts,
        analysis::merge_radius(&scenario.core)
    ));

    match search.result {
        CriticalSet::GloballyCritical => {
            let mut out = header.render("#");
            out.push_str("globally_critical: true\n");
            write_file(&out_dir.join("critical_points.csv"), &out)?;
            println!("critical-points: scenario is globally critical (every point is a fixed point)");
        }
        CriticalSet::Points(records) => {
            write_file(
                &out_dir.join("critical_points.csv"),
                &critical_table(&records, scenario.ambient_dim(), &header),
            )?;
            println!("critical-points: {} found", records.len());
            for r in &records {
                println!(
                    "  {} at {} (d = {:.6}, mu = [{}])",
                    r.stability,
                    angles_of(&r.location, scenario.ambient_dim()),
                    r.thickness_at,
                    r.map_eigs
                        .iter()
                        .map(|m| format!("{m:.4}"))
                        .collect::<Vec<_>>()
                        .join(", ")
                );
            }
        }
    }
    Ok(())
}

pub fn basins(settings: &Settings) -> Result<()> {
    let scenario = scenario_from(settings)?;
    require_admissible(&scenario, "basins")?;
    let out_dir = ensure_out_dir(settings)?;
    let resolution = settings
        .resolution
        .unwrap_or(if scenario.ambient_dim() == 2 { 512 } else { 100 });

    let search = analysis::find_critical_points(
        &scenario.core,
        &scenario.outer,
        &analysis::SearchOptions::default(),
    )
    .map_err(|e| anyhow!("critical-point search failed: {e}"))?;

    let mut header = Header::new("basins", settings, &scenario);
    header.push(format!("resolution: {resolution}"));

    let records = match search.result {
        CriticalSet::GloballyCritical => {
            let mut out = header.render("#");
            out.push_str("globally_critical: true\n");
            write_file(&out_dir.join("basins.csv"), &out)?;
            println!("basins: scenario is globally critical; every seed is its own fixed point (no SVG)");
            return Ok(());
        }
        CriticalSet::Points(records) => records,
    };

    let mut opts = analysis::BasinOptions::for_core(&scenario.core);
    if let Some(b) = settings.budget {
        opts.iteration_budget = b;
    }
    if let Some(t) = settings.grad_tol {
        opts.grad_tolerance = t;
    }
    let map = analysis::compute_basins(&scenario.core, &scenario.outer, resolution, &records, &opts);

    header.push(format!(
        "tolerances: basin_match_radius={} iteration_budget={} grad_tol={}",
        analysis::basin_match_radius(&scenario.core),
        opts.iteration_budget,
        opts.grad_tolerance
    ));
    for (i, r) in records.iter().enumerate() {
        header.push(format!(
            "label {i}: {} at {} (d = {}, seeds = {})",
            r.stability,
            angles_of(&r.location, scenario.ambient_dim()),
            full(r.thickness_at),
            map.counts[i]
        ));
    }
    header.push(format!(
        "resolved_fraction: {} unresolved: {} failed: {}",
        map.resolved_fraction(),
        map.unresolved,
        map.failed
    ));

    let mut csv = header.render("#");
    csv.push_str("# columns: x,y,z,label (critical-point index, -1 unresolved, -2 failed)\n");
    for (seed, label) in map.seeds.iter().zip(&map.labels) {
        let p = seed.position();
        let code = match label {
            SeedLabel::Critical(i) => *i as i64,
            SeedLabel::Unresolved => -1,
            SeedLabel::Failed => -2,
        };
        let _ = writeln!(csv, "{},{},{},{code}", full(p.x), full(p.y), full(p.z));
    }
    write_file(&out_dir.join("basins.csv"), &csv)?;

    let svg = analysis::svg::basin_svg(&map, &header.render(""));
    write_file(&out_dir.join("basins.svg"), &svg)?;
    println!(
        "basins: {:.4}% resolved over {} seeds ({} unresolved, {} failed)",
        100.0 * map.resolved_fraction(),
        map.seeds.len(),
        map.unresolved,
        map.failed
    );
    Ok(())
}

pub fn verify_expansion(settings: &Settings) -> Result<()> {
    let scenario = scenario_from(settings)?;
    let out_dir = ensure_out_dir(settings)?;
    let grid = settings.grid.unwrap_or(256);

    let amps: Vec<f64> = match &settings.eps_family {
        Some(spec) => Settings::parse_family(spec, "eps_family")?,
        None => {
            let amp = scenario
                .resolved_params
                .iter()
                .find(|(k, _)| k == "amp")
                .map(|(_, v)| *v);
            match amp {
                Some(a) => vec![a, a / 2.0, a / 4.0],
                None => vec![0.0],
            }
        }
    };

    // Rebuild the scenario at each amplitude with the other parameters
    // fixed.
    let mut family = Vec::new();
    for amp in &amps {
        let mut params = ScenarioParams::new();
        for (k, v) in &settings.params {
            if k != "amp" && k != "eps" {
                params = params.set(k, *v);
            }
        }
        if *amp != 0.0 || scenario.name.starts_with("perturbed") {
            params = params.set("amp", *amp);
        }
        let s = build_scenario(&scenario.name, &params)
            .map_err(|e| anyhow!("cannot build family member amp={amp}: {e}"))?;
        family.push((*amp, s));
    }

    let h = calculus::default_gradient_step(&scenario.core);
    let report = analysis::verify_expansion(
        family.iter().map(|(a, s)| (*a, &s.core, &s.outer)),
        grid,
        h,
    )
    .map_err(|e| anyhow!("expansion verification failed: {e}"))?;

    let mut header = Header::new("verify-expansion", settings, &scenario);
    header.push(format!("grid: {grid} gradient_step: {h}"));
    let mut out = header.render("#");
    out.push_str("# columns: amp,max_remainder,k_hat,envelope_points\n");
    for (amp, stats) in &report.per_scale {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            full(*amp),
            full(stats.max_remainder),
            stats.k_hat.map(full).unwrap_or_else(|| "nan".to_string()),
            stats.envelope_points
        );
    }
    let _ = writeln!(
        out,
        "# max_remainder_ratios: {}",
        report
            .max_remainder_ratios
            .iter()
            .map(|r| format!("{r:.4}"))
            .collect::<Vec<_>>()
            .join(",")
    );
    if let Some(slope) = report.loglog_slope {
        let _ = writeln!(out, "# loglog_slope: {slope:.4}");
    }
    write_file(&out_dir.join("expansion.csv"), &out)?;

    println!("verify-expansion over amps {amps:?}:");
    for (amp, stats) in &report.per_scale {
        println!(
            "  amp {amp}: max remainder {:.6e}, K_hat {}",
            stats.max_remainder,
            stats
                .k_hat
                .map(|k| format!("{k:.4}"))
                .unwrap_or_else(|| "undefined (no driver above floor)".to_string())
        );
    }
    if !report.max_remainder_ratios.is_empty() {
        println!("  ratios: {:?}", report.max_remainder_ratios);
    }
    if let Some(slope) = report.loglog_slope {
        println!("  log-log slope: {slope:.3}");
    }
    Ok(())
}

pub fn check_admissibility(settings: &Settings) -> Result<()> {
    let scenario = scenario_from(settings)?;
    let out_dir = ensure_out_dir(settings)?;
    let samples = settings.samples.unwrap_or(10_000);
    let report =
        maps::check_admissibility(&scenario.core, &scenario.outer, samples, samples);

    let mut header = Header::new("check-admissibility", settings, &scenario);
    header.push(format!("samples: {samples} per boundary"));
    let mut out = header.render("#");
    let _ = writeln!(out, "verdict: {}", report.verdict);
    let _ = writeln!(out, "samples_checked: {}", report.samples_checked());
    let _ = writeln!(
        out,
        "normal_property_failures: {}",
        report.normal_property_failures.len()
    );
    let _ = writeln!(
        out,
        "connectivity_failures: {}",
        report.connectivity_failures.len()
    );
    for p in report.normal_property_failures.iter().take(16) {
        let _ = writeln!(out, "normal_failure_at: {},{},{}", full(p.x), full(p.y), full(p.z));
    }
    for p in report.connectivity_failures.iter().take(16) {
        let _ = writeln!(out, "connectivity_failure_at: {},{},{}", full(p.x), full(p.y), full(p.z));
    }
    if report.verdict {
        if let Ok((lo, hi)) = maps::thickness_bounds(&scenario.core, &scenario.outer, 512) {
            let _ = writeln!(out, "thickness_range: {},{}", full(lo), full(hi));
        }
    }
    write_file(&out_dir.join("admissibility.txt"), &out)?;
    println!(
        "check-admissibility: verdict {} ({} normal-property, {} connectivity failures over {} samples)",
        report.verdict,
        report.normal_property_failures.len(),
        report.connectivity_failures.len(),
        report.samples_checked()
    );
    Ok(())
}

pub fn constants(settings: &Settings) -> Result<()> {
    let scenario = scenario_from(settings)?;
    let out_dir = ensure_out_dir(settings)?;
    let grid_size = settings.grid.unwrap_or(64);

    let amps: Option<Vec<f64>> = settings
        .amp_family
        .as_deref()
        .map(|spec| Settings::parse_family(spec, "amp_family"))
        .transpose()?;

    let mut members: Vec<(Option<f64>, Scenario)> = Vec::new();
    match amps {
        Some(list) => {
            for amp in list {
                let mut params = ScenarioParams::new();
                for (k, v) in &settings.params {
                    if k != "amp" && k != "eps" {
                        params = params.set(k, *v);
                    }
                }
                params = params.set("amp", amp);
                let s = build_scenario(&scenario.name, &params)
                    .map_err(|e| anyhow!("cannot build family member amp={amp}: {e}"))?;
                members.push((Some(amp), s));
            }
        }
        None => members.push((None, scenario.clone())),
    }

    let mut header = Header::new("constants", settings, &scenario);
    header.push(format!("grid: {grid_size}"));
    let mut out = header.render("#");
    out.push_str("# columns: amp,eta_hat,a_hat,b_hat,epsilon0,sample_count,quartic_dominates\n");

    for (amp, s) in &members {
        let grid = s.core.sample_boundary(grid_size);
        let h = calculus::default_gradient_step(&s.core);
        match dynamics::estimate_descent_constants(&s.core, &s.outer, &grid, h) {
            Ok(k) => {
                let amp_text = amp.map(full).unwrap_or_else(|| "default".to_string());
                let _ = writeln!(
                    out,
                    "{amp_text},{},{},{},{},{},{}",
                    full(k.eta_hat),
                    full(k.a_hat),
                    full(k.b_hat),
                    full(k.epsilon0),
                    k.sample_count,
                    k.quartic_dominates
                );
                println!(
                    "constants{}: eta_hat {:.4e}, a_hat {:.4e}, b_hat {:.4e}, epsilon0 {:.4e}{}",
                    amp.map(|a| format!(" (amp {a})")).unwrap_or_default(),
                    k.eta_hat,
                    k.a_hat,
                    k.b_hat,
                    k.epsilon0,
                    if k.quartic_dominates {
                        " [flag: quartic term not dominated]"
                    } else {
                        ""
                    }
                );
            }
            Err(shellmap::Error::GloballyCritical) => {
                bail!("scenario globally critical; constants undefined");
            }
            Err(e) => return Err(anyhow!("constants estimation failed: {e}")),
        }
    }

    if let Some(radius) = settings.neighborhood_radius {
        let search = analysis::find_critical_points(
            &scenario.core,
            &scenario.outer,
            &analysis::SearchOptions::default(),
        )
        .map_err(|e| anyhow!("critical-point search failed: {e}"))?;
        if let CriticalSet::Points(records) = search.result {
            let cps: Vec<Vec3> = records.iter().map(|r| r.location.position()).collect();
            let grid = scenario.core.sample_boundary(grid_size);
            let h = calculus::default_gradient_step(&scenario.core);
            let diag = dynamics::estimate_neighborhood_constants(
                &scenario.core,
                &scenario.outer,
                &grid,
                &cps,
                radius,
                h,
            )
            .map_err(|e| anyhow!("neighborhood diagnostics failed: {e}"))?;
            let _ = writeln!(
                out,
                "# neighborhood radius {}: gamma_U {} epsilon_U {} excluded {}",
                radius,
                full(diag.gamma_u),
                full(diag.epsilon_u),
                diag.excluded
            );
            println!(
                "neighborhood diagnostics (radius {radius}): gamma_U {:.4e}, epsilon_U {:.4e} ({} grid points excluded)",
                diag.gamma_u, diag.epsilon_u, diag.excluded
            );
        } else {
            println!("neighborhood diagnostics skipped: scenario globally critical");
        }
    }

    write_file(&out_dir.join("constants.csv"), &out)?;
    Ok(())
}

pub fn dispatch_from_config(command: &str, settings: &Settings) -> Result<()> {
    match command {
        "simulate" => simulate(settings),
        "critical-points" => critical_points(settings),
        "basins" => basins(settings),
        "verify-expansion" => verify_expansion(settings),
        "check-admissibility" => check_admissibility(settings),
        "constants" => constants(settings),
        other => bail!("unknown command '{other}' in config file"),
    }
}

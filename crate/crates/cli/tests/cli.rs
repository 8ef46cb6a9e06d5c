//! End-to-end tests of the shellmap binary: command dispatch, file
//! outputs, config parsing diagnostics, and byte-level determinism.

use std::path::Path;
use std::process::{Command, Output};

fn shellmap(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shellmap"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|_| panic!("missing {name}"))
}

#[test]
fn simulate_cosine_circle_reaches_the_minimum() {
    let tmp = tempfile::tempdir().unwrap();
    let out = shellmap(
        &[
            "--out",
            "run",
            "--seed",
            "7",
            "simulate",
            "--scenario",
            "perturbed_circle_cosine",
            "--seed-point",
            "1.5707963267948966",
        ],
        tmp.path(),
    );
    assert!(out.status.success(), "stderr: {}", stderr(&out));

    let traj = read(&tmp.path().join("run"), "trajectory.csv");
    assert!(traj.starts_with("# command: simulate"));
    assert!(traj.contains("# scenario: perturbed_circle_cosine"));
    assert!(traj.contains("# seed: 7"));
    let last = traj.lines().rfind(|l| !l.starts_with('#')).unwrap();
    let fields: Vec<f64> = last.split(',').map(|v| v.parse().unwrap()).collect();
    // columns: k,x,y,z,d,V,grad_norm,displacement
    let (x, y, grad_norm) = (fields[1], fields[2], fields[6]);
    assert!(grad_norm <= 1e-8, "final grad {grad_norm}");
    let angle = y.atan2(x);
    assert!(
        (angle.abs() - std::f64::consts::PI).abs() < 1e-4,
        "final angle {angle}"
    );

    let summary = read(&tmp.path().join("run"), "summary.txt");
    assert!(summary.contains("termination: converged"));
    assert!(summary.contains("cycles: none"));
    assert!(summary.contains("lyapunov_violations: 0"));
}

#[test]
fn critical_points_table_has_both_multipliers() {
    let tmp = tempfile::tempdir().unwrap();
    let out = shellmap(
        &[
            "--out",
            "run",
            "critical-points",
            "--scenario",
            "perturbed_circle_cosine",
        ],
        tmp.path(),
    );
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("2 found"), "stdout: {text}");

    let table = read(&tmp.path().join("run"), "critical_points.csv");
    let rows: Vec<&str> = table.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 2);
    // Sorted by thickness: the attracting minimum (μ = 0.92) first.
    let mu_min: f64 = rows[0].split(',').nth(6).unwrap().parse().unwrap();
    let mu_max: f64 = rows[1].split(',').nth(6).unwrap().parse().unwrap();
    assert!((mu_min - 0.92).abs() <= 0.01, "μ at minimum: {mu_min}");
    assert!((mu_max - 1.12).abs() <= 0.01, "μ at maximum: {mu_max}");
    assert!(rows[0].contains("attracting"));
    assert!(rows[1].contains("repelling"));
}

#[test]
fn basins_on_concentric_circle_report_globally_critical_without_svg() {
    let tmp = tempfile::tempdir().unwrap();
    let out = shellmap(
        &["--out", "run", "basins", "--scenario", "concentric_circle"],
        tmp.path(),
    );
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("globally critical"));
    let csv = read(&tmp.path().join("run"), "basins.csv");
    assert!(csv.contains("globally_critical: true"));
    assert!(!tmp.path().join("run/basins.svg").exists(), "no SVG expected");
}

#[test]
fn basins_on_cosine_circle_emit_svg() {
    let tmp = tempfile::tempdir().unwrap();
    let out = shellmap(
        &[
            "--out",
            "run",
            "basins",
            "--scenario",
            "perturbed_circle_cosine",
            "--resolution",
            "64",
        ],
        tmp.path(),
    );
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let svg = read(&tmp.path().join("run"), "basins.svg");
    assert!(svg.starts_with("<?xml"));
    assert!(svg.contains("<rect"));
    let csv = read(&tmp.path().join("run"), "basins.csv");
    assert!(csv.contains("resolved_fraction:"));
}

#[test]
fn simulate_aborts_on_inadmissible_scenario_with_pointer() {
    let tmp = tempfile::tempdir().unwrap();
    let out = shellmap(
        &[
            "simulate",
            "--scenario",
            "pathological_fold",
            "--seed-point",
            "0.5",
        ],
        tmp.path(),
    );
    assert!(!out.status.success());
    let err = stderr(&out);
    assert!(
        err.contains("check-admissibility"),
        "error must point at the screening command, got: {err}"
    );
}

#[test]
fn check_admissibility_flags_the_fold() {
    let tmp = tempfile::tempdir().unwrap();
    let out = shellmap(
        &[
            "--out",
            "run",
            "check-admissibility",
            "--scenario",
            "pathological_fold",
            "--samples",
            "2000",
        ],
        tmp.path(),
    );
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let report = read(&tmp.path().join("run"), "admissibility.txt");
    assert!(report.contains("verdict: false"));
    assert!(report.contains("normal_failure_at:"));
}

#[test]
fn constants_on_concentric_scenario_fail_cleanly() {
    let tmp = tempfile::tempdir().unwrap();
    let out = shellmap(
        &["constants", "--scenario", "concentric_circle"],
        tmp.path(),
    );
    assert!(!out.status.success());
    assert!(stderr(&out).contains("scenario globally critical; constants undefined"));
}

#[test]
fn constants_family_reports_every_amplitude() {
    let tmp = tempfile::tempdir().unwrap();
    let out = shellmap(
        &[
            "--out",
            "run",
            "constants",
            "--scenario",
            "perturbed_circle_cosine",
            "--amp-family",
            "0.02,0.05,0.1",
        ],
        tmp.path(),
    );
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let csv = read(&tmp.path().join("run"), "constants.csv");
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 3);
    for row in rows {
        let eta: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
        assert!(eta > 0.0);
        assert!(row.ends_with("false"), "quartic flag clear: {row}");
    }
}

#[test]
fn verify_expansion_family_scales_quadratically() {
    let tmp = tempfile::tempdir().unwrap();
    let out = shellmap(
        &[
            "--out",
            "run",
            "verify-expansion",
            "--scenario",
            "perturbed_circle_cosine",
            "--eps-family",
            "0.08,0.04,0.02",
            "--grid",
            "128",
        ],
        tmp.path(),
    );
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let csv = read(&tmp.path().join("run"), "expansion.csv");
    let slope_line = csv
        .lines()
        .find(|l| l.starts_with("# loglog_slope:"))
        .expect("slope reported");
    let slope: f64 = slope_line.rsplit(' ').next().unwrap().parse().unwrap();
    assert!((slope - 2.0).abs() <= 0.3, "slope {slope}");
}

#[test]
fn identical_seed_and_config_give_byte_identical_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    for dir in ["a", "b"] {
        let out = shellmap(
            &[
                "--out",
                dir,
                "--seed",
                "42",
                "--jobs",
                "2",
                "simulate",
                "--scenario",
                "perturbed_sphere_height",
                "--seed-point",
                "0.8,2.1",
            ],
            tmp.path(),
        );
        assert!(out.status.success(), "stderr: {}", stderr(&out));
    }
    for name in ["trajectory.csv", "summary.txt"] {
        let a = read(&tmp.path().join("a"), name);
        let b = read(&tmp.path().join("b"), name);
        assert_eq!(a, b, "{name} differs between identical runs");
    }
}

#[test]
fn config_file_drives_a_full_run_and_flags_override() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(
        tmp.path().join("run.cfg"),
        "# demo config\n\
         command = simulate\n\
         scenario = perturbed_circle_cosine\n\
         seed_point = 0.9\n\
         out = from_config\n\
         seed = 3\n\
         [params]\n\
         rho = 1.5\n\
         amp = 0.1\n",
    )
    .unwrap();

    let out = shellmap(&["--config", "run.cfg"], tmp.path());
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let summary = read(&tmp.path().join("from_config"), "summary.txt");
    assert!(summary.contains("termination: converged"));
    assert!(summary.contains("params: rho=1.5 amp=0.1"));

    // A flag overrides the config's output directory.
    let out = shellmap(&["--config", "run.cfg", "--out", "override"], tmp.path());
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert!(tmp.path().join("override/summary.txt").exists());
}

#[test]
fn config_errors_carry_line_and_field_diagnostics() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(
        tmp.path().join("bad.cfg"),
        "command = simulate\nscenario = perturbed_circle_cosine\ngrad_tol = banana\n",
    )
    .unwrap();
    let out = shellmap(&["--config", "bad.cfg"], tmp.path());
    assert!(!out.status.success());
    let err = stderr(&out);
    assert!(
        err.contains("bad.cfg:3") && err.contains("grad_tol") && err.contains("banana"),
        "diagnostics must carry file, line and field: {err}"
    );

    std::fs::write(tmp.path().join("bad2.cfg"), "what even is this\n").unwrap();
    let out = shellmap(&["--config", "bad2.cfg"], tmp.path());
    assert!(!out.status.success());
    assert!(stderr(&out).contains("bad2.cfg:1"));
}

#[test]
fn unknown_scenario_is_a_clean_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = shellmap(&["simulate", "--scenario", "nope"], tmp.path());
    assert!(!out.status.success());
    assert!(stderr(&out).contains("unknown scenario 'nope'"));
}

#[test]
fn sweep_covers_every_seed_and_counts_convergence() {
    let tmp = tempfile::tempdir().unwrap();
    let out = shellmap(
        &[
            "--out",
            "run",
            "simulate",
            "--scenario",
            "perturbed_circle_cosine",
            "--sweep",
            "16",
        ],
        tmp.path(),
    );
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("16/16 converged"));
    let csv = read(&tmp.path().join("run"), "sweep.csv");
    let rows = csv.lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(rows, 16);
}

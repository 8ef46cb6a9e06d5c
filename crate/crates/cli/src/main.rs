mod commands;
mod config;
mod output;

use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};

use config::Settings;

/// Simulator for thickness-landscape dynamics between nested convex
/// boundaries: trajectories, critical points, basins of attraction,
/// expansion verification, admissibility screening, descent constants.
#[derive(Debug, Parser)]
#[command(name = "shellmap", version, about)]
struct Cli {
    /// Config file (flat key = value lines, one [params] section).
    /// Command-line flags override file values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for data files (default "out").
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for grid sweeps (default: available parallelism).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Seed recorded in every output and used for randomized seed points.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Clone, Args)]
struct ScenarioArgs {
    /// Catalog scenario: concentric_circle, concentric_sphere,
    /// perturbed_circle_cosine, perturbed_sphere_height,
    /// perturbed_sphere_single_bump, perturbed_sphere_two_bumps,
    /// pathological_fold.
    #[arg(long)]
    scenario: Option<String>,

    /// Scenario parameter override, repeatable: --param rho=1.5
    /// (keys: rho, amp or eps, kappa where applicable).
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Iterate the return step and record the trajectory.
    Simulate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Seed point: an angle θ for planar scenarios, "polar,azimuth"
        /// for spheres. Omitted: drawn from --seed.
        #[arg(long, value_name = "θ|U,V")]
        seed_point: Option<String>,
        /// Sweep N deterministic seeds instead of a single seed point.
        #[arg(long, value_name = "N")]
        sweep: Option<usize>,
        #[arg(long)]
        max_iters: Option<usize>,
        #[arg(long)]
        grad_tol: Option<f64>,
    },
    /// Locate and classify the critical points of the thickness.
    CriticalPoints {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Multistart count.
        #[arg(long)]
        starts: Option<usize>,
    },
    /// Basin-of-attraction decomposition over a boundary grid (+ SVG).
    Basins {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Grid resolution: angle count (2D) or polar rows (3D, cols = 2R).
        #[arg(long)]
        resolution: Option<usize>,
        /// Per-seed iteration budget.
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Verify the first-order expansion across an amplitude family.
    VerifyExpansion {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Comma-separated amplitude family, largest first: 0.08,0.04,0.02
        #[arg(long, value_name = "A,B,C")]
        eps_family: Option<String>,
        /// Boundary grid size per family member.
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Sampled admissibility screening.
    CheckAdmissibility {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Samples per boundary (outer normals and core rays each).
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Empirical descent constants over a boundary grid.
    Constants {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Grid size.
        #[arg(long)]
        grid: Option<usize>,
        /// Amplitude family for a per-amplitude constants table.
        #[arg(long, value_name = "A,B,C")]
        amp_family: Option<String>,
        /// Also report uniform-descent diagnostics outside neighborhoods
        /// of this radius around the located critical points.
        #[arg(long)]
        neighborhood_radius: Option<f64>,
    },
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    let mut settings = match &cli.config {
        Some(path) => Settings::from_file(path)?,
        None => Settings::default(),
    };
    settings.apply_globals(cli.out.clone(), cli.jobs, cli.seed);

    if let Some(jobs) = settings.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .ok();
    }

    match cli.command {
        Some(Command::Simulate {
            scenario,
            seed_point,
            sweep,
            max_iters,
            grad_tol,
        }) => {
            settings.merge_scenario(&scenario)?;
            settings.merge_opt_str("seed_point", seed_point);
            settings.merge_opt_usize("sweep", sweep);
            settings.merge_opt_usize("max_iters", max_iters);
            settings.merge_opt_f64("grad_tol", grad_tol);
            commands::simulate(&settings)
        }
        Some(Command::CriticalPoints { scenario, starts }) => {
            settings.merge_scenario(&scenario)?;
            settings.merge_opt_usize("starts", starts);
            commands::critical_points(&settings)
        }
        Some(Command::Basins {
            scenario,
            resolution,
            budget,
        }) => {
            settings.merge_scenario(&scenario)?;
            settings.merge_opt_usize("resolution", resolution);
            settings.merge_opt_usize("budget", budget);
            commands::basins(&settings)
        }
        Some(Command::VerifyExpansion {
            scenario,
            eps_family,
            grid,
        }) => {
            settings.merge_scenario(&scenario)?;
            settings.merge_opt_str("eps_family", eps_family);
            settings.merge_opt_usize("grid", grid);
            commands::verify_expansion(&settings)
        }
        Some(Command::CheckAdmissibility { scenario, samples }) => {
            settings.merge_scenario(&scenario)?;
            settings.merge_opt_usize("samples", samples);
            commands::check_admissibility(&settings)
        }
        Some(Command::Constants {
            scenario,
            grid,
            amp_family,
            neighborhood_radius,
        }) => {
            settings.merge_scenario(&scenario)?;
            settings.merge_opt_usize("grid", grid);
            settings.merge_opt_str("amp_family", amp_family);
            settings.merge_opt_f64("neighborhood_radius", neighborhood_radius);
            commands::constants(&settings)
        }
        None => match settings.command.clone() {
            Some(cmd) => commands::dispatch_from_config(&cmd, &settings),
            None => bail!("no command given (pass a subcommand or a config file with `command = ...`)"),
        },
    }
}

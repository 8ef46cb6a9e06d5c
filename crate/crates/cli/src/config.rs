//! Run configuration: defaults, config-file parsing with line/field
//! diagnostics, and command-line merging (flags win over file values).
//!
//! File format: flat `key = value` lines plus a single `[params]` section
//! holding scenario parameters. `#` starts a comment. Example:
//!
//! ```text
//! command = simulate
//! scenario = perturbed_circle_cosine
//! seed_point = 1.5708
//! out = runs/demo
//! seed = 7
//! [params]
//! rho = 1.5
//! amp = 0.1
//! ```

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};

use crate::ScenarioArgs;

const TOP_LEVEL_KEYS: [&str; 15] = [
    "command",
    "scenario",
    "out",
    "jobs",
    "seed",
    "seed_point",
    "sweep",
    "max_iters",
    "grad_tol",
    "starts",
    "resolution",
    "budget",
    "eps_family",
    "amp_family",
    "samples",
];

#[derive(Debug, Clone)]
pub struct Settings {
    pub command: Option<String>,
    pub scenario: Option<String>,
    pub params: Vec<(String, f64)>,
    pub out: PathBuf,
    pub jobs: Option<usize>,
    pub seed: Option<u64>,
    pub seed_point: Option<String>,
    pub sweep: Option<usize>,
    pub max_iters: Option<usize>,
    pub grad_tol: Option<f64>,
    pub starts: Option<usize>,
    pub resolution: Option<usize>,
    pub budget: Option<usize>,
    pub eps_family: Option<String>,
    pub amp_family: Option<String>,
    pub samples: Option<usize>,
    pub neighborhood_radius: Option<f64>,
    pub grid: Option<usize>,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            command: None,
            scenario: None,
            params: Vec::new(),
            out: PathBuf::from("out"),
            jobs: None,
            seed: None,
            seed_point: None,
            sweep: None,
            max_iters: None,
            grad_tol: None,
            starts: None,
            resolution: None,
            budget: None,
            eps_family: None,
            amp_family: None,
            samples: None,
            neighborhood_radius: None,
            grid: None,
        }
    }
}

impl Settings {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        let mut settings = Settings::default();
        let mut in_params = false;
        let file = path.display();

        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') {
                if line == "[params]" {
                    in_params = true;
                    continue;
                }
                bail!("{file}:{lineno}: unknown section {line}; only [params] is supported");
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("{file}:{lineno}: expected `key = value`, got `{line}`"))?;
            let key = key.trim();
            let value = value.trim();
            if value.is_empty() {
                bail!("{file}:{lineno}: field '{key}' has no value");
            }
            if in_params {
                let v: f64 = value.parse().map_err(|_| {
                    anyhow!("{file}:{lineno}: field '{key}': invalid number '{value}'")
                })?;
                settings.params.push((key.to_string(), v));
                continue;
            }
            if !TOP_LEVEL_KEYS.contains(&key) && key != "neighborhood_radius" && key != "grid" {
                bail!("{file}:{lineno}: unknown field '{key}'");
            }
            let parse_usize = |v: &str| -> Result<usize> {
                v.parse()
                    .map_err(|_| anyhow!("{file}:{lineno}: field '{key}': invalid integer '{v}'"))
            };
            let parse_f64 = |v: &str| -> Result<f64> {
                v.parse()
                    .map_err(|_| anyhow!("{file}:{lineno}: field '{key}': invalid number '{v}'"))
            };
            match key {
                "command" => settings.command = Some(value.to_string()),
                "scenario" => settings.scenario = Some(value.to_string()),
                "out" => settings.out = PathBuf::from(value),
                "jobs" => settings.jobs = Some(parse_usize(value)?),
                "seed" => {
                    settings.seed = Some(value.parse().map_err(|_| {
                        anyhow!("{file}:{lineno}: field 'seed': invalid integer '{value}'")
                    })?)
                }
                "seed_point" => settings.seed_point = Some(value.to_string()),
                "sweep" => settings.sweep = Some(parse_usize(value)?),
                "max_iters" => settings.max_iters = Some(parse_usize(value)?),
                "grad_tol" => settings.grad_tol = Some(parse_f64(value)?),
                "starts" => settings.starts = Some(parse_usize(value)?),
                "resolution" => settings.resolution = Some(parse_usize(value)?),
                "budget" => settings.budget = Some(parse_usize(value)?),
                "eps_family" => settings.eps_family = Some(value.to_string()),
                "amp_family" => settings.amp_family = Some(value.to_string()),
                "samples" => settings.samples = Some(parse_usize(value)?),
                "neighborhood_radius" => settings.neighborhood_radius = Some(parse_f64(value)?),
                "grid" => settings.grid = Some(parse_usize(value)?),
                _ => unreachable!(),
            }
        }
        settings.validate()?;
        Ok(settings)
    }

    fn validate(&self) -> Result<()> {
        if let Some(t) = self.grad_tol {
            if t.is_nan() || t <= 0.0 {
                bail!("field 'grad_tol' must be positive, got {t}");
            }
        }
        for (key, value) in [
            ("resolution", self.resolution),
            ("grid", self.grid),
            ("samples", self.samples),
            ("starts", self.starts),
        ] {
            if let Some(v) = value {
                if v < 1 {
                    bail!("field '{key}' must be at least 1");
                }
            }
        }
        Ok(())
    }

    pub fn apply_globals(&mut self, out: Option<PathBuf>, jobs: Option<usize>, seed: Option<u64>) {
        if let Some(out) = out {
            self.out = out;
        }
        if jobs.is_some() {
            self.jobs = jobs;
        }
        if seed.is_some() {
            self.seed = seed;
        }
    }

    pub fn merge_scenario(&mut self, args: &ScenarioArgs) -> Result<()> {
        if let Some(name) = &args.scenario {
            self.scenario = Some(name.clone());
        }
        for spec in &args.params {
            let (key, value) = spec
                .split_once('=')
                .ok_or_else(|| anyhow!("--param expects KEY=VALUE, got '{spec}'"))?;
            let v: f64 = value
                .trim()
                .parse()
                .map_err(|_| anyhow!("--param {key}: invalid number '{value}'"))?;
            // Flag overrides a config-file value for the same key.
            self.params.retain(|(k, _)| k != key.trim());
            self.params.push((key.trim().to_string(), v));
        }
        Ok(())
    }

    pub fn merge_opt_str(&mut self, key: &str, value: Option<String>) {
        if value.is_none() {
            return;
        }
        match key {
            "seed_point" => self.seed_point = value,
            "eps_family" => self.eps_family = value,
            "amp_family" => self.amp_family = value,
            _ => {}
        }
    }

    pub fn merge_opt_usize(&mut self, key: &str, value: Option<usize>) {
        if value.is_none() {
            return;
        }
        match key {
            "sweep" => self.sweep = value,
            "max_iters" => self.max_iters = value,
            "starts" => self.starts = value,
            "resolution" => self.resolution = value,
            "budget" => self.budget = value,
            "samples" => self.samples = value,
            "grid" => self.grid = value,
            _ => {}
        }
    }

    pub fn merge_opt_f64(&mut self, key: &str, value: Option<f64>) {
        if value.is_none() {
            return;
        }
        match key {
            "grad_tol" => self.grad_tol = value,
            "neighborhood_radius" => self.neighborhood_radius = value,
            _ => {}
        }
    }

    pub fn scenario_name(&self) -> Result<&str> {
        self.scenario
            .as_deref()
            .ok_or_else(|| anyhow!("no scenario given (use --scenario or the config file)"))
    }

    /// Parse a comma-separated float list such as an amplitude family.
    pub fn parse_family(spec: &str, field: &str) -> Result<Vec<f64>> {
        let values: Result<Vec<f64>> = spec
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| anyhow!("field '{field}': invalid number '{s}'"))
            })
            .collect();
        let values = values?;
        if values.is_empty() {
            bail!("field '{field}' must list at least one value");
        }
        Ok(values)
    }
}

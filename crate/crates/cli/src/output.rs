//! Output plumbing: header blocks, full-precision float formatting
//! (17 significant digits, so oracle comparisons are exact), file writers.
//! No timestamps anywhere; identical config + seed gives byte-identical
//! files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use crate::config::Settings;

/// 17 significant digits.
pub fn full(v: f64) -> String {
    format!("{v:.16e}")
}

pub struct Header {
    lines: Vec<String>,
}

impl Header {
    pub fn new(command: &str, settings: &Settings, scenario: &shellmap::catalog::Scenario) -> Self {
        let mut lines = vec![
            format!("command: {command}"),
            format!("scenario: {}", scenario.name),
        ];
        let params = scenario
            .resolved_params
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(" ");
        lines.push(format!("params: {params}"));
        lines.push(format!("seed: {}", settings.seed.unwrap_or(0)));
        lines.push(format!("notes: {}", scenario.provenance_notes));
        Header { lines }
    }

    pub fn push(&mut self, line: impl Into<String>) {
        self.lines.push(line.into());
    }

    pub fn render(&self, comment_prefix: &str) -> String {
        let mut out = String::new();
        for line in &self.lines {
            let _ = writeln!(out, "{comment_prefix} {line}");
        }
        out
    }
}

pub fn ensure_out_dir(settings: &Settings) -> Result<PathBuf> {
    std::fs::create_dir_all(&settings.out)
        .with_context(|| format!("cannot create output directory {}", settings.out.display()))?;
    Ok(settings.out.clone())
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents)
        .with_context(|| format!("cannot write {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

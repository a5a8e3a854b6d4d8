//! Artifact bookkeeping and the JSON run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// A property that may legitimately fail for some inputs; compared
    /// against `--expect`.
    Expectation,
    /// A property that must hold for every valid input.
    Invariant,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub kind: CheckKind,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Expect {
    /// Every expectation check holds.
    #[default]
    Pass,
    /// At least one expectation check fails (known-failing fixtures).
    Fail,
}

#[derive(Clone, Debug, Serialize)]
pub struct Artifact {
    pub file: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
struct Versions {
    wlp: &'static str,
    weighted_lp: &'static str,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    command: &'a str,
    inputs: &'a BTreeMap<String, String>,
    versions: Versions,
    seed: u64,
    expect: Expect,
    checks: &'a [Check],
    #[serde(rename = "checks-passed")]
    checks_passed: bool,
    artifacts: &'a [Artifact],
}

/// Collects the outputs of one subcommand run.
pub struct Run {
    command: String,
    out_dir: PathBuf,
    inputs: BTreeMap<String, String>,
    seed: u64,
    expect: Expect,
    checks: Vec<Check>,
    artifacts: Vec<Artifact>,
}

impl Run {
    pub fn new(command: &str, out_dir: &Path, seed: u64, expect: Expect) -> Result<Self, CliError> {
        fs::create_dir_all(out_dir)?;
        Ok(Run {
            command: command.to_string(),
            out_dir: out_dir.to_path_buf(),
            inputs: BTreeMap::new(),
            seed,
            expect,
            checks: Vec::new(),
            artifacts: Vec::new(),
        })
    }

    pub fn input(&mut self, key: &str, value: impl ToString) {
        self.inputs.insert(key.to_string(), value.to_string());
    }

    pub fn check(&mut self, name: &str, kind: CheckKind, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.to_string(), kind, passed, detail: detail.into() });
    }

    /// Renders an artifact in memory, writes it and records its checksum.
    pub fn write<F>(&mut self, file: &str, render: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut Vec<u8>) -> Result<(), CliError>,
    {
        let mut buf = Vec::new();
        render(&mut buf)?;
        fs::write(self.out_dir.join(file), &buf)?;
        self.artifacts.push(Artifact { file: file.to_string(), bytes: buf.len(), sha256: sha256_hex(&buf) });
        Ok(())
    }

    pub fn checks(&self) -> &[Check] {
        &self.checks
    }

    /// Whether the run met its expectation: invariants must always hold, and
    /// expectation checks must all pass (`--expect pass`) or not all pass
    /// (`--expect fail`).
    pub fn succeeded(&self) -> bool {
        let invariants = self.checks.iter().filter(|c| c.kind == CheckKind::Invariant).all(|c| c.passed);
        let expectations = self.checks.iter().filter(|c| c.kind == CheckKind::Expectation).all(|c| c.passed);
        invariants
            && match self.expect {
                Expect::Pass => expectations,
                Expect::Fail => !expectations,
            }
    }

    /// Writes `manifest.json` and returns its path.
    pub fn finish(&self) -> Result<PathBuf, CliError> {
        let all_passed = self.checks.iter().all(|c| c.passed);
        let manifest = Manifest {
            command: &self.command,
            inputs: &self.inputs,
            versions: Versions { wlp: env!("CARGO_PKG_VERSION"), weighted_lp: weighted_lp::VERSION },
            seed: self.seed,
            expect: self.expect,
            checks: &self.checks,
            checks_passed: all_passed,
            artifacts: &self.artifacts,
        };
        let mut text = serde_json::to_vec_pretty(&manifest).map_err(|e| CliError::Config(e.to_string()))?;
        text.push(b'\n');
        let path = self.out_dir.join("manifest.json");
        fs::write(&path, text)?;
        Ok(path)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

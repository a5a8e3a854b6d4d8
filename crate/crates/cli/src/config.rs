//! Key-value config files that mirror the command-line flags.
//!
//! ```text
//! # comments and blank lines are ignored
//! command = laplace
//! Q = 1
//! gamma = 0.5
//! x = 500
//! ```
//!
//! Each `key = value` line becomes `--key value`; `key = true` becomes a bare
//! `--key` and `key = false` is dropped. Underscores in keys are read as
//! hyphens. Flags given on the command line win over the file.

use std::path::Path;

use crate::error::CliError;

pub const OUT_DIR_ENV: &str = "WLP_OUT_DIR";

#[derive(Debug, Default, PartialEq)]
pub struct ConfigFile {
    pub command: Option<String>,
    pub entries: Vec<(String, String)>,
}

pub fn parse_config(text: &str) -> Result<ConfigFile, CliError> {
    let mut cfg = ConfigFile::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| CliError::Config(format!("config line {}: expected key = value", i + 1)))?;
        let key = k.trim().trim_start_matches("--").replace('_', "-");
        let value = v.trim().trim_matches('"').to_string();
        if key.is_empty() {
            return Err(CliError::Config(format!("config line {}: empty key", i + 1)));
        }
        if key == "command" {
            cfg.command = Some(value);
        } else if key == "config" {
            return Err(CliError::Config(format!("config line {}: config files cannot include other config files", i + 1)));
        } else {
            cfg.entries.push((key, value));
        }
    }
    Ok(cfg)
}

fn flags_of(cfg: &ConfigFile) -> Vec<String> {
    let skip_out_dir = std::env::var_os(OUT_DIR_ENV).is_some();
    let mut out = Vec::new();
    for (k, v) in &cfg.entries {
        if skip_out_dir && k == "out-dir" {
            continue;
        }
        match v.as_str() {
            "true" => out.push(format!("--{k}")),
            "false" => {}
            _ => {
                out.push(format!("--{k}"));
                out.push(v.clone());
            }
        }
    }
    out
}

/// Splices `--config FILE` into the argument list: the file's flags are
/// inserted right after the subcommand so that explicit flags override them.
pub fn expand_args(args: Vec<String>) -> Result<Vec<String>, CliError> {
    let mut rest = Vec::with_capacity(args.len());
    let mut path: Option<String> = None;
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            path = Some(it.next().ok_or_else(|| CliError::Config("--config needs a file".into()))?);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else { return Ok(rest) };
    let text = std::fs::read_to_string(Path::new(&path)).map_err(|e| CliError::Config(format!("cannot read config file {path}: {e}")))?;
    let cfg = parse_config(&text)?;

    let has_command = rest.get(1).is_some_and(|a| !a.starts_with('-'));
    let at = if has_command {
        if let Some(c) = &cfg.command {
            if c != &rest[1] {
                return Err(CliError::Config(format!("config file is for '{c}' but the command line asks for '{}'", rest[1])));
            }
        }
        2
    } else {
        let c = cfg.command.clone().ok_or_else(|| CliError::Config("no subcommand given and the config file has no 'command' entry".into()))?;
        rest.insert(1.min(rest.len()), c);
        2
    };
    let tail = rest.split_off(at.min(rest.len()));
    rest.extend(flags_of(&cfg));
    rest.extend(tail);
    Ok(rest)
}

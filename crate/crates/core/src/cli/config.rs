//! `key = value` configuration files merged into the argument list.
//!
//! Keys are long flag names without the leading dashes. Blank lines and
//! lines starting with `#` are ignored. A key that already appears on the
//! command line is skipped, so flags always win. `true` / `false` values
//! toggle switches.

use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}:{line}: expected `key = value`")]
    Syntax { path: String, line: usize },
    #[error("cannot read config {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

pub fn parse_config(text: &str, path: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or(ConfigError::Syntax { path: path.to_string(), line: i + 1 })?;
        let key = key.trim().trim_start_matches("--");
        if key.is_empty() {
            return Err(ConfigError::Syntax { path: path.to_string(), line: i + 1 });
        }
        pairs.push((key.to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

fn flag_present(argv: &[String], key: &str) -> bool {
    let long = format!("--{key}");
    let with_value = format!("--{key}=");
    argv.iter().any(|a| *a == long || a.starts_with(&with_value))
}

/// Finds `--config <path>` / `--config=<path>` in `argv`.
pub fn config_path(argv: &[String]) -> Option<String> {
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

/// Appends config entries that the command line does not already set.
pub fn merge_config(mut argv: Vec<String>, pairs: &[(String, String)]) -> Vec<String> {
    let given: Vec<String> = argv.clone();
    for (key, value) in pairs {
        if key == "config" || flag_present(&given, key) {
            continue;
        }
        match value.as_str() {
            "true" => argv.push(format!("--{key}")),
            "false" => {}
            _ => {
                argv.push(format!("--{key}"));
                argv.push(value.clone());
            }
        }
    }
    argv
}

pub fn load_and_merge(argv: Vec<String>) -> Result<Vec<String>, ConfigError> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(Path::new(&path)).map_err(|source| ConfigError::Io { path: path.clone(), source })?;
    let pairs = parse_config(&text, &path)?;
    Ok(merge_config(argv, &pairs))
}

//! `key = value` config files. Keys are long flag names of the chosen
//! subcommand (`-` or `_` both accepted); `inputs` and `manifest` supply the
//! positional arguments when none are given on the command line.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::CommandFactory;
use thiserror::Error;

use super::{Cli, Command};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: expected `key = value`")]
    Syntax { path: String, line: usize },
    #[error("config key `{key}` is not an option of `{command}`")]
    UnknownKey { key: String, command: String },
    #[error("config names command `{config}` but `{given}` was run")]
    CommandMismatch { config: String, given: String },
    #[error("config key `{key}`: expected true or false, got `{value}`")]
    NotBool { key: String, value: String },
    #[error("no subcommand on the command line")]
    NoCommand,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigEntry {
    pub key: String,
    pub value: String,
}

/// Reads `key = value` lines; blank lines and `#` comments are skipped.
pub fn load_config_file(path: &Path) -> Result<Vec<ConfigEntry>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text, &path.display().to_string())
}

pub fn parse_config(text: &str, origin: &str) -> Result<Vec<ConfigEntry>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(ConfigError::Syntax {
                path: origin.to_string(),
                line: i + 1,
            });
        };
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            return Err(ConfigError::Syntax {
                path: origin.to_string(),
                line: i + 1,
            });
        }
        out.push(ConfigEntry {
            key,
            value: v.trim().to_string(),
        });
    }
    Ok(out)
}

const POSITIONAL_KEYS: [&str; 3] = ["input", "inputs", "manifest"];

/// Rebuilds `argv` with config-derived flags placed right after the
/// subcommand, so that flags given on the command line override them.
pub fn merge_argv(argv: &[OsString], entries: &[ConfigEntry]) -> Result<Vec<OsString>, ConfigError> {
    let root = Cli::command();
    let pos = argv
        .iter()
        .enumerate()
        .skip(1)
        .find(|(_, a)| a.to_str().is_some_and(|s| root.find_subcommand(s).is_some()))
        .map(|(i, _)| i)
        .ok_or(ConfigError::NoCommand)?;
    let name = argv[pos].to_string_lossy().to_string();
    let sub = root.find_subcommand(&name).expect("checked above");

    let mut injected = Vec::new();
    for e in entries {
        if e.key == "command" {
            if e.value != name {
                return Err(ConfigError::CommandMismatch {
                    config: e.value.clone(),
                    given: name,
                });
            }
            continue;
        }
        if POSITIONAL_KEYS.contains(&e.key.as_str()) || e.key == "config" || e.key == "print-config" {
            continue;
        }
        let arg = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(e.key.as_str()))
            .ok_or_else(|| ConfigError::UnknownKey {
                key: e.key.clone(),
                command: name.clone(),
            })?;
        if arg.get_action().takes_values() {
            injected.push(OsString::from(format!("--{}={}", e.key, e.value)));
        } else {
            match e.value.as_str() {
                "true" => injected.push(OsString::from(format!("--{}", e.key))),
                "false" => {}
                _ => {
                    return Err(ConfigError::NotBool {
                        key: e.key.clone(),
                        value: e.value.clone(),
                    })
                }
            }
        }
    }
    let mut out = argv[..=pos].to_vec();
    out.extend(injected);
    out.extend_from_slice(&argv[pos + 1..]);
    Ok(out)
}

/// Fills positional inputs from the config when the command line has none.
pub fn fill_inputs(cmd: &mut Command, entries: &[ConfigEntry]) {
    let paths = |keys: &[&str]| -> Vec<PathBuf> {
        entries
            .iter()
            .filter(|e| keys.contains(&e.key.as_str()))
            .flat_map(|e| e.value.split_whitespace().map(PathBuf::from).collect::<Vec<_>>())
            .collect()
    };
    let inputs = match cmd {
        Command::Validate(a) => &mut a.inputs,
        Command::Ingest(a) => &mut a.inputs,
        Command::Manifest(a) => &mut a.inputs,
        Command::SslGen(a) => &mut a.inputs,
        Command::Stats(a) => {
            if a.manifest.is_none() {
                a.manifest = paths(&["manifest"]).into_iter().next();
            }
            return;
        }
        Command::Stream(a) => {
            if a.manifest.is_none() {
                a.manifest = paths(&["manifest"]).into_iter().next();
            }
            return;
        }
        Command::Eval(_) => return,
    };
    if inputs.is_empty() {
        *inputs = paths(&["input", "inputs"]);
    }
}

//! Declarative config files: one `key = value` per line, `#` comments.
//! Keys are the long flag names (without `--`). The file's entries are
//! spliced into the argument list ahead of the user's explicit flags, so
//! the command line always wins. Boolean flags are set with `key = true`.

use std::path::Path;

use crate::CliError;

pub fn load(path: &Path) -> Result<Vec<String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::Validation(format!("cannot read config file {}: {e}", path.display()))
    })?;
    parse(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn parse(text: &str) -> Result<Vec<String>, String> {
    let mut args = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected 'key = value'", idx + 1))?;
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() || value.is_empty() {
            return Err(format!("line {}: empty key or value", idx + 1));
        }
        match value {
            "true" => args.push(format!("--{key}")),
            "false" => {}
            _ => {
                args.push(format!("--{key}"));
                args.push(value.to_string());
            }
        }
    }
    Ok(args)
}

/// Extract `--config <path>` (or `--config=<path>`) from a raw argument
/// list, returning the remaining arguments and the config path if present.
pub fn split_config_flag(args: &[String]) -> (Vec<String>, Option<String>) {
    let mut rest = Vec::with_capacity(args.len());
    let mut config = None;
    let mut it = args.iter().peekable();
    while let Some(a) = it.next() {
        if a == "--config" {
            if let Some(v) = it.next() {
                config = Some(v.clone());
            }
        } else if let Some(v) = a.strip_prefix("--config=") {
            config = Some(v.to_string());
        } else {
            rest.push(a.clone());
        }
    }
    (rest, config)
}

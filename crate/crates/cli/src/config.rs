//! `key=value` configuration files, spliced into the argument list ahead of
//! the user's flags so the flags win.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

use clap::CommandFactory;

use crate::args::Cli;
use crate::CliError;

/// Entries of a config file in file order. `#` starts a comment line.
pub fn parse(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key=value, got {line:?}", i + 1))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(format!("line {}: empty key", i + 1));
        }
        out.push((key.to_string(), value.trim().to_string()));
    }
    Ok(out)
}

fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(p.into());
        }
    }
    None
}

/// Inserts `--key value` for every config entry right after the subcommand.
pub fn splice(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let Some(sub_pos) = args.iter().skip(1).position(|a| !a.to_string_lossy().starts_with('-')) else {
        return Ok(args);
    };
    let sub_pos = sub_pos + 1;
    let sub_name = args[sub_pos].to_string_lossy().into_owned();
    let cmd = Cli::command();
    let Some(sub) = cmd.find_subcommand(&sub_name) else {
        return Ok(args);
    };
    let allowed: Vec<String> = sub
        .get_arguments()
        .filter_map(|a| a.get_long().map(str::to_string))
        .filter(|l| l != "config" && l != "help")
        .collect();

    let path = Path::new(&path);
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
    let entries = parse(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
    let mut injected = Vec::new();
    for (key, value) in entries {
        if !allowed.contains(&key) {
            return Err(CliError::Usage(format!(
                "config {}: unknown key {key:?} for {sub_name} (allowed: {})",
                path.display(),
                allowed.join(", ")
            )));
        }
        injected.push(OsString::from(format!("--{key}={value}")));
    }
    let mut out = args[..=sub_pos].to_vec();
    out.extend(injected);
    out.extend_from_slice(&args[sub_pos + 1..]);
    Ok(out)
}

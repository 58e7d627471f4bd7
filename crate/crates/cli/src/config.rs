//! `key = value` defaults files.
//!
//! Entries become flags inserted right after the subcommand name, so flags
//! given on the command line (which come later) override them.

use std::path::Path;

use clap::{ArgAction, CommandFactory};

use crate::{Cli, CliError};

const GLOBAL_VALUE_FLAGS: [&str; 4] = ["--threads", "--output", "-o", "--config"];

fn config_path(argv: &[String]) -> Option<String> {
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        if a == "--" {
            break;
        }
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(v) = a.strip_prefix("--config=") {
            return Some(v.to_string());
        }
    }
    None
}

/// Index of the subcommand token in `argv`.
fn subcommand_index(argv: &[String], names: &[String]) -> Option<usize> {
    let mut i = 1;
    while i < argv.len() {
        let a = &argv[i];
        if GLOBAL_VALUE_FLAGS.contains(&a.as_str()) {
            i += 2;
            continue;
        }
        if names.iter().any(|n| n == a) {
            return Some(i);
        }
        i += 1;
    }
    None
}

pub(crate) fn merge(argv: Vec<String>) -> Result<Vec<String>, CliError> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let command = Cli::command();
    let names: Vec<String> = command.get_subcommands().map(|c| c.get_name().to_string()).collect();
    let Some(at) = subcommand_index(&argv, &names) else {
        return Ok(argv);
    };
    let sub = command.find_subcommand(&argv[at]).expect("index points at a known subcommand");
    let text = std::fs::read_to_string(Path::new(&path))
        .map_err(|e| CliError::Usage(format!("--config {path}: {e}")))?;

    let mut extra = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let at_line = || format!("--config {path}:{}", n + 1);
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("{}: expected `key = value`", at_line())))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key == "config" {
            return Err(CliError::Usage(format!("{}: config files cannot nest", at_line())));
        }
        let arg = sub
            .get_arguments()
            .chain(command.get_arguments())
            .find(|a| a.get_long() == Some(key.as_str()) && a.get_id() != "help" && a.get_id() != "version")
            .ok_or_else(|| CliError::Usage(format!("{}: unknown key `{key}` for `{}`", at_line(), sub.get_name())))?;
        match arg.get_action() {
            ArgAction::SetTrue => match value {
                "true" => extra.push(format!("--{key}")),
                "false" => {}
                _ => return Err(CliError::Usage(format!("{}: `{key}` takes true or false", at_line()))),
            },
            _ => {
                extra.push(format!("--{key}"));
                extra.push(value.to_string());
            }
        }
    }
    let mut merged = argv[..=at].to_vec();
    merged.extend(extra);
    merged.extend_from_slice(&argv[at + 1..]);
    Ok(merged)
}

//! `key=value` config files. Keys are long flag names with or without the
//! leading dashes; `_` and `-` are interchangeable. Boolean flags take
//! `true`/`false`. Blank lines and `#` comments are ignored.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

use clap::parser::ValueSource;
use clap::ArgMatches;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub key: String,
    pub value: String,
}

pub fn parse(text: &str, origin: &Path) -> Result<Vec<Entry>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Parse {
                path: origin.to_path_buf(),
                row: i + 1,
                column: 0,
                message: format!("expected key=value, got {line:?}"),
            });
        };
        let key = key.trim().trim_start_matches('-').replace('_', "-");
        if key.is_empty() {
            return Err(Error::Parse {
                path: origin.to_path_buf(),
                row: i + 1,
                column: 0,
                message: "empty key".into(),
            });
        }
        out.push(Entry {
            key,
            value: value.trim().to_string(),
        });
    }
    Ok(out)
}

pub fn read(path: &Path) -> Result<Vec<Entry>> {
    let text = fs::read_to_string(path).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile {
                path: path.to_path_buf(),
            }
        } else {
            Error::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    })?;
    parse(&text, path)
}

fn given_on_command_line(matches: &ArgMatches, id: &str) -> bool {
    let here = matches.ids().any(|i| i.as_str() == id)
        && matches.value_source(id) == Some(ValueSource::CommandLine);
    here || matches
        .subcommand()
        .is_some_and(|(_, sub)| given_on_command_line(sub, id))
}

/// Flags for the config entries the user did not already pass; appended
/// after the user's arguments, so explicit flags keep precedence.
pub fn missing_flags(matches: &ArgMatches, entries: &[Entry]) -> Vec<OsString> {
    let mut out = Vec::new();
    for e in entries {
        if e.key == "config" || given_on_command_line(matches, &e.key.replace('-', "_")) {
            continue;
        }
        match e.value.as_str() {
            "true" => out.push(format!("--{}", e.key).into()),
            "false" => {}
            v => {
                out.push(format!("--{}", e.key).into());
                out.push(v.into());
            }
        }
    }
    out
}

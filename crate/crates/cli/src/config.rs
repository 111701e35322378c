//! `--config` files: `key = value` lines mirroring the command-line flags.
//!
//! Keys outside any section apply to every subcommand that has the flag;
//! keys under `[name]` apply to subcommand `name` only. Values are spliced
//! into the argument list ahead of the user's own flags, so flags given on
//! the command line win.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Command, CommandFactory};
use serde::Serialize;

use crate::Cli;

#[derive(Clone, Debug, Default, Serialize)]
pub struct ConfigSnapshot {
    pub path: Option<PathBuf>,
    /// Entries that were applied to this run, as `flag -> value`.
    pub applied: BTreeMap<String, String>,
}

#[derive(Debug, PartialEq)]
struct Entry {
    section: Option<String>,
    key: String,
    value: String,
    line: usize,
}

fn parse(text: &str) -> Result<Vec<Entry>> {
    let mut section = None;
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            section = Some(name.trim().to_string());
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("config line {}: expected `key = value`, found {raw:?}", k + 1);
        };
        let value = value.trim();
        let value = value.strip_prefix('"').and_then(|v| v.strip_suffix('"')).unwrap_or(value);
        out.push(Entry {
            section: section.clone(),
            key: key.trim().replace('_', "-"),
            value: value.to_string(),
            line: k + 1,
        });
    }
    Ok(out)
}

/// Long flag `name` of `cmd` and whether it takes a value.
fn flag(cmd: &Command, name: &str) -> Option<bool> {
    cmd.get_arguments().find(|a| a.get_long() == Some(name)).map(|a| a.get_action().takes_values())
}

fn find_config_arg(args: &[OsString]) -> Result<Option<PathBuf>> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--" {
            break;
        }
        if s == "--config" {
            let v = it.next().context("--config needs a file path")?;
            return Ok(Some(PathBuf::from(v)));
        }
        if let Some(v) = s.strip_prefix("--config=") {
            return Ok(Some(PathBuf::from(v)));
        }
    }
    Ok(None)
}

/// Returns the argument list with config values inserted right after the
/// subcommand name, plus a record of what was applied.
pub fn expand(args: Vec<OsString>) -> Result<(Vec<OsString>, ConfigSnapshot)> {
    let Some(path) = find_config_arg(&args)? else {
        return Ok((args, ConfigSnapshot::default()));
    };
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading config {}", path.display()))?;
    let entries = parse(&text).with_context(|| format!("in config {}", path.display()))?;
    splice(args, &entries, &path)
}

fn splice(args: Vec<OsString>, entries: &[Entry], path: &Path) -> Result<(Vec<OsString>, ConfigSnapshot)> {
    let root = Cli::command();
    let sub_pos = args.iter().position(|a| root.find_subcommand(a.to_string_lossy().as_ref()).is_some());
    let sub = sub_pos.map(|p| root.find_subcommand(args[p].to_string_lossy().as_ref()).unwrap());

    for e in entries {
        if let Some(s) = &e.section {
            let Some(cmd) = root.find_subcommand(s) else {
                bail!("config line {}: unknown section [{s}]", e.line);
            };
            if flag(cmd, &e.key).is_none() {
                bail!("config line {}: `{s}` has no flag --{}", e.line, e.key);
            }
        } else if e.key == "config" {
            bail!("config line {}: config files cannot include other config files", e.line);
        } else if flag(&root, &e.key).is_none() && !root.get_subcommands().any(|c| flag(c, &e.key).is_some()) {
            bail!("config line {}: no command has a flag --{}", e.line, e.key);
        }
    }

    let (Some(pos), Some(sub)) = (sub_pos, sub) else {
        return Ok((args, ConfigSnapshot { path: Some(path.to_path_buf()), applied: BTreeMap::new() }));
    };
    let mut applied = BTreeMap::new();
    let mut inserted: Vec<OsString> = Vec::new();
    // Unsectioned entries first, so a section can refine them.
    let ordered = entries
        .iter()
        .filter(|e| e.section.is_none())
        .chain(entries.iter().filter(|e| e.section.as_deref() == Some(sub.get_name())));
    for e in ordered {
        let takes_value = if let Some(v) = flag(sub, &e.key) {
            v
        } else if let Some(v) = flag(&root, &e.key) {
            v
        } else {
            continue;
        };
        if takes_value {
            inserted.push(format!("--{}", e.key).into());
            inserted.push(e.value.clone().into());
        } else {
            match e.value.as_str() {
                "true" => inserted.push(format!("--{}", e.key).into()),
                "false" => {}
                other => {
                    bail!("config line {}: --{} is a switch, expected true or false, got {other:?}", e.line, e.key)
                }
            }
        }
        applied.insert(e.key.clone(), e.value.clone());
    }
    let mut out = args[..=pos].to_vec();
    out.extend(inserted);
    out.extend_from_slice(&args[pos + 1..]);
    Ok((out, ConfigSnapshot { path: Some(path.to_path_buf()), applied }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn parses_sections_comments_and_quotes() {
        let e = parse("gamma = 0.2 # loose\n\n[sample]\nnoise_gauss=\"0.01\"\n").unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!(e[0].key, "gamma");
        assert_eq!(e[0].value, "0.2");
        assert_eq!(e[1].section.as_deref(), Some("sample"));
        assert_eq!(e[1].key, "noise-gauss");
        assert_eq!(e[1].value, "0.01");
        assert!(parse("just words").is_err());
    }

    #[test]
    fn values_go_before_user_flags() {
        let entries = parse("seed = 5\ngamma = 0.2\n[schweinhart]\nreplicates = 2\n").unwrap();
        let args = os(&["dimscope", "--config", "c.conf", "schweinhart", "in.csv", "--out", "r.json", "--seed", "9"]);
        let (out, snap) = splice(args, &entries, Path::new("c.conf")).unwrap();
        let s: Vec<String> = out.iter().map(|a| a.to_string_lossy().into_owned()).collect();
        assert_eq!(&s[3..10], &["schweinhart", "--seed", "5", "--gamma", "0.2", "--replicates", "2"]);
        assert_eq!(s.last().unwrap(), "9");
        assert_eq!(snap.applied.len(), 3);
    }

    #[test]
    fn keys_for_other_commands_are_skipped_but_typos_fail() {
        let entries = parse("n-cal = 300\n").unwrap();
        let (out, snap) = splice(os(&["dimscope", "sample"]), &entries, Path::new("c")).unwrap();
        assert_eq!(out.len(), 2);
        assert!(snap.applied.is_empty());
        assert!(splice(os(&["dimscope", "sample"]), &parse("gama = 1\n").unwrap(), Path::new("c")).is_err());
        assert!(splice(os(&["dimscope", "sample"]), &parse("[sample]\ngamma = 1\n").unwrap(), Path::new("c")).is_err());
    }
}

//! `--config` files: `key = value` lines standing in for `--key value`.
//! Entries are spliced in right after the subcommand, so flags given on the
//! command line come later and win.

use std::ffi::OsString;
use std::fs;

use anyhow::{bail, Context, Result};

use crate::cli::SUBCOMMANDS;

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

pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("config line {}: expected key=value, got `{line}`", i + 1);
        };
        let k = k.trim().trim_start_matches("--").replace('_', "-");
        if k == "config" {
            bail!("config line {}: nested config files are not supported", i + 1);
        }
        out.push((k, v.trim().to_string()));
    }
    Ok(out)
}

/// Returns `args` with the config file's entries inserted.
pub fn expand(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path).with_context(|| format!("reading config {}", path.to_string_lossy()))?;
    let entries = parse_config(&text)?;
    let at = args
        .iter()
        .position(|a| SUBCOMMANDS.contains(&a.to_string_lossy().as_ref()))
        .map_or(args.len(), |i| i + 1);
    let mut out = args[..at].to_vec();
    for (k, v) in entries {
        out.push(format!("--{k}").into());
        out.push(v.into());
    }
    out.extend_from_slice(&args[at..]);
    Ok(out)
}

/// The command line recorded in output metadata. Flags that cannot change
/// the numbers (`--threads`, `--out`, `--config`) are dropped so the header
/// is identical across such variations.
pub fn recorded_command(args: &[OsString]) -> String {
    const DROP: [&str; 3] = ["--threads", "--out", "--config"];
    let mut kept = Vec::new();
    let mut it = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned());
    while let Some(a) = it.next() {
        if DROP.contains(&a.as_str()) {
            it.next();
            continue;
        }
        if DROP.iter().any(|d| a.starts_with(&format!("{d}="))) {
            continue;
        }
        kept.push(a);
    }
    kept.join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn parses_pairs_and_skips_comments() {
        let c = parse_config("# x\nseed = 4\n\nn_list=5:10:5\n").unwrap();
        assert_eq!(c, vec![("seed".into(), "4".into()), ("n-list".into(), "5:10:5".into())]);
        assert!(parse_config("seed 4").is_err());
    }

    #[test]
    fn recorded_command_drops_volatile_flags() {
        let a = os(&["jps", "--threads", "4", "verify", "--out=x.csv", "--seed", "2"]);
        assert_eq!(recorded_command(&a), "verify --seed 2");
    }
}

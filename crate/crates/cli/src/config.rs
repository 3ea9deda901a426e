//! Config files and the resolved configuration echoed in manifests.
//!
//! A config file is a flat table of long-flag names to values. Its entries
//! are appended to the command line, where later occurrences win, so the
//! file overrides flags and flags override defaults. An optional `command`
//! entry (e.g. `"lcs figure1"`) supplies the subcommand when none is given,
//! which lets a saved manifest be replayed with `--config` alone.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

use clap::{ArgAction, ArgMatches, Command};
use serde_json::{Map, Value};

/// Flags that locate inputs and outputs rather than define the experiment.
const NOT_ECHOED: [&str; 4] = ["config", "out", "help", "version"];

const TOP_LEVEL: [&str; 7] = [
    "decompose",
    "verify",
    "estimate",
    "lcs",
    "gaussian",
    "hoeffding",
    "hyper",
];

/// The value following `--config`, if any.
fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(rest) = s.strip_prefix("--config=") {
            return Some(rest.into());
        }
    }
    None
}

/// Parses a TOML or JSON config into a flat object. A JSON document with a
/// `manifest` member is read as a previous run's manifest.
pub fn load(path: &Path) -> Result<Map<String, Value>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let value: Value = if text.trim_start().starts_with('{') {
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?
    } else {
        let t: toml::Table =
            toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::to_value(t).map_err(|e| e.to_string())?
    };
    let Value::Object(mut obj) = value else {
        return Err(format!("{}: expected a table of flags", path.display()));
    };
    if let Some(Value::Object(m)) = obj.remove("manifest") {
        let mut flat = match m.get("config") {
            Some(Value::Object(c)) => c.clone(),
            _ => return Err(format!("{}: manifest has no config", path.display())),
        };
        if let Some(cmd) = m.get("subcommand") {
            flat.insert("command".into(), cmd.clone());
        }
        return Ok(flat);
    }
    Ok(obj)
}

fn scalar(key: &str, v: &Value) -> Result<String, String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        _ => Err(format!("config key `{key}`: unsupported value {v}")),
    }
}

/// Command-line tokens equivalent to the config entries.
pub fn to_args(cfg: &Map<String, Value>) -> Result<(Vec<String>, Vec<String>), String> {
    let mut command = Vec::new();
    let mut flags = Vec::new();
    for (key, v) in cfg {
        if key == "command" {
            command = match v {
                Value::String(s) => s.split_whitespace().map(String::from).collect(),
                Value::Array(a) => a.iter().map(|x| scalar(key, x)).collect::<Result<_, _>>()?,
                _ => return Err(format!("config key `command`: unsupported value {v}")),
            };
            continue;
        }
        let flag = format!("--{}", key.replace('_', "-"));
        match v {
            Value::Bool(true) => flags.push(flag),
            Value::Bool(false) | Value::Null => {}
            Value::Array(a) => {
                let parts = a
                    .iter()
                    .map(|x| scalar(key, x))
                    .collect::<Result<Vec<_>, _>>()?;
                flags.push(format!("{flag}={}", parts.join(",")));
            }
            _ => flags.push(format!("{flag}={}", scalar(key, v)?)),
        }
    }
    Ok((command, flags))
}

/// Splices the config file named by `--config` into `args`.
pub fn expand(args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let cfg = load(Path::new(&path))?;
    let (command, flags) = to_args(&cfg)?;
    let has_command = args
        .iter()
        .skip(1)
        .any(|a| TOP_LEVEL.contains(&a.to_string_lossy().as_ref()));
    let mut out = args;
    if !has_command {
        out.extend(command.into_iter().map(OsString::from));
    }
    out.extend(flags.into_iter().map(OsString::from));
    Ok(out)
}

/// Subcommand path and every argument with a value (given or defaulted),
/// keyed by long flag name, in the shape [`load`] accepts.
pub fn resolved(cmd: &Command, matches: &ArgMatches) -> (String, Map<String, Value>) {
    let mut path = Vec::new();
    let mut cfg = Map::new();
    let mut level = (cmd, matches);
    // globals are propagated to the leaf, so read them there
    let mut leaf = matches;
    while let Some((_, sub)) = leaf.subcommand() {
        leaf = sub;
    }
    collect(cmd, leaf, true, &mut cfg);
    loop {
        let (c, m) = level;
        let Some((name, sub_m)) = m.subcommand() else {
            break;
        };
        let sub_c = c.find_subcommand(name).expect("matched subcommand exists");
        path.push(name.to_string());
        collect(sub_c, sub_m, false, &mut cfg);
        level = (sub_c, sub_m);
    }
    (path.join(" "), cfg)
}

fn collect(cmd: &Command, m: &ArgMatches, globals: bool, out: &mut Map<String, Value>) {
    for arg in cmd.get_arguments() {
        if arg.is_global_set() != globals {
            continue;
        }
        let Some(long) = arg.get_long() else { continue };
        let id = arg.get_id().as_str();
        if NOT_ECHOED.contains(&long) || m.value_source(id).is_none() {
            continue;
        }
        let Some(raw) = m.get_raw(id) else { continue };
        let vals: Vec<String> = raw.map(|v| v.to_string_lossy().into_owned()).collect();
        let v = match arg.get_action() {
            ArgAction::SetTrue | ArgAction::SetFalse => {
                Value::Bool(vals.first().is_some_and(|v| v == "true"))
            }
            _ => Value::String(vals.join(",")),
        };
        out.insert(long.to_string(), v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_from_table() {
        let cfg: Map<String, Value> = serde_json::from_str(
            r#"{"command": "lcs figure1", "seed": 7, "max_n": 3, "paired": true,
                "quiet": false, "ns": [10, 20]}"#,
        )
        .unwrap();
        let (command, mut flags) = to_args(&cfg).unwrap();
        flags.sort();
        assert_eq!(command, ["lcs", "figure1"]);
        assert_eq!(flags, ["--max-n=3", "--ns=10,20", "--paired", "--seed=7"]);
    }

    #[test]
    fn finds_config_flag() {
        let args: Vec<OsString> = ["varjack", "hyper", "--config=a.toml"]
            .map(Into::into)
            .to_vec();
        assert_eq!(config_path(&args), Some("a.toml".into()));
        let args: Vec<OsString> = ["varjack", "--config", "b.json"].map(Into::into).to_vec();
        assert_eq!(config_path(&args), Some("b.json".into()));
    }
}

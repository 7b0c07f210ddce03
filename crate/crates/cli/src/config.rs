//! JSON config files: an object whose keys are long flag names (plus an
//! optional `"command"`). Values are strings, numbers, booleans (bare flags)
//! or arrays (comma-joined lists).

use std::ffi::OsString;
use std::path::Path;

use serde_json::{Map, Value};

use crate::usage;

const COMMANDS: &[&str] = &[
    "simulate",
    "score",
    "grid",
    "props",
    "gen-gadget",
    "verify-bounds",
    "learn-msg",
    "optimize",
    "converge",
    "find-counterexample",
    "report",
];

const NOT_SAVED: &[&str] = &["config", "save-config"];

fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(v) = a.strip_prefix("--config=") {
            return Some(v.to_string());
        }
    }
    None
}

fn flag_tokens(obj: &Map<String, Value>) -> anyhow::Result<Vec<String>> {
    let mut out = Vec::new();
    for (key, value) in obj {
        if key == "command" || NOT_SAVED.contains(&key.as_str()) {
            continue;
        }
        let flag = format!("--{}", key.replace('_', "-"));
        match value {
            Value::Bool(true) => out.push(flag),
            Value::Bool(false) | Value::Null => {}
            Value::String(s) => out.extend([flag, s.clone()]),
            Value::Number(n) => out.extend([flag, n.to_string()]),
            Value::Array(items) => {
                let parts = items
                    .iter()
                    .map(|v| match v {
                        Value::String(s) => Ok(s.clone()),
                        Value::Number(n) => Ok(n.to_string()),
                        _ => Err(usage(format!("config key {key:?}: list items must be strings or numbers"))),
                    })
                    .collect::<anyhow::Result<Vec<_>>>()?;
                out.extend([flag, parts.join(",")]);
            }
            Value::Object(_) => return Err(usage(format!("config key {key:?}: nested objects are not flags"))),
        }
    }
    Ok(out)
}

/// Produces the argument list clap sees: program, subcommand, config flags,
/// then the remaining command-line tokens so they take precedence.
pub fn merge(raw: Vec<OsString>) -> anyhow::Result<Vec<String>> {
    let args: Vec<String> = raw
        .into_iter()
        .map(|a| a.into_string().map_err(|a| usage(format!("argument is not valid UTF-8: {a:?}"))))
        .collect::<anyhow::Result<_>>()?;
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let bytes = std::fs::read(&path).map_err(|e| usage(format!("cannot read config {path}: {e}")))?;
    let value: Value = serde_json::from_slice(&bytes)?;
    let Value::Object(obj) = value else {
        return Err(usage(format!("config {path} must hold a JSON object")));
    };
    let tokens = flag_tokens(&obj)?;
    let mut rest: Vec<String> = args.iter().skip(1).cloned().collect();
    let sub = match rest.iter().position(|a| COMMANDS.contains(&a.as_str())) {
        Some(i) => rest.remove(i),
        None => match obj.get("command") {
            Some(Value::String(c)) => c.clone(),
            _ => return Err(usage("no subcommand given on the command line or in the config")),
        },
    };
    let program = args.first().cloned().unwrap_or_else(|| "annealing-lab".into());
    let mut merged = vec![program, sub];
    merged.extend(tokens);
    merged.extend(rest);
    Ok(merged)
}

/// Writes the flags in `args` as a config object. Later occurrences win.
pub fn save(path: &Path, args: &[String]) -> anyhow::Result<()> {
    let mut obj = Map::new();
    let mut i = 1;
    while i < args.len() {
        let a = &args[i];
        i += 1;
        if COMMANDS.contains(&a.as_str()) && !obj.contains_key("command") {
            obj.insert("command".into(), Value::String(a.clone()));
            continue;
        }
        let Some(name) = a.strip_prefix("--") else {
            continue;
        };
        let (name, inline) = match name.split_once('=') {
            Some((n, v)) => (n.to_string(), Some(v.to_string())),
            None => (name.to_string(), None),
        };
        let mut values: Vec<String> = inline.into_iter().collect();
        while values.is_empty() || name == "inputs" {
            match args.get(i) {
                Some(v) if !v.starts_with("--") && !COMMANDS.contains(&v.as_str()) => {
                    values.push(v.clone());
                    i += 1;
                }
                _ => break,
            }
        }
        if NOT_SAVED.contains(&name.as_str()) {
            continue;
        }
        let value = match values.len() {
            0 => Value::Bool(true),
            1 => Value::String(values.remove(0)),
            _ => Value::Array(values.into_iter().map(Value::String).collect()),
        };
        obj.insert(name, value);
    }
    let bytes = serde_json::to_vec_pretty(&Value::Object(obj))?;
    std::fs::write(path, [bytes, b"\n".to_vec()].concat())?;
    Ok(())
}

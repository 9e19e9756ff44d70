//! `key = value` config files.
//!
//! Blank lines and lines starting with `#` are ignored. `constraint` may be
//! repeated; every other key keeps its last value.

use std::path::PathBuf;

use ctfi::experiment::{lambda_grid, ExperimentConfig, SweepMode};

pub fn apply_file(config: &mut ExperimentConfig, text: &str) -> Result<(), String> {
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected `key = value`", n + 1))?;
        apply(config, key.trim(), unquote(value.trim()))
            .map_err(|e| format!("line {}: {e}", n + 1))?;
    }
    Ok(())
}

fn unquote(v: &str) -> &str {
    v.strip_prefix('"')
        .and_then(|v| v.strip_suffix('"'))
        .unwrap_or(v)
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, String> {
    v.parse()
        .map_err(|_| format!("`{key}`: cannot parse `{v}`"))
}

fn flag(key: &str, v: &str) -> Result<bool, String> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("`{key}`: expected true or false, got `{v}`")),
    }
}

/// Parses `a,b,c` as an explicit grid or `linspace(lo, hi, n)`.
pub fn parse_grid(v: &str) -> Result<Vec<f64>, String> {
    if let Some(inner) = v.strip_prefix("linspace(").and_then(|r| r.strip_suffix(')')) {
        let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(format!("linspace needs 3 arguments, got `{v}`"));
        }
        return Ok(lambda_grid(
            num("lambdas", parts[0])?,
            num("lambdas", parts[1])?,
            num("lambdas", parts[2])?,
        ));
    }
    v.split(',')
        .map(|p| num("lambdas", p.trim()))
        .collect()
}

pub fn parse_modes(v: &str) -> Result<Vec<SweepMode>, String> {
    match v {
        "protected" => Ok(vec![SweepMode::Protected]),
        "correlated" => Ok(vec![SweepMode::Correlated]),
        "both" => Ok(vec![SweepMode::Protected, SweepMode::Correlated]),
        _ => Err(format!("mode must be protected, correlated or both, got `{v}`")),
    }
}

fn apply(c: &mut ExperimentConfig, key: &str, v: &str) -> Result<(), String> {
    match key {
        "dataset" => c.dataset = v.parse()?,
        "data_dir" => c.data_dir = PathBuf::from(v),
        "out" => c.out = PathBuf::from(v),
        "seed" => c.seed = num(key, v)?,
        "hidden_units" => c.hidden_units = Some(num(key, v)?),
        "learning_rate" => c.learning_rate = Some(num(key, v)?),
        "epochs" => c.epochs = Some(num(key, v)?),
        "batch_size" => c.batch_size = Some(num(key, v)?),
        "constraint" => c.constraints.push(v.to_string()),
        "lambda" => c.lambda = Some(num(key, v)?),
        "lambdas" => c.lambdas = Some(parse_grid(v)?),
        "tnorm" => c.tnorm = v.parse()?,
        "method" => c.method = v.parse().map_err(|e| format!("{e}"))?,
        "correlated" => c.correlated = flag(key, v)?,
        "mode" => c.modes = parse_modes(v)?,
        "fast" => c.fast = flag(key, v)?,
        "split" => c.split_fraction = num(key, v)?,
        "balance" => c.balance = Some(flag(key, v)?),
        other => return Err(format!("unknown key `{other}`")),
    }
    Ok(())
}

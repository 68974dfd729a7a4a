//! Key-value experiment config files.
//!
//! ```text
//! # desk run
//! sizes = 100, 1000, 10000
//! samples = 50
//! alpha = 1.0
//! seed = 42
//! builders = simple, treap, wb, splay
//! optimal = true
//! optimal_cap = 10000
//! max_bumps = 1000
//! threads = 4
//! timing = false
//! ```
//!
//! Keys may be given in any order and all are optional; missing keys keep
//! their defaults.

use std::str::FromStr;

use bumptree::BuilderKind;

use crate::bench::ExperimentConfig;
use crate::error::{Error, Result};

pub fn parse_list<T: FromStr>(s: &str) -> std::result::Result<Vec<T>, String> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<T>().map_err(|_| format!("bad list item {p:?}")))
        .collect()
}

/// Sizes like `100,1e3,10000`.
pub fn parse_sizes(s: &str) -> std::result::Result<Vec<usize>, String> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.parse::<usize>().or_else(|_| match p.parse::<f64>() {
                Ok(v) if v >= 1.0 && v.fract() == 0.0 && v < 1e12 => Ok(v as usize),
                _ => Err(format!("bad size {p:?}")),
            })
        })
        .collect()
}

pub fn parse_builders(s: &str) -> std::result::Result<Vec<BuilderKind>, String> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<BuilderKind>().map_err(|e| format!("{e}: {p:?}")))
        .collect()
}

fn parse_bool(s: &str) -> std::result::Result<bool, String> {
    match s {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(format!("bad boolean {s:?}")),
    }
}

fn scalar<T: FromStr>(s: &str) -> std::result::Result<T, String> {
    s.parse::<T>().map_err(|_| format!("bad value {s:?}"))
}

/// Applies the settings in `text` on top of `base`.
pub fn apply_config(text: &str, mut base: ExperimentConfig) -> Result<ExperimentConfig> {
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| Error::parse(line, "expected `key = value`"))?;
        let (key, value) = (key.trim(), value.trim());
        let res: std::result::Result<(), String> = (|| {
            match key {
                "sizes" => base.sizes = parse_sizes(value)?,
                "samples" => base.samples_per_size = scalar(value)?,
                "alpha" => base.alpha = scalar(value)?,
                "seed" => base.master_seed = scalar(value)?,
                "builders" => base.builders = parse_builders(value)?,
                "optimal" => base.optimal = parse_bool(value)?,
                "optimal_cap" => base.optimal_cap = scalar(value)?,
                "max_bumps" => base.max_bumps = Some(scalar(value)?),
                "threads" => base.threads = Some(scalar(value)?),
                "timing" => base.timing = parse_bool(value)?,
                other => return Err(format!("unknown key {other:?}")),
            }
            Ok(())
        })();
        res.map_err(|msg| Error::parse(line, msg))?;
    }
    Ok(base)
}

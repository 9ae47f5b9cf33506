//! Flat `key=value` configuration files with flag overrides.
//!
//! Precedence, lowest first: built-in defaults, the `POLCOR_SEED` environment
//! variable (seed only), the config file, command-line flags.
//!
//! ```text
//! # comments and blank lines are ignored
//! theta = pi/8
//! xi = 0
//! duty = 0.5
//! seed = 7
//! overlap_mode = separated
//! ```

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::simulator::{OpticalConfig, OverlapMode};

pub const SEED_ENV: &str = "POLCOR_SEED";

pub const KEYS: [&str; 10] = [
    "theta",
    "xi",
    "psi_a",
    "psi_b",
    "eta",
    "i0",
    "n_bins",
    "duty",
    "seed",
    "overlap_mode",
];

/// Parses a real number or a multiple of π: `0.3`, `pi`, `-pi/4`, `3pi/8`,
/// `3*pi/8`.
pub fn parse_angle(key: &str, s: &str) -> Result<f64> {
    let t = s.trim().to_ascii_lowercase();
    if let Ok(v) = t.parse::<f64>() {
        return Ok(v);
    }
    let bad = || Error::invalid(key, s, "a number or [k*]pi[/n]");
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim().parse::<f64>().map_err(|_| bad())?),
        None => (t.as_str(), 1.0),
    };
    let coef = num.strip_suffix("pi").ok_or_else(bad)?.trim();
    let coef = coef.strip_suffix('*').unwrap_or(coef).trim();
    let k = match coef {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|_| bad())?,
    };
    Ok(k * PI / den)
}

fn parse_u64(key: &str, s: &str) -> Result<u64> {
    s.trim()
        .replace('_', "")
        .parse::<u64>()
        .map_err(|_| Error::invalid(key, s, "a non-negative integer"))
}

/// Sets one field from its textual value.
pub fn apply_key(cfg: &mut OpticalConfig, key: &str, value: &str) -> Result<()> {
    match key {
        "theta" => cfg.theta = parse_angle(key, value)?,
        "xi" => cfg.xi = parse_angle(key, value)?,
        "psi_a" => cfg.psi_a = parse_angle(key, value)?,
        "psi_b" => cfg.psi_b = parse_angle(key, value)?,
        "eta" => cfg.eta = parse_angle(key, value)?,
        "i0" => cfg.i0 = parse_angle(key, value)?,
        "duty" => cfg.duty = parse_angle(key, value)?,
        "n_bins" => cfg.n_bins = parse_u64(key, value)?,
        "seed" => cfg.seed = parse_u64(key, value)?,
        "overlap_mode" => cfg.overlap_mode = value.trim().parse::<OverlapMode>()?,
        other => return Err(Error::UnknownKey(other.to_string())),
    }
    Ok(())
}

/// `key=value` pairs from config text, in file order.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::invalid(
                &format!("line {}", lineno + 1),
                line,
                "key=value",
            )
        })?;
        let k = k.trim();
        if !KEYS.contains(&k) {
            return Err(Error::UnknownKey(k.to_string()));
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Flag values that override the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigOverrides {
    pub values: Vec<(String, String)>,
}

impl ConfigOverrides {
    pub fn set(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.values.push((key.to_string(), value.to_string()));
        self
    }
}

/// Resolves a fully validated configuration.
pub fn parse_config(
    file: Option<&Path>,
    overrides: &ConfigOverrides,
    env_seed: Option<&str>,
) -> Result<OpticalConfig> {
    let mut cfg = OpticalConfig::default();
    if let Some(seed) = env_seed {
        apply_key(&mut cfg, "seed", seed)?;
    }
    if let Some(path) = file {
        let text = fs::read_to_string(path)?;
        for (k, v) in parse_config_text(&text)? {
            apply_key(&mut cfg, &k, &v)?;
        }
    }
    for (k, v) in &overrides.values {
        apply_key(&mut cfg, k, v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

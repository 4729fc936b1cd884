//! Key/value settings merged from an INI-style config file and command-line flags.

use anyhow::{anyhow, bail, Context, Result};
use std::collections::BTreeMap;
use std::path::Path;

/// Error in the invocation itself (exit code 2).
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(UsageError(msg.into()))
}

/// Resolved settings for one subcommand: `[general]` and the subcommand's section of the
/// config file, overridden by flags given explicitly.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    /// Reads `[general]` and `[section]` from `path` (when given).
    pub fn load(path: Option<&Path>, section: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        if let Some(p) = path {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display())).map_err(|e| usage(format!("{e:#}")))?;
            let ini = ini::Ini::load_from_str(&text).map_err(|e| usage(format!("config {}: {e}", p.display())))?;
            for sec in ["general", section] {
                if let Some(props) = ini.section(Some(sec)) {
                    for (k, v) in props.iter() {
                        values.insert(k.trim().to_string(), v.trim().to_string());
                    }
                }
            }
            for (sec, _) in ini.iter() {
                if let Some(s) = sec {
                    if !KNOWN_SECTIONS.contains(&s) {
                        return Err(usage(format!("config {}: unknown section [{s}]", p.display())));
                    }
                }
            }
        }
        Ok(Settings { values })
    }

    /// Flag value wins over the config file.
    pub fn set(&mut self, key: &str, flag: Option<String>) {
        if let Some(v) = flag {
            self.values.insert(key.to_string(), v);
        }
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn string(&self, key: &str) -> Result<String> {
        self.raw(key).map(str::to_string).ok_or_else(|| usage(format!("missing setting '{key}'")))
    }

    pub fn string_or(&self, key: &str, default: &str) -> String {
        self.raw(key).unwrap_or(default).to_string()
    }

    pub fn parse_or<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| usage(format!("invalid value '{v}' for '{key}'"))),
        }
    }

    pub fn optional<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.raw(key).map(|v| v.parse().map_err(|_| usage(format!("invalid value '{v}' for '{key}'")))).transpose()
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        match self.raw(key) {
            None => Ok(default),
            Some("true" | "yes" | "1" | "on") => Ok(true),
            Some("false" | "no" | "0" | "off") => Ok(false),
            Some(v) => Err(usage(format!("invalid boolean '{v}' for '{key}'"))),
        }
    }

    /// Positive tolerance.
    pub fn tolerance_or(&self, key: &str, default: f64) -> Result<f64> {
        let t = self.parse_or(key, default)?;
        if !(t > 0.0) {
            bail!(usage(format!("tolerance '{key}' must be > 0")));
        }
        Ok(t)
    }

    /// `Nx,Ny` grid sizes.
    pub fn grid_or(&self, key: &str, default: (usize, usize)) -> Result<(usize, usize)> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => {
                let parts = parse_list(v).map_err(|_| usage(format!("invalid grid '{v}' (expected Nx,Ny)")))?;
                match parts.as_slice() {
                    [n] => Ok((*n, *n)),
                    [a, b] => Ok((*a, *b)),
                    _ => Err(usage(format!("invalid grid '{v}' (expected Nx,Ny)"))),
                }
            }
        }
    }

    /// Strictly increasing comma-separated list.
    pub fn ladder_or(&self, key: &str, default: &[usize]) -> Result<Vec<usize>> {
        let l = match self.raw(key) {
            None => default.to_vec(),
            Some(v) => parse_list(v).map_err(|_| usage(format!("invalid list '{v}' for '{key}'")))?,
        };
        if l.is_empty() || l.windows(2).any(|w| w[0] >= w[1]) {
            return Err(usage(format!("'{key}' must be a non-empty strictly increasing list")));
        }
        Ok(l)
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.values
    }
}

const KNOWN_SECTIONS: [&str; 7] = ["general", "quantize", "compose-test", "ess-norm", "fredholm", "bvp", "obstruction"];

fn parse_list(v: &str) -> Result<Vec<usize>> {
    v.split(',').map(|s| s.trim().parse::<usize>().map_err(|_| anyhow!("bad integer"))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config() {
        let dir = std::env::temp_dir().join(format!("fibered-settings-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("run.cfg");
        std::fs::write(&p, "[general]\nseed = 3\n\n[ess-norm]\nsymbol = aps\nn=32\n").unwrap();
        let mut s = Settings::load(Some(&p), "ess-norm").unwrap();
        assert_eq!(s.string("symbol").unwrap(), "aps");
        s.set("symbol", Some("const:0.7".into()));
        assert_eq!(s.string("symbol").unwrap(), "const:0.7");
        assert_eq!(s.parse_or("n", 64usize).unwrap(), 32);
        assert_eq!(s.parse_or("seed", 0u64).unwrap(), 3);
        std::fs::write(&p, "[nonsense]\nx=1\n").unwrap();
        assert!(Settings::load(Some(&p), "ess-norm").is_err());
    }

    #[test]
    fn ladders_must_increase() {
        let mut s = Settings::default();
        s.set("ladder", Some("8,8,12".into()));
        assert!(s.ladder_or("ladder", &[1]).is_err());
        s.set("grid", Some("16,8".into()));
        assert_eq!(s.grid_or("grid", (1, 1)).unwrap(), (16, 8));
    }
}

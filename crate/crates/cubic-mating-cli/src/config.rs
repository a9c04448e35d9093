//! Flat `key = value` configuration with defaults.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use cubic_mating::angles::Angle;
use cubic_mating::{boettcher, puzzle};

/// Keys, defaults and whether the value is fixed at build time.
const KEYS: &[(&str, &str, bool)] = &[
    ("depth", "12", false),
    ("depth_refined", "16", false),
    ("samples", "100", false),
    ("seed", "1", false),
    ("t", "2/3", false),
    ("m", "1", false),
    ("boundary_t", "1/2", false),
    ("suites", "symbolic,params,puzzle,mating,boundary", false),
    ("nest_words", "10", false),
    ("nest_bound", "1e-3", false),
    ("coverage_points", "2000", false),
    ("param_cap", "1000", false),
    ("param_tol", "1e-8", false),
    ("center_residual", "1e-10", false),
    ("tau_graph", "1e-6", true),
    ("merge_tol", "1e-5", true),
    ("landing_tol", "1e-7", true),
    ("itinerary_cap", "24", true),
    ("max_words", "3", true),
];

#[derive(Clone, Debug)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Default for Config {
    fn default() -> Self {
        Config { values: KEYS.iter().map(|(k, v, _)| (k.to_string(), v.to_string())).collect() }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Config::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Config> {
        let mut cfg = Config::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| anyhow!("line {}: expected key = value", n + 1))?;
            let (k, v) = (k.trim(), v.trim());
            let Some((_, _, fixed)) = KEYS.iter().find(|(key, _, _)| *key == k) else {
                bail!("line {}: unknown key `{k}`", n + 1);
            };
            cfg.values.insert(k.to_string(), v.to_string());
            if *fixed {
                let want = builtin(k);
                let got: f64 = v.parse().map_err(|_| anyhow!("line {}: `{k}` needs a number", n + 1))?;
                if (got - want).abs() > 1e-15 * want.abs() {
                    bail!("line {}: `{k}` is fixed at {want} in this build", n + 1);
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        for k in ["depth", "depth_refined", "samples", "m", "nest_words", "coverage_points", "param_cap"] {
            self.usize(k)?;
        }
        self.u64("seed")?;
        for k in ["nest_bound", "param_tol", "center_residual"] {
            self.f64(k)?;
        }
        self.angle("t")?;
        self.angle("boundary_t")?;
        if self.usize("depth")? > puzzle::MAX_DEPTH || self.usize("depth_refined")? > puzzle::MAX_DEPTH {
            bail!("depths are capped at {}", puzzle::MAX_DEPTH);
        }
        Ok(())
    }

    pub fn get(&self, k: &str) -> &str {
        self.values.get(k).map(String::as_str).unwrap_or("")
    }

    pub fn set(&mut self, k: &str, v: String) {
        self.values.insert(k.to_string(), v);
    }

    pub fn usize(&self, k: &str) -> Result<usize> {
        self.get(k).parse().map_err(|_| anyhow!("`{k}` needs a nonnegative integer, got `{}`", self.get(k)))
    }

    pub fn u64(&self, k: &str) -> Result<u64> {
        self.get(k).parse().map_err(|_| anyhow!("`{k}` needs an integer, got `{}`", self.get(k)))
    }

    pub fn f64(&self, k: &str) -> Result<f64> {
        self.get(k).parse().map_err(|_| anyhow!("`{k}` needs a number, got `{}`", self.get(k)))
    }

    pub fn angle(&self, k: &str) -> Result<Angle> {
        self.get(k).parse().map_err(|e| anyhow!("`{k}`: {e}"))
    }

    pub fn suites(&self) -> Vec<String> {
        self.get("suites").split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(&self.values).unwrap_or_default()
    }

    /// One line with every tolerance in effect.
    pub fn summary(&self) -> String {
        self.values.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ")
    }
}

fn builtin(k: &str) -> f64 {
    match k {
        "tau_graph" => puzzle::TAU_GRAPH,
        "merge_tol" => puzzle::MERGE_TOL,
        "landing_tol" => boettcher::LANDING_TOL,
        "itinerary_cap" => puzzle::MAX_DEPTH as f64,
        "max_words" => puzzle::MAX_WORDS as f64,
        _ => f64::NAN,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse() {
        let c = Config::parse("").unwrap();
        assert_eq!(c.usize("depth").unwrap(), 12);
        assert_eq!(c.suites().len(), 5);
    }

    #[test]
    fn malformed_lines_fail() {
        assert!(Config::parse("depth 12").is_err());
        assert!(Config::parse("colour = red").is_err());
        assert!(Config::parse("depth = twelve").is_err());
        assert!(Config::parse("tau_graph = 1e-3").is_err());
        assert!(Config::parse("tau_graph = 1e-6\n# note\nsamples = 20").is_ok());
    }
}

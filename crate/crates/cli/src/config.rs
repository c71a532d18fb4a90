//! Run configuration file and tolerance overrides.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use superdecay::{BuildParams, Suite, Tolerances, VerifySettings};

/// Everything a run needs. Every field has a default, so `{}` is a valid file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub build: BuildParams,
    pub verify: VerifySettings,
    /// Suites to run; empty means every suite that applies to the construction.
    pub suites: Vec<Suite>,
    pub output: OutputPaths,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputPaths {
    /// Directory used when neither `--out` nor the environment names one.
    pub dir: Option<PathBuf>,
    pub construction: String,
    pub report: String,
    pub samples: String,
    pub decay: String,
}

impl Default for OutputPaths {
    fn default() -> Self {
        Self {
            dir: None,
            construction: "construction.json".into(),
            report: "report.json".into(),
            samples: "samples.csv".into(),
            decay: "decay.csv".into(),
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("config {} does not match the schema", path.display()))
    }

    /// Output directory: the flag or environment first, then the config, then the working directory.
    pub fn out_dir(&self, flag: Option<&Path>) -> PathBuf {
        flag.map(Path::to_path_buf).or_else(|| self.output.dir.clone()).unwrap_or_else(|| PathBuf::from("."))
    }
}

/// Apply `arg` to `base`: either a path to a JSON object or an inline `name=value,...` list.
pub fn merge_tolerances(base: Tolerances, arg: &str) -> Result<Tolerances> {
    let overrides: Map<String, Value> = if Path::new(arg).is_file() {
        let text = std::fs::read_to_string(arg).with_context(|| format!("reading tolerances {arg}"))?;
        serde_json::from_str(&text).with_context(|| format!("tolerances file {arg} is not a JSON object"))?
    } else {
        let mut map = Map::new();
        for item in arg.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let Some((name, value)) = item.split_once('=') else {
                bail!("tolerance override {item:?} is not of the form name=value");
            };
            let value: f64 = value.trim().parse().with_context(|| format!("tolerance {name} = {value:?} is not a number"))?;
            map.insert(name.trim().to_string(), Value::from(value));
        }
        map
    };
    let Value::Object(mut merged) = serde_json::to_value(base)? else { unreachable!("tolerances serialize to an object") };
    for (name, value) in overrides {
        if !merged.contains_key(&name) {
            let known: Vec<&str> = merged.keys().map(String::as_str).collect();
            bail!("unknown tolerance {name:?}; known: {}", known.join(", "));
        }
        merged.insert(name, value);
    }
    serde_json::from_value(Value::Object(merged)).context("tolerance overrides do not match the schema")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_all_defaults() {
        let c: RunConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(c, RunConfig::default());
        assert!(serde_json::from_str::<RunConfig>(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn inline_overrides_merge() {
        let t = merge_tolerances(Tolerances::default(), "residual=1e-15, junction_u=2e-8").unwrap();
        assert_eq!(t.residual, 1e-15);
        assert_eq!(t.junction_u, 2e-8);
        assert_eq!(t.junction_a, Tolerances::default().junction_a);
        assert!(merge_tolerances(Tolerances::default(), "nope=1").is_err());
        assert!(merge_tolerances(Tolerances::default(), "residual").is_err());
    }
}

//! Optional JSON config file; command-line flags take precedence.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use bisect_core::{BisectError, Result};

/// Environment variable that overrides the output directory of a config file.
pub const OUT_DIR_ENV: &str = "BISECT_OUT_DIR";

#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub n: Option<usize>,
    #[serde(rename = "T")]
    pub t: Option<usize>,
    pub seed: Option<u64>,
    pub alg: Option<String>,
    pub q: Option<usize>,
    pub w: Option<usize>,
    pub d: Option<usize>,
    #[serde(rename = "gen")]
    pub generator: Option<String>,
    pub script: Option<Vec<usize>>,
    pub out_dir: Option<PathBuf>,
    pub strict: Option<bool>,
    pub seeds: Option<u64>,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Config> {
        let Some(path) = path else {
            return Ok(Config::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| BisectError::usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| BisectError::usage(format!("bad config {}: {e}", path.display())))
    }
}

/// Flag, then environment, then config file, then the working directory.
pub fn out_dir(flag: Option<PathBuf>, config: &Config) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .or_else(|| config.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(serde_json::from_str::<Config>(r#"{"n": 8, "colour": 1}"#).is_err());
        let c: Config = serde_json::from_str(r#"{"n": 8, "T": 20, "gen": "uniform"}"#).unwrap();
        assert_eq!((c.n, c.t), (Some(8), Some(20)));
    }
}

//! Run configuration files and manifests.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::evolve::EAConfig;
use crate::gate::GateSpec;
use crate::lattice::{Genome, MaterialConfig};
use crate::mechanics::{RelaxConfig, SimConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RandomSearchConfig {
    pub samples: usize,
    pub bins: usize,
}

impl Default for RandomSearchConfig {
    fn default() -> Self {
        Self { samples: 200, bins: 30 }
    }
}

/// Everything a command reads. Missing sections take their defaults.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub material: MaterialConfig,
    pub relax: RelaxConfig,
    pub sim: SimConfig,
    pub gate: GateSpec,
    pub evolution: EAConfig,
    pub random_search: RandomSearchConfig,
    /// Design used by the single-genome commands; all soft when absent.
    pub genome: Option<Genome>,
    /// Truth-table frequency; the AND frequency when absent.
    pub omega: Option<f64>,
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn genome(&self) -> Genome {
        self.genome.clone().unwrap_or_else(|| Genome::zeros(self.material.n_sites()))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid config {path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
}

/// Reads a config file, or the config embedded in a run manifest.
pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.to_owned(),
        source,
    })?;
    let parse_err = |source| ConfigError::Parse {
        path: path.to_owned(),
        source,
    };
    let value: serde_json::Value = serde_json::from_str(&text).map_err(parse_err)?;
    let is_manifest = value.get("command").is_some() && value.get("config").is_some();
    if is_manifest {
        let manifest: RunManifest = serde_json::from_value(value).map_err(parse_err)?;
        let mut config = manifest.config;
        config.seed = Some(manifest.seed);
        Ok(config)
    } else {
        serde_json::from_value(value).map_err(parse_err)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub command: String,
    pub config: RunConfig,
    pub seed: u64,
    pub version: String,
    pub started: String,
    pub finished: String,
    pub outputs: Vec<PathBuf>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_is_all_defaults() {
        let config: RunConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(config, RunConfig::default());
        assert_eq!(config.evolution.population_size, 50);
        assert_eq!(config.genome(), Genome::zeros(30));
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"materail": {}}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"sim": {"dtt": 1}}"#).is_err());
    }

    #[test]
    fn round_trip_through_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let config = RunConfig {
            genome: Some("1".repeat(30).parse().unwrap()),
            omega: Some(10.0),
            ..RunConfig::default()
        };
        let manifest = RunManifest {
            command: "truth-table".into(),
            config: config.clone(),
            seed: 17,
            version: "0".into(),
            started: "a".into(),
            finished: "b".into(),
            outputs: vec![],
        };
        let path = dir.path().join("m.json");
        fs::write(&path, serde_json::to_string_pretty(&manifest).unwrap()).unwrap();
        let loaded = load_config(&path).unwrap();
        assert_eq!(loaded, RunConfig { seed: Some(17), ..config });
    }

    #[test]
    fn read_errors() {
        assert!(matches!(load_config(Path::new("/nonexistent/x.json")), Err(ConfigError::Read { .. })));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        fs::write(&path, "{ not json").unwrap();
        assert!(matches!(load_config(&path), Err(ConfigError::Parse { .. })));
    }
}

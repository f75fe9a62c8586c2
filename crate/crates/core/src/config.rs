//! Experiment configuration: one TOML file plus `key=value` overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::{split_sizes, SplitRatios};
use crate::encoding::SEQUENCE_LENGTHS;
use crate::error::{Error, Result};
use crate::game::GameConfig;
use crate::sweep::SweepGrid;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    /// Seconds recorded after burn-in.
    pub duration: u64,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig { duration: 10_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    pub samples: usize,
    pub ratios: SplitRatios,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig { samples: 1000, ratios: SplitRatios::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsConfig {
    /// Observation lengths to score; longer than the dataset's are skipped.
    pub lengths: Vec<usize>,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig { lengths: SEQUENCE_LENGTHS.to_vec() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub game: GameConfig,
    pub simulate: SimulateConfig,
    pub dataset: DatasetConfig,
    pub metrics: MetricsConfig,
    pub sweep: SweepGrid,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 2024,
            out_dir: PathBuf::from("runs"),
            game: GameConfig::default(),
            simulate: SimulateConfig::default(),
            dataset: DatasetConfig::default(),
            metrics: MetricsConfig::default(),
            sweep: SweepGrid::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.game.validate()?;
        if self.simulate.duration == 0 {
            return Err(Error::config("simulate.duration must be positive"));
        }
        split_sizes(self.dataset.samples, self.dataset.ratios).map_err(|e| Error::config(e.to_string()))?;
        if let Some(l) = self.metrics.lengths.iter().find(|l| !SEQUENCE_LENGTHS.contains(l)) {
            return Err(Error::BadLength(*l));
        }
        self.sweep.strategies()?;
        Ok(())
    }

    /// Parses TOML text and applies overrides, then validates.
    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self> {
        let mut value: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        let config: ExperimentConfig = value.try_into().map_err(|e: toml::de::Error| Error::config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p).map_err(|e| Error::config(format!("{}: {e}", p.display())))?,
            None => String::new(),
        };
        Self::from_toml(&text, overrides)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config(e.to_string()))
    }
}

/// Applies `a.b.c=value`. The value is read as a TOML literal and falls
/// back to a bare string.
pub fn apply_override(table: &mut toml::Table, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| Error::config(format!("override `{spec}` is not key=value")))?;
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = key.trim().split('.').collect();
    let (last, path) = parts.split_last().expect("split yields one part");
    let mut cur = table;
    for p in path {
        let entry = cur.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::config(format!("`{p}` in `{key}` is not a table")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mix::MixStrategy;

    #[test]
    fn empty_file_is_the_default() {
        assert_eq!(ExperimentConfig::from_toml("", &[]).unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn default_round_trips_through_toml() {
        let c = ExperimentConfig::default();
        assert_eq!(ExperimentConfig::from_toml(&c.to_toml().unwrap(), &[]).unwrap(), c);
    }

    #[test]
    fn overrides_reach_nested_keys() {
        let c = ExperimentConfig::from_toml(
            "[game]\nusers = 50\n",
            &["game.strategy={kind=\"poisson\", lambda=20.0}".into(), "seed=9".into(), "out_dir=/tmp/x".into()],
        )
        .unwrap();
        assert_eq!(c.game.users, 50);
        assert_eq!(c.game.strategy, MixStrategy::poisson(20.0));
        assert_eq!(c.seed, 9);
        assert_eq!(c.out_dir, PathBuf::from("/tmp/x"));
    }

    #[test]
    fn invalid_values_are_config_errors() {
        for bad in [
            "game.strategy={kind=\"poisson\", lambda=0.0}",
            "game.users=2",
            "game.seq_len=100",
            "dataset.samples=2",
            "bogus=1",
        ] {
            let r = ExperimentConfig::from_toml("", &[bad.into()]);
            assert!(r.is_err(), "{bad}");
        }
        assert!(ExperimentConfig::from_toml("", &["novalue".into()]).is_err());
    }
}

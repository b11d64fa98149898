//! Config file handling: a TOML document with optional top-level
//! `global_seed` and `out_root`, plus one table per subcommand whose keys are the long flag
//! names in snake_case. Flags on the command line win over the file.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub const DEFAULT_OUT_ROOT: &str = "trimds-out";
pub const RUN_CONFIG_FILE: &str = "run_config.toml";

#[derive(Debug, Clone, Default, Deserialize)]
pub struct ConfigFile {
    #[serde(alias = "seed")]
    pub global_seed: Option<u64>,
    pub out_root: Option<PathBuf>,
    #[serde(flatten)]
    pub tables: toml::Table,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Command-line values layered over the `[command]` table.
    pub fn merge<T: Serialize + DeserializeOwned>(&self, command: &str, cli: &T) -> Result<T> {
        let mut table = match self.tables.get(command) {
            Some(toml::Value::Table(t)) => t.clone(),
            Some(_) => anyhow::bail!("config key `{command}` must be a table"),
            None => toml::Table::new(),
        };
        let given = toml::Table::try_from(cli).context("encoding command-line flags")?;
        table.extend(given);
        toml::Value::Table(table).try_into().with_context(|| format!("invalid `[{command}]` settings"))
    }
}

/// Fully resolved settings as written next to a command's outputs. Loading
/// this file with `--config` repeats the run.
#[derive(Serialize)]
pub struct RunConfig<'a, T: Serialize> {
    pub global_seed: u64,
    #[serde(flatten)]
    pub command: std::collections::BTreeMap<&'a str, &'a T>,
}

pub fn write_run_config<T: Serialize>(dir: &Path, seed: u64, command: &str, resolved: &T) -> Result<()> {
    let doc = RunConfig { global_seed: seed, command: [(command, resolved)].into_iter().collect() };
    let text = toml::to_string(&doc).context("encoding run config")?;
    fs::write(dir.join(RUN_CONFIG_FILE), text).with_context(|| format!("writing {}", dir.join(RUN_CONFIG_FILE).display()))
}

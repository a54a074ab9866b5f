//! Settings: built-in defaults, then a TOML file, then command-line flags.

use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Deserialize;

use shannon_core::compile::ConstantTable;
use shannon_core::desc::InstantiateOptions;
use shannon_core::norm::NormOptions;
use shannon_core::witness::WitnessOptions;

use crate::CliError;

pub const CONFIG_ENV: &str = "SHANNON_CONFIG";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Text,
    Csv,
    #[value(name = "jsonl", alias = "json-lines")]
    #[serde(alias = "jsonl")]
    JsonLines,
}

/// The TOML file. Every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub precision: Option<u32>,
    pub format: Option<Format>,
    /// Path of a `[[constant]]` table, relative to the config file.
    pub constants: Option<PathBuf>,
    pub max_window: Option<u64>,
    pub max_sum_terms: Option<u64>,
    pub max_work: Option<u64>,
    pub max_boxes: Option<usize>,
    pub max_steps: Option<u64>,
    pub max_log2_n: Option<u64>,
    pub max_direct: Option<u64>,
    pub max_q: Option<u64>,
}

/// Flags that override the file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub precision: Option<u32>,
    pub format: Option<Format>,
    pub constants: Option<PathBuf>,
    pub max_window: Option<u64>,
    pub max_steps: Option<u64>,
    pub max_log2_n: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct Config {
    /// Target width `2^-m` of printed enclosures.
    pub m: u32,
    pub format: Format,
    pub table: ConstantTable,
    pub instantiate: InstantiateOptions,
    pub norm: NormOptions,
    pub witness: WitnessOptions,
    /// Largest step budget handed to a machine.
    pub max_steps: u64,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))
}

impl Config {
    /// `file` is the `--config` path; without it `$SHANNON_CONFIG` is used
    /// when set.
    pub fn load(file: Option<&Path>, flags: &Overrides) -> Result<Config, CliError> {
        let env = std::env::var_os(CONFIG_ENV).map(PathBuf::from);
        let path = file.map(Path::to_path_buf).or(env);
        let fc: FileConfig = match &path {
            Some(p) => toml::from_str(&read(p)?)
                .map_err(|e| CliError::Usage(format!("config {}: {e}", p.display())))?,
            None => FileConfig::default(),
        };
        let base = path
            .as_ref()
            .and_then(|p| p.parent())
            .map(Path::to_path_buf)
            .unwrap_or_default();

        let m = flags.precision.or(fc.precision).unwrap_or(20);
        if !(1..=64).contains(&m) {
            return Err(CliError::Usage(format!("precision M = {m} is outside 1..=64")));
        }
        let table = match (&flags.constants, &fc.constants) {
            (Some(p), _) => ConstantTable::from_toml(&read(p)?)?,
            (None, Some(p)) => ConstantTable::from_toml(&read(&base.join(p))?)?,
            (None, None) => ConstantTable::default(),
        };

        let mut instantiate = InstantiateOptions::default();
        let mut norm = NormOptions::default();
        let mut witness = WitnessOptions::default();
        let mut max_steps = 1u64 << 24;
        let positive = |name: &str, v: u64| {
            if v == 0 {
                Err(CliError::Usage(format!("{name} must be positive")))
            } else {
                Ok(v)
            }
        };
        if let Some(v) = flags.max_window.or(fc.max_window) {
            instantiate.max_window = positive("max_window", v)?;
        }
        if let Some(v) = fc.max_sum_terms {
            instantiate.limits.max_sum_terms = positive("max_sum_terms", v)?;
        }
        if let Some(v) = fc.max_work {
            norm.max_work = positive("max_work", v)?;
        }
        if let Some(v) = fc.max_boxes {
            norm.max_boxes = positive("max_boxes", v as u64)? as usize;
        }
        if let Some(v) = flags.max_steps.or(fc.max_steps) {
            max_steps = positive("max_steps", v)?;
        }
        if let Some(v) = flags.max_log2_n.or(fc.max_log2_n) {
            witness.max_log2_n = positive("max_log2_n", v)?;
        }
        if let Some(v) = fc.max_direct {
            witness.max_direct = positive("max_direct", v)?;
        }
        if let Some(v) = fc.max_q {
            witness.max_q = positive("max_q", v)?;
        }
        Ok(Config {
            m,
            format: flags.format.or(fc.format).unwrap_or(Format::Text),
            table,
            instantiate,
            norm,
            witness,
            max_steps,
        })
    }
}

//! Run configuration: every metric default in one TOML-serializable tree.
//!
//! Resolution order: built-in defaults, then the config file, then
//! `SPECBENCH__SECTION__KEY` environment variables, then `--set section.key=value`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use specbench::fingerprints::FingerprintConfig;
use specbench::geometry::{ClashExclusions, GeometryParams};
use specbench::nmr_metrics::NmrConfig;
use specbench::seq_metrics::{Canonicalizer, TokenScheme};
use specbench::spectra::{Modality, Spectrum};
use specbench::vec_metrics::BinningConfig;

use crate::CliError;

pub const ENV_PREFIX: &str = "SPECBENCH__";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
#[derive(Default)]
pub struct RunConfig {
    pub seed: u64,
    pub nmr: NmrConfig,
    pub binning: Binning,
    pub geometry: GeometryConfig,
    pub fingerprint: FingerprintConfig,
    pub sequence: SequenceConfig,
    pub taskgen: TaskgenConfig,
}

/// One grid per vectorized modality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Binning {
    pub ir: BinningConfig,
    pub raman: BinningConfig,
    pub uv: BinningConfig,
    pub ms: BinningConfig,
}

impl Default for Binning {
    fn default() -> Self {
        Binning {
            ir: BinningConfig::ir_default(),
            raman: BinningConfig::new(0.0, 4000.0, 2.0).expect("valid grid"),
            uv: BinningConfig::new(190.0, 800.0, 1.0).expect("valid grid"),
            ms: BinningConfig::ms_default(),
        }
    }
}

impl Binning {
    pub fn for_modality(&self, m: Modality) -> Option<&BinningConfig> {
        match m {
            Modality::Ir => Some(&self.ir),
            Modality::Raman => Some(&self.raman),
            Modality::Uv => Some(&self.uv),
            Modality::MsPositive | Modality::MsNegative => Some(&self.ms),
            Modality::Carbon13 | Modality::Proton1 => None,
        }
    }

    pub fn for_spectrum(&self, s: &Spectrum) -> Option<&BinningConfig> {
        self.for_modality(s.modality())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryConfig {
    pub alpha: f64,
    pub beta: f64,
    pub exclusions: ClashExclusions,
    /// Replacement van der Waals radius table; the shipped one when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radii_table: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bond_table: Option<PathBuf>,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        let p = GeometryParams::default();
        GeometryConfig {
            alpha: p.alpha(),
            beta: p.beta(),
            exclusions: p.exclusions(),
            radii_table: None,
            bond_table: None,
        }
    }
}

impl GeometryConfig {
    pub fn params(&self) -> Result<GeometryParams, CliError> {
        let base = match (&self.radii_table, &self.bond_table) {
            (None, None) => GeometryParams::default(),
            (radii, bonds) => {
                let read = |p: &Option<PathBuf>, fallback: &str| match p {
                    Some(p) => crate::corpus::read_file(p),
                    None => Ok(fallback.to_string()),
                };
                let radii = read(radii, specbench::geometry::DEFAULT_RADII)?;
                let bonds = read(bonds, specbench::geometry::DEFAULT_BOND_LENGTHS)?;
                GeometryParams::from_tables(&radii, &bonds).map_err(|e| CliError::Config(e.to_string()))?
            }
        };
        base.with_alpha(self.alpha)
            .and_then(|p| p.with_beta(self.beta))
            .map(|p| p.with_exclusions(self.exclusions))
            .map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SequenceConfig {
    pub scheme: TokenScheme,
    pub canonicalizer: Canonicalizer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TaskgenConfig {
    /// Train, validation and test shares.
    pub fractions: [f64; 3],
    /// Give each split its own disjoint subset of every template pool.
    pub partition_templates: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub templates: Option<PathBuf>,
}

impl Default for TaskgenConfig {
    fn default() -> Self {
        TaskgenConfig { fractions: [0.8, 0.1, 0.1], partition_templates: true, templates: None }
    }
}

impl RunConfig {
    /// Resolves defaults, file, environment and `--set` overrides, in that order.
    pub fn resolve(
        file: Option<&Path>,
        env: impl IntoIterator<Item = (String, String)>,
        sets: &[String],
    ) -> Result<RunConfig, CliError> {
        let mut tree = toml::Value::try_from(RunConfig::default()).map_err(|e| CliError::Config(e.to_string()))?;
        if let Some(path) = file {
            let text = crate::corpus::read_file(path)?;
            let doc: toml::Value =
                toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            merge(&mut tree, doc);
        }
        let mut env: Vec<(String, String)> = env.into_iter().filter(|(k, _)| k.starts_with(ENV_PREFIX)).collect();
        env.sort();
        for (key, value) in env {
            let path: Vec<String> = key[ENV_PREFIX.len()..].split("__").map(str::to_lowercase).collect();
            set_path(&mut tree, &path, &value).map_err(|e| CliError::Config(format!("{key}: {e}")))?;
        }
        for s in sets {
            let (key, value) =
                s.split_once('=').ok_or_else(|| CliError::Config(format!("--set expects key=value, got '{s}'")))?;
            let path: Vec<String> = key.trim().split('.').map(str::to_string).collect();
            set_path(&mut tree, &path, value.trim()).map_err(|e| CliError::Config(format!("{key}: {e}")))?;
        }
        tree.try_into().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks that derived parameters build and returns non-fatal remarks.
    pub fn validate(&self) -> Result<Vec<String>, CliError> {
        self.geometry.params()?;
        self.fingerprint.validate().map_err(|e| CliError::Config(e.to_string()))?;
        let [a, b, c] = self.taskgen.fractions;
        if !([a, b, c].iter().all(|f| *f >= 0.0) && ((a + b + c) - 1.0).abs() < 1e-9) {
            return Err(CliError::Config(format!(
                "taskgen.fractions {:?} must be non-negative and sum to 1",
                self.taskgen.fractions
            )));
        }
        Ok(self.nmr.warnings())
    }
}

fn merge(base: &mut toml::Value, over: toml::Value) {
    match (base, over) {
        (toml::Value::Table(b), toml::Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Values are read as TOML literals; anything that is not one is taken as a string.
fn set_path(tree: &mut toml::Value, path: &[String], raw: &str) -> Result<(), String> {
    if path.is_empty() || path.iter().any(String::is_empty) {
        return Err("empty key".into());
    }
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let mut node = tree;
    for key in &path[..path.len() - 1] {
        let table = node.as_table_mut().ok_or_else(|| format!("'{key}' is not a section"))?;
        node = table.entry(key.clone()).or_insert_with(|| toml::Value::Table(Default::default()));
    }
    let table = node.as_table_mut().ok_or("parent is not a section")?;
    table.insert(path[path.len() - 1].clone(), value);
    Ok(())
}

//! Run configuration for `simulate`.
//!
//! The effective configuration is built in three layers: built-in defaults,
//! then the optional TOML file, then command-line overrides (`--set
//! key.path=value` and the dedicated flags). The merged tree is validated
//! against [`RunConfig`], which rejects unknown keys, and then re-serialized;
//! those bytes are what `effective_config.toml` holds and what
//! [`config_hash`] digests.
//!
//! ```toml
//! schema_version = 1
//! experiment = "iv"                  # "iv" or "te"
//! variants = ["ba", "post-ba", "oba"]
//! replications = 500
//! master_seed = 20170519
//! level = 0.05
//! # null_value = 1.0                 # defaults to the true parameter
//!
//! [boosting]
//! m_max = 100
//! shrinkage = 1.0
//! stop_rule = "aicc"                 # "aicc", "fixed" or "tol"
//! residual_tol = 0.01
//!
//! [iv]
//! n = 100
//! p = 100
//! s = 5
//! mu = 180.0
//! rho = 0.5
//! corr_ev = 0.6
//! beta_true = 1.0
//! sigma_e = 1.0
//!
//! [te]
//! n = 100
//! p = 200
//! alpha0 = 0.5
//! rho = 0.5
//! decay_exponent = 2.0
//!
//! [output]
//! decimals = 3
//! reference_columns = true
//!
//! [[reference.iv]]
//! label = "post-Lasso"
//! bias = 0.194
//! rp = 0.032
//! note = "transcribed from a published simulation table; not computed"
//! ```

use std::fs;
use std::path::Path;

use l2boost_core::dgp::{DgpConfigIv, DgpConfigTe};
use l2boost_core::montecarlo::{DgpConfig, Experiment, McConfig, TableColumn};
use l2boost_core::{BoostingConfig, StopRule, Variant};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use toml::{Table, Value};

use crate::error::{AppError, Result};

pub const SCHEMA_VERSION: u32 = 1;

const TRANSCRIBED: &str = "transcribed from a published simulation table; not computed";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub experiment: Experiment,
    pub variants: Vec<Variant>,
    pub replications: usize,
    pub master_seed: u64,
    pub level: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub null_value: Option<f64>,
    #[serde(default)]
    pub boosting: BoostingSection,
    #[serde(default)]
    pub iv: DgpConfigIv,
    #[serde(default)]
    pub te: DgpConfigTe,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub reference: ReferenceSection,
}

/// Boosting settings shared by every variant of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoostingSection {
    pub m_max: usize,
    pub shrinkage: f64,
    pub stop_rule: StopRule,
    pub residual_tol: f64,
}

impl Default for BoostingSection {
    fn default() -> Self {
        let b = BoostingConfig::default();
        Self {
            m_max: b.m_max,
            shrinkage: b.shrinkage,
            stop_rule: b.stop_rule,
            residual_tol: b.residual_tol,
        }
    }
}

impl BoostingSection {
    pub fn for_variant(&self, variant: Variant) -> BoostingConfig {
        BoostingConfig {
            variant,
            m_max: self.m_max,
            shrinkage: self.shrinkage,
            stop_rule: self.stop_rule,
            residual_tol: self.residual_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub decimals: usize,
    /// Prepend the transcribed reference columns to the table.
    pub reference_columns: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            decimals: 3,
            reference_columns: true,
        }
    }
}

/// A literal column copied from an external results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceColumn {
    pub label: String,
    pub bias: f64,
    pub rp: f64,
    #[serde(default)]
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReferenceSection {
    pub iv: Vec<ReferenceColumn>,
    pub te: Vec<ReferenceColumn>,
}

impl Default for ReferenceSection {
    fn default() -> Self {
        let post_lasso = |bias, rp| ReferenceColumn {
            label: "post-Lasso".into(),
            bias,
            rp,
            note: TRANSCRIBED.into(),
        };
        Self {
            iv: vec![post_lasso(0.194, 0.032)],
            te: vec![post_lasso(0.082, 0.002)],
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            experiment: Experiment::Iv,
            variants: Variant::ALL.to_vec(),
            replications: 500,
            master_seed: 20170519,
            level: 0.05,
            null_value: None,
            boosting: BoostingSection::default(),
            iv: DgpConfigIv::default(),
            te: DgpConfigTe::default(),
            output: OutputSection::default(),
            reference: ReferenceSection::default(),
        }
    }
}

impl RunConfig {
    pub fn dgp(&self) -> DgpConfig {
        match self.experiment {
            Experiment::Iv => DgpConfig::Iv(self.iv.clone()),
            Experiment::Te => DgpConfig::Te(self.te.clone()),
        }
    }

    pub fn mc_config(&self, variant: Variant) -> McConfig {
        let dgp = self.dgp();
        McConfig {
            boosting: self.boosting.for_variant(variant),
            replications: self.replications,
            level: self.level,
            null_value: self.null_value.unwrap_or_else(|| dgp.truth()),
            ..McConfig::new(dgp, variant, self.master_seed)
        }
    }

    pub fn references(&self) -> Vec<TableColumn> {
        if !self.output.reference_columns {
            return Vec::new();
        }
        let refs = match self.experiment {
            Experiment::Iv => &self.reference.iv,
            Experiment::Te => &self.reference.te,
        };
        refs.iter().map(|r| TableColumn::reference(&r.label, r.bias, r.rp)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(AppError::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.variants.is_empty() {
            return Err(AppError::Config("variants must not be empty".into()));
        }
        if self.master_seed > i64::MAX as u64 {
            return Err(AppError::Config("master_seed must be at most 2^63 - 1".into()));
        }
        if self.output.decimals > 17 {
            return Err(AppError::Config("output.decimals must be at most 17".into()));
        }
        for v in &self.variants {
            self.mc_config(*v)
                .validate()
                .map_err(|e| AppError::Config(e.to_string()))?;
        }
        Ok(())
    }

    /// Canonical TOML text of the configuration.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }
}

/// Command-line layer applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    /// Raw `key.path=value` assignments, applied in order.
    pub set: Vec<String>,
    pub experiment: Option<Experiment>,
    pub variants: Vec<Variant>,
    pub replications: Option<usize>,
    pub master_seed: Option<u64>,
}

pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<RunConfig> {
    let mut tree = Value::try_from(RunConfig::default()).expect("defaults serialize");
    if let Some(path) = path {
        let text = fs::read_to_string(path).map_err(|e| AppError::Config(format!("{}: {e}", path.display())))?;
        let file: Table = text
            .parse()
            .map_err(|e| AppError::Config(format!("{}: {e}", path.display())))?;
        merge(&mut tree, Value::Table(file));
    }
    for assignment in &overrides.set {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| AppError::Config(format!("--set expects key=value, got `{assignment}`")))?;
        set_path(&mut tree, key.trim(), parse_value(raw.trim()))?;
    }
    if let Some(e) = overrides.experiment {
        set_path(&mut tree, "experiment", Value::String(e.key().into()))?;
    }
    if !overrides.variants.is_empty() {
        let list = overrides.variants.iter().map(|v| Value::String(v.key().into())).collect();
        set_path(&mut tree, "variants", Value::Array(list))?;
    }
    if let Some(r) = overrides.replications {
        set_path(&mut tree, "replications", Value::Integer(r as i64))?;
    }
    if let Some(s) = overrides.master_seed {
        let s = i64::try_from(s).map_err(|_| AppError::Config("master_seed must be at most 2^63 - 1".into()))?;
        set_path(&mut tree, "master_seed", Value::Integer(s))?;
    }
    let cfg: RunConfig = tree.try_into().map_err(|e: toml::de::Error| AppError::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Hex SHA-256 of the canonical TOML text.
pub fn config_hash(cfg: &RunConfig) -> String {
    hex::encode(Sha256::digest(cfg.to_toml().as_bytes()))
}

fn merge(base: &mut Value, top: Value) {
    match (base, top) {
        (Value::Table(b), Value::Table(t)) => {
            for (k, v) in t {
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

/// Values are read as TOML literals; anything that does not parse as one is
/// taken as a bare string, so `--set experiment=te` works unquoted.
fn parse_value(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

fn set_path(tree: &mut Value, key: &str, value: Value) -> Result<()> {
    let mut node = tree;
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(AppError::Config(format!("invalid key `{key}`")));
    }
    let (last, parents) = parts.split_last().expect("non-empty");
    for part in parents {
        let table = node
            .as_table_mut()
            .ok_or_else(|| AppError::Config(format!("`{key}`: `{part}` is not inside a table")))?;
        node = table
            .entry(part.to_string())
            .or_insert_with(|| Value::Table(Table::new()));
    }
    let table = node
        .as_table_mut()
        .ok_or_else(|| AppError::Config(format!("`{key}` does not name a table entry")))?;
    table.insert(last.to_string(), value);
    Ok(())
}

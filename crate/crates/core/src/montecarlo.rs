//! Monte Carlo replications for the two simulation designs.
//!
//! A replication is a pure function of the configuration and its index, so
//! executors may run replications in any order or on any number of threads.
//! Aggregation always walks the index-ordered outcomes; see
//! [`summarize`].

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::boosting::{BoostingConfig, Variant};
use crate::dgp::{gen_iv, gen_te, DgpConfigIv, DgpConfigTe};
use crate::error::{Error, Result};
use crate::inference::{double_selection, iv_estimate, reject_null};
use crate::rng::replication_stream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Iv,
    Te,
}

impl Experiment {
    pub fn key(self) -> &'static str {
        match self {
            Experiment::Iv => "iv",
            Experiment::Te => "te",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DgpConfig {
    Iv(DgpConfigIv),
    Te(DgpConfigTe),
}

impl DgpConfig {
    pub fn experiment(&self) -> Experiment {
        match self {
            DgpConfig::Iv(_) => Experiment::Iv,
            DgpConfig::Te(_) => Experiment::Te,
        }
    }

    /// The true value of the target parameter.
    pub fn truth(&self) -> f64 {
        match self {
            DgpConfig::Iv(c) => c.beta_true,
            DgpConfig::Te(c) => c.alpha0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DgpConfig::Iv(c) => c.validate(),
            DgpConfig::Te(c) => c.validate(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub dgp: DgpConfig,
    pub boosting: BoostingConfig,
    pub replications: usize,
    pub master_seed: u64,
    /// Index of the first replication; replication `r` uses stream
    /// `first_replication + r`.
    pub first_replication: u64,
    /// Value under the tested null (the truth by default).
    pub null_value: f64,
    pub level: f64,
}

impl McConfig {
    pub fn new(dgp: DgpConfig, variant: Variant, master_seed: u64) -> Self {
        let null_value = dgp.truth();
        Self {
            dgp,
            boosting: BoostingConfig::new(variant),
            replications: 500,
            master_seed,
            first_replication: 0,
            null_value,
            level: 0.05,
        }
    }

    pub fn experiment(&self) -> Experiment {
        self.dgp.experiment()
    }

    pub fn validate(&self) -> Result<()> {
        self.dgp.validate()?;
        self.boosting.validate()?;
        if self.replications < 1 {
            return Err(Error::InvalidConfig("replications must be at least 1".into()));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::InvalidConfig(format!("level must lie in (0, 1), got {}", self.level)));
        }
        if !self.null_value.is_finite() {
            return Err(Error::InvalidConfig("null_value must be finite".into()));
        }
        Ok(())
    }
}

/// Outcome of one successful replication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Replication {
    pub index: u64,
    pub estimate: f64,
    pub se: f64,
    pub rejected: bool,
}

/// Runs replication `r` (zero-based, relative to `cfg.first_replication`).
pub fn run_replication(cfg: &McConfig, r: usize) -> Result<Replication> {
    let index = cfg.first_replication + r as u64;
    let mut rng = replication_stream(cfg.master_seed, index);
    let (estimate, se) = match &cfg.dgp {
        DgpConfig::Iv(dgp) => {
            let s = gen_iv(dgp, &mut rng)?;
            let e = iv_estimate(&s.y, &s.d, &s.z, &cfg.boosting)?;
            (e.beta_hat, e.se)
        }
        DgpConfig::Te(dgp) => {
            let s = gen_te(dgp, &mut rng)?;
            let e = double_selection(&s.y, &s.d, &s.x, &cfg.boosting)?;
            (e.alpha_hat, e.se)
        }
    };
    Ok(Replication {
        index,
        estimate,
        se,
        rejected: reject_null(estimate, se, cfg.null_value, cfg.level),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McSummary {
    pub truth: f64,
    /// Estimates of the successful replications, in replication order.
    pub estimates: Vec<f64>,
    pub ses: Vec<f64>,
    pub rejections: Vec<bool>,
    /// `mean(estimates) - truth`.
    pub bias: f64,
    /// `|bias|`, the quantity compared against published tables.
    pub abs_bias: f64,
    /// Mean absolute error `mean(|estimate - truth|)`.
    pub mae: f64,
    /// Fraction of successful replications rejecting the null.
    pub rp: f64,
    /// `sd(estimates) / sqrt(R_effective)`.
    pub mc_se_bias: f64,
    /// Replications that failed (e.g. an empty first stage).
    pub failures: usize,
}

impl McSummary {
    pub fn effective_replications(&self) -> usize {
        self.estimates.len()
    }
}

/// Aggregates index-ordered replication outcomes. Failed replications are
/// counted and excluded.
pub fn summarize(truth: f64, outcomes: &[Result<Replication>]) -> Result<McSummary> {
    let ok: Vec<&Replication> = outcomes.iter().filter_map(|o| o.as_ref().ok()).collect();
    let failures = outcomes.len() - ok.len();
    if ok.is_empty() {
        return Err(Error::AllReplicationsFailed {
            replications: outcomes.len(),
        });
    }
    let estimates: Vec<f64> = ok.iter().map(|r| r.estimate).collect();
    let ses = ok.iter().map(|r| r.se).collect();
    let rejections: Vec<bool> = ok.iter().map(|r| r.rejected).collect();
    let r = estimates.len() as f64;
    let mean = estimates.iter().sum::<f64>() / r;
    let bias = mean - truth;
    let mae = estimates.iter().map(|e| (e - truth).abs()).sum::<f64>() / r;
    let rp = rejections.iter().filter(|b| **b).count() as f64 / r;
    let mc_se_bias = if estimates.len() > 1 {
        let var = estimates.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (r - 1.0);
        libm::sqrt(var / r)
    } else {
        0.0
    };
    Ok(McSummary {
        truth,
        estimates,
        ses,
        rejections,
        bias,
        abs_bias: bias.abs(),
        mae,
        rp,
        mc_se_bias,
        failures,
    })
}

/// Sequential reference executor.
pub fn run_mc_sequential(cfg: &McConfig) -> Result<McSummary> {
    cfg.validate()?;
    let outcomes: Vec<Result<Replication>> = (0..cfg.replications).map(|r| run_replication(cfg, r)).collect();
    summarize(cfg.dgp.truth(), &outcomes)
}

/// One column of a comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableColumn {
    pub label: String,
    pub bias: f64,
    pub rp: f64,
    /// Transcribed from an external source rather than computed here.
    pub reference: bool,
    pub mc_se_bias: Option<f64>,
    pub replications: Option<usize>,
    pub failures: Option<usize>,
}

impl TableColumn {
    pub fn computed(label: &str, s: &McSummary) -> Self {
        Self {
            label: label.into(),
            bias: s.abs_bias,
            rp: s.rp,
            reference: false,
            mc_se_bias: Some(s.mc_se_bias),
            replications: Some(s.effective_replications()),
            failures: Some(s.failures),
        }
    }

    pub fn reference(label: &str, bias: f64, rp: f64) -> Self {
        Self {
            label: label.into(),
            bias,
            rp,
            reference: true,
            mc_se_bias: None,
            replications: None,
            failures: None,
        }
    }
}

/// A two-row (`bias`, `RP`) table with one column per estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub columns: Vec<TableColumn>,
}

impl ComparisonTable {
    pub const ROWS: [&'static str; 2] = ["bias", "RP"];

    pub fn shape(&self) -> (usize, usize) {
        (Self::ROWS.len(), self.columns.len())
    }

    /// Cell strings, row-major, with `decimals` fixed decimals.
    pub fn cells(&self, decimals: usize) -> [Vec<String>; 2] {
        [
            self.columns.iter().map(|c| format_fixed(c.bias, decimals)).collect(),
            self.columns.iter().map(|c| format_fixed(c.rp, decimals)).collect(),
        ]
    }
}

/// Reference columns first (as printed in published tables), then the
/// computed columns in the order given.
pub fn compare_table(summaries: &[(String, McSummary)], references: &[TableColumn]) -> ComparisonTable {
    let mut columns: Vec<TableColumn> = references
        .iter()
        .cloned()
        .map(|mut c| {
            c.reference = true;
            c
        })
        .collect();
    columns.extend(summaries.iter().map(|(label, s)| TableColumn::computed(label, s)));
    ComparisonTable { columns }
}

/// Fixed-point rendering. Rounds the exact binary value to nearest, with
/// exact decimal ties going to the even digit.
pub fn format_fixed(v: f64, decimals: usize) -> String {
    format!("{:.*}", decimals, v)
}

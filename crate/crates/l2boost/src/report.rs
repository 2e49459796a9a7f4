//! Simulation artifacts: `summary.csv`, `summary.json` and the text table.
//!
//! `summary.json` holds everything at full precision; the CSV and text
//! renderings are derived from it, so `report` reproduces them exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use l2boost_core::montecarlo::{compare_table, format_fixed, ComparisonTable, Experiment, McSummary};
use l2boost_core::Variant;
use serde::{Deserialize, Serialize};

use crate::config::{config_hash, RunConfig};
use crate::error::{AppError, Result};

pub const SUMMARY_CSV: &str = "summary.csv";
pub const SUMMARY_JSON: &str = "summary.json";
pub const EFFECTIVE_CONFIG: &str = "effective_config.toml";

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub experiment: Experiment,
    pub config_hash: String,
    pub master_seed: u64,
    pub replications: usize,
    pub level: f64,
    pub decimals: usize,
}

/// Per-variant statistics beyond the two table rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub label: String,
    pub variant: Variant,
    pub signed_bias: f64,
    pub abs_bias: f64,
    pub mae: f64,
    pub rp: f64,
    pub mc_se_bias: f64,
    pub mean_se: f64,
    pub sd_estimate: f64,
    pub replications: usize,
    pub failures: usize,
}

impl Diagnostics {
    pub fn new(variant: Variant, s: &McSummary) -> Self {
        let r = s.effective_replications() as f64;
        let mean_se = s.ses.iter().sum::<f64>() / r;
        Self {
            label: variant.label().into(),
            variant,
            signed_bias: s.bias,
            abs_bias: s.abs_bias,
            mae: s.mae,
            rp: s.rp,
            mc_se_bias: s.mc_se_bias,
            mean_se,
            sd_estimate: s.mc_se_bias * r.sqrt(),
            replications: s.effective_replications(),
            failures: s.failures,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryReport {
    pub schema_version: u32,
    pub metadata: Metadata,
    pub table: ComparisonTable,
    pub diagnostics: Vec<Diagnostics>,
}

impl SummaryReport {
    pub fn new(cfg: &RunConfig, table: ComparisonTable, diagnostics: Vec<Diagnostics>) -> Self {
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            metadata: Metadata {
                experiment: cfg.experiment,
                config_hash: config_hash(cfg),
                master_seed: cfg.master_seed,
                replications: cfg.replications,
                level: cfg.level,
                decimals: cfg.output.decimals,
            },
            table,
            diagnostics,
        }
    }

    fn reference_labels(&self) -> Vec<&str> {
        self.table
            .columns
            .iter()
            .filter(|c| c.reference)
            .map(|c| c.label.as_str())
            .collect()
    }

    /// `#` metadata lines followed by the `bias`/`RP` table.
    pub fn render_csv(&self) -> String {
        let m = &self.metadata;
        let mut out = String::new();
        writeln!(out, "# experiment={}", m.experiment.key()).unwrap();
        writeln!(out, "# config_hash={}", m.config_hash).unwrap();
        writeln!(out, "# master_seed={}", m.master_seed).unwrap();
        writeln!(out, "# replications={}", m.replications).unwrap();
        writeln!(out, "# reference_columns={}", self.reference_labels().join(";")).unwrap();
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let mut header = vec!["statistic"];
        header.extend(self.table.columns.iter().map(|c| c.label.as_str()));
        w.write_record(&header).unwrap();
        for (name, cells) in ComparisonTable::ROWS.iter().zip(self.table.cells(m.decimals)) {
            let mut row = vec![name.to_string()];
            row.extend(cells);
            w.write_record(&row).unwrap();
        }
        out.push_str(std::str::from_utf8(&w.into_inner().unwrap()).unwrap());
        out
    }

    pub fn render_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: Self = serde_json::from_str(text).map_err(|e| AppError::Data(format!("{SUMMARY_JSON}: {e}")))?;
        if r.schema_version != REPORT_SCHEMA_VERSION {
            return Err(AppError::Data(format!(
                "{SUMMARY_JSON}: unsupported schema_version {}",
                r.schema_version
            )));
        }
        Ok(r)
    }

    /// Right-aligned columns; reference columns carry a `*`. A final row
    /// gives the Monte Carlo standard error of the bias where it exists.
    pub fn render_text(&self) -> String {
        let m = &self.metadata;
        let d = m.decimals;
        let headers: Vec<String> = self
            .table
            .columns
            .iter()
            .map(|c| if c.reference { format!("{}*", c.label) } else { c.label.clone() })
            .collect();
        let [bias, rp] = self.table.cells(d);
        let mc_se: Vec<String> = self
            .table
            .columns
            .iter()
            .map(|c| c.mc_se_bias.map_or_else(|| "-".to_string(), |v| format_fixed(v, d)))
            .collect();
        let rows = [("", &headers), ("bias", &bias), ("RP", &rp), ("MC s.e.", &mc_se)];
        let first = rows.iter().map(|(n, _)| n.len()).max().unwrap_or(0);
        let widths: Vec<usize> = (0..headers.len())
            .map(|j| rows.iter().map(|(_, cells)| cells[j].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        writeln!(
            out,
            "{} design, R = {}, seed = {}, config {}",
            m.experiment.key().to_uppercase(),
            m.replications,
            m.master_seed,
            &m.config_hash[..m.config_hash.len().min(12)]
        )
        .unwrap();
        for (name, cells) in rows {
            let mut line = format!("{name:<first$}");
            for (cell, w) in cells.iter().zip(&widths) {
                write!(line, "  {cell:>w$}").unwrap();
            }
            writeln!(out, "{}", line.trim_end()).unwrap();
        }
        if self.table.columns.iter().any(|c| c.reference) {
            writeln!(out, "* reference value transcribed from a published table, not computed").unwrap();
        }
        for x in self.diagnostics.iter().filter(|x| x.failures > 0) {
            writeln!(out, "{}: {} failed replications excluded", x.label, x.failures).unwrap();
        }
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.render_text(),
            Format::Csv => self.render_csv(),
            Format::Json => self.render_json(),
        }
    }

    /// Writes `summary.csv`, `summary.json` and `effective_config.toml`.
    pub fn write_artifacts(&self, cfg: &RunConfig, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(AppError::io(dir))?;
        for (name, body) in [
            (EFFECTIVE_CONFIG, cfg.to_toml()),
            (SUMMARY_CSV, self.render_csv()),
            (SUMMARY_JSON, self.render_json()),
        ] {
            let path = dir.join(name);
            fs::write(&path, body).map_err(AppError::io(path))?;
        }
        Ok(())
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(SUMMARY_JSON);
        if !path.is_file() {
            return Err(AppError::MissingArtifact(path));
        }
        let text = fs::read_to_string(&path).map_err(AppError::io(&path))?;
        Self::from_json(&text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Csv,
    Json,
}

/// Builds the comparison table and diagnostics for a finished run.
pub fn build_report(cfg: &RunConfig, results: &[(Variant, McSummary)]) -> SummaryReport {
    let labelled: Vec<(String, McSummary)> = results
        .iter()
        .map(|(v, s)| (v.label().to_string(), s.clone()))
        .collect();
    let table = compare_table(&labelled, &cfg.references());
    let diagnostics = results.iter().map(|(v, s)| Diagnostics::new(*v, s)).collect();
    SummaryReport::new(cfg, table, diagnostics)
}
